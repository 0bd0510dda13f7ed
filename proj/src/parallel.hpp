#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace stairkit::detail {

/// Calls fn(band, row_begin, row_end) over contiguous row bands, one thread per band.
template <typename Fn>
void for_row_bands(std::size_t rows, std::size_t threads, Fn&& fn) {
    const std::size_t bands = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(rows, 1));
    if (bands == 1) {
        fn(std::size_t{0}, std::size_t{0}, rows);
        return;
    }
    std::vector<std::jthread> workers;
    workers.reserve(bands - 1);
    for (std::size_t b = 1; b < bands; ++b)
        workers.emplace_back([&fn, b, rows, bands] { fn(b, rows * b / bands, rows * (b + 1) / bands); });
    fn(std::size_t{0}, std::size_t{0}, rows / bands);
}

inline std::size_t band_count(std::size_t rows, std::size_t threads) {
    return std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(rows, 1));
}

}  // namespace stairkit::detail
