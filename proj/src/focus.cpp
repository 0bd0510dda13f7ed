#include "stairkit/focus.hpp"

#include "stairkit/error.hpp"

#include <fmt/format.h>

namespace stairkit {

namespace {

// (row offset, col offset) of each output channel block.
constexpr std::size_t kBlockOffset[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};

}  // namespace

TensorGrid focus_slice(const TensorGrid& image) {
    if (image.rank() != 3)
        throw DimensionError(fmt::format("focus_slice needs a rank-3 grid, got {}", dims_string(image.dims())));
    const std::size_t h = image.rows(), w = image.cols(), c = image.channels();
    if (h % 2 != 0 || w % 2 != 0)
        throw DimensionError(fmt::format("focus_slice needs even H and W, got {}x{}", h, w));

    TensorGrid out({h / 2, w / 2, 4 * c}, image.dtype());
    for (std::size_t r = 0; r < h / 2; ++r)
        for (std::size_t q = 0; q < w / 2; ++q)
            for (std::size_t blk = 0; blk < 4; ++blk)
                for (std::size_t ch = 0; ch < c; ++ch)
                    out.at(r, q, blk * c + ch) =
                        image.at(2 * r + kBlockOffset[blk][0], 2 * q + kBlockOffset[blk][1], ch);
    return out;
}

TensorGrid focus_unslice(const TensorGrid& sliced) {
    if (sliced.rank() != 3 || sliced.channels() % 4 != 0)
        throw DimensionError(fmt::format("focus_unslice needs rank 3 with 4C channels, got {}",
                                         dims_string(sliced.dims())));
    const std::size_t h = sliced.rows(), w = sliced.cols(), c = sliced.channels() / 4;
    TensorGrid out({2 * h, 2 * w, c}, sliced.dtype());
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t q = 0; q < w; ++q)
            for (std::size_t blk = 0; blk < 4; ++blk)
                for (std::size_t ch = 0; ch < c; ++ch)
                    out.at(2 * r + kBlockOffset[blk][0], 2 * q + kBlockOffset[blk][1], ch) =
                        sliced.at(r, q, blk * c + ch);
    return out;
}

}  // namespace stairkit
