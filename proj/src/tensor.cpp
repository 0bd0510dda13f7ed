#include "stairkit/tensor.hpp"

#include "stairkit/error.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>

#include <fmt/format.h>

namespace stairkit {

namespace {

constexpr char kMagic[4] = {'S', 'T', 'N', '3'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kFixedHeader = 8;

std::size_t product(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

TensorGrid::TensorGrid(std::vector<std::size_t> dims, DType dtype)
    : dims_(std::move(dims)), dtype_(dtype), data_(product(dims_), 0.0f) {
    validate();
}

TensorGrid::TensorGrid(std::vector<std::size_t> dims, DType dtype, std::vector<float> data)
    : dims_(std::move(dims)), dtype_(dtype), data_(std::move(data)) {
    validate();
}

TensorGrid TensorGrid::zeros(std::size_t rows, std::size_t cols, std::size_t channels, DType dtype) {
    if (channels == 0) return TensorGrid({rows, cols}, dtype);
    return TensorGrid({rows, cols, channels}, dtype);
}

void TensorGrid::validate() const {
    if (dims_.size() != 2 && dims_.size() != 3)
        throw DimensionError(fmt::format("rank must be 2 or 3, got {}", dims_.size()));
    for (std::size_t d : dims_) {
        if (d == 0) throw DimensionError("extents must be >= 1, got " + dims_string(dims_));
        if (d > 0xFFFFFFFFull) throw DimensionError("extent exceeds u32: " + dims_string(dims_));
    }
    if (product(dims_) != data_.size())
        throw DimensionError(fmt::format("payload has {} values but dims {} need {}", data_.size(),
                                         dims_string(dims_), product(dims_)));
    if (dtype_ == DType::U8) {
        for (float v : data_) {
            if (!(v >= 0.0f && v <= 255.0f) || v != std::floor(v))
                throw FormatError(fmt::format("u8 grid holds non-byte value {}", v));
        }
    }
}

std::string dims_string(const std::vector<std::size_t>& dims) {
    return fmt::format("{}", fmt::join(dims, "x"));
}

std::vector<std::uint8_t> encode_tensor(const TensorGrid& grid) {
    grid.validate();
    std::vector<std::uint8_t> out;
    const std::size_t elem = grid.dtype() == DType::F32 ? 4 : 1;
    out.reserve(kFixedHeader + 4 * grid.rank() + elem * grid.size());
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    out.push_back(kVersion);
    out.push_back(static_cast<std::uint8_t>(grid.dtype()));
    out.push_back(static_cast<std::uint8_t>(grid.rank()));
    out.push_back(0);
    for (std::size_t d : grid.dims()) put_u32(out, static_cast<std::uint32_t>(d));
    if (grid.dtype() == DType::F32) {
        for (float v : grid.data()) {
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            put_u32(out, bits);
        }
    } else {
        for (float v : grid.data()) out.push_back(static_cast<std::uint8_t>(v));
    }
    return out;
}

TensorGrid decode_tensor(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kFixedHeader)
        throw FormatError(fmt::format("header: need {} bytes, have {}", kFixedHeader, bytes.size()));
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("magic: expected \"STN3\"");
    if (bytes[4] != kVersion) throw FormatError(fmt::format("version: unsupported {}", bytes[4]));
    if (bytes[5] > 1) throw FormatError(fmt::format("dtype: unsupported code {}", bytes[5]));
    const auto dtype = static_cast<DType>(bytes[5]);
    const std::size_t rank = bytes[6];
    if (rank != 2 && rank != 3) throw FormatError(fmt::format("rank: unsupported {}", rank));
    if (bytes[7] != 0) throw FormatError("pad: must be zero");

    const std::size_t header = kFixedHeader + 4 * rank;
    if (bytes.size() < header) throw FormatError("extents: truncated header");
    std::vector<std::size_t> dims(rank);
    for (std::size_t i = 0; i < rank; ++i) {
        dims[i] = get_u32(bytes.data() + kFixedHeader + 4 * i);
        if (dims[i] == 0) throw FormatError(fmt::format("extents: dim {} is zero", i));
    }
    const std::size_t count = product(dims);
    const std::size_t elem = dtype == DType::F32 ? 4 : 1;
    if (bytes.size() - header != count * elem)
        throw FormatError(fmt::format("payload: expected {} bytes for {}, have {}", count * elem,
                                      dims_string(dims), bytes.size() - header));

    std::vector<float> data(count);
    const std::uint8_t* p = bytes.data() + header;
    if (dtype == DType::F32) {
        for (std::size_t i = 0; i < count; ++i) {
            const std::uint32_t bits = get_u32(p + 4 * i);
            std::memcpy(&data[i], &bits, 4);
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) data[i] = static_cast<float>(p[i]);
    }
    return TensorGrid(std::move(dims), dtype, std::move(data));
}

TensorGrid read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    try {
        return decode_tensor(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_tensor(const TensorGrid& grid, const std::filesystem::path& path) {
    const auto bytes = encode_tensor(grid);
    write_file_atomic(path, bytes);
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(reinterpret_cast<const char*>(contents.data()),
                  static_cast<std::streamsize>(contents.size()));
        if (!out) throw Error("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error("cannot rename into " + path.string());
    }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace stairkit
