#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace stairkit {

enum class DType : std::uint8_t { F32 = 0, U8 = 1 };

/**
 * Dense row-major grid of rank 2 (rows x cols) or rank 3 (rows x cols x channels),
 * channel-fastest. Values are held as float regardless of dtype; a U8 grid only
 * admits integral values in [0, 255] so that it survives the on-disk encoding.
 */
class TensorGrid {
public:
    TensorGrid() = default;
    TensorGrid(std::vector<std::size_t> dims, DType dtype = DType::F32);
    TensorGrid(std::vector<std::size_t> dims, DType dtype, std::vector<float> data);

    static TensorGrid zeros(std::size_t rows, std::size_t cols, std::size_t channels = 0,
                            DType dtype = DType::F32);

    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::size_t rank() const noexcept { return dims_.size(); }
    DType dtype() const noexcept { return dtype_; }
    std::size_t rows() const noexcept { return dims_.empty() ? 0 : dims_[0]; }
    std::size_t cols() const noexcept { return dims_.size() < 2 ? 0 : dims_[1]; }
    /// 1 for rank-2 grids.
    std::size_t channels() const noexcept { return dims_.size() == 3 ? dims_[2] : 1; }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }

    float at(std::size_t r, std::size_t c, std::size_t ch = 0) const noexcept {
        return data_[(r * cols() + c) * channels() + ch];
    }
    float& at(std::size_t r, std::size_t c, std::size_t ch = 0) noexcept {
        return data_[(r * cols() + c) * channels() + ch];
    }

    bool same_shape(const TensorGrid& other) const noexcept { return dims_ == other.dims_; }

    /// Throws DimensionError / FormatError when an invariant is broken.
    void validate() const;

    friend bool operator==(const TensorGrid&, const TensorGrid&) = default;

private:
    std::vector<std::size_t> dims_;
    DType dtype_ = DType::F32;
    std::vector<float> data_;
};

std::string dims_string(const std::vector<std::size_t>& dims);

/// Serialized STN3 bytes for `grid`. Same grid, same bytes.
std::vector<std::uint8_t> encode_tensor(const TensorGrid& grid);
TensorGrid decode_tensor(std::span<const std::uint8_t> bytes);

TensorGrid read_tensor(const std::filesystem::path& path);
/// Writes through a sibling temp file and renames it into place.
void write_tensor(const TensorGrid& grid, const std::filesystem::path& path);

/// Atomically replaces `path` with `contents`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> contents);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace stairkit
