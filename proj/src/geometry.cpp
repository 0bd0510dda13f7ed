#include "stairkit/geometry.hpp"

#include "stairkit/error.hpp"
#include "text_util.hpp"

#include <cctype>
#include <cmath>
#include <utility>
#include <vector>

#include <fmt/format.h>

namespace stairkit {

std::string_view to_string(LineKind kind) {
    return kind == LineKind::Convex ? "convex" : "concave";
}

std::optional<LineKind> parse_line_kind(std::string_view text) {
    if (text == "convex") return LineKind::Convex;
    if (text == "concave") return LineKind::Concave;
    return std::nullopt;
}

void GridGeometry::validate() const {
    if (input_h == 0 || input_w == 0 || grid_rows == 0 || grid_cols == 0)
        throw DimensionError("grid geometry extents must be positive");
    if (input_h % grid_rows != 0 || input_w % grid_cols != 0)
        throw DimensionError(fmt::format("input {}x{} is not divisible into a {}x{} grid", input_h,
                                         input_w, grid_rows, grid_cols));
}

double LineSegment::length() const noexcept { return std::hypot(x2 - x1, y2 - y1); }

LineSegment LineSegment::ordered() const noexcept {
    LineSegment s = *this;
    if (s.x1 > s.x2 || (s.x1 == s.x2 && s.y1 > s.y2)) {
        std::swap(s.x1, s.x2);
        std::swap(s.y1, s.y2);
    }
    return s;
}

CameraIntrinsics parse_intrinsics(std::string_view text) {
    std::vector<double> v;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i == text.size()) break;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        v.push_back(detail::parse_double(text.substr(i, j - i), "intrinsics"));
        i = j;
    }
    if (v.size() != 9)
        throw FormatError(fmt::format("intrinsics: expected 9 values, got {}", v.size()));
    if (std::abs(v[1]) > 1e-9) throw FormatError(fmt::format("intrinsics: nonzero skew {}", v[1]));
    if (std::abs(v[3]) > 1e-9) throw FormatError("intrinsics: K[1][0] must be zero");
    if (v[6] != 0.0 || v[7] != 0.0 || v[8] != 1.0)
        throw FormatError("intrinsics: bottom row must be 0 0 1");
    if (v[0] <= 0 || v[4] <= 0)
        throw FormatError(fmt::format("intrinsics: focal lengths must be positive (fx={}, fy={})", v[0], v[4]));
    return CameraIntrinsics{v[0], v[4], v[2], v[5]};
}

std::string format_intrinsics(const CameraIntrinsics& k) {
    return fmt::format("{} 0 {}\n0 {} {}\n0 0 1\n", k.fx, k.cx, k.fy, k.cy);
}

}  // namespace stairkit
