#pragma once

#include "stairkit/tensor.hpp"

namespace stairkit {

/**
 * Space-to-depth rearrangement of an H x W x C image into (H/2) x (W/2) x 4C.
 *
 * Output channel blocks, each C wide and in the source channel order:
 *   0: even row, even col   1: odd row, even col
 *   2: even row, odd col    3: odd row, odd col
 *
 * Throws DimensionError for rank != 3 or odd H / W.
 */
TensorGrid focus_slice(const TensorGrid& image);

/// Exact inverse gather of focus_slice.
TensorGrid focus_unslice(const TensorGrid& sliced);

}  // namespace stairkit
