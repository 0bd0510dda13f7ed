#pragma once

#include <stdexcept>
#include <string>

namespace stairkit {

/// Base of every domain error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed STN3 / CSV / PLY / intrinsics input.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Shape or rank mismatch between grids.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Coordinates outside the image or grid.
class BoundsError : public Error {
public:
    using Error::Error;
};

/// Zero-length lines, vertical fits, non-positive depths and similar.
class DegenerateError : public Error {
public:
    using Error::Error;
};

}  // namespace stairkit
