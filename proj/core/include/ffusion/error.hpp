// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FFUSION_ERROR_HPP
#define FFUSION_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ffusion {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid camera, box, transform or frustum parameters.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input files.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failures (open, short read, short write).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ffusion

#endif  // FFUSION_ERROR_HPP
