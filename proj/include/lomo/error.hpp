#pragma once

#include <stdexcept>
#include <string>

namespace lomo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A shape collapsed, self-intersects, or has zero area where that is not allowed.
class DegenerateShape : public Error {
 public:
  using Error::Error;
};

/// Two rasters or vectors that must agree in size do not.
class DimMismatch : public Error {
 public:
  using Error::Error;
};

/// No text-center-line cell survived masking.
class EmptyCenterLine : public Error {
 public:
  using Error::Error;
};

/// A center-line path has zero arc length.
class DegeneratePath : public Error {
 public:
  using Error::Error;
};

/// Border points assemble into a non-simple (or zero-area) polygon.
class SelfIntersecting : public Error {
 public:
  using Error::Error;
};

/// Bad user input: parameters out of range, malformed files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lomo
