#pragma once

#include <stdexcept>
#include <string>

namespace adatag {

// Base for every error raised by the library. The CLI maps the concrete type
// to an exit status: DataError -> 2, NumericalError -> 3, anything else -> 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files, unknown ids, shape mismatches between stored and
// expected tensors.
class DataError : public Error {
 public:
  using Error::Error;
};

// NaN/inf during training or inconsistent shapes inside the graph.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

}  // namespace adatag
