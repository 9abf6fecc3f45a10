#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnp {

using Shape = std::vector<std::size_t>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Two buffers (or a buffer and an operator) disagree on shape.
class ShapeError : public Error {
public:
  ShapeError(const std::string &context, const Shape &lhs, const Shape &rhs);

  const Shape &lhs() const { return lhs_; }
  const Shape &rhs() const { return rhs_; }

private:
  Shape lhs_;
  Shape rhs_;
};

/// A NaN or Inf appeared where only finite values are allowed.
class NonFiniteError : public Error {
public:
  using Error::Error;
};

/// Invalid argument or configuration value.
class ArgumentError : public Error {
public:
  using Error::Error;
};

std::string to_string(const Shape &shape);

} // namespace pnp
