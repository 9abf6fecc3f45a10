#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pnp/error.hpp"

namespace pnp {

/// Dense real-valued tensor with 1 to 4 axes, stored row-major (last axis
/// fastest). All reconstruction state (iterates, measurements, duals) lives in
/// one of these.
///
/// Values are required to be finite. Constructors check this; arithmetic
/// helpers below re-check their outputs and throw NonFiniteError otherwise.
class Image {
public:
  Image() = default;
  /// Zero-filled buffer.
  explicit Image(Shape shape);
  Image(Shape shape, double fill);
  Image(Shape shape, std::vector<double> data);

  static Image zeros_like(const Image &other) { return Image(other.shape()); }

  const Shape &shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t ndim() const { return shape_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const double> values() const { return data_; }
  /// Mutable access. Callers writing through this span own the finiteness
  /// invariant until the next checked operation.
  std::span<double> values() { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double &operator[](std::size_t i) { return data_[i]; }

  bool same_shape(const Image &other) const { return shape_ == other.shape_; }

  /// Throws NonFiniteError if any entry is NaN or Inf.
  void check_finite(const char *context) const;

  Image &operator+=(const Image &rhs);
  Image &operator-=(const Image &rhs);
  Image &operator*=(double a);
  /// this += a * x
  Image &add_scaled(double a, const Image &x);

  /// Bitwise equality of shape and data.
  friend bool operator==(const Image &, const Image &) = default;

private:
  Shape shape_;
  std::vector<double> data_;
};

std::size_t element_count(const Shape &shape);
/// Throws ArgumentError unless shape has 1-4 positive extents.
void validate_shape(const Shape &shape);
/// Throws ShapeError naming both shapes when they differ.
void require_same_shape(const char *context, const Shape &lhs, const Shape &rhs);

Image operator+(const Image &x, const Image &y);
Image operator-(const Image &x, const Image &y);
Image operator*(double a, const Image &x);

/// a * x + y
Image axpy(double a, const Image &x, const Image &y);
/// a * x + b * y
Image lincomb(double a, const Image &x, double b, const Image &y);

/// Inner product accumulated in ascending index order.
double dot(const Image &x, const Image &y);
double squared_norm(const Image &x);
double norm(const Image &x);
/// ||x - y|| without materializing the difference.
double distance(const Image &x, const Image &y);

} // namespace pnp
