#include "pnp/image.hpp"

#include <cmath>
#include <sstream>

namespace pnp {

std::string to_string(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != 0) {
      os << ", ";
    }
    os << shape[i];
  }
  os << ']';
  return os.str();
}

ShapeError::ShapeError(const std::string &context, const Shape &lhs, const Shape &rhs)
    : Error(context + ": shape mismatch " + to_string(lhs) + " vs " + to_string(rhs)),
      lhs_(lhs), rhs_(rhs) {}

std::size_t element_count(const Shape &shape) {
  std::size_t n = 1;
  for (auto e : shape) {
    n *= e;
  }
  return n;
}

void validate_shape(const Shape &shape) {
  if (shape.empty() || shape.size() > 4) {
    throw ArgumentError("image shape must have 1 to 4 axes, got " + to_string(shape));
  }
  for (auto e : shape) {
    if (e == 0) {
      throw ArgumentError("image shape extents must be positive, got " + to_string(shape));
    }
  }
}

void require_same_shape(const char *context, const Shape &lhs, const Shape &rhs) {
  if (lhs != rhs) {
    throw ShapeError(context, lhs, rhs);
  }
}

Image::Image(Shape shape) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(element_count(shape_), 0.0);
}

Image::Image(Shape shape, double fill) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(element_count(shape_), fill);
  check_finite("Image");
}

Image::Image(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  if (data_.size() != element_count(shape_)) {
    throw ArgumentError("Image: data length " + std::to_string(data_.size()) +
                        " does not match shape " + to_string(shape_));
  }
  check_finite("Image");
}

void Image::check_finite(const char *context) const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw NonFiniteError(std::string(context) + ": non-finite value at index " +
                           std::to_string(i));
    }
  }
}

Image &Image::operator+=(const Image &rhs) {
  require_same_shape("Image::operator+=", shape_, rhs.shape_);
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] += rhs.data_[i];
  }
  check_finite("Image::operator+=");
  return *this;
}

Image &Image::operator-=(const Image &rhs) {
  require_same_shape("Image::operator-=", shape_, rhs.shape_);
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] -= rhs.data_[i];
  }
  check_finite("Image::operator-=");
  return *this;
}

Image &Image::operator*=(double a) {
  for (auto &v : data_) {
    v *= a;
  }
  check_finite("Image::operator*=");
  return *this;
}

Image &Image::add_scaled(double a, const Image &x) {
  require_same_shape("Image::add_scaled", shape_, x.shape_);
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] += a * x.data_[i];
  }
  check_finite("Image::add_scaled");
  return *this;
}

Image operator+(const Image &x, const Image &y) {
  Image out = x;
  out += y;
  return out;
}

Image operator-(const Image &x, const Image &y) {
  Image out = x;
  out -= y;
  return out;
}

Image operator*(double a, const Image &x) {
  Image out = x;
  out *= a;
  return out;
}

Image axpy(double a, const Image &x, const Image &y) {
  require_same_shape("axpy", x.shape(), y.shape());
  Image out = y;
  out.add_scaled(a, x);
  return out;
}

Image lincomb(double a, const Image &x, double b, const Image &y) {
  require_same_shape("lincomb", x.shape(), y.shape());
  Image out(x.shape());
  auto o = out.values();
  auto xs = x.values();
  auto ys = y.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    o[i] = a * xs[i] + b * ys[i];
  }
  out.check_finite("lincomb");
  return out;
}

double dot(const Image &x, const Image &y) {
  require_same_shape("dot", x.shape(), y.shape());
  auto xs = x.values();
  auto ys = y.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    acc += xs[i] * ys[i];
  }
  return acc;
}

double squared_norm(const Image &x) {
  double acc = 0.0;
  for (double v : x.values()) {
    acc += v * v;
  }
  return acc;
}

double norm(const Image &x) { return std::sqrt(squared_norm(x)); }

double distance(const Image &x, const Image &y) {
  require_same_shape("distance", x.shape(), y.shape());
  auto xs = x.values();
  auto ys = y.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - ys[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

} // namespace pnp
