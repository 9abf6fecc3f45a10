#include "pnp/linops.hpp"

#include <array>
#include <cmath>

namespace pnp {

namespace {

using Extents4 = std::array<std::size_t, 4>;

/// Left-pads a shape with unit extents to four axes.
Extents4 pad4(const Shape &shape) {
  Extents4 out{1, 1, 1, 1};
  const std::size_t offset = 4 - shape.size();
  for (std::size_t a = 0; a < shape.size(); ++a) {
    out[offset + a] = shape[a];
  }
  return out;
}

std::size_t flat4(const Extents4 &n, std::size_t i0, std::size_t i1, std::size_t i2,
                  std::size_t i3) {
  return ((i0 * n[1] + i1) * n[2] + i2) * n[3] + i3;
}

std::size_t positive_mod(long long v, std::size_t n) {
  const auto m = static_cast<long long>(n);
  return static_cast<std::size_t>(((v % m) + m) % m);
}

Shape decimated_shape(const Shape &in, const std::vector<std::size_t> &rates) {
  if (rates.size() != in.size()) {
    throw ArgumentError("Decimation: need one rate per axis, got " +
                        std::to_string(rates.size()) + " rates for shape " + to_string(in));
  }
  Shape out(in.size());
  for (std::size_t a = 0; a < in.size(); ++a) {
    if (rates[a] == 0) {
      throw ArgumentError("Decimation: rates must be positive");
    }
    out[a] = (in[a] + rates[a] - 1) / rates[a];
  }
  return out;
}

} // namespace

LinearOperator::LinearOperator(Shape input_shape, Shape output_shape)
    : input_shape_(std::move(input_shape)), output_shape_(std::move(output_shape)) {
  validate_shape(input_shape_);
  validate_shape(output_shape_);
}

Image LinearOperator::apply(const Image &x) const {
  if (x.shape() != input_shape_) {
    throw ShapeError(name() + "::apply", x.shape(), input_shape_);
  }
  return do_apply(x);
}

Image LinearOperator::adjoint(const Image &y) const {
  if (y.shape() != output_shape_) {
    throw ShapeError(name() + "::adjoint", y.shape(), output_shape_);
  }
  return do_adjoint(y);
}

// Identity ------------------------------------------------------------------

IdentityOperator::IdentityOperator(Shape shape) : LinearOperator(shape, shape) {}

std::optional<Image> IdentityOperator::gram_diagonal() const {
  return Image(input_shape(), 1.0);
}

// Diagonal ------------------------------------------------------------------

DiagonalOperator::DiagonalOperator(Image weights)
    : LinearOperator(weights.shape(), weights.shape()), weights_(std::move(weights)) {}

std::optional<Image> DiagonalOperator::gram_diagonal() const {
  Image d = weights_;
  for (auto &v : d.values()) {
    v *= v;
  }
  return d;
}

Image DiagonalOperator::do_apply(const Image &x) const {
  Image out = x;
  auto o = out.values();
  auto w = weights_.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    o[i] *= w[i];
  }
  return out;
}

Image DiagonalOperator::do_adjoint(const Image &y) const { return do_apply(y); }

// Periodic convolution ------------------------------------------------------

PeriodicConvolution::PeriodicConvolution(Image kernel, Shape image_shape)
    : LinearOperator(image_shape, image_shape), kernel_(std::move(kernel)) {
  if (kernel_.ndim() != image_shape.size()) {
    throw ArgumentError("PeriodicConvolution: kernel rank " + std::to_string(kernel_.ndim()) +
                        " does not match image rank " + std::to_string(image_shape.size()));
  }
}

Image PeriodicConvolution::correlate(const Image &x, int sign) const {
  const Extents4 n = pad4(x.shape());
  const Extents4 kn = pad4(kernel_.shape());
  Extents4 center{};
  for (std::size_t a = 0; a < 4; ++a) {
    center[a] = kn[a] / 2;
  }

  Image out(x.shape());
  auto o = out.values();
  auto xs = x.values();
  auto ks = kernel_.values();

  std::array<std::vector<std::size_t>, 3> src;
  for (std::size_t j0 = 0; j0 < kn[0]; ++j0) {
    for (std::size_t j1 = 0; j1 < kn[1]; ++j1) {
      for (std::size_t j2 = 0; j2 < kn[2]; ++j2) {
        for (std::size_t j3 = 0; j3 < kn[3]; ++j3) {
          const double w = ks[flat4(kn, j0, j1, j2, j3)];
          if (w == 0.0) {
            continue;
          }
          const Extents4 j{j0, j1, j2, j3};
          Extents4 shift{};
          for (std::size_t a = 0; a < 4; ++a) {
            const long long d = static_cast<long long>(j[a]) - static_cast<long long>(center[a]);
            shift[a] = positive_mod(sign * d, n[a]);
          }
          for (std::size_t a = 0; a < 3; ++a) {
            src[a].resize(n[a]);
            for (std::size_t i = 0; i < n[a]; ++i) {
              src[a][i] = (i + n[a] - shift[a]) % n[a];
            }
          }
          // Last axis: destination i reads source (i - s) mod n, which is two
          // contiguous runs.
          const std::size_t s3 = shift[3];
          for (std::size_t i0 = 0; i0 < n[0]; ++i0) {
            for (std::size_t i1 = 0; i1 < n[1]; ++i1) {
              for (std::size_t i2 = 0; i2 < n[2]; ++i2) {
                double *dst = o.data() + flat4(n, i0, i1, i2, 0);
                const double *row = xs.data() + flat4(n, src[0][i0], src[1][i1], src[2][i2], 0);
                for (std::size_t i3 = 0; i3 < s3; ++i3) {
                  dst[i3] += w * row[i3 + n[3] - s3];
                }
                for (std::size_t i3 = s3; i3 < n[3]; ++i3) {
                  dst[i3] += w * row[i3 - s3];
                }
              }
            }
          }
        }
      }
    }
  }
  return out;
}

Image PeriodicConvolution::do_apply(const Image &x) const { return correlate(x, +1); }

Image PeriodicConvolution::do_adjoint(const Image &y) const { return correlate(y, -1); }

// Decimation ----------------------------------------------------------------

Decimation::Decimation(Shape input_shape, std::vector<std::size_t> rates)
    : LinearOperator(input_shape, decimated_shape(input_shape, rates)), rates_(std::move(rates)) {}

std::optional<Image> Decimation::gram_diagonal() const {
  return do_adjoint(Image(output_shape(), 1.0));
}

Image Decimation::do_apply(const Image &x) const {
  const Extents4 n = pad4(input_shape());
  const Extents4 m = pad4(output_shape());
  const Extents4 r = pad4(Shape(rates_.begin(), rates_.end()));
  Image out(output_shape());
  auto o = out.values();
  auto xs = x.values();
  for (std::size_t i0 = 0; i0 < m[0]; ++i0) {
    for (std::size_t i1 = 0; i1 < m[1]; ++i1) {
      for (std::size_t i2 = 0; i2 < m[2]; ++i2) {
        for (std::size_t i3 = 0; i3 < m[3]; ++i3) {
          o[flat4(m, i0, i1, i2, i3)] =
              xs[flat4(n, i0 * r[0], i1 * r[1], i2 * r[2], i3 * r[3])];
        }
      }
    }
  }
  return out;
}

Image Decimation::do_adjoint(const Image &y) const {
  const Extents4 n = pad4(input_shape());
  const Extents4 m = pad4(output_shape());
  const Extents4 r = pad4(Shape(rates_.begin(), rates_.end()));
  Image out(input_shape());
  auto o = out.values();
  auto ys = y.values();
  for (std::size_t i0 = 0; i0 < m[0]; ++i0) {
    for (std::size_t i1 = 0; i1 < m[1]; ++i1) {
      for (std::size_t i2 = 0; i2 < m[2]; ++i2) {
        for (std::size_t i3 = 0; i3 < m[3]; ++i3) {
          o[flat4(n, i0 * r[0], i1 * r[1], i2 * r[2], i3 * r[3])] =
              ys[flat4(m, i0, i1, i2, i3)];
        }
      }
    }
  }
  return out;
}

// Composition ---------------------------------------------------------------

namespace {

const std::vector<OperatorPtr> &checked_chain(const std::vector<OperatorPtr> &ops) {
  if (ops.empty()) {
    throw ArgumentError("Composition: needs at least one operator");
  }
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (!ops[i]) {
      throw ArgumentError("Composition: null operator at position " + std::to_string(i));
    }
    if (i > 0) {
      require_same_shape("Composition", ops[i - 1]->output_shape(), ops[i]->input_shape());
    }
  }
  return ops;
}

} // namespace

Composition::Composition(std::vector<OperatorPtr> ops)
    : LinearOperator(checked_chain(ops).front()->input_shape(), ops.back()->output_shape()),
      ops_(std::move(ops)) {}

std::string Composition::name() const {
  std::string out = "composition(";
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    out += (i ? "," : "") + ops_[i]->name();
  }
  return out + ")";
}

Image Composition::do_apply(const Image &x) const {
  Image v = x;
  for (const auto &op : ops_) {
    v = op->apply(v);
  }
  return v;
}

Image Composition::do_adjoint(const Image &y) const {
  Image v = y;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    v = (*it)->adjoint(v);
  }
  return v;
}

// Dense ---------------------------------------------------------------------

DenseMatrix::DenseMatrix(std::size_t rows, Shape input_shape, std::vector<double> row_major)
    : LinearOperator(input_shape, Shape{rows}), rows_(rows), cols_(element_count(input_shape)),
      entries_(std::move(row_major)) {
  if (entries_.size() != rows_ * cols_) {
    throw ArgumentError("DenseMatrix: expected " + std::to_string(rows_ * cols_) +
                        " entries, got " + std::to_string(entries_.size()));
  }
}

DenseMatrix DenseMatrix::row_block(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > rows_) {
    throw ArgumentError("DenseMatrix::row_block: invalid range [" + std::to_string(begin) + ", " +
                        std::to_string(end) + ") for " + std::to_string(rows_) + " rows");
  }
  std::vector<double> sub(entries_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
                          entries_.begin() + static_cast<std::ptrdiff_t>(end * cols_));
  return DenseMatrix(end - begin, input_shape(), std::move(sub));
}

Image DenseMatrix::do_apply(const Image &x) const {
  Image out(output_shape());
  auto o = out.values();
  auto xs = x.values();
  for (std::size_t r = 0; r < rows_; ++r) {
    const double *row = entries_.data() + r * cols_;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) {
      acc += row[c] * xs[c];
    }
    o[r] = acc;
  }
  return out;
}

Image DenseMatrix::do_adjoint(const Image &y) const {
  Image out(input_shape());
  auto o = out.values();
  auto ys = y.values();
  for (std::size_t r = 0; r < rows_; ++r) {
    const double *row = entries_.data() + r * cols_;
    const double yr = ys[r];
    for (std::size_t c = 0; c < cols_; ++c) {
      o[c] += row[c] * yr;
    }
  }
  return out;
}

std::shared_ptr<const DenseMatrix> random_projection(std::size_t m, Shape input_shape,
                                                     std::uint64_t seed) {
  if (m == 0) {
    throw ArgumentError("random_projection: need at least one row");
  }
  const std::size_t n = element_count(input_shape);
  SeededRng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  std::vector<double> entries(m * n);
  for (auto &e : entries) {
    e = scale * rng.normal();
  }
  return std::make_shared<const DenseMatrix>(m, std::move(input_shape), std::move(entries));
}

// Helpers -------------------------------------------------------------------

Image gaussian_kernel(std::size_t ndim, double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ArgumentError("gaussian_kernel: sigma must be >= 0");
  }
  const auto radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
  const std::size_t width = 2 * radius + 1;
  std::vector<double> taps(width);
  for (std::size_t i = 0; i < width; ++i) {
    const double t = static_cast<double>(i) - static_cast<double>(radius);
    taps[i] = sigma == 0.0 ? (t == 0.0 ? 1.0 : 0.0) : std::exp(-t * t / (2.0 * sigma * sigma));
  }
  Image kernel(Shape(ndim, width));
  auto k = kernel.values();
  double total = 0.0;
  for (std::size_t flat = 0; flat < k.size(); ++flat) {
    double w = 1.0;
    std::size_t rem = flat;
    for (std::size_t a = 0; a < ndim; ++a) {
      w *= taps[rem % width];
      rem /= width;
    }
    k[flat] = w;
    total += w;
  }
  for (auto &v : k) {
    v /= total;
  }
  return kernel;
}

OperatorPtr super_resolution_operator(const Shape &hr_shape, std::size_t rate,
                                      double blur_sigma) {
  auto blur = std::make_shared<const PeriodicConvolution>(
      gaussian_kernel(hr_shape.size(), blur_sigma), hr_shape);
  auto down =
      std::make_shared<const Decimation>(hr_shape, std::vector<std::size_t>(hr_shape.size(), rate));
  return std::make_shared<const Composition>(std::vector<OperatorPtr>{blur, down});
}

double operator_norm(const LinearOperator &op, SeededRng &rng, int iters) {
  if (iters < 1) {
    throw ArgumentError("operator_norm: iters must be >= 1");
  }
  Image v = gaussian_noise(rng, op.input_shape(), 1.0);
  double nv = norm(v);
  if (nv == 0.0) {
    return 0.0;
  }
  v *= 1.0 / nv;
  for (int k = 0; k < iters; ++k) {
    Image w = op.adjoint(op.apply(v));
    const double nw = norm(w);
    if (nw == 0.0) {
      return 0.0;
    }
    w *= 1.0 / nw;
    v = std::move(w);
  }
  return norm(op.apply(v));
}

} // namespace pnp
