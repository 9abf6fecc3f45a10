#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pnp/image.hpp"
#include "pnp/rng.hpp"

namespace pnp {

/// Matrix-free linear map A with its adjoint.
///
/// Operators are immutable after construction; apply/adjoint may be called
/// concurrently. Both entry points validate the argument shape and throw
/// ShapeError on mismatch.
class LinearOperator {
public:
  LinearOperator(Shape input_shape, Shape output_shape);
  virtual ~LinearOperator() = default;

  const Shape &input_shape() const { return input_shape_; }
  const Shape &output_shape() const { return output_shape_; }

  Image apply(const Image &x) const;
  Image adjoint(const Image &y) const;

  /// Diagonal of A^T A when A^T A is diagonal, otherwise nullopt. Used to pick
  /// a closed-form proximal map for the quadratic data term.
  virtual std::optional<Image> gram_diagonal() const { return std::nullopt; }

  virtual std::string name() const = 0;

protected:
  virtual Image do_apply(const Image &x) const = 0;
  virtual Image do_adjoint(const Image &y) const = 0;

private:
  Shape input_shape_;
  Shape output_shape_;
};

using OperatorPtr = std::shared_ptr<const LinearOperator>;

class IdentityOperator final : public LinearOperator {
public:
  explicit IdentityOperator(Shape shape);
  std::optional<Image> gram_diagonal() const override;
  std::string name() const override { return "identity"; }

protected:
  Image do_apply(const Image &x) const override { return x; }
  Image do_adjoint(const Image &y) const override { return y; }
};

/// Elementwise multiplication by fixed weights (a binary mask for inpainting).
class DiagonalOperator final : public LinearOperator {
public:
  explicit DiagonalOperator(Image weights);
  const Image &weights() const { return weights_; }
  std::optional<Image> gram_diagonal() const override;
  std::string name() const override { return "diagonal"; }

protected:
  Image do_apply(const Image &x) const override;
  Image do_adjoint(const Image &y) const override;

private:
  Image weights_;
};

/// Same-shape convolution with periodic boundaries.
///
/// The kernel origin is at index floor(k/2) on every axis, so
///   (Ax)[i] = sum_j kernel[j] * x[(i - (j - c)) mod n].
/// The adjoint is correlation with the same kernel (convolution with the
/// flipped kernel). Computed directly in the spatial domain, no FFT.
class PeriodicConvolution final : public LinearOperator {
public:
  PeriodicConvolution(Image kernel, Shape image_shape);
  const Image &kernel() const { return kernel_; }
  std::string name() const override { return "periodic_convolution"; }

protected:
  Image do_apply(const Image &x) const override;
  Image do_adjoint(const Image &y) const override;

private:
  Image correlate(const Image &x, int sign) const;
  Image kernel_;
};

/// Keeps every rate[a]-th sample along each axis starting at index 0.
/// Output extent is ceil(n / rate). The adjoint inserts zeros.
class Decimation final : public LinearOperator {
public:
  Decimation(Shape input_shape, std::vector<std::size_t> rates);
  const std::vector<std::size_t> &rates() const { return rates_; }
  std::optional<Image> gram_diagonal() const override;
  std::string name() const override { return "decimation"; }

protected:
  Image do_apply(const Image &x) const override;
  Image do_adjoint(const Image &y) const override;

private:
  std::vector<std::size_t> rates_;
};

/// Ordered composition. Operators are applied front to back, i.e.
/// Composition({B, C}) is C * B. The adjoint runs the adjoints back to front.
class Composition final : public LinearOperator {
public:
  explicit Composition(std::vector<OperatorPtr> ops);
  const std::vector<OperatorPtr> &operators() const { return ops_; }
  std::string name() const override;

protected:
  Image do_apply(const Image &x) const override;
  Image do_adjoint(const Image &y) const override;

private:
  std::vector<OperatorPtr> ops_;
};

/// Explicit dense m x n matrix acting on a flattened image. Output shape is {m}.
class DenseMatrix final : public LinearOperator {
public:
  DenseMatrix(std::size_t rows, Shape input_shape, std::vector<double> row_major);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  /// Rows [begin, end) as a new operator.
  DenseMatrix row_block(std::size_t begin, std::size_t end) const;
  std::string name() const override { return "dense"; }

protected:
  Image do_apply(const Image &x) const override;
  Image do_adjoint(const Image &y) const override;

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
};

/// m x n Gaussian sensing matrix with i.i.d. N(0, 1/m) entries, drawn row-major
/// from SeededRng(seed). Reproducible from (seed, m, input shape).
std::shared_ptr<const DenseMatrix> random_projection(std::size_t m, Shape input_shape,
                                                     std::uint64_t seed);

/// Normalized, nonnegative Gaussian kernel of the given rank with radius
/// ceil(3 sigma) (size 2r+1 per axis). sigma == 0 gives a Dirac kernel.
Image gaussian_kernel(std::size_t ndim, double sigma);

/// Blur-then-decimate operator used by the super-resolution problems.
OperatorPtr super_resolution_operator(const Shape &hr_shape, std::size_t rate,
                                      double blur_sigma);

/// Power-iteration estimate of ||A|| = sqrt(lambda_max(A^T A)), started from a
/// Gaussian vector drawn from rng. Returns 0 for the zero operator.
double operator_norm(const LinearOperator &op, SeededRng &rng, int iters);

} // namespace pnp
