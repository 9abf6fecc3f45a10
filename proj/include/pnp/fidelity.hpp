#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "pnp/cg.hpp"
#include "pnp/image.hpp"
#include "pnp/linops.hpp"
#include "pnp/rng.hpp"

namespace pnp {

/// A differentiable data term g: value, gradient and a backprojection used
/// as the default starting point.
class SmoothFidelity {
public:
  virtual ~SmoothFidelity() = default;
  virtual const Shape &input_shape() const = 0;
  virtual double value(const Image &x) const = 0;
  virtual Image gradient(const Image &x) const = 0;
  /// A^T y (for block terms, the sum over blocks in ascending order).
  virtual Image backprojection() const = 0;
  /// Lipschitz constant of the gradient, estimated by power iteration.
  virtual double lipschitz_estimate() const = 0;
};

/// Solve (I + gamma w A^T A) z = v + gamma w A^T y exactly; needs A^T A diagonal.
struct ClosedFormProx {};
/// Conjugate gradients started at the prox input.
struct CgProx {
  CgOptions cg{1e-3, 10};
};
/// Exactly `inner_steps` CG steps warm-started from the previous prox output.
struct PartialProx {
  int inner_steps = 3;
};
using ProxMethod = std::variant<ClosedFormProx, CgProx, PartialProx>;

/// Last inner solution of a partial proximal update. Single owner per run.
struct ProxWarmState {
  std::optional<Image> last;
  /// Residual ||b - Mz|| / ||b|| of every partial solve, in call order.
  std::vector<double> initial_residuals;
};

/// Least-squares data term g(x) = (w/2) ||Ax - y||^2.
class DataFidelity final : public SmoothFidelity {
public:
  DataFidelity(OperatorPtr op, Image y, double weight = 1.0);

  const LinearOperator &op() const { return *op_; }
  const OperatorPtr &op_ptr() const { return op_; }
  const Image &measurements() const { return y_; }
  double weight() const { return weight_; }

  const Shape &input_shape() const override { return op_->input_shape(); }
  double value(const Image &x) const override;
  /// w A^T (Ax - y). Callers form x - gamma * grad themselves.
  Image gradient(const Image &x) const override;
  Image backprojection() const override;
  double lipschitz_estimate() const override;

  /// prox_{gamma g}(v) = (I + gamma w A^T A)^{-1} (v + gamma w A^T y).
  ///
  /// ClosedFormProx throws ArgumentError when A^T A is not diagonal. PartialProx
  /// requires `warm` and updates it.
  Image prox(const Image &v, double gamma, const ProxMethod &method,
             ProxWarmState *warm = nullptr) const;

  /// Convenience for the CG path that also returns solver statistics.
  CgResult prox_cg(const Image &v, double gamma, const CgOptions &opts,
                   const Image &start) const;

  /// The (I + gamma w A^T A) map.
  SpdMap prox_system(double gamma) const;

private:
  Image prox_rhs(const Image &v, double gamma) const;

  OperatorPtr op_;
  Image y_;
  double weight_;
};

/// Closed form when A^T A is diagonal, otherwise CG with tol 1e-3 and at most
/// 10 iterations.
ProxMethod default_prox_method(const DataFidelity &g);

/// g(x) = (1/b) sum_i g_i(x) over measurement blocks.
class BlockFidelity final : public SmoothFidelity {
public:
  explicit BlockFidelity(std::vector<DataFidelity> blocks);

  std::size_t block_count() const { return blocks_.size(); }
  const DataFidelity &block(std::size_t i) const;

  const Shape &input_shape() const override { return blocks_.front().input_shape(); }
  double value(const Image &x) const override;
  /// (1/b) sum_i grad g_i(x), summed in ascending block order.
  Image gradient(const Image &x) const override;
  Image backprojection() const override;
  double lipschitz_estimate() const override;

  /// grad g_i(x) for a zero-based block index.
  Image block_gradient(std::size_t index, const Image &x) const;
  /// (1/p) sum_j grad g_{i_j}(x). Indices are zero-based, may repeat, and are
  /// summed in ascending order regardless of the order given.
  Image minibatch_gradient(std::vector<std::size_t> indices, const Image &x) const;

private:
  std::vector<DataFidelity> blocks_;
};

enum class SamplingRule { IidUniform, EpochShuffle };

/// Stream of zero-based block indices.
///
/// IidUniform draws each index with rng.uniform_index(b). EpochShuffle emits
/// successive random permutations of {0..b-1}, reshuffling at each epoch start.
class BlockSampler {
public:
  BlockSampler(std::uint64_t seed, std::size_t block_count, SamplingRule rule);

  std::size_t next();
  std::vector<std::size_t> draw(std::size_t count);

  std::size_t block_count() const { return block_count_; }
  SamplingRule rule() const { return rule_; }

private:
  SeededRng rng_;
  std::size_t block_count_;
  SamplingRule rule_;
  std::vector<std::size_t> epoch_;
  std::size_t cursor_ = 0;
};

} // namespace pnp
