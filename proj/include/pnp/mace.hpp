#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pnp/agents.hpp"
#include "pnp/image.hpp"
#include "pnp/solvers.hpp"

namespace pnp {

/// l component buffers of one common shape.
class StackedImage {
public:
  StackedImage() = default;
  explicit StackedImage(std::vector<Image> components);
  /// `count` copies of `x`.
  StackedImage(std::size_t count, const Image &x);

  std::size_t count() const { return components_.size(); }
  const Shape &component_shape() const;
  const Image &operator[](std::size_t j) const { return components_[j]; }
  Image &operator[](std::size_t j) { return components_[j]; }
  const std::vector<Image> &components() const { return components_; }

  friend bool operator==(const StackedImage &, const StackedImage &) = default;

private:
  std::vector<Image> components_;
};

double squared_norm(const StackedImage &v);
double norm(const StackedImage &v);
double distance(const StackedImage &a, const StackedImage &b);

class AgentStack {
public:
  /// Uniform weights.
  explicit AgentStack(std::vector<AgentPtr> agents);
  /// Nonnegative weights summing to 1 within 1e-12.
  AgentStack(std::vector<AgentPtr> agents, std::vector<double> weights);

  std::size_t count() const { return agents_.size(); }
  const Agent &agent(std::size_t j) const { return *agents_[j]; }
  /// Empty for the uniform average.
  const std::vector<double> &weights() const { return weights_; }
  bool uniform() const { return weights_.empty(); }

private:
  std::vector<AgentPtr> agents_;
  std::vector<double> weights_;
};

/// F(v) = (F_1(v_1), ..., F_l(v_l)). Components are independent; with
/// jobs > 1 they are evaluated on worker threads with identical results.
StackedImage stack_apply(const AgentStack &stack, const StackedImage &v, std::size_t jobs = 1);

/// Weighted average sum_j mu_j v_j (plain mean when `weights` is empty).
Image stack_average(const StackedImage &v, const std::vector<double> &weights = {});

/// G(v) = (vbar, ..., vbar).
StackedImage averaging_G(const StackedImage &v, const std::vector<double> &weights = {});

/// (2G - I) v.
StackedImage reflect_G(const StackedImage &v, const std::vector<double> &weights = {});

struct MaceResiduals {
  /// max_j ||F_j(v_j) - xbar||, xbar the weighted mean of the agent outputs.
  double consensus = 0.0;
  /// ||sum_j mu_j (v_j - F_j(v_j))||.
  double equilibrium = 0.0;
};

MaceResiduals mace_residuals(const AgentStack &stack, const StackedImage &v,
                             std::size_t jobs = 1);

struct MaceResult {
  /// Average of 2F(v) - v from the last sweep.
  Image x;
  StackedImage v;
  SolverTrace trace;
  /// Evaluated at the final stack.
  MaceResiduals residuals;
};

/// Mann iteration of (2G - I)(2F - I) started from v = (x0, ..., x0), written as
///   x_j = F_j(v_j),  z = G(2x - v),  v += 2 rho (z - x).
/// Uses cfg.rho, cfg.max_iters, cfg.fp_tol (on the stacked relative change of
/// v) and cfg.reference / cfg.psnr_peak.
MaceResult mace_solve(const AgentStack &stack, const Image &x0, const SolverConfig &cfg,
                      std::size_t jobs = 1);

} // namespace pnp
