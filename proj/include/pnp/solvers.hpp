#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pnp/agents.hpp"
#include "pnp/diagnostics.hpp"
#include "pnp/fidelity.hpp"
#include "pnp/image.hpp"

namespace pnp {

/// theta_k == 1: plain (PnP-)ISTA.
struct IstaTheta {};
/// Nesterov extrapolation with q_0 = 1, q_k = (1 + sqrt(1 + 4 q_{k-1}^2)) / 2,
/// x^k = s^k + ((q_{k-1} - 1) / q_k) (s^k - s^{k-1}).
struct NesterovTheta {};
/// x^k = (1 - theta) s^{k-1} + theta s^k with theta in (0, 1].
struct ConstantTheta {
  double theta = 1.0;
};
using ThetaSchedule = std::variant<IstaTheta, NesterovTheta, ConstantTheta>;

struct SolverConfig {
  /// Step size (gradient methods) or penalty (ADMM family).
  double gamma = 1.0;
  /// RED / SIMBA regularization strength.
  double tau = 0.1;
  /// Mann relaxation, strictly inside (0, 1).
  double rho = 0.5;
  ThetaSchedule theta = NesterovTheta{};
  int max_iters = 100;
  /// Relative fixed-point tolerance on consecutive iterates.
  double fp_tol = 1e-6;
  std::uint64_t seed = 0;
  /// Blocks per iteration for online_pnp / simba.
  std::size_t minibatch = 1;

  /// Starting point; A^T y when unset.
  std::optional<Image> x0;
  /// Proximal method for the data term (ADMM family); default_prox_method(g)
  /// when unset.
  std::optional<ProxMethod> prox;

  bool record_objective = true;
  /// Evaluate the family's equilibrium residual at every iterate. Costs one
  /// extra agent (and prox) evaluation per iteration.
  bool record_equilibrium = false;
  /// When set, PSNR against this image is logged per iteration.
  std::optional<Image> reference;
  double psnr_peak = 1.0;

  /// Throws ArgumentError on out-of-range values.
  void validate() const;
};

/// 0.9 / L, where L estimates the gradient's Lipschitz constant (||A||^2 for a
/// unit-weight least-squares term).
double default_step_size(const SmoothFidelity &g);

enum class StopReason { ToleranceReached, MaxIterations };

std::string to_string(StopReason reason);

struct IterationRecord {
  int iter = 0;
  double fp_residual = 0.0;
  std::optional<double> objective;
  std::optional<double> psnr;
  std::optional<double> ce_residual_g;
  std::optional<double> ce_residual_d;
  std::optional<double> red_residual;
  std::optional<double> pnp_ista_residual;
  std::optional<double> consensus_residual;
  std::optional<double> equilibrium_residual;

  friend bool operator==(const IterationRecord &, const IterationRecord &) = default;
};

struct SolverTrace {
  std::vector<IterationRecord> records;
  StopReason stop_reason = StopReason::MaxIterations;
  std::vector<std::string> warnings;

  std::size_t iterations() const { return records.size(); }
  /// Compares records and stop reason; warnings are ignored.
  bool same_trajectory(const SolverTrace &other) const {
    return records == other.records && stop_reason == other.stop_reason;
  }
};

struct SolverResult {
  Image x;
  /// Scaled dual variable of the ADMM family.
  std::optional<Image> u;
  SolverTrace trace;
  /// Family-matching certificate evaluated at the returned point.
  EquilibriumReport certificate;
};

/// Classical ADMM: z = prox_{gamma g}(x - u), x = prox_{gamma h}(z + u),
/// u += z - x. `proximal_agent` must be prox_{gamma h}.
SolverResult admm(const DataFidelity &g, const Agent &proximal_agent, const SolverConfig &cfg);

/// ADMM with the prior proximal step replaced by an arbitrary agent.
/// Stops on the joint relative change of (x, z, u).
SolverResult pnp_admm(const DataFidelity &g, const Agent &denoiser, const SolverConfig &cfg);

/// Proximal gradient with momentum: z = x - gamma grad g(x), s = prox(z),
/// x from the theta schedule.
SolverResult fista(const SmoothFidelity &g, const Agent &proximal_agent,
                   const SolverConfig &cfg);
SolverResult pnp_fista(const SmoothFidelity &g, const Agent &denoiser, const SolverConfig &cfg);
/// pnp_fista with theta == 1.
SolverResult pnp_ista(const SmoothFidelity &g, const Agent &denoiser, const SolverConfig &cfg);

/// Steepest-descent RED: x -= gamma (grad g(x) + tau (x - D(x))).
SolverResult red_sd(const SmoothFidelity &g, const Agent &denoiser, const SolverConfig &cfg);

/// Online PnP-ISTA using cfg.minibatch blocks per iteration drawn from the
/// sampler. With one block this reproduces pnp_ista exactly.
SolverResult online_pnp(const BlockFidelity &g, const Agent &denoiser, BlockSampler &sampler,
                        const SolverConfig &cfg);

/// Online RED-SD (SIMBA) with minibatch gradients. With one block this
/// reproduces red_sd exactly.
SolverResult simba(const BlockFidelity &g, const Agent &denoiser, BlockSampler &sampler,
                   const SolverConfig &cfg);

using FixedPointMap = std::function<Image(const Image &)>;

/// Relaxed fixed-point iteration v = (1 - rho) v + rho T(v); rho taken from
/// the argument (cfg.rho is ignored).
SolverResult mann_iterate(const FixedPointMap &map, const Image &v0, double rho,
                          const SolverConfig &cfg);

/// (2G - I)(2D - I) with G = prox_{gamma g}. Its fixed points v give PnP-ADMM
/// solutions x = D(v).
FixedPointMap admm_reflection_operator(const DataFidelity &g, const Agent &denoiser,
                                       double gamma, ProxMethod prox);

} // namespace pnp
