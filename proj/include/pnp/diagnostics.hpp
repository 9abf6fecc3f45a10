#pragma once

#include <optional>

#include "pnp/agents.hpp"
#include "pnp/fidelity.hpp"
#include "pnp/image.hpp"

namespace pnp {

/// Fixed-point certificates at a candidate solution. Entries that do not
/// apply to the algorithm family are left empty.
struct EquilibriumReport {
  /// ||x - G(x - u)|| / ||x|| with G = prox_{gamma g}.
  std::optional<double> ce_residual_g;
  /// ||x - D(x + u)|| / ||x||.
  std::optional<double> ce_residual_d;
  /// ||u + gamma grad g(x)|| / ||x||; vanishes at a consensus equilibrium.
  std::optional<double> dual_identity_residual;
  /// ||grad g(x) + tau (x - D(x))||.
  std::optional<double> red_residual;
  /// red_residual / ||x||, the normalization shared with the other entries.
  std::optional<double> red_residual_relative;
  /// ||x - D(x - gamma grad g(x))|| / ||x||.
  std::optional<double> pnp_ista_residual;

  friend bool operator==(const EquilibriumReport &, const EquilibriumReport &) = default;
};

/// Floor for the relative-residual denominators.
inline constexpr double kResidualFloor = 1e-12;

/// Accurate prox used when certifying: closed form when A^T A is diagonal,
/// otherwise CG to a 1e-12 relative residual.
ProxMethod certification_prox_method(const DataFidelity &g);

/// Both consensus-equilibrium conditions x = G(x - u), x = D(x + u) and the
/// dual identity u = -gamma grad g(x).
EquilibriumReport consensus_equilibrium_residuals(const DataFidelity &g, const Agent &denoiser,
                                                  const Image &x, const Image &u, double gamma);
EquilibriumReport consensus_equilibrium_residuals(const DataFidelity &g, const Agent &denoiser,
                                                  const Image &x, const Image &u, double gamma,
                                                  const ProxMethod &prox);

/// ||x - D(x - gamma grad g(x))|| / ||x||.
double pnp_ista_residual(const SmoothFidelity &g, const Agent &denoiser, const Image &x,
                         double gamma);

/// Fills red_residual and red_residual_relative.
EquilibriumReport red_residuals(const SmoothFidelity &g, const Agent &denoiser, const Image &x,
                                double tau);

double mse(const Image &x, const Image &reference);
/// 10 log10(peak^2 / mse); +infinity when the images are identical.
double psnr(const Image &x, const Image &reference, double peak = 1.0);

} // namespace pnp
