#include "pnp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pnp {

namespace {

double relative(double num, const Image &scale) {
  return num / std::max(norm(scale), kResidualFloor);
}

} // namespace

ProxMethod certification_prox_method(const DataFidelity &g) {
  if (g.op().gram_diagonal()) {
    return ClosedFormProx{};
  }
  return CgProx{CgOptions{1e-12, 1000}};
}

EquilibriumReport consensus_equilibrium_residuals(const DataFidelity &g, const Agent &denoiser,
                                                  const Image &x, const Image &u, double gamma) {
  return consensus_equilibrium_residuals(g, denoiser, x, u, gamma, certification_prox_method(g));
}

EquilibriumReport consensus_equilibrium_residuals(const DataFidelity &g, const Agent &denoiser,
                                                  const Image &x, const Image &u, double gamma,
                                                  const ProxMethod &prox) {
  require_same_shape("consensus_equilibrium_residuals", x.shape(), u.shape());
  EquilibriumReport report;
  report.ce_residual_g = relative(distance(x, g.prox(x - u, gamma, prox)), x);
  report.ce_residual_d = relative(distance(x, denoiser.apply(x + u)), x);
  report.dual_identity_residual = relative(norm(axpy(gamma, g.gradient(x), u)), x);
  return report;
}

double pnp_ista_residual(const SmoothFidelity &g, const Agent &denoiser, const Image &x,
                         double gamma) {
  const Image step = axpy(-gamma, g.gradient(x), x);
  return relative(distance(x, denoiser.apply(step)), x);
}

EquilibriumReport red_residuals(const SmoothFidelity &g, const Agent &denoiser, const Image &x,
                                double tau) {
  const Image grad = g.gradient(x);
  const Image h = axpy(tau, residual(denoiser, x), grad);
  EquilibriumReport report;
  report.red_residual = norm(h);
  report.red_residual_relative = relative(*report.red_residual, x);
  return report;
}

double mse(const Image &x, const Image &reference) {
  require_same_shape("mse", x.shape(), reference.shape());
  auto xs = x.values();
  auto rs = reference.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - rs[i];
    acc += d * d;
  }
  return acc / static_cast<double>(xs.size());
}

double psnr(const Image &x, const Image &reference, double peak) {
  if (!(peak > 0.0)) {
    throw ArgumentError("psnr: peak must be positive");
  }
  const double err = mse(x, reference);
  if (err == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(peak * peak / err);
}

} // namespace pnp
