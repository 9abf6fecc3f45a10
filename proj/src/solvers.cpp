#include "pnp/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pnp {

namespace {

Image starting_point(const SmoothFidelity &g, const SolverConfig &cfg) {
  Image x = cfg.x0 ? *cfg.x0 : g.backprojection();
  require_same_shape("solver starting point", x.shape(), g.input_shape());
  return x;
}

double relative_change(const Image &next, const Image &prev) {
  return distance(next, prev) / std::max(norm(prev), kResidualFloor);
}

/// g(x) plus h(x) when the agent is prox_{gamma h} with a known penalty.
std::optional<double> composite_objective(const SmoothFidelity &g, const Agent *prior,
                                          const Image &x, double gamma) {
  double value = g.value(x);
  if (prior != nullptr) {
    if (auto p = prior->penalty(x)) {
      value += *p / gamma;
    }
  }
  return value;
}

void record_common(IterationRecord &rec, const SmoothFidelity &g, const Agent *prior,
                   const Image &x, const SolverConfig &cfg) {
  if (cfg.record_objective) {
    rec.objective = composite_objective(g, prior, x, cfg.gamma);
  }
  if (cfg.reference) {
    rec.psnr = psnr(x, *cfg.reference, cfg.psnr_peak);
  }
}

void check_gradient_step(const SmoothFidelity &g, const SolverConfig &cfg, SolverTrace &trace) {
  const double lipschitz = g.lipschitz_estimate();
  if (lipschitz > 0.0 && cfg.gamma > (1.0 + 1e-9) / lipschitz) {
    std::ostringstream os;
    os << "step size gamma = " << cfg.gamma << " exceeds 1/L = " << 1.0 / lipschitz;
    trace.warnings.push_back(os.str());
  }
}

ProxMethod stateless(const ProxMethod &method, const DataFidelity &g) {
  if (std::holds_alternative<PartialProx>(method)) {
    return certification_prox_method(g);
  }
  return method;
}

SolverResult run_admm(const DataFidelity &g, const Agent &prior, const SolverConfig &cfg) {
  cfg.validate();
  const ProxMethod prox = cfg.prox.value_or(default_prox_method(g));
  ProxWarmState warm;

  SolverResult out;
  Image x = starting_point(g, cfg);
  Image z = x;
  Image u(x.shape());

  for (int k = 1; k <= cfg.max_iters; ++k) {
    Image z_next = g.prox(x - u, cfg.gamma, prox, &warm);
    Image x_next = prior.apply(z_next + u);
    Image u_next = u + z_next;
    u_next -= x_next;

    const double dx = distance(x_next, x);
    const double dz = distance(z_next, z);
    const double du = distance(u_next, u);
    const double scale = std::sqrt(squared_norm(x) + squared_norm(z) + squared_norm(u));
    x = std::move(x_next);
    z = std::move(z_next);
    u = std::move(u_next);

    IterationRecord rec;
    rec.iter = k;
    rec.fp_residual = std::sqrt(dx * dx + dz * dz + du * du) / std::max(scale, kResidualFloor);
    record_common(rec, g, &prior, x, cfg);
    if (cfg.record_equilibrium) {
      const auto ce =
          consensus_equilibrium_residuals(g, prior, x, u, cfg.gamma, stateless(prox, g));
      rec.ce_residual_g = ce.ce_residual_g;
      rec.ce_residual_d = ce.ce_residual_d;
    }
    out.trace.records.push_back(rec);
    if (rec.fp_residual <= cfg.fp_tol) {
      out.trace.stop_reason = StopReason::ToleranceReached;
      break;
    }
  }
  out.certificate = consensus_equilibrium_residuals(g, prior, x, u, cfg.gamma);
  out.x = std::move(x);
  out.u = std::move(u);
  return out;
}

using GradientOracle = std::function<Image(const Image &)>;

/// Shared body of PnP-FISTA / PnP-ISTA and their online variants.
SolverResult run_fista(const SmoothFidelity &g, const Agent &prior, const SolverConfig &cfg,
                       const ThetaSchedule &theta, const GradientOracle &gradient) {
  SolverResult out;
  check_gradient_step(g, cfg, out.trace);

  Image x = starting_point(g, cfg);
  Image s_prev = x;
  double q = 1.0;

  for (int k = 1; k <= cfg.max_iters; ++k) {
    const Image z = axpy(-cfg.gamma, gradient(x), x);
    Image s = prior.apply(z);

    Image x_next;
    if (std::holds_alternative<IstaTheta>(theta)) {
      x_next = s;
    } else if (const auto *c = std::get_if<ConstantTheta>(&theta)) {
      x_next = lincomb(1.0 - c->theta, s_prev, c->theta, s);
    } else {
      const double q_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * q * q));
      x_next = s + ((q - 1.0) / q_next) * (s - s_prev);
      q = q_next;
    }

    IterationRecord rec;
    rec.iter = k;
    rec.fp_residual = relative_change(x_next, x);
    x = std::move(x_next);
    s_prev = std::move(s);

    record_common(rec, g, &prior, x, cfg);
    if (cfg.record_equilibrium) {
      rec.pnp_ista_residual = pnp_ista_residual(g, prior, x, cfg.gamma);
    }
    out.trace.records.push_back(rec);
    if (rec.fp_residual <= cfg.fp_tol) {
      out.trace.stop_reason = StopReason::ToleranceReached;
      break;
    }
  }
  EquilibriumReport cert;
  cert.pnp_ista_residual = pnp_ista_residual(g, prior, x, cfg.gamma);
  out.certificate = cert;
  out.x = std::move(x);
  return out;
}

/// Shared body of RED-SD and SIMBA.
SolverResult run_red(const SmoothFidelity &g, const Agent &prior, const SolverConfig &cfg,
                     const GradientOracle &gradient) {
  SolverResult out;
  Image x = starting_point(g, cfg);
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const Image h = axpy(cfg.tau, residual(prior, x), gradient(x));
    Image x_next = axpy(-cfg.gamma, h, x);

    IterationRecord rec;
    rec.iter = k;
    rec.fp_residual = relative_change(x_next, x);
    rec.red_residual = norm(h);
    x = std::move(x_next);

    record_common(rec, g, nullptr, x, cfg);
    out.trace.records.push_back(rec);
    if (rec.fp_residual <= cfg.fp_tol) {
      out.trace.stop_reason = StopReason::ToleranceReached;
      break;
    }
  }
  out.certificate = red_residuals(g, prior, x, cfg.tau);
  out.x = std::move(x);
  return out;
}

GradientOracle minibatch_oracle(const BlockFidelity &g, BlockSampler &sampler,
                                std::size_t minibatch) {
  if (sampler.block_count() != g.block_count()) {
    throw ArgumentError("sampler covers " + std::to_string(sampler.block_count()) +
                        " blocks but the data term has " + std::to_string(g.block_count()));
  }
  return [&g, &sampler, minibatch](const Image &x) {
    return g.minibatch_gradient(sampler.draw(minibatch), x);
  };
}

} // namespace

void SolverConfig::validate() const {
  auto fail = [](const std::string &msg) { throw ArgumentError("SolverConfig: " + msg); };
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    fail("gamma must be positive");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    fail("tau must be positive");
  }
  if (!(rho > 0.0 && rho < 1.0)) {
    fail("rho must lie strictly inside (0, 1)");
  }
  if (!(fp_tol > 0.0)) {
    fail("fp_tol must be positive");
  }
  if (max_iters < 1) {
    fail("max_iters must be >= 1");
  }
  if (minibatch < 1) {
    fail("minibatch must be >= 1");
  }
  if (const auto *c = std::get_if<ConstantTheta>(&theta); c && !(c->theta > 0.0 && c->theta <= 1.0)) {
    fail("constant theta must lie in (0, 1]");
  }
  if (!(psnr_peak > 0.0)) {
    fail("psnr_peak must be positive");
  }
}

double default_step_size(const SmoothFidelity &g) {
  const double lipschitz = g.lipschitz_estimate();
  if (!(lipschitz > 0.0)) {
    throw ArgumentError("default_step_size: data term has zero curvature");
  }
  return 0.9 / lipschitz;
}

std::string to_string(StopReason reason) {
  return reason == StopReason::ToleranceReached ? "tol_reached" : "max_iters";
}

SolverResult admm(const DataFidelity &g, const Agent &proximal_agent, const SolverConfig &cfg) {
  return run_admm(g, proximal_agent, cfg);
}

SolverResult pnp_admm(const DataFidelity &g, const Agent &denoiser, const SolverConfig &cfg) {
  return run_admm(g, denoiser, cfg);
}

SolverResult fista(const SmoothFidelity &g, const Agent &proximal_agent,
                   const SolverConfig &cfg) {
  return pnp_fista(g, proximal_agent, cfg);
}

SolverResult pnp_fista(const SmoothFidelity &g, const Agent &denoiser, const SolverConfig &cfg) {
  cfg.validate();
  return run_fista(g, denoiser, cfg, cfg.theta,
                   [&g](const Image &x) { return g.gradient(x); });
}

SolverResult pnp_ista(const SmoothFidelity &g, const Agent &denoiser, const SolverConfig &cfg) {
  cfg.validate();
  return run_fista(g, denoiser, cfg, IstaTheta{},
                   [&g](const Image &x) { return g.gradient(x); });
}

SolverResult red_sd(const SmoothFidelity &g, const Agent &denoiser, const SolverConfig &cfg) {
  cfg.validate();
  return run_red(g, denoiser, cfg, [&g](const Image &x) { return g.gradient(x); });
}

SolverResult online_pnp(const BlockFidelity &g, const Agent &denoiser, BlockSampler &sampler,
                        const SolverConfig &cfg) {
  cfg.validate();
  return run_fista(g, denoiser, cfg, IstaTheta{}, minibatch_oracle(g, sampler, cfg.minibatch));
}

SolverResult simba(const BlockFidelity &g, const Agent &denoiser, BlockSampler &sampler,
                   const SolverConfig &cfg) {
  cfg.validate();
  return run_red(g, denoiser, cfg, minibatch_oracle(g, sampler, cfg.minibatch));
}

SolverResult mann_iterate(const FixedPointMap &map, const Image &v0, double rho,
                          const SolverConfig &cfg) {
  SolverConfig checked = cfg;
  checked.rho = rho;
  checked.validate();

  SolverResult out;
  Image v = v0;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const Image tv = map(v);
    require_same_shape("mann_iterate", tv.shape(), v.shape());
    Image v_next = lincomb(1.0 - rho, v, rho, tv);

    IterationRecord rec;
    rec.iter = k;
    rec.fp_residual = relative_change(v_next, v);
    v = std::move(v_next);
    out.trace.records.push_back(rec);
    if (rec.fp_residual <= cfg.fp_tol) {
      out.trace.stop_reason = StopReason::ToleranceReached;
      break;
    }
  }
  out.x = std::move(v);
  return out;
}

FixedPointMap admm_reflection_operator(const DataFidelity &g, const Agent &denoiser,
                                       double gamma, ProxMethod prox) {
  if (std::holds_alternative<PartialProx>(prox)) {
    throw ArgumentError("admm_reflection_operator: partial prox updates are stateful");
  }
  return [&g, &denoiser, gamma, prox](const Image &v) {
    const Image r = 2.0 * denoiser.apply(v) - v;
    return 2.0 * g.prox(r, gamma, prox) - r;
  };
}

} // namespace pnp
