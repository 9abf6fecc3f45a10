#include "pnp/mace.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace pnp {

namespace {

void check_components(const std::vector<Image> &components) {
  if (components.empty()) {
    throw ArgumentError("StackedImage: at least one component required");
  }
  for (std::size_t j = 1; j < components.size(); ++j) {
    require_same_shape("StackedImage component", components[j].shape(),
                       components[0].shape());
  }
}

void check_weights(const std::vector<double> &weights, std::size_t count) {
  if (weights.empty()) {
    return;
  }
  if (weights.size() != count) {
    throw ArgumentError("stack weights: expected " + std::to_string(count) + " weights, got " +
                        std::to_string(weights.size()));
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ArgumentError("stack weights must be finite and nonnegative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ArgumentError("stack weights must sum to 1 (got " + std::to_string(total) + ")");
  }
}

double weight_of(const std::vector<double> &weights, std::size_t j, std::size_t count) {
  return weights.empty() ? 1.0 / static_cast<double>(count) : weights[j];
}

} // namespace

StackedImage::StackedImage(std::vector<Image> components) : components_(std::move(components)) {
  check_components(components_);
}

StackedImage::StackedImage(std::size_t count, const Image &x) : components_(count, x) {
  check_components(components_);
}

const Shape &StackedImage::component_shape() const {
  if (components_.empty()) {
    throw ArgumentError("StackedImage: empty stack has no shape");
  }
  return components_.front().shape();
}

double squared_norm(const StackedImage &v) {
  double acc = 0.0;
  for (const Image &c : v.components()) {
    acc += squared_norm(c);
  }
  return acc;
}

double norm(const StackedImage &v) { return std::sqrt(squared_norm(v)); }

double distance(const StackedImage &a, const StackedImage &b) {
  if (a.count() != b.count()) {
    throw ArgumentError("stack distance: component counts differ");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < a.count(); ++j) {
    const double d = distance(a[j], b[j]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

AgentStack::AgentStack(std::vector<AgentPtr> agents) : AgentStack(std::move(agents), {}) {}

AgentStack::AgentStack(std::vector<AgentPtr> agents, std::vector<double> weights)
    : agents_(std::move(agents)), weights_(std::move(weights)) {
  if (agents_.size() < 2) {
    throw ArgumentError("AgentStack: at least two agents required");
  }
  for (const auto &a : agents_) {
    if (!a) {
      throw ArgumentError("AgentStack: null agent");
    }
  }
  check_weights(weights_, agents_.size());
}

StackedImage stack_apply(const AgentStack &stack, const StackedImage &v, std::size_t jobs) {
  if (v.count() != stack.count()) {
    throw ArgumentError("stack_apply: " + std::to_string(v.count()) + " components for " +
                        std::to_string(stack.count()) + " agents");
  }
  std::vector<Image> out(v.count());
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, v.count());
  if (workers == 1) {
    for (std::size_t j = 0; j < v.count(); ++j) {
      out[j] = stack.agent(j).apply(v[j]);
    }
    return StackedImage(std::move(out));
  }

  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t j = w; j < v.count(); j += workers) {
          out[j] = stack.agent(j).apply(v[j]);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto &t : pool) {
    t.join();
  }
  for (const auto &e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return StackedImage(std::move(out));
}

// Accumulated as v_1 + sum_j mu_j (v_j - v_1) so that a stack of identical
// components averages to exactly that component.
Image stack_average(const StackedImage &v, const std::vector<double> &weights) {
  check_weights(weights, v.count());
  const std::size_t n = v.count();
  Image acc = v[0];
  auto a = acc.values();
  const auto base = v[0].values();
  for (std::size_t j = 1; j < n; ++j) {
    const double mu = weight_of(weights, j, n);
    const auto c = v[j].values();
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] += mu * (c[i] - base[i]);
    }
  }
  acc.check_finite("stack_average");
  return acc;
}

StackedImage averaging_G(const StackedImage &v, const std::vector<double> &weights) {
  return StackedImage(v.count(), stack_average(v, weights));
}

StackedImage reflect_G(const StackedImage &v, const std::vector<double> &weights) {
  const Image mean = stack_average(v, weights);
  std::vector<Image> out;
  out.reserve(v.count());
  for (const Image &c : v.components()) {
    out.push_back(lincomb(2.0, mean, -1.0, c));
  }
  return StackedImage(std::move(out));
}

namespace {

MaceResiduals residuals_from(const StackedImage &v, const StackedImage &fv,
                             const std::vector<double> &weights) {
  MaceResiduals r;
  const Image fbar = stack_average(fv, weights);
  for (const Image &c : fv.components()) {
    r.consensus = std::max(r.consensus, distance(c, fbar));
  }
  Image eq(v.component_shape());
  for (std::size_t j = 0; j < v.count(); ++j) {
    eq.add_scaled(weight_of(weights, j, v.count()), v[j] - fv[j]);
  }
  r.equilibrium = norm(eq);
  return r;
}

} // namespace

MaceResiduals mace_residuals(const AgentStack &stack, const StackedImage &v, std::size_t jobs) {
  return residuals_from(v, stack_apply(stack, v, jobs), stack.weights());
}

MaceResult mace_solve(const AgentStack &stack, const Image &x0, const SolverConfig &cfg,
                      std::size_t jobs) {
  cfg.validate();
  const auto &weights = stack.weights();
  const double rho = cfg.rho;

  MaceResult out;
  StackedImage v(stack.count(), x0);
  Image z = x0;

  for (int k = 1; k <= cfg.max_iters; ++k) {
    const StackedImage fx = stack_apply(stack, v, jobs);
    const MaceResiduals res = residuals_from(v, fx, weights);

    std::vector<Image> w;
    w.reserve(v.count());
    for (std::size_t j = 0; j < v.count(); ++j) {
      w.push_back(lincomb(2.0, fx[j], -1.0, v[j]));
    }
    z = stack_average(StackedImage(std::move(w)), weights);

    std::vector<Image> next;
    next.reserve(v.count());
    for (std::size_t j = 0; j < v.count(); ++j) {
      next.push_back(axpy(2.0 * rho, z - fx[j], v[j]));
    }
    StackedImage v_next(std::move(next));

    IterationRecord rec;
    rec.iter = k;
    rec.fp_residual = distance(v_next, v) / std::max(norm(v), kResidualFloor);
    rec.consensus_residual = res.consensus;
    rec.equilibrium_residual = res.equilibrium;
    if (cfg.reference) {
      rec.psnr = psnr(z, *cfg.reference, cfg.psnr_peak);
    }
    v = std::move(v_next);
    out.trace.records.push_back(rec);
    if (rec.fp_residual <= cfg.fp_tol) {
      out.trace.stop_reason = StopReason::ToleranceReached;
      break;
    }
  }
  out.residuals = mace_residuals(stack, v, jobs);
  out.x = std::move(z);
  out.v = std::move(v);
  return out;
}

} // namespace pnp
