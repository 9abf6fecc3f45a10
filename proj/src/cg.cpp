#include "pnp/cg.hpp"

#include <cmath>
#include <string>

namespace pnp {

namespace {

CgResult run_cg(const SpdMap &op, const Image &b, const Image &x0, double tol, int maxiter) {
  require_same_shape("cg_solve", b.shape(), x0.shape());
  CgResult result;
  result.x = x0;
  const double bnorm = norm(b);

  Image r = b - op(x0);
  double rr = squared_norm(r);
  const double scale = bnorm > 0.0 ? bnorm : 1.0;
  result.residual = std::sqrt(rr) / scale;
  result.residual_history.push_back(result.residual);
  if (rr == 0.0 || result.residual <= tol) {
    return result;
  }

  Image p = r;
  for (int k = 1; k <= maxiter; ++k) {
    const Image mp = op(p);
    const double pmp = dot(p, mp);
    const double alpha = rr / pmp;
    if (!std::isfinite(alpha) || pmp <= 0.0) {
      throw NonFiniteError("cg_solve: breakdown at iteration " + std::to_string(k) +
                           " (p^T M p = " + std::to_string(pmp) + ")");
    }
    try {
      result.x.add_scaled(alpha, p);
      r.add_scaled(-alpha, mp);
    } catch (const NonFiniteError &) {
      throw NonFiniteError("cg_solve: non-finite iterate at iteration " + std::to_string(k));
    }
    const double rr_next = squared_norm(r);
    result.iterations = k;
    result.residual = std::sqrt(rr_next) / scale;
    result.residual_history.push_back(result.residual);
    if (rr_next == 0.0 || result.residual <= tol) {
      break;
    }
    const double beta = rr_next / rr;
    rr = rr_next;
    p *= beta;
    p += r;
  }
  return result;
}

} // namespace

CgResult cg_solve(const SpdMap &op, const Image &b, const Image &x0, const CgOptions &opts) {
  if (!(opts.tol > 0.0)) {
    throw ArgumentError("cg_solve: tol must be positive");
  }
  if (opts.maxiter < 0) {
    throw ArgumentError("cg_solve: maxiter must be >= 0");
  }
  return run_cg(op, b, x0, opts.tol, opts.maxiter);
}

CgResult cg_steps(const SpdMap &op, const Image &b, const Image &x0, int steps) {
  if (steps < 0) {
    throw ArgumentError("cg_steps: steps must be >= 0");
  }
  return run_cg(op, b, x0, 0.0, steps);
}

} // namespace pnp
