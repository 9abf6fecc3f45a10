#pragma once

#include <functional>
#include <vector>

#include "pnp/image.hpp"

namespace pnp {

/// Symmetric positive definite map x -> Mx.
using SpdMap = std::function<Image(const Image &)>;

struct CgOptions {
  double tol = 1e-3;
  int maxiter = 10;
};

struct CgResult {
  Image x;
  int iterations = 0;
  /// Final ||b - Mx|| / ||b|| (0 when b == 0).
  double residual = 0.0;
  /// Relative residual before the first iteration and after each one.
  std::vector<double> residual_history;
};

/// Conjugate gradients for Mx = b started at x0.
///
/// Stops when the recursively updated residual satisfies ||r|| / ||b|| <= tol or
/// after maxiter iterations. Throws NonFiniteError naming the iteration if a
/// non-finite value shows up (e.g. M is not positive definite).
CgResult cg_solve(const SpdMap &op, const Image &b, const Image &x0, const CgOptions &opts);

/// Runs exactly `steps` CG iterations from x0 (fewer only if the residual
/// becomes exactly zero). Used for warm-started partial proximal updates.
CgResult cg_steps(const SpdMap &op, const Image &b, const Image &x0, int steps);

} // namespace pnp
