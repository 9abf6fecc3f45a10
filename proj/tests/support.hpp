#pragma once

// Small helpers shared by the unit and acceptance tests: seeded generators,
// dense linear algebra oracles and the LASSO test instance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "pnp/fidelity.hpp"
#include "pnp/image.hpp"
#include "pnp/linops.hpp"
#include "pnp/rng.hpp"

namespace pnp::testing {

using Matrix = std::vector<std::vector<double>>;

inline Image random_image(SeededRng &rng, const Shape &shape, double scale = 1.0) {
  Image out(shape);
  for (auto &v : out.values()) {
    v = scale * rng.normal();
  }
  return out;
}

inline double max_abs_diff(const Image &a, const Image &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

inline double relative_error(const Image &x, const Image &ref) {
  return distance(x, ref) / std::max(norm(ref), 1e-300);
}

/// Columns A e_k, so the result is the m x n matrix of the operator.
inline Matrix dense_of(const LinearOperator &op) {
  const std::size_t n = element_count(op.input_shape());
  const std::size_t m = element_count(op.output_shape());
  Matrix a(m, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    Image e(op.input_shape());
    e[k] = 1.0;
    const Image col = op.apply(e);
    for (std::size_t r = 0; r < m; ++r) {
      a[r][k] = col[r];
    }
  }
  return a;
}

inline Matrix transpose(const Matrix &a) {
  Matrix t(a.front().size(), std::vector<double>(a.size()));
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t c = 0; c < a[r].size(); ++c) {
      t[c][r] = a[r][c];
    }
  }
  return t;
}

inline Matrix multiply(const Matrix &a, const Matrix &b) {
  Matrix out(a.size(), std::vector<double>(b.front().size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      for (std::size_t j = 0; j < b[k].size(); ++j) {
        out[i][j] += a[i][k] * b[k][j];
      }
    }
  }
  return out;
}

inline std::vector<double> multiply(const Matrix &a, const std::vector<double> &x) {
  std::vector<double> out(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      out[i] += a[i][k] * x[k];
    }
  }
  return out;
}

/// Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(Matrix a, std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) {
        pivot = r;
      }
    }
    if (a[pivot][col] == 0.0) {
      throw std::runtime_error("singular matrix");
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) {
        a[r][c] -= f * a[col][c];
      }
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) {
      s -= a[i][c] * x[c];
    }
    x[i] = s / a[i][i];
  }
  return x;
}

inline std::vector<double> to_vector(const Image &x) {
  return {x.values().begin(), x.values().end()};
}

/// Seeded 8 x 16 LASSO problem: sparse truth, Gaussian A, small noise.
struct LassoInstance {
  std::shared_ptr<const DenseMatrix> op;
  Image truth;
  Image y;
  double tau = 0.1;
  std::shared_ptr<const DataFidelity> g;
};

inline LassoInstance lasso_instance(std::uint64_t seed = 2024) {
  LassoInstance inst;
  inst.op = random_projection(8, Shape{16}, seed);
  SeededRng rng(seed + 1);
  inst.truth = Image(Shape{16});
  inst.truth[1] = 1.5;
  inst.truth[6] = -2.0;
  inst.truth[11] = 0.8;
  inst.y = inst.op->apply(inst.truth);
  inst.y += gaussian_noise(rng, inst.y.shape(), 0.01);
  inst.g = std::make_shared<DataFidelity>(inst.op, inst.y);
  return inst;
}

inline double lasso_objective(const LassoInstance &inst, const Image &x) {
  double l1 = 0.0;
  for (double v : x.values()) {
    l1 += std::abs(v);
  }
  return inst.g->value(x) + inst.tau * l1;
}

/// Independent proximal-gradient reference for the LASSO instance, written
/// against the explicit matrix: x <- soft(x - t A^T (A x - y), t tau) until the
/// relative change drops below `tol`. Step t = 1 / lambda_max(A^T A), with the
/// eigenvalue from power iteration on the explicit Gram matrix.
inline std::vector<double> lasso_oracle(const LassoInstance &inst, double tol = 1e-10) {
  const Matrix a = dense_of(*inst.op);
  const Matrix at = transpose(a);
  const Matrix gram = multiply(at, a);
  const std::size_t n = gram.size();
  std::vector<double> v(n, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 2000; ++it) {
    auto w = multiply(gram, v);
    double s = 0.0;
    for (double e : w) {
      s += e * e;
    }
    lambda = std::sqrt(s);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = w[i] / lambda;
    }
  }
  const double t = 1.0 / lambda;
  const auto aty = multiply(at, to_vector(inst.y));
  std::vector<double> x(n, 0.0);
  for (int it = 0; it < 2000000; ++it) {
    const auto gx = multiply(gram, x);
    double change = 0.0;
    double size = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = x[i] - t * (gx[i] - aty[i]);
      const double s = std::copysign(std::max(std::abs(z) - t * inst.tau, 0.0), z);
      change += (s - x[i]) * (s - x[i]);
      size += s * s;
      x[i] = s;
    }
    if (std::sqrt(change) <= tol * std::max(std::sqrt(size), 1e-300)) {
      break;
    }
  }
  return x;
}

} // namespace pnp::testing
