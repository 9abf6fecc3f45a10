#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "pnp/linops.hpp"
#include "support.hpp"

namespace {

using namespace pnp;
using pnp::testing::random_image;

struct NamedOperator {
  std::string label;
  OperatorPtr op;
};

std::vector<NamedOperator> catalog() {
  SeededRng rng(100);
  std::vector<NamedOperator> ops;
  ops.push_back({"identity", std::make_shared<IdentityOperator>(Shape{6, 7})});
  ops.push_back({"diagonal", std::make_shared<DiagonalOperator>(random_image(rng, {6, 7}))});
  ops.push_back({"conv2d", std::make_shared<PeriodicConvolution>(random_image(rng, {3, 4}),
                                                                 Shape{6, 7})});
  ops.push_back({"conv3d", std::make_shared<PeriodicConvolution>(random_image(rng, {2, 3, 3}),
                                                                 Shape{4, 5, 6})});
  ops.push_back({"decimation", std::make_shared<Decimation>(Shape{7, 9},
                                                            std::vector<std::size_t>{2, 3})});
  ops.push_back({"composition", super_resolution_operator(Shape{12, 12}, 3, 1.0)});
  ops.push_back({"dense", random_projection(9, Shape{4, 5}, 17)});
  return ops;
}

TEST(Adjoint, CatalogOperatorsPassInnerProductTest) {
  SeededRng rng(1);
  for (const auto &[label, op] : catalog()) {
    for (int probe = 0; probe < 10; ++probe) {
      const Image x = random_image(rng, op->input_shape());
      const Image y = random_image(rng, op->output_shape());
      const Image ax = op->apply(x);
      const double lhs = dot(ax, y);
      const double rhs = dot(x, op->adjoint(y));
      EXPECT_LE(std::abs(lhs - rhs), 1e-10 * norm(ax) * norm(y)) << label;
    }
  }
}

TEST(Adjoint, MatchesTransposeOfExplicitMatrix) {
  for (const auto &[label, op] : catalog()) {
    const auto a = pnp::testing::dense_of(*op);
    const std::size_t m = a.size();
    for (std::size_t r = 0; r < m; ++r) {
      Image e(op->output_shape());
      e[r] = 1.0;
      const Image row = op->adjoint(e);
      for (std::size_t c = 0; c < row.size(); ++c) {
        ASSERT_NEAR(row[c], a[r][c], 1e-14) << label;
      }
    }
  }
}

TEST(Linearity, CatalogOperators) {
  SeededRng rng(2);
  for (const auto &[label, op] : catalog()) {
    const Image x = random_image(rng, op->input_shape());
    const Image z = random_image(rng, op->input_shape());
    const double alpha = rng.normal();
    const double beta = rng.normal();
    const Image lhs = op->apply(lincomb(alpha, x, beta, z));
    const Image rhs = lincomb(alpha, op->apply(x), beta, op->apply(z));
    EXPECT_LE(distance(lhs, rhs), 1e-12 * std::max(norm(rhs), 1.0)) << label;
  }
}

TEST(Linops, ShapeMismatchThrows) {
  for (const auto &[label, op] : catalog()) {
    Shape wrong = op->input_shape();
    wrong[0] += 1;
    EXPECT_THROW(op->apply(Image(wrong)), ShapeError) << label;
    Shape wrong_out = op->output_shape();
    wrong_out[0] += 1;
    EXPECT_THROW(op->adjoint(Image(wrong_out)), ShapeError) << label;
  }
}

TEST(PeriodicConvolution, DiracKernelIsIdentity) {
  SeededRng rng(3);
  const Image x = random_image(rng, {5, 8});
  PeriodicConvolution conv(gaussian_kernel(2, 0.0), Shape{5, 8});
  EXPECT_EQ(conv.apply(x), x);
  EXPECT_EQ(conv.adjoint(x), x);
}

// (Ax)[i] = sum_j kernel[j] x[(i - (j - c)) mod n], c = floor(k / 2).
Image direct_convolution(const Image &kernel, const Image &x, bool flipped) {
  const auto &ks = kernel.shape();
  const auto &xs = x.shape();
  Image out(xs);
  const long n0 = long(xs[0]);
  const long n1 = long(xs[1]);
  for (long i0 = 0; i0 < n0; ++i0) {
    for (long i1 = 0; i1 < n1; ++i1) {
      double s = 0.0;
      for (long j0 = 0; j0 < long(ks[0]); ++j0) {
        for (long j1 = 0; j1 < long(ks[1]); ++j1) {
          const long d0 = j0 - long(ks[0] / 2);
          const long d1 = j1 - long(ks[1] / 2);
          const long s0 = flipped ? i0 + d0 : i0 - d0;
          const long s1 = flipped ? i1 + d1 : i1 - d1;
          s += kernel[j0 * ks[1] + j1] * x[((s0 % n0 + n0) % n0) * n1 + (s1 % n1 + n1) % n1];
        }
      }
      out[i0 * n1 + i1] = s;
    }
  }
  return out;
}

TEST(PeriodicConvolution, MatchesDirectSumAndFlippedAdjoint) {
  SeededRng rng(4);
  const Image kernel = random_image(rng, {3, 4});
  const Image x = random_image(rng, {6, 5});
  PeriodicConvolution conv(kernel, Shape{6, 5});
  EXPECT_LE(pnp::testing::max_abs_diff(conv.apply(x), direct_convolution(kernel, x, false)),
            1e-13);
  EXPECT_LE(pnp::testing::max_abs_diff(conv.adjoint(x), direct_convolution(kernel, x, true)),
            1e-13);
}

TEST(PeriodicConvolution, KernelLargerThanImageWraps) {
  SeededRng rng(5);
  const Image kernel = random_image(rng, {5, 5});
  const Image x = random_image(rng, {3, 2});
  PeriodicConvolution conv(kernel, Shape{3, 2});
  EXPECT_LE(pnp::testing::max_abs_diff(conv.apply(x), direct_convolution(kernel, x, false)),
            1e-13);
}

TEST(Decimation, ConstantImageStaysConstant) {
  Decimation dec(Shape{8, 6}, {2, 2});
  const Image y = dec.apply(Image(Shape{8, 6}, 0.7));
  EXPECT_EQ(y, Image(Shape{4, 3}, 0.7));
}

TEST(Decimation, KeepsFirstSampleAndCeilsExtent) {
  Decimation dec(Shape{5}, {2});
  EXPECT_EQ(dec.output_shape(), Shape{3});
  const Image x(Shape{5}, std::vector<double>{1, 2, 3, 4, 5});
  EXPECT_EQ(dec.apply(x), Image(Shape{3}, std::vector<double>{1, 3, 5}));
  EXPECT_EQ(dec.adjoint(Image(Shape{3}, std::vector<double>{7, 8, 9})),
            Image(Shape{5}, std::vector<double>{7, 0, 8, 0, 9}));
}

TEST(Decimation, RejectsBadRates) {
  EXPECT_THROW(Decimation(Shape{4, 4}, {2}), ArgumentError);
  EXPECT_THROW(Decimation(Shape{4, 4}, {2, 0}), ArgumentError);
}

TEST(Composition, AdjointIsReversedComposition) {
  SeededRng rng(6);
  auto conv = std::make_shared<PeriodicConvolution>(random_image(rng, {3, 3}), Shape{8, 8});
  auto dec = std::make_shared<Decimation>(Shape{8, 8}, std::vector<std::size_t>{2, 4});
  Composition comp({conv, dec});
  for (int probe = 0; probe < 10; ++probe) {
    const Image x = random_image(rng, {8, 8});
    const Image y = random_image(rng, comp.output_shape());
    EXPECT_EQ(comp.apply(x), dec->apply(conv->apply(x)));
    EXPECT_EQ(comp.adjoint(y), conv->adjoint(dec->adjoint(y)));
  }
}

TEST(Composition, RejectsIncompatibleShapes) {
  auto a = std::make_shared<IdentityOperator>(Shape{4});
  auto b = std::make_shared<IdentityOperator>(Shape{5});
  EXPECT_THROW(Composition({a, b}), ShapeError);
}

TEST(DenseMatrix, SmallExample) {
  DenseMatrix a(2, Shape{3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(a.apply(Image(Shape{3}, std::vector<double>{1, 0, -1})),
            Image(Shape{2}, std::vector<double>{-2, -2}));
  EXPECT_EQ(a.adjoint(Image(Shape{2}, std::vector<double>{1, 1})),
            Image(Shape{3}, std::vector<double>{5, 7, 9}));
  const DenseMatrix block = a.row_block(1, 2);
  EXPECT_EQ(block.rows(), 1u);
  EXPECT_EQ(block.at(0, 2), 6.0);
}

TEST(RandomProjection, ReproducibleFromSeedAndSize) {
  const auto a = random_projection(5, Shape{3, 4}, 9);
  const auto b = random_projection(5, Shape{3, 4}, 9);
  const auto c = random_projection(5, Shape{3, 4}, 10);
  const Image x(Shape{3, 4}, 1.0);
  EXPECT_EQ(a->apply(x), b->apply(x));
  EXPECT_NE(a->apply(x), c->apply(x));
}

TEST(RandomProjection, EntryVarianceIsOneOverM) {
  const std::size_t m = 200;
  const std::size_t n = 500;
  const auto a = random_projection(m, Shape{n}, 3);
  double s2 = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      s2 += a->at(r, c) * a->at(r, c);
    }
  }
  const double var = s2 / double(m * n);
  EXPECT_NEAR(var * double(m), 1.0, 0.02);
}

TEST(GaussianKernel, NormalizedNonnegativeSymmetric) {
  const Image k = gaussian_kernel(2, 1.3);
  EXPECT_EQ(k.shape(), (Shape{9, 9}));
  double sum = 0.0;
  for (double v : k.values()) {
    EXPECT_GE(v, 0.0);
    sum += v;
  }
  EXPECT_NEAR(sum, 1.0, 1e-14);
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 9; ++j) {
      EXPECT_EQ(k[i * 9 + j], k[(8 - i) * 9 + (8 - j)]);
    }
  }
}

TEST(OperatorNorm, Identity) {
  SeededRng rng(1);
  EXPECT_NEAR(operator_norm(IdentityOperator(Shape{10, 10}), rng, 5), 1.0, 1e-8);
}

TEST(OperatorNorm, DiagonalThreeOne) {
  SeededRng rng(1);
  DiagonalOperator d(Image(Shape{2}, std::vector<double>{3, 1}));
  EXPECT_NEAR(operator_norm(d, rng, 50), 3.0, 1e-6);
}

TEST(OperatorNorm, ZeroOperatorIsZero) {
  SeededRng rng(1);
  DiagonalOperator d(Image(Shape{4}));
  EXPECT_EQ(operator_norm(d, rng, 10), 0.0);
}

TEST(OperatorNorm, RejectsZeroIterations) {
  SeededRng rng(1);
  EXPECT_THROW(operator_norm(IdentityOperator(Shape{2}), rng, 0), ArgumentError);
}

// max_k |sum_j kernel[j] exp(-2 pi i <j, k> / n)| over the image grid.
double max_dft_magnitude(const Image &kernel, const Shape &shape) {
  double best = 0.0;
  const auto &ks = kernel.shape();
  for (std::size_t k0 = 0; k0 < shape[0]; ++k0) {
    for (std::size_t k1 = 0; k1 < shape[1]; ++k1) {
      std::complex<double> s = 0.0;
      for (std::size_t j0 = 0; j0 < ks[0]; ++j0) {
        for (std::size_t j1 = 0; j1 < ks[1]; ++j1) {
          const double phase = -2.0 * std::numbers::pi *
                               (double(j0 * k0) / double(shape[0]) + double(j1 * k1) / double(shape[1]));
          s += kernel[j0 * ks[1] + j1] * std::polar(1.0, phase);
        }
      }
      best = std::max(best, std::abs(s));
    }
  }
  return best;
}

TEST(OperatorNorm, PeriodicConvolutionMatchesKernelDft) {
  SeededRng rng(12);
  for (int trial = 0; trial < 3; ++trial) {
    // Mixed-sign kernels so the peak is not simply the DC gain.
    const Image kernel = random_image(rng, {3, 3});
    const Shape shape{12, 10};
    PeriodicConvolution conv(kernel, shape);
    SeededRng probe(50 + trial);
    const double estimate = operator_norm(conv, probe, 3000);
    const double exact = max_dft_magnitude(kernel, shape);
    EXPECT_NEAR(estimate, exact, 1e-6 * exact);
  }
}

TEST(OperatorNorm, NondecreasingInIterations) {
  SeededRng rng(13);
  const auto op = random_projection(6, Shape{10}, 4);
  double prev = 0.0;
  for (int iters = 1; iters <= 30; ++iters) {
    SeededRng probe(8);
    const double est = operator_norm(*op, probe, iters);
    EXPECT_GE(est, prev * (1.0 - 1e-12));
    prev = est;
  }
}

} // namespace
