#include "pnp/cli/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pnp/rng.hpp"

namespace pnp::cli {

namespace {

// Multi-index of flat position i.
void unravel(std::size_t i, const Shape &shape, std::vector<std::size_t> &idx) {
  for (std::size_t d = shape.size(); d-- > 0;) {
    idx[d] = i % shape[d];
    i /= shape[d];
  }
}

Image blocks(const Shape &shape, SeededRng &rng) {
  Image img(shape, 0.1);
  std::vector<std::size_t> idx(shape.size());
  for (int b = 0; b < 8; ++b) {
    std::vector<std::size_t> lo(shape.size()), hi(shape.size());
    for (std::size_t d = 0; d < shape.size(); ++d) {
      const std::size_t n = shape[d];
      const std::size_t extent = std::max<std::size_t>(1, n / 8 + rng.uniform_index(n / 3 + 1));
      lo[d] = rng.uniform_index(n - std::min(extent, n) + 1);
      hi[d] = std::min(n, lo[d] + extent);
    }
    const double level = 0.2 + 0.8 * rng.uniform();
    for (std::size_t i = 0; i < img.size(); ++i) {
      unravel(i, shape, idx);
      bool inside = true;
      for (std::size_t d = 0; d < shape.size() && inside; ++d) {
        inside = idx[d] >= lo[d] && idx[d] < hi[d];
      }
      if (inside) {
        img[i] = level;
      }
    }
  }
  return img;
}

Image bumps(const Shape &shape, SeededRng &rng) {
  Image img(shape);
  std::vector<std::size_t> idx(shape.size());
  for (int b = 0; b < 6; ++b) {
    std::vector<double> centre(shape.size()), width(shape.size());
    for (std::size_t d = 0; d < shape.size(); ++d) {
      centre[d] = rng.uniform() * static_cast<double>(shape[d]);
      width[d] = (0.08 + 0.15 * rng.uniform()) * static_cast<double>(shape[d]);
    }
    const double amp = 0.3 + 0.7 * rng.uniform();
    for (std::size_t i = 0; i < img.size(); ++i) {
      unravel(i, shape, idx);
      double e = 0.0;
      for (std::size_t d = 0; d < shape.size(); ++d) {
        const double t = (static_cast<double>(idx[d]) - centre[d]) / width[d];
        e += t * t;
      }
      img[i] += amp * std::exp(-0.5 * e);
    }
  }
  const auto v = img.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double low = *lo;
  const double span = *hi - *lo;
  for (double &x : img.values()) {
    x = span > 0.0 ? (x - low) / span : 0.0;
  }
  return img;
}

Image sparse(const Shape &shape, SeededRng &rng, double sparsity) {
  if (!(sparsity > 0.0 && sparsity <= 1.0)) {
    throw ArgumentError("phantom: sparsity must lie in (0, 1]");
  }
  Image img(shape);
  const std::size_t n = img.size();
  const auto count =
      std::min(n, static_cast<std::size_t>(std::ceil(sparsity * static_cast<double>(n))));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  for (std::size_t k = 0; k < count; ++k) {
    img[order[k]] = 1.0 - rng.uniform();
  }
  return img;
}

} // namespace

PhantomKind parse_phantom_kind(const std::string &name) {
  if (name == "piecewise_constant_blocks") {
    return PhantomKind::PiecewiseConstantBlocks;
  }
  if (name == "smooth_bumps") {
    return PhantomKind::SmoothBumps;
  }
  if (name == "random_sparse") {
    return PhantomKind::RandomSparse;
  }
  throw ArgumentError("unknown phantom kind '" + name + "'");
}

std::string to_string(PhantomKind kind) {
  switch (kind) {
  case PhantomKind::PiecewiseConstantBlocks:
    return "piecewise_constant_blocks";
  case PhantomKind::SmoothBumps:
    return "smooth_bumps";
  case PhantomKind::RandomSparse:
    return "random_sparse";
  }
  return "unknown";
}

Image phantom(PhantomKind kind, const Shape &shape, std::uint64_t seed, double sparsity) {
  validate_shape(shape);
  SeededRng rng(seed);
  switch (kind) {
  case PhantomKind::PiecewiseConstantBlocks:
    return blocks(shape, rng);
  case PhantomKind::SmoothBumps:
    return bumps(shape, rng);
  case PhantomKind::RandomSparse:
    return sparse(shape, rng, sparsity);
  }
  throw ArgumentError("phantom: unknown kind");
}

} // namespace pnp::cli
