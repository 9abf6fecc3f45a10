#pragma once

#include <cstdint>
#include <string>

#include "pnp/image.hpp"

namespace pnp::cli {

enum class PhantomKind { PiecewiseConstantBlocks, SmoothBumps, RandomSparse };

PhantomKind parse_phantom_kind(const std::string &name);
std::string to_string(PhantomKind kind);

/// Deterministic synthetic ground truth with values in [0, 1].
///
///   piecewise_constant_blocks: background 0.1 plus eight axis-aligned boxes
///     painted in order, each at a level drawn from [0.2, 1].
///   smooth_bumps: sum of six Gaussian bumps, rescaled to [0, 1].
///   random_sparse: exactly ceil(sparsity * n) nonzeros at shuffled positions,
///     values drawn from (0, 1].
Image phantom(PhantomKind kind, const Shape &shape, std::uint64_t seed, double sparsity = 0.05);

} // namespace pnp::cli
