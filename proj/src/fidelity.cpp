#include "pnp/fidelity.hpp"

#include <algorithm>
#include <cmath>

namespace pnp {

namespace {

constexpr int kLipschitzPowerIters = 100;

} // namespace

// DataFidelity --------------------------------------------------------------

DataFidelity::DataFidelity(OperatorPtr op, Image y, double weight)
    : op_(std::move(op)), y_(std::move(y)), weight_(weight) {
  if (!op_) {
    throw ArgumentError("DataFidelity: operator is null");
  }
  require_same_shape("DataFidelity measurements", y_.shape(), op_->output_shape());
  if (!(weight_ > 0.0) || !std::isfinite(weight_)) {
    throw ArgumentError("DataFidelity: weight must be positive");
  }
}

double DataFidelity::value(const Image &x) const {
  const Image ax = op_->apply(x);
  return 0.5 * weight_ * squared_norm(ax - y_);
}

Image DataFidelity::gradient(const Image &x) const {
  Image g = op_->adjoint(op_->apply(x) - y_);
  if (weight_ != 1.0) {
    g *= weight_;
  }
  return g;
}

Image DataFidelity::backprojection() const { return op_->adjoint(y_); }

double DataFidelity::lipschitz_estimate() const {
  SeededRng rng(0);
  const double a = operator_norm(*op_, rng, kLipschitzPowerIters);
  return weight_ * a * a;
}

Image DataFidelity::prox_rhs(const Image &v, double gamma) const {
  require_same_shape("DataFidelity::prox", v.shape(), input_shape());
  return axpy(gamma * weight_, op_->adjoint(y_), v);
}

SpdMap DataFidelity::prox_system(double gamma) const {
  const double c = gamma * weight_;
  return [this, c](const Image &z) {
    Image out = op_->adjoint(op_->apply(z));
    out *= c;
    out += z;
    return out;
  };
}

CgResult DataFidelity::prox_cg(const Image &v, double gamma, const CgOptions &opts,
                               const Image &start) const {
  return cg_solve(prox_system(gamma), prox_rhs(v, gamma), start, opts);
}

Image DataFidelity::prox(const Image &v, double gamma, const ProxMethod &method,
                         ProxWarmState *warm) const {
  if (!(gamma > 0.0)) {
    throw ArgumentError("DataFidelity::prox: gamma must be positive");
  }
  if (std::holds_alternative<ClosedFormProx>(method)) {
    const auto diag = op_->gram_diagonal();
    if (!diag) {
      throw ArgumentError("DataFidelity::prox: closed form requires diagonal A^T A, operator '" +
                          op_->name() + "' is not");
    }
    Image z = prox_rhs(v, gamma);
    auto zs = z.values();
    auto ds = diag->values();
    const double c = gamma * weight_;
    for (std::size_t i = 0; i < zs.size(); ++i) {
      zs[i] /= 1.0 + c * ds[i];
    }
    return z;
  }
  if (const auto *cg = std::get_if<CgProx>(&method)) {
    return prox_cg(v, gamma, cg->cg, v).x;
  }
  const auto &partial = std::get<PartialProx>(method);
  if (warm == nullptr) {
    throw ArgumentError("DataFidelity::prox: partial updates need a warm state");
  }
  if (partial.inner_steps < 1) {
    throw ArgumentError("DataFidelity::prox: partial updates need inner_steps >= 1");
  }
  const Image &start = warm->last ? *warm->last : v;
  require_same_shape("ProxWarmState", start.shape(), v.shape());
  CgResult res = cg_steps(prox_system(gamma), prox_rhs(v, gamma), start, partial.inner_steps);
  warm->initial_residuals.push_back(res.residual_history.front());
  warm->last = res.x;
  return std::move(res.x);
}

ProxMethod default_prox_method(const DataFidelity &g) {
  if (g.op().gram_diagonal()) {
    return ClosedFormProx{};
  }
  return CgProx{};
}

// BlockFidelity -------------------------------------------------------------

BlockFidelity::BlockFidelity(std::vector<DataFidelity> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) {
    throw ArgumentError("BlockFidelity: need at least one block");
  }
  for (const auto &b : blocks_) {
    require_same_shape("BlockFidelity", b.input_shape(), blocks_.front().input_shape());
  }
}

const DataFidelity &BlockFidelity::block(std::size_t i) const {
  if (i >= blocks_.size()) {
    throw ArgumentError("BlockFidelity: block index " + std::to_string(i) + " out of range [0, " +
                        std::to_string(blocks_.size()) + ")");
  }
  return blocks_[i];
}

double BlockFidelity::value(const Image &x) const {
  double acc = 0.0;
  for (const auto &b : blocks_) {
    acc += b.value(x);
  }
  return acc / static_cast<double>(blocks_.size());
}

Image BlockFidelity::gradient(const Image &x) const {
  std::vector<std::size_t> all(blocks_.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    all[i] = i;
  }
  return minibatch_gradient(std::move(all), x);
}

Image BlockFidelity::backprojection() const {
  Image acc(input_shape());
  for (const auto &b : blocks_) {
    acc += b.backprojection();
  }
  return acc;
}

double BlockFidelity::lipschitz_estimate() const {
  double acc = 0.0;
  for (const auto &b : blocks_) {
    acc += b.lipschitz_estimate();
  }
  return acc / static_cast<double>(blocks_.size());
}

Image BlockFidelity::block_gradient(std::size_t index, const Image &x) const {
  return block(index).gradient(x);
}

Image BlockFidelity::minibatch_gradient(std::vector<std::size_t> indices, const Image &x) const {
  if (indices.empty()) {
    throw ArgumentError("BlockFidelity::minibatch_gradient: empty index set");
  }
  std::sort(indices.begin(), indices.end());
  Image acc(input_shape());
  for (auto i : indices) {
    acc += block(i).gradient(x);
  }
  acc *= 1.0 / static_cast<double>(indices.size());
  return acc;
}

// BlockSampler --------------------------------------------------------------

BlockSampler::BlockSampler(std::uint64_t seed, std::size_t block_count, SamplingRule rule)
    : rng_(seed), block_count_(block_count), rule_(rule) {
  if (block_count_ == 0) {
    throw ArgumentError("BlockSampler: block count must be >= 1");
  }
}

std::size_t BlockSampler::next() {
  if (rule_ == SamplingRule::IidUniform) {
    return static_cast<std::size_t>(rng_.uniform_index(block_count_));
  }
  if (cursor_ == epoch_.size()) {
    epoch_.resize(block_count_);
    for (std::size_t i = 0; i < block_count_; ++i) {
      epoch_[i] = i;
    }
    rng_.shuffle(epoch_);
    cursor_ = 0;
  }
  return epoch_[cursor_++];
}

std::vector<std::size_t> BlockSampler::draw(std::size_t count) {
  std::vector<std::size_t> out(count);
  for (auto &i : out) {
    i = next();
  }
  return out;
}

} // namespace pnp
