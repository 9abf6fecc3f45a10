#include "pnp/agents.hpp"

#include <algorithm>
#include <cmath>

namespace pnp {

namespace {

/// Row-major strides.
std::vector<std::size_t> strides_of(const Shape &shape) {
  std::vector<std::size_t> s(shape.size(), 1);
  for (std::size_t a = shape.size(); a-- > 1;) {
    s[a - 1] = s[a] * shape[a];
  }
  return s;
}

std::vector<std::size_t> active_axes(const Shape &shape) {
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < shape.size(); ++a) {
    if (shape[a] > 1) {
      out.push_back(a);
    }
  }
  return out;
}

/// Forward differences along one axis; zero at the last sample.
void forward_difference(std::span<const double> x, std::size_t stride, std::size_t extent,
                        std::span<double> out) {
  const std::size_t block = stride * extent;
  for (std::size_t base = 0; base < x.size(); base += block) {
    for (std::size_t c = 0; c + 1 < extent; ++c) {
      const std::size_t row = base + c * stride;
      for (std::size_t r = 0; r < stride; ++r) {
        out[row + r] = x[row + r + stride] - x[row + r];
      }
    }
    const std::size_t last = base + (extent - 1) * stride;
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(last),
              out.begin() + static_cast<std::ptrdiff_t>(last + stride), 0.0);
  }
}

/// Adds the adjoint of forward_difference applied to p into out.
void add_difference_adjoint(std::span<const double> p, std::size_t stride, std::size_t extent,
                            std::span<double> out) {
  const std::size_t block = stride * extent;
  for (std::size_t base = 0; base < p.size(); base += block) {
    for (std::size_t c = 0; c < extent; ++c) {
      const std::size_t row = base + c * stride;
      if (c + 1 < extent) {
        for (std::size_t r = 0; r < stride; ++r) {
          out[row + r] -= p[row + r];
        }
      }
      if (c > 0) {
        for (std::size_t r = 0; r < stride; ++r) {
          out[row + r] += p[row + r - stride];
        }
      }
    }
  }
}

void require_nonnegative(const char *what, double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw ArgumentError(std::string(what) + " must be finite and >= 0, got " + std::to_string(v));
  }
}

} // namespace

// Agent ---------------------------------------------------------------------

Agent::Agent(std::string label, std::optional<double> noise_level)
    : label_(std::move(label)), noise_level_(noise_level) {
  if (noise_level_) {
    require_nonnegative("Agent noise level", *noise_level_);
  }
}

Image Agent::apply(const Image &v) const {
  Image out = do_apply(v);
  require_same_shape(label_.c_str(), out.shape(), v.shape());
  out.check_finite(label_.c_str());
  return out;
}

// ScaledIdentity ------------------------------------------------------------

ScaledIdentity::ScaledIdentity(double alpha)
    : Agent("scaled_identity(" + std::to_string(alpha) + ")"), alpha_(alpha) {
  if (!std::isfinite(alpha_)) {
    throw ArgumentError("ScaledIdentity: alpha must be finite");
  }
}

Image ScaledIdentity::do_apply(const Image &v) const { return alpha_ * v; }

// ProxL2 --------------------------------------------------------------------

ProxL2::ProxL2(Image reference, double strength)
    : Agent("prox_l2"), reference_(std::move(reference)), strength_(strength) {
  require_nonnegative("ProxL2 strength", strength_);
}

std::optional<double> ProxL2::penalty(const Image &x) const {
  const double d = distance(x, reference_);
  return 0.5 * strength_ * d * d;
}

Image ProxL2::do_apply(const Image &v) const {
  require_same_shape("ProxL2", v.shape(), reference_.shape());
  Image out = axpy(strength_, reference_, v);
  out *= 1.0 / (1.0 + strength_);
  return out;
}

// SoftThreshold -------------------------------------------------------------

SoftThreshold::SoftThreshold(double threshold)
    : Agent("soft_threshold(" + std::to_string(threshold) + ")"), threshold_(threshold) {
  require_nonnegative("SoftThreshold threshold", threshold_);
}

std::optional<double> SoftThreshold::penalty(const Image &x) const {
  double acc = 0.0;
  for (double v : x.values()) {
    acc += std::abs(v);
  }
  return threshold_ * acc;
}

Image SoftThreshold::do_apply(const Image &v) const {
  Image out = v;
  for (auto &e : out.values()) {
    const double mag = std::abs(e) - threshold_;
    e = mag > 0.0 ? std::copysign(mag, e) : 0.0;
  }
  return out;
}

// TVProx --------------------------------------------------------------------

double total_variation(const Image &x) {
  const auto strides = strides_of(x.shape());
  double acc = 0.0;
  std::vector<double> diff(x.size());
  for (auto a : active_axes(x.shape())) {
    forward_difference(x.values(), strides[a], x.shape()[a], diff);
    for (double d : diff) {
      acc += std::abs(d);
    }
  }
  return acc;
}

TVProx::TVProx(double weight, int inner_iters)
    : Agent("tv_prox(" + std::to_string(weight) + ")"), weight_(weight),
      inner_iters_(inner_iters) {
  require_nonnegative("TVProx weight", weight_);
  if (inner_iters_ < 1) {
    throw ArgumentError("TVProx: inner_iters must be >= 1");
  }
}

std::optional<double> TVProx::penalty(const Image &x) const {
  return weight_ * total_variation(x);
}

Image TVProx::do_apply(const Image &v) const {
  const auto axes = active_axes(v.shape());
  if (weight_ == 0.0 || axes.empty()) {
    return v;
  }
  const auto strides = strides_of(v.shape());
  const std::size_t n = v.size();
  const double step = 1.0 / (4.0 * static_cast<double>(axes.size()));
  const double dual_step = step / weight_;

  // One dual field per active axis, each constrained to [-1, 1].
  std::vector<std::vector<double>> dual(axes.size(), std::vector<double>(n, 0.0));
  std::vector<double> x(v.values().begin(), v.values().end());
  std::vector<double> grad(n);
  std::vector<double> dtp(n);
  auto primal = [&]() {
    std::fill(dtp.begin(), dtp.end(), 0.0);
    for (std::size_t k = 0; k < axes.size(); ++k) {
      add_difference_adjoint(dual[k], strides[axes[k]], v.shape()[axes[k]], dtp);
    }
    auto vs = v.values();
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = vs[i] - weight_ * dtp[i];
    }
  };

  for (int it = 0; it < inner_iters_; ++it) {
    for (std::size_t k = 0; k < axes.size(); ++k) {
      forward_difference(x, strides[axes[k]], v.shape()[axes[k]], grad);
      auto &p = dual[k];
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = std::clamp(p[i] + dual_step * grad[i], -1.0, 1.0);
      }
    }
    primal();
  }
  return Image(v.shape(), std::move(x));
}

// GaussianSmooth ------------------------------------------------------------

GaussianSmooth::GaussianSmooth(double sigma)
    : Agent("gaussian_smooth(" + std::to_string(sigma) + ")"), sigma_(sigma) {
  require_nonnegative("GaussianSmooth sigma", sigma_);
  const Image k = gaussian_kernel(1, sigma_);
  taps_.assign(k.values().begin(), k.values().end());
}

Image GaussianSmooth::do_apply(const Image &v) const {
  const auto strides = strides_of(v.shape());
  const std::size_t radius = taps_.size() / 2;
  Image cur = v;
  auto data = cur.values();
  std::vector<double> line;
  for (auto a : active_axes(v.shape())) {
    const std::size_t s = strides[a];
    const std::size_t n = v.shape()[a];
    // Periodically padded copy of one line: line[k] = x[(k - radius) mod n].
    line.resize(n + 2 * radius);
    for (std::size_t base = 0; base < data.size(); base += s * n) {
      for (std::size_t r = 0; r < s; ++r) {
        const std::size_t start = base + r;
        for (std::size_t k = 0; k < line.size(); ++k) {
          const std::size_t src = (k + n * (radius / n + 1) - radius) % n;
          line[k] = data[start + src * s];
        }
        for (std::size_t c = 0; c < n; ++c) {
          double acc = 0.0;
          for (std::size_t t = 0; t < taps_.size(); ++t) {
            acc += taps_[t] * line[c + t];
          }
          data[start + c * s] = acc;
        }
      }
    }
  }
  return cur;
}

// MedianFilter --------------------------------------------------------------

MedianFilter::MedianFilter(std::size_t window)
    : Agent("median(" + std::to_string(window) + ")"), window_(window) {
  if (window_ == 0 || window_ % 2 == 0) {
    throw ArgumentError("MedianFilter: window must be odd and positive, got " +
                        std::to_string(window_));
  }
}

Image MedianFilter::do_apply(const Image &v) const {
  const auto axes = active_axes(v.shape());
  if (axes.empty() || window_ == 1) {
    return v;
  }
  const auto strides = strides_of(v.shape());
  const auto radius = static_cast<long long>(window_ / 2);
  std::size_t count = 1;
  for (std::size_t k = 0; k < axes.size(); ++k) {
    count *= window_;
  }
  Image out(v.shape());
  auto in = v.values();
  auto o = out.values();
  std::vector<double> buf(count);
  std::vector<long long> coord(v.ndim());
  for (std::size_t i = 0; i < in.size(); ++i) {
    for (std::size_t a = 0; a < v.ndim(); ++a) {
      coord[a] = static_cast<long long>((i / strides[a]) % v.shape()[a]);
    }
    for (std::size_t w = 0; w < count; ++w) {
      std::size_t rem = w;
      std::size_t src = i;
      for (auto a : axes) {
        const auto n = static_cast<long long>(v.shape()[a]);
        const long long off = static_cast<long long>(rem % window_) - radius;
        rem /= window_;
        const long long c = (((coord[a] + off) % n) + n) % n;
        src = src - static_cast<std::size_t>(coord[a]) * strides[a] +
              static_cast<std::size_t>(c) * strides[a];
      }
      buf[w] = in[src];
    }
    auto mid = buf.begin() + static_cast<std::ptrdiff_t>(count / 2);
    std::nth_element(buf.begin(), mid, buf.end());
    o[i] = *mid;
  }
  return out;
}

// Slicewise2D ---------------------------------------------------------------

Slicewise2D::Slicewise2D(std::size_t axis, AgentPtr inner)
    : Agent("slicewise2d(" + std::to_string(axis) + ")"), axis_(axis), inner_(std::move(inner)) {
  if (axis_ > 2) {
    throw ArgumentError("Slicewise2D: axis must be 0, 1 or 2");
  }
  if (!inner_) {
    throw ArgumentError("Slicewise2D: inner agent is null");
  }
}

namespace {

void require_volume(const Image &v) {
  if (v.ndim() != 3) {
    throw ArgumentError("Slicewise2D: expected a 3-D volume, got shape " + to_string(v.shape()));
  }
}

Shape slice_shape(const Shape &vol, std::size_t axis) {
  Shape s;
  for (std::size_t a = 0; a < 3; ++a) {
    if (a != axis) {
      s.push_back(vol[a]);
    }
  }
  return s;
}

} // namespace

namespace {

// Calls f(volume_offset, slice_offset) for every voxel of slice `index`.
template <typename F>
void for_each_in_slice(const Shape &n, std::size_t axis, std::size_t index, F f) {
  if (axis > 2 || index >= n[axis]) {
    throw ArgumentError("Slicewise2D: slice " + std::to_string(index) + " along axis " +
                        std::to_string(axis) + " is out of range for " + to_string(n));
  }
  const std::size_t stride[3] = {n[1] * n[2], n[2], 1};
  std::size_t other[2];
  for (std::size_t a = 0, k = 0; a < 3; ++a) {
    if (a != axis) {
      other[k++] = a;
    }
  }
  std::size_t k = 0;
  for (std::size_t i = 0; i < n[other[0]]; ++i) {
    for (std::size_t j = 0; j < n[other[1]]; ++j) {
      f(index * stride[axis] + i * stride[other[0]] + j * stride[other[1]], k++);
    }
  }
}

} // namespace

Image Slicewise2D::extract_slice(const Image &volume, std::size_t axis, std::size_t index) {
  require_volume(volume);
  Image slice(slice_shape(volume.shape(), axis));
  auto s = slice.values();
  auto vol = volume.values();
  for_each_in_slice(volume.shape(), axis, index,
                    [&](std::size_t vi, std::size_t si) { s[si] = vol[vi]; });
  return slice;
}

void Slicewise2D::insert_slice(Image &volume, std::size_t axis, std::size_t index,
                               const Image &slice) {
  require_volume(volume);
  require_same_shape("Slicewise2D::insert_slice", slice.shape(),
                     slice_shape(volume.shape(), axis));
  auto s = slice.values();
  auto vol = volume.values();
  for_each_in_slice(volume.shape(), axis, index,
                    [&](std::size_t vi, std::size_t si) { vol[vi] = s[si]; });
}

Image Slicewise2D::do_apply(const Image &v) const {
  require_volume(v);
  Image out(v.shape());
  for (std::size_t t = 0; t < v.shape()[axis_]; ++t) {
    insert_slice(out, axis_, t, inner_->apply(extract_slice(v, axis_, t)));
  }
  return out;
}

// FidelityProx --------------------------------------------------------------

FidelityProx::FidelityProx(std::shared_ptr<const DataFidelity> g, double gamma, ProxMethod method)
    : Agent("fidelity_prox"), g_(std::move(g)), gamma_(gamma), method_(method) {
  if (!g_) {
    throw ArgumentError("FidelityProx: data term is null");
  }
  if (!(gamma_ > 0.0)) {
    throw ArgumentError("FidelityProx: gamma must be positive");
  }
  if (std::holds_alternative<PartialProx>(method_)) {
    throw ArgumentError("FidelityProx: partial updates carry state and cannot back an agent");
  }
}

Image FidelityProx::do_apply(const Image &v) const { return g_->prox(v, gamma_, method_); }

// Free functions ------------------------------------------------------------

Image residual(const Agent &agent, const Image &v) { return v - agent.apply(v); }

double lipschitz_ratio(const Agent &agent, const Image &a, const Image &b) {
  const double denom = distance(a, b);
  if (denom == 0.0) {
    throw ArgumentError("lipschitz_ratio: probe points coincide");
  }
  return distance(agent.apply(a), agent.apply(b)) / denom;
}

double nonexpansiveness_estimate(const Agent &agent, SeededRng &rng, const Shape &shape,
                                 int n_pairs, double perturb_scale) {
  if (n_pairs < 1) {
    throw ArgumentError("nonexpansiveness_estimate: n_pairs must be >= 1");
  }
  if (!(perturb_scale > 0.0)) {
    throw ArgumentError("nonexpansiveness_estimate: perturb_scale must be positive");
  }
  double best = 0.0;
  for (int k = 0; k < n_pairs; ++k) {
    const Image a = gaussian_noise(rng, shape, 1.0);
    const Image b = a + gaussian_noise(rng, shape, perturb_scale);
    best = std::max(best, lipschitz_ratio(agent, a, b));
  }
  return best;
}

} // namespace pnp
