#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pnp/fidelity.hpp"
#include "pnp/image.hpp"
#include "pnp/rng.hpp"

namespace pnp {

/// A map D: R^n -> R^n that "improves" an image: a denoiser, a smoother or a
/// true proximal map. Agents are immutable and safe for concurrent apply.
class Agent {
public:
  explicit Agent(std::string label, std::optional<double> noise_level = std::nullopt);
  virtual ~Agent() = default;

  /// Output has the input's shape and is checked for finiteness.
  Image apply(const Image &v) const;

  const std::string &label() const { return label_; }
  /// Metadata only; used by callers to pair agents with step sizes.
  std::optional<double> noise_level() const { return noise_level_; }

  /// True when apply() is prox_f for a closed convex f.
  virtual bool is_proximal() const { return false; }
  /// f(x) for proximal agents where it is cheap to evaluate.
  virtual std::optional<double> penalty(const Image & /*x*/) const { return std::nullopt; }

protected:
  virtual Image do_apply(const Image &v) const = 0;

private:
  std::string label_;
  std::optional<double> noise_level_;
};

using AgentPtr = std::shared_ptr<const Agent>;

class IdentityAgent final : public Agent {
public:
  IdentityAgent() : Agent("identity") {}
  bool is_proximal() const override { return true; }
  std::optional<double> penalty(const Image &) const override { return 0.0; }

protected:
  Image do_apply(const Image &v) const override { return v; }
};

/// v -> alpha v.
class ScaledIdentity final : public Agent {
public:
  explicit ScaledIdentity(double alpha);
  double alpha() const { return alpha_; }

protected:
  Image do_apply(const Image &v) const override;

private:
  double alpha_;
};

/// prox of (strength/2) ||x - reference||^2, i.e. (v + s*ref) / (1 + s).
class ProxL2 final : public Agent {
public:
  ProxL2(Image reference, double strength);
  bool is_proximal() const override { return true; }
  std::optional<double> penalty(const Image &x) const override;

protected:
  Image do_apply(const Image &v) const override;

private:
  Image reference_;
  double strength_;
};

/// prox of threshold * ||x||_1: sign(v) max(|v| - threshold, 0).
class SoftThreshold final : public Agent {
public:
  explicit SoftThreshold(double threshold);
  double threshold() const { return threshold_; }
  bool is_proximal() const override { return true; }
  std::optional<double> penalty(const Image &x) const override;

protected:
  Image do_apply(const Image &v) const override;

private:
  double threshold_;
};

/// Anisotropic total-variation proximal map
///   argmin_x 1/2 ||x - v||^2 + weight * sum_axes sum |forward difference|
/// with Neumann boundaries (no difference across the last sample), solved by
/// projected gradient on the dual with step 1/(4 * active axes) for a fixed
/// number of iterations from a zero dual. Axes of extent 1 are ignored.
class TVProx final : public Agent {
public:
  explicit TVProx(double weight, int inner_iters = 50);
  double weight() const { return weight_; }
  int inner_iters() const { return inner_iters_; }
  bool is_proximal() const override { return true; }
  std::optional<double> penalty(const Image &x) const override;

protected:
  Image do_apply(const Image &v) const override;

private:
  double weight_;
  int inner_iters_;
};

/// Anisotropic total variation sum_axes sum |forward difference|.
double total_variation(const Image &x);

/// Separable periodic Gaussian smoothing along every axis of extent > 1.
class GaussianSmooth final : public Agent {
public:
  explicit GaussianSmooth(double sigma);
  double sigma() const { return sigma_; }
  /// Normalized 1-D taps, radius ceil(3 sigma).
  const std::vector<double> &taps() const { return taps_; }

protected:
  Image do_apply(const Image &v) const override;

private:
  double sigma_;
  std::vector<double> taps_;
};

/// Median over a periodic window of odd width along every axis of extent > 1.
class MedianFilter final : public Agent {
public:
  explicit MedianFilter(std::size_t window);
  std::size_t window() const { return window_; }

protected:
  Image do_apply(const Image &v) const override;

private:
  std::size_t window_;
};

/// Applies a 2-D agent to every slice of a 3-D volume orthogonal to `axis`.
/// Slice shape is the volume shape with `axis` removed, axes kept in order.
class Slicewise2D final : public Agent {
public:
  Slicewise2D(std::size_t axis, AgentPtr inner);
  std::size_t axis() const { return axis_; }

  static Image extract_slice(const Image &volume, std::size_t axis, std::size_t index);
  static void insert_slice(Image &volume, std::size_t axis, std::size_t index,
                           const Image &slice);

protected:
  Image do_apply(const Image &v) const override;

private:
  std::size_t axis_;
  AgentPtr inner_;
};

/// prox_{gamma g} of a least-squares data term, as an agent. Only the
/// stateless prox methods (closed form, CG) are accepted.
class FidelityProx final : public Agent {
public:
  FidelityProx(std::shared_ptr<const DataFidelity> g, double gamma, ProxMethod method);
  bool is_proximal() const override { return true; }

protected:
  Image do_apply(const Image &v) const override;

private:
  std::shared_ptr<const DataFidelity> g_;
  double gamma_;
  ProxMethod method_;
};

/// v - D(v).
Image residual(const Agent &agent, const Image &v);

/// ||D(a) - D(b)|| / ||a - b||.
double lipschitz_ratio(const Agent &agent, const Image &a, const Image &b);

/// Largest lipschitz_ratio over n_pairs random pairs a ~ N(0, I),
/// b = a + perturb_scale * N(0, I). A lower bound on the Lipschitz constant.
double nonexpansiveness_estimate(const Agent &agent, SeededRng &rng, const Shape &shape,
                                 int n_pairs, double perturb_scale);

} // namespace pnp
