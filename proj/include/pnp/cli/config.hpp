#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pnp/cli/phantom.hpp"
#include "pnp/error.hpp"

namespace pnp::cli {

using json = nlohmann::json;

/// Invalid configuration. path() names the offending field, e.g.
/// "solver.prox.tol".
class ConfigError : public ArgumentError {
public:
  ConfigError(std::string path, const std::string &message);
  const std::string &path() const { return path_; }

private:
  std::string path_;
};

struct InputSpec {
  /// Image file (PGM or RAWF64). When unset a phantom is generated.
  std::optional<std::filesystem::path> path;
  PhantomKind phantom = PhantomKind::PiecewiseConstantBlocks;
  Shape shape{64, 64};
  std::uint64_t seed = 7;
  double sparsity = 0.05;
};

enum class ProblemKind { Identity, Superres, Deblur, CompressiveSensing, Inpaint, VolumeFusion };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Deblur;
  double noise_sigma = 0.0;
  // superres
  std::size_t rate = 2;
  double blur_sigma = 1.0;
  // deblur: Gaussian kernel width
  double kernel_sigma = 1.0;
  // compressive_sensing
  double subsample_fraction = 0.2;
  /// Measurement blocks for online_pnp / simba (compressive_sensing only).
  std::size_t blocks = 1;
  // inpaint: fraction of pixels observed
  double mask_fraction = 0.5;
  /// Seed of the projection matrix or inpainting mask.
  std::uint64_t operator_seed = 1;
  // volume_fusion: every slice_rate-th slice along slice_axis is measured,
  // and one slicewise copy of the agent runs per entry of axes.
  std::vector<std::size_t> axes{0, 1};
  std::size_t slice_axis = 0;
  std::size_t slice_rate = 2;
};

/// Agent description. Fields not used by `type` are ignored on input and
/// omitted on output.
struct AgentSpec {
  std::string type = "identity";
  double alpha = 1.0;     // scaled_identity
  double threshold = 0.0; // soft_threshold
  double weight = 0.05;   // tv_prox
  int inner_iters = 30;   // tv_prox
  double sigma = 1.0;     // gaussian_smooth
  std::size_t window = 3; // median
  std::size_t axis = 0;   // slicewise2d
  std::vector<AgentSpec> inner; // slicewise2d: exactly one
};

enum class SolverKind { Admm, Fista, PnpAdmm, PnpFista, PnpIsta, RedSd, OnlinePnp, Simba, Mace };

struct ProxSpec {
  /// auto | closed_form | cg | partial
  std::string method = "auto";
  double tol = 1e-3;
  int maxiter = 10;
  int steps = 3;
};

struct SolverSpec {
  SolverKind kind = SolverKind::PnpAdmm;
  /// Unset: 1 for the ADMM family and MACE, 0.9 / L for gradient methods.
  std::optional<double> gamma;
  double tau = 0.1;
  double rho = 0.5;
  /// "nesterov", "ista" or a constant in (0, 1].
  std::string theta = "nesterov";
  std::optional<double> theta_value;
  int max_iters = 100;
  double fp_tol = 1e-6;
  std::size_t minibatch = 1;
  /// "iid" or "epoch".
  std::string sampling = "iid";
  ProxSpec prox;
  bool record_equilibrium = false;
};

struct InitSpec {
  double pinv_tol = 1e-5;
  int pinv_maxiter = 1000;
  /// Apply the (first) prior agent to the pseudo-inverse.
  bool denoise = true;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  InputSpec input;
  ProblemSpec problem;
  /// Prior agents. Single-agent solvers need exactly one; MACE stacks the
  /// data-term prox with all of them (with volume_fusion, with one slicewise
  /// copy of agents[0] per axis).
  std::vector<AgentSpec> agents{AgentSpec{}};
  /// Optional MACE weights, fidelity agent first.
  std::vector<double> weights;
  SolverSpec solver;
  InitSpec init;
  double psnr_peak = 1.0;
  std::filesystem::path output_dir = "out";
  bool write_pgm = true;
};

/// Relative input paths are resolved against `base_dir`.
ExperimentConfig parse_config(const json &j, const std::filesystem::path &base_dir = {});
ExperimentConfig load_config(const std::filesystem::path &file);
/// Every field, defaults included.
json to_json(const ExperimentConfig &cfg);

/// Cross-field checks (rate, fractions, agent counts, file existence).
void validate(const ExperimentConfig &cfg);

std::string to_string(ProblemKind kind);
std::string to_string(SolverKind kind);
bool is_admm_family(SolverKind kind);

} // namespace pnp::cli
