#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pnp/agents.hpp"
#include "pnp/cli/config.hpp"
#include "pnp/fidelity.hpp"
#include "pnp/mace.hpp"
#include "pnp/solvers.hpp"

namespace pnp::cli {

inline constexpr const char *kLibraryVersion = "0.1.0";
inline constexpr int kManifestVersion = 1;

/// Simulated measurements y = A x_true + sigma * noise, with noise drawn from
/// SeededRng(config seed).
struct Problem {
  Image truth;
  OperatorPtr op;
  Image measurements;
  std::shared_ptr<const DataFidelity> fidelity;
  /// Row blocks of the data term (one block unless problem.blocks > 1).
  std::shared_ptr<const BlockFidelity> blocks;
};

Problem build_problem(const ExperimentConfig &cfg);

AgentPtr build_agent(const AgentSpec &spec);
/// The prior agents of an experiment (slicewise copies for volume_fusion).
std::vector<AgentPtr> build_prior_agents(const ExperimentConfig &cfg);

ProxMethod build_prox_method(const ProxSpec &spec, const DataFidelity &g);

struct ExperimentResult {
  bool ok = true;
  std::string error;
  Image reconstruction;
  /// Prior agent applied to the CG pseudo-inverse (the solver's x0).
  Image baseline;
  Image pseudo_inverse;
  SolverTrace trace;
  EquilibriumReport certificate;
  std::optional<MaceResiduals> mace_residuals;
  double gamma = 0.0;
  double psnr = 0.0;
  double baseline_psnr = 0.0;
  double pinv_psnr = 0.0;
  nlohmann::json manifest;
};

struct RunOptions {
  /// Where outputs go; the config's output_dir when unset.
  std::optional<std::filesystem::path> output_dir;
  /// Write files. Tests may switch this off.
  bool write_outputs = true;
  /// Progress messages; nothing is printed when null.
  std::ostream *log = nullptr;
};

/// Forward-simulates, initializes from the denoised CG pseudo-inverse, solves,
/// and writes recon.rawf64 (+ recon.pgm for 2D), baseline.rawf64, trace.csv
/// and manifest.json. Solver failures are recorded in the manifest
/// (status "failed") instead of being thrown; configuration errors throw.
ExperimentResult run_experiment(const ExperimentConfig &cfg, const RunOptions &opts = {});

/// CSV with header iter,fp_residual,objective,psnr,ce_residual_g,
/// ce_residual_d,red_residual,pnp_ista_residual,consensus_residual,
/// equilibrium_residual; missing values are empty fields.
std::string trace_csv(const SolverTrace &trace);

} // namespace pnp::cli
