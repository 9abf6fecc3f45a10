#include "pnp/cli/demos.hpp"

namespace pnp::cli {

namespace {

AgentSpec tv_agent(double weight) {
  AgentSpec a;
  a.type = "tv_prox";
  a.weight = weight;
  a.inner_iters = 30;
  return a;
}

AgentSpec smooth_agent(double sigma) {
  AgentSpec a;
  a.type = "gaussian_smooth";
  a.sigma = sigma;
  return a;
}

ProxSpec cg_prox(double tol, int maxiter) {
  ProxSpec p;
  p.method = "cg";
  p.tol = tol;
  p.maxiter = maxiter;
  return p;
}

// Blur-decimate-noise pipeline with the penalty, CG settings and outer
// iteration count of SCICO's PnP superresolution example. Its penalty rho
// enters as gamma = 1 / rho.
ExperimentConfig superres(std::size_t rate) {
  ExperimentConfig c;
  c.name = "superres" + std::to_string(rate) + "x";
  c.input.shape = {256, 256};
  c.problem.kind = ProblemKind::Superres;
  c.problem.rate = rate;
  c.problem.blur_sigma = 1.0;
  c.problem.noise_sigma = 2e-2;
  c.agents = {tv_agent(0.05)};
  c.solver.kind = SolverKind::PnpAdmm;
  c.solver.gamma = 1.0 / 3.4e-2;
  c.solver.max_iters = 12;
  c.solver.prox = cg_prox(1e-3, 10);
  return c;
}

ExperimentConfig cs20() {
  ExperimentConfig c;
  c.name = "cs20";
  c.input.shape = {64, 64};
  c.problem.kind = ProblemKind::CompressiveSensing;
  c.problem.subsample_fraction = 0.2;
  c.problem.noise_sigma = 1e-2;
  c.agents = {tv_agent(0.02)};
  c.solver.kind = SolverKind::PnpFista;
  c.solver.max_iters = 500;
  c.solver.fp_tol = 1e-6;
  return c;
}

ExperimentConfig deblur() {
  ExperimentConfig c;
  c.name = "deblur";
  c.input.shape = {64, 64};
  c.problem.kind = ProblemKind::Deblur;
  c.problem.kernel_sigma = 1.0;
  c.problem.noise_sigma = 1e-2;
  c.agents = {tv_agent(0.02)};
  c.solver.kind = SolverKind::PnpAdmm;
  c.solver.gamma = 1.0;
  c.solver.max_iters = 2000;
  c.solver.fp_tol = 1e-6;
  c.solver.prox = cg_prox(1e-10, 200);
  return c;
}

ExperimentConfig fusion3d() {
  ExperimentConfig c;
  c.name = "fusion3d";
  c.input.shape = {32, 32, 32};
  c.problem.kind = ProblemKind::VolumeFusion;
  c.problem.axes = {0, 1};
  c.problem.slice_axis = 0;
  c.problem.slice_rate = 2;
  c.problem.noise_sigma = 5e-2;
  c.agents = {smooth_agent(0.5)};
  c.solver.kind = SolverKind::Mace;
  c.solver.gamma = 3.0;
  c.solver.rho = 0.5;
  c.solver.max_iters = 3000;
  c.solver.fp_tol = 1e-8;
  c.write_pgm = false;
  return c;
}

} // namespace

std::vector<std::string> demo_names() {
  return {"superres2x", "superres4x", "cs20", "deblur", "fusion3d"};
}

ExperimentConfig demo_config(const std::string &name) {
  ExperimentConfig c;
  if (name == "superres2x") {
    c = superres(2);
  } else if (name == "superres4x") {
    c = superres(4);
  } else if (name == "cs20") {
    c = cs20();
  } else if (name == "deblur") {
    c = deblur();
  } else if (name == "fusion3d") {
    c = fusion3d();
  } else {
    throw ArgumentError("unknown demo '" + name + "'");
  }
  c.output_dir = "out/" + name;
  validate(c);
  return c;
}

} // namespace pnp::cli
