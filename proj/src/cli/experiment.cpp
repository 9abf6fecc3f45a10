#include "pnp/cli/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pnp/cg.hpp"
#include "pnp/cli/image_io.hpp"
#include "pnp/cli/phantom.hpp"
#include "pnp/diagnostics.hpp"
#include "pnp/linops.hpp"
#include "pnp/rng.hpp"

namespace pnp::cli {

namespace {

Image load_truth(const ExperimentConfig &cfg) {
  if (cfg.input.path) {
    return read_image(*cfg.input.path);
  }
  return phantom(cfg.input.phantom, cfg.input.shape, cfg.input.seed, cfg.input.sparsity);
}

Image observation_mask(const Shape &shape, double fraction, std::uint64_t seed) {
  Image mask(shape);
  const std::size_t n = mask.size();
  const auto keep = std::min(n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SeededRng rng(seed);
  rng.shuffle(order);
  for (std::size_t k = 0; k < keep; ++k) {
    mask[order[k]] = 1.0;
  }
  return mask;
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed ^ (0x5851f42d4c957f2dull * (stream + 1));
  return splitmix64(state);
}

std::string format_number(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void put_optional(std::string &out, const std::optional<double> &v) {
  out.push_back(',');
  if (v) {
    out += format_number(*v);
  }
}

nlohmann::json optional_json(const std::optional<double> &v) {
  if (!v) {
    return nullptr;
  }
  if (std::isinf(*v)) {
    return *v > 0 ? "inf" : "-inf";
  }
  return *v;
}

nlohmann::json certificate_json(const EquilibriumReport &r) {
  return {{"ce_residual_g", optional_json(r.ce_residual_g)},
          {"ce_residual_d", optional_json(r.ce_residual_d)},
          {"dual_identity_residual", optional_json(r.dual_identity_residual)},
          {"red_residual", optional_json(r.red_residual)},
          {"red_residual_relative", optional_json(r.red_residual_relative)},
          {"pnp_ista_residual", optional_json(r.pnp_ista_residual)}};
}

double resolve_gamma(const ExperimentConfig &cfg, const Problem &p) {
  if (cfg.solver.gamma) {
    return *cfg.solver.gamma;
  }
  const SolverKind k = cfg.solver.kind;
  if (is_admm_family(k) || k == SolverKind::Mace) {
    return 1.0;
  }
  if (k == SolverKind::RedSd || k == SolverKind::Simba) {
    return 1.0 / (p.blocks->lipschitz_estimate() + 2.0 * cfg.solver.tau);
  }
  return default_step_size(*p.blocks);
}

} // namespace

Problem build_problem(const ExperimentConfig &cfg) {
  const ProblemSpec &spec = cfg.problem;
  Problem p;
  p.truth = load_truth(cfg);
  const Shape &shape = p.truth.shape();

  std::vector<std::shared_ptr<const DenseMatrix>> row_blocks;
  switch (spec.kind) {
  case ProblemKind::Identity:
    p.op = std::make_shared<IdentityOperator>(shape);
    break;
  case ProblemKind::Superres:
    p.op = super_resolution_operator(shape, spec.rate, spec.blur_sigma);
    break;
  case ProblemKind::Deblur:
    p.op = std::make_shared<PeriodicConvolution>(gaussian_kernel(shape.size(), spec.kernel_sigma),
                                                 shape);
    break;
  case ProblemKind::CompressiveSensing: {
    const std::size_t n = p.truth.size();
    const auto m = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(spec.subsample_fraction * static_cast<double>(n))));
    if (spec.blocks > m) {
      throw ConfigError("problem.blocks", "more blocks than measurements");
    }
    auto full = random_projection(m, shape, spec.operator_seed);
    p.op = full;
    for (std::size_t b = 0; b < spec.blocks; ++b) {
      row_blocks.push_back(std::make_shared<DenseMatrix>(
          full->row_block(b * m / spec.blocks, (b + 1) * m / spec.blocks)));
    }
    break;
  }
  case ProblemKind::Inpaint:
    p.op = std::make_shared<DiagonalOperator>(
        observation_mask(shape, spec.mask_fraction, spec.operator_seed));
    break;
  case ProblemKind::VolumeFusion: {
    if (shape.size() != 3) {
      throw ConfigError("input", "volume_fusion needs a 3D volume, got " + pnp::to_string(shape));
    }
    std::vector<std::size_t> rates(3, 1);
    rates[spec.slice_axis] = spec.slice_rate;
    p.op = std::make_shared<Decimation>(shape, rates);
    break;
  }
  }

  SeededRng noise_rng(cfg.seed);
  p.measurements = p.op->apply(p.truth);
  p.measurements += gaussian_noise(noise_rng, p.measurements.shape(), spec.noise_sigma);
  p.fidelity = std::make_shared<DataFidelity>(p.op, p.measurements);

  if (row_blocks.size() > 1) {
    // Each block carries weight b so that (1/b) sum_i g_i equals g.
    std::vector<DataFidelity> blocks;
    const double weight = static_cast<double>(row_blocks.size());
    std::size_t offset = 0;
    const auto y = p.measurements.values();
    for (const auto &rows : row_blocks) {
      const std::size_t m = rows->rows();
      std::vector<double> part(y.begin() + static_cast<std::ptrdiff_t>(offset),
                               y.begin() + static_cast<std::ptrdiff_t>(offset + m));
      blocks.emplace_back(rows, Image(Shape{m}, std::move(part)), weight);
      offset += m;
    }
    p.blocks = std::make_shared<BlockFidelity>(std::move(blocks));
  } else {
    p.blocks = std::make_shared<BlockFidelity>(std::vector<DataFidelity>{*p.fidelity});
  }
  return p;
}

AgentPtr build_agent(const AgentSpec &spec) {
  if (spec.type == "identity") {
    return std::make_shared<IdentityAgent>();
  }
  if (spec.type == "scaled_identity") {
    return std::make_shared<ScaledIdentity>(spec.alpha);
  }
  if (spec.type == "soft_threshold") {
    return std::make_shared<SoftThreshold>(spec.threshold);
  }
  if (spec.type == "tv_prox") {
    return std::make_shared<TVProx>(spec.weight, spec.inner_iters);
  }
  if (spec.type == "gaussian_smooth") {
    return std::make_shared<GaussianSmooth>(spec.sigma);
  }
  if (spec.type == "median") {
    return std::make_shared<MedianFilter>(spec.window);
  }
  if (spec.type == "slicewise2d") {
    return std::make_shared<Slicewise2D>(spec.axis, build_agent(spec.inner.at(0)));
  }
  throw ArgumentError("unknown agent type '" + spec.type + "'");
}

std::vector<AgentPtr> build_prior_agents(const ExperimentConfig &cfg) {
  std::vector<AgentPtr> out;
  if (cfg.problem.kind == ProblemKind::VolumeFusion) {
    const AgentPtr inner = build_agent(cfg.agents.at(0));
    for (std::size_t axis : cfg.problem.axes) {
      out.push_back(std::make_shared<Slicewise2D>(axis, inner));
    }
    return out;
  }
  for (const auto &spec : cfg.agents) {
    out.push_back(build_agent(spec));
  }
  return out;
}

ProxMethod build_prox_method(const ProxSpec &spec, const DataFidelity &g) {
  if (spec.method == "closed_form") {
    return ClosedFormProx{};
  }
  if (spec.method == "cg") {
    return CgProx{CgOptions{spec.tol, spec.maxiter}};
  }
  if (spec.method == "partial") {
    return PartialProx{spec.steps};
  }
  return default_prox_method(g);
}

std::string trace_csv(const SolverTrace &trace) {
  std::string out = "iter,fp_residual,objective,psnr,ce_residual_g,ce_residual_d,red_residual,"
                    "pnp_ista_residual,consensus_residual,equilibrium_residual\n";
  for (const auto &r : trace.records) {
    out += std::to_string(r.iter);
    out.push_back(',');
    out += format_number(r.fp_residual);
    put_optional(out, r.objective);
    put_optional(out, r.psnr);
    put_optional(out, r.ce_residual_g);
    put_optional(out, r.ce_residual_d);
    put_optional(out, r.red_residual);
    put_optional(out, r.pnp_ista_residual);
    put_optional(out, r.consensus_residual);
    put_optional(out, r.equilibrium_residual);
    out.push_back('\n');
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig &cfg_in, const RunOptions &opts) {
  validate(cfg_in);
  const auto started = std::chrono::steady_clock::now();
  ExperimentConfig cfg = cfg_in;
  if (opts.output_dir) {
    cfg.output_dir = *opts.output_dir;
  }

  ExperimentResult res;
  const Problem problem = build_problem(cfg);
  const auto priors = build_prior_agents(cfg);
  const DataFidelity &g = *problem.fidelity;

  const SolverKind kind = cfg.solver.kind;
  if ((kind == SolverKind::Admm || kind == SolverKind::Fista) && !priors.front()->is_proximal()) {
    throw ConfigError("agents[0]", to_string(kind) + " needs a proximal agent, got " +
                                       priors.front()->label());
  }

  res.gamma = resolve_gamma(cfg, problem);
  cfg.solver.gamma = res.gamma;

  const Shape &shape = problem.truth.shape();
  const auto gram = [&](const Image &v) { return g.op().adjoint(g.op().apply(v)); };
  res.pseudo_inverse =
      cg_solve(gram, g.backprojection(), Image(shape), CgOptions{cfg.init.pinv_tol, cfg.init.pinv_maxiter})
          .x;
  res.baseline = cfg.init.denoise ? priors.front()->apply(res.pseudo_inverse) : res.pseudo_inverse;
  res.pinv_psnr = psnr(res.pseudo_inverse, problem.truth, cfg.psnr_peak);
  res.baseline_psnr = psnr(res.baseline, problem.truth, cfg.psnr_peak);

  SolverConfig sc;
  sc.gamma = res.gamma;
  sc.tau = cfg.solver.tau;
  sc.rho = cfg.solver.rho;
  if (cfg.solver.theta == "ista") {
    sc.theta = IstaTheta{};
  } else if (cfg.solver.theta == "constant") {
    sc.theta = ConstantTheta{*cfg.solver.theta_value};
  } else {
    sc.theta = NesterovTheta{};
  }
  sc.max_iters = cfg.solver.max_iters;
  sc.fp_tol = cfg.solver.fp_tol;
  sc.seed = cfg.seed;
  sc.minibatch = cfg.solver.minibatch;
  sc.x0 = res.baseline;
  sc.prox = build_prox_method(cfg.solver.prox, g);
  sc.record_equilibrium = cfg.solver.record_equilibrium;
  sc.reference = problem.truth;
  sc.psnr_peak = cfg.psnr_peak;

  if (opts.log) {
    *opts.log << "[" << cfg.name << "] " << to_string(kind) << " on " << to_string(cfg.problem.kind)
              << " " << pnp::to_string(shape) << ", gamma = " << res.gamma << "\n";
  }

  try {
    switch (kind) {
    case SolverKind::Admm:
    case SolverKind::PnpAdmm: {
      auto r = pnp_admm(g, *priors.front(), sc);
      res.reconstruction = std::move(r.x);
      res.trace = std::move(r.trace);
      res.certificate = r.certificate;
      break;
    }
    case SolverKind::Fista:
    case SolverKind::PnpFista:
    case SolverKind::PnpIsta:
    case SolverKind::RedSd: {
      const SmoothFidelity &smooth = *problem.blocks;
      auto r = kind == SolverKind::PnpIsta ? pnp_ista(smooth, *priors.front(), sc)
               : kind == SolverKind::RedSd ? red_sd(smooth, *priors.front(), sc)
                                           : pnp_fista(smooth, *priors.front(), sc);
      res.reconstruction = std::move(r.x);
      res.trace = std::move(r.trace);
      res.certificate = r.certificate;
      break;
    }
    case SolverKind::OnlinePnp:
    case SolverKind::Simba: {
      BlockSampler sampler(derived_seed(cfg.seed, 1), problem.blocks->block_count(),
                           cfg.solver.sampling == "epoch" ? SamplingRule::EpochShuffle
                                                          : SamplingRule::IidUniform);
      auto r = kind == SolverKind::OnlinePnp ? online_pnp(*problem.blocks, *priors.front(), sampler, sc)
                                             : simba(*problem.blocks, *priors.front(), sampler, sc);
      res.reconstruction = std::move(r.x);
      res.trace = std::move(r.trace);
      res.certificate = r.certificate;
      break;
    }
    case SolverKind::Mace: {
      ProxMethod prox = *sc.prox;
      if (std::holds_alternative<PartialProx>(prox)) {
        throw ConfigError("solver.prox.method", "mace needs a stateless prox");
      }
      std::vector<AgentPtr> agents;
      agents.push_back(std::make_shared<FidelityProx>(problem.fidelity, res.gamma, prox));
      agents.insert(agents.end(), priors.begin(), priors.end());
      const AgentStack stack = cfg.weights.empty() ? AgentStack(std::move(agents))
                                                   : AgentStack(std::move(agents), cfg.weights);
      auto r = mace_solve(stack, res.baseline, sc);
      res.reconstruction = std::move(r.x);
      res.trace = std::move(r.trace);
      res.mace_residuals = r.residuals;
      break;
    }
    }
  } catch (const ConfigError &) {
    throw;
  } catch (const std::exception &e) {
    res.ok = false;
    res.error = e.what();
  }

  if (res.ok) {
    res.psnr = psnr(res.reconstruction, problem.truth, cfg.psnr_peak);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  nlohmann::json metrics{{"psnr", res.ok ? optional_json(res.psnr) : nlohmann::json(nullptr)},
                         {"baseline_psnr", optional_json(res.baseline_psnr)},
                         {"pinv_psnr", optional_json(res.pinv_psnr)},
                         {"iterations", res.trace.iterations()},
                         {"stop_reason", to_string(res.trace.stop_reason)},
                         {"final_fp_residual", res.trace.records.empty()
                                                   ? nlohmann::json(nullptr)
                                                   : nlohmann::json(res.trace.records.back().fp_residual)},
                         {"equilibrium", certificate_json(res.certificate)},
                         {"wall_time_s", wall}};
  if (res.mace_residuals) {
    metrics["equilibrium"]["consensus_residual"] = res.mace_residuals->consensus;
    metrics["equilibrium"]["equilibrium_residual"] = res.mace_residuals->equilibrium;
  }
  nlohmann::json outputs{{"trace", "trace.csv"}, {"baseline", "baseline.rawf64"}};
  if (res.ok) {
    outputs["reconstruction"] = "recon.rawf64";
  }
  const bool pgm = cfg.write_pgm && shape.size() == 2;
  if (pgm) {
    outputs["baseline_pgm"] = "baseline.pgm";
    if (res.ok) {
      outputs["reconstruction_pgm"] = "recon.pgm";
    }
  }
  res.manifest = {{"manifest_version", kManifestVersion},
                  {"library_version", kLibraryVersion},
                  {"status", res.ok ? "ok" : "failed"},
                  {"seed", cfg.seed},
                  {"config", to_json(cfg)},
                  {"trace_file", "trace.csv"},
                  {"outputs", outputs},
                  {"metrics", metrics}};
  if (!res.ok) {
    res.manifest["failure"] = {{"message", res.error}, {"iterations_completed", res.trace.iterations()}};
  }

  if (opts.write_outputs) {
    const auto &dir = cfg.output_dir;
    std::filesystem::create_directories(dir);
    write_rawf64(dir / "baseline.rawf64", res.baseline);
    if (res.ok) {
      write_rawf64(dir / "recon.rawf64", res.reconstruction);
    }
    if (pgm) {
      write_pgm(dir / "baseline.pgm", res.baseline);
      if (res.ok) {
        write_pgm(dir / "recon.pgm", res.reconstruction);
      }
    }
    {
      std::ofstream out(dir / "trace.csv", std::ios::binary | std::ios::trunc);
      out << trace_csv(res.trace);
    }
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    out << res.manifest.dump(2) << "\n";
    if (!out) {
      throw Error("cannot write " + (dir / "manifest.json").string());
    }
  }

  if (opts.log) {
    if (res.ok) {
      *opts.log << "[" << cfg.name << "] " << res.trace.iterations() << " iterations ("
                << to_string(res.trace.stop_reason) << "), PSNR " << res.psnr << " dB vs baseline "
                << res.baseline_psnr << " dB, " << wall << " s\n";
    } else {
      *opts.log << "[" << cfg.name << "] failed: " << res.error << "\n";
    }
  }
  return res;
}

} // namespace pnp::cli
