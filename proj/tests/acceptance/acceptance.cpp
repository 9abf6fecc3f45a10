// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "pnp/cli/demos.hpp"
#include "pnp/cli/experiment.hpp"
#include "pnp/mace.hpp"
#include "pnp/solvers.hpp"
#include "support.hpp"

namespace {

using namespace pnp;
using namespace pnp::cli;
using pnp::testing::random_image;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path &file) {
  std::ifstream in(file, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunOptions in_memory() {
  RunOptions o;
  o.write_outputs = false;
  return o;
}

// 1 -------------------------------------------------------------------------------

void oracle_equivalence(Outcome &out) {
  const auto inst = pnp::testing::lasso_instance();
  const auto t0 = Clock::now();
  SolverConfig cfg;
  cfg.gamma = 1.0;
  cfg.max_iters = 20000;
  cfg.fp_tol = 1e-12;
  cfg.prox = CgProx{{1e-14, 100}};
  const SoftThreshold d(cfg.gamma * inst.tau);
  const auto a = admm(*inst.g, d, cfg);
  const auto p = pnp_admm(*inst.g, d, cfg);
  const double elapsed = seconds_since(t0);

  Image oracle(Shape{16});
  const auto ov = pnp::testing::lasso_oracle(inst, 1e-10);
  std::copy(ov.begin(), ov.end(), oracle.values().begin());
  const double f_star = lasso_objective(inst, oracle);
  const double gap_a = lasso_objective(inst, a.x) - f_star;
  const double gap_p = lasso_objective(inst, p.x) - f_star;

  out.check(a.trace.same_trajectory(p.trace) && a.x == p.x, "traces not bitwise identical");
  out.check(std::abs(gap_a) <= 1e-6 && std::abs(gap_p) <= 1e-6, "objective gap");
  out.check(elapsed < 1.0, "runtime");
  out.detail << "iters=" << a.trace.iterations() << " gap=" << gap_a << " time=" << elapsed << "s";
}

// 2 -------------------------------------------------------------------------------

void fixed_point_certificates(Outcome &out) {
  const auto t0 = Clock::now();
  for (SolverKind kind :
       {SolverKind::PnpAdmm, SolverKind::PnpIsta, SolverKind::PnpFista, SolverKind::RedSd}) {
    auto cfg = demo_config("deblur");
    cfg.solver.kind = kind;
    if (kind == SolverKind::RedSd) {
      cfg.solver.tau = 0.5;
    }
    if (kind != SolverKind::PnpAdmm) {
      cfg.solver.gamma.reset();
    }
    const auto res = run_experiment(cfg, in_memory());
    const auto &c = res.certificate;
    double r = 0.0;
    if (kind == SolverKind::PnpAdmm) {
      r = std::max(c.ce_residual_g.value_or(INFINITY), c.ce_residual_d.value_or(INFINITY));
    } else if (kind == SolverKind::RedSd) {
      r = c.red_residual_relative.value_or(INFINITY);
    } else {
      r = c.pnp_ista_residual.value_or(INFINITY);
    }
    out.check(res.ok && r <= 1e-5, to_string(kind));
    out.detail << to_string(kind) << "=" << r << "(" << res.trace.iterations() << " it) ";
  }
  const double elapsed = seconds_since(t0);
  out.check(elapsed < 30.0, "runtime");
  out.detail << "time=" << elapsed << "s";
}

// 3 -------------------------------------------------------------------------------

void mace_equals_pnp(Outcome &out) {
  const auto inst = pnp::testing::lasso_instance();
  const ProxMethod prox = CgProx{{1e-14, 100}};
  SolverConfig cfg;
  cfg.gamma = 1.0;
  cfg.max_iters = 20000;
  cfg.fp_tol = 1e-12;
  cfg.prox = prox;
  auto d = std::make_shared<SoftThreshold>(cfg.gamma * inst.tau);
  const auto pnp = pnp_admm(*inst.g, *d, cfg);
  const AgentStack stack({std::make_shared<FidelityProx>(inst.g, cfg.gamma, prox), d});
  const auto mace = mace_solve(stack, inst.g->backprojection(), cfg);
  const double dist = distance(mace.x, pnp.x);
  out.check(dist <= 1e-6, "distance");
  out.detail << "l2=" << dist << " mace_iters=" << mace.trace.iterations();
}

// 4 -------------------------------------------------------------------------------

void averaging_algebra(Outcome &out) {
  SeededRng rng(404);
  double worst_idem = 0.0;
  double worst_inv = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Image> comps;
    for (int j = 0; j < 3; ++j) {
      comps.push_back(random_image(rng, {5, 6}));
    }
    const StackedImage v(comps);
    const StackedImage g = averaging_G(v);
    const StackedImage gg = averaging_G(g);
    const StackedImage rr = reflect_G(reflect_G(v));
    for (std::size_t j = 0; j < 3; ++j) {
      worst_idem = std::max(worst_idem, pnp::testing::max_abs_diff(gg[j], g[j]));
      worst_inv = std::max(worst_inv, pnp::testing::max_abs_diff(rr[j], v[j]));
    }
  }
  out.check(worst_idem <= 1e-12, "G^2 = G");
  out.check(worst_inv <= 1e-12, "(2G-I)^2 = I");
  out.detail << "max|G^2v-Gv|=" << worst_idem << " max|R^2v-v|=" << worst_inv;
}

// 5 -------------------------------------------------------------------------------

void adjoint_suite(Outcome &out) {
  std::vector<std::pair<std::string, OperatorPtr>> ops{
      {"diagonal", std::make_shared<DiagonalOperator>([] {
         SeededRng r(1);
         return random_image(r, {6, 7});
       }())},
      {"conv2d", std::make_shared<PeriodicConvolution>(gaussian_kernel(2, 1.3), Shape{9, 11})},
      {"conv3d", std::make_shared<PeriodicConvolution>(gaussian_kernel(3, 0.8), Shape{5, 6, 7})},
      {"decimation", std::make_shared<Decimation>(Shape{7, 9}, std::vector<std::size_t>{2, 3})},
      {"composition", super_resolution_operator({12, 12}, 3, 1.0)},
      {"dense", random_projection(9, Shape{4, 5}, 17)},
  };
  SeededRng rng(505);
  double worst = 0.0;
  for (const auto &[name, op] : ops) {
    for (int probe = 0; probe < 10; ++probe) {
      const Image x = random_image(rng, op->input_shape());
      const Image y = random_image(rng, op->output_shape());
      const double lhs = dot(op->apply(x), y);
      const double rhs = dot(x, op->adjoint(y));
      const double rel = std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
      worst = std::max(worst, rel);
      if (rel > 1e-10) {
        out.check(false, name);
      }
    }
  }
  out.detail << "operators=" << ops.size() << " worst_rel=" << worst;
}

// 6 -------------------------------------------------------------------------------

struct Blocks {
  std::vector<DataFidelity> parts;
  std::shared_ptr<BlockFidelity> bf;
};

Blocks make_blocks(std::size_t b, std::size_t rows, std::uint64_t seed) {
  Blocks out;
  const std::size_t n = 12;
  const auto full = random_projection(b * rows, Shape{n}, seed);
  Image truth(Shape{n});
  truth[2] = 1.0;
  truth[7] = -0.5;
  SeededRng rng(seed + 1);
  for (std::size_t i = 0; i < b; ++i) {
    auto op = std::make_shared<DenseMatrix>(full->row_block(i * rows, (i + 1) * rows));
    Image y = op->apply(truth);
    y += gaussian_noise(rng, y.shape(), 0.01);
    out.parts.emplace_back(op, y, double(b));
  }
  out.bf = std::make_shared<BlockFidelity>(out.parts);
  return out;
}

void online_consistency(Outcome &out) {
  {
    const auto p = make_blocks(1, 8, 7);
    SolverConfig cfg;
    cfg.gamma = 0.9 / p.bf->lipschitz_estimate();
    cfg.max_iters = 200;
    cfg.fp_tol = 1e-10;
    const SoftThreshold st(0.01);
    BlockSampler s1(3, 1, SamplingRule::IidUniform);
    const auto on = online_pnp(*p.bf, st, s1, cfg);
    const auto batch = pnp_ista(*p.bf, st, cfg);
    out.check(on.trace.same_trajectory(batch.trace) && on.x == batch.x, "online_pnp b=1");

    cfg.gamma = 0.5 / p.bf->lipschitz_estimate();
    cfg.tau = 0.3;
    const TVProx tv(0.05, 20);
    BlockSampler s2(3, 1, SamplingRule::IidUniform);
    const auto sim = simba(*p.bf, tv, s2, cfg);
    const auto red = red_sd(*p.bf, tv, cfg);
    out.check(sim.trace.same_trajectory(red.trace) && sim.x == red.x, "simba b=1");
  }

  const auto p = make_blocks(4, 3, 9);
  SeededRng rng(606);
  double worst_full = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Image x = random_image(rng, {12});
    const Image batch = p.bf->gradient(x);
    const Image mb = p.bf->minibatch_gradient({3, 1, 0, 2}, x);
    worst_full = std::max(worst_full, distance(mb, batch) / std::max(norm(batch), 1e-300));
  }
  out.check(worst_full <= 1e-12, "p = b minibatch");

  const Image x = random_image(rng, {12});
  const Image batch = p.bf->gradient(x);
  std::vector<Image> per_block;
  for (std::size_t i = 0; i < 4; ++i) {
    per_block.push_back(p.bf->block_gradient(i, x));
  }
  BlockSampler sampler(607, 4, SamplingRule::IidUniform);
  const int draws = 100000;
  std::vector<double> sum(12, 0.0);
  std::vector<double> sum2(12, 0.0);
  for (int d = 0; d < draws; ++d) {
    const Image &gi = per_block[sampler.next()];
    for (std::size_t k = 0; k < 12; ++k) {
      sum[k] += gi[k];
      sum2[k] += gi[k] * gi[k];
    }
  }
  // One standardized statistic for the whole vector: ||mean - grad|| over the
  // standard error sqrt(tr Cov / N). Per-component z-scores are reported too.
  double worst_z = 0.0;
  double err2 = 0.0;
  double trace_cov = 0.0;
  for (std::size_t k = 0; k < 12; ++k) {
    const double mean = sum[k] / draws;
    const double var = std::max(sum2[k] / draws - mean * mean, 0.0);
    const double z = std::abs(mean - batch[k]) / std::max(std::sqrt(var / draws), 1e-300);
    worst_z = std::max(worst_z, z);
    err2 += (mean - batch[k]) * (mean - batch[k]);
    trace_cov += var / draws;
  }
  const double joint_z = std::sqrt(err2 / std::max(trace_cov, 1e-300));
  out.check(joint_z <= 3.0, "Monte Carlo unbiasedness");

  auto variance = [&](std::size_t count) {
    BlockSampler s(608, 4, SamplingRule::IidUniform);
    const int n = 20000;
    double acc = 0.0;
    for (int d = 0; d < n; ++d) {
      acc += squared_norm(p.bf->minibatch_gradient(s.draw(count), x) - batch);
    }
    return acc / n;
  };
  const double ratio = variance(4) / variance(1);
  out.check(ratio <= 0.35, "variance ratio");
  out.detail << "full_rel=" << worst_full << " joint_z=" << joint_z << " max_component_z=" << worst_z << " var4/var1=" << ratio;
}

// 7 -------------------------------------------------------------------------------

void linear_rate(Outcome &out) {
  SeededRng rng(707);
  const Image y = random_image(rng, {8, 8});
  const DataFidelity g(std::make_shared<IdentityOperator>(y.shape()), y);
  const double alpha = 0.5;
  double worst = 0.0;
  for (double gamma : {0.3, 0.6, 1.5}) {
    SolverConfig cfg;
    cfg.gamma = gamma;
    cfg.max_iters = 40;
    cfg.fp_tol = 1e-300;
    const auto res = pnp_ista(g, ScaledIdentity(alpha), cfg);
    const double factor = alpha * std::abs(1.0 - gamma);
    const auto &recs = res.trace.records;
    for (std::size_t k = 10; k < 20; ++k) {
      worst = std::max(worst, std::abs(recs[k].fp_residual / recs[k - 1].fp_residual - factor));
    }
  }
  out.check(worst <= 1e-3, "ratio");
  out.detail << "max|ratio-factor|=" << worst;
}

// 8 -------------------------------------------------------------------------------

void superres_demo(Outcome &out) {
  const auto cfg = demo_config("superres4x");
  out.check(cfg.problem.rate == 4 && cfg.problem.noise_sigma == 2e-2 &&
                *cfg.solver.gamma == 1.0 / 3.4e-2 && cfg.solver.prox.tol == 1e-3 &&
                cfg.solver.prox.maxiter == 10 && cfg.solver.max_iters == 12 &&
                cfg.input.shape == Shape{256, 256},
            "demo parameters");
  const auto t0 = Clock::now();
  const auto res = run_experiment(cfg, in_memory());
  const double elapsed = seconds_since(t0);
  out.check(res.ok && res.psnr > res.baseline_psnr, "psnr ordering");
  out.check(elapsed < 60.0, "runtime");
  out.detail << "psnr=" << res.psnr << " baseline=" << res.baseline_psnr << " time=" << elapsed
             << "s";
}

// 9 -------------------------------------------------------------------------------

void volume_fusion(Outcome &out) {
  const auto full_cfg = demo_config("fusion3d");
  const auto full = run_experiment(full_cfg, in_memory());
  auto partial_cfg = full_cfg;
  partial_cfg.problem.axes = {0};
  const auto partial = run_experiment(partial_cfg, in_memory());
  const double consensus = full.mace_residuals ? full.mace_residuals->consensus : INFINITY;
  out.check(full.ok && consensus <= 1e-5, "consensus");
  out.check(partial.ok && full.psnr > partial.psnr, "psnr ordering");
  out.detail << "consensus=" << consensus << " psnr3=" << full.psnr << " psnr2=" << partial.psnr;
}

// 10 ------------------------------------------------------------------------------

void reproducibility(Outcome &out) {
  const fs::path root = fs::temp_directory_path() / "pnp_acceptance_repro";
  fs::remove_all(root);
  for (const auto &name : demo_names()) {
    RunOptions a;
    a.output_dir = root / name / "a";
    run_experiment(demo_config(name), a);
    RunOptions b;
    b.output_dir = root / name / "b";
    run_experiment(load_config(*a.output_dir / "manifest.json"), b);
    for (const auto &entry : fs::directory_iterator(*a.output_dir)) {
      const auto file = entry.path().filename();
      if (file == "manifest.json") {
        continue;
      }
      out.check(slurp(entry.path()) == slurp(*b.output_dir / file),
                name + "/" + file.string());
    }
  }
  fs::remove_all(root);
  out.detail << "demos=" << demo_names().size();
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome &)>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"fixed-point certificates", fixed_point_certificates},
      {"MACE equals PnP", mace_equals_pnp},
      {"averaging-operator algebra", averaging_algebra},
      {"adjoint suite", adjoint_suite},
      {"online consistency", online_consistency},
      {"linear rate", linear_rate},
      {"superres4x demo", superres_demo},
      {"volume fusion", volume_fusion},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      criteria[i].second(out);
    } catch (const std::exception &e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    std::printf("%s %zu %s: %s\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                out.detail.str().c_str());
    std::fflush(stdout);
    failed += !out.pass;
  }
  return failed == 0 ? 0 : 1;
}
