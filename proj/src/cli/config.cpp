#include "pnp/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace pnp::cli {

ConfigError::ConfigError(std::string path, const std::string &message)
    : ArgumentError((path.empty() ? std::string("config") : path) + ": " + message),
      path_(std::move(path)) {}

namespace {

/// Typed view of one JSON object that remembers its path and rejects
/// unknown keys once finish() is called.
class Reader {
public:
  Reader(const json &j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError(path_, "expected an object");
    }
  }

  std::string at(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string &key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json &raw(const std::string &key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string &key, double fallback) {
    if (!has(key)) {
      return fallback;
    }
    const json &v = j_.at(key);
    if (!v.is_number()) {
      throw ConfigError(at(key), "expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      throw ConfigError(at(key), "expected a finite number");
    }
    return d;
  }

  std::optional<double> optional_number(const std::string &key) {
    if (!has(key)) {
      return std::nullopt;
    }
    return number(key, 0.0);
  }

  std::uint64_t unsigned_integer(const std::string &key, std::uint64_t fallback) {
    if (!has(key)) {
      return fallback;
    }
    const json &v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError(at(key), "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  int integer(const std::string &key, int fallback) {
    if (!has(key)) {
      return fallback;
    }
    const json &v = j_.at(key);
    if (!v.is_number_integer()) {
      throw ConfigError(at(key), "expected an integer");
    }
    return v.get<int>();
  }

  bool boolean(const std::string &key, bool fallback) {
    if (!has(key)) {
      return fallback;
    }
    const json &v = j_.at(key);
    if (!v.is_boolean()) {
      throw ConfigError(at(key), "expected true or false");
    }
    return v.get<bool>();
  }

  std::string string(const std::string &key, const std::string &fallback) {
    if (!has(key)) {
      return fallback;
    }
    const json &v = j_.at(key);
    if (!v.is_string()) {
      throw ConfigError(at(key), "expected a string");
    }
    return v.get<std::string>();
  }

  std::vector<std::size_t> index_list(const std::string &key, std::vector<std::size_t> fallback) {
    if (!has(key)) {
      return fallback;
    }
    const json &v = j_.at(key);
    if (!v.is_array()) {
      throw ConfigError(at(key), "expected an array of nonnegative integers");
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer() || v[i].get<long long>() < 0) {
        throw ConfigError(at(key) + "[" + std::to_string(i) + "]",
                          "expected a nonnegative integer");
      }
      out.push_back(v[i].get<std::size_t>());
    }
    return out;
  }

  void finish() const {
    for (const auto &item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError(at(item.key()), "unknown field");
      }
    }
  }

private:
  const json &j_;
  std::string path_;
  std::set<std::string> seen_;
};

ProblemKind parse_problem_kind(const std::string &s, const std::string &path) {
  if (s == "identity") return ProblemKind::Identity;
  if (s == "superres") return ProblemKind::Superres;
  if (s == "deblur") return ProblemKind::Deblur;
  if (s == "compressive_sensing") return ProblemKind::CompressiveSensing;
  if (s == "inpaint") return ProblemKind::Inpaint;
  if (s == "volume_fusion") return ProblemKind::VolumeFusion;
  throw ConfigError(path, "unknown problem kind '" + s + "'");
}

SolverKind parse_solver_kind(const std::string &s, const std::string &path) {
  if (s == "admm") return SolverKind::Admm;
  if (s == "fista") return SolverKind::Fista;
  if (s == "pnp_admm") return SolverKind::PnpAdmm;
  if (s == "pnp_fista") return SolverKind::PnpFista;
  if (s == "pnp_ista") return SolverKind::PnpIsta;
  if (s == "red_sd") return SolverKind::RedSd;
  if (s == "online_pnp") return SolverKind::OnlinePnp;
  if (s == "simba") return SolverKind::Simba;
  if (s == "mace") return SolverKind::Mace;
  throw ConfigError(path, "unknown solver '" + s + "'");
}

const std::set<std::string> &agent_types() {
  static const std::set<std::string> types{"identity",        "scaled_identity", "soft_threshold",
                                           "tv_prox",         "gaussian_smooth", "median",
                                           "slicewise2d"};
  return types;
}

AgentSpec parse_agent(const json &j, const std::string &path) {
  Reader r(j, path);
  AgentSpec a;
  a.type = r.string("type", a.type);
  if (!agent_types().count(a.type)) {
    throw ConfigError(r.at("type"), "unknown agent type '" + a.type + "'");
  }
  a.alpha = r.number("alpha", a.alpha);
  a.threshold = r.number("threshold", a.threshold);
  a.weight = r.number("weight", a.weight);
  a.inner_iters = r.integer("inner_iters", a.inner_iters);
  a.sigma = r.number("sigma", a.sigma);
  a.window = r.unsigned_integer("window", a.window);
  a.axis = r.unsigned_integer("axis", a.axis);
  if (r.has("inner")) {
    a.inner.push_back(parse_agent(r.raw("inner"), r.at("inner")));
  }
  r.finish();
  if (a.type == "slicewise2d" && a.inner.size() != 1) {
    throw ConfigError(path, "slicewise2d needs an 'inner' agent");
  }
  return a;
}

json agent_to_json(const AgentSpec &a) {
  json j{{"type", a.type}};
  if (a.type == "scaled_identity") {
    j["alpha"] = a.alpha;
  } else if (a.type == "soft_threshold") {
    j["threshold"] = a.threshold;
  } else if (a.type == "tv_prox") {
    j["weight"] = a.weight;
    j["inner_iters"] = a.inner_iters;
  } else if (a.type == "gaussian_smooth") {
    j["sigma"] = a.sigma;
  } else if (a.type == "median") {
    j["window"] = a.window;
  } else if (a.type == "slicewise2d") {
    j["axis"] = a.axis;
    j["inner"] = agent_to_json(a.inner.at(0));
  }
  return j;
}

} // namespace

std::string to_string(ProblemKind kind) {
  switch (kind) {
  case ProblemKind::Identity:
    return "identity";
  case ProblemKind::Superres:
    return "superres";
  case ProblemKind::Deblur:
    return "deblur";
  case ProblemKind::CompressiveSensing:
    return "compressive_sensing";
  case ProblemKind::Inpaint:
    return "inpaint";
  case ProblemKind::VolumeFusion:
    return "volume_fusion";
  }
  return "unknown";
}

std::string to_string(SolverKind kind) {
  switch (kind) {
  case SolverKind::Admm:
    return "admm";
  case SolverKind::Fista:
    return "fista";
  case SolverKind::PnpAdmm:
    return "pnp_admm";
  case SolverKind::PnpFista:
    return "pnp_fista";
  case SolverKind::PnpIsta:
    return "pnp_ista";
  case SolverKind::RedSd:
    return "red_sd";
  case SolverKind::OnlinePnp:
    return "online_pnp";
  case SolverKind::Simba:
    return "simba";
  case SolverKind::Mace:
    return "mace";
  }
  return "unknown";
}

bool is_admm_family(SolverKind kind) {
  return kind == SolverKind::Admm || kind == SolverKind::PnpAdmm;
}

ExperimentConfig parse_config(const json &j, const std::filesystem::path &base_dir) {
  ExperimentConfig cfg;
  Reader top(j, "");
  cfg.name = top.string("name", cfg.name);
  cfg.seed = top.unsigned_integer("seed", cfg.seed);
  cfg.psnr_peak = top.number("psnr_peak", cfg.psnr_peak);
  cfg.write_pgm = top.boolean("write_pgm", cfg.write_pgm);
  if (top.has("output_dir")) {
    cfg.output_dir = top.string("output_dir", "");
  }

  if (top.has("input")) {
    Reader r(top.raw("input"), "input");
    if (r.has("path")) {
      std::filesystem::path p = r.string("path", "");
      cfg.input.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    const std::string kind = r.string("phantom", to_string(cfg.input.phantom));
    try {
      cfg.input.phantom = parse_phantom_kind(kind);
    } catch (const ArgumentError &e) {
      throw ConfigError(r.at("phantom"), e.what());
    }
    cfg.input.shape = r.index_list("shape", cfg.input.shape);
    try {
      validate_shape(cfg.input.shape);
    } catch (const ArgumentError &e) {
      throw ConfigError(r.at("shape"), e.what());
    }
    cfg.input.seed = r.unsigned_integer("seed", cfg.input.seed);
    cfg.input.sparsity = r.number("sparsity", cfg.input.sparsity);
    r.finish();
  }

  if (top.has("problem")) {
    Reader r(top.raw("problem"), "problem");
    ProblemSpec &p = cfg.problem;
    p.kind = parse_problem_kind(r.string("kind", to_string(p.kind)), r.at("kind"));
    p.noise_sigma = r.number("noise_sigma", p.noise_sigma);
    p.rate = r.unsigned_integer("rate", p.rate);
    p.blur_sigma = r.number("blur_sigma", p.blur_sigma);
    p.kernel_sigma = r.number("kernel_sigma", p.kernel_sigma);
    p.subsample_fraction = r.number("subsample_fraction", p.subsample_fraction);
    p.blocks = r.unsigned_integer("blocks", p.blocks);
    p.mask_fraction = r.number("mask_fraction", p.mask_fraction);
    p.operator_seed = r.unsigned_integer("operator_seed", p.operator_seed);
    p.axes = r.index_list("axes", p.axes);
    p.slice_axis = r.unsigned_integer("slice_axis", p.slice_axis);
    p.slice_rate = r.unsigned_integer("slice_rate", p.slice_rate);
    r.finish();
  }

  if (top.has("agents")) {
    const json &list = top.raw("agents");
    if (!list.is_array() || list.empty()) {
      throw ConfigError("agents", "expected a non-empty array");
    }
    cfg.agents.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      cfg.agents.push_back(parse_agent(list[i], "agents[" + std::to_string(i) + "]"));
    }
  }
  if (top.has("weights")) {
    const json &w = top.raw("weights");
    if (!w.is_array()) {
      throw ConfigError("weights", "expected an array of numbers");
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!w[i].is_number()) {
        throw ConfigError("weights[" + std::to_string(i) + "]", "expected a number");
      }
      cfg.weights.push_back(w[i].get<double>());
    }
  }

  if (top.has("solver")) {
    Reader r(top.raw("solver"), "solver");
    SolverSpec &s = cfg.solver;
    s.kind = parse_solver_kind(r.string("name", to_string(s.kind)), r.at("name"));
    s.gamma = r.optional_number("gamma");
    s.tau = r.number("tau", s.tau);
    s.rho = r.number("rho", s.rho);
    if (r.has("theta")) {
      const json &t = r.raw("theta");
      if (t.is_number()) {
        s.theta = "constant";
        s.theta_value = t.get<double>();
      } else if (t.is_string() && (t == "nesterov" || t == "ista")) {
        s.theta = t.get<std::string>();
      } else {
        throw ConfigError(r.at("theta"), "expected \"nesterov\", \"ista\" or a number in (0, 1]");
      }
    }
    s.max_iters = r.integer("max_iters", s.max_iters);
    s.fp_tol = r.number("fp_tol", s.fp_tol);
    s.minibatch = r.unsigned_integer("minibatch", s.minibatch);
    s.sampling = r.string("sampling", s.sampling);
    if (s.sampling != "iid" && s.sampling != "epoch") {
      throw ConfigError(r.at("sampling"), "expected \"iid\" or \"epoch\"");
    }
    s.record_equilibrium = r.boolean("record_equilibrium", s.record_equilibrium);
    if (r.has("prox")) {
      Reader p(r.raw("prox"), r.at("prox"));
      s.prox.method = p.string("method", s.prox.method);
      if (s.prox.method != "auto" && s.prox.method != "closed_form" && s.prox.method != "cg" &&
          s.prox.method != "partial") {
        throw ConfigError(p.at("method"), "expected auto, closed_form, cg or partial");
      }
      s.prox.tol = p.number("tol", s.prox.tol);
      s.prox.maxiter = p.integer("maxiter", s.prox.maxiter);
      s.prox.steps = p.integer("steps", s.prox.steps);
      p.finish();
    }
    r.finish();
  }

  if (top.has("init")) {
    Reader r(top.raw("init"), "init");
    cfg.init.pinv_tol = r.number("pinv_tol", cfg.init.pinv_tol);
    cfg.init.pinv_maxiter = r.integer("pinv_maxiter", cfg.init.pinv_maxiter);
    cfg.init.denoise = r.boolean("denoise", cfg.init.denoise);
    r.finish();
  }
  top.finish();
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &file) {
  std::ifstream in(file);
  if (!in) {
    throw ConfigError("", "cannot open " + file.string());
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error &e) {
    throw ConfigError("", file.string() + ": " + e.what());
  }
  // A run manifest carries its resolved configuration under "config".
  if (j.is_object() && j.contains("config") && j.contains("manifest_version")) {
    j = j.at("config");
  }
  return parse_config(j, file.parent_path());
}

json to_json(const ExperimentConfig &cfg) {
  json input{{"phantom", to_string(cfg.input.phantom)},
             {"shape", cfg.input.shape},
             {"seed", cfg.input.seed},
             {"sparsity", cfg.input.sparsity}};
  if (cfg.input.path) {
    input["path"] = cfg.input.path->string();
  }
  const ProblemSpec &p = cfg.problem;
  json problem{{"kind", to_string(p.kind)},
               {"noise_sigma", p.noise_sigma},
               {"rate", p.rate},
               {"blur_sigma", p.blur_sigma},
               {"kernel_sigma", p.kernel_sigma},
               {"subsample_fraction", p.subsample_fraction},
               {"blocks", p.blocks},
               {"mask_fraction", p.mask_fraction},
               {"operator_seed", p.operator_seed},
               {"axes", p.axes},
               {"slice_axis", p.slice_axis},
               {"slice_rate", p.slice_rate}};
  json agents = json::array();
  for (const auto &a : cfg.agents) {
    agents.push_back(agent_to_json(a));
  }
  const SolverSpec &s = cfg.solver;
  json solver{{"name", to_string(s.kind)},
              {"tau", s.tau},
              {"rho", s.rho},
              {"max_iters", s.max_iters},
              {"fp_tol", s.fp_tol},
              {"minibatch", s.minibatch},
              {"sampling", s.sampling},
              {"record_equilibrium", s.record_equilibrium},
              {"prox",
               {{"method", s.prox.method},
                {"tol", s.prox.tol},
                {"maxiter", s.prox.maxiter},
                {"steps", s.prox.steps}}}};
  if (s.gamma) {
    solver["gamma"] = *s.gamma;
  }
  if (s.theta == "constant") {
    solver["theta"] = *s.theta_value;
  } else {
    solver["theta"] = s.theta;
  }
  json out{{"name", cfg.name},
           {"seed", cfg.seed},
           {"input", input},
           {"problem", problem},
           {"agents", agents},
           {"solver", solver},
           {"init",
            {{"pinv_tol", cfg.init.pinv_tol},
             {"pinv_maxiter", cfg.init.pinv_maxiter},
             {"denoise", cfg.init.denoise}}},
           {"psnr_peak", cfg.psnr_peak},
           {"output_dir", cfg.output_dir.string()},
           {"write_pgm", cfg.write_pgm}};
  if (!cfg.weights.empty()) {
    out["weights"] = cfg.weights;
  }
  return out;
}

void validate(const ExperimentConfig &cfg) {
  const ProblemSpec &p = cfg.problem;
  if (cfg.input.path && !std::filesystem::exists(*cfg.input.path)) {
    throw ConfigError("input.path", "file does not exist: " + cfg.input.path->string());
  }
  if (!(cfg.input.sparsity > 0.0 && cfg.input.sparsity <= 1.0)) {
    throw ConfigError("input.sparsity", "must lie in (0, 1]");
  }
  if (!(p.noise_sigma >= 0.0)) {
    throw ConfigError("problem.noise_sigma", "must be >= 0");
  }
  if (p.kind == ProblemKind::Superres && (p.rate < 2 || p.rate > 4)) {
    throw ConfigError("problem.rate", "must be 2, 3 or 4");
  }
  if (!(p.blur_sigma >= 0.0)) {
    throw ConfigError("problem.blur_sigma", "must be >= 0");
  }
  if (!(p.kernel_sigma >= 0.0)) {
    throw ConfigError("problem.kernel_sigma", "must be >= 0");
  }
  if (!(p.subsample_fraction > 0.0 && p.subsample_fraction <= 1.0)) {
    throw ConfigError("problem.subsample_fraction", "must lie in (0, 1]");
  }
  if (!(p.mask_fraction > 0.0 && p.mask_fraction <= 1.0)) {
    throw ConfigError("problem.mask_fraction", "must lie in (0, 1]");
  }
  if (p.blocks < 1) {
    throw ConfigError("problem.blocks", "must be >= 1");
  }
  if (p.blocks > 1 && p.kind != ProblemKind::CompressiveSensing) {
    throw ConfigError("problem.blocks", "block splitting is only available for compressive_sensing");
  }
  if (p.kind == ProblemKind::VolumeFusion) {
    if (cfg.input.shape.size() != 3 && !cfg.input.path) {
      throw ConfigError("input.shape", "volume_fusion needs a 3D volume");
    }
    if (p.axes.empty()) {
      throw ConfigError("problem.axes", "must name at least one axis");
    }
    for (std::size_t i = 0; i < p.axes.size(); ++i) {
      if (p.axes[i] > 2) {
        throw ConfigError("problem.axes[" + std::to_string(i) + "]", "must be 0, 1 or 2");
      }
    }
    if (p.slice_axis > 2) {
      throw ConfigError("problem.slice_axis", "must be 0, 1 or 2");
    }
    if (p.slice_rate < 1) {
      throw ConfigError("problem.slice_rate", "must be >= 1");
    }
  }

  const SolverSpec &s = cfg.solver;
  if (s.gamma && !(*s.gamma > 0.0)) {
    throw ConfigError("solver.gamma", "must be positive");
  }
  if (!(s.tau > 0.0)) {
    throw ConfigError("solver.tau", "must be positive");
  }
  if (!(s.rho > 0.0 && s.rho < 1.0)) {
    throw ConfigError("solver.rho", "must lie strictly inside (0, 1)");
  }
  if (s.theta == "constant" && !(*s.theta_value > 0.0 && *s.theta_value <= 1.0)) {
    throw ConfigError("solver.theta", "must lie in (0, 1]");
  }
  if (s.max_iters < 1) {
    throw ConfigError("solver.max_iters", "must be >= 1");
  }
  if (!(s.fp_tol > 0.0)) {
    throw ConfigError("solver.fp_tol", "must be positive");
  }
  if (s.minibatch < 1 || s.minibatch > p.blocks) {
    throw ConfigError("solver.minibatch", "must lie in [1, problem.blocks]");
  }
  if (s.prox.method == "partial" && !is_admm_family(s.kind)) {
    throw ConfigError("solver.prox.method", "partial updates are only available for ADMM");
  }
  if (!(s.prox.tol > 0.0) || s.prox.maxiter < 1 || s.prox.steps < 1) {
    throw ConfigError("solver.prox", "tol, maxiter and steps must be positive");
  }
  if (!(cfg.init.pinv_tol > 0.0) || cfg.init.pinv_maxiter < 1) {
    throw ConfigError("init", "pinv_tol and pinv_maxiter must be positive");
  }
  if (!(cfg.psnr_peak > 0.0)) {
    throw ConfigError("psnr_peak", "must be positive");
  }

  const bool volume = p.kind == ProblemKind::VolumeFusion;
  const std::size_t priors = volume ? p.axes.size() : cfg.agents.size();
  if (volume && cfg.agents.size() != 1) {
    throw ConfigError("agents", "volume_fusion takes exactly one 2D agent");
  }
  if (s.kind == SolverKind::Mace) {
    if (!cfg.weights.empty() && cfg.weights.size() != priors + 1) {
      throw ConfigError("weights", "expected " + std::to_string(priors + 1) +
                                       " weights (data-term prox first)");
    }
  } else {
    if (priors != 1) {
      throw ConfigError(volume ? "problem.axes" : "agents",
                        to_string(s.kind) + " takes exactly one prior agent");
    }
    if (!cfg.weights.empty()) {
      throw ConfigError("weights", "only used by mace");
    }
  }
  for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
    const auto &a = cfg.agents[i];
    const std::string at = "agents[" + std::to_string(i) + "]";
    if (a.type == "tv_prox" && a.inner_iters < 1) {
      throw ConfigError(at + ".inner_iters", "must be >= 1");
    }
    if (a.type == "median" && a.window % 2 == 0) {
      throw ConfigError(at + ".window", "must be odd");
    }
  }
}

} // namespace pnp::cli
