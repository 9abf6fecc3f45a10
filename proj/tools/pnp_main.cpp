// Command-line front end: run configs, packaged demos, or validate configs.

#include <atomic>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "pnp/cli/config.hpp"
#include "pnp/cli/demos.hpp"
#include "pnp/cli/experiment.hpp"

namespace {

using namespace pnp::cli;

struct Job {
  ExperimentConfig config;
  std::optional<std::filesystem::path> out;
};

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool quiet = false;
  std::size_t jobs = 1;
};

/// With one job --out is the output directory; with several, each job writes
/// to <out>/<name>.
void apply_flags(std::vector<Job> &jobs, const GlobalFlags &flags) {
  for (auto &job : jobs) {
    if (flags.seed) {
      job.config.seed = *flags.seed;
    }
    if (flags.out) {
      job.out = jobs.size() == 1 ? std::filesystem::path(*flags.out)
                                 : std::filesystem::path(*flags.out) / job.config.name;
    }
  }
}

int run_jobs(const std::vector<Job> &jobs, const GlobalFlags &flags) {
  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  std::atomic<int> status{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      std::ostringstream log;
      RunOptions opts;
      opts.output_dir = jobs[i].out;
      opts.log = flags.quiet ? nullptr : &log;
      int code = 0;
      try {
        const auto result = run_experiment(jobs[i].config, opts);
        if (!result.ok) {
          code = 2;
        }
      } catch (const std::exception &e) {
        log << "[" << jobs[i].config.name << "] error: " << e.what() << "\n";
        code = 1;
      }
      std::lock_guard<std::mutex> lock(log_mutex);
      std::cerr << log.str();
      if (code != 0 && flags.quiet) {
        std::cerr << "[" << jobs[i].config.name << "] failed\n";
      }
      int expected = status.load();
      while (code > expected && !status.compare_exchange_weak(expected, code)) {
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(flags.jobs, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto &t : pool) {
    t.join();
  }
  return status.load();
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Plug-and-Play reconstruction toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  app.add_option("--seed", flags.seed, "Override the experiment seed");
  app.add_option("--out", flags.out, "Output directory");
  app.add_flag("--quiet", flags.quiet, "Suppress progress messages");
  app.add_option("--jobs", flags.jobs, "Experiments to run concurrently")->check(CLI::PositiveNumber);

  std::vector<std::string> run_files;
  auto *run = app.add_subcommand("run", "Run experiments from config or manifest files");
  run->add_option("configs", run_files, "JSON config or manifest.json files")->required();

  std::vector<std::string> demo_list;
  bool list_demos = false;
  auto *demo = app.add_subcommand("demo", "Run packaged demos");
  demo->add_option("names", demo_list, "Demo names, or 'all'");
  demo->add_flag("--list", list_demos, "Print available demos");

  std::vector<std::string> validate_files;
  auto *validate_cmd = app.add_subcommand("validate", "Check configs and print the resolved form");
  validate_cmd->add_option("configs", validate_files, "JSON config files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate_cmd) {
      int status = 0;
      for (const auto &f : validate_files) {
        try {
          const auto cfg = load_config(f);
          std::cout << to_json(cfg).dump(2) << "\n";
        } catch (const ConfigError &e) {
          std::cerr << f << ": " << e.what() << "\n";
          status = 1;
        }
      }
      return status;
    }

    std::vector<Job> jobs;
    if (*run) {
      for (const auto &f : run_files) {
        jobs.push_back(Job{load_config(f), std::nullopt});
      }
    } else {
      if (list_demos || demo_list.empty()) {
        for (const auto &name : demo_names()) {
          std::cout << name << "\n";
        }
        return 0;
      }
      if (demo_list.size() == 1 && demo_list.front() == "all") {
        demo_list = demo_names();
      }
      for (const auto &name : demo_list) {
        jobs.push_back(Job{demo_config(name), std::nullopt});
      }
    }
    apply_flags(jobs, flags);
    return run_jobs(jobs, flags);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
