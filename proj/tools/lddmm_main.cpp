// Batch driver for the landmark matching solvers.
//
//   lddmm example volume-circle > circle.json
//   lddmm run circle.json --out out/circle
//
// Exit status: 0 when a solve terminates (converged, stalled or out of
// iterations; the reason is in report.json), 1 on a failed gradient check,
// 2 on input or solver errors.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "lddmm/error.hpp"
#include "lddmm/experiments.hpp"
#include "lddmm/io.hpp"

namespace fs = std::filesystem;
using namespace lddmm;

namespace {

struct Overrides {
  std::optional<std::string> out;
  std::optional<unsigned long long> seed;
  std::optional<int> steps;
};

ExperimentConfig load(const std::string& path, const Overrides& o) {
  ExperimentConfig cfg = read_config(path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.steps) {
    cfg.options.steps = *o.steps;
    cfg.options.validate();
  }
  return cfg;
}

fs::path base_of(const std::string& path) { return fs::path(path).parent_path(); }

fs::path out_dir(const ExperimentConfig& cfg, const std::string& config_path, const Overrides& o) {
  if (o.out) return *o.out;
  const fs::path p(cfg.output);
  return p.is_absolute() ? p : base_of(config_path) / p;
}

void summary(const SolveReport& r, const fs::path& dir) {
  std::cout << "solver       " << r.solver << "\n"
            << "objective    " << format_double(r.objective) << "\n"
            << "kinetic      " << format_double(r.kinetic) << "\n"
            << "attachment   " << format_double(r.attachment) << "\n"
            << "violation    " << format_double(r.max_violation) << "\n";
  if (!r.solver.empty() && r.solver != "geodesic")
    std::cout << "termination  " << termination_name(r.termination) << " after " << r.iterations
              << " iterations\n";
  for (const auto& [k, v] : r.metrics) std::cout << k << " " << format_double(v) << "\n";
  std::cout << "wrote        " << dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Kernel matrices of a few hundred points sit just above glibc's mmap
  // threshold; without this every temporary is a fresh mapping.
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 128 << 20);
#endif
  CLI::App app{"Landmark shape matching with constrained LDDMM geodesics"};
  app.require_subcommand(1);

  Overrides o;
  std::string config;
  auto add_overrides = [&](CLI::App* sub) {
    sub->add_option("config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "random seed for the initial momentum");
    sub->add_option("--steps", o.steps, "number of time steps")->check(CLI::PositiveNumber);
  };

  CLI::App* run = app.add_subcommand("run", "solve the matching problem and write trajectory, grid and report");
  add_overrides(run);
  run->add_option("--out", o.out, "output directory (defaults to the config's output entry)");

  CLI::App* shoot = app.add_subcommand("shoot", "integrate one geodesic from the configured initial momentum");
  add_overrides(shoot);
  shoot->add_option("--out", o.out, "output directory");

  CLI::App* check = app.add_subcommand("check-grad", "compare the analytic gradient with finite differences");
  add_overrides(check);

  int resolution = 20;
  CLI::App* oracle = app.add_subcommand("oracle", "compare both solvers with a brute-force search on tiny problems");
  add_overrides(oracle);
  oracle->add_option("--resolution", resolution, "initial mesh of the search, as a fraction of the problem scale")
      ->check(CLI::PositiveNumber);

  std::string name;
  CLI::App* example = app.add_subcommand("example", "print a built-in experiment config");
  example->add_option("name", name, "example name")->required()->check(CLI::IsMember(builtin_example_names()));
  example->add_option("--out", o.out, "write the config to this file instead of stdout");
  example->add_option("--seed", o.seed, "seed stored in the config");
  example->add_option("--steps", o.steps, "time steps stored in the config")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*example) {
      ExperimentConfig cfg = builtin_example(name);
      if (o.seed) cfg.seed = *o.seed;
      if (o.steps) cfg.options.steps = *o.steps;
      if (o.out)
        write_config(cfg, *o.out);
      else
        std::cout << config_to_string(cfg);
      return 0;
    }
    const ExperimentConfig cfg = load(config, o);
    if (*run) {
      const fs::path dir = out_dir(cfg, config, o);
      const RunResult r = run_experiment(cfg, base_of(config), dir);
      summary(r.report, dir);
      return 0;
    }
    if (*shoot) {
      const fs::path dir = out_dir(cfg, config, o);
      const RunResult r = shoot_experiment(cfg, base_of(config), dir);
      summary(r.report, dir);
      return 0;
    }
    if (*check) {
      const GradientCheck g = check_gradient(cfg, base_of(config));
      std::cout << "solver          " << g.solver << "\n"
                << "coordinates     " << g.coordinates << "\n"
                << "analytic norm   " << format_double(g.analytic_norm) << "\n"
                << "fd norm         " << format_double(g.fd_norm) << "\n";
      if (!g.defined) {
        std::cout << "relative error  n/a (both gradients vanish)\n";
        return 0;
      }
      std::cout << "relative error  " << format_double(g.error) << "\n";
      return g.error < 1e-3 ? 0 : 1;
    }
    if (*oracle) {
      const OracleComparison c = compare_with_oracle(cfg, base_of(config), resolution);
      std::cout << "shooting              " << format_double(c.shooting) << "\n"
                << "augmented_lagrangian  " << format_double(c.augmented_lagrangian) << "\n"
                << "oracle                " << format_double(c.oracle) << "\n"
                << "relative spread       " << format_double(c.spread) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
