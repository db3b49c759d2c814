// Copyright 2026 The nsswig Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <nsswig/diag.hpp>

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repeats;
  std::optional<std::string> out;
  std::optional<std::string> kernel;
  std::optional<std::size_t> threads;
};

nsswig::ExperimentConfig load_with(const std::string& path, const Overrides& o) {
  auto cfg = nsswig::load_config(path);
  if (o.seed) cfg.run.seed = *o.seed;
  if (o.repeats) cfg.repeats = *o.repeats;
  if (o.out) cfg.output_dir = *o.out;
  if (o.kernel) cfg.run.kernel = nsswig::parse_kernel_kind(*o.kernel);
  if (o.threads) cfg.run.threads = *o.threads;
  cfg.validate();
  return cfg;
}

int report(const nsswig::ExperimentResult& res) {
  std::size_t failed = 0;
  for (const auto& p : res.points) {
    failed += p.n_failed;
    std::cout << fmt::format("{}{}  log Z = {:.4f} +- {:.4f} (sigma_hat {:.4f}, n = {})", p.value.empty() ? "" : p.value,
                             p.value.empty() ? "" : ":", p.log_z.mean, p.log_z.std, p.sigma_hat, p.n_ok);
    if (p.analytic_logz) std::cout << fmt::format("  analytic {:.4f}", *p.analytic_logz);
    std::cout << '\n';
  }
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nested sampling with Slice-within-Gibbs kernels"};
  app.require_subcommand(1);

  Overrides o;
  auto add_overrides = [&o](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Root seed");
    sub->add_option("--repeats", o.repeats, "Seeds per configuration");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--kernel", o.kernel, "swig or nss")->check(CLI::IsMember({"swig", "nss"}));
    sub->add_option("--threads", o.threads, "Worker threads per run (0 = all cores)");
  };

  std::string config;
  auto* run = app.add_subcommand("run", "Run a configuration (ignores any sweep)");
  run->add_option("config", config, "INI config")->required()->check(CLI::ExistingFile);
  add_overrides(run);

  auto* sweep = app.add_subcommand("sweep", "Run every point of the configured sweep");
  sweep->add_option("config", config, "INI config")->required()->check(CLI::ExistingFile);
  add_overrides(sweep);

  auto* scaling = app.add_subcommand("scaling", "Evaluation-cost scaling study over the group counts");
  scaling->add_option("config", config, "INI config")->required()->check(CLI::ExistingFile);
  add_overrides(scaling);

  std::string file_a;
  std::string file_b;
  std::string columns;
  nsswig::MMDOptions mopts;
  std::uint64_t mmd_seed = 0;
  auto* mmd = app.add_subcommand("mmd", "MMD between the posteriors of two dead-point files");
  mmd->add_option("file_a", file_a)->required()->check(CLI::ExistingFile);
  mmd->add_option("file_b", file_b)->required()->check(CLI::ExistingFile);
  mmd->add_option("--columns", columns, "Comma-separated parameter columns (default: all)");
  mmd->add_option("--n-sub", mopts.n_sub, "Subsample size");
  mmd->add_option("--mmd-repeats", mopts.repeats, "Subsample repeats");
  mmd->add_flag("--standardize", mopts.standardize, "Standardize coordinates first");
  mmd->add_option("--seed", mmd_seed, "Seed for resampling");

  std::string plot_dir;
  std::string plot_out;
  auto* plot = app.add_subcommand("plotdata", "Emit plot-ready tables from run directories");
  plot->add_option("dir", plot_dir)->required()->check(CLI::ExistingDirectory);
  plot->add_option("--out", plot_out, "Output directory (default: <dir>/plotdata)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return report(nsswig::run_experiment(load_with(config, o), false));
    if (*sweep) {
      const auto cfg = load_with(config, o);
      if (!cfg.sweep) throw std::invalid_argument("config has no [experiment] sweep");
      return report(nsswig::run_experiment(cfg, true));
    }
    if (*scaling) {
      const auto rep = nsswig::scaling_study(load_with(config, o));
      for (const auto& [kernel, fit] : rep.fits) {
        const auto [lo, hi] = fit.slope_ci(0.95);
        std::cout << fmt::format("{}: slope {:.3f} +- {:.3f} (95% CI [{:.3f}, {:.3f}], R^2 {:.4f})\n",
                                 nsswig::to_string(kernel), fit.slope, fit.slope_se, lo, hi, fit.r2);
      }
      return EXIT_SUCCESS;
    }
    if (*mmd) {
      std::vector<std::string> cols;
      if (!columns.empty()) {
        std::stringstream ss(columns);
        for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
      }
      nsswig::Rng rng = nsswig::make_stream(mmd_seed, {0x4D4D44});
      const auto a = nsswig::resample_dead_table(nsswig::read_dead_points(file_a), mopts.n_sub, rng, cols);
      const auto b = nsswig::resample_dead_table(nsswig::read_dead_points(file_b), mopts.n_sub, rng, cols);
      const auto res = nsswig::mmd(a, b, rng, mopts);
      std::cout << fmt::format("mmd {:.6e} std {:.3e} bandwidth {:.6g} n_sub {} repeats {}\n", res.value,
                               res.std_over_repeats, res.bandwidth, res.n_subsample, res.n_repeats);
      return EXIT_SUCCESS;
    }
    if (*plot) {
      const std::filesystem::path out = plot_out.empty() ? std::filesystem::path(plot_dir) / "plotdata" : std::filesystem::path(plot_out);
      for (const auto& p : nsswig::emit_plotdata(plot_dir, out)) std::cout << p.string() << '\n';
      return EXIT_SUCCESS;
    }
  } catch (const nsswig::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return EXIT_FAILURE;
}
