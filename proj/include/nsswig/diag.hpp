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

#ifndef NSSWIG_DIAG_HPP
#define NSSWIG_DIAG_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <nsswig/benchmarks.hpp>
#include <nsswig/engine.hpp>
#include <nsswig/io.hpp>

/**
 * \file
 * \brief Experiment orchestration and diagnostics.
 *
 * Config files are INI documents with three sections. Every key is typed and unknown
 * keys are rejected:
 *
 *     [model]
 *     name = hier_gauss
 *     groups = 10
 *     [run]
 *     kernel = swig
 *     seed = 1
 *     [experiment]
 *     repeats = 3
 *     sweep = run.batch: 1, 10, 25, 50
 */

namespace nsswig {

using Points = std::vector<std::vector<double>>;

struct MMDResult {
  double value = 0.0;  ///< Mean over repeats, clamped at 0.
  double bandwidth = 0.0;  ///< Mean over repeats.
  std::size_t n_subsample = 0;
  std::size_t n_repeats = 0;
  double std_over_repeats = 0.0;
};

struct MMDOptions {
  std::size_t n_sub = 1000;
  std::size_t repeats = 5;
  bool standardize = false;
};

/// Biased (V-statistic) MMD^2 with a Gaussian kernel whose bandwidth is the mean pairwise
/// distance over the combined subsample.
MMDResult mmd(const Points& a, const Points& b, Rng& rng, const MMDOptions& opts = {});

/// Single evaluation on fixed sets; returns {mmd^2, bandwidth}.
std::pair<double, double> mmd_once(const Points& a, const Points& b);

/// Ordinary least squares y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;

  /// Two-sided Student-t confidence interval for the slope.
  [[nodiscard]] std::pair<double, double> slope_ci(double level = 0.95) const;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Fit of log(y) against log(x).
LinearFit fit_loglog(std::span<const double> x, std::span<const double> y);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  ///< Sample standard deviation; 0 for fewer than two values.
  std::size_t n = 0;
};

MeanStd mean_std(std::span<const double> xs);

enum class ModelKind { hier_gauss, funnel, sv };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

struct ModelChoice {
  ModelKind kind = ModelKind::hier_gauss;
  std::size_t groups = 10;
  std::optional<std::uint64_t> data_seed;  ///< Defaults to a stream of the run seed.
  HierGaussConfig hg;
  FunnelConfig funnel;
  SVConfig sv;
  bool force_full_recompute_on_psi = true;
};

struct SweepSpec {
  std::string field;  ///< "section.key"
  std::vector<std::string> values;
};

struct ExperimentConfig {
  ModelChoice model;
  RunConfig run;
  std::size_t repeats = 1;
  std::filesystem::path output_dir = "out";
  std::optional<SweepSpec> sweep;
  std::vector<std::size_t> scaling_groups = {10, 25, 50, 100};
  std::vector<KernelKind> scaling_kernels = {KernelKind::swig, KernelKind::nss};

  void validate() const;
};

/// Sets one `section.key` field from text; throws std::invalid_argument for unknown keys or bad values.
void set_field(ExperimentConfig& cfg, const std::string& field, const std::string& value);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& cfg);

/// A model plus the data it was built from.
struct BuiltModel {
  std::unique_ptr<Model> model;
  ObservationFile data;  ///< Empty for the funnel.
  nlohmann::ordered_json params;
};

BuiltModel build_model(const ModelChoice& choice, std::uint64_t root_seed);

/// Seed of repeat `r` at sweep point `p`.
std::uint64_t run_seed(std::uint64_t root, std::size_t point, std::size_t repeat);

struct RunRecord {
  std::string point;  ///< Sweep value ("" without a sweep).
  std::size_t repeat = 0;
  std::filesystem::path dir;
  std::optional<nlohmann::ordered_json> summary;
  double wall_seconds = 0.0;
  std::string error;
};

struct PointAggregate {
  std::string field;
  std::string value;
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  MeanStd log_z;
  double sigma_hat = 0.0;
  double evals = 0.0;
  double ess = 0.0;
  double runtime = 0.0;
  std::optional<double> analytic_logz;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<PointAggregate> points;
};

/// Runs every (sweep point, repeat) pair; each run writes dead.txt, summary.json, timing.json
/// (and data.txt when the model has data). Writes aggregate.tsv. Failures are recorded, not thrown.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool use_sweep = true);

/// Aggregates per-run summaries (as written by run_experiment) for one sweep point.
PointAggregate aggregate_point(const std::string& field, const std::string& value, const std::vector<RunRecord>& runs);

void write_aggregate(const std::filesystem::path& path, const std::vector<PointAggregate>& points);

struct ScalingRow {
  KernelKind kernel = KernelKind::swig;
  std::size_t groups = 0;
  std::vector<double> evals;
  std::vector<double> log_z;
  std::vector<double> sigma_hat;
  std::vector<double> wall_seconds;
  std::optional<double> analytic_logz;  ///< Of the last repeat.
  std::vector<double> logz_error;       ///< log_z - analytic per run, when available.
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  std::vector<std::pair<KernelKind, LinearFit>> fits;  ///< Over individual runs.
};

/// Sweeps groups over cfg.scaling_groups for each kernel; writes scaling.tsv and slopes.tsv.
ScalingReport scaling_study(const ExperimentConfig& cfg);

/// Writes plot-ready tables for every run under `root` into `out`. Returns the files written.
std::vector<std::filesystem::path> emit_plotdata(const std::filesystem::path& root, const std::filesystem::path& out);

/// Equal-weight draws from a dead-point table (rows with parameters only), restricted to `columns`.
Points resample_dead_table(const DeadTable& table, std::size_t n, Rng& rng, const std::vector<std::string>& columns = {});

/// Log density of the funnel's (psi, theta_0) marginal.
double funnel_marginal_logpdf(const FunnelConfig& cfg, double psi, double theta0, double log_z);

/// Posterior mean and covariance of (psi, theta_0) for the hierarchical Gaussian.
struct Gaussian2 {
  double mean[2];
  double cov[2][2];
};

Gaussian2 hg_posterior_psi_theta0(std::span<const double> y, const HierGaussConfig& cfg);

}  // namespace nsswig

#endif  // NSSWIG_DIAG_HPP
