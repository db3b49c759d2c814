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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include <nsswig/diag.hpp>
#include <nsswig/math.hpp>

namespace nsswig {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kDataTag = 0xDA7A;
constexpr std::uint64_t kRunTag = 0x52554E;

std::vector<std::string> psi_names_for(ModelKind kind) {
  if (kind == ModelKind::sv) return {"mu", "beta", "sigma"};
  return {"psi"};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  os << text;
}

std::string fmt_double(double x) { return fmt::format("{:.17g}", x); }

std::string fmt_opt(const std::optional<double>& x) { return x ? fmt_double(*x) : std::string{"nan"}; }

}  // namespace

BuiltModel build_model(const ModelChoice& choice, std::uint64_t root_seed) {
  const std::uint64_t data_seed = choice.data_seed.value_or(derive_seed(root_seed, {kDataTag}));
  BuiltModel out;
  switch (choice.kind) {
    case ModelKind::hier_gauss: {
      HierGaussConfig cfg = choice.hg;
      cfg.groups = choice.groups;
      cfg.seed = data_seed;
      auto y = generate_hg_data(cfg);
      out.data = ObservationFile{"hier_gauss", data_seed, y};
      out.model = std::make_unique<HierGaussModel>(cfg, std::move(y));
      out.params = {{"name", "hier_gauss"},         {"groups", cfg.groups},     {"mu0", cfg.mu0},
                    {"sigma_psi", cfg.sigma_psi},   {"sigma_theta", cfg.sigma_theta},
                    {"sigma_obs", cfg.sigma_obs},   {"psi_true", cfg.psi_true}, {"data_seed", data_seed}};
      break;
    }
    case ModelKind::funnel: {
      FunnelConfig cfg = choice.funnel;
      cfg.groups = choice.groups;
      out.model = std::make_unique<FunnelModel>(cfg);
      out.params = {{"name", "funnel"},
                    {"groups", cfg.groups},
                    {"sigma_psi_sq", cfg.sigma_psi_sq},
                    {"theta_bound", cfg.theta_bound}};
      break;
    }
    case ModelKind::sv: {
      SVConfig cfg = choice.sv;
      cfg.sites = choice.groups;
      cfg.seed = data_seed;
      auto data = generate_sv_data(cfg);
      out.data = ObservationFile{"sv", data_seed, data.y};
      out.model = std::make_unique<SVModel>(cfg.sites, std::move(data.y));
      out.params = {{"name", "sv"},         {"groups", cfg.sites},      {"sv_mu", cfg.mu},
                    {"sv_beta", cfg.beta},  {"sv_sigma", cfg.sigma},    {"data_seed", data_seed}};
      break;
    }
  }
  out.model->set_force_full_recompute_on_psi(choice.force_full_recompute_on_psi);
  out.params["force_full_recompute_on_psi"] = choice.force_full_recompute_on_psi;
  return out;
}

std::uint64_t run_seed(std::uint64_t root, std::size_t point, std::size_t repeat) {
  return derive_seed(root, {kRunTag, point, repeat});
}

namespace {

void record_failure(const RunRecord& rec) {
  std::error_code ec;
  fs::create_directories(rec.dir, ec);
  write_text(rec.dir / "error.txt", rec.error + "\n");
}

/// One run into `dir`; failures are captured in the record.
RunRecord execute_run(const BuiltModel& built, ModelKind kind, const RunConfig& rc, const fs::path& dir) {
  RunRecord rec;
  rec.dir = dir;
  try {
    fs::create_directories(dir);
    const RunResult run = run_nested_sampling(*built.model, rc);
    write_dead_points(dir / "dead.txt", run, psi_names_for(kind));
    auto summary = run_summary(run);
    summary["model_params"] = built.params;
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    write_timing(dir / "timing.json", run);
    if (!built.data.values.empty()) write_observations(dir / "data.txt", built.data);
    rec.summary = std::move(summary);
    rec.wall_seconds = run.wall_seconds;
  } catch (const std::exception& e) {
    rec.error = e.what();
    record_failure(rec);
  }
  return rec;
}

}  // namespace

PointAggregate aggregate_point(const std::string& field, const std::string& value,
                               const std::vector<RunRecord>& runs) {
  PointAggregate agg;
  agg.field = field;
  agg.value = value;
  std::vector<double> logz;
  double sigma = 0.0;
  double evals = 0.0;
  double ess = 0.0;
  double runtime = 0.0;
  for (const auto& r : runs) {
    if (!r.summary) {
      ++agg.n_failed;
      continue;
    }
    const auto& s = *r.summary;
    ++agg.n_ok;
    logz.push_back(s.at("log_z").get<double>());
    sigma += s.at("sigma_hat").get<double>();
    evals += s.at("n_full_likelihood_equivalents").get<double>();
    ess += s.at("ess").get<double>();
    runtime += r.wall_seconds;
    if (!s.at("analytic_logz").is_null()) agg.analytic_logz = s.at("analytic_logz").get<double>();
  }
  agg.log_z = mean_std(logz);
  if (agg.n_ok > 0) {
    const auto n = static_cast<double>(agg.n_ok);
    agg.sigma_hat = sigma / n;
    agg.evals = evals / n;
    agg.ess = ess / n;
    agg.runtime = runtime / n;
  }
  return agg;
}

void write_aggregate(const fs::path& path, const std::vector<PointAggregate>& points) {
  std::string text =
      "field\tvalue\tn_ok\tn_failed\tlog_z_mean\tlog_z_std\tsigma_hat_mean\tevals_mean\tess_mean\truntime_mean\t"
      "analytic_logz\n";
  for (const auto& p : points) {
    text += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", p.field.empty() ? "-" : p.field,
                        p.value.empty() ? "-" : p.value, p.n_ok, p.n_failed, fmt_double(p.log_z.mean),
                        fmt_double(p.log_z.std), fmt_double(p.sigma_hat), fmt_double(p.evals), fmt_double(p.ess),
                        fmt_double(p.runtime), fmt_opt(p.analytic_logz));
  }
  write_text(path, text);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool use_sweep) {
  cfg.validate();
  const bool swept = use_sweep && cfg.sweep.has_value();
  const std::vector<std::string> values = swept ? cfg.sweep->values : std::vector<std::string>{""};
  fs::create_directories(cfg.output_dir);

  ExperimentResult out;
  for (std::size_t p = 0; p < values.size(); ++p) {
    ExperimentConfig pc = cfg;
    fs::path base = cfg.output_dir;
    if (swept) {
      set_field(pc, cfg.sweep->field, values[p]);
      pc.validate();
      base /= fmt::format("{}={}", cfg.sweep->field, values[p]);
    }
    std::vector<RunRecord> point_runs;
    std::optional<BuiltModel> built;
    std::string build_error;
    try {
      built = build_model(pc.model, cfg.run.seed);
    } catch (const std::exception& e) {
      build_error = e.what();
    }
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      const fs::path dir = base / fmt::format("rep{:02}", r);
      RunRecord rec;
      if (built) {
        RunConfig rc = pc.run;
        rc.seed = run_seed(cfg.run.seed, p, r);
        rec = execute_run(*built, pc.model.kind, rc, dir);
      } else {
        rec.dir = dir;
        rec.error = build_error;
        record_failure(rec);
      }
      rec.point = values[p];
      rec.repeat = r;
      if (!rec.error.empty()) std::cerr << fmt::format("run {} failed: {}\n", dir.string(), rec.error);
      point_runs.push_back(rec);
    }
    out.points.push_back(aggregate_point(swept ? cfg.sweep->field : "", values[p], point_runs));
    out.runs.insert(out.runs.end(), point_runs.begin(), point_runs.end());
  }
  write_aggregate(cfg.output_dir / "aggregate.tsv", out.points);
  return out;
}

ScalingReport scaling_study(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.scaling_groups.size() < 3) throw std::invalid_argument("scaling study needs at least three group counts");
  fs::create_directories(cfg.output_dir);
  ScalingReport report;
  for (const auto kernel : cfg.scaling_kernels) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t gi = 0; gi < cfg.scaling_groups.size(); ++gi) {
      ExperimentConfig pc = cfg;
      pc.model.groups = cfg.scaling_groups[gi];
      pc.run.kernel = kernel;
      const BuiltModel built = build_model(pc.model, cfg.run.seed);
      ScalingRow row;
      row.kernel = kernel;
      row.groups = pc.model.groups;
      for (std::size_t r = 0; r < cfg.repeats; ++r) {
        RunConfig rc = pc.run;
        rc.seed = run_seed(cfg.run.seed, gi, r);
        const fs::path dir =
            cfg.output_dir / "scaling" / to_string(kernel) / fmt::format("J{}", row.groups) / fmt::format("rep{:02}", r);
        const RunRecord rec = execute_run(built, pc.model.kind, rc, dir);
        if (!rec.summary) {
          std::cerr << fmt::format("run {} failed: {}\n", dir.string(), rec.error);
          continue;
        }
        const auto& s = *rec.summary;
        const double evals = s.at("n_full_likelihood_equivalents").get<double>();
        const double logz = s.at("log_z").get<double>();
        row.evals.push_back(evals);
        row.log_z.push_back(logz);
        row.sigma_hat.push_back(s.at("sigma_hat").get<double>());
        row.wall_seconds.push_back(rec.wall_seconds);
        if (!s.at("analytic_logz").is_null()) {
          row.analytic_logz = s.at("analytic_logz").get<double>();
          row.logz_error.push_back(logz - *row.analytic_logz);
        }
        xs.push_back(static_cast<double>(row.groups));
        ys.push_back(evals);
      }
      report.rows.push_back(std::move(row));
    }
    report.fits.emplace_back(kernel, fit_loglog(xs, ys));
  }

  std::string table =
      "kernel\tJ\tn\tevals_mean\tevals_std\tlog_z_mean\tlog_z_std\tsigma_hat_mean\tanalytic_logz\truntime_mean\n";
  for (const auto& row : report.rows) {
    const auto e = mean_std(row.evals);
    const auto z = mean_std(row.log_z);
    table += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", to_string(row.kernel), row.groups, e.n,
                         fmt_double(e.mean), fmt_double(e.std), fmt_double(z.mean), fmt_double(z.std),
                         fmt_double(mean_std(row.sigma_hat).mean), fmt_opt(row.analytic_logz),
                         fmt_double(mean_std(row.wall_seconds).mean));
  }
  write_text(cfg.output_dir / "scaling.tsv", table);

  std::string slopes = "kernel\tslope\tslope_se\tci95_lo\tci95_hi\tintercept\tr2\tn\n";
  for (const auto& [kernel, fit] : report.fits) {
    const auto [lo, hi] = fit.slope_ci(0.95);
    slopes += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", to_string(kernel), fmt_double(fit.slope),
                          fmt_double(fit.slope_se), fmt_double(lo), fmt_double(hi), fmt_double(fit.intercept),
                          fmt_double(fit.r2), fit.n);
  }
  write_text(cfg.output_dir / "slopes.tsv", slopes);
  return report;
}

Points resample_dead_table(const DeadTable& table, std::size_t n, Rng& rng, const std::vector<std::string>& columns) {
  std::vector<std::size_t> cols;
  if (columns.empty()) {
    for (std::size_t c = 4; c < table.columns.size(); ++c) cols.push_back(c - 4);
  } else {
    for (const auto& name : columns) {
      const auto it = std::find(table.columns.begin() + 4, table.columns.end(), name);
      if (it == table.columns.end()) throw std::invalid_argument(fmt::format("no column '{}'", name));
      cols.push_back(static_cast<std::size_t>(it - table.columns.begin()) - 4);
    }
  }
  std::vector<std::size_t> rows;
  std::vector<double> lw;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.rows[i].params.empty()) continue;
    rows.push_back(i);
    lw.push_back(table.rows[i].log_weight);
  }
  if (rows.empty()) throw std::invalid_argument("dead-point table has no stored parameters");
  const double top = *std::max_element(lw.begin(), lw.end());
  std::vector<double> w(lw.size());
  std::transform(lw.begin(), lw.end(), w.begin(), [top](double x) { return std::exp(x - top); });
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  Points out(n);
  for (auto& p : out) {
    const auto& params = table.rows[rows[pick(rng)]].params;
    p.reserve(cols.size());
    for (const auto c : cols) p.push_back(params[c]);
  }
  return out;
}

double funnel_marginal_logpdf(const FunnelConfig& cfg, double psi, double theta0, double log_z) {
  const double b = cfg.theta_bound;
  if (theta0 < -b || theta0 > b) return kNegInf;
  const double mass = std::erf(b * std::exp(-0.5 * psi) / std::numbers::sqrt2);
  const double rest = static_cast<double>(cfg.groups - 1) * (std::log(mass) - std::log(2.0 * b));
  return normal_logpdf(psi, 0.0, cfg.sigma_psi_sq) - std::log(2.0 * b) + normal_logpdf(theta0, 0.0, std::exp(psi)) +
         rest - log_z;
}

Gaussian2 hg_posterior_psi_theta0(std::span<const double> y, const HierGaussConfig& cfg) {
  const auto n = static_cast<double>(y.size());
  const double s2 = cfg.sigma_psi * cfg.sigma_psi;
  const double t2 = cfg.sigma_theta * cfg.sigma_theta;
  const double o2 = cfg.sigma_obs * cfg.sigma_obs;
  double ysum = 0.0;
  for (const double v : y) ysum += v;
  const double vp = 1.0 / (1.0 / s2 + n / (t2 + o2));
  const double mp = vp * (cfg.mu0 / s2 + ysum / (t2 + o2));
  const double v = 1.0 / (1.0 / t2 + 1.0 / o2);
  Gaussian2 g{};
  g.mean[0] = mp;
  g.mean[1] = v * (mp / t2 + y[0] / o2);
  g.cov[0][0] = vp;
  g.cov[0][1] = g.cov[1][0] = v * vp / t2;
  g.cov[1][1] = v + v * v * vp / (t2 * t2);
  return g;
}

namespace {

struct FoundRun {
  fs::path dir;
  ordered_json summary;
  std::optional<double> wall;
};

std::string sanitize(const fs::path& rel) {
  std::string s = rel.generic_string();
  for (auto& c : s) {
    if (c == '/' || c == '=' || c == ' ') c = '_';
  }
  return s.empty() ? std::string{"run"} : s;
}

HierGaussConfig hg_from_params(const ordered_json& p) {
  HierGaussConfig c;
  c.groups = p.at("groups").get<std::size_t>();
  c.mu0 = p.at("mu0").get<double>();
  c.sigma_psi = p.at("sigma_psi").get<double>();
  c.sigma_theta = p.at("sigma_theta").get<double>();
  c.sigma_obs = p.at("sigma_obs").get<double>();
  return c;
}

FunnelConfig funnel_from_params(const ordered_json& p) {
  FunnelConfig c;
  c.groups = p.at("groups").get<std::size_t>();
  c.sigma_psi_sq = p.at("sigma_psi_sq").get<double>();
  c.theta_bound = p.at("theta_bound").get<double>();
  return c;
}

}  // namespace

std::vector<fs::path> emit_plotdata(const fs::path& root, const fs::path& out) {
  std::vector<FoundRun> found;
  if (fs::exists(root)) {
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (!entry.is_regular_file() || entry.path().filename() != "summary.json") continue;
      FoundRun r;
      r.dir = entry.path().parent_path();
      try {
        r.summary = read_json(entry.path());
        if (fs::exists(r.dir / "timing.json")) r.wall = read_json(r.dir / "timing.json").at("wall_seconds").get<double>();
      } catch (const std::exception& e) {
        std::cerr << fmt::format("warning: skipping {}: {}\n", r.dir.string(), e.what());
        continue;
      }
      found.push_back(std::move(r));
    }
  }
  std::sort(found.begin(), found.end(), [](const FoundRun& a, const FoundRun& b) { return a.dir < b.dir; });
  std::vector<fs::path> written;
  if (found.empty()) {
    std::cerr << fmt::format("warning: no runs found under {}\n", root.string());
    return written;
  }
  fs::create_directories(out);

  struct Key {
    std::string model;
    std::string kernel;
    std::size_t groups;
    auto operator<=>(const Key&) const = default;
  };
  struct Cell {
    std::vector<double> evals, err, sigma, wall;
  };
  std::map<Key, Cell> cells;
  for (const auto& r : found) {
    const auto& s = r.summary;
    const Key key{s.at("model").get<std::string>(), s.at("config").at("kernel").get<std::string>(),
                  s.at("groups").get<std::size_t>()};
    auto& c = cells[key];
    c.evals.push_back(s.at("n_full_likelihood_equivalents").get<double>());
    c.sigma.push_back(s.at("sigma_hat").get<double>());
    if (!s.at("analytic_logz").is_null()) c.err.push_back(s.at("log_z").get<double>() - s.at("analytic_logz").get<double>());
    if (r.wall) c.wall.push_back(*r.wall);
  }

  std::string evals = "model\tkernel\tJ\tn\tevals_mean\tevals_std\n";
  std::string error = "model\tkernel\tJ\tn\tlogz_error_mean\tlogz_error_std\tsigma_hat_mean\n";
  std::string runtime = "model\tkernel\tJ\tn\truntime_mean\truntime_std\n";
  for (const auto& [k, c] : cells) {
    const auto e = mean_std(c.evals);
    evals += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", k.model, k.kernel, k.groups, e.n, fmt_double(e.mean),
                         fmt_double(e.std));
    if (!c.err.empty()) {
      const auto d = mean_std(c.err);
      error += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", k.model, k.kernel, k.groups, d.n, fmt_double(d.mean),
                           fmt_double(d.std), fmt_double(mean_std(c.sigma).mean));
    }
    if (!c.wall.empty()) {
      const auto w = mean_std(c.wall);
      runtime += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", k.model, k.kernel, k.groups, w.n, fmt_double(w.mean),
                             fmt_double(w.std));
    }
  }
  for (const auto& [name, text] : {std::pair{"evals_vs_J.tsv", &evals}, std::pair{"evidence_error_vs_J.tsv", &error},
                                   std::pair{"runtime_vs_J.tsv", &runtime}}) {
    write_text(out / name, *text);
    written.push_back(out / name);
  }

  bool funnel_grid_done = false;
  for (const auto& r : found) {
    const auto& s = r.summary;
    const std::string model = s.at("model").get<std::string>();
    if (model != "hier_gauss" && model != "funnel") continue;
    const std::string label = sanitize(fs::relative(r.dir, root));
    if (!fs::exists(r.dir / "dead.txt")) {
      std::cerr << fmt::format("warning: {} has no dead.txt\n", r.dir.string());
      continue;
    }
    const DeadTable table = read_dead_points(r.dir / "dead.txt");
    const double log_z = s.at("log_z").get<double>();
    std::string scatter = "psi\ttheta0\tweight\n";
    for (const auto& row : table.rows) {
      if (row.params.size() < 2) continue;
      scatter += fmt::format("{}\t{}\t{}\n", fmt_double(row.params[0]), fmt_double(row.params[1]),
                             fmt_double(std::exp(row.log_weight - log_z)));
    }
    const fs::path sp = out / fmt::format("scatter_{}.tsv", label);
    write_text(sp, scatter);
    written.push_back(sp);

    if (!s.contains("model_params")) continue;
    const auto& params = s.at("model_params");
    if (model == "hier_gauss" && fs::exists(r.dir / "data.txt")) {
      const auto data = read_observations(r.dir / "data.txt");
      const auto g = hg_posterior_psi_theta0(data.values, hg_from_params(params));
      const fs::path cp = out / fmt::format("contour_{}.tsv", label);
      write_text(cp, fmt::format("mean_psi\tmean_theta0\tvar_psi\tcov_psi_theta0\tvar_theta0\n{}\t{}\t{}\t{}\t{}\n",
                                 fmt_double(g.mean[0]), fmt_double(g.mean[1]), fmt_double(g.cov[0][0]),
                                 fmt_double(g.cov[0][1]), fmt_double(g.cov[1][1])));
      written.push_back(cp);
    } else if (model == "funnel" && !funnel_grid_done) {
      const FunnelConfig fc = funnel_from_params(params);
      const double lz = funnel_analytic_logz(fc);
      std::string grid = "psi\ttheta0\tlog_density\n";
      constexpr int kN = 121;
      for (int i = 0; i < kN; ++i) {
        const double psi = -9.0 + 18.0 * i / (kN - 1);
        for (int j = 0; j < kN; ++j) {
          const double th = -30.0 + 60.0 * j / (kN - 1);
          grid += fmt::format("{}\t{}\t{}\n", fmt_double(psi), fmt_double(th),
                              fmt_double(funnel_marginal_logpdf(fc, psi, th, lz)));
        }
      }
      write_text(out / "funnel_contour.tsv", grid);
      written.push_back(out / "funnel_contour.tsv");
      funnel_grid_done = true;
    }
  }
  return written;
}

}  // namespace nsswig
