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

#include <nsswig/io.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace nsswig {

using nlohmann::ordered_json;

std::vector<std::string> param_names(const ModelDims& dims, const std::vector<std::string>& psi_names) {
  std::vector<std::string> out;
  out.reserve(dims.d_total());
  for (std::size_t i = 0; i < dims.d_psi; ++i) {
    if (psi_names.size() == dims.d_psi) {
      out.push_back(psi_names[i]);
    } else {
      out.push_back(dims.d_psi == 1 ? std::string{"psi"} : fmt::format("psi_{}", i));
    }
  }
  for (std::size_t j = 0; j < dims.groups; ++j) {
    for (std::size_t a = 0; a < dims.d_theta; ++a) {
      out.push_back(dims.d_theta == 1 ? fmt::format("theta{}", j) : fmt::format("theta{}_{}", j, a));
    }
  }
  return out;
}

namespace {

std::string fmt_double(double x) { return fmt::format("{:.17g}", x); }

double parse_double(const std::string& tok) {
  if (tok == "-inf") return kNegInf;
  if (tok == "inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(tok, &used);
  if (used != tok.size()) throw std::runtime_error(fmt::format("bad number '{}'", tok));
  return v;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  os << text;
  if (!os) throw std::runtime_error(fmt::format("failed writing {}", path.string()));
}

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

}  // namespace

void write_dead_points(const std::filesystem::path& path, const RunResult& run,
                       const std::vector<std::string>& psi_names) {
  std::string text = "# iteration log_like log_x log_weight";
  for (const auto& name : param_names(run.dims, psi_names)) text += " " + name;
  text += '\n';
  for (const auto& r : run.dead) {
    text += fmt::format("{} {} {} {}", r.iteration, fmt_double(r.log_like), fmt_double(r.log_x),
                        fmt_double(r.log_weight));
    for (const double p : r.params) text += " " + fmt_double(p);
    text += '\n';
  }
  write_text(path, text);
}

DeadTable read_dead_points(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  DeadTable out;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) {
    throw std::runtime_error(fmt::format("{}: missing header", path.string()));
  }
  {
    std::istringstream hs(line.substr(2));
    std::string tok;
    while (hs >> tok) out.columns.push_back(tok);
  }
  if (out.columns.size() < 4) throw std::runtime_error(fmt::format("{}: header too short", path.string()));
  const std::size_t n_params = out.columns.size() - 4;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<std::string> toks;
    std::string tok;
    while (ls >> tok) toks.push_back(tok);
    if (toks.size() != 4 && toks.size() != 4 + n_params) {
      throw std::runtime_error(fmt::format("{}: row with {} columns", path.string(), toks.size()));
    }
    DeadRecord r;
    r.iteration = std::stoull(toks[0]);
    r.log_like = parse_double(toks[1]);
    r.log_x = parse_double(toks[2]);
    r.log_weight = parse_double(toks[3]);
    for (std::size_t i = 4; i < toks.size(); ++i) r.params.push_back(parse_double(toks[i]));
    out.rows.push_back(std::move(r));
  }
  return out;
}

ordered_json run_summary(const RunResult& run) {
  const auto& c = run.config;
  const auto& kc = c.kernel_cfg;
  ordered_json config = {
      {"live_points", c.live_points},
      {"batch", c.batch},
      {"epsilon", c.epsilon},
      {"kernel", to_string(c.kernel)},
      {"sweeps", kc.sweeps},
      {"psi_steps", kc.psi_steps_for(run.dims)},
      {"theta_steps", kc.theta_steps_for(run.dims)},
      {"nss_steps", kc.nss_steps_for(run.dims)},
      {"max_stepout", kc.limits.max_stepout},
      {"max_shrink", kc.limits.max_shrink},
      {"shuffle_sweep", kc.shuffle_sweep},
      {"store_params_every", c.store_params_every},
      {"pool_local_cov", c.pool_local_cov.value_or(default_pool_local_cov(run.dims))},
      {"max_iterations", c.max_iterations},
  };
  const auto& s = run.stats;
  ordered_json stats = {
      {"psi_checks", s.psi_checks},       {"local_checks", s.local_checks},
      {"joint_checks", s.joint_checks},   {"recompute_calls", s.recompute_calls},
      {"slice_moves", s.slice_moves()},   {"psi_stalls", s.psi_slice.stalls},
      {"local_stalls", s.local_slice.stalls}, {"joint_stalls", s.joint_slice.stalls},
  };
  ordered_json out = {
      {"model", run.model_name},
      {"d_psi", run.dims.d_psi},
      {"groups", run.dims.groups},
      {"d_theta", run.dims.d_theta},
      {"seed", c.seed},
      {"log_z", run.log_z},
      {"sigma_hat", run.sigma_hat},
      {"h", run.h},
      {"ess", run.ess},
      {"n_iterations", run.n_iterations},
      {"n_full_likelihood_equivalents", run.full_equivalents},
      {"n_group_calls", run.n_group_calls},
      {"stall_count", s.stalls()},
      {"analytic_logz", optional_number(run.analytic_logz)},
      {"hit_iteration_cap", run.hit_iteration_cap},
      {"config", config},
      {"kernel_stats", stats},
  };
  return out;
}

void write_summary(const std::filesystem::path& path, const RunResult& run) {
  write_text(path, run_summary(run).dump(2) + "\n");
}

void write_timing(const std::filesystem::path& path, const RunResult& run) {
  ordered_json t = {{"wall_seconds", run.wall_seconds}};
  write_text(path, t.dump(2) + "\n");
}

ordered_json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  return ordered_json::parse(is);
}

}  // namespace nsswig
