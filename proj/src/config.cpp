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

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <nsswig/diag.hpp>

namespace nsswig {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::hier_gauss:
      return "hier_gauss";
    case ModelKind::funnel:
      return "funnel";
    case ModelKind::sv:
      return "sv";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "hier_gauss") return ModelKind::hier_gauss;
  if (text == "funnel") return ModelKind::funnel;
  if (text == "sv") return ModelKind::sv;
  throw std::invalid_argument(fmt::format("unknown model '{}' (expected hier_gauss, funnel or sv)", text));
}

void ExperimentConfig::validate() const {
  run.validate();
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (sweep && sweep->values.empty()) throw std::invalid_argument("sweep needs at least one value");
  if (model.groups < 1) throw std::invalid_argument("model.groups must be >= 1");
}

namespace {

std::string fmt_double(double x) { return fmt::format("{:.17g}", x); }

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(fmt::format("'{}' is not a number", s));
  }
  if (used != s.size()) throw std::invalid_argument(fmt::format("'{}' is not a number", s));
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument(fmt::format("'{}' is not a non-negative integer", s));
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw std::invalid_argument(fmt::format("'{}' is out of range", s));
  }
}

std::size_t to_size(const std::string& s) { return static_cast<std::size_t>(to_u64(s)); }

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument(fmt::format("'{}' is not a boolean", s));
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  boost::split(parts, s, boost::is_any_of(","));
  for (auto& p : parts) boost::trim(p);
  std::erase_if(parts, [](const std::string& p) { return p.empty(); });
  return parts;
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

using Registry = std::vector<std::pair<std::string, Field>>;

template <typename Get, typename Set>
void add(Registry& r, std::string name, Get get, Set set) {
  r.emplace_back(std::move(name), Field{set, get});
}

const Registry& registry() {
  static const Registry reg = [] {
    Registry r;
    using C = ExperimentConfig;
    using S = const std::string&;
    using Opt = std::optional<std::string>;
    // [model]
    add(r, "model.name", [](const C& c) -> Opt { return to_string(c.model.kind); },
        [](C& c, S v) { c.model.kind = parse_model_kind(v); });
    add(r, "model.groups", [](const C& c) -> Opt { return std::to_string(c.model.groups); },
        [](C& c, S v) { c.model.groups = to_size(v); });
    add(r, "model.data_seed",
        [](const C& c) -> Opt { return c.model.data_seed ? Opt{std::to_string(*c.model.data_seed)} : std::nullopt; },
        [](C& c, S v) { c.model.data_seed = to_u64(v); });
    add(r, "model.force_full_recompute_on_psi",
        [](const C& c) -> Opt { return from_bool(c.model.force_full_recompute_on_psi); },
        [](C& c, S v) { c.model.force_full_recompute_on_psi = to_bool(v); });
    add(r, "model.mu0", [](const C& c) -> Opt { return fmt_double(c.model.hg.mu0); },
        [](C& c, S v) { c.model.hg.mu0 = to_double(v); });
    add(r, "model.sigma_psi", [](const C& c) -> Opt { return fmt_double(c.model.hg.sigma_psi); },
        [](C& c, S v) { c.model.hg.sigma_psi = to_double(v); });
    add(r, "model.sigma_theta", [](const C& c) -> Opt { return fmt_double(c.model.hg.sigma_theta); },
        [](C& c, S v) { c.model.hg.sigma_theta = to_double(v); });
    add(r, "model.sigma_obs", [](const C& c) -> Opt { return fmt_double(c.model.hg.sigma_obs); },
        [](C& c, S v) { c.model.hg.sigma_obs = to_double(v); });
    add(r, "model.psi_true", [](const C& c) -> Opt { return fmt_double(c.model.hg.psi_true); },
        [](C& c, S v) { c.model.hg.psi_true = to_double(v); });
    add(r, "model.sigma_psi_sq", [](const C& c) -> Opt { return fmt_double(c.model.funnel.sigma_psi_sq); },
        [](C& c, S v) { c.model.funnel.sigma_psi_sq = to_double(v); });
    add(r, "model.theta_bound", [](const C& c) -> Opt { return fmt_double(c.model.funnel.theta_bound); },
        [](C& c, S v) { c.model.funnel.theta_bound = to_double(v); });
    add(r, "model.sv_mu", [](const C& c) -> Opt { return fmt_double(c.model.sv.mu); },
        [](C& c, S v) { c.model.sv.mu = to_double(v); });
    add(r, "model.sv_beta", [](const C& c) -> Opt { return fmt_double(c.model.sv.beta); },
        [](C& c, S v) { c.model.sv.beta = to_double(v); });
    add(r, "model.sv_sigma", [](const C& c) -> Opt { return fmt_double(c.model.sv.sigma); },
        [](C& c, S v) { c.model.sv.sigma = to_double(v); });
    // [run]
    add(r, "run.live_points", [](const C& c) -> Opt { return std::to_string(c.run.live_points); },
        [](C& c, S v) { c.run.live_points = to_size(v); });
    add(r, "run.batch", [](const C& c) -> Opt { return std::to_string(c.run.batch); },
        [](C& c, S v) { c.run.batch = to_size(v); });
    add(r, "run.epsilon", [](const C& c) -> Opt { return fmt_double(c.run.epsilon); },
        [](C& c, S v) { c.run.epsilon = to_double(v); });
    add(r, "run.kernel", [](const C& c) -> Opt { return to_string(c.run.kernel); },
        [](C& c, S v) { c.run.kernel = parse_kernel_kind(v); });
    add(r, "run.seed", [](const C& c) -> Opt { return std::to_string(c.run.seed); },
        [](C& c, S v) { c.run.seed = to_u64(v); });
    add(r, "run.sweeps", [](const C& c) -> Opt { return std::to_string(c.run.kernel_cfg.sweeps); },
        [](C& c, S v) { c.run.kernel_cfg.sweeps = to_size(v); });
    add(r, "run.psi_steps",
        [](const C& c) -> Opt {
          const auto& o = c.run.kernel_cfg.psi_steps;
          return o ? Opt{std::to_string(*o)} : std::nullopt;
        },
        [](C& c, S v) { c.run.kernel_cfg.psi_steps = to_size(v); });
    add(r, "run.theta_steps",
        [](const C& c) -> Opt {
          const auto& o = c.run.kernel_cfg.theta_steps;
          return o ? Opt{std::to_string(*o)} : std::nullopt;
        },
        [](C& c, S v) { c.run.kernel_cfg.theta_steps = to_size(v); });
    add(r, "run.nss_steps",
        [](const C& c) -> Opt {
          const auto& o = c.run.kernel_cfg.nss_steps;
          return o ? Opt{std::to_string(*o)} : std::nullopt;
        },
        [](C& c, S v) { c.run.kernel_cfg.nss_steps = to_size(v); });
    add(r, "run.max_stepout", [](const C& c) -> Opt { return std::to_string(c.run.kernel_cfg.limits.max_stepout); },
        [](C& c, S v) { c.run.kernel_cfg.limits.max_stepout = static_cast<int>(to_size(v)); });
    add(r, "run.max_shrink", [](const C& c) -> Opt { return std::to_string(c.run.kernel_cfg.limits.max_shrink); },
        [](C& c, S v) { c.run.kernel_cfg.limits.max_shrink = static_cast<int>(to_size(v)); });
    add(r, "run.shuffle_sweep", [](const C& c) -> Opt { return from_bool(c.run.kernel_cfg.shuffle_sweep); },
        [](C& c, S v) { c.run.kernel_cfg.shuffle_sweep = to_bool(v); });
    add(r, "run.store_params_every", [](const C& c) -> Opt { return std::to_string(c.run.store_params_every); },
        [](C& c, S v) { c.run.store_params_every = to_size(v); });
    add(r, "run.pool_local_cov",
        [](const C& c) -> Opt { return c.run.pool_local_cov ? Opt{from_bool(*c.run.pool_local_cov)} : std::nullopt; },
        [](C& c, S v) { c.run.pool_local_cov = to_bool(v); });
    add(r, "run.threads", [](const C& c) -> Opt { return std::to_string(c.run.threads); },
        [](C& c, S v) { c.run.threads = to_size(v); });
    add(r, "run.max_iterations", [](const C& c) -> Opt { return std::to_string(c.run.max_iterations); },
        [](C& c, S v) { c.run.max_iterations = to_size(v); });
    // [experiment]
    add(r, "experiment.repeats", [](const C& c) -> Opt { return std::to_string(c.repeats); },
        [](C& c, S v) { c.repeats = to_size(v); });
    add(r, "experiment.output_dir", [](const C& c) -> Opt { return c.output_dir.string(); },
        [](C& c, S v) { c.output_dir = v; });
    add(r, "experiment.sweep",
        [](const C& c) -> Opt {
          if (!c.sweep) return std::nullopt;
          return c.sweep->field + ": " + boost::join(c.sweep->values, ", ");
        },
        [](C& c, S v) {
          const auto colon = v.find(':');
          if (colon == std::string::npos) throw std::invalid_argument("sweep must look like 'section.key: v1, v2'");
          SweepSpec s;
          s.field = boost::trim_copy(v.substr(0, colon));
          s.values = split_list(v.substr(colon + 1));
          if (s.field == "experiment.sweep") throw std::invalid_argument("cannot sweep the sweep");
          ExperimentConfig probe = c;
          for (const auto& value : s.values) set_field(probe, s.field, value);
          c.sweep = std::move(s);
        });
    add(r, "experiment.scaling_groups",
        [](const C& c) -> Opt {
          std::vector<std::string> parts;
          for (const auto g : c.scaling_groups) parts.push_back(std::to_string(g));
          return boost::join(parts, ", ");
        },
        [](C& c, S v) {
          c.scaling_groups.clear();
          for (const auto& p : split_list(v)) c.scaling_groups.push_back(to_size(p));
        });
    add(r, "experiment.scaling_kernels",
        [](const C& c) -> Opt {
          std::vector<std::string> parts;
          for (const auto k : c.scaling_kernels) parts.push_back(to_string(k));
          return boost::join(parts, ", ");
        },
        [](C& c, S v) {
          c.scaling_kernels.clear();
          for (const auto& p : split_list(v)) c.scaling_kernels.push_back(parse_kernel_kind(p));
        });
    return r;
  }();
  return reg;
}

const Field* find_field(const std::string& name) {
  for (const auto& [key, field] : registry()) {
    if (key == name) return &field;
  }
  return nullptr;
}

}  // namespace

void set_field(ExperimentConfig& cfg, const std::string& field, const std::string& value) {
  const Field* f = find_field(field);
  if (f == nullptr) throw std::invalid_argument(fmt::format("unknown config key '{}'", field));
  try {
    f->set(cfg, boost::trim_copy(value));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(fmt::format("{}: {}", field, e.what()));
  }
}

ExperimentConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument(fmt::format("config: {}", e.what()));
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw std::invalid_argument(fmt::format("config key '{}' is outside a section", section));
    for (const auto& [key, value] : body) set_field(cfg, section + "." + key, value.data());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument(fmt::format("cannot read config {}", path.string()));
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& [key, field] : registry()) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    const auto value = field.get(cfg);
    if (!value) continue;
    if (sec != section) {
      if (!section.empty()) out += '\n';
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += fmt::format("{} = {}\n", key.substr(dot + 1), *value);
  }
  return out;
}

}  // namespace nsswig
