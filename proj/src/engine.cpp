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

#include <nsswig/engine.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/format.h>

namespace nsswig {

namespace {

// Stream tags for derive_seed paths.
constexpr std::uint64_t kInitTag = 1;
constexpr std::uint64_t kParentTag = 2;
constexpr std::uint64_t kMutateTag = 3;

}  // namespace

std::string to_string(KernelKind kind) { return kind == KernelKind::swig ? "swig" : "nss"; }

KernelKind parse_kernel_kind(const std::string& text) {
  if (text == "swig") return KernelKind::swig;
  if (text == "nss") return KernelKind::nss;
  throw std::invalid_argument(fmt::format("unknown kernel '{}' (expected swig or nss)", text));
}

void RunConfig::validate() const {
  if (batch < 1 || batch >= live_points) {
    throw std::invalid_argument(fmt::format("need 1 <= k < m, got k = {}, m = {}", batch, live_points));
  }
  if (!(epsilon < 0.0)) throw std::invalid_argument("termination epsilon must be negative");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
}

double LiveSet::max_loglike() const noexcept {
  double best = kNegInf;
  for (const auto& p : particles) best = std::max(best, p.total_loglike);
  return best;
}

void EvidenceAccumulator::add(double log_like, double log_volume_weight) {
  const double lw = log_volume_weight + log_like;
  if (lw == kNegInf) return;
  const double z_old = log_z;
  const double z_new = log_add_exp(z_old, lw);
  if (z_old == kNegInf) {
    h = log_like - z_new;
  } else {
    h = std::exp(lw - z_new) * log_like + std::exp(z_old - z_new) * (h + z_old) - z_new;
  }
  log_z = z_new;
}

BatchSelection select_batch(std::span<const double> loglikes, std::size_t k) {
  if (k == 0 || k > loglikes.size()) throw std::invalid_argument("batch size out of range");
  std::vector<std::size_t> order(loglikes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto mid = order.begin() + static_cast<std::ptrdiff_t>(k);
  std::partial_sort(order.begin(), mid, order.end(), [&](std::size_t a, std::size_t b) {
    return loglikes[a] < loglikes[b] || (loglikes[a] == loglikes[b] && a < b);
  });
  order.resize(k);
  BatchSelection out;
  out.lstar = loglikes[order.back()];
  out.indices = std::move(order);
  return out;
}

VolumeCompression compress_volume(double log_x, std::size_t m, std::size_t k) {
  if (k > m) throw std::invalid_argument("cannot delete more points than are live");
  VolumeCompression out;
  out.log_x.reserve(k);
  double x = log_x;
  for (std::size_t r = 0; r < k; ++r) {
    x -= 1.0 / static_cast<double>(m - r);
    out.log_x.push_back(x);
  }
  out.new_log_x = x;
  return out;
}

void update_evidence(EvidenceAccumulator& acc, std::span<const double> loglikes, std::span<const double> log_x_after,
                     std::size_t iteration, std::span<const std::vector<double>> params) {
  if (loglikes.size() != log_x_after.size()) throw std::invalid_argument("loglikes and volumes differ in length");
  double prev = acc.log_x;
  for (std::size_t i = 0; i < loglikes.size(); ++i) {
    const double vol = log_sub_exp(prev, log_x_after[i]);
    acc.add(loglikes[i], vol);
    DeadRecord rec;
    rec.iteration = iteration;
    rec.log_like = loglikes[i];
    rec.log_x = log_x_after[i];
    rec.log_weight = vol + loglikes[i];
    if (std::isnan(rec.log_weight)) rec.log_weight = kNegInf;
    if (!params.empty()) rec.params = params[i];
    acc.dead.push_back(std::move(rec));
    prev = log_x_after[i];
  }
  acc.log_x = prev;
  if (std::isnan(acc.log_z) || std::isnan(acc.h)) {
    throw NumericalError(fmt::format("evidence became NaN at iteration {}", iteration));
  }
}

bool termination_check(const EvidenceAccumulator& acc, double max_live_loglike, double epsilon) {
  if (acc.log_z == kNegInf) return false;
  return acc.log_x + max_live_loglike - acc.log_z < epsilon;
}

double effective_sample_size(std::span<const double> log_weights) {
  const double lse = log_sum_exp(log_weights);
  if (lse == kNegInf) return 0.0;
  std::vector<double> twice(log_weights.size());
  std::transform(log_weights.begin(), log_weights.end(), twice.begin(), [](double w) { return 2.0 * w; });
  return std::exp(2.0 * lse - log_sum_exp(twice));
}

std::vector<double> RunResult::posterior_weights() const {
  std::vector<double> w(dead.size());
  std::transform(dead.begin(), dead.end(), w.begin(), [&](const DeadRecord& r) { return std::exp(r.log_weight - log_z); });
  return w;
}

namespace {

bool keep_params(std::size_t record_index, std::size_t every) { return every > 0 && record_index % every == 0; }

}  // namespace

RunResult finalize(EvidenceAccumulator acc, const LiveSet& live, std::size_t iteration, std::size_t live_points,
                   std::size_t store_params_every) {
  const std::size_t n = live.size();
  std::vector<double> ll(n);
  for (std::size_t i = 0; i < n; ++i) ll[i] = live.particles[i].total_loglike;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ll[a] < ll[b]; });

  std::vector<double> sorted_ll(n);
  std::vector<double> log_x(n);
  std::vector<std::vector<double>> params(n);
  const auto m = static_cast<double>(live_points);
  for (std::size_t i = 0; i < n; ++i) {
    sorted_ll[i] = ll[order[i]];
    log_x[i] = acc.log_x + std::log(static_cast<double>(n - 1 - i) / m);
    if (keep_params(acc.dead.size() + i, store_params_every)) params[i] = live.particles[order[i]].joint();
  }
  update_evidence(acc, sorted_ll, log_x, iteration, params);

  RunResult out;
  out.log_z = acc.log_z;
  out.h = acc.h;
  out.sigma_hat = std::sqrt(std::max(acc.h, 0.0) / m);
  out.n_iterations = iteration;
  std::vector<double> lw(acc.dead.size());
  std::transform(acc.dead.begin(), acc.dead.end(), lw.begin(), [](const DeadRecord& r) { return r.log_weight; });
  out.ess = effective_sample_size(lw);
  out.dead = std::move(acc.dead);
  return out;
}

namespace {

/// Runs body(slot) for slot in [0, n) on up to `threads` workers; rethrows the first failure by slot order.
template <typename Body>
void parallel_for(std::size_t n, std::size_t threads, Body&& body) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t count = std::min(threads, n);
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

RunResult run_nested_sampling(const Model& model, const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  const auto& dims = model.dims();
  cfg.kernel_cfg.validate(dims);
  const std::size_t m = cfg.live_points;
  const std::size_t k = cfg.batch;
  const bool pooled = cfg.pool_local_cov.value_or(default_pool_local_cov(dims));
  const std::size_t threads = cfg.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : cfg.threads;

  LiveSet live;
  live.particles.resize(m);
  parallel_for(m, threads, [&](std::size_t i) {
    Rng rng = make_stream(cfg.seed, {kInitTag, i});
    live.particles[i] = model.sample_prior(rng);
  });
  const std::uint64_t init_calls = static_cast<std::uint64_t>(m) * dims.groups;

  EvidenceAccumulator acc;
  KernelStats stats;
  std::vector<double> loglikes(m);
  std::vector<KernelStats> slot_stats(k);
  std::vector<char> deleted(m);
  std::size_t iteration = 0;
  bool done = false;

  while (!done) {
    for (std::size_t i = 0; i < m; ++i) {
      loglikes[i] = live.particles[i].total_loglike;
      if (std::isnan(loglikes[i])) throw NumericalError(fmt::format("NaN log-likelihood at iteration {}", iteration));
    }
    const auto sel = select_batch(loglikes, k);
    const auto vc = compress_volume(acc.log_x, m, k);

    std::vector<double> batch_ll(k);
    std::vector<std::vector<double>> batch_params(k);
    for (std::size_t i = 0; i < k; ++i) {
      const auto& p = live.particles[sel.indices[i]];
      batch_ll[i] = p.total_loglike;
      if (keep_params(acc.dead.size() + i, cfg.store_params_every)) batch_params[i] = p.joint();
    }
    update_evidence(acc, batch_ll, vc.log_x, iteration, batch_params);

    std::fill(deleted.begin(), deleted.end(), 0);
    for (const auto i : sel.indices) deleted[i] = 1;
    std::vector<std::size_t> survivors;
    std::vector<std::size_t> feasible;
    survivors.reserve(m - k);
    for (std::size_t i = 0; i < m; ++i) {
      if (deleted[i]) continue;
      survivors.push_back(i);
      if (live.particles[i].total_loglike > sel.lstar) feasible.push_back(i);
    }
    const auto& pool = feasible.empty() ? survivors : feasible;

    std::optional<BlockCovariance> block_cov;
    std::optional<CovBlock> joint_cov;
    if (cfg.kernel == KernelKind::swig) {
      block_cov = estimate_block_cov(live.particles, dims, pooled, survivors);
    } else {
      joint_cov = estimate_joint_cov(live.particles, dims, survivors);
    }

    std::vector<std::size_t> parents(k);
    {
      Rng prng = make_stream(cfg.seed, {kParentTag, iteration});
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      for (auto& p : parents) p = pool[pick(prng)];
    }

    std::vector<ParamState> children(k);
    parallel_for(k, threads, [&](std::size_t s) {
      Rng rng = make_stream(cfg.seed, {kMutateTag, iteration, s});
      KernelStats local;
      if (cfg.kernel == KernelKind::swig) {
        children[s] = swig_replace(model, live.particles[parents[s]], sel.lstar, *block_cov, cfg.kernel_cfg, rng, local);
      } else {
        children[s] = nss_replace(model, live.particles[parents[s]], sel.lstar, *joint_cov, cfg.kernel_cfg, rng, local);
      }
      slot_stats[s] = local;
    });
    for (std::size_t s = 0; s < k; ++s) {
      if (std::isnan(children[s].total_loglike)) {
        throw NumericalError(fmt::format("kernel produced a NaN log-likelihood at iteration {}", iteration));
      }
      stats += slot_stats[s];
      live.particles[sel.indices[s]] = std::move(children[s]);
    }

    ++iteration;
    done = termination_check(acc, live.max_loglike(), cfg.epsilon) || iteration >= cfg.max_iterations;
  }

  const bool capped = !termination_check(acc, live.max_loglike(), cfg.epsilon);
  RunResult out = finalize(std::move(acc), live, iteration, m, cfg.store_params_every);
  out.model_name = model.name();
  out.dims = dims;
  out.config = cfg;
  out.config.kernel_cfg.observer = nullptr;
  out.stats = stats;
  out.n_group_calls = stats.group_calls + init_calls;
  out.full_equivalents = static_cast<double>(out.n_group_calls) / static_cast<double>(dims.groups);
  out.analytic_logz = model.analytic_logz();
  out.hit_iteration_cap = capped;
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::vector<std::vector<double>> posterior_samples(const RunResult& run, std::size_t n, Rng& rng) {
  std::vector<double> w;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < run.dead.size(); ++i) {
    if (run.dead[i].params.empty()) continue;
    idx.push_back(i);
    w.push_back(std::exp(run.dead[i].log_weight - run.log_z));
  }
  if (idx.empty()) throw std::invalid_argument("run stored no parameters");
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::vector<std::vector<double>> out(n);
  for (auto& x : out) x = run.dead[idx[pick(rng)]].params;
  return out;
}

}  // namespace nsswig
