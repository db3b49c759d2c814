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

#include <nsswig/kernel.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <fmt/format.h>

#include <nsswig/math.hpp>

namespace nsswig {

void KernelConfig::validate(const ModelDims& dims) const {
  if (sweeps < 1) throw std::invalid_argument("kernel needs at least one sweep");
  if (dims.d_psi > 0 && psi_steps_for(dims) < 1) throw std::invalid_argument("psi_steps must be >= 1");
  if (theta_steps_for(dims) < 1) throw std::invalid_argument("theta_steps must be >= 1");
  if (nss_steps_for(dims) < 1) throw std::invalid_argument("nss_steps must be >= 1");
  if (limits.max_stepout < 0 || limits.max_shrink < 1) throw std::invalid_argument("invalid slice limits");
}

KernelStats& KernelStats::operator+=(const KernelStats& o) noexcept {
  group_calls += o.group_calls;
  psi_checks += o.psi_checks;
  local_checks += o.local_checks;
  joint_checks += o.joint_checks;
  recompute_calls += o.recompute_calls;
  psi_slice += o.psi_slice;
  local_slice += o.local_slice;
  joint_slice += o.joint_slice;
  return *this;
}

void psi_update(const Model& model, ParamState& state, double lstar, const BlockCovariance& cov,
                const KernelConfig& cfg, Rng& rng, KernelStats& stats) {
  const auto& dims = model.dims();
  if (dims.d_psi == 0) return;
  if (!cov.psi) throw KernelInvariantError("covariance snapshot has no hyperparameter block");

  const std::size_t dp = dims.d_psi;
  const std::size_t groups = dims.groups;
  const bool needs_likelihood = model.psi_move_needs_likelihood();

  std::vector<double> dir(dp);
  std::vector<double> psi0(dp);
  std::vector<double> cand(dp);
  std::vector<double> best_psi(dp);
  std::vector<double> ell_scratch(groups);
  std::vector<double> best_ell(groups);

  for (std::size_t step = 0; step < cfg.psi_steps_for(dims); ++step) {
    draw_direction(*cov.psi, rng, dir);
    psi0 = state.psi;
    const double f0 = model.log_joint_prior(psi0, state.theta);
    const double level = f0 + std::log(uniform_open0(rng));
    ++stats.psi_slice.density_evals;

    double best_total = state.total_loglike;
    double best_prior = f0;
    auto in_slice = [&](double t) {
      for (std::size_t a = 0; a < dp; ++a) cand[a] = psi0[a] + t * dir[a];
      ++stats.psi_slice.density_evals;
      const double lp = model.log_joint_prior(cand, state.theta);
      if (!(lp > level)) return false;
      double total = state.total_loglike;
      if (needs_likelihood) {
        ++stats.psi_checks;
        ++stats.psi_slice.constraint_evals;
        stats.group_calls += groups;
        total = model.total_loglike(cand, state.theta, ell_scratch);
      }
      if (!(total > lstar)) return false;
      best_total = total;
      best_prior = lp;
      best_psi = cand;
      if (needs_likelihood) std::swap(best_ell, ell_scratch);
      return true;
    };
    const auto res = slice_line(in_slice, rng, cfg.limits, stats.psi_slice);
    if (!res.stalled) {
      state.psi = best_psi;
      state.log_prior = best_prior;
      if (needs_likelihood) {
        state.ell = best_ell;
        state.total_loglike = best_total;
      }
    }
  }

  if (needs_likelihood) {
    state.total_loglike = model.total_loglike(state.psi, state.theta, state.ell);
    stats.group_calls += groups;
    stats.recompute_calls += groups;
  }
  state.log_prior = model.log_joint_prior(state.psi, state.theta);
  if (cfg.observer) cfg.observer(StepEvent{StepKind::psi, state, lstar, 0, lstar});
}

namespace {

std::vector<std::size_t> sweep_order(std::size_t n, bool shuffle, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) std::shuffle(order.begin(), order.end(), rng);
  return order;
}

/// Shared body of the iid and Markov sweeps; `local_logf(k, candidate)` is the block's
/// conditional prior given everything else.
template <typename LocalLogf>
void budget_sweep(const Model& model, ParamState& state, double lstar, const BlockCovariance& cov,
                  const KernelConfig& cfg, Rng& rng, KernelStats& stats, LocalLogf&& local_logf) {
  const auto& dims = model.dims();
  const std::size_t d = dims.d_theta;
  std::vector<double> dir(d);
  std::vector<double> theta0(d);
  std::vector<double> cand(d);
  std::vector<double> best(d);

  for (const std::size_t k : sweep_order(dims.groups, cfg.shuffle_sweep, rng)) {
    for (std::size_t step = 0; step < cfg.theta_steps_for(dims); ++step) {
      draw_direction(cov.local_block(k), rng, dir);
      auto blk = state.block(k, d);
      std::copy(blk.begin(), blk.end(), theta0.begin());
      const double lp0 = local_logf(k, std::span<const double>{theta0});
      const double level = lp0 + std::log(uniform_open0(rng));
      ++stats.local_slice.density_evals;

      const double ell_old = state.ell[k];
      const double budget = compute_budget(lstar, state.total_loglike, ell_old);
      double best_ell = ell_old;
      double best_lp = lp0;
      auto in_slice = [&](double t) {
        for (std::size_t a = 0; a < d; ++a) cand[a] = theta0[a] + t * dir[a];
        ++stats.local_slice.density_evals;
        const double lp = local_logf(k, std::span<const double>{cand});
        if (!(lp > level)) return false;
        ++stats.local_checks;
        ++stats.local_slice.constraint_evals;
        ++stats.group_calls;
        const double l = model.group_loglike(cand, state.psi, k);
        if (!(l > budget)) return false;
        // Same expression as the commit below, so an accepted point is feasible exactly.
        if (!(state.total_loglike - ell_old + l > lstar)) return false;
        best_ell = l;
        best_lp = lp;
        best = cand;
        return true;
      };
      const auto res = slice_line(in_slice, rng, cfg.limits, stats.local_slice);
      if (!res.stalled) {
        std::copy(best.begin(), best.end(), blk.begin());
        state.total_loglike = state.total_loglike - ell_old + best_ell;
        state.ell[k] = best_ell;
        state.log_prior += best_lp - lp0;
      }
      if (cfg.observer) cfg.observer(StepEvent{StepKind::local, state, lstar, k, budget});
    }
  }
}

}  // namespace

void local_sweep(const Model& model, ParamState& state, double lstar, const BlockCovariance& cov,
                 const KernelConfig& cfg, Rng& rng, KernelStats& stats) {
  if (model.structure() != Structure::iid) throw ModelError("local_sweep requires an iid model");
  budget_sweep(model, state, lstar, cov, cfg, rng, stats, [&](std::size_t k, std::span<const double> theta) {
    return model.log_conditional_prior(theta, state.psi, k);
  });
}

void markov_local_sweep(const Model& model, ParamState& state, double lstar, const BlockCovariance& cov,
                        const KernelConfig& cfg, Rng& rng, KernelStats& stats) {
  if (model.structure() != Structure::markov) throw ModelError("markov_local_sweep requires a Markov model");
  const std::size_t d = model.dims().d_theta;
  const std::size_t sites = model.dims().groups;
  budget_sweep(model, state, lstar, cov, cfg, rng, stats, [&](std::size_t t, std::span<const double> theta) {
    BlanketWindow w{};
    w.cur = theta;
    if (t > 0) w.prev = state.block(t - 1, d);
    if (t + 1 < sites) w.next = state.block(t + 1, d);
    return model.log_blanket_prior(t, w, state.psi);
  });
}

namespace {

void check_feasible(bool parent_feasible, const ParamState& out, double lstar, const char* kernel) {
  if (parent_feasible && !(out.total_loglike > lstar)) {
    throw KernelInvariantError(
        fmt::format("{} returned an infeasible particle (S = {}, lstar = {})", kernel, out.total_loglike, lstar));
  }
}

}  // namespace

ParamState swig_replace(const Model& model, ParamState parent, double lstar, const BlockCovariance& cov,
                        const KernelConfig& cfg, Rng& rng, KernelStats& stats) {
  const bool feasible = parent.total_loglike > lstar;
  const bool markov = model.structure() == Structure::markov;
  for (std::size_t sweep = 0; sweep < cfg.sweeps; ++sweep) {
    psi_update(model, parent, lstar, cov, cfg, rng, stats);
    if (markov) {
      markov_local_sweep(model, parent, lstar, cov, cfg, rng, stats);
    } else {
      local_sweep(model, parent, lstar, cov, cfg, rng, stats);
    }
  }
  check_feasible(feasible, parent, lstar, "swig_replace");
  return parent;
}

ParamState nss_replace(const Model& model, ParamState parent, double lstar, const CovBlock& joint_cov,
                       const KernelConfig& cfg, Rng& rng, KernelStats& stats) {
  const auto& dims = model.dims();
  const std::size_t n = dims.d_total();
  if (joint_cov.dim() != n) throw KernelInvariantError("joint covariance has the wrong dimension");
  const bool feasible = parent.total_loglike > lstar;
  const std::size_t dp = dims.d_psi;
  const std::size_t groups = dims.groups;

  std::vector<double> x0 = parent.joint();
  std::vector<double> dir(n);
  std::vector<double> cand(n);
  std::vector<double> best(n);
  std::vector<double> ell_scratch(groups);
  std::vector<double> best_ell(groups);
  const std::span<const double> cand_psi{cand.data(), dp};
  const std::span<const double> cand_theta{cand.data() + dp, n - dp};

  for (std::size_t step = 0; step < cfg.nss_steps_for(dims); ++step) {
    draw_direction(joint_cov, rng, dir);
    const double f0 = model.log_joint_prior(std::span<const double>{x0.data(), dp},
                                            std::span<const double>{x0.data() + dp, n - dp});
    const double level = f0 + std::log(uniform_open0(rng));
    ++stats.joint_slice.density_evals;
    double best_total = parent.total_loglike;
    double best_prior = f0;
    auto in_slice = [&](double t) {
      for (std::size_t a = 0; a < n; ++a) cand[a] = x0[a] + t * dir[a];
      ++stats.joint_slice.density_evals;
      const double lp = model.log_joint_prior(cand_psi, cand_theta);
      if (!(lp > level)) return false;
      ++stats.joint_checks;
      ++stats.joint_slice.constraint_evals;
      stats.group_calls += groups;
      const double total = model.total_loglike(cand_psi, cand_theta, ell_scratch);
      if (!(total > lstar)) return false;
      best_total = total;
      best_prior = lp;
      best = cand;
      std::swap(best_ell, ell_scratch);
      return true;
    };
    const auto res = slice_line(in_slice, rng, cfg.limits, stats.joint_slice);
    if (!res.stalled) {
      x0 = best;
      parent.set_joint(x0);
      parent.ell = best_ell;
      parent.total_loglike = best_total;
      parent.log_prior = best_prior;
    }
    if (cfg.observer) cfg.observer(StepEvent{StepKind::joint, parent, lstar, 0, lstar});
  }
  check_feasible(feasible, parent, lstar, "nss_replace");
  return parent;
}

}  // namespace nsswig
