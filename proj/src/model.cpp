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

#include <nsswig/model.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include <nsswig/math.hpp>

namespace nsswig {

namespace {

bool has_nan(std::span<const double> xs) noexcept {
  return std::any_of(xs.begin(), xs.end(), [](double x) { return std::isnan(x); });
}

void check_finite_input(std::span<const double> xs, const char* what) {
  if (has_nan(xs)) throw ModelError(fmt::format("NaN passed to {}", what));
}

double check_output(double value, const char* what) {
  if (std::isnan(value)) throw ModelError(fmt::format("{} returned NaN", what));
  return value;
}

}  // namespace

void ModelDims::validate() const {
  if (groups < 1) throw ModelError("model must have at least one group");
  if (d_theta < 1) throw ModelError("local blocks must have at least one dimension");
}

std::vector<double> ParamState::joint() const {
  std::vector<double> x;
  x.reserve(psi.size() + theta.size());
  x.insert(x.end(), psi.begin(), psi.end());
  x.insert(x.end(), theta.begin(), theta.end());
  return x;
}

void ParamState::set_joint(std::span<const double> x) {
  std::copy_n(x.begin(), psi.size(), psi.begin());
  std::copy(x.begin() + static_cast<std::ptrdiff_t>(psi.size()), x.end(), theta.begin());
}

double ParamState::ell_sum() const noexcept { return std::accumulate(ell.begin(), ell.end(), 0.0); }

Model::Model(ModelDims dims, Structure structure) : dims_{dims}, structure_{structure} { dims_.validate(); }

void Model::require(Structure s, const char* what) const {
  if (structure_ != s) {
    throw ModelError(fmt::format("{} called on a {} model", what, structure_ == Structure::iid ? "iid" : "Markov"));
  }
}

double Model::log_prior_hyper(std::span<const double> psi) const {
  check_finite_input(psi, "log_prior_hyper");
  return check_output(do_log_prior_hyper(psi), "log_prior_hyper");
}

double Model::log_conditional_prior(std::span<const double> theta, std::span<const double> psi,
                                    std::size_t j) const {
  require(Structure::iid, "log_conditional_prior");
  if (j >= dims_.groups) throw std::out_of_range("group index out of range");
  check_finite_input(theta, "log_conditional_prior");
  check_finite_input(psi, "log_conditional_prior");
  return check_output(do_log_conditional_prior(theta, psi, j), "log_conditional_prior");
}

double Model::log_initial_prior(std::span<const double> theta0, std::span<const double> psi) const {
  require(Structure::markov, "log_initial_prior");
  check_finite_input(theta0, "log_initial_prior");
  check_finite_input(psi, "log_initial_prior");
  return check_output(do_log_initial_prior(theta0, psi), "log_initial_prior");
}

double Model::log_transition(std::span<const double> prev, std::span<const double> cur,
                             std::span<const double> psi) const {
  require(Structure::markov, "log_transition");
  check_finite_input(prev, "log_transition");
  check_finite_input(cur, "log_transition");
  check_finite_input(psi, "log_transition");
  return check_output(do_log_transition(prev, cur, psi), "log_transition");
}

double Model::group_loglike(std::span<const double> theta, std::span<const double> psi, std::size_t j) const {
  if (j >= dims_.groups) throw std::out_of_range("group index out of range");
  if (theta.size() != dims_.d_theta || psi.size() != dims_.d_psi) {
    throw ModelError(fmt::format("group_loglike expects {} local and {} hyperparameter values, got {} and {}",
                                 dims_.d_theta, dims_.d_psi, theta.size(), psi.size()));
  }
  check_finite_input(theta, "group_loglike");
  check_finite_input(psi, "group_loglike");
  const double value = do_group_loglike(theta, psi, j);
  if (std::isnan(value)) throw ModelError(fmt::format("group_loglike returned NaN for group {}", j));
  return value;
}

double Model::log_blanket_prior(std::size_t t, const BlanketWindow& window, std::span<const double> psi) const {
  require(Structure::markov, "log_blanket_prior");
  const std::size_t sites = dims_.groups;
  if (t >= sites) throw std::out_of_range("site index out of range");
  double lp = (t == 0) ? log_initial_prior(window.cur, psi) : log_transition(window.prev, window.cur, psi);
  if (t + 1 < sites && lp != kNegInf) lp += log_transition(window.cur, window.next, psi);
  return lp;
}

double Model::log_blanket_prior(std::size_t t, const ParamState& state) const {
  const std::size_t d = dims_.d_theta;
  if (t >= dims_.groups) throw std::out_of_range("site index out of range");
  BlanketWindow w{};
  w.cur = state.block(t, d);
  if (t > 0) w.prev = state.block(t - 1, d);
  if (t + 1 < dims_.groups) w.next = state.block(t + 1, d);
  return log_blanket_prior(t, w, state.psi);
}

double Model::log_local_prior(std::span<const double> theta, std::span<const double> psi) const {
  const std::size_t d = dims_.d_theta;
  double lp = 0.0;
  if (structure_ == Structure::iid) {
    check_finite_input(theta, "log_conditional_prior");
    check_finite_input(psi, "log_conditional_prior");
    for (std::size_t j = 0; j < dims_.groups && lp != kNegInf; ++j) {
      lp += check_output(do_log_conditional_prior(theta.subspan(j * d, d), psi, j), "log_conditional_prior");
    }
  } else {
    lp = log_initial_prior(theta.subspan(0, d), psi);
    for (std::size_t t = 1; t < dims_.groups && lp != kNegInf; ++t) {
      lp += log_transition(theta.subspan((t - 1) * d, d), theta.subspan(t * d, d), psi);
    }
  }
  return lp;
}

double Model::log_joint_prior(std::span<const double> psi, std::span<const double> theta) const {
  const double hyper = log_prior_hyper(psi);
  if (hyper == kNegInf) return kNegInf;
  return hyper + log_local_prior(theta, psi);
}

double Model::total_loglike(std::span<const double> psi, std::span<const double> theta,
                            std::span<double> ell_out) const {
  const std::size_t d = dims_.d_theta;
  check_finite_input(theta, "group_loglike");
  check_finite_input(psi, "group_loglike");
  double total = 0.0;
  for (std::size_t j = 0; j < dims_.groups; ++j) {
    const double value = do_group_loglike(theta.subspan(j * d, d), psi, j);
    if (std::isnan(value)) throw ModelError(fmt::format("group_loglike returned NaN for group {}", j));
    ell_out[j] = value;
    total += value;
  }
  return total;
}

void Model::refresh(ParamState& state) const {
  state.total_loglike = total_loglike(state.psi, state.theta, state.ell);
  state.log_prior = log_joint_prior(state.psi, state.theta);
}

ParamState Model::make_state() const {
  ParamState s;
  s.psi.assign(dims_.d_psi, 0.0);
  s.theta.assign(dims_.d_local(), 0.0);
  s.ell.assign(dims_.groups, 0.0);
  return s;
}

ParamState Model::sample_prior(Rng& rng) const {
  ParamState s = make_state();
  const std::size_t d = dims_.d_theta;
  do_sample_hyper(rng, s.psi);
  if (structure_ == Structure::iid) {
    for (std::size_t j = 0; j < dims_.groups; ++j) do_sample_conditional(rng, s.psi, j, s.block(j, d));
  } else {
    do_sample_initial(rng, s.psi, s.block(0, d));
    for (std::size_t t = 1; t < dims_.groups; ++t) {
      do_sample_transition(rng, s.block(t - 1, d), s.psi, s.block(t, d));
    }
  }
  refresh(s);
  return s;
}

double Model::do_log_conditional_prior(std::span<const double>, std::span<const double>, std::size_t) const {
  throw ModelError("model does not define a conditional prior");
}
void Model::do_sample_conditional(Rng&, std::span<const double>, std::size_t, std::span<double>) const {
  throw ModelError("model does not define a conditional prior sampler");
}
double Model::do_log_initial_prior(std::span<const double>, std::span<const double>) const {
  throw ModelError("model does not define an initial-state prior");
}
double Model::do_log_transition(std::span<const double>, std::span<const double>, std::span<const double>) const {
  throw ModelError("model does not define a transition density");
}
void Model::do_sample_initial(Rng&, std::span<const double>, std::span<double>) const {
  throw ModelError("model does not define an initial-state sampler");
}
void Model::do_sample_transition(Rng&, std::span<const double>, std::span<const double>, std::span<double>) const {
  throw ModelError("model does not define a transition sampler");
}

}  // namespace nsswig
