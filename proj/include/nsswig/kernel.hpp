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

#ifndef NSSWIG_KERNEL_HPP
#define NSSWIG_KERNEL_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>

#include <nsswig/model.hpp>
#include <nsswig/slice.hpp>

/**
 * \file
 * \brief Constrained replacement kernels.
 *
 * Each kernel maps a particle with S > lstar to another one, leaving the likelihood-
 * constrained prior invariant. The Slice-within-Gibbs kernels alternate a hyperparameter
 * move with a sweep over the local blocks; local moves only ever evaluate the one group
 * likelihood they touch, checked against the budget lstar - S + ell_k. The joint-space
 * kernel is the baseline: every constraint check evaluates all J groups.
 */

namespace nsswig {

/// Thrown when a kernel breaks feasibility or cache bookkeeping.
class KernelInvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class StepKind { psi, local, joint };

/// Emitted after every slice step when an observer is installed.
struct StepEvent {
  StepKind kind;
  const ParamState& state;
  double lstar;
  std::size_t group;  ///< Site / group index for local steps; 0 otherwise.
  double budget;      ///< Budget used by a local step; lstar otherwise.
};

using StepObserver = std::function<void(const StepEvent&)>;

struct KernelConfig {
  std::size_t sweeps = 5;                  ///< Gibbs sweeps per replacement (M).
  std::optional<std::size_t> psi_steps;    ///< Hyperparameter slice steps per sweep; default d_psi.
  std::optional<std::size_t> theta_steps;  ///< Slice steps per local block per sweep; default d_theta.
  std::optional<std::size_t> nss_steps;    ///< Joint-space steps per replacement; default sweeps * d_total.
  SliceLimits limits;
  bool shuffle_sweep = false;
  StepObserver observer;

  [[nodiscard]] std::size_t psi_steps_for(const ModelDims& d) const { return psi_steps.value_or(d.d_psi); }
  [[nodiscard]] std::size_t theta_steps_for(const ModelDims& d) const { return theta_steps.value_or(d.d_theta); }
  [[nodiscard]] std::size_t nss_steps_for(const ModelDims& d) const {
    return nss_steps.value_or(sweeps * d.d_total());
  }

  /// Throws std::invalid_argument when a count is zero where it must not be.
  void validate(const ModelDims& dims) const;
};

/// Evaluation and slice diagnostics accumulated by the kernels.
struct KernelStats {
  std::uint64_t group_calls = 0;      ///< Every group log-likelihood evaluation.
  std::uint64_t psi_checks = 0;       ///< Constraint checks made by hyperparameter moves.
  std::uint64_t local_checks = 0;     ///< Budget checks made by local moves (one group call each).
  std::uint64_t joint_checks = 0;     ///< Full-likelihood checks made by joint-space moves.
  std::uint64_t recompute_calls = 0;  ///< Group calls spent refreshing caches after psi moves.
  SliceStats psi_slice;
  SliceStats local_slice;
  SliceStats joint_slice;

  [[nodiscard]] std::uint64_t stalls() const noexcept {
    return psi_slice.stalls + local_slice.stalls + joint_slice.stalls;
  }
  [[nodiscard]] std::uint64_t slice_moves() const noexcept {
    return psi_slice.moves + local_slice.moves + joint_slice.moves;
  }

  KernelStats& operator+=(const KernelStats& o) noexcept;
};

/// Per-group likelihood floor when only block k moves: lstar - S + ell_k.
[[nodiscard]] constexpr double compute_budget(double lstar, double total, double ell_k) noexcept {
  return lstar - total + ell_k;
}

/// Slice moves of psi targeting pi(psi) * pi(theta | psi) under sum_j ell_j(theta_j, psi) > lstar.
/// Afterwards ell and S are recomputed from scratch when psi can affect the likelihood.
void psi_update(const Model& model, ParamState& state, double lstar, const BlockCovariance& cov,
                const KernelConfig& cfg, Rng& rng, KernelStats& stats);

/// Sequential sweep over the iid groups with O(1) budget checks.
void local_sweep(const Model& model, ParamState& state, double lstar, const BlockCovariance& cov,
                 const KernelConfig& cfg, Rng& rng, KernelStats& stats);

/// Sequential sweep over Markov sites t = 0..T-1; each site targets its blanket prior.
void markov_local_sweep(const Model& model, ParamState& state, double lstar, const BlockCovariance& cov,
                        const KernelConfig& cfg, Rng& rng, KernelStats& stats);

/// M alternations of psi_update and the structure-appropriate local sweep.
ParamState swig_replace(const Model& model, ParamState parent, double lstar, const BlockCovariance& cov,
                        const KernelConfig& cfg, Rng& rng, KernelStats& stats);

/// Joint-space hit-and-run slice sampling baseline (nss_steps steps, full likelihood per check).
ParamState nss_replace(const Model& model, ParamState parent, double lstar, const CovBlock& joint_cov,
                       const KernelConfig& cfg, Rng& rng, KernelStats& stats);

}  // namespace nsswig

#endif  // NSSWIG_KERNEL_HPP
