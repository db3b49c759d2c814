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

#ifndef NSSWIG_MODEL_HPP
#define NSSWIG_MODEL_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nsswig/random.hpp>

/**
 * \file
 * \brief The factorized-model contract shared by every kernel and the outer loop.
 *
 * A model has hyperparameters psi and J local blocks theta_j. Its log-likelihood is a
 * sum of per-group terms, each touching only (theta_j, psi). The prior is either
 * pi(psi) prod_j pi(theta_j | psi) (iid groups) or an AR-style chain
 * pi(psi) pi(theta_0 | psi) prod_t pi(theta_t | theta_{t-1}, psi) (Markov sites).
 */

namespace nsswig {

/// Raised for contract violations and numerical faults (NaN inputs, wrong structure).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Structure { iid, markov };

struct ModelDims {
  std::size_t d_psi = 0;
  std::size_t groups = 1;
  std::size_t d_theta = 1;

  [[nodiscard]] constexpr std::size_t d_total() const noexcept { return d_psi + groups * d_theta; }
  [[nodiscard]] constexpr std::size_t d_local() const noexcept { return groups * d_theta; }

  /// Throws ModelError unless groups >= 1 and d_theta >= 1.
  void validate() const;

  friend constexpr bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// A point in parameter space with its cached likelihood terms.
/**
 * `ell[j]` caches the group log-likelihood of block j, `total_loglike` caches their sum
 * (S), and `log_prior` caches the joint prior density. Kernels keep the caches in step
 * with the parameters; `Model::refresh` recomputes them from scratch.
 */
struct ParamState {
  std::vector<double> psi;
  std::vector<double> theta;  ///< groups * d_theta values, block-major.
  std::vector<double> ell;
  double total_loglike = 0.0;
  double log_prior = 0.0;

  [[nodiscard]] std::span<double> block(std::size_t j, std::size_t d_theta) {
    return std::span<double>{theta}.subspan(j * d_theta, d_theta);
  }
  [[nodiscard]] std::span<const double> block(std::size_t j, std::size_t d_theta) const {
    return std::span<const double>{theta}.subspan(j * d_theta, d_theta);
  }

  /// Flattened (psi, theta) vector.
  [[nodiscard]] std::vector<double> joint() const;
  void set_joint(std::span<const double> x);

  /// Sum of the cached `ell` terms (recomputed each call).
  [[nodiscard]] double ell_sum() const noexcept;
};

/// Up to three consecutive local blocks around site t; `prev`/`next` are empty at the ends.
struct BlanketWindow {
  std::span<const double> prev;
  std::span<const double> cur;
  std::span<const double> next;
};

/// Base class for all target models. Models are immutable after construction.
/**
 * Public evaluators validate their inputs (NaN is always a bug and raises ModelError)
 * and forward to the protected `do_*` hooks that concrete models implement. A value of
 * -inf is legal everywhere and means "outside the support".
 */
class Model {
 public:
  Model(ModelDims dims, Structure structure);
  virtual ~Model() = default;

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] const ModelDims& dims() const noexcept { return dims_; }
  [[nodiscard]] Structure structure() const noexcept { return structure_; }

  /// Reference log-evidence when it is known in closed form or by quadrature.
  [[nodiscard]] virtual std::optional<double> analytic_logz() const { return std::nullopt; }

  /// Whether any group log-likelihood changes when psi changes.
  [[nodiscard]] virtual bool likelihood_depends_on_psi() const = 0;

  /// When set, psi updates recompute every group likelihood even if they are psi-independent.
  [[nodiscard]] bool force_full_recompute_on_psi() const noexcept { return force_full_recompute_; }
  void set_force_full_recompute_on_psi(bool value) noexcept { force_full_recompute_ = value; }

  /// True when psi moves must re-evaluate the group likelihoods.
  [[nodiscard]] bool psi_move_needs_likelihood() const noexcept {
    return force_full_recompute_ || likelihood_depends_on_psi();
  }

  double log_prior_hyper(std::span<const double> psi) const;
  double log_conditional_prior(std::span<const double> theta, std::span<const double> psi, std::size_t j) const;
  double log_initial_prior(std::span<const double> theta0, std::span<const double> psi) const;
  double log_transition(std::span<const double> prev, std::span<const double> cur, std::span<const double> psi) const;
  double group_loglike(std::span<const double> theta, std::span<const double> psi, std::size_t j) const;

  /// Conditional prior of site t given its Markov blanket.
  /**
   * Interior sites get log pi(theta_t | theta_{t-1}) + log pi(theta_{t+1} | theta_t); the
   * first site uses the initial density in place of the incoming transition and the last
   * site has no outgoing one.
   */
  double log_blanket_prior(std::size_t t, const BlanketWindow& window, std::span<const double> psi) const;

  /// Blanket prior of site t read straight out of a state.
  double log_blanket_prior(std::size_t t, const ParamState& state) const;

  /// log prod_j pi(theta_j | psi) (iid) or the chain density (Markov), for the given psi.
  double log_local_prior(std::span<const double> theta, std::span<const double> psi) const;

  double log_joint_prior(std::span<const double> psi, std::span<const double> theta) const;

  /// Fresh recomputation of all J group terms. Returns S and writes `ell_out`.
  double total_loglike(std::span<const double> psi, std::span<const double> theta, std::span<double> ell_out) const;

  /// Recomputes `ell`, `total_loglike` and `log_prior` of `state` from its parameters.
  void refresh(ParamState& state) const;

  /// Draws psi from the hyperprior and then the local blocks (sequentially for Markov models).
  ParamState sample_prior(Rng& rng) const;

  /// A state with correctly sized vectors and zeroed caches.
  [[nodiscard]] ParamState make_state() const;

 protected:
  virtual double do_log_prior_hyper(std::span<const double> psi) const = 0;
  virtual double do_group_loglike(std::span<const double> theta, std::span<const double> psi,
                                  std::size_t j) const = 0;
  virtual void do_sample_hyper(Rng& rng, std::span<double> psi) const = 0;

  // iid structure
  virtual double do_log_conditional_prior(std::span<const double> theta, std::span<const double> psi,
                                          std::size_t j) const;
  virtual void do_sample_conditional(Rng& rng, std::span<const double> psi, std::size_t j,
                                     std::span<double> out) const;

  // Markov structure
  virtual double do_log_initial_prior(std::span<const double> theta0, std::span<const double> psi) const;
  virtual double do_log_transition(std::span<const double> prev, std::span<const double> cur,
                                   std::span<const double> psi) const;
  virtual void do_sample_initial(Rng& rng, std::span<const double> psi, std::span<double> out) const;
  virtual void do_sample_transition(Rng& rng, std::span<const double> prev, std::span<const double> psi,
                                    std::span<double> out) const;

 private:
  void require(Structure s, const char* what) const;

  ModelDims dims_;
  Structure structure_;
  bool force_full_recompute_ = true;
};

}  // namespace nsswig

#endif  // NSSWIG_MODEL_HPP
