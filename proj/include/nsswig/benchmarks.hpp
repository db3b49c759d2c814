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

#ifndef NSSWIG_BENCHMARKS_HPP
#define NSSWIG_BENCHMARKS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nsswig/engine.hpp>
#include <nsswig/kernel.hpp>
#include <nsswig/model.hpp>

/**
 * \file
 * \brief Reference models, synthetic data and evaluation accounting.
 */

namespace nsswig {

// Hierarchical Gaussian: psi ~ N(mu0, sigma_psi^2), theta_j ~ N(psi, sigma_theta^2),
// y_j ~ N(theta_j, sigma_obs^2).
struct HierGaussConfig {
  double mu0 = 0.0;
  double sigma_psi = 10.0;
  double sigma_theta = 2.0;
  double sigma_obs = 1.0;
  std::size_t groups = 10;
  double psi_true = 3.0;
  std::uint64_t seed = 0;

  void validate() const;
};

class HierGaussModel final : public Model {
 public:
  HierGaussModel(HierGaussConfig cfg, std::vector<double> y);

  [[nodiscard]] std::string name() const override { return "hier_gauss"; }
  [[nodiscard]] std::optional<double> analytic_logz() const override { return logz_; }
  [[nodiscard]] bool likelihood_depends_on_psi() const override { return false; }
  [[nodiscard]] const HierGaussConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const std::vector<double>& data() const noexcept { return y_; }

 protected:
  double do_log_prior_hyper(std::span<const double> psi) const override;
  double do_group_loglike(std::span<const double> theta, std::span<const double> psi, std::size_t j) const override;
  void do_sample_hyper(Rng& rng, std::span<double> psi) const override;
  double do_log_conditional_prior(std::span<const double> theta, std::span<const double> psi,
                                  std::size_t j) const override;
  void do_sample_conditional(Rng& rng, std::span<const double> psi, std::size_t j,
                             std::span<double> out) const override;

 private:
  HierGaussConfig cfg_;
  std::vector<double> y_;
  double logz_;
  double obs_var_;
  double theta_var_;
  double obs_lognorm_;
  double theta_lognorm_;
};

// Neal's funnel with theta ~ U(-b, b) and the Gaussian conditionals N(theta_j; 0, e^psi)
// playing the role of group likelihoods.
struct FunnelConfig {
  double sigma_psi_sq = 9.0;
  std::size_t groups = 10;
  double theta_bound = 100.0;

  void validate() const;
};

class FunnelModel final : public Model {
 public:
  explicit FunnelModel(FunnelConfig cfg);

  [[nodiscard]] std::string name() const override { return "funnel"; }
  [[nodiscard]] std::optional<double> analytic_logz() const override { return logz_; }
  [[nodiscard]] bool likelihood_depends_on_psi() const override { return true; }
  [[nodiscard]] const FunnelConfig& config() const noexcept { return cfg_; }

 protected:
  double do_log_prior_hyper(std::span<const double> psi) const override;
  double do_group_loglike(std::span<const double> theta, std::span<const double> psi, std::size_t j) const override;
  void do_sample_hyper(Rng& rng, std::span<double> psi) const override;
  double do_log_conditional_prior(std::span<const double> theta, std::span<const double> psi,
                                  std::size_t j) const override;
  void do_sample_conditional(Rng& rng, std::span<const double> psi, std::size_t j,
                             std::span<double> out) const override;

 private:
  FunnelConfig cfg_;
  double logz_;
};

// Stochastic volatility: theta_t is the log-variance of return y_t, an AR(1) chain with
// psi = (mu, beta, sigma) in that order.
struct SVConfig {
  std::size_t sites = 50;
  double mu = -1.0;
  double beta = 0.95;
  double sigma = 0.25;
  std::uint64_t seed = 0;

  void validate() const;
};

class SVModel final : public Model {
 public:
  SVModel(std::size_t sites, std::vector<double> y);

  [[nodiscard]] std::string name() const override { return "sv"; }
  [[nodiscard]] bool likelihood_depends_on_psi() const override { return false; }
  [[nodiscard]] const std::vector<double>& data() const noexcept { return y_; }

  static constexpr double kMuScale = 10.0;
  static constexpr double kMuBound = 50.0;
  static constexpr double kSigmaScale = 2.0;
  static constexpr double kSigmaBound = 50.0;
  static constexpr double kBetaA = 20.0;
  static constexpr double kBetaB = 1.5;

 protected:
  double do_log_prior_hyper(std::span<const double> psi) const override;
  double do_group_loglike(std::span<const double> theta, std::span<const double> psi, std::size_t j) const override;
  void do_sample_hyper(Rng& rng, std::span<double> psi) const override;
  double do_log_initial_prior(std::span<const double> theta0, std::span<const double> psi) const override;
  double do_log_transition(std::span<const double> prev, std::span<const double> cur,
                           std::span<const double> psi) const override;
  void do_sample_initial(Rng& rng, std::span<const double> psi, std::span<double> out) const override;
  void do_sample_transition(Rng& rng, std::span<const double> prev, std::span<const double> psi,
                            std::span<double> out) const override;

 private:
  std::vector<double> y_;
};

/// Observation density of one return given its log-variance.
double sv_obs_loglike(double y, double log_var) noexcept;

std::vector<double> generate_hg_data(const HierGaussConfig& cfg);

struct SVData {
  std::vector<double> y;
  std::vector<double> log_vol;  ///< The latent chain that generated y.
};

SVData generate_sv_data(const SVConfig& cfg);

/// log N(y; mu0 1, tau^2 I + sigma_psi^2 1 1^T) with tau^2 = sigma_theta^2 + sigma_obs^2.
double hg_analytic_logz(std::span<const double> y, const HierGaussConfig& cfg);

/// Quadrature over psi in [-40, 40] of the hyperprior times the marginalized local terms.
/// Throws std::runtime_error when the adaptive rule does not reach 1e-6 absolute in log.
double funnel_analytic_logz(const FunnelConfig& cfg, double tolerance = 1e-10);

/// Group-call tally expressed in full-likelihood equivalents (J calls = 1).
struct EvalCounter {
  std::uint64_t group_calls = 0;
  std::size_t groups = 1;

  [[nodiscard]] double full_equivalents() const noexcept {
    return static_cast<double>(group_calls) / static_cast<double>(groups);
  }
};

EvalCounter count_equivalents(EvalCounter counter, std::uint64_t calls) noexcept;

/// Cost of `checks` psi constraint checks under forced recomputation.
EvalCounter count_psi_checks(EvalCounter counter, std::uint64_t checks) noexcept;

/// KL(N(mu1, var1) || N(mu0, var0)).
double gaussian_kl(double mu1, double var1, double mu0, double var0) noexcept;

struct InfoDecomposition {
  double total_h = 0.0;                 ///< From the run.
  std::optional<double> h_psi;          ///< Analytic hyperparameter term.
  std::vector<double> h_local;          ///< Analytic per-group terms.
  std::optional<double> analytic_total;
  std::optional<double> relative_error;  ///< |total_h - analytic_total| / analytic_total.
  bool within_tolerance = true;          ///< relative_error <= 0.2 when available.
};

/// H = H_psi + sum_j H_j. The analytic split is available for the hierarchical Gaussian only.
InfoDecomposition info_decomposition_report(const Model& model, const RunResult& run);

/// Analytic split for a hierarchical Gaussian data set.
InfoDecomposition hg_info_decomposition(std::span<const double> y, const HierGaussConfig& cfg);

/// Columnar observation file: `# model=<name> seed=<u64> J=<n>` then one value per line.
struct ObservationFile {
  std::string model;
  std::uint64_t seed = 0;
  std::vector<double> values;
};

void write_observations(const std::filesystem::path& path, const ObservationFile& obs);
ObservationFile read_observations(const std::filesystem::path& path);

}  // namespace nsswig

#endif  // NSSWIG_BENCHMARKS_HPP
