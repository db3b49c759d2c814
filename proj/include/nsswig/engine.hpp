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

#ifndef NSSWIG_ENGINE_HPP
#define NSSWIG_ENGINE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nsswig/kernel.hpp>
#include <nsswig/math.hpp>
#include <nsswig/model.hpp>
#include <nsswig/slice.hpp>

/**
 * \file
 * \brief Batch-deletion nested sampling.
 *
 * Each iteration deletes the k lowest-likelihood live points, credits them to the
 * evidence, and refills the live set by mutating k parents drawn from the survivors with
 * the configured constrained kernel.
 */

namespace nsswig {

/// Raised when a NaN reaches the outer loop.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KernelKind { swig, nss };

std::string to_string(KernelKind kind);
KernelKind parse_kernel_kind(const std::string& text);

struct RunConfig {
  std::size_t live_points = 1000;  ///< m
  std::size_t batch = 50;          ///< k, deleted per iteration
  double epsilon = -3.0;           ///< Stop once log Z_live - log Z < epsilon.
  KernelKind kernel = KernelKind::swig;
  std::uint64_t seed = 0;
  KernelConfig kernel_cfg;
  std::size_t store_params_every = 1;   ///< Keep parameters on every n-th dead record; 0 keeps none.
  std::optional<bool> pool_local_cov;   ///< Defaults to d_theta <= 2.
  std::size_t threads = 1;
  std::size_t max_iterations = 1'000'000;

  /// Throws std::invalid_argument unless 1 <= k < m and epsilon < 0.
  void validate() const;
};

struct LiveSet {
  std::vector<ParamState> particles;

  [[nodiscard]] std::size_t size() const noexcept { return particles.size(); }
  [[nodiscard]] double max_loglike() const noexcept;
};

struct DeadRecord {
  std::size_t iteration = 0;
  double log_like = 0.0;
  double log_x = 0.0;
  double log_weight = 0.0;
  std::vector<double> params;  ///< (psi, theta); empty on thinned rows.
};

/// Running evidence, prior volume and information with the dead-point log.
struct EvidenceAccumulator {
  double log_z = kNegInf;
  double log_x = 0.0;
  double h = 0.0;
  std::vector<DeadRecord> dead;

  /// Adds one contribution log_weight = log(volume) + log_like and updates H.
  void add(double log_like, double log_volume_weight);
};

struct BatchSelection {
  std::vector<std::size_t> indices;  ///< Ascending in log-likelihood, ties by index.
  double lstar = 0.0;                ///< The k-th lowest log-likelihood.
};

/// The k smallest log-likelihoods; ties are broken by index order.
BatchSelection select_batch(std::span<const double> loglikes, std::size_t k);

struct VolumeCompression {
  std::vector<double> log_x;  ///< Volume assigned to each deleted point, in deletion order.
  double new_log_x = 0.0;
};

/// Treats a batch as k sequential deletions from m, m-1, ..., m-k+1 live points.
VolumeCompression compress_volume(double log_x, std::size_t m, std::size_t k);

/// Credits a batch (ascending in log-likelihood) to the accumulator.
/**
 * `log_x_after[i]` is the volume below the i-th point; each point receives the volume
 * between the previous assignment and its own. Points with -inf likelihood carry zero
 * weight but still shrink the volume.
 */
void update_evidence(EvidenceAccumulator& acc, std::span<const double> loglikes, std::span<const double> log_x_after,
                     std::size_t iteration, std::span<const std::vector<double>> params = {});

/// True when log X + max live log-likelihood - log Z < epsilon.
bool termination_check(const EvidenceAccumulator& acc, double max_live_loglike, double epsilon);

struct RunResult {
  std::string model_name;
  ModelDims dims;
  RunConfig config;
  double log_z = 0.0;
  double sigma_hat = 0.0;
  double h = 0.0;
  double ess = 0.0;
  std::size_t n_iterations = 0;
  std::uint64_t n_group_calls = 0;
  double full_equivalents = 0.0;
  KernelStats stats;
  std::vector<DeadRecord> dead;
  std::optional<double> analytic_logz;
  bool hit_iteration_cap = false;
  double wall_seconds = 0.0;

  /// Normalized posterior weights exp(log_weight - log_z), one per dead record.
  [[nodiscard]] std::vector<double> posterior_weights() const;
};

/// Appends the final live points with volume X/m each and computes log Z, sigma, ESS.
RunResult finalize(EvidenceAccumulator acc, const LiveSet& live, std::size_t iteration, std::size_t live_points,
                   std::size_t store_params_every);

/// (sum w)^2 / sum w^2 from log-weights.
double effective_sample_size(std::span<const double> log_weights);

/// Full batch-deletion nested sampling run; deterministic for a given seed.
RunResult run_nested_sampling(const Model& model, const RunConfig& cfg);

/// Equal-weight posterior draws by multinomial resampling of stored dead records.
std::vector<std::vector<double>> posterior_samples(const RunResult& run, std::size_t n, Rng& rng);

}  // namespace nsswig

#endif  // NSSWIG_ENGINE_HPP
