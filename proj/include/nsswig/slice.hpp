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

#ifndef NSSWIG_SLICE_HPP
#define NSSWIG_SLICE_HPP

#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include <nsswig/model.hpp>
#include <nsswig/random.hpp>

/**
 * \file
 * \brief Constrained slice-sampling primitives.
 *
 * All moves are one-dimensional slices along a line x0 + t * direction, where the
 * direction vector carries the bracket width (t is measured in widths). The bracket is
 * placed at random around t = 0, stepped out linearly and then shrunk toward t = 0.
 */

namespace nsswig {

struct SliceLimits {
  int max_stepout = 10;  ///< Step-out budget; neither side ever exceeds it.
  int max_shrink = 100;  ///< Contractions before the move gives up and keeps x0.
};

/// Accumulated slice diagnostics.
struct SliceStats {
  std::uint64_t moves = 0;
  std::uint64_t stalls = 0;
  std::uint64_t stepouts = 0;
  std::uint64_t shrinks = 0;
  std::uint64_t density_evals = 0;
  std::uint64_t constraint_evals = 0;

  SliceStats& operator+=(const SliceStats& o) noexcept;
};

struct LineSliceResult {
  double t = 0.0;
  bool stalled = false;
  int stepouts = 0;
  int shrinks = 0;
};

/// Slice move along a line in width units.
/**
 * `in_slice(t)` must return whether the point at line coordinate t lies in the slice
 * (density above the level and constraint satisfied). t = 0 is the current point and is
 * assumed to be in the slice. The step-out budget is split at random between the two
 * sides so the bracket construction stays reversible.
 *
 * On success the last call to `in_slice` that returned true is the accepted point.
 * On a stall the result has t = 0 and `stalled` set.
 */
template <typename InSlice>
  requires std::predicate<InSlice&, double>
LineSliceResult slice_line(InSlice&& in_slice, Rng& rng, const SliceLimits& limits, SliceStats& stats) {
  const double offset = uniform01(rng);
  double lo = -offset;
  double hi = 1.0 - offset;

  const int budget = limits.max_stepout;
  int left = static_cast<int>(std::floor(uniform01(rng) * static_cast<double>(budget + 1)));
  if (left > budget) left = budget;
  int right = budget - left;

  LineSliceResult result;
  while (left > 0 && in_slice(lo)) {
    lo -= 1.0;
    --left;
    ++result.stepouts;
  }
  while (right > 0 && in_slice(hi)) {
    hi += 1.0;
    --right;
    ++result.stepouts;
  }

  ++stats.moves;
  stats.stepouts += static_cast<std::uint64_t>(result.stepouts);
  for (int i = 0; i < limits.max_shrink; ++i) {
    const double t = lo + uniform01(rng) * (hi - lo);
    if (in_slice(t)) {
      result.t = t;
      result.shrinks = i;
      stats.shrinks += static_cast<std::uint64_t>(i);
      return result;
    }
    if (t < 0.0) {
      lo = t;
    } else {
      hi = t;
    }
  }
  result.t = 0.0;
  result.stalled = true;
  result.shrinks = limits.max_shrink;
  stats.shrinks += static_cast<std::uint64_t>(limits.max_shrink);
  ++stats.stalls;
  return result;
}

/// Univariate slice target: `logf` is the density, `constraint` the hard indicator.
struct SliceTarget1d {
  std::function<double(double)> logf;
  std::function<bool(double)> constraint;
  double width0 = 1.0;
};

/// Multivariate slice target used with a direction vector.
struct SliceTarget {
  std::function<double(std::span<const double>)> logf;
  std::function<bool(std::span<const double>)> constraint;
};

/// Stepping-out and shrinkage slice update of a scalar. The constraint is only
/// evaluated at points whose density clears the slice level.
double slice_axis(double x0, const SliceTarget1d& target, Rng& rng, const SliceLimits& limits, SliceStats& stats);

/// Hit-and-run slice update of `x0` along `direction` (whose norm sets the width).
std::vector<double> slice_direction(std::span<const double> x0, std::span<const double> direction,
                                    const SliceTarget& target, Rng& rng, const SliceLimits& limits,
                                    SliceStats& stats);

/// One positive-definite covariance block with its lower Cholesky factor.
struct CovBlock {
  Eigen::MatrixXd cov;
  Eigen::MatrixXd chol;
  double jitter = 0.0;

  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(cov.rows()); }
};

/// Adds the scale-aware jitter to a sample covariance and factors it.
/**
 * jitter = 1e-8 * trace / dim, floored at 1e-12. Throws ModelError when the matrix is
 * not symmetric positive-definite after jitter.
 */
CovBlock make_cov_block(Eigen::MatrixXd sample_cov);

/// Block-diagonal covariance snapshot: one psi block and per-group (or pooled) local blocks.
struct BlockCovariance {
  std::optional<CovBlock> psi;
  std::vector<CovBlock> local;
  bool pooled = true;

  [[nodiscard]] const CovBlock& local_block(std::size_t j) const { return pooled ? local.front() : local.at(j); }

  /// Dense d_total x d_total matrix with zero cross-block entries.
  [[nodiscard]] Eigen::MatrixXd dense(const ModelDims& dims) const;
};

/// direction = L z / |z| with z standard normal and L the block's Cholesky factor.
void draw_direction(const CovBlock& block, Rng& rng, std::span<double> out);
std::vector<double> draw_direction(const CovBlock& block, Rng& rng);

/// Per-block sample covariance of the particle cloud plus jitter.
/**
 * With `pooled` the local blocks share one d_theta x d_theta matrix: each group is
 * centred on its own mean and the within-group scatter is averaged over groups.
 * Requires at least two particles; a degenerate cloud yields jitter * I.
 */
BlockCovariance estimate_block_cov(std::span<const ParamState> particles, const ModelDims& dims, bool pooled,
                                   std::span<const std::size_t> subset = {});

/// Full covariance over the joint (psi, theta) vector, used by the joint-space baseline.
/// A non-empty `subset` restricts either estimator to those particle indices.
CovBlock estimate_joint_cov(std::span<const ParamState> particles, const ModelDims& dims,
                            std::span<const std::size_t> subset = {});

/// Default pooling rule: pool the local blocks when d_theta <= 2.
[[nodiscard]] constexpr bool default_pool_local_cov(const ModelDims& dims) noexcept { return dims.d_theta <= 2; }

}  // namespace nsswig

#endif  // NSSWIG_SLICE_HPP
