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

#include <nsswig/slice.hpp>

#include <algorithm>
#include <cassert>
#include <numeric>

#include <Eigen/Cholesky>
#include <fmt/format.h>

namespace nsswig {

SliceStats& SliceStats::operator+=(const SliceStats& o) noexcept {
  moves += o.moves;
  stalls += o.stalls;
  stepouts += o.stepouts;
  shrinks += o.shrinks;
  density_evals += o.density_evals;
  constraint_evals += o.constraint_evals;
  return *this;
}

double slice_axis(double x0, const SliceTarget1d& target, Rng& rng, const SliceLimits& limits, SliceStats& stats) {
  const double level = target.logf(x0) + std::log(uniform_open0(rng));
  ++stats.density_evals;
  const double width = target.width0;
  auto in_slice = [&](double t) {
    const double x = x0 + t * width;
    ++stats.density_evals;
    if (!(target.logf(x) > level)) return false;
    ++stats.constraint_evals;
    return target.constraint(x);
  };
  const auto res = slice_line(in_slice, rng, limits, stats);
  return res.stalled ? x0 : x0 + res.t * width;
}

std::vector<double> slice_direction(std::span<const double> x0, std::span<const double> direction,
                                    const SliceTarget& target, Rng& rng, const SliceLimits& limits,
                                    SliceStats& stats) {
  const double level = target.logf(x0) + std::log(uniform_open0(rng));
  ++stats.density_evals;
  std::vector<double> x(x0.size());
  auto place = [&](double t) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x0[i] + t * direction[i];
  };
  auto in_slice = [&](double t) {
    place(t);
    ++stats.density_evals;
    if (!(target.logf(x) > level)) return false;
    ++stats.constraint_evals;
    return target.constraint(x);
  };
  const auto res = slice_line(in_slice, rng, limits, stats);
  place(res.stalled ? 0.0 : res.t);
  if (res.stalled) std::copy(x0.begin(), x0.end(), x.begin());
  return x;
}

CovBlock make_cov_block(Eigen::MatrixXd sample_cov) {
  const auto n = sample_cov.rows();
  if (n == 0 || sample_cov.cols() != n) throw ModelError("covariance block must be square and non-empty");
  if (!sample_cov.allFinite()) throw ModelError("covariance block has non-finite entries");
  const double trace = sample_cov.trace();
  const double jitter = std::max(1e-8 * trace / static_cast<double>(n), 1e-12);
  CovBlock block;
  block.jitter = jitter;
  block.cov = 0.5 * (sample_cov + sample_cov.transpose());
  block.cov.diagonal().array() += jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(block.cov);
  if (llt.info() != Eigen::Success) {
    throw ModelError(fmt::format("covariance block of size {} is not positive-definite after jitter", n));
  }
  block.chol = llt.matrixL();
  return block;
}

Eigen::MatrixXd BlockCovariance::dense(const ModelDims& dims) const {
  const auto d = static_cast<Eigen::Index>(dims.d_total());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
  const auto dp = static_cast<Eigen::Index>(dims.d_psi);
  const auto dt = static_cast<Eigen::Index>(dims.d_theta);
  if (psi) out.topLeftCorner(dp, dp) = psi->cov;
  for (std::size_t j = 0; j < dims.groups; ++j) {
    const auto off = dp + static_cast<Eigen::Index>(j) * dt;
    out.block(off, off, dt, dt) = local_block(j).cov;
  }
  return out;
}

void draw_direction(const CovBlock& block, Rng& rng, std::span<double> out) {
  const std::size_t n = block.dim();
  assert(out.size() == n);
  Eigen::VectorXd z(static_cast<Eigen::Index>(n));
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z[i] = standard_normal(rng);
      norm2 += z[i] * z[i];
    }
  } while (norm2 == 0.0);
  z /= std::sqrt(norm2);
  Eigen::Map<Eigen::VectorXd> dir(out.data(), static_cast<Eigen::Index>(n));
  dir.noalias() = block.chol.triangularView<Eigen::Lower>() * z;
}

std::vector<double> draw_direction(const CovBlock& block, Rng& rng) {
  std::vector<double> out(block.dim());
  draw_direction(block, rng, out);
  return out;
}

namespace {

/// Indices of the particles taking part in an estimate.
std::vector<std::size_t> resolve_subset(std::span<const ParamState> particles, std::span<const std::size_t> subset) {
  std::vector<std::size_t> idx;
  if (subset.empty()) {
    idx.resize(particles.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  } else {
    idx.assign(subset.begin(), subset.end());
  }
  if (idx.size() < 2) throw ModelError("covariance estimation needs at least two particles");
  return idx;
}

}  // namespace

BlockCovariance estimate_block_cov(std::span<const ParamState> particles, const ModelDims& dims, bool pooled,
                                   std::span<const std::size_t> subset) {
  const auto idx = resolve_subset(particles, subset);
  const std::size_t m = idx.size();
  const auto inv = 1.0 / static_cast<double>(m - 1);
  BlockCovariance out;
  out.pooled = pooled;

  if (dims.d_psi > 0) {
    const auto dp = static_cast<Eigen::Index>(dims.d_psi);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dp);
    for (const auto i : idx) mean += Eigen::Map<const Eigen::VectorXd>(particles[i].psi.data(), dp);
    mean /= static_cast<double>(m);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dp, dp);
    for (const auto i : idx) {
      const Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(particles[i].psi.data(), dp) - mean;
      cov.noalias() += r * r.transpose();
    }
    out.psi = make_cov_block(cov * inv);
  }

  const std::size_t d = dims.d_theta;
  const std::size_t groups = dims.groups;
  // Per-group means, block-major like ParamState::theta.
  std::vector<double> mean(groups * d, 0.0);
  for (const auto i : idx) {
    const auto& theta = particles[i].theta;
    for (std::size_t a = 0; a < mean.size(); ++a) mean[a] += theta[a];
  }
  for (auto& v : mean) v /= static_cast<double>(m);

  const std::size_t n_blocks = pooled ? 1 : groups;
  const auto dd = static_cast<Eigen::Index>(d);
  std::vector<Eigen::MatrixXd> scatter(n_blocks, Eigen::MatrixXd::Zero(dd, dd));
  if (d == 1) {
    // Scalar blocks dominate in practice; keep the inner loop flat.
    std::vector<double> acc(n_blocks, 0.0);
    for (const auto i : idx) {
      const auto& theta = particles[i].theta;
      for (std::size_t j = 0; j < groups; ++j) {
        const double r = theta[j] - mean[j];
        acc[pooled ? 0 : j] += r * r;
      }
    }
    for (std::size_t b = 0; b < n_blocks; ++b) scatter[b](0, 0) = acc[b];
  } else {
    std::vector<double> r(d);
    for (const auto i : idx) {
      const auto& theta = particles[i].theta;
      for (std::size_t j = 0; j < groups; ++j) {
        auto& s = scatter[pooled ? 0 : j];
        for (std::size_t a = 0; a < d; ++a) r[a] = theta[j * d + a] - mean[j * d + a];
        for (std::size_t a = 0; a < d; ++a) {
          for (std::size_t b = 0; b <= a; ++b) {
            s(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += r[a] * r[b];
          }
        }
      }
    }
    for (auto& s : scatter) s = s.selfadjointView<Eigen::Lower>();
  }
  const double scale = pooled ? inv / static_cast<double>(groups) : inv;
  out.local.reserve(n_blocks);
  for (auto& s : scatter) out.local.push_back(make_cov_block(s * scale));
  return out;
}

CovBlock estimate_joint_cov(std::span<const ParamState> particles, const ModelDims& dims,
                            std::span<const std::size_t> subset) {
  const auto idx = resolve_subset(particles, subset);
  const auto m = static_cast<Eigen::Index>(idx.size());
  const auto d = static_cast<Eigen::Index>(dims.d_total());
  const auto dp = static_cast<Eigen::Index>(dims.d_psi);
  Eigen::MatrixXd x(m, d);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto& p = particles[idx[static_cast<std::size_t>(r)]];
    for (Eigen::Index a = 0; a < dp; ++a) x(r, a) = p.psi[static_cast<std::size_t>(a)];
    for (Eigen::Index a = dp; a < d; ++a) x(r, a) = p.theta[static_cast<std::size_t>(a - dp)];
  }
  x.rowwise() -= x.colwise().mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / static_cast<double>(m - 1));
  cov = cov.selfadjointView<Eigen::Lower>();
  return make_cov_block(std::move(cov));
}

}  // namespace nsswig
