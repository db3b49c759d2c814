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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <Eigen/LU>
#include <boost/math/distributions/normal.hpp>

#include <nsswig/math.hpp>
#include <nsswig/slice.hpp>

#include "support/stat_tests.hpp"
#include "support/test_models.hpp"

namespace {

using nsswig::testing::ks_test;

double normal_cdf(double x, double sd = 1.0) {
  return boost::math::cdf(boost::math::normal_distribution<double>(0.0, sd), x);
}

/// n states of a chain, keeping every `thin`-th one.
template <typename Step>
std::vector<double> chain(double x0, std::size_t n, std::size_t thin, Step step) {
  std::vector<double> out;
  out.reserve(n);
  double x = x0;
  for (std::size_t i = 0; i < n * thin; ++i) {
    x = step(x);
    if ((i + 1) % thin == 0) out.push_back(x);
  }
  return out;
}

TEST(SliceAxis, FlatIntervalIsUniform) {
  auto rng = nsswig::make_stream(1, {1});
  nsswig::SliceStats stats;
  const nsswig::SliceTarget1d target{[](double) { return 0.0; }, [](double x) { return x >= 0.0 && x <= 1.0; }, 0.3};
  const auto xs = chain(0.5, 100000, 2, [&](double x) { return slice_axis(x, target, rng, {}, stats); });
  for (const double x : xs) ASSERT_TRUE(x >= 0.0 && x <= 1.0);
  EXPECT_GT(ks_test(xs, [](double x) { return x; }), 0.01);
  EXPECT_EQ(stats.stalls, 0U);
}

TEST(SliceAxis, StandardNormalMoments) {
  auto rng = nsswig::make_stream(2, {1});
  nsswig::SliceStats stats;
  const nsswig::SliceTarget1d target{[](double x) { return -0.5 * x * x; }, [](double) { return true; }, 1.0};
  std::vector<double> xs;
  double x = 0.0;
  for (int i = 0; i < 100000; ++i) {
    x = slice_axis(x, target, rng, {}, stats);
    xs.push_back(x);
  }
  EXPECT_NEAR(nsswig::testing::mean(xs), 0.0, 0.02);
  EXPECT_NEAR(nsswig::testing::variance(xs), 1.0, 0.02);
}

TEST(SliceAxis, TruncatedGaussianMatchesItsCdf) {
  auto rng = nsswig::make_stream(3, {1});
  nsswig::SliceStats stats;
  const double a = 0.5;
  const nsswig::SliceTarget1d target{[](double x) { return -0.5 * x * x; }, [a](double x) { return x > a; }, 1.0};
  const auto xs = chain(1.0, 100000, 3, [&](double x) { return slice_axis(x, target, rng, {}, stats); });
  const double tail = 1.0 - normal_cdf(a);
  EXPECT_GT(ks_test(xs, [&](double x) { return (normal_cdf(x) - normal_cdf(a)) / tail; }), 0.01);
}

TEST(SliceAxis, PointFeasibleSetCollapsesToTheStart) {
  auto rng = nsswig::make_stream(4, {1});
  nsswig::SliceStats stats;
  const nsswig::SliceTarget1d target{[](double) { return 0.0; }, [](double x) { return x == 0.25; }, 1.0};
  for (int i = 0; i < 20; ++i) EXPECT_EQ(slice_axis(0.25, target, rng, {}, stats), 0.25);
  EXPECT_EQ(stats.moves, 20U);
  const nsswig::SliceLimits short_shrink{10, 5};
  EXPECT_EQ(slice_axis(0.25, target, rng, short_shrink, stats), 0.25);
  EXPECT_GE(stats.stalls, 1U);
}

TEST(SliceAxis, ReturnedPointsSatisfyTheSlice) {
  auto rng = nsswig::make_stream(5, {1});
  nsswig::SliceStats stats;
  const nsswig::SliceTarget1d target{[](double x) { return -std::abs(x); }, [](double x) { return x < 2.0; }, 0.7};
  double x = 0.0;
  for (int i = 0; i < 20000; ++i) {
    x = slice_axis(x, target, rng, {}, stats);
    ASSERT_LT(x, 2.0);
    ASSERT_TRUE(std::isfinite(x));
  }
}

TEST(SliceLine, StepOutAndShrinkAreBounded) {
  auto rng = nsswig::make_stream(6, {1});
  nsswig::SliceStats stats;
  const nsswig::SliceLimits limits{7, 13};
  for (int i = 0; i < 2000; ++i) {
    int calls = 0;
    const auto res = nsswig::slice_line(
        [&](double t) {
          ++calls;
          return std::abs(t) < 1e6 && (i % 2 == 0 || t == 0.0);
        },
        rng, limits, stats);
    ASSERT_LE(res.stepouts, limits.max_stepout);
    ASSERT_LE(res.shrinks, limits.max_shrink);
    ASSERT_LE(calls, limits.max_stepout + 2 + limits.max_shrink);
    if (i % 2 == 1) {
      ASSERT_TRUE(res.stalled);
    }
  }
}

TEST(SliceLine, ConstraintEvaluationsAreCountedOnce) {
  auto rng = nsswig::make_stream(7, {1});
  nsswig::SliceStats stats;
  std::uint64_t constraint_calls = 0;
  std::uint64_t density_calls = 0;
  const nsswig::SliceTarget target{
      [&](std::span<const double> x) {
        ++density_calls;
        return -0.5 * (x[0] * x[0] + x[1] * x[1]);
      },
      [&](std::span<const double> x) {
        ++constraint_calls;
        return x[0] + x[1] > -1.0;
      }};
  std::vector<double> x{0.0, 0.0};
  const nsswig::CovBlock eye = nsswig::make_cov_block(Eigen::MatrixXd::Identity(2, 2));
  for (int i = 0; i < 5000; ++i) x = slice_direction(x, nsswig::draw_direction(eye, rng), target, rng, {}, stats);
  EXPECT_EQ(stats.constraint_evals, constraint_calls);
  EXPECT_EQ(stats.density_evals, density_calls);
}

TEST(SliceDirection, IsotropicGaussianMarginals) {
  auto rng = nsswig::make_stream(8, {1});
  nsswig::SliceStats stats;
  const nsswig::SliceTarget target{[](std::span<const double> x) { return -0.5 * (x[0] * x[0] + x[1] * x[1]); },
                                   [](std::span<const double>) { return true; }};
  const nsswig::CovBlock eye = nsswig::make_cov_block(Eigen::MatrixXd::Identity(2, 2));
  std::vector<double> x{0.0, 0.0};
  std::vector<double> x0s;
  std::vector<double> x1s;
  for (int i = 0; i < 300000; ++i) {
    x = slice_direction(x, nsswig::draw_direction(eye, rng), target, rng, {}, stats);
    if (i % 3 == 2) {
      x0s.push_back(x[0]);
      x1s.push_back(x[1]);
    }
  }
  EXPECT_GT(ks_test(x0s, [](double v) { return normal_cdf(v); }), 0.01);
  EXPECT_GT(ks_test(x1s, [](double v) { return normal_cdf(v); }), 0.01);
  std::vector<double> r2(x0s.size());
  for (std::size_t i = 0; i < r2.size(); ++i) r2[i] = x0s[i] * x0s[i] + x1s[i] * x1s[i];
  EXPECT_GT(ks_test(r2, [](double v) { return 1.0 - std::exp(-0.5 * v); }), 0.01);
}

TEST(SliceDirection, UnitDirectionMatchesSliceAxis) {
  const nsswig::SliceTarget target{[](std::span<const double> x) { return -0.5 * x[0] * x[0] - x[1] * x[1]; },
                                   [](std::span<const double> x) { return x[0] < 1.5; }};
  const nsswig::SliceTarget1d target1{[](double v) { return -0.5 * v * v - 0.09; },
                                      [](double v) { return v < 1.5; }, 0.8};
  auto rng_a = nsswig::make_stream(9, {1});
  auto rng_b = nsswig::make_stream(9, {1});
  nsswig::SliceStats sa;
  nsswig::SliceStats sb;
  std::vector<double> x{0.2, 0.3};
  double y = 0.2;
  const std::vector<double> e1{0.8, 0.0};
  for (int i = 0; i < 1000; ++i) {
    x = slice_direction(x, e1, target, rng_a, {}, sa);
    y = slice_axis(y, target1, rng_b, {}, sb);
    ASSERT_NEAR(x[0], y, 1e-12);
    ASSERT_EQ(x[1], 0.3);
  }
}

TEST(SliceDirection, CovarianceShapedDirectionsJumpFurther) {
  // Condition number 1e4, rotated 30 degrees.
  const double c = std::cos(0.5235987755982988);
  const double s = std::sin(0.5235987755982988);
  Eigen::Matrix2d rot;
  rot << c, -s, s, c;
  const Eigen::Matrix2d cov = rot * Eigen::Vector2d(100.0, 0.01).asDiagonal() * rot.transpose();
  const Eigen::Matrix2d prec = cov.inverse();
  const nsswig::SliceTarget target{[prec](std::span<const double> x) {
                                     const Eigen::Vector2d v(x[0], x[1]);
                                     return -0.5 * v.dot(prec * v);
                                   },
                                   [](std::span<const double>) { return true; }};
  auto esjd = [&](const nsswig::CovBlock& block, std::uint64_t seed) {
    auto rng = nsswig::make_stream(seed, {1});
    nsswig::SliceStats stats;
    std::vector<double> x{0.0, 0.0};
    double sum = 0.0;
    constexpr int n = 20000;
    for (int i = 0; i < n; ++i) {
      auto y = slice_direction(x, nsswig::draw_direction(block, rng), target, rng, {}, stats);
      sum += (y[0] - x[0]) * (y[0] - x[0]) + (y[1] - x[1]) * (y[1] - x[1]);
      x = std::move(y);
    }
    return sum / n;
  };
  const double shaped = esjd(nsswig::make_cov_block(cov), 10);
  const double identity = esjd(nsswig::make_cov_block(Eigen::MatrixXd::Identity(2, 2)), 10);
  EXPECT_GT(shaped / identity, 5.0);
}

TEST(DrawDirection, IdentityIsUniformOnTheSphere) {
  auto rng = nsswig::make_stream(11, {1});
  constexpr int d = 3;
  const auto block = nsswig::make_cov_block(Eigen::MatrixXd::Identity(d, d));
  Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto u = nsswig::draw_direction(block, rng);
    const Eigen::Vector3d e(u[0], u[1], u[2]);
    ASSERT_NEAR(e.norm(), 1.0, 1e-6);
    outer += e * e.transpose();
  }
  outer /= n;
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      const double expected = a == b ? 1.0 / d : 0.0;
      EXPECT_NEAR(outer(a, b), expected, 0.05 / d);
    }
  }
}

TEST(DrawDirection, DiagonalComponentRatio) {
  auto rng = nsswig::make_stream(12, {1});
  Eigen::MatrixXd cov(2, 2);
  cov << 100.0, 0.0, 0.0, 1.0;
  const auto block = nsswig::make_cov_block(cov);
  double s0 = 0.0;
  double s1 = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const auto u = nsswig::draw_direction(block, rng);
    s0 += u[0] * u[0];
    s1 += u[1] * u[1];
  }
  EXPECT_NEAR(s0 / s1 / 100.0, 1.0, 0.1);
}

TEST(DrawDirection, OneDimensionalIsPlusMinusSigma) {
  auto rng = nsswig::make_stream(13, {1});
  Eigen::MatrixXd cov(1, 1);
  cov << 9.0;
  const auto block = nsswig::make_cov_block(cov);
  bool pos = false;
  bool neg = false;
  for (int i = 0; i < 100; ++i) {
    const double u = nsswig::draw_direction(block, rng)[0];
    EXPECT_NEAR(std::abs(u), 3.0, 1e-6);
    pos = pos || u > 0;
    neg = neg || u < 0;
  }
  EXPECT_TRUE(pos && neg);
}

TEST(MakeCovBlock, JitterAndErrors) {
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
  const auto b = nsswig::make_cov_block(zero);
  EXPECT_DOUBLE_EQ(b.jitter, 1e-12);
  Eigen::MatrixXd c(2, 2);
  c << 4.0, 0.0, 0.0, 2.0;
  EXPECT_DOUBLE_EQ(nsswig::make_cov_block(c).jitter, 3e-8);
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 0.0, 0.0, -5.0;
  EXPECT_THROW((void)nsswig::make_cov_block(indefinite), nsswig::ModelError);
}

std::vector<nsswig::ParamState> particles_from(const nsswig::Model& model, std::size_t n, std::uint64_t seed) {
  auto rng = nsswig::make_stream(seed, {1});
  std::vector<nsswig::ParamState> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(model.sample_prior(rng));
  return out;
}

TEST(EstimateBlockCov, IdenticalParticlesGiveJitter) {
  const nsswig::testing::CountingGaussModel model(std::vector<double>(4, 0.0), 2);
  auto ps = particles_from(model, 1, 1);
  ps.push_back(ps.front());
  ps.push_back(ps.front());
  const auto cov = nsswig::estimate_block_cov(ps, model.dims(), false);
  ASSERT_TRUE(cov.psi.has_value());
  EXPECT_DOUBLE_EQ(cov.psi->cov(0, 0), 1e-12);
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_TRUE(cov.local_block(j).cov.isApprox(1e-12 * Eigen::MatrixXd::Identity(2, 2)));
  }
}

TEST(EstimateBlockCov, SampleCovarianceConverges) {
  // Draw theta blocks directly from N(0, diag(4, 9)).
  const nsswig::testing::CountingGaussModel model(std::vector<double>(2, 0.0), 2);
  auto rng = nsswig::make_stream(14, {1});
  std::vector<nsswig::ParamState> ps(10000, model.make_state());
  for (auto& p : ps) {
    p.psi[0] = nsswig::standard_normal(rng);
    p.theta[0] = 2.0 * nsswig::standard_normal(rng);
    p.theta[1] = 3.0 * nsswig::standard_normal(rng);
  }
  for (const bool pooled : {false, true}) {
    const auto cov = nsswig::estimate_block_cov(ps, model.dims(), pooled);
    const auto& b = cov.local_block(0).cov;
    EXPECT_NEAR(b(0, 0) / 4.0, 1.0, 0.05);
    EXPECT_NEAR(b(1, 1) / 9.0, 1.0, 0.05);
    EXPECT_LT(std::abs(b(0, 1)), 0.05 * 6.0);
  }
}

TEST(EstimateBlockCov, CrossBlockEntriesAreZero) {
  const nsswig::testing::CountingGaussModel model(std::vector<double>(6, 1.0), 2);
  const auto ps = particles_from(model, 50, 15);
  const auto dense = nsswig::estimate_block_cov(ps, model.dims(), false).dense(model.dims());
  ASSERT_EQ(dense.rows(), 7);
  for (Eigen::Index r = 0; r < 7; ++r) {
    for (Eigen::Index c = 0; c < 7; ++c) {
      const auto block_of = [](Eigen::Index i) { return i == 0 ? -1 : (i - 1) / 2; };
      if (block_of(r) != block_of(c)) {
        EXPECT_EQ(dense(r, c), 0.0);
      }
    }
  }
}

TEST(EstimateBlockCov, PooledAveragesWithinGroupScatter) {
  const nsswig::testing::CountingGaussModel model(std::vector<double>(2, 0.0), 1);
  auto rng = nsswig::make_stream(16, {1});
  std::vector<nsswig::ParamState> ps(20000, model.make_state());
  for (auto& p : ps) {
    p.psi[0] = 0.0;
    p.theta[0] = 100.0 + 1.0 * nsswig::standard_normal(rng);
    p.theta[1] = -50.0 + 3.0 * nsswig::standard_normal(rng);
  }
  const auto pooled = nsswig::estimate_block_cov(ps, model.dims(), true);
  EXPECT_NEAR(pooled.local_block(0).cov(0, 0), 5.0, 0.15);
  EXPECT_NEAR(pooled.local_block(1).cov(0, 0), 5.0, 0.15);
  const auto split = nsswig::estimate_block_cov(ps, model.dims(), false);
  EXPECT_NEAR(split.local_block(0).cov(0, 0), 1.0, 0.05);
  EXPECT_NEAR(split.local_block(1).cov(0, 0), 9.0, 0.3);
}

TEST(EstimateBlockCov, SubsetRestrictsTheEstimate) {
  const nsswig::testing::CountingGaussModel model(std::vector<double>(1, 0.0), 1);
  std::vector<nsswig::ParamState> ps(4, model.make_state());
  const double vals[] = {0.0, 2.0, 100.0, -100.0};
  for (std::size_t i = 0; i < 4; ++i) ps[i].psi[0] = ps[i].theta[0] = vals[i];
  const std::vector<std::size_t> subset{0, 1};
  const auto cov = nsswig::estimate_block_cov(ps, model.dims(), true, subset);
  EXPECT_NEAR(cov.psi->cov(0, 0), 2.0, 1e-6);
  const auto joint = nsswig::estimate_joint_cov(ps, model.dims(), subset);
  EXPECT_NEAR(joint.cov(0, 1), 2.0, 1e-6);
  const std::vector<std::size_t> one{3};
  EXPECT_THROW((void)nsswig::estimate_joint_cov(ps, model.dims(), one), nsswig::ModelError);
}

TEST(DefaultPool, DependsOnBlockSize) {
  EXPECT_TRUE(nsswig::default_pool_local_cov({1, 10, 1}));
  EXPECT_TRUE(nsswig::default_pool_local_cov({1, 10, 2}));
  EXPECT_FALSE(nsswig::default_pool_local_cov({1, 10, 3}));
}

}  // namespace
