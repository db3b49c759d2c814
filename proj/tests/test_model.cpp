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
#include <numbers>
#include <vector>

#include <nsswig/benchmarks.hpp>
#include <nsswig/model.hpp>

#include "support/stat_tests.hpp"
#include "support/test_models.hpp"

namespace {

using nsswig::kNegInf;

constexpr double kLn2Pi = 1.8378770664093453;

std::vector<double> v(std::initializer_list<double> xs) { return xs; }

nsswig::HierGaussModel make_hg(std::size_t groups = 3) {
  nsswig::HierGaussConfig cfg;
  cfg.groups = groups;
  return nsswig::HierGaussModel(cfg, std::vector<double>(groups, 3.0));
}

nsswig::FunnelModel make_funnel(std::size_t groups = 3) {
  nsswig::FunnelConfig cfg;
  cfg.groups = groups;
  return nsswig::FunnelModel(cfg);
}

TEST(LogPriorHyper, HierGaussAtZero) {
  const auto m = make_hg();
  EXPECT_NEAR(m.log_prior_hyper(v({0.0})), -0.5 * std::log(2.0 * std::numbers::pi * 100.0), 1e-12);
  EXPECT_NEAR(m.log_prior_hyper(v({0.0})), -3.2215, 1e-4);
}

TEST(LogPriorHyper, FunnelAtZero) {
  const auto m = make_funnel();
  EXPECT_NEAR(m.log_prior_hyper(v({0.0})), -2.0176, 1e-4);
}

TEST(LogPriorHyper, BoundedSupport) {
  const nsswig::SVModel m(4, std::vector<double>(4, 0.1));
  EXPECT_EQ(m.log_prior_hyper(v({0.0, 0.5, -1.0})), kNegInf);
  EXPECT_EQ(m.log_prior_hyper(v({0.0, 1.5, 0.3})), kNegInf);
  EXPECT_EQ(m.log_prior_hyper(v({60.0, 0.5, 0.3})), kNegInf);
  EXPECT_TRUE(std::isfinite(m.log_prior_hyper(v({0.0, 0.9, 0.3}))));
}

TEST(LogPriorHyper, NaNIsAnError) {
  const auto m = make_hg();
  EXPECT_THROW((void)m.log_prior_hyper(v({std::nan("")})), nsswig::ModelError);
}

TEST(LogPriorHyper, SVHyperpriorNormalizes) {
  const nsswig::SVModel m(4, std::vector<double>(4, 0.1));
  const std::vector<double> ref{0.0, 0.9, 0.3};
  const double log_ref = m.log_prior_hyper(ref);
  // The hyperprior factorizes, so each axis integral of p(x) / p(ref) equals 1 / p_axis(ref).
  auto axis_integral = [&](std::size_t axis, double lo, double hi, std::size_t n) {
    std::vector<double> psi = ref;
    const double h = (hi - lo) / static_cast<double>(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      psi[axis] = lo + (static_cast<double>(i) + 0.5) * h;
      s += std::exp(m.log_prior_hyper(psi) - log_ref);
    }
    return s * h;
  };
  const double log_product = -std::log(axis_integral(0, -50.0, 50.0, 400000)) -
                             std::log(axis_integral(1, -1.0, 1.0, 400000)) -
                             std::log(axis_integral(2, 0.0, 50.0, 2000000));
  EXPECT_NEAR(log_product, log_ref, 1e-3);
}

TEST(LogConditionalPrior, HierGauss) {
  const auto m = make_hg();
  EXPECT_NEAR(m.log_conditional_prior(v({3.0}), v({3.0}), 0), -1.6121, 1e-4);
}

TEST(LogConditionalPrior, FunnelUniform) {
  const auto m = make_funnel();
  EXPECT_NEAR(m.log_conditional_prior(v({0.0}), v({0.0}), 1), -std::log(200.0), 1e-12);
  EXPECT_NEAR(m.log_conditional_prior(v({0.0}), v({0.0}), 1), -5.2983, 1e-4);
  EXPECT_EQ(m.log_conditional_prior(v({150.0}), v({0.0}), 1), kNegInf);
}

TEST(LogConditionalPrior, MarkovModelIsAContractViolation) {
  const nsswig::SVModel m(4, std::vector<double>(4, 0.1));
  EXPECT_ANY_THROW((void)m.log_conditional_prior(v({0.0}), v({0.0, 0.9, 1.0}), 0));
}

TEST(LogBlanketPrior, InteriorSiteAtTheMeans) {
  const nsswig::SVModel m(5, std::vector<double>(5, 0.1));
  const auto prev = v({1.0});
  const auto cur = v({0.9});
  const auto next = v({0.81});
  const double lp = m.log_blanket_prior(2, nsswig::BlanketWindow{prev, cur, next}, v({0.0, 0.9, 1.0}));
  EXPECT_NEAR(lp, -kLn2Pi, 1e-12);
  EXPECT_NEAR(lp, -1.8379, 1e-4);
}

TEST(LogBlanketPrior, Boundaries) {
  const nsswig::SVModel m(5, std::vector<double>(5, 0.1));
  const auto psi = v({0.0, 0.9, 1.0});
  const auto a = v({1.0});
  const auto b = v({0.3});
  const double last = m.log_blanket_prior(4, nsswig::BlanketWindow{a, b, {}}, psi);
  EXPECT_NEAR(last, nsswig::normal_logpdf(0.3, 0.9, 1.0), 1e-12);
  const double first = m.log_blanket_prior(0, nsswig::BlanketWindow{{}, a, b}, psi);
  EXPECT_NEAR(first, nsswig::normal_logpdf(1.0, 0.0, 1.0 / (1.0 - 0.81)) + nsswig::normal_logpdf(0.3, 0.9, 1.0),
              1e-12);
}

TEST(LogBlanketPrior, OutOfRangeThrows) {
  const nsswig::SVModel m(5, std::vector<double>(5, 0.1));
  auto s = m.make_state();
  s.psi = v({0.0, 0.9, 1.0});
  EXPECT_ANY_THROW((void)m.log_blanket_prior(5, s));
}

TEST(GroupLoglike, Examples) {
  EXPECT_NEAR(make_hg().group_loglike(v({3.0}), v({0.0}), 0), -0.9189, 1e-4);
  EXPECT_NEAR(make_funnel().group_loglike(v({0.0}), v({0.0}), 0), -0.9189, 1e-4);
  const nsswig::SVModel sv(3, v({0.0, 0.0, 0.0}));
  for (const double th : {-2.0, 0.0, 1.5}) {
    EXPECT_NEAR(sv.group_loglike(v({th}), v({0.0, 0.9, 1.0}), 1), -0.5 * (kLn2Pi + th), 1e-12);
  }
}

TEST(GroupLoglike, NaNIsAnError) {
  const auto m = make_hg();
  EXPECT_THROW((void)m.group_loglike(v({std::nan("")}), v({0.0}), 0), nsswig::ModelError);
  EXPECT_THROW((void)m.log_conditional_prior(v({0.0}), v({std::nan("")}), 0), nsswig::ModelError);
}

TEST(GroupLoglike, NaNOutputIsAnError) {
  const nsswig::testing::NaNModel m;
  EXPECT_THROW((void)m.group_loglike(v({0.95}), {}, 0), nsswig::ModelError);
}

TEST(TotalLoglike, SumsTheGroups) {
  const nsswig::testing::UnitCubeModel m(3, [](double, std::size_t j) { return std::vector{-2.0, -3.0, -5.0}[j]; });
  std::vector<double> ell(3);
  EXPECT_DOUBLE_EQ(m.total_loglike({}, v({0.1, 0.2, 0.3}), ell), -10.0);
  EXPECT_EQ(ell, v({-2.0, -3.0, -5.0}));
}

TEST(TotalLoglike, NegativeInfinityIsAbsorbing) {
  const nsswig::testing::UnitCubeModel m(3, [](double, std::size_t j) { return j == 1 ? kNegInf : 4.0; });
  std::vector<double> ell(3);
  EXPECT_EQ(m.total_loglike({}, v({0.1, 0.2, 0.3}), ell), kNegInf);
}

TEST(SamplePrior, HierGaussHyperMoments) {
  const auto m = make_hg();
  auto rng = nsswig::make_stream(11, {1});
  std::vector<double> psi(100000);
  for (auto& p : psi) p = m.sample_prior(rng).psi[0];
  EXPECT_NEAR(nsswig::testing::mean(psi), 0.0, 0.1);
  EXPECT_NEAR(std::sqrt(nsswig::testing::variance(psi)) / 10.0, 1.0, 0.02);
}

TEST(SamplePrior, FunnelLocalMarginalIsUniform) {
  const auto m = make_funnel();
  auto rng = nsswig::make_stream(12, {1});
  std::vector<double> th(20000);
  for (auto& t : th) {
    const auto s = m.sample_prior(rng);
    t = s.theta[1];
    ASSERT_GT(m.log_conditional_prior(std::span<const double>(&t, 1), s.psi, 1), kNegInf);
  }
  EXPECT_GT(nsswig::testing::ks_test(th, [](double x) { return (x + 100.0) / 200.0; }), 0.01);
}

TEST(SamplePrior, MarkovLag1Autocorrelation) {
  const nsswig::testing::GaussAR1Model m(std::vector<double>(20000, 0.0), 0.5, 0.9, 1.0, 1.0);
  auto rng = nsswig::make_stream(13, {1});
  const auto s = m.sample_prior(rng);
  EXPECT_NEAR(nsswig::testing::lag1_autocorr(s.theta), 0.9, 0.05);
}

TEST(SamplePrior, SVChainFollowsItsDrawnHyperparameters) {
  const nsswig::SVModel m(2000, std::vector<double>(2000, 0.1));
  auto rng = nsswig::make_stream(14, {1});
  for (int rep = 0; rep < 5; ++rep) {
    const auto s = m.sample_prior(rng);
    ASSERT_GT(s.psi[1], -1.0);
    ASSERT_LT(s.psi[1], 1.0);
    ASSERT_GT(s.psi[2], 0.0);
    ASSERT_TRUE(std::isfinite(s.log_prior));
    EXPECT_NEAR(nsswig::testing::lag1_autocorr(s.theta), s.psi[1], 0.05);
  }
}

TEST(SamplePrior, CachesArePopulated) {
  const auto m = make_hg(7);
  auto rng = nsswig::make_stream(15, {1});
  for (int rep = 0; rep < 100; ++rep) {
    const auto s = m.sample_prior(rng);
    std::vector<double> ell(7);
    const double fresh = m.total_loglike(s.psi, s.theta, ell);
    EXPECT_NEAR(s.total_loglike, fresh, 1e-9 * std::max(1.0, std::abs(fresh)));
    EXPECT_NEAR(s.total_loglike, s.ell_sum(), 1e-9 * std::max(1.0, std::abs(fresh)));
    EXPECT_NEAR(s.log_prior, m.log_joint_prior(s.psi, s.theta), 1e-12);
  }
}

TEST(MarkovLocality, PerturbationChangesOnlyTheBlanket) {
  constexpr std::size_t T = 12;
  const nsswig::SVModel m(T, std::vector<double>(T, 0.2));
  auto rng = nsswig::make_stream(16, {1});
  for (int rep = 0; rep < 200; ++rep) {
    auto s = m.sample_prior(rng);
    std::vector<double> before(T);
    for (std::size_t t = 0; t < T; ++t) before[t] = m.log_blanket_prior(t, s);
    const std::size_t k = static_cast<std::size_t>(rep) % T;
    s.theta[k] += 0.5 + nsswig::uniform01(rng);
    for (std::size_t t = 0; t < T; ++t) {
      const double after = m.log_blanket_prior(t, s);
      const bool in_blanket = (t + 1 >= k) && (t <= k + 1);
      if (in_blanket) {
        EXPECT_NE(after, before[t]) << "site " << t << " perturbed " << k;
      } else {
        EXPECT_EQ(after, before[t]) << "site " << t << " perturbed " << k;
      }
    }
  }
}

TEST(MarkovLocality, BlanketDifferencesMatchTheChainDensity) {
  constexpr std::size_t T = 9;
  const nsswig::SVModel m(T, std::vector<double>(T, 0.2));
  auto rng = nsswig::make_stream(17, {1});
  for (int rep = 0; rep < 50; ++rep) {
    auto s = m.sample_prior(rng);
    const std::size_t k = static_cast<std::size_t>(rep) % T;
    const double chain0 = m.log_local_prior(s.theta, s.psi);
    const double blanket0 = m.log_blanket_prior(k, s);
    s.theta[k] -= 0.7;
    EXPECT_NEAR(m.log_local_prior(s.theta, s.psi) - chain0, m.log_blanket_prior(k, s) - blanket0, 1e-10);
  }
}

TEST(ModelDims, Validation) {
  EXPECT_THROW((nsswig::ModelDims{0, 0, 1}.validate()), nsswig::ModelError);
  EXPECT_THROW((nsswig::ModelDims{0, 1, 0}.validate()), nsswig::ModelError);
  EXPECT_NO_THROW((nsswig::ModelDims{2, 3, 4}.validate()));
  EXPECT_EQ((nsswig::ModelDims{2, 3, 4}.d_total()), 14U);
}

TEST(ParamState, JointRoundTrip) {
  const auto m = make_hg(3);
  auto s = m.make_state();
  s.set_joint(v({1.0, 2.0, 3.0, 4.0}));
  EXPECT_EQ(s.psi, v({1.0}));
  EXPECT_EQ(s.theta, v({2.0, 3.0, 4.0}));
  EXPECT_EQ(s.joint(), v({1.0, 2.0, 3.0, 4.0}));
}

}  // namespace
