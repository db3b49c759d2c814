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

#ifndef NSSWIG_TESTS_ORACLES_HPP
#define NSSWIG_TESTS_ORACLES_HPP

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <nsswig/benchmarks.hpp>
#include <nsswig/kernel.hpp>
#include <nsswig/slice.hpp>

namespace nsswig::testing {

inline double normal_cdf(double x, double mean, double sd) {
  return boost::math::cdf(boost::math::normal_distribution<double>(mean, sd), x);
}

/// Conjugate psi | theta for the hierarchical Gaussian: {mean, variance}.
inline std::pair<double, double> hg_psi_conditional(const HierGaussConfig& c, std::span<const double> theta) {
  const double prec = 1.0 / (c.sigma_psi * c.sigma_psi) + static_cast<double>(theta.size()) / (c.sigma_theta * c.sigma_theta);
  double s = 0.0;
  for (const double t : theta) s += t;
  const double mean = (c.mu0 / (c.sigma_psi * c.sigma_psi) + s / (c.sigma_theta * c.sigma_theta)) / prec;
  return {mean, 1.0 / prec};
}

/// Block covariance at prior scale: psi variance sigma_psi^2, pooled local variance sigma_theta^2.
inline BlockCovariance prior_scale_cov(const HierGaussConfig& c) {
  BlockCovariance cov;
  cov.psi = make_cov_block(Eigen::MatrixXd::Constant(1, 1, c.sigma_psi * c.sigma_psi));
  cov.local.push_back(make_cov_block(Eigen::MatrixXd::Constant(1, 1, c.sigma_theta * c.sigma_theta)));
  cov.pooled = true;
  return cov;
}

/// Full conditional of an AR(1) site given its blanket: {mean, sd}.
inline std::pair<double, double> ar1_site_conditional(double mu, double beta, double sigma, std::size_t t, std::size_t sites,
                                                      double prev, double next) {
  if (sites == 1) return {mu, sigma / std::sqrt(1.0 - beta * beta)};
  if (t == 0) return {mu + beta * (next - mu), sigma};
  if (t + 1 == sites) return {mu + beta * (prev - mu), sigma};
  const double denom = 1.0 + beta * beta;
  return {mu + beta * ((prev - mu) + (next - mu)) / denom, sigma / std::sqrt(denom)};
}

/// Two-group hierarchical Gaussian truncated at the prior median of the likelihood.
/**
 * With sigma_obs = 1 the constraint S > lstar is the disc |y - theta| < R. Integrating
 * psi out leaves theta ~ N(mu0 1, tau^2 I + sigma_psi^2 1 1^T) with tau = sigma_theta.
 */
struct TwoGroupDisc {
  HierGaussConfig cfg;
  std::vector<double> y;
  double radius = 0.0;
  double lstar = 0.0;

  [[nodiscard]] double marginal_var() const { return cfg.sigma_psi * cfg.sigma_psi + cfg.sigma_theta * cfg.sigma_theta; }

  /// theta_2 | theta_1 under the prior: {mean, sd}.
  [[nodiscard]] std::pair<double, double> cond2(double theta1) const {
    const double v = marginal_var();
    const double c = cfg.sigma_psi * cfg.sigma_psi;
    return {cfg.mu0 + c / v * (theta1 - cfg.mu0), std::sqrt(v - c * c / v)};
  }

  /// Prior density of theta_1 times the probability that theta_2 lands inside the disc.
  [[nodiscard]] double density1(double theta1, double r) const {
    const double dx = theta1 - y[0];
    if (std::abs(dx) >= r) return 0.0;
    const double h = std::sqrt(r * r - dx * dx);
    const auto [m, s] = cond2(theta1);
    const double sd1 = std::sqrt(marginal_var());
    const double phi = std::exp(-0.5 * (theta1 - cfg.mu0) * (theta1 - cfg.mu0) / (sd1 * sd1)) / (sd1 * std::sqrt(2.0 * std::numbers::pi));
    return phi * (normal_cdf(y[1] + h, m, s) - normal_cdf(y[1] - h, m, s));
  }

  [[nodiscard]] double mass(double lo, double hi, double r) const {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double t) { return density1(t, r); }, lo, hi, 15, 1e-12);
  }

  [[nodiscard]] double disc_mass(double r) const { return mass(y[0] - r, y[0] + r, r); }

  /// Bin probabilities of theta_1 over `bins` equal bins spanning [y1 - R, y1 + R].
  [[nodiscard]] std::vector<double> theta1_bins(std::size_t bins) const {
    std::vector<double> p(bins);
    const double w = 2.0 * radius / static_cast<double>(bins);
    double total = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
      p[b] = mass(y[0] - radius + static_cast<double>(b) * w, y[0] - radius + static_cast<double>(b + 1) * w, radius);
      total += p[b];
    }
    for (auto& v : p) v /= total;
    return p;
  }

  [[nodiscard]] std::size_t bin_of(double theta1, std::size_t bins) const {
    const double u = (theta1 - (y[0] - radius)) / (2.0 * radius);
    const auto b = static_cast<std::size_t>(std::floor(u * static_cast<double>(bins)));
    return std::min(b, bins - 1);
  }

  /// Exact draw from the truncated prior by rejection.
  [[nodiscard]] ParamState draw(const Model& model, Rng& rng) const {
    for (;;) {
      auto s = model.sample_prior(rng);
      if (s.total_loglike > lstar) return s;
    }
  }
};

inline TwoGroupDisc make_two_group_disc() {
  TwoGroupDisc d;
  d.cfg.groups = 2;
  d.y = {4.0, 1.0};
  const double target = 0.5;
  const auto [lo, hi] = boost::math::tools::bisect(
      [&](double r) { return d.disc_mass(r) - target; }, 0.1, 100.0,
      [](double a, double b) { return std::abs(a - b) < 1e-12; });
  d.radius = 0.5 * (lo + hi);
  d.lstar = -std::log(2.0 * std::numbers::pi) - 0.5 * d.radius * d.radius;
  return d;
}

}  // namespace nsswig::testing

#endif  // NSSWIG_TESTS_ORACLES_HPP
