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

#include <nsswig/benchmarks.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include <nsswig/math.hpp>

namespace nsswig {

namespace {

constexpr std::uint64_t kHgDataTag = 0x4847;
constexpr std::uint64_t kSvDataTag = 0x5356;

}  // namespace

// Hierarchical Gaussian.

void HierGaussConfig::validate() const {
  if (!(sigma_psi > 0.0 && sigma_theta > 0.0 && sigma_obs > 0.0)) {
    throw std::invalid_argument("hierarchical Gaussian standard deviations must be positive");
  }
  if (groups < 1) throw std::invalid_argument("hierarchical Gaussian needs at least one group");
}

HierGaussModel::HierGaussModel(HierGaussConfig cfg, std::vector<double> y)
    : Model(ModelDims{1, cfg.groups, 1}, Structure::iid), cfg_{cfg}, y_{std::move(y)} {
  cfg_.validate();
  if (y_.size() != cfg_.groups) throw std::invalid_argument("data length must equal the number of groups");
  logz_ = hg_analytic_logz(y_, cfg_);
  obs_var_ = cfg_.sigma_obs * cfg_.sigma_obs;
  theta_var_ = cfg_.sigma_theta * cfg_.sigma_theta;
  obs_lognorm_ = -0.5 * (kLog2Pi + std::log(obs_var_));
  theta_lognorm_ = -0.5 * (kLog2Pi + std::log(theta_var_));
}

double HierGaussModel::do_log_prior_hyper(std::span<const double> psi) const {
  return normal_logpdf(psi[0], cfg_.mu0, cfg_.sigma_psi * cfg_.sigma_psi);
}

double HierGaussModel::do_group_loglike(std::span<const double> theta, std::span<const double>,
                                        std::size_t j) const {
  const double r = y_[j] - theta[0];
  return obs_lognorm_ - 0.5 * r * r / obs_var_;
}

void HierGaussModel::do_sample_hyper(Rng& rng, std::span<double> psi) const {
  psi[0] = cfg_.mu0 + cfg_.sigma_psi * standard_normal(rng);
}

double HierGaussModel::do_log_conditional_prior(std::span<const double> theta, std::span<const double> psi,
                                                std::size_t) const {
  const double r = theta[0] - psi[0];
  return theta_lognorm_ - 0.5 * r * r / theta_var_;
}

void HierGaussModel::do_sample_conditional(Rng& rng, std::span<const double> psi, std::size_t,
                                           std::span<double> out) const {
  out[0] = psi[0] + cfg_.sigma_theta * standard_normal(rng);
}

std::vector<double> generate_hg_data(const HierGaussConfig& cfg) {
  cfg.validate();
  Rng rng = make_stream(cfg.seed, {kHgDataTag});
  std::vector<double> y(cfg.groups);
  for (auto& v : y) {
    const double theta = cfg.psi_true + cfg.sigma_theta * standard_normal(rng);
    v = theta + cfg.sigma_obs * standard_normal(rng);
  }
  return y;
}

double hg_analytic_logz(std::span<const double> y, const HierGaussConfig& cfg) {
  const auto n = static_cast<double>(y.size());
  const double tau2 = cfg.sigma_theta * cfg.sigma_theta + cfg.sigma_obs * cfg.sigma_obs;
  const double s2 = cfg.sigma_psi * cfg.sigma_psi;
  const double denom = tau2 + n * s2;
  double rr = 0.0;
  double rsum = 0.0;
  for (const double v : y) {
    const double r = v - cfg.mu0;
    rr += r * r;
    rsum += r;
  }
  const double logdet = (n - 1.0) * std::log(tau2) + std::log(denom);
  const double quad = (rr - s2 * rsum * rsum / denom) / tau2;
  return -0.5 * (n * kLog2Pi + logdet + quad);
}

// Funnel.

void FunnelConfig::validate() const {
  if (!(sigma_psi_sq > 0.0 && theta_bound > 0.0)) throw std::invalid_argument("funnel scales must be positive");
  if (groups < 1) throw std::invalid_argument("funnel needs at least one group");
}

FunnelModel::FunnelModel(FunnelConfig cfg) : Model(ModelDims{1, cfg.groups, 1}, Structure::iid), cfg_{cfg} {
  cfg_.validate();
  logz_ = funnel_analytic_logz(cfg_);
}

double FunnelModel::do_log_prior_hyper(std::span<const double> psi) const {
  return normal_logpdf(psi[0], 0.0, cfg_.sigma_psi_sq);
}

double FunnelModel::do_group_loglike(std::span<const double> theta, std::span<const double> psi,
                                     std::size_t) const {
  return -0.5 * (kLog2Pi + psi[0] + theta[0] * theta[0] * std::exp(-psi[0]));
}

void FunnelModel::do_sample_hyper(Rng& rng, std::span<double> psi) const {
  psi[0] = std::sqrt(cfg_.sigma_psi_sq) * standard_normal(rng);
}

double FunnelModel::do_log_conditional_prior(std::span<const double> theta, std::span<const double>,
                                             std::size_t) const {
  const double b = cfg_.theta_bound;
  if (theta[0] < -b || theta[0] > b) return kNegInf;
  return -std::log(2.0 * b);
}

void FunnelModel::do_sample_conditional(Rng& rng, std::span<const double>, std::size_t,
                                        std::span<double> out) const {
  out[0] = cfg_.theta_bound * (2.0 * uniform01(rng) - 1.0);
}

double funnel_analytic_logz(const FunnelConfig& cfg, double tolerance) {
  cfg.validate();
  const double b = cfg.theta_bound;
  const auto groups = static_cast<double>(cfg.groups);
  // Integrand scaled by (2b)^J so it is O(1) near the hyperprior mode.
  auto f = [&](double psi) {
    const double mass = std::erf(b * std::exp(-0.5 * psi) / std::numbers::sqrt2);
    if (!(mass > 0.0)) return 0.0;
    return std::exp(normal_logpdf(psi, 0.0, cfg.sigma_psi_sq) + groups * std::log(mass));
  };
  double error = 0.0;
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -40.0, 40.0, 20, tolerance, &error);
  if (!(integral > 0.0) || !(error / integral < 1e-6)) {
    throw std::runtime_error(fmt::format("funnel evidence quadrature did not converge (I = {}, err = {})", integral, error));
  }
  return std::log(integral) - groups * std::log(2.0 * b);
}

// Stochastic volatility.

void SVConfig::validate() const {
  if (!(std::abs(beta) < 1.0)) throw std::invalid_argument("SV persistence must satisfy |beta| < 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("SV volatility-of-volatility must be positive");
  if (sites < 1) throw std::invalid_argument("SV needs at least one site");
}

double sv_obs_loglike(double y, double log_var) noexcept {
  const double quad = (y == 0.0) ? 0.0 : y * y * std::exp(-log_var);
  return -0.5 * (kLog2Pi + log_var + quad);
}

SVModel::SVModel(std::size_t sites, std::vector<double> y)
    : Model(ModelDims{3, sites, 1}, Structure::markov), y_{std::move(y)} {
  if (y_.size() != sites) throw std::invalid_argument("data length must equal the number of sites");
}

namespace {

// Normalizers of the truncated Cauchy priors.
double mu_log_mass() { return std::log(2.0 / std::numbers::pi * std::atan(SVModel::kMuBound / SVModel::kMuScale)); }
double sigma_log_mass() {
  return std::log(2.0 / std::numbers::pi * std::atan(SVModel::kSigmaBound / SVModel::kSigmaScale));
}

double stationary_var(double beta, double sigma) { return sigma * sigma / (1.0 - beta * beta); }

}  // namespace

double SVModel::do_log_prior_hyper(std::span<const double> psi) const {
  const double mu = psi[0];
  const double beta = psi[1];
  const double sigma = psi[2];
  if (!(std::abs(mu) <= kMuBound) || !(beta > -1.0 && beta < 1.0) || !(sigma > 0.0 && sigma <= kSigmaBound)) {
    return kNegInf;
  }
  const double zm = mu / kMuScale;
  const double lp_mu = -std::log(std::numbers::pi * kMuScale * (1.0 + zm * zm)) - mu_log_mass();
  const double zs = sigma / kSigmaScale;
  const double lp_sigma = std::log(2.0) - std::log(std::numbers::pi * kSigmaScale * (1.0 + zs * zs)) - sigma_log_mass();
  const double u = 0.5 * (beta + 1.0);
  const double log_beta_fn = std::lgamma(kBetaA) + std::lgamma(kBetaB) - std::lgamma(kBetaA + kBetaB);
  const double lp_beta = (kBetaA - 1.0) * std::log(u) + (kBetaB - 1.0) * std::log1p(-u) - log_beta_fn - std::log(2.0);
  return lp_mu + lp_beta + lp_sigma;
}

double SVModel::do_group_loglike(std::span<const double> theta, std::span<const double>, std::size_t j) const {
  return sv_obs_loglike(y_[j], theta[0]);
}

void SVModel::do_sample_hyper(Rng& rng, std::span<double> psi) const {
  psi[0] = kMuScale * std::tan((uniform01(rng) - 0.5) * 2.0 * std::atan(kMuBound / kMuScale));
  double g1 = 0.0;
  double u = 1.0;
  do {
    g1 = std::gamma_distribution<double>{kBetaA, 1.0}(rng);
    const double g2 = std::gamma_distribution<double>{kBetaB, 1.0}(rng);
    u = g1 / (g1 + g2);
  } while (!(u > 0.0 && u < 1.0));
  psi[1] = 2.0 * u - 1.0;
  double s = 0.0;
  do {
    s = kSigmaScale * std::tan(uniform01(rng) * std::atan(kSigmaBound / kSigmaScale));
  } while (!(s > 0.0));
  psi[2] = s;
}

double SVModel::do_log_initial_prior(std::span<const double> theta0, std::span<const double> psi) const {
  if (!(std::abs(psi[1]) < 1.0) || !(psi[2] > 0.0)) return kNegInf;
  return normal_logpdf(theta0[0], psi[0], stationary_var(psi[1], psi[2]));
}

double SVModel::do_log_transition(std::span<const double> prev, std::span<const double> cur,
                                  std::span<const double> psi) const {
  if (!(psi[2] > 0.0)) return kNegInf;
  return normal_logpdf(cur[0], psi[0] + psi[1] * (prev[0] - psi[0]), psi[2] * psi[2]);
}

void SVModel::do_sample_initial(Rng& rng, std::span<const double> psi, std::span<double> out) const {
  out[0] = psi[0] + std::sqrt(stationary_var(psi[1], psi[2])) * standard_normal(rng);
}

void SVModel::do_sample_transition(Rng& rng, std::span<const double> prev, std::span<const double> psi,
                                   std::span<double> out) const {
  out[0] = psi[0] + psi[1] * (prev[0] - psi[0]) + psi[2] * standard_normal(rng);
}

SVData generate_sv_data(const SVConfig& cfg) {
  cfg.validate();
  Rng rng = make_stream(cfg.seed, {kSvDataTag});
  SVData out;
  out.y.resize(cfg.sites);
  out.log_vol.resize(cfg.sites);
  double theta = cfg.mu + std::sqrt(stationary_var(cfg.beta, cfg.sigma)) * standard_normal(rng);
  for (std::size_t t = 0; t < cfg.sites; ++t) {
    if (t > 0) theta = cfg.mu + cfg.beta * (theta - cfg.mu) + cfg.sigma * standard_normal(rng);
    out.log_vol[t] = theta;
    out.y[t] = std::exp(0.5 * theta) * standard_normal(rng);
  }
  return out;
}

// Accounting and information.

EvalCounter count_equivalents(EvalCounter counter, std::uint64_t calls) noexcept {
  counter.group_calls += calls;
  return counter;
}

EvalCounter count_psi_checks(EvalCounter counter, std::uint64_t checks) noexcept {
  counter.group_calls += checks * counter.groups;
  return counter;
}

double gaussian_kl(double mu1, double var1, double mu0, double var0) noexcept {
  const double r = mu1 - mu0;
  return 0.5 * (var1 / var0 + r * r / var0 - 1.0 + std::log(var0 / var1));
}

InfoDecomposition hg_info_decomposition(std::span<const double> y, const HierGaussConfig& cfg) {
  const auto n = static_cast<double>(y.size());
  const double s2 = cfg.sigma_psi * cfg.sigma_psi;
  const double t2 = cfg.sigma_theta * cfg.sigma_theta;
  const double o2 = cfg.sigma_obs * cfg.sigma_obs;
  const double tau2 = t2 + o2;
  const double post_var = 1.0 / (1.0 / s2 + n / tau2);
  const double post_mean = post_var * (cfg.mu0 / s2 + std::accumulate(y.begin(), y.end(), 0.0) / tau2);

  InfoDecomposition out;
  out.h_psi = gaussian_kl(post_mean, post_var, cfg.mu0, s2);
  // E_psi KL(p(theta_j | psi, y_j) || p(theta_j | psi)); the conditional mean shifts with psi.
  const double v = 1.0 / (1.0 / t2 + 1.0 / o2);
  double sum = *out.h_psi;
  out.h_local.reserve(y.size());
  for (const double yj : y) {
    const double r = yj - post_mean;
    const double shift2 = v * v * (r * r + post_var) / (o2 * o2);
    const double h = 0.5 * (v / t2 + shift2 / t2 - 1.0 + std::log(t2 / v));
    out.h_local.push_back(h);
    sum += h;
  }
  out.analytic_total = sum;
  return out;
}

InfoDecomposition info_decomposition_report(const Model& model, const RunResult& run) {
  InfoDecomposition out;
  if (const auto* hg = dynamic_cast<const HierGaussModel*>(&model)) {
    out = hg_info_decomposition(hg->data(), hg->config());
    out.relative_error = std::abs(run.h - *out.analytic_total) / *out.analytic_total;
    out.within_tolerance = *out.relative_error <= 0.2;
  }
  out.total_h = run.h;
  return out;
}

// Observation files.

void write_observations(const std::filesystem::path& path, const ObservationFile& obs) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  os << fmt::format("# model={} seed={} J={}\n", obs.model, obs.seed, obs.values.size());
  for (const double v : obs.values) os << fmt::format("{:.17g}\n", v);
  if (!os) throw std::runtime_error(fmt::format("failed writing {}", path.string()));
}

ObservationFile read_observations(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  std::string header;
  std::getline(is, header);
  ObservationFile out;
  std::size_t count = 0;
  bool have_model = false;
  bool have_seed = false;
  bool have_count = false;
  std::istringstream hs(header);
  std::string tok;
  hs >> tok;
  if (tok != "#") throw std::runtime_error(fmt::format("{}: missing header", path.string()));
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::runtime_error(fmt::format("{}: malformed header field '{}'", path.string(), tok));
    const std::string key = tok.substr(0, eq);
    const std::string value = tok.substr(eq + 1);
    if (key == "model") {
      out.model = value;
      have_model = true;
    } else if (key == "seed") {
      out.seed = std::stoull(value);
      have_seed = true;
    } else if (key == "J") {
      count = std::stoull(value);
      have_count = true;
    }
  }
  if (!have_model || !have_seed || !have_count) {
    throw std::runtime_error(fmt::format("{}: header needs model, seed and J", path.string()));
  }
  double v = 0.0;
  while (is >> v) out.values.push_back(v);
  if (!is.eof()) throw std::runtime_error(fmt::format("{}: non-numeric observation", path.string()));
  if (out.values.size() != count) {
    throw std::runtime_error(fmt::format("{}: header says J={} but found {} values", path.string(), count, out.values.size()));
  }
  return out;
}

}  // namespace nsswig
