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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <nsswig/diag.hpp>

namespace nsswig {

namespace {

std::size_t check_dims(const Points& a, const Points& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("mmd needs two non-empty sample sets");
  const std::size_t d = a.front().size();
  auto bad = [d](const std::vector<double>& p) { return p.size() != d; };
  if (std::any_of(a.begin(), a.end(), bad) || std::any_of(b.begin(), b.end(), bad)) {
    throw std::invalid_argument("mmd sample sets differ in dimension");
  }
  return d;
}

double sq_dist(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = x[i] - y[i];
    s += r * r;
  }
  return s;
}

/// n draws without replacement (the whole set when n >= size), via a partial Fisher-Yates shuffle.
Points subsample(const Points& pts, std::size_t n, Rng& rng) {
  if (n >= pts.size()) return pts;
  std::vector<std::size_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Points out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
    out.push_back(pts[idx[i]]);
  }
  return out;
}

void standardize(Points& a, Points& b) {
  const std::size_t d = a.front().size();
  const auto n = static_cast<double>(a.size() + b.size());
  for (std::size_t k = 0; k < d; ++k) {
    double mean = 0.0;
    for (const auto* set : {&a, &b}) {
      for (const auto& p : *set) mean += p[k];
    }
    mean /= n;
    double var = 0.0;
    for (const auto* set : {&a, &b}) {
      for (const auto& p : *set) var += (p[k] - mean) * (p[k] - mean);
    }
    const double sd = std::sqrt(var / (n - 1.0));
    const double scale = sd > 0.0 ? 1.0 / sd : 1.0;
    for (auto* set : {&a, &b}) {
      for (auto& p : *set) p[k] = (p[k] - mean) * scale;
    }
  }
}

}  // namespace

std::pair<double, double> mmd_once(const Points& a, const Points& b) {
  check_dims(a, b);
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const std::size_t n = na + nb;
  auto at = [&](std::size_t i) -> const std::vector<double>& { return i < na ? a[i] : b[i - na]; };

  // Pairwise squared distances over the combined set, upper triangle.
  std::vector<double> d2(n * n, 0.0);
  double dist_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = sq_dist(at(i), at(j));
      d2[i * n + j] = s;
      d2[j * n + i] = s;
      dist_sum += std::sqrt(s);
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double h = n > 1 ? dist_sum / pairs : 0.0;
  if (!(h > 0.0)) return {0.0, h};
  const double inv = 1.0 / (2.0 * h * h);

  double kxx = 0.0;
  double kyy = 0.0;
  double kxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double k = std::exp(-d2[i * n + j] * inv);
      if (i < na && j < na) {
        kxx += k;
      } else if (i >= na && j >= na) {
        kyy += k;
      } else if (i < na) {
        kxy += k;
      }
    }
  }
  const auto fa = static_cast<double>(na);
  const auto fb = static_cast<double>(nb);
  return {kxx / (fa * fa) + kyy / (fb * fb) - 2.0 * kxy / (fa * fb), h};
}

MMDResult mmd(const Points& a, const Points& b, Rng& rng, const MMDOptions& opts) {
  check_dims(a, b);
  if (opts.repeats < 1 || opts.n_sub < 1) throw std::invalid_argument("mmd needs n_sub >= 1 and repeats >= 1");
  std::vector<double> values;
  double bw = 0.0;
  std::size_t used = 0;
  for (std::size_t r = 0; r < opts.repeats; ++r) {
    Points sa = subsample(a, opts.n_sub, rng);
    Points sb = subsample(b, opts.n_sub, rng);
    if (opts.standardize) standardize(sa, sb);
    const auto [v, h] = mmd_once(sa, sb);
    values.push_back(v);
    bw += h;
    used = std::max(sa.size(), sb.size());
  }
  const auto ms = mean_std(values);
  MMDResult out;
  out.value = std::max(ms.mean, 0.0);
  out.std_over_repeats = ms.std;
  out.bandwidth = bw / static_cast<double>(opts.repeats);
  out.n_subsample = used;
  out.n_repeats = opts.repeats;
  return out;
}

}  // namespace nsswig
