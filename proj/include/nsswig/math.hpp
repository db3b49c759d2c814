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

#ifndef NSSWIG_MATH_HPP
#define NSSWIG_MATH_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

namespace nsswig {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// log(exp(a) + exp(b)) without overflow; handles -inf operands.
inline double log_add_exp(double a, double b) noexcept {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

/// log(exp(a) - exp(b)) for a >= b.
inline double log_sub_exp(double a, double b) noexcept {
  if (b == kNegInf) return a;
  if (a == b) return kNegInf;
  return a + std::log(-std::expm1(b - a));
}

inline double log_sum_exp(std::span<const double> xs) noexcept {
  double hi = kNegInf;
  for (const double x : xs) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double acc = 0.0;
  for (const double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

inline double normal_logpdf(double x, double mean, double variance) noexcept {
  const double r = x - mean;
  return -0.5 * (kLog2Pi + std::log(variance) + r * r / variance);
}

inline double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace nsswig

#endif  // NSSWIG_MATH_HPP
