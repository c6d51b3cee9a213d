//
// Copyright 2026 The dpbyz Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// The log-moment computations follow Mironov, Talwar and Zhang, "Renyi
// Differential Privacy of the Sampled Gaussian Mechanism" (2019): an exact
// binomial sum for integer orders and a two-sided erfc series for
// fractional ones, all in log space.

#include "dpbyz/accountant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dpbyz/errors.hpp"

namespace dpbyz {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSigmaLo = 1e-2;
constexpr double kSigmaHi = 1e2;

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
}

// log(exp(a) - exp(b)) for a >= b; -inf when the difference vanishes.
double log_sub(double a, double b) {
  if (b == kNegInf) return a;
  if (b >= a) return kNegInf;
  return a + std::log(-std::expm1(b - a));
}

double log_binom(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double log_erfc(double x) {
  if (x < 25.0) return std::log(std::erfc(x));
  // Asymptotic expansion; erfc underflows past ~26.
  const double x2 = x * x;
  return -x2 - std::log(x) - 0.5 * std::log(std::numbers::pi) +
         std::log1p(-0.5 / x2 + 0.75 / (x2 * x2) - 1.875 / (x2 * x2 * x2));
}

double log_a_integer(double q, double sigma, int alpha) {
  double log_a = kNegInf;
  const double lq = std::log(q), l1q = std::log1p(-q);
  for (int i = 0; i <= alpha; ++i) {
    const double di = i;
    const double coef = log_binom(alpha, di) + di * lq + (alpha - di) * l1q;
    log_a = log_add(log_a, coef + (di * di - di) / (2.0 * sigma * sigma));
  }
  return log_a;
}

double log_a_fractional(double q, double sigma, double alpha) {
  double log_a0 = kNegInf, log_a1 = kNegInf;
  const double z0 = sigma * sigma * std::log(1.0 / q - 1.0) + 0.5;
  const double lq = std::log(q), l1q = std::log1p(-q);
  const double s2 = sigma * sigma;
  for (int i = 0; i < 100000; ++i) {
    const double di = i;
    // Generalized binomial coefficient; its sign alternates once i > alpha.
    const double coef_log = std::lgamma(alpha + 1.0) - std::lgamma(di + 1.0) -
                            std::lgamma(alpha - di + 1.0);
    double sign_gamma = 1.0;
    {
      // sign of Gamma(alpha - i + 1) for non-integer alpha
      const double arg = alpha - di + 1.0;
      if (arg < 0.0 && static_cast<long>(std::floor(arg)) % 2 != 0) sign_gamma = -1.0;
    }
    const double j = alpha - di;
    const double log_t0 = coef_log + di * lq + j * l1q;
    const double log_t1 = coef_log + j * lq + di * l1q;
    const double log_e0 = std::log(0.5) + log_erfc((di - z0) / (std::numbers::sqrt2 * sigma));
    const double log_e1 = std::log(0.5) + log_erfc((z0 - j) / (std::numbers::sqrt2 * sigma));
    const double log_s0 = log_t0 + (di * di - di) / (2.0 * s2) + log_e0;
    const double log_s1 = log_t1 + (j * j - j) / (2.0 * s2) + log_e1;
    if (sign_gamma > 0.0) {
      log_a0 = log_add(log_a0, log_s0);
      log_a1 = log_add(log_a1, log_s1);
    } else {
      log_a0 = log_sub(log_a0, log_s0);
      log_a1 = log_sub(log_a1, log_s1);
    }
    if (std::max(log_s0, log_s1) < -30.0) break;
  }
  return log_add(log_a0, log_a1);
}

void check_common(double q, double sigma) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidParameterError("sampling rate q must be in (0, 1]");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidParameterError("noise multiplier must be positive and finite");
  }
}

}  // namespace

std::vector<double> default_rdp_orders() {
  std::vector<double> orders{1.5};
  for (int a = 2; a <= 64; ++a) orders.push_back(a);
  orders.push_back(128);
  orders.push_back(256);
  return orders;
}

double rdp_subsampled_gaussian(double q, double sigma, double alpha) {
  check_common(q, sigma);
  if (!(alpha > 1.0)) throw InvalidParameterError("RDP order must exceed 1");
  if (q == 1.0) return alpha / (2.0 * sigma * sigma);
  const double log_a = alpha == std::floor(alpha)
                           ? log_a_integer(q, sigma, static_cast<int>(alpha))
                           : log_a_fractional(q, sigma, alpha);
  return log_a / (alpha - 1.0);
}

double accountant_epsilon(double sigma, double q, long steps, double delta,
                          const AccountantOptions& options) {
  check_common(q, sigma);
  if (steps < 1) throw InvalidParameterError("steps must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameterError("delta must be in (0, 1)");
  if (options.orders.empty()) throw InvalidParameterError("empty RDP order grid");
  const double log_delta = std::log(delta);
  double best = std::numeric_limits<double>::infinity();
  for (double a : options.orders) {
    const double rdp = static_cast<double>(steps) * rdp_subsampled_gaussian(q, sigma, a);
    double eps = 0.0;
    if (options.conversion == RdpConversion::kClassic) {
      eps = rdp - log_delta / (a - 1.0);
    } else {
      eps = rdp + std::log1p(-1.0 / a) - (log_delta + std::log(a)) / (a - 1.0);
    }
    best = std::min(best, eps);
  }
  return std::max(0.0, best);
}

double solve_sigma(double epsilon, double delta, double q, long steps,
                   const AccountantOptions& options) {
  if (!(epsilon > 0.0)) throw InvalidParameterError("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameterError("delta must be in (0, 1)");
  if (!(q > 0.0 && q <= 1.0)) throw InvalidParameterError("q must be in (0, 1]");
  if (steps < 1) throw InvalidParameterError("T must be >= 1");

  if (accountant_epsilon(kSigmaHi, q, steps, delta, options) > epsilon) {
    throw InfeasibleError("privacy budget epsilon=" + std::to_string(epsilon) +
                          " is unattainable with sigma <= 100 (q=" + std::to_string(q) +
                          ", T=" + std::to_string(steps) + ")");
  }
  if (accountant_epsilon(kSigmaLo, q, steps, delta, options) <= epsilon) return kSigmaLo;
  double lo = kSigmaLo, hi = kSigmaHi;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (accountant_epsilon(mid, q, steps, delta, options) <= epsilon) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

PrivacyBudget PrivacyBudget::calibrate(double epsilon, double delta, double q, long steps,
                                       const AccountantOptions& options) {
  PrivacyBudget b;
  b.epsilon = epsilon;
  b.delta = delta;
  b.q = q;
  b.steps = steps;
  b.sigma = solve_sigma(epsilon, delta, q, steps, options);
  return b;
}

double default_delta(std::size_t local_dataset_size) {
  if (local_dataset_size == 0) throw InvalidParameterError("default_delta: empty dataset");
  return 1.0 / std::pow(static_cast<double>(local_dataset_size), 1.1);
}

}  // namespace dpbyz
