// Copyright 2026 The dpspace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpspace/bounds.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dpspace {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

// delta(x) = ln Gamma(x + 1) - [(x + 1/2) ln x - x + ln(2 pi)/2].
double StirlingRemainder(double x) {
  if (x < 15.0) {
    return std::lgamma(x + 1.0) - ((x + 0.5) * std::log(x) - x + kHalfLog2Pi);
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return inv * (1.0 / 12 -
                inv2 * (1.0 / 360 - inv2 * (1.0 / 1260 - inv2 * (1.0 / 1680 -
                                                                  inv2 / 1188))));
}

}  // namespace

double LogBinom(double n, double m) {
  if (!(m >= 0.0 && m <= n)) {
    throw std::invalid_argument("log_binom: requires 0 <= m <= n, got n=" +
                                std::to_string(n) + " m=" + std::to_string(m));
  }
  const double r = n - m;
  if (m == 0.0 || r == 0.0) return 0.0;
  // n H(m / n), written without cancellation.
  const double entropy = -m * std::log(m / n) - r * std::log1p(-m / n);
  return entropy + 0.5 * (std::log(n) - std::log(m) - std::log(r)) - kHalfLog2Pi +
         StirlingRemainder(n) - StirlingRemainder(m) - StirlingRemainder(r);
}

BoundValue CommLowerBoundExact(uint64_t h, uint64_t k, double eps1, double eps2,
                               double slack_constant, CommForm form) {
  if (h == 0 || k == 0) throw std::invalid_argument("bounds.h: h and k must be >= 1");
  if (!(std::fabs(eps1) < 0.5)) throw std::invalid_argument("bounds.eps1: must lie in (-1/2, 1/2)");
  if (!(std::fabs(eps2) < 0.5)) throw std::invalid_argument("bounds.eps2: must lie in (-1/2, 1/2)");
  const double n = 3.0 * h + k;
  const double kk = static_cast<double>(k);
  const double big = n * (0.5 + eps1);
  const double small = n * (0.5 - eps1);
  const double z_hi = (0.5 + eps2) * kk;
  const double z_lo = (0.5 - eps2) * kk;
  const double a = form == CommForm::kConsistent ? z_hi : z_lo;
  const double b = form == CommForm::kConsistent ? z_lo : z_hi;
  if (a > big || b > small) {
    throw std::invalid_argument("bounds.eps1: binomial arguments out of range");
  }
  BoundValue v;
  v.main = (LogBinom(n, kk) - LogBinom(big, a) - LogBinom(small, b)) * kLog2E;
  v.slack = slack_constant * std::log2(static_cast<double>(h + k));
  v.value = v.main - v.slack;
  return v;
}

bool InStirlingRegion(uint64_t h, uint64_t k, double eps1, double eps2) {
  const double lo = 1.0 / static_cast<double>(k);
  return h >= k && eps1 > lo && eps1 < 0.1 && eps2 > lo && eps2 < 0.1;
}

BoundValue CommLowerBoundStirling(uint64_t h, uint64_t k, double eps1, double eps2,
                                  double slack_constant) {
  if (k == 0) throw std::invalid_argument("bounds.k: must be >= 1");
  if (!InStirlingRegion(h, k, eps1, eps2)) {
    throw std::invalid_argument(
        "bounds.eps1: outside the region h >= k, eps in (1/k, 1/10)");
  }
  BoundValue v;
  const double d = eps1 - eps2;
  v.main = static_cast<double>(k) * d * d * kLog2E;
  v.slack = slack_constant * std::log2(static_cast<double>(h + k));
  v.value = v.main - v.slack;
  return v;
}

ReductionEps ReductionEpsilons(uint32_t w, uint32_t h, uint32_t k, uint32_t P,
                               double beta) {
  if (w == 0 || h == 0 || k == 0 || P == 0) {
    throw std::invalid_argument("bounds.w: w, h, k, P must be >= 1");
  }
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("bounds.beta: must lie in (0, 1)");
  ReductionEps e;
  e.radius = std::sqrt(w * std::log(2.0 / beta));
  e.eps1 = w / (80.0 * e.radius * (3.0 * h + k));
  const double p = P;
  e.eps2 = 1.0 / (2.0 * std::sqrt(p)) + std::sqrt(std::log(20.0 * p * k) / (2.0 * p));
  return e;
}

void ExponentProfile::Validate() const {
  for (double g : {gamma_w, gamma_k, gamma_h}) {
    if (!(g > 0.0 && g < 1.0)) throw std::invalid_argument("profile.gamma: must lie in (0, 1)");
  }
  if (!(0.5 * gamma_w <= gamma_k)) throw std::invalid_argument("profile.gamma_k: must be >= gamma_w / 2");
  if (!(gamma_k <= gamma_h)) throw std::invalid_argument("profile.gamma_h: must be >= gamma_k");
  if (!(gamma_h < gamma_w)) throw std::invalid_argument("profile.gamma_h: must be < gamma_w");
  if (!(3.0 * gamma_h < 1.0)) throw std::invalid_argument("profile.gamma_h: must be < 1/3");
}

ExponentProfile CorollaryProfile(double alpha) {
  ExponentProfile p{2.0 / 3 - 4 * alpha, 1.0 / 3 - 2 * alpha, 1.0 / 3 - alpha};
  p.Validate();
  return p;
}

TheoremValue TheoremBound(double T, const ExponentProfile& profile) {
  if (!(T > 1.0)) throw std::invalid_argument("bounds.T: must be > 1");
  profile.Validate();
  TheoremValue v;
  v.exponent = profile.exponent();
  v.value = std::pow(T, v.exponent);
  v.w = std::pow(T, profile.gamma_w);
  v.k = std::pow(T, profile.gamma_k);
  v.h = std::pow(T, profile.gamma_h);
  v.identity_rel_error = std::fabs(v.k * v.w / (v.h * v.h) - v.value) / v.value;
  if (v.identity_rel_error > 1e-9) {
    throw std::logic_error("theorem_bound: k w / h^2 disagrees with T^exponent");
  }
  return v;
}

double EncodingBound(double N, double k, double k_prime, double Z) {
  if (!(k >= 1.0 && k <= N)) throw std::invalid_argument("bounds.k: must lie in [1, N]");
  if (!(k_prime >= 0.0 && k_prime <= N)) {
    throw std::invalid_argument("bounds.k_prime: must lie in [0, N]");
  }
  if (!(Z >= 0.0 && Z <= std::min(k, k_prime)) || k - Z > N - k_prime) {
    throw std::invalid_argument("bounds.Z: must lie in [max(0, k - N + k'), min(k, k')]");
  }
  return (LogBinom(N, k) - LogBinom(k_prime, Z) - LogBinom(N - k_prime, k - Z)) *
             kLog2E -
         std::log2(k);
}

}  // namespace dpspace
