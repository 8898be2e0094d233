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

// Closed-form bound calculators. All functions are pure.
//
// Hidden constants of asymptotic statements are set to 1 and reported as a
// separate "slack" term rather than folded into the main value. All
// results are in bits unless the name says otherwise.

#ifndef DPSPACE_BOUNDS_H_
#define DPSPACE_BOUNDS_H_

#include <cstdint>

namespace dpspace {

// ln C(n, m) for real 0 <= m <= n, evaluated through Stirling remainders so
// that large arguments keep full relative precision. Throws
// std::invalid_argument outside that range.
double LogBinom(double n, double m);

inline constexpr double kLog2E = 1.4426950408889634;

struct BoundValue {
  double main = 0.0;   // the bound's leading expression
  double slack = 0.0;  // c * log2(h + k), the hidden lower-order term
  double value = 0.0;  // main - slack
};

enum class CommForm {
  // Subtracts log C(n(1/2 + e1), (1/2 + e2) k) + log C(n(1/2 - e1), (1/2 - e2) k),
  // the form the encoding argument produces.
  kConsistent,
  // Subtracts log C(n(1/2 + e1), (1/2 - e2) k) + log C(n(1/2 - e1), (1/2 + e2) k).
  kLiteral,
};

// Lower bound on the message length of any winning AvoidHeavyHitters
// protocol, with n = 3h + k. Non-integer binomial arguments are evaluated
// continuously. Throws std::invalid_argument when a binomial is undefined.
BoundValue CommLowerBoundExact(uint64_t h, uint64_t k, double eps1, double eps2,
                               double slack_constant = 1.0,
                               CommForm form = CommForm::kConsistent);

// Requires h >= k and eps1, eps2 in (1/k, 1/10).
bool InStirlingRegion(uint64_t h, uint64_t k, double eps1, double eps2);

// k (eps1 - eps2)^2 log2(e) minus the slack. Throws outside the region.
BoundValue CommLowerBoundStirling(uint64_t h, uint64_t k, double eps1, double eps2,
                                  double slack_constant = 1.0);

struct ReductionEps {
  double radius = 0.0;  // R = sqrt(w ln(2 / beta))
  double eps1 = 0.0;    // w / (80 R (3h + k))
  double eps2 = 0.0;    // 1/(2 sqrt(P)) + sqrt(ln(20 P k) / (2P))
  // The game lower bound only bites when eps1 >= 2 eps2.
  bool winning_regime() const { return eps1 >= 2.0 * eps2; }
};

ReductionEps ReductionEpsilons(uint32_t w, uint32_t h, uint32_t k, uint32_t P,
                               double beta);

struct ExponentProfile {
  double gamma_w = 0.0;
  double gamma_k = 0.0;
  double gamma_h = 0.0;

  // gamma_w / 2 <= gamma_k <= gamma_h < gamma_w and 3 gamma_h < 1, all in (0, 1).
  void Validate() const;
  double exponent() const { return gamma_w + gamma_k - 2.0 * gamma_h; }
};

// gamma_w = 2/3 - 4a, gamma_k = 1/3 - 2a, gamma_h = 1/3 - a.
ExponentProfile CorollaryProfile(double alpha);

struct TheoremValue {
  double exponent = 0.0;
  double value = 0.0;  // T^exponent
  double w = 0.0;      // T^gamma_w, and likewise
  double k = 0.0;
  double h = 0.0;
  double identity_rel_error = 0.0;  // |k w / h^2 - value| / value
};

// Space lower bound T^(gamma_w + gamma_k - 2 gamma_h) up to polylog factors.
// Throws std::logic_error if k w / h^2 disagrees with it beyond 1e-9.
TheoremValue TheoremBound(double T, const ExponentProfile& profile);

// log C(N, k) - log k - log C(k', Z) - log C(N - k', k - Z) in bits, for
// real 0 <= Z <= min(k, k').
double EncodingBound(double N, double k, double k_prime, double Z);

}  // namespace dpspace

#endif  // DPSPACE_BOUNDS_H_
