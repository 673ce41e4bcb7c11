// Copyright 2026 The incompat Authors
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

#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>

#include "incompat/error.hpp"

// Closed-form white-noise thresholds. Each has an exact rational version so
// orderings and crossings can be checked without rounding.
namespace incompat::bounds {

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Fraction() = default;
  constexpr Fraction(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  constexpr double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend constexpr bool operator==(const Fraction& a, const Fraction& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend constexpr std::strong_ordering operator<=>(const Fraction& a, const Fraction& b) {
    return static_cast<__int128>(a.num) * b.den <=> static_cast<__int128>(b.num) * a.den;
  }
  friend constexpr Fraction operator+(const Fraction& a, const Fraction& b) {
    return Fraction(a.num * b.den + b.num * a.den, a.den * b.den);
  }
};

inline void require_dim(int d) {
  if (d < 2) throw ValueError("threshold formulas need d >= 2");
}

/// Cloning bound (n + d) / (n (d + 1)): Γ^wn_t is n-incompatibility breaking below it.
inline Fraction clone_exact(int n, int d) {
  require_dim(d);
  if (n < 1) throw ValueError("clone bound needs n >= 1");
  return Fraction(n + d, static_cast<std::int64_t>(n) * (d + 1));
}
inline double clone(int n, int d) { return clone_exact(n, d).value(); }

/// Projective hidden-state bound (H_d − 1) / (d − 1), H_d the harmonic number.
inline Fraction projective_exact(int d) {
  require_dim(d);
  if (d > 20) throw ValueError("exact projective bound limited to d <= 20");
  Fraction h(0, 1);
  for (int k = 1; k <= d; ++k) h = h + Fraction(1, k);
  return Fraction(h.num - h.den, h.den * (d - 1));
}
inline double projective(int d) {
  require_dim(d);
  double h = 0.0;
  for (int k = 1; k <= d; ++k) h += 1.0 / k;
  return (h - 1.0) / (d - 1);
}

/// Rank-1 hidden-state bound (3d − 1)(d − 1)^{d−1} / ((d + 1) d^d): Γ^wn_t is
/// incompatibility breaking below it.
inline Fraction rank1_exact(int d) {
  require_dim(d);
  if (d > 12) throw ValueError("exact rank-1 bound limited to d <= 12");
  std::int64_t num = 3 * d - 1, den = d + 1;
  for (int k = 0; k < d - 1; ++k) num *= d - 1;
  for (int k = 0; k < d; ++k) den *= d;
  return Fraction(num, den);
}
inline double rank1(int d) {
  require_dim(d);
  return (3.0 * d - 1.0) * std::pow(d - 1.0, d - 1) / ((d + 1.0) * std::pow(static_cast<double>(d), d));
}

/// Isotropic Choi state is separable iff t <= 1 / (d + 1).
inline Fraction entanglement_breaking_exact(int d) {
  require_dim(d);
  return Fraction(1, d + 1);
}
inline double entanglement_breaking(int d) { return entanglement_breaking_exact(d).value(); }

/// Noisy-mixture bound 1/n, independent of Θ and η.
inline Fraction mixture_exact(int n) {
  if (n < 1) throw ValueError("mixture bound needs n >= 1");
  return Fraction(1, n);
}

/// Clifford/Specker set of m generators is incompatible iff t > 1/√m.
inline double specker(int m) {
  if (m < 1) throw ValueError("specker threshold needs m >= 1");
  return 1.0 / std::sqrt(static_cast<double>(m));
}

}  // namespace incompat::bounds
