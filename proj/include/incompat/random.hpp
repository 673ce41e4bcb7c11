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

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "incompat/channels.hpp"
#include "incompat/linalg.hpp"
#include "incompat/observables.hpp"

// Seeded random instances for tests, witness ensembles and benchmarks.
namespace incompat::random {

template <class Rng>
CMatrix ginibre(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix z(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = Complex(re, im);
    }
  return z;
}

template <class Rng>
CMatrix hermitian(int d, Rng& rng) {
  const CMatrix z = ginibre(d, d, rng);
  return 0.5 * (z + z.adjoint());
}

/// Full-rank density matrix Z Z† / tr.
template <class Rng>
CMatrix state(int d, Rng& rng) {
  const CMatrix z = ginibre(d, d, rng);
  CMatrix rho = z * z.adjoint();
  return rho / rho.trace().real();
}

template <class Rng>
CMatrix pure_state(int d, Rng& rng) {
  return projector(haar_state(d, rng));
}

/// POVM with full-rank effects: S^{-1/2} W_a S^{-1/2} for Wishart W_a, S = Σ W_a.
template <class Rng>
Observable povm(int d, int outcomes, Rng& rng) {
  std::vector<CMatrix> w;
  CMatrix s = CMatrix::Zero(d, d);
  for (int a = 0; a < outcomes; ++a) {
    const CMatrix z = ginibre(d, d, rng);
    w.push_back(z * z.adjoint());
    s += w.back();
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(s);
  const CMatrix inv_sqrt = es.operatorInverseSqrt();
  for (auto& e : w) e = hermitian_part(inv_sqrt * e * inv_sqrt);
  return Observable(std::move(w));
}

/// Rank-1 POVM with `outcomes` ≥ d effects: columns of a Haar isometry C^d → C^outcomes.
template <class Rng>
Observable rank1_povm(int d, int outcomes, Rng& rng) {
  const CMatrix u = haar_unitary(outcomes, rng);
  const CMatrix v = u.leftCols(d);  // outcomes × d isometry
  std::vector<CMatrix> effects;
  for (int a = 0; a < outcomes; ++a) {
    const CVector row = v.row(a).adjoint();
    effects.push_back(row * row.adjoint());
  }
  return Observable(std::move(effects));
}

template <class Rng>
Observable projective(int d, Rng& rng) {
  return incompat::projective(haar_unitary(d, rng));
}

template <class Rng>
std::array<double, 3> unit_vector(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::array<double, 3> v{normal(rng), normal(rng), normal(rng)};
  const double n = std::hypot(v[0], v[1], v[2]);
  for (auto& x : v) x /= n;
  return v;
}

/// Channel with `rank` Kraus operators cut from a Haar isometry.
template <class Rng>
Channel channel(int d, int rank, Rng& rng) {
  const CMatrix u = haar_unitary(d * rank, rng);
  std::vector<CMatrix> kraus;
  for (int k = 0; k < rank; ++k) kraus.push_back(u.block(k * d, 0, d, d));
  return Channel::from_kraus(std::move(kraus), 1e-9);
}

/// Random joint observable on the given grid (full-rank cells).
template <class Rng>
JointObservable joint(int d, const std::vector<int>& outcome_counts, Rng& rng) {
  std::vector<std::vector<int>> axes;
  int cells = 1;
  for (int m : outcome_counts) {
    axes.push_back(Observable::default_labels(m));
    cells *= m;
  }
  return JointObservable(std::move(axes), povm(d, cells, rng).effects());
}

}  // namespace incompat::random
