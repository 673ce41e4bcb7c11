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

#include <gtest/gtest.h>

#include <random>

#include "incompat/bounds.hpp"
#include "incompat/compat.hpp"
#include "incompat/constructions.hpp"
#include "incompat/random.hpp"

namespace incompat {
namespace {

std::vector<CMatrix> noisy(const Observable& a, double t) {
  const double d = a.dim();
  std::vector<CMatrix> out;
  for (const auto& e : a.effects()) out.push_back(t * e + (1 - t) * e.trace() / d * identity(a.dim()));
  return out;
}

// Marginal by explicit summation over the other axes.
double marginal_gap(const JointObservable& g, std::size_t axis, const std::vector<CMatrix>& target) {
  std::vector<CMatrix> sum(target.size(), CMatrix::Zero(g.dim(), g.dim()));
  for (std::size_t c = 0; c < g.cell_count(); ++c) sum[g.outcome(c)[axis]] += g.cells()[c];
  double gap = 0.0;
  for (std::size_t a = 0; a < target.size(); ++a) gap = std::max(gap, max_abs(sum[a] - target[a]));
  return gap;
}

TEST(MixtureJoint, ZeroIsProductOfProbabilities) {
  std::mt19937_64 rng(61);
  const std::vector<Observable> obs{random::povm(2, 2, rng), random::povm(2, 3, rng)};
  const CMatrix eta = random::state(2, rng);
  const auto g = mixture_joint(obs, random::channel(2, 2, rng), eta, 0.0);
  const RVector p0 = probabilities(obs[0], eta), p1 = probabilities(obs[1], eta);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const auto o = g.outcome(c);
    EXPECT_LE(max_abs(g.cells()[c] - p0(o[0]) * p1(o[1]) * identity(2)), 1e-14);
  }
}

TEST(MixtureJoint, HalfNoiseXY) {
  const std::vector<Observable> obs{binary_observable(pauli_x()), binary_observable(pauli_y())};
  const auto g = mixture_joint(obs, identity_channel(2), identity(2) / 2.0, 0.5);
  EXPECT_LE(marginal_gap(g, 0, noisy(obs[0], 0.5)), 1e-12);
  EXPECT_LE(marginal_gap(g, 1, noisy(obs[1], 0.5)), 1e-12);
  EXPECT_GE(min_cell_eigenvalue(g), -1e-12);
}

TEST(MixtureJoint, RandomInstancesForSeveralN) {
  std::mt19937_64 rng(62);
  for (int n : {2, 3, 4}) {
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<Observable> obs;
      for (int k = 0; k < n; ++k) obs.push_back(random::povm(3, 2 + (k + rep) % 2, rng));
      const Channel theta = random::channel(3, 2, rng);
      const CMatrix eta = random::state(3, rng);
      const double t = 1.0 / n;
      const auto g = mixture_joint(obs, theta, eta, t);
      EXPECT_GE(min_cell_eigenvalue(g), -1e-12);
      const Channel target = noisy_mixture(theta, eta, t);
      for (int k = 0; k < n; ++k) {
        std::vector<CMatrix> img;
        for (const auto& e : obs[k].effects()) img.push_back(t * theta(e) + (1 - t) * (eta * e).trace() * identity(3));
        EXPECT_LE(marginal_gap(g, k, img), 1e-12);
        EXPECT_LE(marginal_gap(g, k, apply(target, obs[k]).effects()), 1e-12);
      }
    }
  }
}

TEST(MixtureJoint, RejectsLargeT) {
  const std::vector<Observable> obs{binary_observable(pauli_x()), binary_observable(pauli_y())};
  EXPECT_THROW(mixture_joint(obs, identity_channel(2), identity(2) / 2.0, 0.51), ValueError);
}

TEST(CloningJoint, QubitPairBound) {
  const std::vector<Observable> obs{binary_observable(pauli_x()), binary_observable(pauli_y())};
  const auto [g, t] = cloning_joint(obs, 2);
  EXPECT_NEAR(t, 2.0 / 3.0, 1e-15);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_LE(marginal_gap(g, k, noisy(obs[k], t)), 1e-10);
  EXPECT_GE(min_cell_eigenvalue(g), -1e-10);
}

TEST(CloningJoint, QubitTripleBound) {
  const std::vector<Observable> obs{binary_observable(pauli_x()), binary_observable(pauli_y()),
                                    binary_observable(pauli_z())};
  const auto [g, t] = cloning_joint(obs, 2);
  EXPECT_NEAR(t, 5.0 / 9.0, 1e-15);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_LE(marginal_gap(g, k, noisy(obs[k], t)), 1e-10);
  EXPECT_GE(min_cell_eigenvalue(g), -1e-10);
}

TEST(CloningJoint, RandomQutritPairs) {
  std::mt19937_64 rng(63);
  for (int rep = 0; rep < 10; ++rep) {
    const std::vector<Observable> obs{random::povm(3, 3, rng), random::rank1_povm(3, 4, rng)};
    const auto [g, t] = cloning_joint(obs, 3);
    EXPECT_NEAR(t, 5.0 / 8.0, 1e-15);
    for (std::size_t k = 0; k < 2; ++k) EXPECT_LE(marginal_gap(g, k, noisy(obs[k], t)), 1e-10);
    EXPECT_GE(min_cell_eigenvalue(g), -1e-10);
  }
}

TEST(CloningJoint, DimensionMismatch) {
  const std::vector<Observable> obs{binary_observable(pauli_x())};
  EXPECT_THROW(cloning_joint(obs, 3), DimensionError);
}

TEST(Clifford, ThreeGeneratorsArePaulis) {
  const auto set = clifford_set(3);
  ASSERT_EQ(set.generators.size(), 3u);
  EXPECT_LE(max_abs(set.generators[0] - pauli_x()), 0.0);
  EXPECT_LE(max_abs(set.generators[1] - pauli_y()), 0.0);
  EXPECT_LE(max_abs(set.generators[2] - pauli_z()), 0.0);
}

TEST(Clifford, AnticommutationAndTrace) {
  for (int m : {3, 5, 7}) {
    const auto set = clifford_set(m);
    ASSERT_EQ(static_cast<int>(set.generators.size()), m);
    const auto dim = set.generators[0].rows();
    EXPECT_EQ(dim, 1 << ((m - 1) / 2));
    for (int i = 0; i < m; ++i) {
      const CMatrix& a = set.generators[i];
      EXPECT_NEAR(std::abs(a.trace()), 0.0, 1e-14);
      EXPECT_LE(max_abs(a - a.adjoint()), 0.0);
      EXPECT_LE(max_abs(a * a - identity(dim)), 1e-12);
      for (int j = i + 1; j < m; ++j) {
        const CMatrix& b = set.generators[j];
        EXPECT_LE(max_abs(a * b + b * a), 1e-12);
      }
    }
  }
}

TEST(Clifford, Errors) {
  EXPECT_THROW(clifford_set(4), ValueError);
  EXPECT_THROW(clifford_set(1), ValueError);
  EXPECT_THROW(clifford_set(9), ResourceError);
}

TEST(Specker, ThreeAtPointSix) {
  const auto obs = specker_observables(3, 0.6);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) {
      EXPECT_EQ(joint_measurability({obs[i], obs[j]}).verdict, Verdict::Compatible);
    }
  EXPECT_EQ(joint_measurability(obs).verdict, Verdict::Incompatible);
}

TEST(Specker, FiveBelowThreshold) {
  EXPECT_EQ(joint_measurability(specker_observables(5, 0.44)).verdict, Verdict::Compatible);
  EXPECT_EQ(joint_measurability(specker_observables(5, 0.46)).verdict, Verdict::Incompatible);
}

TEST(Specker, ZeroIsTrivial) {
  for (const auto& o : specker_observables(5, 0.0))
    for (const auto& e : o.effects()) EXPECT_LE(max_abs(e - identity(4) / 2.0), 0.0);
  EXPECT_EQ(joint_measurability(specker_observables(5, 0.0)).verdict, Verdict::Compatible);
}

MonteCarloOptions mc(std::uint64_t samples, std::uint64_t seed) {
  MonteCarloOptions o;
  o.samples = samples;
  o.seed = seed;
  return o;
}

CMatrix sum_of(const std::vector<CMatrix>& v) {
  CMatrix s = CMatrix::Zero(v[0].rows(), v[0].cols());
  for (const auto& x : v) s += x;
  return s;
}

TEST(HsmProjective, QubitZ) {
  const auto est = hsm_projective(binary_observable(pauli_z()), mc(200000, 1));
  EXPECT_NEAR(est.target_t, 0.5, 1e-15);
  EXPECT_LE(max_abs(est.target[0] - 0.5 * (identity(2) + 0.5 * pauli_z())), 1e-15);
  EXPECT_LE(est.max_deviation(), 5e-3);
  EXPECT_LE(est.max_sigma(), 4.0);
}

TEST(HsmProjective, QutritTargetAndNormalization) {
  std::mt19937_64 rng(64);
  const auto est = hsm_projective(random::projective(3, rng), mc(100000, 2));
  EXPECT_NEAR(est.target_t, 5.0 / 12.0, 1e-15);
  EXPECT_LE(est.max_deviation(), 1e-2);
  // Σ_i estimate = mean of d|ψ⟩⟨ψ|, which is I in expectation.
  EXPECT_LE(max_abs(sum_of(est.effects) - identity(3)), 1e-2);
}

TEST(HsmProjective, RejectsNonProjective) {
  std::mt19937_64 rng(65);
  EXPECT_THROW(hsm_projective(random::povm(2, 2, rng), mc(10, 0)), ValueError);
  EXPECT_THROW(hsm_projective(trivial_observable(2, 3), mc(10, 0)), ValueError);
}

Observable trine() {
  std::vector<CMatrix> effects;
  for (int k = 0; k < 3; ++k) {
    const double a = 2.0 * M_PI * k / 3.0;
    effects.push_back(2.0 / 3.0 * 0.5 * (identity(2) + std::cos(a) * pauli_z() + std::sin(a) * pauli_x()));
  }
  return Observable(effects);
}

TEST(HsmRank1, TrineTarget) {
  const auto est = hsm_rank1(trine(), mc(200000, 3));
  EXPECT_NEAR(est.target_t, 5.0 / 12.0, 1e-15);
  EXPECT_LE(est.max_deviation(), 5e-3);
  EXPECT_LE(est.max_sigma(), 4.0);
}

TEST(HsmRank1, ProjectiveInputUsesDistinctKernel) {
  const Observable z = binary_observable(pauli_z());
  const auto r1 = hsm_rank1(z, mc(100000, 4));
  const auto pr = hsm_projective(z, mc(100000, 4));
  EXPECT_NEAR(r1.target_t, 5.0 / 12.0, 1e-15);
  EXPECT_NEAR(pr.target_t, 0.5, 1e-15);
  EXPECT_LE(r1.max_deviation(), 5e-3);
  // Both normalize the same way; their Z(+) limits differ by (½ − 5/12)/2.
  EXPECT_GT(std::abs(r1.effects[0](0, 0) - pr.effects[0](0, 0)), 0.02);
}

TEST(HsmRank1, RejectsHigherRank) {
  EXPECT_THROW(hsm_rank1(trivial_observable(2, 2), mc(10, 0)), ValueError);
}

TEST(SpinDirection, ZAxisAndSymmetry) {
  const auto up = spin_direction_check({0, 0, 1}, mc(200000, 5));
  EXPECT_LE(up.max_deviation(), 5e-3);
  EXPECT_LE(up.max_sigma(), 4.0);
  EXPECT_LE(max_abs(sum_of(up.effects) - identity(2)), 1e-2);
  // Kernel symmetry: outcome + for −n̂ is outcome − for n̂, sample by sample.
  const auto down = spin_direction_check({0, 0, -1}, mc(200000, 5));
  EXPECT_LE(max_abs(down.effects[0] - up.effects[1]), 1e-12);
  EXPECT_THROW(spin_direction_check({0, 0, 2}, mc(10, 0)), ValueError);
}

TEST(MonteCarlo, ReproducibleAndSplitSeedConsistent) {
  const Observable z = binary_observable(pauli_z());
  const auto a = hsm_projective(z, mc(50000, 7));
  const auto b = hsm_projective(z, mc(50000, 7));
  for (std::size_t i = 0; i < 2; ++i) EXPECT_LE(max_abs(a.effects[i] - b.effects[i]), 0.0);
  const auto c = hsm_projective(z, mc(50000, 8));
  for (std::size_t i = 0; i < 2; ++i) {
    const RMatrix combined = (a.standard_error[i].cwiseAbs2() + c.standard_error[i].cwiseAbs2()).cwiseSqrt();
    for (Eigen::Index r = 0; r < 2; ++r)
      for (Eigen::Index col = 0; col < 2; ++col)
        EXPECT_LE(std::abs(a.effects[i](r, col) - c.effects[i](r, col)), 3.0 * combined(r, col) + 1e-12);
  }
}

TEST(MonteCarlo, CovariantUnderConjugation) {
  std::mt19937_64 rng(66);
  const CMatrix v = haar_unitary(2, rng);
  const Observable z = binary_observable(pauli_z());
  const auto base = hsm_projective(z, mc(100000, 9));
  const auto rot = hsm_projective(conjugate(z, v), mc(100000, 10));
  for (std::size_t i = 0; i < 2; ++i) {
    const CMatrix expect = v * base.effects[i] * v.adjoint();
    EXPECT_LE(max_abs(rot.effects[i] - expect), 6.0 * (rot.standard_error[i].maxCoeff() + base.standard_error[i].maxCoeff()));
  }
  EXPECT_LE(rot.max_sigma(), 4.0);
}

TEST(Separation, NEqualsThree) {
  const auto w = separation_inequality(3);
  EXPECT_EQ(w.m, 9);
  EXPECT_EQ(w.p, 4);
  EXPECT_EQ(w.d, 16);
  EXPECT_NEAR(w.t_lo, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(w.t_hi, 19.0 / 51.0, 1e-15);
  EXPECT_TRUE(w.nonempty());
  for (int n = 4; n <= 8; ++n) {
    const auto s = separation_inequality(n);
    EXPECT_TRUE(s.nonempty()) << n;
    EXPECT_GE(s.m, n * n);
    EXPECT_EQ(s.m % 2, 1);
  }
  EXPECT_THROW(separation_inequality(2), ValueError);
}

TEST(Separation, QubitWindow) {
  const auto w = qubit_separation();
  EXPECT_NEAR(w.t_lo, 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(w.t_hi, 2.0 / 3.0, 1e-15);
  EXPECT_TRUE(w.nonempty());
}

TEST(Bounds, ClosedForms) {
  EXPECT_EQ(bounds::clone_exact(2, 2), bounds::Fraction(2, 3));
  EXPECT_EQ(bounds::clone_exact(3, 2), bounds::Fraction(5, 9));
  EXPECT_EQ(bounds::clone_exact(2, 3), bounds::Fraction(5, 8));
  EXPECT_EQ(bounds::projective_exact(2), bounds::Fraction(1, 2));
  EXPECT_EQ(bounds::projective_exact(3), bounds::Fraction(5, 12));
  EXPECT_EQ(bounds::rank1_exact(2), bounds::Fraction(5, 12));
  EXPECT_EQ(bounds::entanglement_breaking_exact(2), bounds::Fraction(1, 3));
  for (int d = 2; d <= 10; ++d) {
    EXPECT_NEAR(bounds::projective_exact(d).value(), bounds::projective(d), 1e-14);
    EXPECT_NEAR(bounds::rank1_exact(d).value(), bounds::rank1(d), 1e-14);
    EXPECT_GT(bounds::rank1_exact(d), bounds::entanglement_breaking_exact(d)) << d;
  }
  // Cloning bound tends to 1/(d+1) from above as n grows.
  for (int d = 2; d <= 6; ++d)
    for (int n = 2; n <= 10; ++n) EXPECT_GT(bounds::clone_exact(n, d), bounds::entanglement_breaking_exact(d));
  EXPECT_THROW(bounds::clone(2, 1), ValueError);
}

}  // namespace
}  // namespace incompat
