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

#include "incompat/classify.hpp"

namespace incompat {
namespace {

std::vector<Observable> xyz() {
  return {binary_observable(pauli_x()), binary_observable(pauli_y()), binary_observable(pauli_z())};
}

Ensemble xyz_ensemble() { return {"xyz", xyz()}; }

// Smallest eigenvalue of the partially transposed isotropic state:
// PT(|ψ0⟩⟨ψ0|) = SWAP/d has eigenvalues ±1/d.
double isotropic_pt_min(int d, double t) { return -t / d + (1 - t) / (d * d); }

TEST(ClassifyEbc, WhiteNoiseThreshold) {
  EXPECT_EQ(classify_ebc(white_noise(2, 0.3)).status, Status::Certified);
  const auto v = classify_ebc(white_noise(2, 0.4));
  EXPECT_EQ(v.status, Status::Refuted);
  EXPECT_NEAR(v.evidence.params.at("min_pt_eigenvalue"), isotropic_pt_min(2, 0.4), 1e-12);
  EXPECT_LT(v.evidence.params.at("min_pt_eigenvalue"), -1e-6);
  for (int d : {3, 4}) {
    EXPECT_EQ(classify_ebc(white_noise(d, 1.0 / (d + 1))).status, Status::Certified);
    EXPECT_EQ(classify_ebc(white_noise(d, 1.0 / (d + 1) + 0.01)).status, Status::Refuted);
  }
}

TEST(ClassifyEbc, MeasurePrepareAlwaysCertified) {
  std::mt19937_64 rng(71);
  for (int rep = 0; rep < 5; ++rep) {
    const Observable f = random::povm(3, 3, rng);
    const Channel ch = measure_prepare(f, {random::state(3, rng), random::state(3, rng), random::state(3, rng)});
    EXPECT_EQ(classify_ebc(ch).status, Status::Certified);
    EXPECT_GE(detail::min_pt_eigenvalue(ch), -1e-12);
  }
}

TEST(ClassifyEbc, ChoiBasedForGeneralChannels) {
  std::mt19937_64 rng(72);
  // A unitary has a maximally entangled Choi state: NPT.
  const Channel u = Channel::from_kraus({haar_unitary(3, rng)}, 1e-10);
  const auto v = classify_ebc(u);
  EXPECT_EQ(v.status, Status::Refuted);
  EXPECT_EQ(v.evidence.rule, "npt_choi");
  EXPECT_NEAR(v.evidence.params.at("min_pt_eigenvalue"), -1.0 / 3.0, 1e-10);
  // Qubit dephasing given only by its Choi matrix: PPT, hence EB for d = 2.
  const Observable z = binary_observable(pauli_z());
  const Channel deph = Channel::from_choi(measure_prepare(z, {z[0], z[1]}).choi());
  EXPECT_EQ(classify_ebc(deph).status, Status::Certified);
  // Qutrit PPT without structure stays unknown.
  const Observable z3 = projective(identity(3));
  const Channel deph3 = Channel::from_choi(measure_prepare(z3, z3.effects()).choi());
  EXPECT_EQ(classify_ebc(deph3).status, Status::Unknown);
}

TEST(CertifyNIbc, Examples) {
  const auto clone = certify_n_ibc(white_noise(2, 2.0 / 3.0), 2);
  EXPECT_EQ(clone.status, Status::Certified);
  EXPECT_EQ(clone.evidence.rule, "clone_bound");
  EXPECT_EQ(certify_n_ibc(white_noise(2, 0.67), 2).status, Status::Unknown);

  std::mt19937_64 rng(73);
  const Channel theta = random::channel(3, 2, rng);
  const auto mixture = certify_n_ibc(noisy_mixture(theta, random::state(3, rng), 0.25), 4);
  EXPECT_EQ(mixture.status, Status::Certified);
  EXPECT_EQ(mixture.evidence.rule, "mixture_bound");

  const Channel rotated = compose(unitary_channel(haar_unitary(2, rng)), white_noise(2, 0.6));
  const auto ideal = certify_n_ibc(rotated, 2);
  EXPECT_EQ(ideal.status, Status::Certified);
  EXPECT_EQ(ideal.evidence.rule, "ideal");
  EXPECT_EQ(certify_n_ibc(compose(white_noise(2, 0.6), unitary_channel(haar_unitary(2, rng))), 2).status,
            Status::Certified);
  EXPECT_EQ(certify_n_ibc(identity_channel(2), 2).status, Status::Unknown);
  EXPECT_THROW(certify_n_ibc(identity_channel(2), 1), ValueError);
}

TEST(RefuteNIbc, Examples) {
  const auto v = refute_n_ibc(white_noise(2, 0.6), 3, {xyz_ensemble()});
  ASSERT_EQ(v.status, Status::Refuted);
  EXPECT_EQ(v.evidence.witness_name, "xyz");
  ASSERT_TRUE(v.evidence.compat.has_value());
  EXPECT_EQ(v.evidence.compat->verdict, Verdict::Incompatible);

  const Ensemble xy{"xy", {binary_observable(pauli_x()), binary_observable(pauli_y())}};
  EXPECT_EQ(refute_n_ibc(identity_channel(2), 2, {xy}).status, Status::Refuted);
  EXPECT_EQ(refute_n_ibc(white_noise(2, 0.2), 2, default_ensembles(2, 2, 1, 4)).status, Status::Unknown);
  EXPECT_THROW(refute_n_ibc(white_noise(2, 0.2), 2, {xyz_ensemble()}), DimensionError);
}

TEST(RefuteNIbc, RefutationsCarryVerifiedWitness) {
  std::mt19937_64 rng(74);
  for (int rep = 0; rep < 4; ++rep) {
    const Channel ch = compose(unitary_channel(haar_unitary(2, rng)), white_noise(2, 0.9));
    const auto v = refute_n_ibc(ch, 2, default_ensembles(2, 2, rep, 2));
    ASSERT_EQ(v.status, Status::Refuted);
    std::vector<Observable> image;
    for (const auto& o : v.evidence.witness_set) image.push_back(apply(ch, o));
    EXPECT_GT(verify_witness(*v.evidence.compat->witness, image), 0.0);
  }
}

TEST(ClassifyIbc, Examples) {
  std::map<int, std::vector<Ensemble>> ens{{3, {xyz_ensemble()}}};
  const auto rid = classify_ibc(white_noise(2, 5.0 / 12.0), ens);
  EXPECT_EQ(rid.status, Status::Certified);
  EXPECT_EQ(rid.evidence.rule, "rank1_hidden_state");
  EXPECT_EQ(classify_ibc(white_noise(2, 0.4), ens).status, Status::Certified);
  const auto refuted = classify_ibc(white_noise(2, 0.7), ens);
  EXPECT_EQ(refuted.status, Status::Refuted);
  EXPECT_EQ(refuted.evidence.witness_name, "xyz");
}

TEST(Thresholds, ClosedForms) {
  const auto t = thresholds(2, 2);
  EXPECT_NEAR(t.clone, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.t_p, 0.5, 1e-15);
  EXPECT_NEAR(t.t_0, 5.0 / 12.0, 1e-15);
  EXPECT_NEAR(t.eb, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.specker(5), 1.0 / std::sqrt(5.0), 1e-15);
  const auto t3 = thresholds(3, 2);
  EXPECT_NEAR(t3.t_0, 8.0 / 27.0, 1e-15);
  EXPECT_GT(t3.t_0, t3.eb);
  EXPECT_EQ(bounds::clone_exact(8, 2), bounds::rank1_exact(2));
  EXPECT_GT(bounds::clone_exact(7, 2), bounds::rank1_exact(2));
  EXPECT_LT(bounds::clone_exact(9, 2), bounds::rank1_exact(2));
  EXPECT_THROW(thresholds(2, 1), ValueError);
}

TEST(Classify, WhiteNoiseSeparations) {
  const auto low = classify(white_noise(2, 0.4));
  EXPECT_EQ(low.ebc.status, Status::Refuted);
  EXPECT_EQ(low.ibc.status, Status::Certified);
  EXPECT_LT(low.min_pt_eigenvalue, -1e-6);

  const auto mid = classify(white_noise(2, 0.6));
  EXPECT_EQ(mid.n_ibc.at(2).status, Status::Certified);
  EXPECT_EQ(mid.n_ibc.at(3).status, Status::Refuted);
  EXPECT_EQ(mid.n_ibc.at(3).evidence.witness_name, "clifford:3:first3");
  EXPECT_EQ(mid.ibc.status, Status::Refuted);
  EXPECT_EQ(mid.ebc.status, Status::Refuted);
  EXPECT_TRUE(report_consistent(mid));
}

TEST(Classify, MeasurePrepareCertifiesEverything) {
  std::mt19937_64 rng(75);
  const Observable f = random::povm(2, 3, rng);
  const auto r = classify(measure_prepare(f, {random::state(2, rng), random::state(2, rng), random::state(2, rng)}));
  EXPECT_EQ(r.ebc.status, Status::Certified);
  EXPECT_EQ(r.ibc.status, Status::Certified);
  for (const auto& [n, v] : r.n_ibc) EXPECT_EQ(v.status, Status::Certified) << n;
}

TEST(Classify, InclusionPropagationAndConflicts) {
  ClassReport r;
  r.n_ibc[2] = {};
  r.n_ibc[3] = {};
  r.n_ibc[4] = {};
  r.n_ibc[3].status = Status::Refuted;
  enforce_inclusions(r);
  EXPECT_EQ(r.n_ibc[4].status, Status::Refuted);
  EXPECT_EQ(r.n_ibc[2].status, Status::Unknown);
  EXPECT_EQ(r.ibc.status, Status::Refuted);
  EXPECT_EQ(r.ebc.status, Status::Refuted);
  EXPECT_TRUE(report_consistent(r));

  ClassReport bad;
  bad.n_ibc[2] = {};
  bad.n_ibc[3] = {};
  bad.n_ibc[2].status = Status::Refuted;
  bad.n_ibc[3].status = Status::Certified;
  EXPECT_THROW(enforce_inclusions(bad), std::logic_error);
  EXPECT_FALSE(report_consistent(bad));
}

TEST(Classify, ConvexityAtCertificateLevel) {
  for (double t1 : {0.2, 0.5, 0.66})
    for (double t2 : {0.1, 0.4, 0.6})
      for (double lam : {0.0, 0.3, 1.0}) {
        const Channel m = mix(white_noise(2, t1), white_noise(2, t2), lam);
        if (certify_n_ibc(white_noise(2, std::max(t1, t2)), 2).status == Status::Certified) {
          EXPECT_EQ(certify_n_ibc(m, 2).status, Status::Certified);
        }
      }
}

TEST(Classify, CertifiedWhiteNoiseCorroboratedByConstruction) {
  std::mt19937_64 rng(76);
  for (int d : {2, 3}) {
    for (int n : {2, 3}) {
      const double t = bounds::clone(n, d);
      ASSERT_EQ(certify_n_ibc(white_noise(d, t), n).status, Status::Certified);
      for (int rep = 0; rep < 20; ++rep) {
        std::vector<Observable> obs;
        for (int k = 0; k < n; ++k) obs.push_back(random::povm(d, 2, rng));
        const auto [g, tc] = cloning_joint(obs, d);
        std::vector<Observable> targets;
        for (const auto& o : obs) targets.push_back(apply(white_noise(d, t), o));
        EXPECT_TRUE(verify_joint(g, targets, 1e-10, 1e-10));
      }
    }
  }
}

TEST(Classify, DefaultEnsemblesAreDeterministic) {
  const auto a = default_ensembles(3, 2, 5, 2), b = default_ensembles(3, 2, 5, 2);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    for (std::size_t k = 0; k < a[i].observables.size(); ++k)
      for (std::size_t o = 0; o < a[i].observables[k].size(); ++o)
        EXPECT_LE(max_abs(a[i].observables[k][o] - b[i].observables[k][o]), 0.0);
  }
  EXPECT_EQ(default_ensembles(2, 3)[0].name, "clifford:3:first3");
}

}  // namespace
}  // namespace incompat
