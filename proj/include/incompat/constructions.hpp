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
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "incompat/bounds.hpp"
#include "incompat/channels.hpp"
#include "incompat/linalg.hpp"
#include "incompat/observables.hpp"
#include "incompat/parallel.hpp"

namespace incompat {

namespace detail {

inline std::vector<std::vector<int>> axes_of(std::span<const Observable> obs) {
  std::vector<std::vector<int>> axes;
  for (const auto& o : obs) axes.push_back(o.labels());
  return axes;
}

inline void require_common_dim(std::span<const Observable> obs, int d, const char* what) {
  for (const auto& o : obs)
    if (o.dim() != d) throw DimensionError(std::string(what) + ": observable dimension mismatch");
}

/// Visits every cell of the product grid with its outcome digits.
template <class Fn>
void for_each_cell(std::span<const Observable> obs, Fn&& fn) {
  std::vector<std::size_t> digits(obs.size(), 0);
  std::size_t cells = 1;
  for (const auto& o : obs) cells *= o.size();
  for (std::size_t c = 0; c < cells; ++c) {
    fn(c, std::as_const(digits));
    for (std::size_t k = obs.size(); k-- > 0;) {
      if (++digits[k] < obs[k].size()) break;
      digits[k] = 0;
    }
  }
}

}  // namespace detail

/// Joint observable for Γ_{t,Θ,η}(A_1), …, Γ_{t,Θ,η}(A_n), valid for t ≤ 1/n:
///   G(a) = Σ_k t Θ(A_k(a_k)) Π_{j≠k} p_j(a_j) + (1 − t n) Π_j p_j(a_j) I,
/// with p_j(a) = tr[η A_j(a)].
inline JointObservable mixture_joint(std::span<const Observable> obs, const Channel& theta,
                                     const CMatrix& eta, double t) {
  const std::size_t n = obs.size();
  if (n == 0) throw ValueError("mixture_joint: no observables");
  const int d = theta.dim();
  detail::require_common_dim(obs, d, "mixture_joint");
  require_state(eta, d, "mixture_joint");
  if (!(t >= 0.0 && t <= 1.0 / static_cast<double>(n) + 1e-15))
    throw ValueError("mixture_joint: t must lie in [0, 1/n]");

  std::vector<RVector> prob;
  std::vector<std::vector<CMatrix>> image;
  for (const auto& o : obs) {
    prob.push_back(probabilities(o, eta));
    std::vector<CMatrix> im;
    for (const auto& e : o.effects()) im.push_back(theta(e));
    image.push_back(std::move(im));
  }

  std::vector<CMatrix> cells;
  detail::for_each_cell(obs, [&](std::size_t, const std::vector<std::size_t>& a) {
    CMatrix g = CMatrix::Zero(d, d);
    double all = 1.0;
    for (std::size_t j = 0; j < n; ++j) all *= prob[j](a[j]);
    for (std::size_t k = 0; k < n; ++k) {
      double others = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != k) others *= prob[j](a[j]);
      g += t * others * image[k][a[k]];
    }
    g += (1.0 - t * static_cast<double>(n)) * all * identity(d);
    cells.push_back(std::move(g));
  });
  return JointObservable(detail::axes_of(obs), std::move(cells));
}

struct CloningJoint {
  JointObservable joint;
  double t;  // (n + d) / (n (d + 1))
};

/// Approximate-cloning joint observable
///   G(x) = d / C(d+n−1, n) · tr_{all but one}[S_n (A_1(x_1) ⊗ … ⊗ A_n(x_n)) S_n],
/// whose marginals are Γ^wn_t(A_k) with t = (n + d) / (n (d + 1)).
inline CloningJoint cloning_joint(std::span<const Observable> obs, int d) {
  const int n = static_cast<int>(obs.size());
  if (n < 1) throw ValueError("cloning_joint: no observables");
  detail::require_common_dim(obs, d, "cloning_joint");
  const CMatrix sym = symmetric_projector(d, n);
  const double scale = static_cast<double>(d) / static_cast<double>(binomial(d + n - 1, n));
  const std::vector<int> dims(n, d);

  std::vector<CMatrix> cells;
  std::vector<CMatrix> factors(n);
  detail::for_each_cell(obs, [&](std::size_t, const std::vector<std::size_t>& x) {
    for (int k = 0; k < n; ++k) factors[k] = obs[k][x[k]];
    const CMatrix big = sym * tensor(std::span<const CMatrix>(factors)) * sym;
    cells.push_back(scale * partial_trace(big, dims, 0));
  });
  return {JointObservable(detail::axes_of(obs), std::move(cells)), bounds::clone(n, d)};
}

/// Anticommuting Hermitian involutions δ_1, …, δ_m on C^{2^p}, m = 2p + 1.
struct CliffordSet {
  int m = 0;
  int p = 0;
  std::vector<CMatrix> generators;
  std::vector<Observable> observables;  // ½(I ± δ_j)
};

/// Jordan–Wigner representation: δ_{2k−1} = Z^{⊗(k−1)} ⊗ X ⊗ I^{⊗(p−k)},
/// δ_{2k} = Z^{⊗(k−1)} ⊗ Y ⊗ I^{⊗(p−k)}, δ_m = Z^{⊗p}.
inline CliffordSet clifford_set(int m, int max_dim = 8) {
  if (m < 3 || m % 2 == 0) throw ValueError("clifford_set: m must be odd and at least 3");
  CliffordSet set;
  set.m = m;
  set.p = (m - 1) / 2;
  const int p = set.p;
  if ((1L << p) > max_dim)
    throw ResourceError("clifford_set: representation dimension 2^" + std::to_string(p) +
                        " exceeds cap " + std::to_string(max_dim));
  auto string_of = [&](int k, const CMatrix& middle) {
    std::vector<CMatrix> f;
    for (int j = 1; j < k; ++j) f.push_back(pauli_z());
    f.push_back(middle);
    for (int j = k + 1; j <= p; ++j) f.push_back(identity(2));
    return tensor(std::span<const CMatrix>(f));
  };
  for (int k = 1; k <= p; ++k) {
    set.generators.push_back(string_of(k, pauli_x()));
    set.generators.push_back(string_of(k, pauli_y()));
  }
  set.generators.push_back(tensor(std::vector<CMatrix>(p, pauli_z())));
  const auto dim = set.generators.front().rows();
  for (std::size_t i = 0; i < set.generators.size(); ++i) {
    const auto& a = set.generators[i];
    if (max_abs(a * a - identity(dim)) > 1e-12) throw std::logic_error("clifford_set: δ² ≠ I");
    for (std::size_t j = i + 1; j < set.generators.size(); ++j) {
      const auto& b = set.generators[j];
      if (max_abs(a * b + b * a) > 1e-12) throw std::logic_error("clifford_set: generators commute");
    }
    set.observables.push_back(binary_observable(a));
  }
  return set;
}

/// Γ^wn_t(A_j) = ½(I ± t δ_j) for every Clifford generator.
inline std::vector<Observable> specker_observables(int m, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ValueError("specker_observables: t must lie in [0, 1]");
  const auto set = clifford_set(m);
  std::vector<Observable> out;
  for (const auto& g : set.generators) out.push_back(binary_observable(t * g));
  return out;
}

/// Monte-Carlo estimate of a postprocessed hidden-state observable.
struct HsmEstimate {
  std::vector<CMatrix> effects;
  std::vector<RMatrix> standard_error;  // entrywise, |re| and |im| errors combined
  std::vector<CMatrix> target;          // closed-form limit
  double target_t = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  int shards = 0;

  /// Largest entrywise |estimate − target|.
  double max_deviation() const {
    double m = 0.0;
    for (std::size_t i = 0; i < effects.size(); ++i) m = std::max(m, max_abs(effects[i] - target[i]));
    return m;
  }
  /// Largest |estimate − target| / σ over entries with nonzero σ; entries
  /// with σ = 0 must match to 1e-12 or the result is +inf.
  double max_sigma() const {
    double m = 0.0;
    for (std::size_t i = 0; i < effects.size(); ++i)
      for (Eigen::Index r = 0; r < effects[i].rows(); ++r)
        for (Eigen::Index c = 0; c < effects[i].cols(); ++c) {
          const double dev = std::abs(effects[i](r, c) - target[i](r, c));
          const double se = standard_error[i](r, c);
          if (se > 1e-15) m = std::max(m, dev / se);
          else if (dev > 1e-12) m = std::numeric_limits<double>::infinity();
        }
    return m;
  }
};

struct MonteCarloOptions {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  int shards = 16;
};

namespace detail {

/// Per-shard running sums of a matrix-valued sample average.
struct Accumulator {
  std::vector<CMatrix> sum;
  std::vector<RMatrix> sq_re, sq_im;
  std::uint64_t count = 0;

  Accumulator(std::size_t outcomes, int d)
      : sum(outcomes, CMatrix::Zero(d, d)),
        sq_re(outcomes, RMatrix::Zero(d, d)),
        sq_im(outcomes, RMatrix::Zero(d, d)) {}

  void add(std::size_t i, const CMatrix& x) {
    sum[i] += x;
    sq_re[i] += x.real().cwiseAbs2();
    sq_im[i] += x.imag().cwiseAbs2();
  }
};

/// Runs `sample(rng, acc)` opts.samples times split over opts.shards substreams
/// seeded by (seed, shard). Output depends only on (seed, samples, shards).
template <class Sample>
HsmEstimate monte_carlo(std::size_t outcomes, int d, const MonteCarloOptions& opts, Sample&& sample) {
  if (opts.samples < 2 || opts.shards < 1) throw ValueError("monte_carlo: need >= 2 samples and >= 1 shard");
  const auto shards = static_cast<std::size_t>(opts.shards);
  std::vector<Accumulator> acc(shards, Accumulator(outcomes, d));
  parallel_for(shards, [&](std::size_t s) {
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                      static_cast<std::uint32_t>(s), 0x5eedu};
    std::mt19937_64 rng(seq);
    const std::uint64_t n = opts.samples / shards + (s < opts.samples % shards ? 1 : 0);
    for (std::uint64_t k = 0; k < n; ++k) sample(rng, acc[s]);
    acc[s].count = n;
  });

  Accumulator total(outcomes, d);
  for (const auto& a : acc) {
    for (std::size_t i = 0; i < outcomes; ++i) {
      total.sum[i] += a.sum[i];
      total.sq_re[i] += a.sq_re[i];
      total.sq_im[i] += a.sq_im[i];
    }
    total.count += a.count;
  }
  HsmEstimate est;
  const double n = static_cast<double>(total.count);
  for (std::size_t i = 0; i < outcomes; ++i) {
    const CMatrix mean = total.sum[i] / n;
    const RMatrix var_re = (total.sq_re[i] / n - mean.real().cwiseAbs2()).cwiseMax(0.0) * (n / (n - 1));
    const RMatrix var_im = (total.sq_im[i] / n - mean.imag().cwiseAbs2()).cwiseMax(0.0) * (n / (n - 1));
    est.effects.push_back(mean);
    est.standard_error.push_back(((var_re + var_im) / n).cwiseSqrt());
  }
  est.samples = total.count;
  est.seed = opts.seed;
  est.shards = opts.shards;
  return est;
}

inline std::vector<CMatrix> white_noise_image(const Observable& obs, double t) {
  const Channel ch = white_noise(obs.dim(), t);
  std::vector<CMatrix> out;
  for (const auto& e : obs.effects()) out.push_back(ch(e));
  return out;
}

}  // namespace detail

/// Hidden-state model for a nondegenerate projective observable: outcome i is
/// reported when |⟨ψ|A(i)|ψ⟩| is the largest, ψ = U φ0 Haar distributed.
/// Converges to Γ^wn_{t_P}(A), t_P = (H_d − 1)/(d − 1).
inline HsmEstimate hsm_projective(const Observable& obs, const MonteCarloOptions& opts = {}) {
  const int d = obs.dim();
  if (d < 2) throw ValueError("hsm_projective: dimension must be at least 2");
  if (static_cast<int>(obs.size()) != d)
    throw ValueError("hsm_projective: need exactly d outcomes");
  for (const auto& e : obs.effects())
    if (max_abs(e * e - e) > 1e-9 || std::abs(e.trace().real() - 1.0) > 1e-9)
      throw ValueError("hsm_projective: effects must be rank-1 projectors");
  if (!validate(obs, 1e-9).ok) throw ValueError("hsm_projective: invalid observable");

  auto est = detail::monte_carlo(obs.size(), d, opts, [&](std::mt19937_64& rng, detail::Accumulator& acc) {
    const CVector psi = haar_state(d, rng);
    double best = -1.0;
    int ties = 0;
    std::array<std::size_t, 64> tied{};
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const double q = psi.dot(obs[i] * psi).real();
      if (q > best) {
        best = q;
        ties = 0;
      }
      if (q == best && ties < 64) tied[ties++] = i;
    }
    std::size_t pick = tied[0];
    if (ties > 1) pick = tied[std::uniform_int_distribution<int>(0, ties - 1)(rng)];
    acc.add(pick, static_cast<double>(d) * projector(psi));
  });
  est.target_t = bounds::projective(d);
  est.target = detail::white_noise_image(obs, est.target_t);
  return est;
}

/// Hidden-state model for a rank-1 POVM A(i) = α_i |φ_i⟩⟨φ_i| with the kernel
///   f(i) = Θ(q_i − α_i/d) q_i + (α_i/d) Σ_j q_j (1 − Θ(q_j − α_j/d)),
/// q_j = ⟨ψ|A(j)|ψ⟩. Converges to Γ^wn_{t_0}(A), t_0 = (3d−1)(d−1)^{d−1}/((d+1)d^d).
inline HsmEstimate hsm_rank1(const Observable& obs, const MonteCarloOptions& opts = {}) {
  const int d = obs.dim();
  if (d < 2) throw ValueError("hsm_rank1: dimension must be at least 2");
  if (!validate(obs, 1e-9).ok) throw ValueError("hsm_rank1: invalid observable");
  std::vector<double> weight;
  for (const auto& e : obs.effects()) {
    const auto ev = eig_hermitian(hermitian_part(e)).values;
    if (d > 1 && ev(d - 2) > 1e-9) throw ValueError("hsm_rank1: effect has rank above 1");
    weight.push_back(e.trace().real() / d);
  }
  const std::size_t n = obs.size();
  if (n > 256) throw ValueError("hsm_rank1: at most 256 outcomes supported");
  auto est = detail::monte_carlo(n, d, opts, [&](std::mt19937_64& rng, detail::Accumulator& acc) {
    const CVector psi = haar_state(d, rng);
    const CMatrix rho = static_cast<double>(d) * projector(psi);
    double rest = 0.0;
    std::array<double, 256> q{};
    for (std::size_t j = 0; j < n; ++j) {
      q[j] = psi.dot(obs[j] * psi).real();
      if (!(q[j] > weight[j])) rest += q[j];
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = (q[i] > weight[i] ? q[i] : 0.0) + weight[i] * rest;
      total += f;
      if (f != 0.0) acc.add(i, f * rho);
    }
    if (std::abs(total - 1.0) > 1e-10) throw std::logic_error("hsm_rank1: kernel does not sum to 1");
  });
  est.target_t = bounds::rank1(d);
  est.target = detail::white_noise_image(obs, est.target_t);
  return est;
}

/// Coarse-grains the spin-direction observable D(dk) = (I + k·σ) dk/4π with
/// f(±, k) = [±k·n > 0]; converges to ½(I ± ½ n·σ).
inline HsmEstimate spin_direction_check(const std::array<double, 3>& n, const MonteCarloOptions& opts = {}) {
  const double norm = std::hypot(n[0], n[1], n[2]);
  if (std::abs(norm - 1.0) > 1e-10) throw ValueError("spin_direction_check: direction must be a unit vector");
  auto est = detail::monte_carlo(2, 2, opts, [&](std::mt19937_64& rng, detail::Accumulator& acc) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::array<double, 3> k{normal(rng), normal(rng), normal(rng)};
    const double kn = std::hypot(k[0], k[1], k[2]);
    for (auto& x : k) x /= kn;
    const double proj = k[0] * n[0] + k[1] * n[1] + k[2] * n[2];
    const CMatrix effect = identity(2) + k[0] * pauli_x() + k[1] * pauli_y() + k[2] * pauli_z();
    if (proj > 0) acc.add(0, effect);
    else if (proj < 0) acc.add(1, effect);
  });
  est.target_t = 0.5;
  est.target = noisy_spin(n, 0.5).effects();
  return est;
}

struct SeparationWitness {
  int p = 0;
  int m = 0;
  int n = 0;
  int d = 0;
  double t_lo = 0.0;  // exclusive: m Clifford observables incompatible above it
  double t_hi = 0.0;  // inclusive: Γ^wn_t is n-incompatibility breaking up to it
  bool nonempty() const { return t_lo < t_hi; }
};

/// Smallest odd m = 2p + 1 ≥ n² with 1/√m < (n + 2^p)/(n (2^p + 1)); on
/// t ∈ (1/√m, (n + 2^p)/(n (2^p + 1))] the channel Γ^wn_t on C^{2^p} is
/// n-incompatibility breaking but not m-incompatibility breaking.
inline SeparationWitness separation_inequality(int n) {
  if (n < 3) throw ValueError("separation_inequality: n must be at least 3");
  int m = n * n;
  if (m % 2 == 0) ++m;
  for (;; m += 2) {
    const int p = (m - 1) / 2;
    if (p > 62) throw ResourceError("separation_inequality: search exceeded 64-bit range");
    const double two_p = std::ldexp(1.0, p);
    const double lo = bounds::specker(m);
    const double hi = (n + two_p) / (n * (two_p + 1.0));
    if (lo < hi) return {p, m, n, static_cast<int>(std::min<double>(two_p, 1e9)), lo, hi};
  }
}

/// The qubit instance: X, Y, Z are incompatible above 1/√3 while Γ^wn_t is
/// 2-incompatibility breaking up to the n = 2 cloning bound 2/3.
inline SeparationWitness qubit_separation() {
  return {1, 3, 2, 2, bounds::specker(3), bounds::clone(2, 2)};
}

}  // namespace incompat
