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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "incompat/channels.hpp"
#include "incompat/linalg.hpp"
#include "incompat/observables.hpp"

namespace incompat {

enum class Verdict { Compatible, Incompatible, Undecided };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Compatible: return "COMPATIBLE";
    case Verdict::Incompatible: return "INCOMPATIBLE";
    case Verdict::Undecided: return "UNDECIDED";
  }
  return "?";
}

/// A family of observables tested for joint measurability after white noise Γ^wn_t.
class CompatInstance {
 public:
  static constexpr std::size_t kDefaultCellCap = 1024;

  CompatInstance(std::vector<Observable> observables, double t = 1.0,
                 std::size_t cell_cap = kDefaultCellCap)
      : inputs_(std::move(observables)), t_(t) {
    if (inputs_.size() < 2) throw ValueError("compat instance needs at least two observables");
    if (!(t_ >= 0.0 && t_ <= 1.0)) throw ValueError("compat instance: t must lie in [0, 1]");
    const int d = inputs_.front().dim();
    std::size_t cells = 1;
    for (const auto& o : inputs_) {
      if (o.dim() != d) throw DimensionError("compat instance: observables act on different dimensions");
      const auto report = validate(o, 1e-8);
      if (!report.ok) throw ValueError("compat instance: invalid observable");
      cells *= o.size();
      if (cells > cell_cap)
        throw ResourceError("compat instance: product grid exceeds " + std::to_string(cell_cap) +
                            " cells");
    }
    const Channel noise = white_noise(d, t_);
    for (const auto& o : inputs_) {
      std::vector<CMatrix> effects;
      for (const auto& e : o.effects()) effects.push_back(noise(e));
      noisy_.emplace_back(o.labels(), std::move(effects));
    }
  }

  int dim() const { return inputs_.front().dim(); }
  double t() const { return t_; }
  const std::vector<Observable>& inputs() const { return inputs_; }
  /// The observables actually tested, Γ^wn_t(A_k).
  const std::vector<Observable>& observables() const { return noisy_; }
  std::size_t cell_count() const {
    std::size_t c = 1;
    for (const auto& o : inputs_) c *= o.size();
    return c;
  }

 private:
  std::vector<Observable> inputs_;
  std::vector<Observable> noisy_;
  double t_ = 1.0;
};

/// Dual certificate of incompatibility: operators Y_k(a) whose cell sums
/// Σ_k Y_k(a_k) are all PSD while Σ_{k,a} tr[Y_k(a) A_k(a)] < 0.
struct IncompatibilityWitness {
  std::vector<std::vector<CMatrix>> operators;  // [axis][outcome]
  double value = 0.0;                           // Σ tr[Y A] (negative)
  double min_cell_eigenvalue = 0.0;             // of the cell sums (≥ 0 up to rounding)
  double distance_lower_bound = 0.0;            // −value / ‖cell sums‖_F
};

struct CompatResult {
  Verdict verdict = Verdict::Undecided;
  std::optional<JointObservable> joint;          // iff Compatible
  std::optional<IncompatibilityWitness> witness; // iff Incompatible
  double residual = 0.0;                         // final distance estimate
  long iterations = 0;
};

struct SolverOptions {
  double tol = 1e-7;          // distance below which a rounded joint is accepted
  long max_iterations = 20000;
  int check_every = 10;
  double initial_margin = 0.0;  // 0 = pick from the instance
  double min_margin = 1e-10;
  long stall_window = 200;
};

/// Verifies a candidate joint against the instance: PSD at −1e-8, marginals at 1e-7.
inline bool verify_joint(const JointObservable& g, std::span<const Observable> targets,
                         double marginal_tol = 1e-7, double psd_tol = 1e-8) {
  if (g.axis_count() != targets.size()) return false;
  return min_cell_eigenvalue(g) >= -psd_tol && marginal_error(g, targets) <= marginal_tol;
}

struct WitnessCheck {
  double value = 0.0;            // Σ tr[Y A]
  double min_cell_eigenvalue = 0.0;
  double distance_lower_bound = 0.0;  // 0 when the witness proves nothing
};

/// Checks a witness against the target observables from scratch.
inline WitnessCheck check_witness(const IncompatibilityWitness& w, std::span<const Observable> targets) {
  WitnessCheck out;
  if (w.operators.size() != targets.size() || targets.empty()) return out;
  std::vector<std::size_t> sizes;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    if (w.operators[k].size() != targets[k].size()) return out;
    sizes.push_back(targets[k].size());
    for (std::size_t a = 0; a < targets[k].size(); ++a)
      out.value += (w.operators[k][a] * targets[k][a]).trace().real();
  }
  const int d = targets.front().dim();
  std::size_t cells = 1;
  for (auto s : sizes) cells *= s;
  std::vector<std::size_t> digits(sizes.size(), 0);
  double norm2 = 0.0, scale = 0.0, min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < cells; ++c) {
    CMatrix s = CMatrix::Zero(d, d);
    for (std::size_t k = 0; k < sizes.size(); ++k) s += w.operators[k][digits[k]];
    min_eig = std::min(min_eig, min_eigenvalue(s));
    norm2 += s.squaredNorm();
    scale = std::max(scale, max_abs(s));
    for (std::size_t k = sizes.size(); k-- > 0;) {
      if (++digits[k] < sizes[k]) break;
      digits[k] = 0;
    }
  }
  out.min_cell_eigenvalue = min_eig;
  // For feasible G, Σ_c tr[G(c) S(c)] ≥ min_eig · tr Σ_c G(c) = min_eig · d, so
  // residual negativity is charged against the value, plus a rounding allowance.
  const double slack = 1e-12 * std::max(1.0, scale) * static_cast<double>(cells);
  const double corrected = out.value - std::min(0.0, min_eig) * d + slack;
  if (corrected < 0.0 && norm2 > 0.0) out.distance_lower_bound = -corrected / std::sqrt(norm2);
  return out;
}

inline double verify_witness(const IncompatibilityWitness& w, std::span<const Observable> targets) {
  return check_witness(w, targets).distance_lower_bound;
}

namespace detail {

/// Affine marginal subspace {P : Σ_{c: c_k = a} P(c) = A_k(a)} and its projector.
class MarginalSpace {
 public:
  explicit MarginalSpace(std::span<const Observable> targets) : targets_(targets.begin(), targets.end()) {
    d_ = targets_.front().dim();
    for (const auto& o : targets_) {
      offsets_.push_back(rows_);
      sizes_.push_back(o.size());
      rows_ += o.size();
    }
    cells_ = 1;
    for (auto s : sizes_) cells_ *= s;
    digits_.resize(cells_ * sizes_.size());
    std::vector<std::size_t> dig(sizes_.size(), 0);
    for (std::size_t c = 0; c < cells_; ++c) {
      for (std::size_t k = 0; k < sizes_.size(); ++k) digits_[c * sizes_.size() + k] = dig[k];
      for (std::size_t k = sizes_.size(); k-- > 0;) {
        if (++dig[k] < sizes_[k]) break;
        dig[k] = 0;
      }
    }
    // Gram matrix B Bᵀ of the cell→marginal incidence map; its entries count cells
    // shared by two marginal rows.
    RMatrix gram = RMatrix::Zero(rows_, rows_);
    for (std::size_t c = 0; c < cells_; ++c)
      for (std::size_t k = 0; k < sizes_.size(); ++k)
        for (std::size_t l = 0; l < sizes_.size(); ++l)
          gram(row(k, digit(c, k)), row(l, digit(c, l))) += 1.0;
    Eigen::SelfAdjointEigenSolver<RMatrix> es(gram);
    const double cutoff = 1e-10 * es.eigenvalues().maxCoeff();
    RVector inv = es.eigenvalues().unaryExpr([&](double x) { return x > cutoff ? 1.0 / x : 0.0; });
    gram_pinv_ = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  }

  int dim() const { return d_; }
  std::size_t cells() const { return cells_; }
  std::size_t axes() const { return sizes_.size(); }
  std::size_t digit(std::size_t cell, std::size_t axis) const { return digits_[cell * sizes_.size() + axis]; }
  std::size_t row(std::size_t axis, std::size_t outcome) const { return offsets_[axis] + outcome; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  const std::vector<Observable>& targets() const { return targets_; }

  /// B P: marginal sums, one matrix per (axis, outcome) row.
  std::vector<CMatrix> marginals(const std::vector<CMatrix>& p) const {
    std::vector<CMatrix> m(rows_, CMatrix::Zero(d_, d_));
    for (std::size_t c = 0; c < cells_; ++c)
      for (std::size_t k = 0; k < sizes_.size(); ++k) m[row(k, digit(c, k))] += p[c];
    return m;
  }

  /// (B Bᵀ)⁺ applied row-wise to matrix-valued vectors.
  std::vector<CMatrix> solve_gram(const std::vector<CMatrix>& r) const {
    std::vector<CMatrix> out(rows_, CMatrix::Zero(d_, d_));
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < rows_; ++j)
        if (gram_pinv_(i, j) != 0.0) out[i] += gram_pinv_(i, j) * r[j];
    return out;
  }

  /// Orthogonal projection onto the affine marginal subspace, in place.
  void project(std::vector<CMatrix>& p) const {
    auto res = marginals(p);
    for (std::size_t k = 0; k < sizes_.size(); ++k)
      for (std::size_t a = 0; a < sizes_[k]; ++a) res[row(k, a)] -= targets_[k][a];
    const auto lambda = solve_gram(res);
    for (std::size_t c = 0; c < cells_; ++c)
      for (std::size_t k = 0; k < sizes_.size(); ++k) p[c] -= lambda[row(k, digit(c, k))];
  }

  /// Multipliers F with Bᵀ F the orthogonal projection of n onto range(Bᵀ).
  std::vector<CMatrix> range_coefficients(const std::vector<CMatrix>& n) const {
    return solve_gram(marginals(n));
  }

  std::vector<std::vector<int>> axis_labels() const {
    std::vector<std::vector<int>> ax;
    for (const auto& o : targets_) ax.push_back(o.labels());
    return ax;
  }

 private:
  std::vector<Observable> targets_;
  int d_ = 0;
  std::size_t rows_ = 0;
  std::size_t cells_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> digits_;
  RMatrix gram_pinv_;
};

/// Cell-wise projection onto {X ⪰ margin·I}; writes the removed negative part
/// into `negative` and returns its squared Frobenius norm.
inline double project_cone(const std::vector<CMatrix>& p, double margin, std::vector<CMatrix>& out,
                           std::vector<CMatrix>& negative) {
  double dist2 = 0.0;
  const auto d = p.front().rows();
  for (std::size_t c = 0; c < p.size(); ++c) {
    const CMatrix shifted = hermitian_part(p[c]) - margin * identity(d);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(shifted);
    const RVector& ev = es.eigenvalues();
    if (ev(0) >= 0.0) {
      out[c] = shifted + margin * identity(d);
      negative[c].setZero(d, d);
      continue;
    }
    const RVector neg = ev.cwiseMin(0.0);
    negative[c] = es.eigenvectors() * neg.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    out[c] = shifted - negative[c] + margin * identity(d);
    dist2 += neg.squaredNorm();
  }
  return dist2;
}

inline IncompatibilityWitness witness_from_negative(const MarginalSpace& space,
                                                    const std::vector<CMatrix>& negative) {
  const auto f = space.range_coefficients(negative);
  IncompatibilityWitness w;
  for (std::size_t k = 0; k < space.axes(); ++k) {
    std::vector<CMatrix> ops;
    for (std::size_t a = 0; a < space.sizes()[k]; ++a) ops.push_back(-hermitian_part(f[space.row(k, a)]));
    w.operators.push_back(std::move(ops));
  }
  // Lift the first axis by the most negative cell eigenvalue so every cell sum is PSD.
  const int d = space.dim();
  double min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < space.cells(); ++c) {
    CMatrix s = CMatrix::Zero(d, d);
    for (std::size_t k = 0; k < space.axes(); ++k) s += w.operators[k][space.digit(c, k)];
    min_eig = std::min(min_eig, min_eigenvalue(s));
  }
  if (min_eig < 0.0)
    for (auto& op : w.operators.front()) op -= min_eig * identity(d);
  const auto check = check_witness(w, space.targets());
  w.value = check.value;
  w.min_cell_eigenvalue = check.min_cell_eigenvalue;
  w.distance_lower_bound = check.distance_lower_bound;
  return w;
}

}  // namespace detail

/// Joint measurability of Γ^wn_t(A_1), …, Γ^wn_t(A_n).
///
/// Accelerated alternating projections between the cell-wise PSD cone (shifted
/// by a shrinking margin, so feasible points land strictly inside) and the
/// affine marginal subspace. COMPATIBLE requires a rounded joint that passes
/// verify_joint; INCOMPATIBLE requires a dual witness whose certified distance
/// lower bound exceeds tol. Anything else after the iteration cap is UNDECIDED.
inline CompatResult joint_measurability(const CompatInstance& inst, const SolverOptions& opt = {}) {
  const auto& targets = inst.observables();
  const detail::MarginalSpace space(targets);
  const std::size_t cells = space.cells();
  const int d = space.dim();

  // The t = 0 joint Π_k tr[A_k(a_k)]/d · I bounds how much interior to expect.
  double interior = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < cells; ++c) {
    double p = 1.0;
    for (std::size_t k = 0; k < space.axes(); ++k)
      p *= targets[k][space.digit(c, k)].trace().real() / d;
    interior = std::min(interior, p);
  }
  double margin = opt.initial_margin > 0 ? opt.initial_margin : 0.05 * interior;

  std::vector<CMatrix> x(cells, CMatrix::Zero(d, d));
  space.project(x);
  std::vector<CMatrix> prev = x, y = x, cone(cells), negative(cells);

  CompatResult result;
  double momentum = 1.0;
  double best_dist2 = std::numeric_limits<double>::infinity();
  long best_at = 0;

  auto try_accept = [&](const std::vector<CMatrix>& p) -> bool {
    std::vector<CMatrix> rounded;
    rounded.reserve(cells);
    for (const auto& c : p) rounded.push_back(psd_project(hermitian_part(c)));
    JointObservable g(space.axis_labels(), std::move(rounded));
    if (!verify_joint(g, targets, opt.tol, 1e-10)) return false;
    result.joint = std::move(g);
    return true;
  };

  for (long it = 1; it <= opt.max_iterations; ++it) {
    // y is the extrapolated point in the affine subspace.
    const double dist2 = detail::project_cone(y, margin, cone, negative);
    prev.swap(x);
    x = cone;
    space.project(x);

    // Restart momentum whenever the objective increases.
    if (dist2 > best_dist2 * (1 + 1e-12)) momentum = 1.0;
    const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const double beta = (momentum - 1.0) / next;
    momentum = next;
    for (std::size_t c = 0; c < cells; ++c) y[c] = x[c] + beta * (x[c] - prev[c]);

    result.iterations = it;
    result.residual = std::sqrt(dist2);

    if (dist2 < best_dist2 * (1 - 1e-3)) {
      best_dist2 = dist2;
      best_at = it;
    }

    if (it % opt.check_every == 0 || it == opt.max_iterations) {
      if (try_accept(x)) {
        result.verdict = Verdict::Compatible;
        result.residual = 0.0;
        return result;
      }
      // Witness from the unshifted negative part at the current point.
      std::vector<CMatrix> scratch(cells), neg0(cells);
      const double d0 = detail::project_cone(x, 0.0, scratch, neg0);
      if (d0 > 0.0) {
        auto w = detail::witness_from_negative(space, neg0);
        if (w.distance_lower_bound > opt.tol) {
          result.verdict = Verdict::Incompatible;
          result.residual = std::sqrt(d0);
          result.witness = std::move(w);
          return result;
        }
      }
    }

    // Shifted problem stalled at positive distance: shrink the margin.
    if (margin > 0.0 && it - best_at > opt.stall_window) {
      margin = margin * 0.1 < opt.min_margin ? 0.0 : margin * 0.1;
      best_dist2 = std::numeric_limits<double>::infinity();
      best_at = it;
      momentum = 1.0;
    }
  }
  result.verdict = Verdict::Undecided;
  return result;
}

inline CompatResult joint_measurability(std::vector<Observable> observables, double t = 1.0,
                                        const SolverOptions& opt = {}) {
  return joint_measurability(CompatInstance(std::move(observables), t), opt);
}

struct RobustnessResult {
  double t_star = 0.0;
  double t_lo = 0.0;  // certified compatible
  double t_hi = 1.0;  // certified incompatible when hi_certified
  bool hi_certified = false;
  int probes = 0;
  int undecided_probes = 0;
  std::vector<Observable> observables;
};

/// Largest white-noise parameter keeping the family compatible, bracketed by
/// bisection to width ≤ resolution. t = 0 is compatible for every family (the
/// joint Π_k tr[A_k(a_k)]/d · I). An UNDECIDED probe is treated as an upper
/// end without certification, so t_lo always stays certified.
inline RobustnessResult robustness(const std::vector<Observable>& observables, double resolution = 1e-3,
                                   const SolverOptions& opt = {}) {
  if (!(resolution > 0.0)) throw ValueError("robustness: resolution must be positive");
  RobustnessResult r;
  r.observables = observables;
  const auto top = joint_measurability(CompatInstance(observables, 1.0), opt);
  ++r.probes;
  if (top.verdict == Verdict::Compatible) {
    r.t_lo = r.t_hi = r.t_star = 1.0;
    r.hi_certified = false;
    return r;
  }
  r.hi_certified = top.verdict == Verdict::Incompatible;
  if (top.verdict == Verdict::Undecided) ++r.undecided_probes;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    const auto res = joint_measurability(CompatInstance(observables, mid), opt);
    ++r.probes;
    if (res.verdict == Verdict::Compatible) {
      lo = mid;
    } else {
      hi = mid;
      r.hi_certified = res.verdict == Verdict::Incompatible;
      if (res.verdict == Verdict::Undecided) ++r.undecided_probes;
    }
  }
  r.t_lo = lo;
  r.t_hi = hi;
  r.t_star = 0.5 * (lo + hi);
  return r;
}

struct QubitPairVerdict {
  bool compatible = false;
  double margin = 0.0;  // 2 − ‖a + b‖ − ‖a − b‖
};

/// Analytic joint-measurability criterion for two unbiased binary qubit
/// observables ½(I ± v·σ).
inline QubitPairVerdict qubit_pair_oracle(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  auto norm = [](double x, double y, double z) { return std::sqrt(x * x + y * y + z * z); };
  if (norm(a[0], a[1], a[2]) > 1.0 + 1e-12 || norm(b[0], b[1], b[2]) > 1.0 + 1e-12)
    throw ValueError("qubit_pair_oracle: Bloch vectors must lie in the unit ball");
  const double sum = norm(a[0] + b[0], a[1] + b[1], a[2] + b[2]) + norm(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
  return {sum <= 2.0, 2.0 - sum};
}

/// Threshold t at which t·a, t·b stop being jointly measurable: 2 / (‖a+b‖ + ‖a−b‖), capped at 1.
inline double qubit_pair_threshold(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  auto norm = [](double x, double y, double z) { return std::sqrt(x * x + y * y + z * z); };
  const double sum = norm(a[0] + b[0], a[1] + b[1], a[2] + b[2]) + norm(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
  return sum <= 2.0 ? 1.0 : 2.0 / sum;
}

}  // namespace incompat
