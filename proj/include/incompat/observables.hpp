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
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "incompat/linalg.hpp"

namespace incompat {

/// Finite-outcome POVM on C^d. Effects are kept in label order; labels are
/// metadata and comparisons between observables are positional.
class Observable {
 public:
  Observable() = default;

  /// Shape-checked only. Use validate() or checked() for the POVM conditions.
  Observable(std::vector<int> labels, std::vector<CMatrix> effects)
      : labels_(std::move(labels)), effects_(std::move(effects)) {
    if (effects_.empty()) throw DimensionError("observable needs at least one effect");
    if (labels_.size() != effects_.size())
      throw DimensionError("observable: label count differs from effect count");
    dim_ = static_cast<int>(effects_.front().rows());
    for (const auto& e : effects_) {
      if (e.rows() != dim_ || e.cols() != dim_)
        throw DimensionError("observable: effects must share one square dimension");
    }
  }

  /// Labels 0..k-1.
  explicit Observable(std::vector<CMatrix> effects) : Observable(labelled(std::move(effects))) {}

  static Observable checked(std::vector<int> labels, std::vector<CMatrix> effects,
                            double tol = hermitian_tolerance());

  int dim() const { return dim_; }
  std::size_t size() const { return effects_.size(); }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<CMatrix>& effects() const { return effects_; }
  const CMatrix& effect(std::size_t i) const { return effects_.at(i); }
  const CMatrix& operator[](std::size_t i) const { return effects_[i]; }

  static std::vector<int> default_labels(std::size_t n) {
    std::vector<int> l(n);
    std::iota(l.begin(), l.end(), 0);
    return l;
  }

 private:
  static Observable labelled(std::vector<CMatrix> effects) {
    auto labels = default_labels(effects.size());
    return Observable(std::move(labels), std::move(effects));
  }

  int dim_ = 0;
  std::vector<int> labels_;
  std::vector<CMatrix> effects_;
};

struct ValidationReport {
  bool ok = false;
  bool hermitian = false;
  double min_eigenvalue = 0.0;
  double normalization_defect = 0.0;  // ‖Σ A(a) − I‖_∞ (max entry modulus)
};

inline ValidationReport validate(const Observable& obs, double tol = hermitian_tolerance()) {
  ValidationReport r;
  r.hermitian = true;
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  CMatrix sum = CMatrix::Zero(obs.dim(), obs.dim());
  for (const auto& e : obs.effects()) {
    if (!is_hermitian(e, tol)) r.hermitian = false;
    r.min_eigenvalue = std::min(r.min_eigenvalue, min_eigenvalue(e));
    sum += e;
  }
  r.normalization_defect = max_abs(sum - identity(obs.dim()));
  r.ok = r.hermitian && r.min_eigenvalue >= -tol && r.normalization_defect <= tol;
  return r;
}

inline Observable Observable::checked(std::vector<int> labels, std::vector<CMatrix> effects,
                                      double tol) {
  Observable obs(std::move(labels), std::move(effects));
  const auto report = validate(obs, tol);
  if (!report.ok) {
    throw ValueError("invalid observable: min eigenvalue " + std::to_string(report.min_eigenvalue) +
                     ", normalization defect " + std::to_string(report.normalization_defect) +
                     (report.hermitian ? "" : ", non-Hermitian effect"));
  }
  return obs;
}

inline Observable trivial_observable(int d, std::size_t outcomes = 1) {
  return Observable(std::vector<CMatrix>(outcomes, identity(d) / static_cast<double>(outcomes)));
}

/// Outcome probabilities tr[ρ A(a)].
inline RVector probabilities(const Observable& obs, const CMatrix& state) {
  RVector p(obs.size());
  for (std::size_t a = 0; a < obs.size(); ++a) p(a) = (state * obs[a]).trace().real();
  return p;
}

/// Stochastic kernel f(a, g): rows are target outcomes a, columns source outcomes g.
class PostProcessing {
 public:
  PostProcessing(std::vector<int> source, std::vector<int> target, RMatrix kernel,
                 double tol = 1e-12)
      : source_(std::move(source)), target_(std::move(target)), kernel_(std::move(kernel)) {
    if (kernel_.rows() != static_cast<Eigen::Index>(target_.size()) ||
        kernel_.cols() != static_cast<Eigen::Index>(source_.size()))
      throw DimensionError("postprocessing: kernel shape does not match label lists");
    if (kernel_.size() == 0) throw DimensionError("postprocessing: empty kernel");
    if (kernel_.minCoeff() < -tol || kernel_.maxCoeff() > 1 + tol)
      throw ValueError("postprocessing: kernel entries must lie in [0, 1]");
    for (Eigen::Index g = 0; g < kernel_.cols(); ++g)
      if (std::abs(kernel_.col(g).sum() - 1.0) > tol)
        throw ValueError("postprocessing: kernel column " + std::to_string(g) +
                         " does not sum to 1");
  }

  /// Labels default to 0..n-1 on both sides.
  explicit PostProcessing(const RMatrix& kernel, double tol = 1e-12)
      : PostProcessing(Observable::default_labels(kernel.cols()),
                       Observable::default_labels(kernel.rows()), kernel, tol) {}

  const std::vector<int>& source() const { return source_; }
  const std::vector<int>& target() const { return target_; }
  const RMatrix& kernel() const { return kernel_; }

  /// Deterministic relabeling: source outcome g goes to target position map[g].
  static PostProcessing relabel(std::span<const std::size_t> map, std::size_t targets) {
    RMatrix k = RMatrix::Zero(targets, map.size());
    for (std::size_t g = 0; g < map.size(); ++g) k(map[g], g) = 1.0;
    return PostProcessing(k);
  }

 private:
  std::vector<int> source_;
  std::vector<int> target_;
  RMatrix kernel_;
};

/// B(a) = Σ_g f(a, g) G(g).
inline Observable postprocess(const Observable& obs, const PostProcessing& f) {
  if (f.source() != obs.labels())
    throw LabelError("postprocess: kernel source labels differ from observable outcomes");
  std::vector<CMatrix> out;
  out.reserve(f.target().size());
  for (std::size_t a = 0; a < f.target().size(); ++a) {
    CMatrix e = CMatrix::Zero(obs.dim(), obs.dim());
    for (std::size_t g = 0; g < obs.size(); ++g)
      if (f.kernel()(a, g) != 0.0) e += f.kernel()(a, g) * obs[g];
    out.push_back(std::move(e));
  }
  return Observable(f.target(), std::move(out));
}

/// (h ∘ f)(b, g) = Σ_a h(b, a) f(a, g): apply f first, then h.
inline PostProcessing compose(const PostProcessing& h, const PostProcessing& f) {
  if (h.source() != f.target())
    throw LabelError("compose: outer kernel source labels differ from inner kernel targets");
  RMatrix k = h.kernel() * f.kernel();
  return PostProcessing(f.source(), h.target(), std::move(k), 1e-10);
}

/// Effect-wise convex combination λ a + (1 − λ) b.
inline Observable mix(const Observable& a, const Observable& b, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValueError("mix: weight must lie in [0, 1]");
  if (a.dim() != b.dim()) throw DimensionError("mix: observables act on different dimensions");
  if (a.labels() != b.labels()) throw LabelError("mix: outcome labels differ");
  std::vector<CMatrix> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(lambda * a[i] + (1.0 - lambda) * b[i]);
  return Observable(a.labels(), std::move(out));
}

/// Binary qubit observable ½(I ± v·σ), outcome order (+, −), labels (+1, −1).
inline Observable binary_qubit(const std::array<double, 3>& bloch) {
  const CMatrix vs = bloch[0] * pauli_x() + bloch[1] * pauli_y() + bloch[2] * pauli_z();
  return Observable({+1, -1}, {0.5 * (identity(2) + vs), 0.5 * (identity(2) - vs)});
}

/// Noisy spin observable with Bloch vector t·n̂.
inline Observable noisy_spin(const std::array<double, 3>& direction, double t) {
  const double norm = std::hypot(direction[0], direction[1], direction[2]);
  if (std::abs(norm - 1.0) > 1e-10) throw ValueError("noisy_spin: direction must be a unit vector");
  if (!(t >= 0.0 && t <= 1.0)) throw ValueError("noisy_spin: t must lie in [0, 1]");
  return binary_qubit({t * direction[0], t * direction[1], t * direction[2]});
}

/// Binary observable ½(I ± s) for a Hermitian involution s; labels (+1, −1).
inline Observable binary_observable(const CMatrix& s) {
  const auto d = s.rows();
  return Observable({+1, -1}, {0.5 * (identity(d) + s), 0.5 * (identity(d) - s)});
}

/// Rank-1 projective observable onto the columns of a unitary.
inline Observable projective(const CMatrix& basis) {
  std::vector<CMatrix> effects;
  for (Eigen::Index i = 0; i < basis.cols(); ++i) effects.push_back(projector(basis.col(i)));
  return Observable(std::move(effects));
}

/// Conjugation V A(a) V†.
inline Observable conjugate(const Observable& obs, const CMatrix& v) {
  std::vector<CMatrix> out;
  for (const auto& e : obs.effects()) out.push_back(v * e * v.adjoint());
  return Observable(obs.labels(), std::move(out));
}

/// POVM on a full product grid Ω_1 × … × Ω_n. Cells are stored row-major
/// (last axis fastest).
class JointObservable {
 public:
  JointObservable(std::vector<std::vector<int>> axes, std::vector<CMatrix> cells)
      : axes_(std::move(axes)), cells_(std::move(cells)) {
    if (axes_.empty()) throw DimensionError("joint observable needs at least one axis");
    std::size_t total = 1;
    for (const auto& ax : axes_) {
      if (ax.empty()) throw DimensionError("joint observable axis has no outcomes");
      total *= ax.size();
    }
    if (total != cells_.size())
      throw DimensionError("joint observable: cell count is not the product of axis sizes");
    dim_ = static_cast<int>(cells_.front().rows());
    for (const auto& c : cells_)
      if (c.rows() != dim_ || c.cols() != dim_)
        throw DimensionError("joint observable: cells must share one square dimension");
  }

  int dim() const { return dim_; }
  std::size_t axis_count() const { return axes_.size(); }
  const std::vector<std::vector<int>>& axes() const { return axes_; }
  const std::vector<CMatrix>& cells() const { return cells_; }
  std::size_t cell_count() const { return cells_.size(); }

  std::size_t index(std::span<const std::size_t> outcome) const {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < axes_.size(); ++k) idx = idx * axes_[k].size() + outcome[k];
    return idx;
  }

  std::vector<std::size_t> outcome(std::size_t index) const {
    std::vector<std::size_t> out(axes_.size());
    for (std::size_t k = axes_.size(); k-- > 0;) {
      out[k] = index % axes_[k].size();
      index /= axes_[k].size();
    }
    return out;
  }

  const CMatrix& operator[](std::span<const std::size_t> outcome) const {
    return cells_[index(outcome)];
  }

  /// The joint as a flat observable labelled by cell index.
  Observable as_observable() const { return Observable(cells_); }

 private:
  int dim_ = 0;
  std::vector<std::vector<int>> axes_;
  std::vector<CMatrix> cells_;
};

inline Observable marginal(const JointObservable& g, std::size_t axis) {
  if (axis >= g.axis_count()) throw DimensionError("marginal: axis out of range");
  const auto& labels = g.axes()[axis];
  std::vector<CMatrix> out(labels.size(), CMatrix::Zero(g.dim(), g.dim()));
  for (std::size_t c = 0; c < g.cell_count(); ++c) out[g.outcome(c)[axis]] += g.cells()[c];
  return Observable(labels, std::move(out));
}

/// Largest entrywise deviation between marginal k of g and targets[k], over all k.
inline double marginal_error(const JointObservable& g, std::span<const Observable> targets) {
  if (targets.size() != g.axis_count())
    throw DimensionError("marginal_error: one target per axis required");
  double err = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const Observable m = marginal(g, k);
    if (m.size() != targets[k].size())
      throw DimensionError("marginal_error: outcome counts differ on axis " + std::to_string(k));
    for (std::size_t a = 0; a < m.size(); ++a) err = std::max(err, max_abs(m[a] - targets[k][a]));
  }
  return err;
}

inline double min_cell_eigenvalue(const JointObservable& g) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : g.cells()) m = std::min(m, min_eigenvalue(c));
  return m;
}

}  // namespace incompat
