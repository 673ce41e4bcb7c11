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
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "incompat/linalg.hpp"
#include "incompat/observables.hpp"

namespace incompat {

class Channel;
using ChannelPtr = std::shared_ptr<const Channel>;

/// Structural descriptions carried alongside the Kraus/Choi data. Certification
/// in classify is form-based, so these travel with every channel.
namespace form {
struct General {};
/// T ↦ U T U†.
struct Unitary {
  CMatrix u;
};
/// T ↦ t T + (1 − t) tr[T] I / d.
struct WhiteNoise {
  int d;
  double t;
};
/// T ↦ t Θ(T) + (1 − t) tr[η T] I.
struct NoisyMixture {
  double t;
  ChannelPtr theta;
  CMatrix eta;
};
/// T ↦ Σ_x tr[ϱ_x T] F(x).
struct MeasurePrepare {
  Observable povm;
  std::vector<CMatrix> states;
};
/// T ↦ outer(inner(T)).
struct Composition {
  ChannelPtr outer;
  ChannelPtr inner;
};
/// T ↦ λ a(T) + (1 − λ) b(T).
struct Convex {
  double lambda;
  ChannelPtr a;
  ChannelPtr b;
};
}  // namespace form

using ChannelForm = std::variant<form::General, form::Unitary, form::WhiteNoise,
                                 form::NoisyMixture, form::MeasurePrepare, form::Composition,
                                 form::Convex>;

namespace detail {

/// Choi matrix (Λ_* ⊗ id)(|ψ0⟩⟨ψ0|) from Heisenberg Kraus operators Λ(A) = Σ K† A K.
inline CMatrix choi_from_kraus(const std::vector<CMatrix>& kraus, int d) {
  CMatrix j = CMatrix::Zero(d * d, d * d);
  CVector v(d * d);
  for (const auto& k : kraus) {
    for (int a = 0; a < d; ++a)
      for (int i = 0; i < d; ++i) v(a * d + i) = k(a, i);
    j.noalias() += v * v.adjoint();
  }
  return j / static_cast<double>(d);
}

inline std::vector<CMatrix> kraus_from_choi(const CMatrix& choi, int d, double cutoff = 1e-14) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(choi));
  std::vector<CMatrix> kraus;
  for (Eigen::Index k = solver.eigenvalues().size(); k-- > 0;) {
    const double lambda = solver.eigenvalues()(k);
    if (lambda <= cutoff) continue;
    const CVector v = std::sqrt(d * lambda) * solver.eigenvectors().col(k);
    CMatrix op(d, d);
    for (int a = 0; a < d; ++a)
      for (int i = 0; i < d; ++i) op(a, i) = v(a * d + i);
    kraus.push_back(std::move(op));
  }
  return kraus;
}

}  // namespace detail

/// Unital completely positive map on L(C^d) in the Heisenberg picture.
/// Immutable; the Choi matrix is computed at construction.
class Channel {
 public:
  /// From Heisenberg Kraus operators. Throws unless Σ K†K = I within tol.
  static Channel from_kraus(std::vector<CMatrix> kraus, double tol = hermitian_tolerance()) {
    return Channel(std::move(kraus), form::General{}, tol);
  }

  /// From a Choi matrix on C^d ⊗ C^d (output factor first). Throws unless the
  /// matrix is PSD with unit trace and reduced state I/d on the reference factor.
  static Channel from_choi(const CMatrix& choi, double tol = 1e-9) {
    require_hermitian(choi, "channel choi", tol);
    const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(choi.rows()))));
    if (d * d != choi.rows()) throw DimensionError("channel choi: dimension is not a square");
    if (min_eigenvalue(choi) < -tol) throw ValueError("channel choi: matrix is not PSD");
    const std::array<int, 2> dims{d, d};
    if (max_abs(partial_trace(choi, dims, 1) - identity(d) / static_cast<double>(d)) > tol)
      throw ValueError("channel choi: reference marginal is not I/d (map is not unital)");
    return Channel(detail::kraus_from_choi(choi, d), form::General{}, tol);
  }

  int dim() const { return dim_; }
  const std::vector<CMatrix>& kraus() const { return kraus_; }
  const CMatrix& choi() const { return choi_; }
  const ChannelForm& form() const { return form_; }

  /// Heisenberg action Λ(T). Structural forms use their closed expressions.
  CMatrix operator()(const CMatrix& t) const {
    if (t.rows() != dim_ || t.cols() != dim_)
      throw DimensionError("channel: operator dimension differs from channel dimension");
    return std::visit([&](const auto& f) { return act(f, t); }, form_);
  }

  /// Heisenberg action through the Kraus list only.
  CMatrix heisenberg_kraus(const CMatrix& t) const {
    CMatrix out = CMatrix::Zero(dim_, dim_);
    for (const auto& k : kraus_) out.noalias() += k.adjoint() * t * k;
    return out;
  }

  /// Schrödinger dual Λ_*(ϱ) = Σ K ϱ K†.
  CMatrix schrodinger(const CMatrix& rho) const {
    if (rho.rows() != dim_ || rho.cols() != dim_)
      throw DimensionError("channel: state dimension differs from channel dimension");
    CMatrix out = CMatrix::Zero(dim_, dim_);
    for (const auto& k : kraus_) out.noalias() += k * rho * k.adjoint();
    return out;
  }

  // Structural constructors live as friends below.
  friend Channel identity_channel(int d);
  friend Channel unitary_channel(const CMatrix& u);
  friend Channel white_noise(int d, double t);
  friend Channel noisy_mixture(const Channel& theta, const CMatrix& eta, double t);
  friend Channel measure_prepare(const Observable& f, std::vector<CMatrix> states);
  friend Channel compose(const Channel& outer, const Channel& inner);
  friend Channel mix(const Channel& a, const Channel& b, double lambda);

 private:
  Channel(std::vector<CMatrix> kraus, ChannelForm form, double tol)
      : kraus_(std::move(kraus)), form_(std::move(form)) {
    if (kraus_.empty()) throw DimensionError("channel needs at least one Kraus operator");
    dim_ = static_cast<int>(kraus_.front().rows());
    CMatrix sum = CMatrix::Zero(dim_, dim_);
    for (const auto& k : kraus_) {
      if (k.rows() != dim_ || k.cols() != dim_)
        throw DimensionError("channel: Kraus operators must be square of one dimension");
      sum += k.adjoint() * k;
    }
    if (max_abs(sum - identity(dim_)) > tol)
      throw ValueError("channel: Kraus operators are not unital (Σ K†K ≠ I)");
    choi_ = detail::choi_from_kraus(kraus_, dim_);
  }

  Channel(const CMatrix& choi, ChannelForm form)
      : Channel(detail::kraus_from_choi(choi, static_cast<int>(std::lround(std::sqrt(
                                                  static_cast<double>(choi.rows()))))),
                std::move(form), 1e-9) {}

  CMatrix act(const form::General&, const CMatrix& t) const { return heisenberg_kraus(t); }
  CMatrix act(const form::Unitary& f, const CMatrix& t) const { return f.u * t * f.u.adjoint(); }
  CMatrix act(const form::WhiteNoise& f, const CMatrix& t) const {
    return f.t * t + (1.0 - f.t) * t.trace() / static_cast<double>(f.d) * identity(f.d);
  }
  CMatrix act(const form::NoisyMixture& f, const CMatrix& t) const {
    return f.t * (*f.theta)(t) + (1.0 - f.t) * (f.eta * t).trace() * identity(dim_);
  }
  CMatrix act(const form::MeasurePrepare& f, const CMatrix& t) const {
    CMatrix out = CMatrix::Zero(dim_, dim_);
    for (std::size_t x = 0; x < f.states.size(); ++x)
      out += (f.states[x] * t).trace() * f.povm[x];
    return out;
  }
  CMatrix act(const form::Composition& f, const CMatrix& t) const {
    return (*f.outer)((*f.inner)(t));
  }
  CMatrix act(const form::Convex& f, const CMatrix& t) const {
    return f.lambda * (*f.a)(t) + (1.0 - f.lambda) * (*f.b)(t);
  }

  int dim_ = 0;
  std::vector<CMatrix> kraus_;
  CMatrix choi_;
  ChannelForm form_;
};

inline void require_state(const CMatrix& rho, int d, const char* what, double tol = 1e-9) {
  if (rho.rows() != d || rho.cols() != d)
    throw DimensionError(std::string(what) + ": state has wrong dimension");
  if (!is_hermitian(rho, tol)) throw ValueError(std::string(what) + ": state is not Hermitian");
  if (min_eigenvalue(rho) < -tol) throw ValueError(std::string(what) + ": state is not PSD");
  if (std::abs(rho.trace().real() - 1.0) > tol)
    throw ValueError(std::string(what) + ": state does not have unit trace");
}

inline Channel identity_channel(int d) {
  return Channel({identity(d)}, form::Unitary{identity(d)}, hermitian_tolerance());
}

/// σ_U(T) = U T U†.
inline Channel unitary_channel(const CMatrix& u) {
  require_square(u, "unitary_channel");
  if (max_abs(u * u.adjoint() - identity(u.rows())) > 1e-10)
    throw ValueError("unitary_channel: matrix is not unitary");
  return Channel({CMatrix(u.adjoint())}, form::Unitary{u}, 1e-10);
}

/// Γ^wn_t(A) = t A + (1 − t) tr[A] I / d.
inline Channel white_noise(int d, double t) {
  if (d < 1) throw ValueError("white_noise: dimension must be positive");
  if (!(t >= 0.0 && t <= 1.0)) throw ValueError("white_noise: t must lie in [0, 1]");
  CVector psi0 = CVector::Zero(d * d);
  for (int j = 0; j < d; ++j) psi0(j * d + j) = 1.0 / std::sqrt(static_cast<double>(d));
  const CMatrix choi = t * projector(psi0) + (1.0 - t) * identity(d * d) / static_cast<double>(d * d);
  return Channel(choi, form::WhiteNoise{d, t});
}

/// Γ_{t,Θ,η}(T) = t Θ(T) + (1 − t) tr[η T] I.
inline Channel noisy_mixture(const Channel& theta, const CMatrix& eta, double t) {
  const int d = theta.dim();
  require_state(eta, d, "noisy_mixture");
  if (!(t >= 0.0 && t <= 1.0)) throw ValueError("noisy_mixture: t must lie in [0, 1]");
  // Completely depolarizing part T ↦ tr[ηT] I has Choi η ⊗ I/d.
  const CMatrix choi = t * theta.choi() + (1.0 - t) * tensor(eta, identity(d) / static_cast<double>(d));
  return Channel(choi, form::NoisyMixture{t, std::make_shared<const Channel>(theta), eta});
}

/// Measure-and-prepare channel Λ(T) = Σ_x tr[ϱ_x T] F(x).
inline Channel measure_prepare(const Observable& f, std::vector<CMatrix> states) {
  if (states.size() != f.size())
    throw DimensionError("measure_prepare: need one state per outcome");
  const int d = f.dim();
  CMatrix choi = CMatrix::Zero(d * d, d * d);
  for (std::size_t x = 0; x < states.size(); ++x) {
    require_state(states[x], d, "measure_prepare");
    choi += tensor(states[x], f[x].transpose());
  }
  choi /= static_cast<double>(d);
  return Channel(choi, form::MeasurePrepare{f, std::move(states)});
}

/// Heisenberg composition (outer ∘ inner)(T) = outer(inner(T)). Kraus set is
/// the product set {K_inner · K_outer}, compressed through the Choi matrix when
/// it exceeds d² operators.
inline Channel compose(const Channel& outer, const Channel& inner) {
  if (outer.dim() != inner.dim()) throw DimensionError("compose: channel dimensions differ");
  const int d = outer.dim();
  std::vector<CMatrix> kraus;
  kraus.reserve(outer.kraus().size() * inner.kraus().size());
  for (const auto& ki : inner.kraus())
    for (const auto& ko : outer.kraus()) kraus.push_back(ki * ko);
  form::Composition f{std::make_shared<const Channel>(outer), std::make_shared<const Channel>(inner)};
  if (static_cast<int>(kraus.size()) > d * d)
    return Channel(detail::choi_from_kraus(kraus, d), std::move(f));
  return Channel(std::move(kraus), std::move(f), 1e-9);
}

/// Convex combination λ a + (1 − λ) b. Two white-noise channels mix into a
/// white-noise channel.
inline Channel mix(const Channel& a, const Channel& b, double lambda) {
  if (a.dim() != b.dim()) throw DimensionError("mix: channel dimensions differ");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValueError("mix: weight must lie in [0, 1]");
  const CMatrix choi = lambda * a.choi() + (1.0 - lambda) * b.choi();
  const auto* wa = std::get_if<form::WhiteNoise>(&a.form());
  const auto* wb = std::get_if<form::WhiteNoise>(&b.form());
  if (wa && wb) return Channel(choi, form::WhiteNoise{wa->d, lambda * wa->t + (1.0 - lambda) * wb->t});
  return Channel(choi, form::Convex{lambda, std::make_shared<const Channel>(a),
                                    std::make_shared<const Channel>(b)});
}

/// Effect-wise Heisenberg action on an observable; the image is re-validated.
inline Observable apply(const Channel& ch, const Observable& obs) {
  if (ch.dim() != obs.dim()) throw DimensionError("apply: channel and observable dimensions differ");
  std::vector<CMatrix> out;
  out.reserve(obs.size());
  for (const auto& e : obs.effects()) out.push_back(ch(e));
  Observable image(obs.labels(), std::move(out));
  if (!validate(image, 1e-10).ok) throw ValueError("apply: image is not a valid observable");
  return image;
}

inline JointObservable apply(const Channel& ch, const JointObservable& g) {
  if (ch.dim() != g.dim()) throw DimensionError("apply: channel and joint dimensions differ");
  std::vector<CMatrix> cells;
  cells.reserve(g.cell_count());
  for (const auto& c : g.cells()) cells.push_back(ch(c));
  return JointObservable(g.axes(), std::move(cells));
}

inline std::string form_name(const ChannelForm& f) {
  struct Namer {
    std::string operator()(const form::General&) const { return "general"; }
    std::string operator()(const form::Unitary&) const { return "unitary"; }
    std::string operator()(const form::WhiteNoise&) const { return "white_noise"; }
    std::string operator()(const form::NoisyMixture&) const { return "noisy_mixture"; }
    std::string operator()(const form::MeasurePrepare&) const { return "measure_prepare"; }
    std::string operator()(const form::Composition&) const { return "composition"; }
    std::string operator()(const form::Convex&) const { return "convex"; }
  };
  return std::visit(Namer{}, f);
}

}  // namespace incompat
