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
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "incompat/bounds.hpp"
#include "incompat/channels.hpp"
#include "incompat/compat.hpp"
#include "incompat/constructions.hpp"
#include "incompat/parallel.hpp"
#include "incompat/random.hpp"

namespace incompat {

enum class Status { Certified, Refuted, Unknown };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Certified: return "CERTIFIED";
    case Status::Refuted: return "REFUTED";
    case Status::Unknown: return "UNKNOWN";
  }
  return "?";
}

/// Why a verdict was reached. `rule` names the bound or test; `params` carries
/// the numbers it was evaluated at.
struct Evidence {
  std::string rule;
  std::map<std::string, double> params;
  std::string note;
  std::string witness_name;              // refutations: ensemble name
  std::vector<Observable> witness_set;   // refutations: observables before the channel
  std::optional<CompatResult> compat;    // refutations: the INCOMPATIBLE result
};

struct ClassVerdict {
  Status status = Status::Unknown;
  Evidence evidence;
};

struct ClassReport {
  std::string descriptor;
  int dim = 0;
  ClassVerdict ebc;
  std::map<int, ClassVerdict> n_ibc;
  ClassVerdict ibc;
  double min_pt_eigenvalue = 0.0;
};

/// The closed-form white-noise thresholds at (d, n).
struct Thresholds {
  double clone = 0.0;
  double t_p = 0.0;
  double t_0 = 0.0;
  double eb = 0.0;
  double specker(int m) const { return bounds::specker(m); }
};

inline Thresholds thresholds(int d, int n) {
  if (n < 2) throw ValueError("thresholds: n must be at least 2");
  return {bounds::clone(n, d), bounds::projective(d), bounds::rank1(d), bounds::entanglement_breaking(d)};
}

/// Named observable family fed to refutation.
struct Ensemble {
  std::string name;
  std::vector<Observable> observables;
};

struct ClassifyOptions {
  int n_max = 3;
  int random_ensembles = 2;
  std::uint64_t seed = 0;
  std::size_t cell_cap = CompatInstance::kDefaultCellCap;
  SolverOptions solver;
};

// Bump when the default ensemble library changes, so stored refutations stay
// reproducible.
inline constexpr int kWitnessLibraryVersion = 1;

namespace detail {

inline bool below(double t, double bound) { return t <= bound + 1e-12; }

inline ClassVerdict certified(std::string rule, std::map<std::string, double> params = {},
                              std::string note = {}) {
  ClassVerdict v;
  v.status = Status::Certified;
  v.evidence.rule = std::move(rule);
  v.evidence.params = std::move(params);
  v.evidence.note = std::move(note);
  return v;
}

inline ClassVerdict unknown(std::string note) {
  ClassVerdict v;
  v.evidence.rule = "none";
  v.evidence.note = std::move(note);
  return v;
}

inline double min_pt_eigenvalue(const Channel& ch) {
  const std::array<int, 2> dims{ch.dim(), ch.dim()};
  return min_eigenvalue(partial_transpose(ch.choi(), dims, 1));
}

/// Structural entanglement-breaking certificate; nullopt when the form says nothing.
inline std::optional<ClassVerdict> ebc_by_form(const Channel& ch) {
  const auto& f = ch.form();
  if (std::holds_alternative<form::MeasurePrepare>(f))
    return certified("measure_prepare", {{"outcomes", static_cast<double>(std::get<form::MeasurePrepare>(f).states.size())}});
  if (const auto* w = std::get_if<form::WhiteNoise>(&f)) {
    const double bound = bounds::entanglement_breaking(w->d);
    if (below(w->t, bound)) return certified("isotropic_threshold", {{"t", w->t}, {"bound", bound}});
    return std::nullopt;
  }
  if (const auto* c = std::get_if<form::Composition>(&f)) {
    for (const auto& part : {c->outer, c->inner})
      if (auto v = ebc_by_form(*part))
        return certified("ideal", {}, "composition factor '" + form_name(part->form()) + "' is " + v->evidence.rule);
    return std::nullopt;
  }
  if (const auto* m = std::get_if<form::NoisyMixture>(&f)) {
    if (m->t == 0.0) return certified("measure_prepare", {{"t", 0.0}}, "completely depolarizing");
    if (ebc_by_form(*m->theta)) return certified("convex", {{"t", m->t}}, "Θ and the depolarizing part are both EB");
    const int d = ch.dim();
    if (std::holds_alternative<form::Unitary>(m->theta->form()) &&
        max_abs(m->eta - identity(d) / static_cast<double>(d)) <= 1e-12 &&
        below(m->t, bounds::entanglement_breaking(d)))
      return certified("isotropic_threshold", {{"t", m->t}, {"bound", bounds::entanglement_breaking(d)}},
                       "unitary after white noise");
    return std::nullopt;
  }
  if (const auto* cv = std::get_if<form::Convex>(&f)) {
    if (ebc_by_form(*cv->a) && ebc_by_form(*cv->b)) return certified("convex", {{"lambda", cv->lambda}});
    return std::nullopt;
  }
  return std::nullopt;
}

/// Bound-based n-IBC (n ≥ 2) or IBC (n = 0) certificate; nullopt when none applies.
inline std::optional<ClassVerdict> ibc_by_form(const Channel& ch, int n) {
  if (auto v = ebc_by_form(ch)) {
    auto out = certified("entanglement_breaking", v->evidence.params, "EB via " + v->evidence.rule);
    return out;
  }
  const auto& f = ch.form();
  if (const auto* w = std::get_if<form::WhiteNoise>(&f)) {
    if (w->d >= 2) {
      const double t0 = bounds::rank1(w->d);
      if (below(w->t, t0)) return certified("rank1_hidden_state", {{"t", w->t}, {"bound", t0}});
      if (n >= 2) {
        const double clone = bounds::clone(n, w->d);
        if (below(w->t, clone)) return certified("clone_bound", {{"t", w->t}, {"bound", clone}, {"n", double(n)}});
      }
    }
    if (n >= 2 && below(w->t, 1.0 / n)) return certified("mixture_bound", {{"t", w->t}, {"bound", 1.0 / n}});
    return std::nullopt;
  }
  if (const auto* m = std::get_if<form::NoisyMixture>(&f)) {
    if (n >= 2 && below(m->t, 1.0 / n)) return certified("mixture_bound", {{"t", m->t}, {"bound", 1.0 / n}});
    // Γ_{t,σ_U,I/d} = σ_U ∘ Γ^wn_t.
    const int d = ch.dim();
    if (std::holds_alternative<form::Unitary>(m->theta->form()) &&
        max_abs(m->eta - identity(d) / static_cast<double>(d)) <= 1e-12) {
      if (auto v = ibc_by_form(white_noise(d, m->t), n))
        return certified("ideal", v->evidence.params, "unitary after white noise, " + v->evidence.rule);
    }
    if (ibc_by_form(*m->theta, n)) return certified("convex", {{"t", m->t}}, "Θ certified and depolarizing part is EB");
    return std::nullopt;
  }
  if (const auto* c = std::get_if<form::Composition>(&f)) {
    for (const auto& part : {c->outer, c->inner})
      if (auto v = ibc_by_form(*part, n))
        return certified("ideal", v->evidence.params,
                         "composition factor '" + form_name(part->form()) + "' certified by " + v->evidence.rule);
    return std::nullopt;
  }
  if (const auto* cv = std::get_if<form::Convex>(&f)) {
    if (ibc_by_form(*cv->a, n) && ibc_by_form(*cv->b, n)) return certified("convex", {{"lambda", cv->lambda}});
    return std::nullopt;
  }
  return std::nullopt;
}

inline int log2_exact(int d) {
  int p = 0;
  while ((1 << p) < d) ++p;
  return (1 << p) == d ? p : -1;
}

}  // namespace detail

/// Versioned default witness library for n observables on C^d: the first n
/// Clifford generators when d = 2^p (for d = 2, n = 3 this is X, Y, Z), the
/// computational/Fourier pair for n = 2, and seeded Haar-random projective
/// (rank-1) observables.
inline std::vector<Ensemble> default_ensembles(int d, int n, std::uint64_t seed = 0, int random_count = 2,
                                               std::size_t cell_cap = CompatInstance::kDefaultCellCap) {
  std::vector<Ensemble> out;
  auto fits = [&](const std::vector<Observable>& obs) {
    double cells = 1;
    for (const auto& o : obs) cells *= static_cast<double>(o.size());
    return cells <= static_cast<double>(cell_cap);
  };
  const int p = detail::log2_exact(d);
  if (p >= 1 && 2 * p + 1 >= n && (1 << p) <= 8) {
    const auto set = clifford_set(2 * p + 1);
    std::vector<Observable> obs(set.observables.begin(), set.observables.begin() + n);
    if (fits(obs)) out.push_back({"clifford:" + std::to_string(2 * p + 1) + ":first" + std::to_string(n), std::move(obs)});
  }
  if (n == 2 && d >= 2) {
    CMatrix fourier(d, d);
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        fourier(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(d)), 2.0 * M_PI * j * k / d);
    std::vector<Observable> obs{projective(identity(d)), projective(fourier)};
    if (fits(obs)) out.push_back({"mub:" + std::to_string(d), std::move(obs)});
  }
  std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(d * 131 + n)));
  for (int r = 0; r < random_count; ++r) {
    std::vector<Observable> obs;
    for (int k = 0; k < n; ++k) obs.push_back(random::projective(d, rng));
    if (fits(obs)) out.push_back({"random_projective:" + std::to_string(r), std::move(obs)});
  }
  return out;
}

/// Entanglement breaking: structural forms first, then the Choi partial
/// transpose (NPT refutes; PPT certifies only for d = 2).
inline ClassVerdict classify_ebc(const Channel& ch) {
  const double pt = detail::min_pt_eigenvalue(ch);
  auto stamp = [&](ClassVerdict v) {
    v.evidence.params["min_pt_eigenvalue"] = pt;
    return v;
  };
  if (auto v = detail::ebc_by_form(ch)) return stamp(*v);
  if (const auto* w = std::get_if<form::WhiteNoise>(&ch.form())) {
    ClassVerdict v;
    v.status = Status::Refuted;
    v.evidence.rule = "isotropic_threshold";
    v.evidence.params = {{"t", w->t}, {"bound", bounds::entanglement_breaking(w->d)}};
    return stamp(v);
  }
  if (pt < -1e-10) {
    ClassVerdict v;
    v.status = Status::Refuted;
    v.evidence.rule = "npt_choi";
    return stamp(v);
  }
  if (ch.dim() == 2) return stamp(detail::certified("ppt_qubit"));
  return stamp(detail::unknown("Choi matrix is PPT; separability undecided for d > 2"));
}

/// Sufficient conditions only: never refutes.
inline ClassVerdict certify_n_ibc(const Channel& ch, int n) {
  if (n < 2) throw ValueError("certify_n_ibc: n must be at least 2");
  if (auto v = detail::ibc_by_form(ch, n)) return *v;
  if (classify_ebc(ch).status == Status::Certified) return detail::certified("entanglement_breaking", {}, "via Choi PPT test");
  return detail::unknown("no bound applies; a joint-observable construction for this form is needed");
}

/// Applies the channel to each ensemble; the first INCOMPATIBLE image (in list
/// order) refutes, with its witness re-verified against the image.
inline ClassVerdict refute_n_ibc(const Channel& ch, int n, const std::vector<Ensemble>& ensembles,
                                 const SolverOptions& solver = {}) {
  for (const auto& e : ensembles) {
    if (static_cast<int>(e.observables.size()) != n)
      throw DimensionError("refute_n_ibc: ensemble '" + e.name + "' does not have n observables");
    for (const auto& o : e.observables)
      if (o.dim() != ch.dim()) throw DimensionError("refute_n_ibc: ensemble dimension differs from channel");
  }
  std::vector<std::optional<CompatResult>> results(ensembles.size());
  parallel_for(ensembles.size(), [&](std::size_t i) {
    std::vector<Observable> image;
    for (const auto& o : ensembles[i].observables) image.push_back(apply(ch, o));
    auto res = joint_measurability(CompatInstance(std::move(image), 1.0), solver);
    if (res.verdict == Verdict::Incompatible) results[i] = std::move(res);
  });
  for (std::size_t i = 0; i < ensembles.size(); ++i) {
    if (!results[i]) continue;
    std::vector<Observable> image;
    for (const auto& o : ensembles[i].observables) image.push_back(apply(ch, o));
    const double lb = verify_witness(*results[i]->witness, image);
    if (!(lb > 0.0)) continue;
    ClassVerdict v;
    v.status = Status::Refuted;
    v.evidence.rule = "incompatible_image";
    v.evidence.params = {{"n", double(n)}, {"distance_lower_bound", lb}};
    v.evidence.witness_name = ensembles[i].name;
    v.evidence.witness_set = ensembles[i].observables;
    v.evidence.compat = std::move(results[i]);
    return v;
  }
  return detail::unknown("no ensemble produced an incompatible image");
}

/// IBC: certified by EB, the rank-1 hidden-state bound, or ideal/convex
/// reductions; refuted by any incompatible image set of any size.
inline ClassVerdict classify_ibc(const Channel& ch, const std::map<int, std::vector<Ensemble>>& ensembles,
                                 const SolverOptions& solver = {}) {
  if (auto v = detail::ibc_by_form(ch, 0)) return *v;
  if (classify_ebc(ch).status == Status::Certified) return detail::certified("entanglement_breaking", {}, "via Choi PPT test");
  for (const auto& [n, ens] : ensembles) {
    auto v = refute_n_ibc(ch, n, ens, solver);
    if (v.status == Status::Refuted) return v;
  }
  return detail::unknown("no IBC bound applies and no witness refutes");
}

namespace detail {

inline ClassVerdict propagated(Status s, std::string from) {
  ClassVerdict v;
  v.status = s;
  v.evidence.rule = "inclusion";
  v.evidence.note = "implied by " + std::move(from);
  return v;
}

inline void merge(ClassVerdict& slot, Status s, const std::string& from) {
  if (slot.status == s) return;
  if (slot.status != Status::Unknown)
    throw std::logic_error("classification conflict: " + from + " contradicts an existing verdict");
  slot = propagated(s, from);
}

}  // namespace detail

/// Applies EBC ⊆ IBC ⊆ m-IBC ⊆ n-IBC (m ≥ n) in both directions.
inline void enforce_inclusions(ClassReport& r) {
  auto n_keys = [&] {
    std::vector<int> k;
    for (const auto& [n, v] : r.n_ibc) k.push_back(n);
    return k;
  }();
  if (r.ebc.status == Status::Certified) {
    detail::merge(r.ibc, Status::Certified, "EBC certified");
  }
  if (r.ibc.status == Status::Certified)
    for (int n : n_keys) detail::merge(r.n_ibc[n], Status::Certified, "IBC certified");
  for (int m : n_keys)
    if (r.n_ibc[m].status == Status::Certified)
      for (int n : n_keys)
        if (n <= m) detail::merge(r.n_ibc[n], Status::Certified, std::to_string(m) + "-IBC certified");
  for (int n : n_keys)
    if (r.n_ibc[n].status == Status::Refuted) {
      for (int m : n_keys)
        if (m >= n) detail::merge(r.n_ibc[m], Status::Refuted, std::to_string(n) + "-IBC refuted");
      detail::merge(r.ibc, Status::Refuted, std::to_string(n) + "-IBC refuted");
    }
  if (r.ibc.status == Status::Refuted) detail::merge(r.ebc, Status::Refuted, "IBC refuted");
}

/// Consistency of a finished report with the inclusion chain.
inline bool report_consistent(const ClassReport& r) {
  auto is = [](const ClassVerdict& v, Status s) { return v.status == s; };
  if (is(r.ebc, Status::Certified) && !is(r.ibc, Status::Certified)) return false;
  if (is(r.ibc, Status::Refuted) && is(r.ebc, Status::Certified)) return false;
  for (const auto& [n, v] : r.n_ibc) {
    if (is(r.ibc, Status::Certified) && !is(v, Status::Certified)) return false;
    if (is(v, Status::Refuted) && !is(r.ibc, Status::Refuted)) return false;
    for (const auto& [m, w] : r.n_ibc) {
      if (m >= n && is(v, Status::Refuted) && !is(w, Status::Refuted)) return false;
      if (m >= n && is(w, Status::Certified) && !is(v, Status::Certified)) return false;
    }
  }
  return true;
}

inline std::string describe(const Channel& ch) {
  const auto& f = ch.form();
  std::string s = form_name(f) + "(d=" + std::to_string(ch.dim());
  if (const auto* w = std::get_if<form::WhiteNoise>(&f)) s += ", t=" + std::to_string(w->t);
  if (const auto* m = std::get_if<form::NoisyMixture>(&f)) s += ", t=" + std::to_string(m->t);
  return s + ")";
}

/// Full report for n = 2..n_max, IBC and EBC, with inclusion propagation.
inline ClassReport classify(const Channel& ch, const ClassifyOptions& opt = {}) {
  ClassReport r;
  r.descriptor = describe(ch);
  r.dim = ch.dim();
  r.min_pt_eigenvalue = detail::min_pt_eigenvalue(ch);
  r.ebc = classify_ebc(ch);

  std::map<int, std::vector<Ensemble>> ensembles;
  for (int n = 2; n <= opt.n_max; ++n)
    ensembles[n] = default_ensembles(ch.dim(), n, opt.seed, opt.random_ensembles, opt.cell_cap);

  for (int n = 2; n <= opt.n_max; ++n) {
    auto v = certify_n_ibc(ch, n);
    if (v.status == Status::Unknown) {
      auto refuted = refute_n_ibc(ch, n, ensembles[n], opt.solver);
      if (refuted.status == Status::Refuted) v = std::move(refuted);
    }
    r.n_ibc[n] = std::move(v);
  }
  // IBC: reuse the n-IBC refutations instead of re-running the solver.
  if (auto v = detail::ibc_by_form(ch, 0)) {
    r.ibc = *v;
  } else if (r.ebc.status == Status::Certified) {
    r.ibc = detail::certified("entanglement_breaking", {}, "EB via " + r.ebc.evidence.rule);
  } else {
    r.ibc = detail::unknown("no IBC bound applies and no witness refutes");
    for (const auto& [n, v] : r.n_ibc)
      if (v.status == Status::Refuted && v.evidence.rule == "incompatible_image") {
        r.ibc = v;
        break;
      }
  }
  enforce_inclusions(r);
  if (!report_consistent(r)) throw std::logic_error("classify: report violates inclusion chain");
  return r;
}

}  // namespace incompat
