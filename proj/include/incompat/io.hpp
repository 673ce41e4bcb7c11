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

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "incompat/channels.hpp"
#include "incompat/classify.hpp"
#include "incompat/compat.hpp"
#include "incompat/constructions.hpp"
#include "incompat/observables.hpp"

// JSON wire formats. Matrices are row-major arrays of [re, im] pairs.
namespace incompat::io {

using nlohmann::json;

/// Malformed input; what() carries "source:line:column: message" when known.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline json to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix matrix_from_json(const json& j, const std::string& where = "matrix") {
  if (!j.is_array() || j.empty()) throw ParseError(where + ": expected a nonempty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw ParseError(where + ": row " + std::to_string(i) + " must have " + std::to_string(n) + " entries");
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& e = row[k];
      if (e.is_number()) {
        m(i, k) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, k) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw ParseError(where + ": entry (" + std::to_string(i) + "," + std::to_string(k) +
                         ") must be a number or [re, im]");
      }
    }
  }
  return m;
}

inline json to_json(const Observable& obs) {
  json effects = json::array();
  for (std::size_t a = 0; a < obs.size(); ++a)
    effects.push_back({{"label", obs.labels()[a]}, {"matrix", to_json(obs[a])}});
  return {{"dim", obs.dim()}, {"effects", std::move(effects)}};
}

/// Parses and validates an observable at tolerance 1e-8.
inline Observable observable_from_json(const json& j, const std::string& where = "observable") {
  if (!j.is_object() || !j.contains("effects")) throw ParseError(where + ": expected an object with \"effects\"");
  const auto& effects = j.at("effects");
  if (!effects.is_array() || effects.empty()) throw ParseError(where + ": \"effects\" must be a nonempty array");
  std::vector<int> labels;
  std::vector<CMatrix> mats;
  for (std::size_t a = 0; a < effects.size(); ++a) {
    const auto& e = effects[a];
    const std::string at = where + ".effects[" + std::to_string(a) + "]";
    if (!e.is_object() || !e.contains("matrix")) throw ParseError(at + ": expected {\"label\", \"matrix\"}");
    labels.push_back(e.contains("label") ? e.at("label").get<int>() : static_cast<int>(a));
    mats.push_back(matrix_from_json(e.at("matrix"), at + ".matrix"));
  }
  if (j.contains("dim") && j.at("dim").get<int>() != mats.front().rows())
    throw ParseError(where + ": \"dim\" does not match effect size");
  try {
    return Observable::checked(std::move(labels), std::move(mats), 1e-8);
  } catch (const std::invalid_argument& e) {
    throw ParseError(where + ": " + e.what());
  }
}

inline json to_json(const JointObservable& g) {
  json cells = json::array();
  for (const auto& c : g.cells()) cells.push_back(to_json(c));
  return {{"dim", g.dim()}, {"axes", g.axes()}, {"cells", std::move(cells)}};
}

/// Parses JSON text, mapping syntax errors to "source:line:column".
inline json parse(const std::string& text, const std::string& source = "<input>") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

inline json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

inline Channel channel_from_json(const json& j, const std::string& where = "channel");

inline CMatrix state_from_json(const json& j, const std::string& where) { return matrix_from_json(j, where); }

inline Channel channel_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  try {
    if (j.contains("white_noise")) {
      const auto& w = j.at("white_noise");
      return white_noise(w.at("d").get<int>(), w.at("t").get<double>());
    }
    if (j.contains("identity")) return identity_channel(j.at("identity").at("d").get<int>());
    if (j.contains("unitary")) return unitary_channel(matrix_from_json(j.at("unitary").at("matrix"), where + ".unitary"));
    if (j.contains("noisy_mixture")) {
      const auto& m = j.at("noisy_mixture");
      const Channel theta = channel_from_json(m.at("theta"), where + ".noisy_mixture.theta");
      return noisy_mixture(theta, state_from_json(m.at("eta"), where + ".noisy_mixture.eta"), m.at("t").get<double>());
    }
    if (j.contains("measure_prepare")) {
      const auto& m = j.at("measure_prepare");
      const Observable f = observable_from_json(m.at("povm"), where + ".measure_prepare.povm");
      std::vector<CMatrix> states;
      for (std::size_t x = 0; x < m.at("states").size(); ++x)
        states.push_back(state_from_json(m.at("states")[x], where + ".measure_prepare.states[" + std::to_string(x) + "]"));
      return measure_prepare(f, std::move(states));
    }
    if (j.contains("compose")) {
      const auto& c = j.at("compose");
      if (!c.is_array() || c.size() != 2) throw ParseError(where + ".compose: expected [outer, inner]");
      return compose(channel_from_json(c[0], where + ".compose[0]"), channel_from_json(c[1], where + ".compose[1]"));
    }
    if (j.contains("kraus")) {
      std::vector<CMatrix> kraus;
      for (std::size_t k = 0; k < j.at("kraus").size(); ++k)
        kraus.push_back(matrix_from_json(j.at("kraus")[k], where + ".kraus[" + std::to_string(k) + "]"));
      if (j.contains("dim") && j.at("dim").get<int>() != kraus.front().rows())
        throw ParseError(where + ": \"dim\" does not match Kraus size");
      return Channel::from_kraus(std::move(kraus), 1e-9);
    }
    if (j.contains("choi")) return Channel::from_choi(matrix_from_json(j.at("choi"), where + ".choi"));
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(where + ": " + e.what());
  }
  throw ParseError(where + ": expected one of kraus, choi, white_noise, measure_prepare, noisy_mixture, unitary, compose, identity");
}

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline json to_json(const std::vector<Observable>& obs) {
  json arr = json::array();
  for (const auto& o : obs) arr.push_back(to_json(o));
  return arr;
}

inline json to_json(const CompatResult& r, bool include_joint = true) {
  json j = {{"verdict", to_string(r.verdict)}, {"residual", r.residual}, {"iterations", r.iterations}};
  if (r.joint && include_joint) j["joint"] = to_json(*r.joint);
  if (r.witness) {
    j["witness"] = {{"value", r.witness->value},
                    {"distance_lower_bound", r.witness->distance_lower_bound},
                    {"min_cell_eigenvalue", r.witness->min_cell_eigenvalue}};
  }
  return j;
}

inline json to_json(const RobustnessResult& r) {
  return {{"t_star", r.t_star},
          {"bracket", {r.t_lo, r.t_hi}},
          {"t_hi_certified", r.hi_certified},
          {"probes", r.probes},
          {"undecided_probes", r.undecided_probes},
          {"observables", r.observables.size()}};
}

inline json to_json(const ClassVerdict& v) {
  json j = {{"status", to_string(v.status)}, {"rule", v.evidence.rule}};
  if (!v.evidence.params.empty()) j["params"] = v.evidence.params;
  if (!v.evidence.note.empty()) j["note"] = v.evidence.note;
  if (!v.evidence.witness_name.empty()) {
    j["witness"] = {{"ensemble", v.evidence.witness_name},
                    {"observables_hash", fnv1a_hex(to_json(v.evidence.witness_set).dump())},
                    {"library_version", kWitnessLibraryVersion}};
    if (v.evidence.compat) j["witness"]["compat"] = to_json(*v.evidence.compat, false);
  }
  return j;
}

inline json to_json(const ClassReport& r) {
  json n_ibc = json::object();
  for (const auto& [n, v] : r.n_ibc) n_ibc[std::to_string(n)] = to_json(v);
  return {{"channel", r.descriptor},
          {"dim", r.dim},
          {"min_pt_eigenvalue", r.min_pt_eigenvalue},
          {"ebc", to_json(r.ebc)},
          {"n_ibc", std::move(n_ibc)},
          {"ibc", to_json(r.ibc)}};
}

inline json to_json(const HsmEstimate& e, double sigma_limit = 3.0, double abs_limit = 5e-3) {
  json effects = json::array(), target = json::array();
  for (std::size_t i = 0; i < e.effects.size(); ++i) {
    effects.push_back(to_json(e.effects[i]));
    target.push_back(to_json(e.target[i]));
  }
  const double dev = e.max_deviation();
  const double sig = e.max_sigma();
  return {{"samples", e.samples},
          {"seed", e.seed},
          {"shards", e.shards},
          {"target_t", e.target_t},
          {"estimate", std::move(effects)},
          {"target", std::move(target)},
          {"max_deviation", dev},
          {"max_sigma", sig},
          {"pass", dev <= abs_limit && sig <= sigma_limit}};
}

}  // namespace incompat::io
