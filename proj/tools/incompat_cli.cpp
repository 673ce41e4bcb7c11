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

// incompat: command-line driver for the incompatibility library.
//
// Exit codes: compat check 0 = COMPATIBLE, 1 = INCOMPATIBLE, 2 = UNDECIDED;
// hsm 0 = pass, 1 = fail; 3 = usage or input error; 4 = resource or internal error.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <locale>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "incompat.hpp"

namespace {

using namespace incompat;
using io::json;

constexpr int kUsage = 3;
constexpr int kInternal = 4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  double tol = 1e-7;
  double resolution = 1e-3;
  double herm_tol = 1e-10;
  std::uint64_t seed = 0;
  std::uint64_t samples = 1'000'000;
  long iters = 20000;
  std::string out;

  void check() const {
    if (!(tol > 0 && resolution > 0 && herm_tol > 0 && samples > 1 && iters > 0))
      throw UsageError("--tol, --resolution, --herm-tol, --samples and --iters must be positive");
    if (resolution < tol) throw UsageError("--resolution must not be smaller than --tol");
  }

  SolverOptions solver() const {
    SolverOptions o;
    o.tol = tol;
    o.max_iterations = iters;
    return o;
  }
};

void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw UsageError("cannot write " + cfg.out);
  f << text;
  if (!f) throw UsageError("write to " + cfg.out + " failed");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

Observable trine() {
  std::vector<CMatrix> effects;
  for (int k = 0; k < 3; ++k) {
    const double a = 2.0 * M_PI * k / 3.0;
    effects.push_back((identity(2) + std::cos(a) * pauli_z() + std::sin(a) * pauli_x()) / 3.0);
  }
  return Observable(std::move(effects));
}

CMatrix fourier(int d) {
  CMatrix f(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) f(j, k) = std::polar(1.0 / std::sqrt(double(d)), 2.0 * M_PI * j * k / d);
  return f;
}

int parse_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw UsageError(what + ": expected an integer, got '" + s + "'");
  return v;
}

/// Named instances: xyz, xy, trine, specker:m (or specker with --m), mub:d.
std::vector<Observable> builtin(const std::string& spec, int m_flag) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (name == "xyz" && arg.empty())
    return {binary_observable(pauli_x()), binary_observable(pauli_y()), binary_observable(pauli_z())};
  if (name == "xy" && arg.empty()) return {binary_observable(pauli_x()), binary_observable(pauli_y())};
  if (name == "trine" && arg.empty()) return {trine()};
  if (name == "specker") {
    const int m = arg.empty() ? m_flag : parse_int(arg, "specker");
    return clifford_set(m).observables;
  }
  if (name == "mub") {
    const int d = arg.empty() ? 2 : parse_int(arg, "mub");
    if (d < 2) throw UsageError("mub: dimension must be at least 2");
    return {projective(identity(d)), projective(fourier(d))};
  }
  throw UsageError("unknown builtin '" + spec + "' (expected xyz, xy, trine, specker:m, mub:d)");
}

std::vector<Observable> gather(const std::string& builtin_name, int m, const std::vector<std::string>& files) {
  std::vector<Observable> obs;
  if (!builtin_name.empty()) obs = builtin(builtin_name, m);
  for (const auto& f : files) obs.push_back(io::observable_from_json(io::read_file(f), f));
  if (obs.empty()) throw UsageError("no observables given (pass files or --builtin)");
  return obs;
}

/// "a-b", "a,b,c" or "a".
std::vector<int> parse_range(const std::string& s, const std::string& what) {
  std::vector<int> out;
  const auto dash = s.find('-');
  if (dash != std::string::npos && dash > 0) {
    const int lo = parse_int(s.substr(0, dash), what), hi = parse_int(s.substr(dash + 1), what);
    if (lo > hi) throw UsageError(what + ": empty range " + s);
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(item, what));
  if (out.empty()) throw UsageError(what + ": empty range");
  return out;
}

std::array<double, 3> parse_vector(const std::string& s) {
  std::array<double, 3> v{};
  std::stringstream ss(s);
  ss.imbue(std::locale::classic());
  std::string item;
  int k = 0;
  while (std::getline(ss, item, ',')) {
    if (k == 3) throw UsageError("--n: expected three components");
    std::istringstream is(item);
    is.imbue(std::locale::classic());
    if (!(is >> v[k]) || !is.eof()) throw UsageError("--n: bad component '" + item + "'");
    ++k;
  }
  if (k != 3) throw UsageError("--n: expected three components");
  return v;
}

std::string bounds_csv(const std::vector<int>& ds, const std::vector<int>& ns) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(6);
  os << "d,n,clone_bound,t_P,t_0,eb_threshold\n";
  for (int d : ds) {
    if (d < 2) throw UsageError("bounds: d must be at least 2");
    for (int n : ns) {
      if (n < 2) throw UsageError("bounds: n must be at least 2");
      const Thresholds t = thresholds(d, n);
      os << d << ',' << n << ',' << t.clone << ',' << t.t_p << ',' << t.t_0 << ',' << t.eb << '\n';
    }
  }
  return os.str();
}

std::string summary_table(const ClassReport& r) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  auto row = [&](const std::string& cls, const ClassVerdict& v) {
    os << "  " << std::left << std::setw(8) << cls << std::setw(10) << to_string(v.status) << v.evidence.rule;
    if (!v.evidence.witness_name.empty()) os << " [" << v.evidence.witness_name << "]";
    if (!v.evidence.note.empty()) os << " - " << v.evidence.note;
    os << '\n';
  };
  os << r.descriptor << "  (min PT eigenvalue " << std::setprecision(6) << r.min_pt_eigenvalue << ")\n";
  row("EBC", r.ebc);
  for (const auto& [n, v] : r.n_ibc) row(std::to_string(n) + "-IBC", v);
  row("IBC", r.ibc);
  return os.str();
}

Observable hsm_default(const std::string& kind, int d) {
  if (kind == "projective") return projective(identity(d));
  if (d == 2) return trine();
  // Rank-1 POVM from two mutually unbiased bases, each effect ½|φ⟩⟨φ|.
  std::vector<CMatrix> effects;
  const CMatrix f = fourier(d);
  for (int i = 0; i < d; ++i) effects.push_back(0.5 * projector(identity(d).col(i)));
  for (int i = 0; i < d; ++i) effects.push_back(0.5 * projector(f.col(i)));
  return Observable(std::move(effects));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint measurability, robustness and incompatibility-breaking channel classification"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig cfg;
  app.add_option("--tol", cfg.tol, "solver distance tolerance")->capture_default_str();
  app.add_option("--resolution", cfg.resolution, "robustness bracket width")->capture_default_str();
  app.add_option("--herm-tol", cfg.herm_tol, "Hermiticity tolerance")->capture_default_str();
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app.add_option("--samples", cfg.samples, "Monte-Carlo samples")->capture_default_str();
  app.add_option("--iters", cfg.iters, "solver iteration cap")->capture_default_str();
  app.add_option("--out", cfg.out, "write output here instead of stdout");

  std::string builtin_name;
  int m = 5;
  std::vector<std::string> files;

  auto* compat = app.add_subcommand("compat", "joint measurability");
  compat->require_subcommand(1);
  auto* check = compat->add_subcommand("check", "test a family of observables");
  double t = 1.0;
  check->add_option("files", files, "observable JSON files");
  check->add_option("--builtin", builtin_name, "xyz, xy, trine, specker:m, mub:d");
  check->add_option("--m", m, "Specker generator count")->capture_default_str();
  check->add_option("--t", t, "white-noise parameter applied first")->capture_default_str();

  auto* robust = app.add_subcommand("robustness", "white-noise robustness bracket");
  robust->add_option("files", files, "observable JSON files");
  robust->add_option("--builtin", builtin_name, "xyz, xy, trine, specker:m, mub:d");
  robust->add_option("--m", m, "Specker generator count")->capture_default_str();

  auto* cls = app.add_subcommand("classify", "EBC / n-IBC / IBC report for a channel");
  std::string channel_file;
  int n_max = 3, ensembles = 2;
  cls->add_option("channel", channel_file, "channel JSON file")->required();
  cls->add_option("--n-max", n_max, "largest n for n-IBC")->capture_default_str();
  cls->add_option("--ensembles", ensembles, "random witness ensembles per n")->capture_default_str();

  auto* bnd = app.add_subcommand("bounds", "threshold table as CSV");
  std::string d_range = "2-6", n_range = "2-10";
  bnd->add_option("--d", d_range, "dimension range a-b or list")->capture_default_str();
  bnd->add_option("--n", n_range, "n range a-b or list")->capture_default_str();

  auto* hsm = app.add_subcommand("hsm", "Monte-Carlo hidden-state model checks");
  std::string kind = "projective", direction = "0,0,1", hsm_file;
  int d = 2;
  hsm->add_option("--kind", kind, "projective, rank1 or spin")->capture_default_str();
  hsm->add_option("--d", d, "dimension for the default observable")->capture_default_str();
  hsm->add_option("--n", direction, "spin direction x,y,z")->capture_default_str();
  hsm->add_option("--observable", hsm_file, "observable JSON instead of the default");
  hsm->add_option("--builtin", builtin_name, "builtin observable (e.g. trine)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    cfg.check();
    set_hermitian_tolerance(cfg.herm_tol);

    if (check->parsed()) {
      const auto obs = gather(builtin_name, m, files);
      const auto r = joint_measurability(CompatInstance(obs, t), cfg.solver());
      json j = io::to_json(r);
      j["t"] = t;
      emit(cfg, dump(j));
      return r.verdict == Verdict::Compatible ? 0 : r.verdict == Verdict::Incompatible ? 1 : 2;
    }
    if (robust->parsed()) {
      const auto obs = gather(builtin_name, m, files);
      emit(cfg, dump(io::to_json(robustness(obs, cfg.resolution, cfg.solver()))));
      return 0;
    }
    if (cls->parsed()) {
      if (n_max < 2) throw UsageError("--n-max must be at least 2");
      const Channel ch = io::channel_from_json(io::read_file(channel_file), channel_file);
      ClassifyOptions opt;
      opt.n_max = n_max;
      opt.random_ensembles = ensembles;
      opt.seed = cfg.seed;
      opt.solver = cfg.solver();
      const ClassReport r = classify(ch, opt);
      emit(cfg, dump(io::to_json(r)));
      std::cerr << summary_table(r);
      return 0;
    }
    if (bnd->parsed()) {
      emit(cfg, bounds_csv(parse_range(d_range, "--d"), parse_range(n_range, "--n")));
      return 0;
    }
    if (hsm->parsed()) {
      MonteCarloOptions mc;
      mc.samples = cfg.samples;
      mc.seed = cfg.seed;
      HsmEstimate est;
      if (kind == "spin") {
        est = spin_direction_check(parse_vector(direction), mc);
      } else if (kind == "projective" || kind == "rank1") {
        Observable obs = hsm_default(kind, d);
        if (!hsm_file.empty()) {
          obs = io::observable_from_json(io::read_file(hsm_file), hsm_file);
        } else if (!builtin_name.empty()) {
          const auto b = builtin(builtin_name, m);
          if (b.size() != 1) throw UsageError("hsm: builtin must name a single observable");
          obs = b.front();
        }
        est = kind == "projective" ? hsm_projective(obs, mc) : hsm_rank1(obs, mc);
      } else {
        throw UsageError("--kind must be projective, rank1 or spin");
      }
      json j = io::to_json(est);
      j["kind"] = kind;
      emit(cfg, dump(j));
      return j["pass"].get<bool>() ? 0 : 1;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const io::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
