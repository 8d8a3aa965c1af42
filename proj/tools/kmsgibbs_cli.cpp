// Copyright 2026 The kmsgibbs Authors
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

// kmsgibbs command-line driver: verify, construct, gap-sweep, mix, oracle.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kmsgibbs/analysis.hpp"
#include "kmsgibbs/classical.hpp"
#include "kmsgibbs/io.hpp"
#include "kmsgibbs/random.hpp"
#include "kmsgibbs/time_domain.hpp"

namespace kmsgibbs::cli {
namespace {

using io::json;

struct Config {
  std::string model;
  std::string construction = "coherent";
  std::string profile;
  double sigma = 1.0;
  std::string discrete;
  std::string jumps = "auto";
  double tol = 1e-9;
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
  int jobs = 1;
  // gap-sweep
  std::string betas = "0:0.5:0.05";
  bool no_mixing = false;
  // mix
  std::string times = "0:10:0.5";
  std::string initial = "basis:0";
};

struct DiscreteSpec {
  std::string kind;  // exact | taylor | recursive
  int param = 0;
};

std::optional<DiscreteSpec> parse_discrete(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "exact") return DiscreteSpec{"exact", 0};
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  if (colon == std::string::npos || (kind != "taylor" && kind != "recursive"))
    fail(ErrorCode::kUsage, "--discrete must be exact, taylor:N or recursive:L");
  int n = 0;
  try {
    std::size_t used = 0;
    n = std::stoi(s.substr(colon + 1), &used);
    if (used != s.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    fail(ErrorCode::kUsage, "--discrete " + kind + ":N needs an integer N");
  }
  if (kind == "taylor" && n < 1) fail(ErrorCode::kUsage, "Taylor order must be at least 1");
  if (kind == "recursive" && n < 0) fail(ErrorCode::kUsage, "recursion depth must be non-negative");
  return DiscreteSpec{kind, n};
}

/** "a:b:step" or a comma list. */
std::vector<double> parse_grid(const std::string& s, const char* what) {
  std::vector<double> out;
  try {
    if (s.find(':') != std::string::npos) {
      std::vector<double> p;
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ':')) p.push_back(std::stod(item));
      if (p.size() != 3 || !(p[2] > 0) || p[1] < p[0]) throw std::invalid_argument("range");
      const int n = static_cast<int>(std::floor((p[1] - p[0]) / p[2] + 1e-9));
      for (int k = 0; k <= n; ++k) out.push_back(p[0] + k * p[2]);
    } else {
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    }
  } catch (const std::exception&) {
    fail(ErrorCode::kUsage, std::string(what) + " must be start:stop:step or a comma-separated list");
  }
  if (out.empty()) fail(ErrorCode::kUsage, std::string(what) + " is empty");
  return out;
}

ModelSpec load_model(const Config& c) {
  if (c.model.empty()) fail(ErrorCode::kUsage, "--model is required");
  return io::model_from_json(io::load_json_argument(c.model, "model"));
}

bool is_lattice(const ModelSpec& s) { return s.model == "ising" || s.model == "heisenberg"; }

/** Default jump set: Pauli operators per qubit when d = 2^n, otherwise Hermitian nearest-level hops. */
JumpSet jump_set(const Config& c, const ModelSpec& spec, int d) {
  std::string kind = c.jumps;
  if (kind == "auto") kind = (d & (d - 1)) == 0 && d > 1 ? "pauli" : "hops";
  if (kind == "none") return JumpSet{};
  if (kind == "pauli") {
    if ((d & (d - 1)) != 0 || d < 2) fail(ErrorCode::kUsage, "--jumps pauli needs a power-of-two dimension");
    int n = 0;
    while ((1 << n) < d) ++n;
    return pauli_jump_set(is_lattice(spec) ? spec.L : n);
  }
  if (kind == "hops") {
    std::vector<CMatrix> ops;
    std::vector<std::string> labels;
    for (int i = 0; i + 1 < d; ++i) {
      CMatrix a = CMatrix::Zero(d, d);
      a(i, i + 1) = 1.0;
      a(i + 1, i) = 1.0;
      ops.push_back(a);
      labels.push_back("hop" + std::to_string(i));
    }
    return make_jump_set(std::move(ops), std::move(labels));
  }
  fail(ErrorCode::kUsage, "--jumps must be auto, pauli, hops or none");
}

ConstructionOptions construction_options(const Config& c) {
  const auto& names = construction_names();
  if (std::find(names.begin(), names.end(), c.construction) == names.end())
    fail(ErrorCode::kUsage, "unknown construction '" + c.construction + "'");
  ConstructionOptions o;
  o.name = c.construction;
  o.sigma = c.sigma;
  if (!c.profile.empty()) o.profile = io::profile_from_argument(c.profile);
  return o;
}

json config_json(const Config& c, const std::string& command, const ModelSpec* spec) {
  json j;
  j["command"] = command;
  if (spec) j["model"] = io::model_to_json(*spec);
  j["construction"] = c.construction;
  j["profile"] = c.profile.empty() ? default_profile(c.construction).name : c.profile;
  j["sigma"] = c.sigma;
  j["discrete"] = c.discrete.empty() ? json(nullptr) : json(c.discrete);
  j["jumps"] = c.jumps;
  j["tol"] = c.tol;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  return j;
}

/** The balanced transition part sum_a S[A_a . A_a^dagger] and the pieces it was built from. */
struct Built {
  ModelSpec spec;
  HamiltonianModel h;
  GibbsState rho;
  JumpSet jumps;
  CPMap transition;
};

Built build(const Config& c) {
  ModelSpec spec = load_model(c);
  HamiltonianModel h = lattice_hamiltonian(spec);
  GibbsState rho = gibbs(h);
  JumpSet js = jump_set(c, spec, h.dim());
  const ConstructionOptions opt = construction_options(c);
  std::vector<CMatrix> all;
  for (const auto& t : jump_maps(js)) {
    const CPMap part = construct_balanced(t, h, opt);
    all.insert(all.end(), part.kraus().begin(), part.kraus().end());
  }
  CPMap tp = all.empty() ? CPMap(h.dim()) : CPMap(std::move(all), h.dim());
  return {std::move(spec), std::move(h), std::move(rho), std::move(js), std::move(tp)};
}

/** Rescales the transition part into the premise of the requested completion and builds the channel. */
Channel build_channel(const Built& b, const DiscreteSpec& ds, double& scale) {
  const double dnorm = b.transition.size() ? op_norm(hermitian_part(trace_operator(b.transition))) : 0.0;
  const double s = s_surrogate(b.h);
  double cap = 1.0;
  if (ds.kind == "taylor") cap = 1.0 / (16 * s * s);
  if (ds.kind == "recursive") cap = 1.0 / (8 * s * s);
  scale = dnorm > cap ? cap / dnorm : 1.0;
  const CPMap tp = b.transition.scaled(scale);
  if (ds.kind == "exact") return channel_exact(tp, b.h, b.rho);
  if (ds.kind == "taylor") return channel_taylor(tp, b.h, b.rho, ds.param);
  return channel_recursive(tp, b.h, b.rho, ds.param, TraceFix::kDb);
}

json tolerances(const Config& c, double db_threshold_value) {
  json t;
  t["db_residual"] = db_threshold_value;
  t["trace_residual"] = c.tol;
  t["cp_min_eig"] = -c.tol;
  t["fixed_point_residual"] = c.tol;
  return t;
}

void emit(const Config& c, const std::string& name, const std::string& ext, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::filesystem::create_directories(c.out);
  const auto path = std::filesystem::path(c.out) / (name + "." + ext);
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::kUsage, "cannot write '" + path.string() + "'");
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json header(const Config& c, const std::string& command, const ModelSpec* spec) {
  json j;
  j["schema_version"] = io::kSchemaVersion;
  j["config"] = config_json(c, command, spec);
  return j;
}

std::string format_of(const Config& c, const std::string& fallback) {
  const std::string f = c.format.empty() ? fallback : c.format;
  if (f != "json" && f != "csv") fail(ErrorCode::kUsage, "--format must be json or csv");
  return f;
}

int cmd_verify(const Config& c) {
  if (format_of(c, "json") != "json") fail(ErrorCode::kUsage, "verify reports are JSON only");
  const Built b = build(c);
  json j = header(c, "verify", &b.spec);
  const double t_db = db_residual(b.transition, b.rho);
  const double t_thr = db_threshold(b.transition.superop(), c.tol);
  bool pass = t_db <= t_thr;
  j["dimension"] = b.h.dim();
  j["jump_labels"] = b.jumps.labels;
  j["transition"] = {{"db_residual", t_db}, {"db_threshold", t_thr}, {"kraus_count", b.transition.size()}};

  const auto ds = parse_discrete(c.discrete);
  VerificationReport r;
  double thr = 0.0;
  if (ds) {
    double scale = 1.0;
    const Channel q = build_channel(b, *ds, scale);
    r = verify_dynamics(QuantumDynamics{q}, b.rho);
    thr = db_threshold(q.superop(), c.tol);
    j["kind"] = "channel";
    j["provenance"] = q.provenance;
    j["transition_scale"] = scale;
    pass = pass && r.cp_min_eig >= -c.tol;
  } else {
    const Lindbladian l = lindblad_from_cp(b.transition, b.h, b.rho);
    r = verify_dynamics(QuantumDynamics{l}, b.rho);
    thr = db_threshold(l.superop, c.tol);
    j["kind"] = "lindbladian";
  }
  pass = pass && r.db_residual <= thr && r.trace_residual <= c.tol && r.fixed_point_residual <= c.tol;
  j["tolerances"] = tolerances(c, thr);
  j["report"] = io::report_to_json(r);
  j["ergodic"] = ergodicity_check(b.transition).ergodic;
  j["model_notes"] = io::notes_to_json(b.h.notes());
  j["pass"] = pass;
  emit(c, "verify", "json", dump(j));
  return pass ? 0 : 1;
}

int cmd_construct(const Config& c) {
  if (format_of(c, "json") != "json") fail(ErrorCode::kUsage, "construct output is JSON only");
  const Built b = build(c);
  json j = header(c, "construct", &b.spec);
  j["dimension"] = b.h.dim();
  j["jump_labels"] = b.jumps.labels;
  j["transition_kraus"] = io::kraus_to_json(b.transition.kraus());
  j["transition_superoperator"] = io::matrix_to_json(b.transition.superop());
  const auto ds = parse_discrete(c.discrete);
  if (ds) {
    double scale = 1.0;
    const Channel q = build_channel(b, *ds, scale);
    j["transition_scale"] = scale;
    j["channel"] = io::channel_to_json(q);
    j["channel"]["kraus"] = io::kraus_to_json(q.map.kraus());
    j["channel"]["superoperator"] = io::matrix_to_json(q.superop());
  } else {
    const Lindbladian l = lindblad_from_cp(b.transition, b.h, b.rho);
    j["lindbladian"] = io::lindbladian_to_json(l);
    j["lindbladian"]["superoperator"] = io::matrix_to_json(l.superop);
  }
  emit(c, "construct", "json", dump(j));
  return 0;
}

int cmd_gap_sweep(const Config& c) {
  const std::string fmt = format_of(c, "csv");
  const ModelSpec spec = load_model(c);
  if (!is_lattice(spec)) fail(ErrorCode::kUsage, "gap-sweep needs a lattice model (ising or heisenberg)");
  const std::vector<double> betas = parse_grid(c.betas, "--betas");
  const SweepResult r = gap_sweep(spec, construction_options(c), betas, c.jobs, !c.no_mixing);
  json h = header(c, "gap-sweep", &spec);
  h["config"]["betas"] = betas;
  h["config"]["mixing"] = !c.no_mixing;
  if (fmt == "csv") {
    emit(c, "gap_sweep", "csv", "# " + h.dump() + "\n" + io::sweep_csv(r));
  } else {
    json j = h;
    j["sweep"] = io::sweep_json(r);
    emit(c, "gap_sweep", "json", dump(j));
  }
  return 0;
}

CMatrix initial_state(const Config& c, int d) {
  if (c.initial == "mixed") return CMatrix::Identity(d, d) / static_cast<double>(d);
  if (c.initial == "random") {
    CounterRng rng(c.seed);
    CVector v(d);
    for (int i = 0; i < d; ++i) v(i) = cplx(rng.normal(), rng.normal());
    v.normalize();
    return v * v.adjoint();
  }
  if (c.initial.rfind("basis:", 0) == 0) {
    int i = -1;
    try {
      i = std::stoi(c.initial.substr(6));
    } catch (const std::exception&) {
    }
    if (i < 0 || i >= d) fail(ErrorCode::kUsage, "--initial basis:i needs 0 <= i < " + std::to_string(d));
    CMatrix s = CMatrix::Zero(d, d);
    s(i, i) = 1.0;
    return s;
  }
  fail(ErrorCode::kUsage, "--initial must be basis:i, mixed or random");
}

int cmd_mix(const Config& c) {
  const std::string fmt = format_of(c, "csv");
  const Built b = build(c);
  const std::vector<double> grid = parse_grid(c.times, "--times");
  const CMatrix sigma = initial_state(c, b.h.dim());
  const auto ds = parse_discrete(c.discrete);
  DistanceCurve curve;
  std::optional<GapResult> gap;
  double scale = 1.0;
  if (ds) {
    const Channel q = build_channel(b, *ds, scale);
    curve = mixing_sim(QuantumDynamics{q}, b.rho, sigma, grid);
    gap = spectral_gap(QuantumDynamics{q}, b.rho);
  } else {
    const Lindbladian l = lindblad_from_cp(b.transition, b.h, b.rho);
    curve = mixing_sim(QuantumDynamics{l}, b.rho, sigma, grid);
    gap = spectral_gap(QuantumDynamics{l}, b.rho);
  }
  json h = header(c, "mix", &b.spec);
  h["config"]["times"] = grid;
  h["config"]["initial"] = c.initial;
  if (ds) h["transition_scale"] = scale;
  if (fmt == "csv") {
    emit(c, "mix", "csv", "# " + h.dump() + "\n" + io::curve_csv(curve));
  } else {
    json j = h;
    j["t"] = curve.t;
    j["distance"] = curve.distance;
    if (!curve.lazy_distance.empty()) j["lazy_distance"] = curve.lazy_distance;
    j["mixing_time"] = curve.mixing_time ? json(*curve.mixing_time) : json(nullptr);
    j["fitted_rate"] = curve.fitted_rate ? json(*curve.fitted_rate) : json(nullptr);
    j["gap"] = gap->gap;
    j["notes"] = io::notes_to_json(gap->notes);
    emit(c, "mix", "json", dump(j));
  }
  return 0;
}

json check(const std::string& name, double value, double threshold, bool upper = true) {
  json j;
  j["name"] = name;
  j["value"] = value;
  j["threshold"] = threshold;
  j["pass"] = upper ? value <= threshold : value >= threshold;
  return j;
}

int cmd_oracle(const Config& c) {
  if (format_of(c, "json") != "json") fail(ErrorCode::kUsage, "oracle output is JSON only");
  json checks = json::array();
  CounterRng rng(c.seed);

  // Time-domain S and S_c against the frequency-domain maps.
  double s_err = 0.0;
  double sc_err = 0.0;
  for (int k = 0; k < 5; ++k) {
    const int d = 2 + k;
    const HamiltonianModel h(random_hermitian(rng, d, rng.uniform(0.5, 5.0)));
    const CMatrix m = random_unit_norm(rng, d);
    s_err = std::max(s_err, op_norm(s_truncated(m, h, 0.05).value - s_map(m, h)));
    sc_err = std::max(sc_err, op_norm(s_c_integral(m, h).value - s_c(m, h)));
  }
  checks.push_back(check("time-domain S vs frequency S (eps 0.05)", s_err, 0.025));
  checks.push_back(check("time-domain S_c vs frequency S_c", sc_err, 1e-9));

  // Commuting case against the classical rules.
  double rule_err = 0.0;
  for (int d : {2, 3, 4}) {
    RVector e(d);
    for (int i = 0; i < d; ++i) e(i) = rng.uniform(-2, 2);
    const HamiltonianModel h(e.cast<cplx>().asDiagonal().toDenseMatrix());
    const GibbsState rho = gibbs(h);
    RMatrix l = RMatrix::Zero(d, d);
    std::vector<CMatrix> jumps;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (i != j) {
          const double w = i < j ? rng.uniform(0.1, 1.0) : l(j, i);
          l(i, j) = w;
          CMatrix a = CMatrix::Zero(d, d);
          a(i, j) = std::sqrt(w);
          jumps.push_back(a);
        }
    restore_diagonal(l, ChainKind::kLaplacian);
    const CPMap t(jumps, d);
    const RVector v = (-e).array().exp();
    auto pop = [&](const CPMap& tp) {
      const CMatrix s = lindblad_from_cp(tp, h, rho).superop;
      RMatrix p(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) p(i, j) = s(i * d + i, j * d + j).real();
      return p;
    };
    rule_err = std::max(rule_err, (pop(davies(t, h, profiles::metropolis())) - generalized_rule(l, v, g_metropolis))
                                      .cwiseAbs()
                                      .maxCoeff());
    rule_err = std::max(rule_err, (pop(coherent(t, h, profiles::sqrt_metropolis())) - generalized_rule(l, v, g_metropolis))
                                      .cwiseAbs()
                                      .maxCoeff());
    rule_err = std::max(rule_err, (pop(davies(t, h, profiles::glauber())) - generalized_rule(l, v, g_glauber))
                                      .cwiseAbs()
                                      .maxCoeff());
  }
  checks.push_back(check("commuting case vs generalized rule", rule_err, 1e-10));

  double sym = 0.0;
  for (double nu : linear_grid(-3, 3, 20))
    sym = std::max(sym, std::abs(std::exp(nu) * gaussian_uncertain_gamma(nu, 1.0) - gaussian_uncertain_gamma(-nu, 1.0)));
  checks.push_back(check("Gaussian-uncertain rule symmetry", sym, 1e-12));

  const auto w = linear_grid(-10, 10, 81);
  const auto t = linear_grid(-3, 3, 60);
  for (const auto& [pair, grid] : {std::pair{FourierPair::kA, w}, std::pair{FourierPair::kB, t}, std::pair{FourierPair::kC, t}}) {
    const FourierCheck f = fourier_pair_check(pair, grid);
    json j = check("Fourier pair (" + f.name + ")", f.max_deviation, 1e-6);
    j["statement"] = f.statement;
    checks.push_back(j);
  }

  bool pass = true;
  for (const auto& ch : checks) pass = pass && ch.at("pass").get<bool>();
  json j = header(c, "oracle", nullptr);
  j["checks"] = checks;
  j["pass"] = pass;
  emit(c, "oracle", "json", dump(j));
  return pass ? 0 : 1;
}

void common_options(CLI::App* app, Config& c, bool model_required) {
  auto* m = app->add_option("--model", c.model, "Model: JSON text, JSON file, or shorthand such as ising-L3");
  if (model_required) m->required();
  app->add_option("--construction", c.construction, "davies | coherent | oft | two-sided | interpolated")
      ->capture_default_str();
  app->add_option("--profile", c.profile, "Profile name or custom JSON table (inline or file)");
  app->add_option("--sigma", c.sigma, "Energy resolution for oft, two-sided and interpolated")->capture_default_str();
  app->add_option("--discrete", c.discrete, "Discrete completion: exact | taylor:N | recursive:L");
  app->add_option("--jumps", c.jumps, "Jump set: auto | pauli | hops | none")->capture_default_str();
  app->add_option("--tol", c.tol, "Residual tolerance")->capture_default_str();
  app->add_option("--seed", c.seed, "Seed for randomized inputs")->capture_default_str();
  app->add_option("--out", c.out, "Output directory (default: stdout)");
  app->add_option("--format", c.format, "json | csv");
  app->add_option("--jobs", c.jobs, "Worker threads for sweeps")->capture_default_str();
}

}  // namespace
}  // namespace kmsgibbs::cli

int main(int argc, char** argv) {
  using namespace kmsgibbs;
  using namespace kmsgibbs::cli;
  CLI::App app{"Detailed-balanced quantum dynamics toolkit"};
  app.require_subcommand(1);
  Config c;
  auto* verify = app.add_subcommand("verify", "Build dynamics on a model and report residuals");
  auto* construct = app.add_subcommand("construct", "Emit Kraus operators and superoperators");
  auto* sweep = app.add_subcommand("gap-sweep", "Spectral gap over a beta grid on a lattice model");
  auto* mix = app.add_subcommand("mix", "Trace distance to the Gibbs state along a time grid");
  auto* oracle = app.add_subcommand("oracle", "Run the numerical cross-checks");
  for (auto* s : {verify, construct, sweep, mix}) common_options(s, c, true);
  common_options(oracle, c, false);
  sweep->add_option("--betas", c.betas, "start:stop:step or comma list")->capture_default_str();
  sweep->add_flag("--no-mixing", c.no_mixing, "Skip the mixing-time estimate");
  mix->add_option("--times", c.times, "start:stop:step or comma list")->capture_default_str();
  mix->add_option("--initial", c.initial, "basis:i | mixed | random")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << io::error_record("usage", e.what()) << '\n';
    return 2;
  }

  try {
    if (*verify) return cmd_verify(c);
    if (*construct) return cmd_construct(c);
    if (*sweep) return cmd_gap_sweep(c);
    if (*mix) return cmd_mix(c);
    return cmd_oracle(c);
  } catch (const Error& e) {
    std::cerr << io::error_record(std::string(to_string(e.code())), e.what()) << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << io::error_record("internal", e.what()) << '\n';
    return 3;
  }
}
