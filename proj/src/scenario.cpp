#include "scb/scenario.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

#include "scb/errors.hpp"

namespace scb {

using nlohmann::json;

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> table{
      {"derivatives", 1e-6},
      {"energy", 1e-8},
      {"unitarity", 1e-8},
      {"propagator_oracle", 1e-6},
      {"group_law_base", 1e-8},
      {"group_law_fiber", 1e-6},
      {"isometry", 1e-10},
      {"section_group_law", 1e-8},
      {"commutation", 1e-10},
      {"pairing_invariance", 1e-10},
      {"pointwise", 1e-10},
      {"commutator", 1e-4},
      {"conjugation", 1e-4},
      {"axiom", 1e-3},
      {"reconstruction", 1e-6},
      {"reconstruction_isometry", 1e-8},
      {"norm_transport", 1e-8},
      {"semigroup", 1e-8},
      {"uniqueness", 1e-12},
      {"word", 1e-6},
      {"inverse_word", 1e-8},
      {"closure", 1e-3},
      {"gauge_relation", 1e-6},
      {"gauge_equivalence", 1e-8},
      {"invariance", 1e-8},
      {"gauge_group_law", 1e-6},
      {"anomaly", 1e-3},
      {"ansatz_quadratic", 1e-5},
  };
  return table;
}

double Scenario::tolerance(const std::string& key) const {
  if (auto it = tolerances.find(key); it != tolerances.end()) return it->second;
  if (auto it = default_tolerances().find(key); it != default_tolerances().end()) return it->second;
  throw InputError("unknown tolerance key " + key);
}

namespace {

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get(const json& j, const std::string& key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + key + "' in " + where);
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  require_keys(j, "scenario", {"name", "group", "action", "gauge", "hamiltonian", "eps", "fiber", "anchor", "numerics",
                               "tolerances", "probes", "convergence", "checks"});
  Scenario s;
  for (const char* key : {"name", "group", "action"}) {
    if (!j.contains(key)) throw ConfigError(std::string("missing '") + key + "'");
  }
  s.name = get<std::string>(j, "name", "scenario", "");
  s.group_id = get<std::string>(j, "group", "scenario", "");
  s.action_id = get<std::string>(j, "action", "scenario", "");
  s.gauge_id = get<std::string>(j, "gauge", "scenario", "");
  s.eps = get<double>(j, "eps", "scenario", s.eps);

  if (j.contains("hamiltonian")) {
    const json& h = j["hamiltonian"];
    require_keys(h, "hamiltonian", {"pp", "qq", "qp", "cubic"});
    s.hamiltonian.pp = get<double>(h, "pp", "hamiltonian", s.hamiltonian.pp);
    s.hamiltonian.qq = get<double>(h, "qq", "hamiltonian", s.hamiltonian.qq);
    s.hamiltonian.qp = get<double>(h, "qp", "hamiltonian", s.hamiltonian.qp);
    s.hamiltonian.cubic = get<double>(h, "cubic", "hamiltonian", s.hamiltonian.cubic);
  }
  if (j.contains("fiber")) {
    const json& f = j["fiber"];
    require_keys(f, "fiber", {"n", "ncut"});
    s.fiber.n = get<int>(f, "n", "fiber", s.fiber.n);
    s.fiber.ncut = get<int>(f, "ncut", "fiber", s.fiber.ncut);
  }
  if (j.contains("anchor")) {
    const json& a = j["anchor"];
    require_keys(a, "anchor", {"S", "P", "Q"});
    s.anchor = ClassicalState::make(get<double>(a, "S", "anchor", 0.0), get<double>(a, "P", "anchor", 0.0),
                                    get<double>(a, "Q", "anchor", 0.0));
  }
  if (j.contains("numerics")) {
    const json& n = j["numerics"];
    require_keys(n, "numerics", {"dt", "fd_tau", "lattice_spacing", "lattice_extent", "kernel_radii", "reference_dt",
                                 "reference_ncut"});
    s.dt = get<double>(n, "dt", "numerics", s.dt);
    s.fd_tau = get<double>(n, "fd_tau", "numerics", s.fd_tau);
    s.lattice_spacing = get<std::vector<double>>(n, "lattice_spacing", "numerics", {});
    s.lattice_extent = get<std::vector<int>>(n, "lattice_extent", "numerics", {});
    s.kernel_radii = get<std::vector<double>>(n, "kernel_radii", "numerics", {});
    s.reference_dt = get<double>(n, "reference_dt", "numerics", s.reference_dt);
    s.reference_ncut = get<int>(n, "reference_ncut", "numerics", s.reference_ncut);
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) throw ConfigError("tolerances must be an object");
    for (const auto& [key, value] : t.items()) {
      if (!default_tolerances().count(key)) throw ConfigError("unknown tolerance '" + key + "'");
      if (!value.is_number()) throw ConfigError("tolerance '" + key + "' must be a number");
      s.tolerances[key] = value.get<double>();
    }
  }
  if (j.contains("probes")) {
    const json& p = j["probes"];
    require_keys(p, "probes", {"seed", "count"});
    s.seed = get<std::uint64_t>(p, "seed", "probes", s.seed);
    s.probe_count = get<int>(p, "count", "probes", s.probe_count);
  }
  if (j.contains("convergence")) {
    const json& c = j["convergence"];
    require_keys(c, "convergence", {"eps", "time"});
    s.convergence_eps = get<std::vector<double>>(c, "eps", "convergence", {});
    s.convergence_time = get<double>(c, "time", "convergence", s.convergence_time);
  }
  if (j.contains("checks")) {
    const json& c = j["checks"];
    require_keys(c, "checks", {"strict_group_law"});
    s.strict_group_law = get<bool>(c, "strict_group_law", "checks", false);
  }
  validate(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

namespace {

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

const std::map<std::string, std::string>& action_groups() {
  static const std::map<std::string, std::string> table{
      {"time-evolution", "R"},
      {"heisenberg-weyl", "H3"},
      {"translations-r2", "R2"},
      {"metaplectic-so2", "SO2"},
  };
  return table;
}

}  // namespace

void validate(const Scenario& s) {
  if (s.name.empty()) throw ConfigError("scenario name is empty");
  GroupPtr group;
  try {
    group = LieGroup::by_id(s.group_id);
  } catch (const InputError&) {
    throw ConfigError("unregistered group '" + s.group_id + "'");
  }
  const auto it = action_groups().find(s.action_id);
  if (it == action_groups().end()) throw ConfigError("unknown action '" + s.action_id + "'");
  if (it->second != s.group_id) {
    throw ConfigError("action '" + s.action_id + "' acts through group " + it->second + ", not " + s.group_id);
  }
  static const std::set<std::string> gauges{"", "trivial", "u1-phase", "action-shift", "ansatz-phase"};
  if (!gauges.count(s.gauge_id)) throw ConfigError("unregistered gauge '" + s.gauge_id + "'");
  if (s.action_id == "metaplectic-so2" && s.gauge_id != "ansatz-phase") {
    throw ConfigError("metaplectic-so2 needs the ansatz-phase gauge");
  }
  if (s.fiber.n != 1) throw ConfigError("only one-dimensional fibers are supported (n = 1)");
  if (s.fiber.ncut < 4) throw ConfigError("N_cut must be at least 4");
  if (s.reference_ncut < 4) throw ConfigError("reference N_cut must be at least 4");
  if (!s.anchor.finite()) throw ConfigError("anchor must be finite");
  for (double v : {s.hamiltonian.pp, s.hamiltonian.qq, s.hamiltonian.qp, s.hamiltonian.cubic}) {
    if (!std::isfinite(v)) throw ConfigError("Hamiltonian coefficients must be finite");
  }
  if (!positive(s.eps)) throw ConfigError("eps must be positive");
  if (!positive(s.dt)) throw ConfigError("dt must be positive");
  if (!positive(s.fd_tau)) throw ConfigError("fd_tau must be positive");
  if (!positive(s.reference_dt)) throw ConfigError("reference_dt must be positive");
  for (const auto& [key, value] : s.tolerances) {
    if (!positive(value)) throw ConfigError("tolerance '" + key + "' must be positive");
  }
  if (s.probe_count < 1) throw ConfigError("probe count must be at least 1");
  for (double e : s.convergence_eps) {
    if (!positive(e)) throw ConfigError("convergence eps values must be positive");
  }
  if (!positive(s.convergence_time)) throw ConfigError("convergence time must be positive");

  const std::size_t dim = static_cast<std::size_t>(group->dim());
  if (s.lattice_spacing.size() != dim) throw ConfigError("lattice_spacing needs one entry per basis direction");
  if (s.lattice_extent.size() != dim) throw ConfigError("lattice_extent needs one entry per basis direction");
  if (s.kernel_radii.size() != dim) throw ConfigError("kernel_radii needs one entry per basis direction");
  for (std::size_t k = 0; k < dim; ++k) {
    if (!positive(s.lattice_spacing[k])) throw ConfigError("lattice spacing must be positive");
    if (s.lattice_extent[k] < 1) throw ConfigError("lattice extent must be at least 1");
    if (!positive(s.kernel_radii[k])) throw ConfigError("kernel radii must be positive");
  }
  if (s.group_id == "H3") {
    // exp(X a) exp(P b) carries a central part a*b; it must stay on the lattice.
    const double ratio = s.lattice_spacing[0] * s.lattice_spacing[1] / s.lattice_spacing[2];
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0) {
      throw ConfigError("H3 lattice: central spacing must divide the product of the other two");
    }
  }
  if (s.group_id == "SO2") {
    const double turns = 2.0 * std::numbers::pi / s.lattice_spacing[0];
    const long n = std::lround(turns);
    if (std::abs(turns - static_cast<double>(n)) > 1e-9 || n < 2 || n % 2 != 0) {
      throw ConfigError("SO2 lattice: spacing must be 2 pi / n with n even");
    }
  }
}

void apply_seed_override(Scenario& s) {
  const char* env = std::getenv("SCBUNDLE_SEED");
  if (!env || !*env) return;
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(env, &used, 10);
  } catch (const std::exception&) {
    throw ConfigError("SCBUNDLE_SEED is not an unsigned integer");
  }
  if (used != std::string(env).size()) throw ConfigError("SCBUNDLE_SEED is not an unsigned integer");
  s.seed = v;
}

HamiltonianSpec make_hamiltonian(const Scenario& s) { return make_polynomial_hamiltonian(s.hamiltonian); }

std::shared_ptr<const GroupAction> make_action(const Scenario& s) {
  if (s.action_id == "time-evolution") {
    return std::make_shared<const GroupAction>(time_evolution_action(make_hamiltonian(s), s.fiber, s.dt));
  }
  if (s.action_id == "heisenberg-weyl") return std::make_shared<const GroupAction>(heisenberg_weyl_action(s.fiber));
  if (s.action_id == "translations-r2") {
    return std::make_shared<const GroupAction>(phase_space_translation_action(s.fiber));
  }
  if (s.action_id == "metaplectic-so2") {
    return std::make_shared<const GroupAction>(metaplectic_action(s.eps, s.fiber, s.dt));
  }
  throw ConfigError("unknown action '" + s.action_id + "'");
}

Gauge make_gauge(const Scenario& s) {
  const std::vector<double> grid{-1.0, -0.5, 0.0, 0.5, 1.0};
  if (s.gauge_id.empty() || s.gauge_id == "trivial") return trivial_gauge();
  if (s.gauge_id == "u1-phase") return u1_phase_gauge(grid);
  if (s.gauge_id == "action-shift") return action_shift_gauge(grid);
  if (s.gauge_id == "ansatz-phase") return ansatz_phase_gauge(s.eps, {0.0});
  throw ConfigError("unregistered gauge '" + s.gauge_id + "'");
}

SamplingPtr make_sampling(const Scenario& s, std::shared_ptr<const GroupAction> action) {
  if (s.group_id == "SO2") {
    const int n = static_cast<int>(std::lround(2.0 * std::numbers::pi / s.lattice_spacing[0]));
    return rotation_sampling(std::move(action), make_gauge(s), s.anchor, n, s.lattice_extent[0], std::numbers::pi);
  }
  const int dim = static_cast<int>(s.lattice_spacing.size());
  RVec spacing(dim);
  std::vector<int> lo(dim), hi(dim);
  for (int k = 0; k < dim; ++k) {
    spacing(k) = s.lattice_spacing[k];
    lo[k] = -s.lattice_extent[k];
    hi[k] = s.lattice_extent[k];
  }
  return OrbitSampling::lattice_box(std::move(action), s.anchor, spacing, lo, hi);
}

std::vector<std::string> catalog_names() {
  return {"oscillator-evolution", "free-particle",     "heisenberg-weyl",
          "translations-r2",      "metaplectic-so2",   "cubic-perturbed-oscillator"};
}

}  // namespace scb
