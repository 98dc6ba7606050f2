#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "scb/gauge.hpp"
#include "scb/integrator.hpp"

namespace scb {

/// One verification setting, read from a JSON file. Every field has a
/// default except name, group and action.
struct Scenario {
  std::string name;
  std::string group_id;
  /// time-evolution | heisenberg-weyl | translations-r2 | metaplectic-so2
  std::string action_id;
  /// Empty means no gauge group.
  std::string gauge_id;

  PolynomialHamiltonian hamiltonian;
  double eps = 0.1;
  FiberDims fiber{1, 16};
  ClassicalState anchor = ClassicalState::make(0.0, 0.0, 1.0);

  double dt = 1e-3;
  double fd_tau = 1e-3;
  std::vector<double> lattice_spacing;
  std::vector<int> lattice_extent;
  std::vector<double> kernel_radii;
  double reference_dt = 2e-4;
  int reference_ncut = 32;

  std::map<std::string, double> tolerances;

  std::uint64_t seed = 1;
  int probe_count = 3;

  std::vector<double> convergence_eps;
  double convergence_time = 1.0;

  /// Record the plain group law even where only a gauge-weakened law holds.
  bool strict_group_law = false;

  double tolerance(const std::string& key) const;
};

/// Built-in tolerance keys and their defaults.
const std::map<std::string, double>& default_tolerances();

/// Throws ConfigError on malformed JSON, unknown keys or invalid values.
Scenario parse_scenario(const std::string& text);
/// Throws IoError when the file cannot be read.
Scenario load_scenario(const std::string& path);
void validate(const Scenario& s);

/// SCBUNDLE_SEED, when set, replaces the scenario seed. Throws ConfigError on
/// a malformed value.
void apply_seed_override(Scenario& s);

std::shared_ptr<const GroupAction> make_action(const Scenario& s);
Gauge make_gauge(const Scenario& s);
HamiltonianSpec make_hamiltonian(const Scenario& s);

/// The scenario lattice: spacing per basis direction, box [-extent, extent].
SamplingPtr make_sampling(const Scenario& s, std::shared_ptr<const GroupAction> action);

std::vector<std::string> catalog_names();

}  // namespace scb
