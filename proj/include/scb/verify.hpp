#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "scb/report.hpp"
#include "scb/scenario.hpp"

namespace scb {

/// Seeded source for probe data. Doubles come from the raw 64-bit stream,
/// not from std distributions, so the values do not depend on the standard
/// library in use.
class ProbeRng {
 public:
  explicit ProbeRng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi) { return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1)); }

 private:
  std::mt19937_64 engine_;
};

/// Normalized random combination of the lowest `modes` basis states.
FiberVector random_fiber_vector(ProbeRng& rng, const FiberDims& dims, int modes = 4);

/// Every suite that applies to the scenario. Errors inside a check become
/// failing records.
Report run_verify(const Scenario& s);
/// Gauge relations, gauge equivalence and gauge-invariant sections only.
Report run_gauge(const Scenario& s);

/// Ansatz error at time s.convergence_time for each eps. Throws
/// ResolutionError naming the offending eps.
ConvergenceTable run_convergence(const Scenario& s, const std::vector<double>& eps);

struct PropagateOutput {
  /// t,S,P_1,Q_1
  std::string trajectory_csv;
  /// x,re,im
  std::string wavefunction_csv;
};
/// Classical trajectory and the ansatz at time t for the ground fluctuation
/// state; time-evolution scenarios only.
PropagateOutput run_propagate(const Scenario& s, double t);

}  // namespace scb
