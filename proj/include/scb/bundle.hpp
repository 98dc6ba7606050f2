#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scb/dynamics.hpp"
#include "scb/fiber.hpp"
#include "scb/lie.hpp"

namespace scb {

/// Lie group acting on the semiclassical bundle: base maps u_g, fiber
/// unitaries U_g(u_g X <- X), and the infinitesimal data of each basis
/// direction B_k.
struct GroupAction {
  using Pair = std::pair<ClassicalState, FiberOperator>;

  std::string name;
  GroupPtr group;
  FiberDims dims;

  std::function<ClassicalState(const GroupElement&, const ClassicalState&)> base;
  /// (u_g X, U_g(u_g X <- X)) in one pass.
  std::function<Pair(const GroupElement&, const ClassicalState&)> act;

  /// d/dt u_{exp(B_k t)} X at t = 0, packed like ClassicalState::packed().
  std::function<RVec(int, const ClassicalState&)> base_field;
  /// H(B_k : X) = i d/dt U_{exp(B_k t)}(u X <- X) at t = 0.
  std::function<FiberOperator(int, const ClassicalState&)> fiber_hamiltonian;

  FiberOperator fiber(const GroupElement& g, const ClassicalState& x) const { return act(g, x).second; }
  BundleAutomorphism automorphism(const GroupElement& g) const;
};

/// Time translations t -> classical flow plus fluctuation propagator.
GroupAction time_evolution_action(const HamiltonianSpec& h, const FiberDims& dims, double dt);

/// H3 acting by u_g(S, P, Q) = (S + z + xP, P + y, Q + x) with fiber operators
/// W(u_g X) W(X)^dagger, W(X) = exp(-iQ p) exp(iP xi). One dimension.
GroupAction heisenberg_weyl_action(const FiberDims& dims);

/// R2 acting by (S, P + b, Q + a) with the same fiber dressing.
GroupAction phase_space_translation_action(const FiberDims& dims);

enum class RotationVariant {
  /// Raw oscillator propagator; a full turn gives -1 on the fiber.
  Raw,
  /// Raw propagator with S shifted by eps*theta/2, so a full turn differs
  /// from the identity by an ansatz-phase gauge transformation.
  GaugeShifted,
  /// Propagator times e^{i theta/2}; an honest SO2 action.
  Periodic,
};

/// SO2 rotating phase space along the oscillator flow, theta in (-pi, pi].
GroupAction oscillator_rotation_action(RotationVariant variant, double eps, const FiberDims& dims, double dt);

/// The gauge-shifted rotation.
GroupAction metaplectic_action(double eps, const FiberDims& dims, double dt);

/// Rotation angle of an SO2 element in (-pi, pi].
double so2_angle(const GroupElement& g);

/// One-parameter abelian gauge group L:
/// lambda_alpha on the base and V_alpha(lambda_alpha X <- X) on the fiber.
struct Gauge {
  using Solver = std::function<std::optional<double>(const ClassicalState&, const FiberVector&,
                                                     const ClassicalState&, const FiberVector&)>;

  std::string id;
  std::function<ClassicalState(double, const ClassicalState&)> lambda;
  std::function<FiberOperator(double, const ClassicalState&, const FiberDims&)> V;
  /// Closed-form parameter relating two points, when one exists.
  Solver solve;
  /// Interval scanned by the numerical search.
  std::pair<double, double> search_range{0.0, 0.0};
  /// Parameters used when sampling gauge orbits; contains 0.
  std::vector<double> grid{0.0};
};

Gauge trivial_gauge();
/// lambda = id, V = e^{i theta}.
Gauge u1_phase_gauge(std::vector<double> grid = {0.0});
/// S -> S + c, V = Id.
Gauge action_shift_gauge(std::vector<double> grid = {0.0});
/// S -> S + eps*phi with V = e^{-i phi}: leaves the ansatz wave function
/// unchanged.
Gauge ansatz_phase_gauge(double eps, std::vector<double> grid = {0.0});

/// beta(g, alpha) and gamma(g1, g2) of the gauge relations.
struct GaugeCompensator {
  std::function<double(const GroupElement&, double)> beta;
  std::function<double(const GroupElement&, const GroupElement&)> gamma;
};

/// beta = alpha, gamma = 0.
GaugeCompensator trivial_compensator();
/// gamma = pi * (number of turns lost when theta1 + theta2 is wrapped).
GaugeCompensator metaplectic_compensator();

}  // namespace scb
