#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "scb/fiber.hpp"
#include "scb/linalg.hpp"

namespace scb {

/// Base point X = (S, P, Q) of the semiclassical bundle.
struct ClassicalState {
  double S = 0.0;
  RVec P;
  RVec Q;

  static ClassicalState make(double s, double p, double q);
  int n() const { return static_cast<int>(Q.size()); }
  bool finite() const;
  /// (S, P_1..P_n, Q_1..Q_n)
  RVec packed() const;
  static ClassicalState unpack(const RVec& v);
};

double distance(const ClassicalState& a, const ClassicalState& b);

/// H(Q, P) with first and second derivatives. `separable` is set when
/// H = P^2 / (2m) + V(Q) in one dimension, which the grid reference needs.
struct HamiltonianSpec {
  struct Separable {
    double inverse_mass = 1.0;
    std::function<double(double)> potential;
  };

  int n = 1;
  std::function<double(const RVec& q, const RVec& p)> value;
  std::function<RVec(const RVec& q, const RVec& p)> dq;
  std::function<RVec(const RVec& q, const RVec& p)> dp;
  std::function<RMat(const RVec& q, const RVec& p)> hqq;
  std::function<RMat(const RVec& q, const RVec& p)> hqp;  // d^2H / dQ_j dP_k
  std::function<RMat(const RVec& q, const RVec& p)> hpp;
  std::optional<Separable> separable;

  double operator()(const ClassicalState& x) const { return value(x.Q, x.P); }
};

/// One-dimensional polynomial Hamiltonian
///   H = pp P^2/2 + qq Q^2/2 + qp Q P + cubic Q^3.
struct PolynomialHamiltonian {
  double pp = 1.0;
  double qq = 0.0;
  double qp = 0.0;
  double cubic = 0.0;
};

HamiltonianSpec make_polynomial_hamiltonian(const PolynomialHamiltonian& c);

/// Largest relative mismatch between analytic derivatives and central
/// differences of the next-lower level, over the probe states.
double derivative_consistency(const HamiltonianSpec& h,
                              const std::vector<ClassicalState>& probes);

/// Hamilton vector field extended by dS/dt = P.dQ/dt - H, packed like
/// ClassicalState::packed().
RVec hamilton_field(const HamiltonianSpec& h, const ClassicalState& x);

struct Trajectory {
  std::vector<double> t;
  std::vector<ClassicalState> states;
  /// |H(end) - H(start)|
  double energy_drift = 0.0;
  /// Midpoint states of each step (cubic Hermite), used by the fiber stepper.
  std::vector<ClassicalState> midpoints;
};

/// Fixed-step RK4 for the Hamilton equations and the action. A negative T
/// integrates backwards with the same step size. Throws NumericalError with
/// the time of failure on blow-up.
Trajectory classical_flow(const HamiltonianSpec& h, const ClassicalState& x0,
                          double T, double dt);

/// Time-ordered fluctuation propagator along a trajectory, composed from
/// exp(-i dt H_fluct(t + dt/2)) steps.
FiberOperator fluctuation_propagator(const HamiltonianSpec& h,
                                     const Trajectory& trajectory,
                                     const FiberDims& dims);

/// Fiber Hamiltonian of the fluctuations at X.
FiberOperator fluctuation_hamiltonian(const HamiltonianSpec& h,
                                      const ClassicalState& x,
                                      const FiberDims& dims);

/// Pair (base map, fiber map X -> U(uX <- X)).
struct BundleAutomorphism {
  std::function<ClassicalState(const ClassicalState&)> base_map;
  std::function<FiberOperator(const ClassicalState&)> fiber_map;
};

BundleAutomorphism evolution_automorphism(const HamiltonianSpec& h, double t,
                                          double dt, const FiberDims& dims);

struct Grid1D {
  double x0 = 0.0;
  double dx = 0.01;
  int size = 0;

  double x(int i) const { return x0 + dx * i; }
  double length() const { return dx * size; }
};

/// e^{iS/eps} e^{iP(x-Q)/eps} eps^{-1/4} f((x-Q)/sqrt(eps)) on the grid
/// (one dimension). The eps^{-1/4} factor makes the x-space L2 norm equal to
/// the fiber norm.
CVec ansatz_wavefunction(const ClassicalState& x, const FiberVector& f,
                         double eps, const Grid1D& grid);

struct ReferenceOptions {
  double dt = 2e-4;
};

/// Strang split-step Fourier solution of
///   i eps psi_t = [-eps^2/(2m) d^2/dx^2 + V(x)] psi
/// on a periodic grid.
CVec reference_schrodinger(const HamiltonianSpec& h, const CVec& psi0,
                           double eps, double T, const Grid1D& grid,
                           const ReferenceOptions& options = {});

double l2_norm(const CVec& psi, const Grid1D& grid);

struct AnsatzErrorOptions {
  double dt = 1e-3;
  int ncut = 32;
  double reference_dt = 2e-4;
};

/// L2 distance at time T between the propagated ansatz and the grid
/// reference started from the same initial ansatz.
double ansatz_error(const HamiltonianSpec& h, const ClassicalState& x0,
                    const FiberVector& f0, double eps, double T,
                    const AnsatzErrorOptions& options = {});

/// Grid that resolves the ansatz along a whole trajectory.
Grid1D grid_for_trajectory(const Trajectory& trajectory, const FiberVector& f,
                           double eps);

}  // namespace scb
