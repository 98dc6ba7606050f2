#include "doctest.h"

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "scb/dynamics.hpp"
#include "scb/errors.hpp"
#include "scb/fiber.hpp"

using namespace scb;

namespace {

HamiltonianSpec oscillator() { return make_polynomial_hamiltonian({1.0, 1.0, 0.0, 0.0}); }

// Lowest eigenvalues of -1/2 d^2/dx^2 + x^2/2 by second-order differences on
// a dense grid: an oracle that knows nothing about ladder operators.
RVec grid_spectrum(int count) {
  const int n = 6000;
  const double L = 24.0, h = L / (n + 1);
  RVec diag(n), sub = RVec::Constant(n - 1, -0.5 / (h * h));
  for (int i = 0; i < n; ++i) {
    const double x = -L / 2 + h * (i + 1);
    diag(i) = 1.0 / (h * h) + 0.5 * x * x;
  }
  Eigen::SelfAdjointEigenSolver<RMat> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  return es.eigenvalues().head(count);
}

}  // namespace

TEST_SUITE("fiber_space") {
  TEST_CASE("oscillator fiber Hamiltonian is diag(k + 1/2)") {
    const FiberDims d{1, 32};
    const RMat one = RMat::Identity(1, 1), zero = RMat::Zero(1, 1);
    const FiberOperator h = quadratic_hamiltonian(one, zero, one, d);
    CHECK(h.hermitian);
    for (int k = 0; k < d.size(); ++k) CHECK(std::abs(h.matrix(k, k) - cplx(k + 0.5)) < 1e-12);
    CHECK((h.matrix - CMat(h.matrix.diagonal().asDiagonal())).norm() < 1e-12);
    // Independent check of the physics: dense-grid discretization.
    const RVec grid = grid_spectrum(8);
    for (int k = 0; k < 8; ++k) CHECK(std::abs(grid(k) - (k + 0.5)) < 1e-3);
  }

  TEST_CASE("position and momentum matrices match the ladder construction") {
    const FiberDims d{1, 12};
    CHECK((position_matrix(d, 0) - oracle::position(12)).norm() < 1e-13);
    CHECK((momentum_matrix(d, 0) - oracle::momentum(12)).norm() < 1e-13);
    // [xi, p] = i away from the truncation edge.
    const CMat c = position_matrix(d, 0) * momentum_matrix(d, 0) - momentum_matrix(d, 0) * position_matrix(d, 0);
    for (int k = 0; k < 11; ++k) CHECK(std::abs(c(k, k) - kI) < 1e-13);
  }

  TEST_CASE("Hermite functions are orthonormal") {
    const int count = 6;
    RMat gram = RMat::Zero(count, count);
    const double h = 0.01;
    for (double x = -12.0; x <= 12.0; x += h) {
      const RVec v = hermite_functions(x, count);
      gram += h * v * v.transpose();
    }
    CHECK((gram - RMat::Identity(count, count)).norm() < 1e-10);
  }

  TEST_CASE("two-dimensional fibers use graded multi-indices") {
    const FiberDims d{2, 4};
    CHECK(d.size() == 10);
    CHECK(basis_position(d, {0, 0}) == 0);
    CHECK(basis_position(d, {3, 1}) == -1);
    CHECK(parity_matrix(d).diagonal().real().sum() == doctest::Approx(-2.0));
  }

  TEST_CASE("inner rejects mismatched shapes") {
    CHECK_THROWS_AS(inner(FiberVector::basis({1, 4}, 0), FiberVector::basis({1, 5}, 0)), InputError);
  }
}

TEST_SUITE("semiclassical_dynamics") {
  TEST_CASE("polynomial Hamiltonian derivatives agree with differences") {
    const HamiltonianSpec h = make_polynomial_hamiltonian({0.7, 1.3, 0.2, 0.1});
    const std::vector<ClassicalState> probes{ClassicalState::make(0, 0.3, -0.8), ClassicalState::make(0, -1.1, 0.4)};
    CHECK(derivative_consistency(h, probes) <= 1e-6);
  }

  TEST_CASE("RK4 global error scales as dt^4") {
    const HamiltonianSpec h = oscillator();
    const ClassicalState x0 = ClassicalState::make(0.0, 0.0, 1.0);
    const double T = 2.0;
    std::vector<double> err;
    for (double dt : {1e-2, 5e-3, 2.5e-3}) {
      const ClassicalState x = classical_flow(h, x0, T, dt).states.back();
      err.push_back(std::hypot(x.Q(0) - std::cos(T), x.P(0) + std::sin(T)));
    }
    for (int k = 0; k < 2; ++k) {
      const double ratio = err[k] / err[k + 1];
      CHECK(ratio > 8.0);
      CHECK(ratio < 32.0);
    }
  }

  TEST_CASE("action integral matches the closed form") {
    // Q = cos t, P = -sin t: S(t) = int (P dQ/dt - 1/2) dt = -sin(2t)/4.
    const Trajectory tr = classical_flow(oscillator(), ClassicalState::make(0.0, 0.0, 1.0), 1.0, 1e-3);
    CHECK(tr.states.back().S == doctest::Approx(-std::sin(2.0) / 4.0).epsilon(1e-10));
    CHECK(tr.energy_drift < 1e-10);
  }

  TEST_CASE("backwards integration returns to the start") {
    const HamiltonianSpec h = make_polynomial_hamiltonian({1.0, 1.0, 0.0, 0.1});
    const ClassicalState x0 = ClassicalState::make(0.2, 0.3, 0.5);
    const ClassicalState x1 = classical_flow(h, x0, 1.5, 1e-3).states.back();
    CHECK(distance(classical_flow(h, x1, -1.5, 1e-3).states.back(), x0) < 1e-10);
  }

  TEST_CASE("blow-up raises NumericalError with a time") {
    const HamiltonianSpec h = make_polynomial_hamiltonian({1.0, 0.0, 0.0, -1.0});
    try {
      classical_flow(h, ClassicalState::make(0.0, 0.0, 2.0), 50.0, 1e-2);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(e.time() > 0.0);
      CHECK(e.time() < 50.0);
    }
  }

  TEST_CASE("oscillator propagator phases are exp(-i t (k + 1/2))") {
    const FiberDims d{1, 32};
    const double t = 1.7;
    const Trajectory tr = classical_flow(oscillator(), ClassicalState::make(0.0, 0.0, 1.0), t, 1e-3);
    const FiberOperator u = fluctuation_propagator(oscillator(), tr, d);
    CHECK(unitarity_residual(u) < 1e-10);
    for (int k = 0; k < 30; ++k) CHECK(std::abs(u.matrix(k, k) - std::exp(-kI * (t * (k + 0.5)))) < 1e-6);
  }

  TEST_CASE("evolution automorphisms compose") {
    const HamiltonianSpec h = make_polynomial_hamiltonian({1.0, 1.0, 0.0, 0.1});
    const FiberDims d{1, 12};
    const BundleAutomorphism a = evolution_automorphism(h, 0.3, 1e-3, d);
    const BundleAutomorphism b = evolution_automorphism(h, 0.5, 1e-3, d);
    const BundleAutomorphism ab = evolution_automorphism(h, 0.8, 1e-3, d);
    const ClassicalState x = ClassicalState::make(0.0, 0.1, 0.9);
    CHECK(distance(a.base_map(b.base_map(x)), ab.base_map(x)) < 1e-10);
    const CMat lhs = a.fiber_map(b.base_map(x)).matrix * b.fiber_map(x).matrix;
    CHECK((lhs - ab.fiber_map(x).matrix).norm() < 1e-6);
  }

  TEST_CASE("ansatz carries the fiber norm to x space") {
    const FiberVector f = FiberVector::basis({1, 8}, 3);
    const ClassicalState x = ClassicalState::make(0.4, 1.0, -0.5);
    const Grid1D grid{-10.0, 0.002, 10000};
    CHECK(l2_norm(ansatz_wavefunction(x, f, 0.05, grid), grid) == doctest::Approx(1.0).epsilon(1e-8));
  }

  TEST_CASE("split-step reference conserves the norm") {
    const HamiltonianSpec h = make_polynomial_hamiltonian({1.0, 1.0, 0.0, 0.1});
    const Grid1D grid{-8.0, 16.0 / 512, 512};
    const CVec psi0 = ansatz_wavefunction(ClassicalState::make(0.0, 0.0, 1.0), FiberVector::basis({1, 4}, 0), 0.1, grid);
    const CVec psi = reference_schrodinger(h, psi0, 0.1, 0.5, grid, {1e-3});
    CHECK(l2_norm(psi, grid) == doctest::Approx(l2_norm(psi0, grid)).epsilon(1e-10));
  }

  TEST_CASE("quadratic Hamiltonians make the ansatz exact") {
    const HamiltonianSpec h = oscillator();
    AnsatzErrorOptions o;
    o.ncut = 16;
    CHECK(ansatz_error(h, ClassicalState::make(0.0, 0.0, 1.0), FiberVector::basis({1, 16}, 0), 0.08, 1.0, o) < 1e-5);
  }
}
