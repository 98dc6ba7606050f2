#include "doctest.h"

#include <cmath>

#include "scb/errors.hpp"
#include "scb/generators.hpp"
#include "scb/integrator.hpp"

using namespace scb;

namespace {

SamplingPtr plane_sampling(int extent) {
  auto action = std::make_shared<const GroupAction>(phase_space_translation_action({1, 8}));
  RVec h(2);
  h << 0.1, 0.1;
  return OrbitSampling::lattice_box(action, ClassicalState::make(0.0, 0.0, 0.5), h, {-extent, -extent},
                                    {extent, extent});
}

SmoothSection bump_probe(const SamplingPtr& s, std::vector<double> radii, int mode = 0) {
  Section phi = Section::zero(s);
  phi.values[s->identity_index()] = FiberVector::basis(s->dims(), mode);
  SmoothSection psi = SmoothSection::smooth(SmoothingKernel::bump(std::move(radii)), phi);
  return psi * cplx(1.0 / section_norm(psi.evaluate()));
}

}  // namespace

TEST_SUITE("generator_engine") {
  TEST_CASE("bump kernel quadrature mass converges to one") {
    // The weights are a lattice quadrature of a unit-mass kernel, so the
    // mass error shrinks as the kernel covers more lattice cells.
    double prev = 1.0;
    for (double r : {0.3, 0.6, 1.2}) {
      const SamplingPtr s = plane_sampling(14);
      double mass = 0.0;
      for (const auto& q : kernel_quadrature(SmoothingKernel::bump({r, r}), *s)) mass += q.weight;
      const double err = std::abs(mass - 1.0);
      CAPTURE(r);
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 1e-3);
  }

  TEST_CASE("smoothing commutes with translations on an abelian group") {
    const SamplingPtr s = plane_sampling(10);
    Section phi = Section::zero(s);
    phi.values[s->identity_index()] = FiberVector::basis(s->dims(), 1);
    const SmoothingKernel k = SmoothingKernel::bump({0.3, 0.3});
    RVec t(2);
    t << 0.2, -0.1;
    const GroupElement g = s->action().group->compose_second_kind(t);
    const Section lhs = section_transform(g, garding_smooth(k, phi));
    const Section rhs = garding_smooth(k, section_transform(g, phi));
    CHECK(section_norm(lhs - rhs) <= 1e-10);
  }

  TEST_CASE("oscillator time generator is the fiber Hamiltonian") {
    // i d/dt exp(-i t (k + 1/2)) at t = 0 is k + 1/2; central differences of
    // the propagator must reproduce it to second order.
    const HamiltonianSpec h = make_polynomial_hamiltonian({1.0, 1.0, 0.0, 0.0});
    const FiberDims d{1, 12};
    const GroupAction a = time_evolution_action(h, d, 1e-3);
    const ClassicalState x = ClassicalState::make(0.0, 0.0, 0.0);
    const CMat hk = a.fiber_hamiltonian(0, x).matrix;
    for (int k = 0; k < 12; ++k) CHECK(std::abs(hk(k, k) - cplx(k + 0.5)) < 1e-12);
    const GroupPtr r = a.group;
    double prev = 0.0;
    for (double tau : {1e-2, 5e-3}) {
      const CMat fd = kI * (a.fiber(exp(r->basis_element(0), tau), x).matrix -
                            a.fiber(exp(r->basis_element(0), -tau), x).matrix) / (2.0 * tau);
      const double err = (fd - hk).norm();
      if (prev > 0.0) CHECK(prev / err > 3.5);
      prev = err;
    }
  }

  TEST_CASE("identity suite on the abelian plane") {
    const SamplingPtr s = plane_sampling(8);
    const SmoothSection psi = bump_probe(s, {0.4, 0.4});
    const GroupPtr g = s->action().group;
    RVec t(2);
    t << 0.1, -0.1;
    const IdentityInputs in{g->basis_element(0) * 0.1, g->basis_element(1) * 0.1,
                            BaseFunction{[](const ClassicalState& x) { return cplx(x.Q(0) * x.P(0)); }, true},
                            g->compose_second_kind(t)};
    const IdentityReport r = identity_suite(in, psi, 1e-3);
    CHECK(r.pass());
    CHECK_NOTHROW(r.require_pass());
    // [A, B] = 0: the commutator of generators vanishes by itself.
    for (const auto& x : r.residuals) {
      if (x.name == "commutator") CHECK(x.residual <= 1e-6);
    }
  }

  TEST_CASE("constant multipliers commute with generators") {
    const SamplingPtr s = plane_sampling(8);
    const SmoothSection psi = bump_probe(s, {0.4, 0.4}, 2);
    const GroupPtr g = s->action().group;
    const IdentityInputs in{g->basis_element(0) * 0.1, g->basis_element(1) * 0.1, BaseFunction::constant(cplx(2.0, 1.0)),
                            g->identity()};
    for (const auto& x : identity_suite(in, psi, 1e-3).residuals) {
      if (x.name == "multiplication") CHECK(x.residual <= 1e-10);
    }
  }

  TEST_CASE("translation derivative of Q is one") {
    const SamplingPtr s = plane_sampling(4);
    const BaseFunction q{[](const ClassicalState& x) { return cplx(x.Q(0)); }, true};
    // Basis 0 shifts Q on the plane.
    for (const cplx v : base_derivative_samples(*s, s->action().group->basis_element(0), q, 1e-3)) {
      CHECK(std::abs(v - cplx(1.0)) < 1e-10);
    }
  }

  TEST_CASE("refine passes on order or at the floor") {
    const IdentityResidual quadratic = refine("q", 0.1, 1.9, 1e-14, [](double t) { return t * t; });
    CHECK(quadratic.pass);
    CHECK(quadratic.order_estimate == doctest::Approx(2.0));
    const IdentityResidual flat = refine("f", 0.1, 1.9, 1e-14, [](double) { return 1e-3; });
    CHECK_FALSE(flat.pass);
    const IdentityResidual noise = refine("n", 0.1, 1.9, 1e-10, [](double) { return 1e-12; });
    CHECK(noise.pass);
    IdentityReport rep;
    rep.residuals.push_back(flat);
    CHECK_THROWS_AS(rep.require_pass(), IdentityViolation);
  }

  TEST_CASE("generator rejects a non-positive step") {
    const SamplingPtr s = plane_sampling(4);
    CHECK_THROWS_AS(generator(s->action().group->basis_element(0), bump_probe(plane_sampling(8), {0.2, 0.2}), 0.0), InputError);
  }
}
