#include "doctest.h"

#include <cmath>
#include <numbers>

#include "scb/errors.hpp"
#include "scb/gauge.hpp"

using namespace scb;

namespace {

FiberVector mixed(const FiberDims& d) {
  FiberVector f = FiberVector::zero(d);
  f.coeffs(0) = cplx(0.6, 0.1);
  f.coeffs(1) = cplx(-0.2, 0.5);
  f.coeffs(2) = cplx(0.3, -0.4);
  return f * cplx(1.0 / f.norm());
}

GroupElement angle(double theta) { return exp(LieGroup::so2()->basis_element(0), theta); }

SamplingPtr plane_with_copies(const Gauge& gauge) {
  auto action = std::make_shared<const GroupAction>(phase_space_translation_action({1, 6}));
  RVec h(2);
  h << 0.1, 0.1;
  SamplingOptions o;
  o.gauge_copies = {-0.5, 0.5};
  return OrbitSampling::lattice_box(action, ClassicalState::make(0.0, 0.0, 0.0), h, {-4, -4}, {4, 4}, &gauge, o);
}

}  // namespace

TEST_SUITE("gauge_layer") {
  TEST_CASE("closed-form and searched compensators agree") {
    const FiberDims d{1, 6};
    const ClassicalState x = ClassicalState::make(0.1, 0.2, 0.3);
    const FiberVector f = mixed(d);
    Gauge searched = action_shift_gauge();
    searched.solve = nullptr;
    searched.search_range = {-2.0, 2.0};
    const ClassicalState y = action_shift_gauge().lambda(0.73, x);
    const GaugeMatch closed = gauge_equivalent(action_shift_gauge(), x, f, y, f);
    const GaugeMatch found = gauge_equivalent(searched, x, f, y, f);
    CHECK(closed.equivalent);
    CHECK(found.equivalent);
    CHECK(closed.alpha == doctest::Approx(0.73).epsilon(1e-12));
    CHECK(std::abs(found.alpha - 0.73) < 1e-8);
    // Different momenta are never gauge-equivalent under an action shift.
    CHECK_FALSE(gauge_equivalent(action_shift_gauge(), x, f, ClassicalState::make(0.1, 0.25, 0.3), f).equivalent);
  }

  TEST_CASE("U(1) equivalence is reflexive, symmetric and transitive") {
    const FiberDims d{1, 6};
    const Gauge g = u1_phase_gauge();
    const ClassicalState x = ClassicalState::make(0.0, 0.0, 1.0);
    const FiberVector f1 = mixed(d), f2 = f1 * std::exp(kI * 0.4), f3 = f1 * std::exp(kI * -1.1);
    CHECK(gauge_equivalent(g, x, f1, x, f1).equivalent);
    CHECK(gauge_equivalent(g, x, f1, x, f2).equivalent);
    CHECK(gauge_equivalent(g, x, f2, x, f1).equivalent);
    CHECK(gauge_equivalent(g, x, f2, x, f3).equivalent);
    CHECK(gauge_equivalent(g, x, f1, x, f3).equivalent);
    CHECK_FALSE(gauge_equivalent(g, x, f1, x, FiberVector::basis(d, 4)).equivalent);
  }

  TEST_CASE("metaplectic rotation breaks the strict group law by a sign") {
    const FiberDims d{1, 12};
    const GroupAction a = metaplectic_action(0.1, d, 1e-3);
    const ClassicalState x = ClassicalState::make(0.0, 0.0, 1.0);
    const StrictLaw law = strict_group_law(a, angle(std::numbers::pi), angle(std::numbers::pi), x, mixed(d));
    CHECK(law.fiber == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(law.base == doctest::Approx(0.1 * std::numbers::pi).epsilon(1e-6));
  }

  TEST_CASE("metaplectic compensator satisfies all four relations") {
    const FiberDims d{1, 12};
    const GroupAction a = metaplectic_action(0.1, d, 1e-3);
    const Gauge gauge = ansatz_phase_gauge(0.1);
    const GaugeCompensator c = metaplectic_compensator();
    const ClassicalState x = ClassicalState::make(0.0, 0.0, 1.0);
    for (double t1 : {std::numbers::pi / 2, std::numbers::pi, -3 * std::numbers::pi / 4}) {
      for (double t2 : {std::numbers::pi, 3 * std::numbers::pi / 4}) {
        const RelationInputs in{angle(t1), angle(t1), angle(t2), 0.7, x, mixed(d)};
        for (const GaugeRelation& r : compensator_relations_check(a, gauge, &c, in)) {
          CAPTURE(r.relation);
          CHECK(r.residual <= 1e-6);
          CHECK(r.pass);
        }
      }
    }
    CHECK(c.gamma(angle(std::numbers::pi), angle(std::numbers::pi)) == doctest::Approx(std::numbers::pi));
    CHECK(c.gamma(angle(0.3), angle(0.4)) == doctest::Approx(0.0));
  }

  TEST_CASE("compensators can be solved point by point") {
    const FiberDims d{1, 8};
    const GroupAction a = heisenberg_weyl_action(d);
    RVec t1(3), t2(3);
    t1 << 0.2, -0.1, 0.03;
    t2 << -0.3, 0.2, 0.01;
    const GroupElement g1 = a.group->compose_second_kind(t1), g2 = a.group->compose_second_kind(t2);
    const RelationInputs in{g1, g1, g2, 0.4, ClassicalState::make(0.0, 0.1, 0.5), mixed(d)};
    for (const GaugeRelation& r : compensator_relations_check(a, u1_phase_gauge(), nullptr, in)) {
      CAPTURE(r.relation);
      CHECK(r.residual <= 1e-6);
    }
  }

  TEST_CASE("a stabilizer whose V moves the fiber makes invariance inconsistent") {
    // lambda_theta fixes every point while V_theta = e^{i theta} does not fix
    // a nonzero value: no nonzero invariant section exists.
    auto action = std::make_shared<const GroupAction>(phase_space_translation_action({1, 6}));
    RVec h(2);
    h << 0.1, 0.1;
    const Gauge u1 = u1_phase_gauge({-0.5, 0.0, 0.5});
    const SamplingPtr s =
        OrbitSampling::lattice_box(action, ClassicalState::make(0.0, 0.0, 0.0), h, {-2, -2}, {2, 2}, &u1);
    CHECK_THROWS_AS(invariant_section_build({{s->identity_index(), mixed({1, 6})}}, s), ConsistencyError);
    // The zero section is consistent.
    CHECK_NOTHROW(invariant_section_build({{s->identity_index(), FiberVector::zero({1, 6})}}, s));
  }

  TEST_CASE("invariant sections on action-shift copies") {
    const Gauge gauge = action_shift_gauge({-0.5, 0.0, 0.5});
    const SamplingPtr s = plane_with_copies(gauge);
    CHECK(s->size() == 3 * 81);
    const Section psi = invariant_section_build({{s->identity_index(), mixed({1, 6})}}, s);
    CHECK(invariance_residual(psi) <= 1e-12);
    RVec t(2);
    t << 0.1, -0.2;
    const GroupElement g = s->action().group->compose_second_kind(t);
    const Section moved = gauge_section_transform(g, psi);
    CHECK(invariance_residual(moved) <= 1e-8);
    CHECK(std::abs(section_norm(moved) - section_norm(psi)) <= 1e-8);

    Section broken = psi;
    for (int i = 0; i < s->size(); ++i) {
      if (s->gauge_parameters()[i] != 0.0 && broken.values[i].norm() > 0.0) {
        broken.values[i] = broken.values[i] * cplx(2.0);
        break;
      }
    }
    CHECK_THROWS_AS(gauge_section_transform(g, broken), PreconditionError);
  }

  TEST_CASE("gauge-invariant sections restore the group law for the metaplectic rotation") {
    const FiberDims d{1, 10};
    auto a = std::make_shared<const GroupAction>(metaplectic_action(0.1, d, 1e-3));
    const Gauge gauge = ansatz_phase_gauge(0.1);
    const SamplingPtr s = rotation_sampling(a, gauge, ClassicalState::make(0.0, 0.0, 1.0), 8, 2, std::numbers::pi);
    std::vector<std::pair<int, FiberVector>> reps;
    for (int i = 0; i < s->size(); ++i) {
      if (s->gauge_parameters()[i] == 0.0) reps.emplace_back(i, FiberVector::basis(d, i % 3));
    }
    const Section psi = invariant_section_build(reps, s);
    CHECK(invariance_residual(psi) <= 1e-8);
    const double q = std::numbers::pi / 4;
    for (int m1 : {2, 4, -3}) {
      for (int m2 : {4, 3}) {
        const Section lhs = gauge_section_transform(angle(q * m1), gauge_section_transform(angle(q * m2), psi));
        CHECK(section_norm(lhs - gauge_section_transform(angle(q * (m1 + m2)), psi)) <= 1e-6);
      }
    }
  }

  TEST_CASE("gauge shifts include the grid and stored parameter differences") {
    const Gauge gauge = action_shift_gauge({0.0, 0.25});
    const std::vector<double> shifts = gauge_shifts(*plane_with_copies(gauge));
    for (double v : {0.0, 0.25, 0.5, 1.0, -1.0}) {
      CHECK(std::any_of(shifts.begin(), shifts.end(), [v](double s) { return std::abs(s - v) < 1e-12; }));
    }
  }
}
