#include "doctest.h"

#include <cmath>
#include <random>

#include "scb/errors.hpp"
#include "scb/generators.hpp"
#include "scb/sections.hpp"

using namespace scb;

namespace {

struct Fixture {
  std::shared_ptr<const GroupAction> action;
  SamplingPtr sampling;
};

Fixture plane(int extent = 6) {
  Fixture f;
  f.action = std::make_shared<const GroupAction>(phase_space_translation_action({1, 8}));
  RVec h(2);
  h << 0.1, 0.1;
  f.sampling = OrbitSampling::lattice_box(f.action, ClassicalState::make(0.0, 0.2, -0.3), h, {-extent, -extent},
                                          {extent, extent});
  return f;
}

Fixture heisenberg() {
  Fixture f;
  f.action = std::make_shared<const GroupAction>(heisenberg_weyl_action({1, 8}));
  RVec h(3);
  h << 0.1, 0.1, 0.01;
  f.sampling = OrbitSampling::lattice_box(f.action, ClassicalState::make(0.0, 0.0, 1.0), h, {-4, -4, -12},
                                          {4, 4, 12});
  return f;
}

GroupElement lattice(const SamplingPtr& s, std::initializer_list<int> m) {
  RVec t(static_cast<Eigen::Index>(m.size()));
  Eigen::Index k = 0;
  for (int v : m) {
    t(k) = v * s->spacing()(k);
    ++k;
  }
  return s->action().group->compose_second_kind(t);
}

// Values at the samples whose lattice coordinates are within `r` of zero.
Section random_core(const SamplingPtr& s, int r, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Section psi = Section::zero(s);
  for (int i = 0; i < s->size(); ++i) {
    bool inside = true;
    for (Eigen::Index k = 0; k < s->coords()[i].size(); ++k) {
      inside = inside && std::abs(std::lround(s->coords()[i](k) / s->spacing()(k))) <= r;
    }
    if (!inside) continue;
    for (int k = 0; k < 3; ++k) psi.values[i].coeffs(k) = cplx(u(gen), u(gen));
  }
  return psi;
}

}  // namespace

TEST_SUITE("section_calculus") {
  TEST_CASE("stored base points are recomputable") {
    CHECK(plane().sampling->recompute_residual() <= 1e-12);
    CHECK(heisenberg().sampling->recompute_residual() <= 1e-12);
    CHECK(plane().sampling->size() == 13 * 13);
  }

  TEST_CASE("off-lattice elements are refused") {
    const Fixture f = plane();
    const Section psi = random_core(f.sampling, 1, 1);
    RVec t(2);
    t << 0.05, 0.0;
    CHECK_THROWS_AS(section_transform(f.action->group->compose_second_kind(t), psi), AlignmentError);
  }

  TEST_CASE("values pushed out of the window are an error") {
    const Fixture f = plane(3);
    const Section psi = random_core(f.sampling, 3, 2);
    CHECK_THROWS_AS(section_transform(lattice(f.sampling, {2, 0}), psi), SupportError);
  }

  TEST_CASE("transform is an isometry and a representation") {
    for (const Fixture& f : {plane(), heisenberg()}) {
      const bool h3 = f.action->group->dim() == 3;
      const Section psi = random_core(f.sampling, 1, 3);
      const GroupElement g1 = h3 ? lattice(f.sampling, {1, -1, 2}) : lattice(f.sampling, {1, -2});
      const GroupElement g2 = h3 ? lattice(f.sampling, {-1, 1, 1}) : lattice(f.sampling, {2, 1});
      CHECK(std::abs(section_norm(section_transform(g1, psi)) - section_norm(psi)) <= 1e-10);
      const Section lhs = section_transform(g1, section_transform(g2, psi));
      CHECK(section_norm(lhs - section_transform(g1 * g2, psi)) <= 1e-8);
      CHECK(section_norm(section_transform(f.action->group->identity(), psi) - psi) <= 1e-13);
    }
  }

  TEST_CASE("multiplication operators intertwine with pullbacks") {
    const Fixture f = heisenberg();
    const BaseFunction alpha{[](const ClassicalState& x) { return cplx(std::cos(x.Q(0)), x.P(0) + 0.2 * x.S); }, true};
    const Section psi = random_core(f.sampling, 1, 4);
    const GroupElement g = lattice(f.sampling, {1, 1, -3});
    const Section lhs = section_transform(g, multiply(alpha, psi));
    const Section rhs = multiply(pullback(*f.action, g, alpha), section_transform(g, psi));
    CHECK(section_norm(lhs - rhs) <= 1e-10);
  }

  TEST_CASE("pairings move with the base point") {
    const Fixture f = heisenberg();
    const Section phi = random_core(f.sampling, 1, 5), psi = random_core(f.sampling, 1, 6);
    const GroupElement g = lattice(f.sampling, {-1, 2, 1});
    const auto before = pairing(phi, psi);
    const auto after = pairing(section_transform(g, phi), section_transform(g, psi));
    double worst = 0.0;
    for (int i = 0; i < f.sampling->size(); ++i) {
      const int j = f.sampling->find(f.action->base(g, f.sampling->base_points()[i]));
      if (j >= 0) worst = std::max(worst, std::abs(after[j] - before[i]));
    }
    CHECK(worst <= 1e-10);
    CHECK_THROWS_AS(pairing(phi, Section::zero(plane().sampling)), InputError);
  }

  TEST_CASE("pointwise operator is recovered from a single-point section") {
    const Fixture f = heisenberg();
    const GroupElement g = lattice(f.sampling, {2, -1, 3});
    const FiberVector v = FiberVector::basis(f.action->dims, 2);
    const ClassicalState& x = f.sampling->anchor();
    const FiberVector got = reconstruct_pointwise_operator(g, x, v, f.sampling);
    CHECK((got - f.action->fiber(g, x).apply(v)).norm() <= 1e-10);
  }

  TEST_CASE("sparse round trip") {
    const Fixture f = plane();
    const Section psi = random_core(f.sampling, 1, 7);
    CHECK(sparse(psi).size() == 9u);
    CHECK(section_norm(densify(f.sampling, sparse(psi)) - psi) == 0.0);
  }

  TEST_CASE("translates of a smooth section approach it monotonically") {
    const Fixture f = plane(10);
    Section seed = Section::zero(f.sampling);
    seed.values[f.sampling->identity_index()] = FiberVector::basis(f.action->dims, 0);
    const Section psi = garding_smooth(SmoothingKernel::bump({0.4, 0.4}), seed);
    double last = 1e300;
    for (int m : {4, 2, 1}) {
      const double d = section_norm(section_transform(lattice(f.sampling, {m, 0}), psi) - psi);
      CHECK(d < last);
      last = d;
    }
  }
}
