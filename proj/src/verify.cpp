#include "scb/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "scb/errors.hpp"

namespace scb {

FiberVector random_fiber_vector(ProbeRng& rng, const FiberDims& dims, int modes) {
  FiberVector f = FiberVector::zero(dims);
  const int count = std::min(modes, dims.size());
  for (int k = 0; k < count; ++k) f.coeffs(k) = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  const double n = f.norm();
  return n > 0.0 ? f * cplx(1.0 / n) : FiberVector::basis(dims, 0);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs one check; library errors become a failing record.
void check(Report& report, const std::string& id, double tolerance, const std::function<double()>& f) {
  try {
    report.add(id, f(), tolerance);
  } catch (const Error& e) {
    report.add_failure(id, tolerance, e.what());
  }
}

// Order-contract record: the refined residual against the largest value the
// contracted order allows (or the floor).
void add_identity(Report& report, const std::string& id, const IdentityResidual& r) {
  const double allowed = std::max(r.floor, r.residual / std::pow(2.0, r.required_order));
  CheckRecord& rec = report.add(id, r.refined_residual, allowed);
  rec.pass = r.pass;
}

void identity_check(Report& report, const std::string& id, const std::function<IdentityResidual()>& f) {
  try {
    add_identity(report, id, f());
  } catch (const Error& e) {
    report.add_failure(id, kNaN, e.what());
  }
}

Report empty_report(const Scenario& s) {
  Report r;
  r.scenario = s.name;
  r.dt = s.dt;
  r.tau = s.fd_tau;
  r.ncut = s.fiber.ncut;
  r.seed = s.seed;
  return r;
}

// Suites draw from independent streams so adding one does not shift another.
ProbeRng suite_rng(const Scenario& s, std::uint64_t salt) { return ProbeRng(s.seed * 0x9E3779B97F4A7C15ULL + salt); }

std::vector<int> box_fraction(const Scenario& s, int divisor) {
  std::vector<int> r;
  for (int e : s.lattice_extent) r.push_back(std::max(1, e / divisor));
  return r;
}

// Probe sections live in the central quarter of the window and test elements
// in the central eighth, so products of two elements acting on a probe stay
// inside it (H3 products pick up a central cross term).
std::vector<int> half_box(const Scenario& s) { return box_fraction(s, 4); }

GroupElement lattice_element(const Scenario& s, const GroupPtr& group, const std::vector<int>& m) {
  RVec t(static_cast<Eigen::Index>(m.size()));
  for (std::size_t k = 0; k < m.size(); ++k) t(static_cast<Eigen::Index>(k)) = s.lattice_spacing[k] * m[k];
  return group->compose_second_kind(t);
}

GroupElement random_lattice_element(const Scenario& s, const GroupPtr& group, ProbeRng& rng) {
  std::vector<int> m;
  for (int r : box_fraction(s, 8)) m.push_back(rng.integer(-r, r));
  return lattice_element(s, group, m);
}

// Random values on the samples within the central quarter box.
Section random_section(const Scenario& s, const SamplingPtr& sampling, ProbeRng& rng) {
  Section psi = Section::zero(sampling);
  const std::vector<int> r = half_box(s);
  for (int i = 0; i < sampling->size(); ++i) {
    const RVec& c = sampling->coords()[i];
    bool inside = true;
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      inside = inside && std::abs(std::lround(c(k) / s.lattice_spacing[k])) <= r[k];
    }
    if (inside && rng.uniform() < 0.5) psi.values[i] = random_fiber_vector(rng, s.fiber);
  }
  psi.values[sampling->identity_index()] = random_fiber_vector(rng, s.fiber);
  return psi;
}

BaseFunction test_function() {
  return {[](const ClassicalState& x) {
            return cplx(std::sin(x.Q(0)) + 0.5 * x.P(0) * x.P(0), 0.3 * std::cos(x.P(0) - x.Q(0)) + 0.1 * x.S);
          },
          true};
}

// Independent of S, hence invariant under gauges that only move S.
BaseFunction invariant_function() {
  return {[](const ClassicalState& x) { return cplx(x.P(0) * x.P(0) + 0.5 * x.Q(0), std::sin(x.Q(0))); }, true};
}

SmoothSection smooth_probe(const Scenario& s, const SamplingPtr& sampling, ProbeRng& rng) {
  Section phi = Section::zero(sampling);
  phi.values[sampling->identity_index()] = random_fiber_vector(rng, s.fiber);
  SmoothSection psi = SmoothSection::smooth(SmoothingKernel::bump(s.kernel_radii), phi);
  const double n = section_norm(psi.evaluate());
  return n > 0.0 ? psi * cplx(1.0 / n) : psi;
}

void dynamics_suite(const Scenario& s, Report& report) {
  const HamiltonianSpec h = make_hamiltonian(s);
  const std::shared_ptr<const GroupAction> action = make_action(s);
  ProbeRng rng = suite_rng(s, 1);
  const double period = 2.0 * std::numbers::pi;

  check(report, "hamiltonian-derivatives", s.tolerance("derivatives"), [&] {
    std::vector<ClassicalState> probes{s.anchor};
    for (int i = 0; i < 4; ++i) probes.push_back(ClassicalState::make(0.0, rng.uniform(-1, 1), rng.uniform(-1, 1)));
    return derivative_consistency(h, probes);
  });
  check(report, "energy-drift", s.tolerance("energy"), [&] { return classical_flow(h, s.anchor, period, s.dt).energy_drift; });
  check(report, "propagator-unitarity", s.tolerance("unitarity"), [&] {
    return unitarity_residual(fluctuation_propagator(h, classical_flow(h, s.anchor, period, s.dt), s.fiber));
  });
  if (s.hamiltonian.cubic == 0.0) {
    // Constant fluctuation Hamiltonian: the propagator is a single exponential.
    check(report, "propagator-oracle", s.tolerance("propagator_oracle"), [&] {
      const double t = 1.0;
      const FiberOperator u = fluctuation_propagator(h, classical_flow(h, s.anchor, t, s.dt), s.fiber);
      const CMat hm = fluctuation_hamiltonian(h, s.anchor, s.fiber).matrix;
      return (u.matrix - expm(CMat(-kI * t * hm))).norm();
    });
  }
  double base = 0.0, fiber = 0.0;
  std::string error;
  try {
    const GroupPtr& g = action->group;
    for (double t1 : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      for (double t2 : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto [z1, u2] = action->act(exp(g->basis_element(0), t2), s.anchor);
        const auto [z2, u1] = action->act(exp(g->basis_element(0), t1), z1);
        const auto [w, u12] = action->act(exp(g->basis_element(0), t1 + t2), s.anchor);
        base = std::max(base, distance(z2, w));
        fiber = std::max(fiber, (u1.matrix * u2.matrix - u12.matrix).norm());
      }
    }
  } catch (const Error& e) {
    error = e.what();
  }
  if (error.empty()) {
    report.add("evolution-group-law-base", base, s.tolerance("group_law_base"));
    report.add("evolution-group-law-fiber", fiber, s.tolerance("group_law_fiber"));
  } else {
    report.add_failure("evolution-group-law-base", s.tolerance("group_law_base"), error);
    report.add_failure("evolution-group-law-fiber", s.tolerance("group_law_fiber"), error);
  }
}

void section_suite(const Scenario& s, Report& report, const SamplingPtr& sampling) {
  const GroupAction& action = sampling->action();
  const GroupPtr& group = action.group;
  ProbeRng rng = suite_rng(s, 2);
  std::vector<Section> probes;
  std::vector<GroupElement> elements;
  for (int p = 0; p < s.probe_count; ++p) {
    probes.push_back(random_section(s, sampling, rng));
    elements.push_back(random_lattice_element(s, group, rng));
  }
  const BaseFunction alpha = test_function();

  check(report, "section-isometry", s.tolerance("isometry"), [&] {
    double worst = 0.0;
    for (const auto& psi : probes) {
      for (const auto& g : elements) worst = std::max(worst, std::abs(section_norm(section_transform(g, psi)) - section_norm(psi)));
    }
    return worst;
  });
  check(report, "section-group-law", s.tolerance("section_group_law"), [&] {
    double worst = 0.0;
    for (const auto& psi : probes) {
      for (const auto& g1 : elements) {
        for (const auto& g2 : elements) {
          const Section lhs = section_transform(g1, section_transform(g2, psi));
          worst = std::max(worst, section_norm(lhs - section_transform(g1 * g2, psi)));
        }
      }
    }
    return worst;
  });
  check(report, "section-commutation", s.tolerance("commutation"), [&] {
    double worst = 0.0;
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const GroupElement& g = elements[p];
      const Section lhs = section_transform(g, multiply(alpha, probes[p]));
      const Section rhs = multiply(pullback(action, g, alpha), section_transform(g, probes[p]));
      worst = std::max(worst, section_norm(lhs - rhs));
    }
    return worst;
  });
  check(report, "pairing-invariance", s.tolerance("pairing_invariance"), [&] {
    double worst = 0.0;
    for (std::size_t p = 0; p + 1 < probes.size() || p == 0; ++p) {
      const Section& phi = probes[p];
      const Section& psi = probes[(p + 1) % probes.size()];
      const GroupElement& g = elements[p];
      const auto before = pairing(phi, psi);
      const auto after = pairing(section_transform(g, phi), section_transform(g, psi));
      for (int i = 0; i < sampling->size(); ++i) {
        const int j = sampling->find(action.base(g, sampling->base_points()[i]));
        if (j < 0) continue;
        worst = std::max(worst, std::abs(after[j] - before[i]));
      }
    }
    return worst;
  });
  check(report, "pointwise-reconstruction", s.tolerance("pointwise"), [&] {
    double worst = 0.0;
    for (const auto& g : elements) {
      const FiberVector f = random_fiber_vector(rng, s.fiber);
      const FiberVector viaSection = reconstruct_pointwise_operator(g, s.anchor, f, sampling);
      worst = std::max(worst, (viaSection - action.fiber(g, s.anchor).apply(f)).norm());
    }
    return worst;
  });
  check(report, "strong-continuity", 1e-12, [&] {
    // |U_{g(tau)} psi - psi| must shrink as tau runs down the lattice.
    Section seed = Section::zero(sampling);
    seed.values[sampling->identity_index()] = probes.front().values[sampling->identity_index()];
    const Section psi = garding_smooth(SmoothingKernel::bump(s.kernel_radii), seed);
    std::vector<double> d;
    for (int m : {4, 2, 1}) {
      std::vector<int> idx(group->dim(), 0);
      idx[0] = m;
      d.push_back(section_norm(section_transform(lattice_element(s, group, idx), psi) - psi));
    }
    double increase = 0.0;
    for (std::size_t k = 0; k + 1 < d.size(); ++k) increase = std::max(increase, d[k + 1] - d[k]);
    return increase;
  });
}

void generator_suite(const Scenario& s, Report& report, const SamplingPtr& sampling) {
  const GroupPtr& group = sampling->action().group;
  ProbeRng rng = suite_rng(s, 3);
  SmoothSection psi = smooth_probe(s, sampling, rng);
  const int dim = group->dim();
  // fd_tau counts lattice steps: directions are scaled by their spacing.
  const AlgebraElement a = group->basis_element(0) * s.lattice_spacing[0];
  const AlgebraElement b = group->basis_element(dim > 1 ? 1 : 0) * s.lattice_spacing[dim > 1 ? 1 : 0];
  std::vector<int> hidx(dim, 0);
  hidx[0] = 1;
  if (dim > 1) hidx[1] = -1;
  const IdentityInputs in{a, b, test_function(), lattice_element(s, group, hidx)};

  try {
    const IdentityReport suite = identity_suite(in, psi, s.fd_tau);
    for (const auto& r : suite.residuals) {
      add_identity(report, "identity-" + r.name, r);
      if (r.name == "commutator") report.add("commutator-structure", r.residual, s.tolerance("commutator"));
    }
  } catch (const Error& e) {
    report.add_failure("identity-suite", kNaN, e.what());
  }

  const GeneratorFamily family = GeneratorFamily::from_action(sampling->action_ptr(), s.dt);
  const int k = dim > 1 ? 1 : 0;
  try {
    const IdentityResidual r = conjugation_check(family, k, 0.3, a, psi, s.fd_tau);
    add_identity(report, "conjugation-flow-order", r);
    report.add("conjugation-flow", r.residual, s.tolerance("conjugation"));
  } catch (const Error& e) {
    report.add_failure("conjugation-flow", s.tolerance("conjugation"), e.what());
  }

  const SmoothSection phi = smooth_probe(s, sampling, rng);
  identity_check(report, "axiom-a2", [&] { return axiom_a2_check(a, phi, psi, s.fd_tau); });
  try {
    const IdentityResidual r = axiom_a5_check(a, b, psi, phi, s.fd_tau);
    add_identity(report, "axiom-a5", r);
    report.add("axiom-a5-limit", r.residual, s.tolerance("axiom"));
  } catch (const Error& e) {
    report.add_failure("axiom-a5-limit", s.tolerance("axiom"), e.what());
  }
}

void integrator_suite(const Scenario& s, Report& report, const SamplingPtr& sampling) {
  const GroupAction& action = sampling->action();
  const GroupPtr& group = action.group;
  const GeneratorFamily family = GeneratorFamily::from_action(sampling->action_ptr(), s.dt);
  ProbeRng rng = suite_rng(s, 4);
  std::vector<Section> probes;
  std::vector<GroupElement> elements;
  for (int p = 0; p < s.probe_count; ++p) {
    probes.push_back(random_section(s, sampling, rng));
    elements.push_back(random_lattice_element(s, group, rng));
  }
  const int dim = group->dim();

  check(report, "exponentiate-norm-transport", s.tolerance("norm_transport"), [&] {
    double worst = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double t = 2.0 * s.lattice_spacing[k];
      const GroupElement back = exp(group->basis_element(k), -t);
      for (const auto& psi : probes) {
        const Section out = exponentiate_generator(family, k, t, psi);
        for (int j = 0; j < sampling->size(); ++j) {
          const int i = sampling->find(action.base(back, sampling->base_points()[j]));
          if (i < 0) continue;
          worst = std::max(worst, std::abs(out.values[j].norm() - psi.values[i].norm()));
        }
      }
    }
    return worst;
  });
  check(report, "exponentiate-semigroup", s.tolerance("semigroup"), [&] {
    double worst = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double t1 = s.lattice_spacing[k], t2 = 2.0 * s.lattice_spacing[k];
      for (const auto& psi : probes) {
        const Section two = exponentiate_generator(family, k, t1, exponentiate_generator(family, k, t2, psi));
        worst = std::max(worst, section_norm(two - exponentiate_generator(family, k, t1 + t2, psi)));
      }
    }
    return worst;
  });
  check(report, "exponentiate-uniqueness", s.tolerance("uniqueness"), [&] {
    return section_norm(exponentiate_generator(family, 0, s.lattice_spacing[0], Section::zero(sampling)));
  });
  check(report, "reconstruction-vs-action", s.tolerance("reconstruction"), [&] {
    double worst = 0.0;
    for (const auto& psi : probes) {
      for (const auto& g : elements) {
        worst = std::max(worst, section_norm(reconstruct_group_operator(family, g, psi) - section_transform(g, psi)));
      }
    }
    return worst;
  });
  check(report, "reconstruction-isometry", s.tolerance("reconstruction_isometry"), [&] {
    double worst = 0.0;
    for (const auto& psi : probes) {
      for (const auto& g : elements) {
        worst = std::max(worst, std::abs(section_norm(reconstruct_group_operator(family, g, psi)) - section_norm(psi)));
      }
    }
    return worst;
  });
  check(report, "reconstruction-group-law", s.tolerance("reconstruction"), [&] {
    double worst = 0.0;
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const GroupElement& g1 = elements[p];
      const GroupElement& g2 = elements[(p + 1) % elements.size()];
      worst = std::max(worst, group_law_verify(family, g1, g2, probes[p]));
    }
    return worst;
  });
  check(report, "generator-closure", s.tolerance("closure"), [&] {
    RVec c(dim);
    for (int k = 0; k < dim; ++k) c(k) = rng.uniform(0.5, 1.0);
    return generator_closure(family, group->algebra(c), s.anchor, s.fd_tau);
  });
  check(report, "word-inverse-pair", s.tolerance("inverse_word"), [&] {
    const double t = 4.0 * s.lattice_spacing[0];
    const std::vector<WordLetter> word{{0, [t](double al) { return t * al; }}, {0, [t](double al) { return -t * al; }}};
    return word_identity_check(family, word, {probes.front()});
  });
  if (group->id() == "H3") {
    check(report, "word-commutator", s.tolerance("word"), [&] {
      // exp(Xa) exp(Pb) exp(-Xa) exp(-Pb) = exp(Z ab) in H3.
      const double a = 4.0 * s.lattice_spacing[0], b = 4.0 * s.lattice_spacing[1];
      const std::vector<WordLetter> word{{0, [a](double al) { return a * al; }},
                                         {1, [b](double al) { return b * al; }},
                                         {0, [a](double al) { return -a * al; }},
                                         {1, [b](double al) { return -b * al; }},
                                         {2, [a, b](double al) { return -a * b * al * al; }}};
      Section probe = Section::zero(sampling);
      probe.values[sampling->identity_index()] = random_fiber_vector(rng, s.fiber);
      return word_identity_check(family, word, {probe});
    });
  }
}

void gauge_suite(const Scenario& s, Report& report) {
  const std::shared_ptr<const GroupAction> action = make_action(s);
  const GroupPtr& group = action->group;
  const Gauge gauge = make_gauge(s);
  const bool projective = s.action_id == "metaplectic-so2";
  const GaugeCompensator compensator = projective ? metaplectic_compensator() : trivial_compensator();
  ProbeRng rng = suite_rng(s, 5);
  const FiberVector f = random_fiber_vector(rng, s.fiber);

  std::vector<GroupElement> elements;
  if (group->id() == "SO2") {
    const double q = s.lattice_spacing[0];
    const int n = static_cast<int>(std::lround(2.0 * std::numbers::pi / q));
    for (int m : {n / 4, 3 * n / 8, n / 2, -3 * n / 8, 1}) elements.push_back(exp(group->basis_element(0), q * m));
  } else {
    for (int p = 0; p < std::max(3, s.probe_count); ++p) elements.push_back(random_lattice_element(s, group, rng));
  }

  if (s.strict_group_law || projective) {
    try {
      const GroupElement half = group->id() == "SO2" ? exp(group->basis_element(0), std::numbers::pi) : elements.front();
      const StrictLaw law = strict_group_law(*action, half, half, s.anchor, f);
      if (s.strict_group_law) report.add("strict-group-law-fiber", law.fiber, s.tolerance("group_law_fiber"));
      if (projective) report.add("anomaly-magnitude", std::abs(law.fiber - 2.0), s.tolerance("anomaly"));
    } catch (const Error& e) {
      report.add_failure("strict-group-law-fiber", s.tolerance("group_law_fiber"), e.what());
    }
  }

  // Worst case per relation over the element grid.
  std::map<std::string, GaugeRelation> worst;
  std::string error;
  try {
    for (const auto& g : elements) {
      for (const auto& g2 : elements) {
        for (double alpha : {0.7, -1.3}) {
          const RelationInputs in{g, g, g2, alpha, s.anchor, f};
          for (const auto& r : compensator_relations_check(*action, gauge, &compensator, in, s.tolerance("gauge_relation"))) {
            auto it = worst.find(r.relation);
            if (it == worst.end() || r.residual > it->second.residual) worst[r.relation] = r;
          }
        }
      }
    }
  } catch (const Error& e) {
    error = e.what();
  }
  for (const char* id : {"gauge-conjugation-base", "gauge-composition-base", "gauge-conjugation-fiber",
                         "gauge-composition-fiber"}) {
    if (!error.empty() || !worst.count(id)) {
      report.add_failure(id, s.tolerance("gauge_relation"), error.empty() ? "no relation computed" : error);
      continue;
    }
    report.add(id, worst[id].residual, s.tolerance("gauge_relation")).parameters = worst[id].compensator;
  }

  check(report, "gauge-equivalence-relation", s.tolerance("gauge_equivalence"), [&] {
    // Reflexive, symmetric and transitive on a triple drawn from one orbit.
    const double a = 0.4, b = -0.9;
    const ClassicalState x2 = gauge.lambda(a, s.anchor), x3 = gauge.lambda(b, s.anchor);
    const FiberVector f2 = gauge.V(a, s.anchor, s.fiber).apply(f), f3 = gauge.V(b, s.anchor, s.fiber).apply(f);
    double r = gauge_equivalent(gauge, s.anchor, f, s.anchor, f).residual;
    r = std::max(r, gauge_equivalent(gauge, s.anchor, f, x2, f2).residual);
    r = std::max(r, gauge_equivalent(gauge, x2, f2, s.anchor, f).residual);
    r = std::max(r, gauge_equivalent(gauge, x2, f2, x3, f3).residual);
    r = std::max(r, gauge_equivalent(gauge, s.anchor, f, x3, f3).residual);
    return r;
  });
  check(report, "gauge-equivariance", s.tolerance("gauge_relation"), [&] {
    const double a = 0.4;
    const ClassicalState x2 = gauge.lambda(a, s.anchor);
    const FiberVector f2 = gauge.V(a, s.anchor, s.fiber).apply(f);
    double r = 0.0;
    for (const auto& g : elements) {
      const auto [y1, u1] = action->act(g, s.anchor);
      const auto [y2, u2] = action->act(g, x2);
      r = std::max(r, gauge_equivalent(gauge, y1, u1.apply(f), y2, u2.apply(f2)).residual);
    }
    return r;
  });

  // A gauge that fixes every base point while moving the fiber (U(1) phase)
  // admits only the zero invariant section; nothing to transform there.
  if (s.gauge_id == "u1-phase" || s.gauge_id == "trivial") return;

  SamplingPtr sampling;
  Section psi;
  try {
    const bool rotation = group->id() == "SO2";
    if (rotation) {
      sampling = make_sampling(s, action);
    } else {
      const int dim = group->dim();
      RVec spacing(dim);
      std::vector<int> lo(dim), hi(dim);
      for (int k = 0; k < dim; ++k) {
        spacing(k) = s.lattice_spacing[k];
        lo[k] = -s.lattice_extent[k];
        hi[k] = s.lattice_extent[k];
      }
      SamplingOptions options;
      options.gauge_copies = {-0.5, 0.5};
      sampling = OrbitSampling::lattice_box(action, s.anchor, spacing, lo, hi, &gauge, options);
    }
    // Representatives on plain orbit points (the central quarter box off the
    // circle); gauge copies are filled in by the extension.
    const std::vector<int> r = half_box(s);
    std::vector<std::pair<int, FiberVector>> reps;
    for (int i = 0; i < sampling->size(); ++i) {
      if (sampling->gauge_parameters()[i] != 0.0) continue;
      bool inside = true;
      const RVec& c = sampling->coords()[i];
      for (Eigen::Index k = 0; !rotation && k < c.size(); ++k) {
        inside = inside && std::abs(std::lround(c(k) / s.lattice_spacing[k])) <= r[k];
      }
      if (!inside || (i != sampling->identity_index() && rng.uniform() < 0.5)) continue;
      reps.emplace_back(i, random_fiber_vector(rng, s.fiber) * cplx(rng.uniform(0.2, 1.0)));
    }
    psi = invariant_section_build(reps, sampling);
    report.add("gauge-invariant-build", invariance_residual(psi), s.tolerance("invariance"));
  } catch (const Error& e) {
    report.add_failure("gauge-invariant-build", s.tolerance("invariance"), e.what());
    return;
  }

  check(report, "gauge-transform-invariance", s.tolerance("invariance"), [&] {
    double r = 0.0;
    for (const auto& g : elements) r = std::max(r, invariance_residual(gauge_section_transform(g, psi)));
    return r;
  });
  check(report, "gauge-transform-isometry", s.tolerance("reconstruction_isometry"), [&] {
    double r = 0.0;
    for (const auto& g : elements) r = std::max(r, std::abs(section_norm(gauge_section_transform(g, psi)) - section_norm(psi)));
    return r;
  });
  check(report, "gauge-transform-group-law", s.tolerance("gauge_group_law"), [&] {
    double r = 0.0;
    for (const auto& g1 : elements) {
      for (const auto& g2 : elements) {
        const Section lhs = gauge_section_transform(g1, gauge_section_transform(g2, psi));
        r = std::max(r, section_norm(lhs - gauge_section_transform(g1 * g2, psi)));
      }
    }
    return r;
  });
  check(report, "gauge-transform-commutation", s.tolerance("commutation"), [&] {
    const BaseFunction alpha = invariant_function();
    double r = 0.0;
    for (const auto& g : elements) {
      const Section lhs = gauge_section_transform(g, multiply(alpha, psi));
      const Section rhs = multiply(pullback(*action, g, alpha), gauge_section_transform(g, psi));
      r = std::max(r, section_norm(lhs - rhs));
    }
    return r;
  });

  if (group->id() == "SO2") {
    // The raw rotation returns to the same base point after a full turn with
    // fiber phase -1; the periodic one is an honest action.
    const int n = static_cast<int>(std::lround(2.0 * std::numbers::pi / s.lattice_spacing[0]));
    const std::vector<WordLetter> turn{{0, [](double al) { return 2.0 * std::numbers::pi * al; }}};
    const std::vector<double> ends{0.0, 1.0};
    check(report, "word-full-period-anomaly", s.tolerance("anomaly"), [&] {
      auto raw = std::make_shared<const GroupAction>(oscillator_rotation_action(RotationVariant::Raw, s.eps, s.fiber, s.dt));
      SamplingPtr rs = rotation_sampling(raw, trivial_gauge(), s.anchor, n, 0, 1.0);
      Section probe = Section::zero(rs);
      probe.values[rs->identity_index()] = f;
      return std::abs(word_identity_check(GeneratorFamily::from_action(raw, s.dt), turn, {probe}, ends) - 2.0);
    });
    check(report, "word-full-period-periodic", s.tolerance("word"), [&] {
      auto per = std::make_shared<const GroupAction>(
          oscillator_rotation_action(RotationVariant::Periodic, s.eps, s.fiber, s.dt));
      SamplingPtr ps = rotation_sampling(per, trivial_gauge(), s.anchor, n, 0, 1.0);
      Section probe = Section::zero(ps);
      probe.values[ps->identity_index()] = f;
      return word_identity_check(GeneratorFamily::from_action(per, s.dt), turn, {probe}, ends);
    });
  }
}

void convergence_suite(const Scenario& s, Report& report) {
  if (s.convergence_eps.empty()) return;
  Scenario quadratic = s;
  quadratic.hamiltonian.cubic = 0.0;
  check(report, "ansatz-quadratic-control", s.tolerance("ansatz_quadratic"), [&] {
    double worst = 0.0;
    for (const auto& row : run_convergence(quadratic, s.convergence_eps).rows) worst = std::max(worst, row.error);
    return worst;
  });
  if (s.hamiltonian.cubic != 0.0) {
    try {
      const ConvergenceTable t = run_convergence(s, s.convergence_eps);
      // Largest ratio between consecutive errors; strict decrease means < 1.
      double ratio = 0.0;
      for (std::size_t k = 0; k + 1 < t.rows.size(); ++k) ratio = std::max(ratio, t.rows[k + 1].error / t.rows[k].error);
      CheckRecord& r = report.add("ansatz-convergence", ratio, 1.0);
      r.pass = t.strictly_decreasing && t.rows.size() >= 2;
    } catch (const Error& e) {
      report.add_failure("ansatz-convergence", 1.0, e.what());
    }
  }
}

}  // namespace

Report run_verify(const Scenario& s) {
  validate(s);
  Report report = empty_report(s);
  if (s.action_id == "time-evolution") dynamics_suite(s, report);
  if (s.group_id != "SO2") {
    SamplingPtr sampling;
    try {
      sampling = make_sampling(s, make_action(s));
    } catch (const Error& e) {
      report.add_failure("orbit-sampling", kNaN, e.what());
    }
    if (sampling) {
      section_suite(s, report, sampling);
      generator_suite(s, report, sampling);
      integrator_suite(s, report, sampling);
    }
  }
  if (!s.gauge_id.empty()) gauge_suite(s, report);
  convergence_suite(s, report);
  return report;
}

Report run_gauge(const Scenario& s) {
  validate(s);
  Report report = empty_report(s);
  gauge_suite(s, report);
  return report;
}

ConvergenceTable run_convergence(const Scenario& s, const std::vector<double>& eps) {
  if (s.action_id != "time-evolution") throw ConfigError("convergence needs a time-evolution scenario");
  ConvergenceTable table;
  table.scenario = s.name;
  const HamiltonianSpec h = make_hamiltonian(s);
  AnsatzErrorOptions options;
  options.dt = s.dt;
  options.ncut = s.reference_ncut;
  options.reference_dt = s.reference_dt;
  const FiberVector f0 = FiberVector::basis(s.fiber, 0);
  for (double e : eps) {
    if (!(e > 0.0)) throw InputError("eps values must be positive");
    try {
      table.rows.push_back({e, ansatz_error(h, s.anchor, f0, e, s.convergence_time, options)});
    } catch (const ResolutionError& err) {
      throw ResolutionError("eps = " + format_float(e) + ": " + err.what());
    }
  }
  for (std::size_t k = 0; k + 1 < table.rows.size(); ++k) {
    if (!(table.rows[k + 1].error < table.rows[k].error)) table.strictly_decreasing = false;
  }
  return table;
}

PropagateOutput run_propagate(const Scenario& s, double t) {
  if (s.action_id != "time-evolution") throw ConfigError("propagate needs a time-evolution scenario");
  if (!std::isfinite(t)) throw InputError("propagate: t must be finite");
  const HamiltonianSpec h = make_hamiltonian(s);
  const Trajectory tr = classical_flow(h, s.anchor, t, s.dt);
  PropagateOutput out;
  out.trajectory_csv = "t,S,P_1,Q_1\n";
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const ClassicalState& x = tr.states[i];
    out.trajectory_csv += format_float(tr.t[i]) + "," + format_float(x.S) + "," + format_float(x.P(0)) + "," +
                          format_float(x.Q(0)) + "\n";
  }
  const FiberVector f = fluctuation_propagator(h, tr, s.fiber).apply(FiberVector::basis(s.fiber, 0));
  const Grid1D grid = grid_for_trajectory(tr, f, s.eps);
  const CVec psi = ansatz_wavefunction(tr.states.back(), f, s.eps, grid);
  out.wavefunction_csv = "x,re,im\n";
  for (int i = 0; i < grid.size; ++i) {
    out.wavefunction_csv += format_float(grid.x(i)) + "," + format_float(psi(i).real()) + "," +
                            format_float(psi(i).imag()) + "\n";
  }
  return out;
}

}  // namespace scb
