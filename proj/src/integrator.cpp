#include "scb/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scb/errors.hpp"

namespace scb {

GeneratorFamily GeneratorFamily::from_action(std::shared_ptr<const GroupAction> action, double dt) {
  if (!action) throw InputError("GeneratorFamily: null action");
  if (!(dt > 0.0)) throw InputError("GeneratorFamily: dt must be positive");
  if (!action->base_field || !action->fiber_hamiltonian) {
    throw InputError("GeneratorFamily: action " + action->name + " carries no infinitesimal data");
  }
  GeneratorFamily f;
  f.action = std::move(action);
  f.dt = dt;
  return f;
}

FiberOperator GeneratorFamily::fiber_hamiltonian(int k, const ClassicalState& x) const {
  FiberOperator h = action->fiber_hamiltonian(k, x);
  const double defect = hermiticity_defect(h.matrix);
  if (defect > 1e-10) throw NumericalError("fiber Hamiltonian is not Hermitian (defect " + std::to_string(defect) + ")");
  return h;
}

Transport characteristic(const GeneratorFamily& family, int k, double t, const ClassicalState& x) {
  if (k < 0 || k >= family.dim()) throw InputError("characteristic: basis index out of range");
  const int size = family.dims().size();
  Transport out{x, FiberOperator::identity(family.dims())};
  if (t == 0.0) return out;
  if (!std::isfinite(t)) throw InputError("characteristic: time must be finite");

  const long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(t) / family.dt - 1e-9)));
  const double h = t / static_cast<double>(steps);
  auto field = [&](const RVec& v) { return family.base_field(k, ClassicalState::unpack(v)); };

  RVec y = x.packed();
  CMat op = CMat::Identity(size, size);
  CMat last_h, step;
  long run = 0;
  auto flush = [&] {
    if (run > 0) op = matrix_power(step, run) * op;
    run = 0;
  };

  for (long s = 0; s < steps; ++s) {
    const RVec k1 = field(y);
    const RVec k2 = field(y + 0.5 * h * k1);
    const RVec k3 = field(y + 0.5 * h * k2);
    const RVec k4 = field(y + h * k3);
    const RVec next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) throw NumericalError("characteristic blew up", h * static_cast<double>(s + 1));
    // Cubic Hermite midpoint from the end values and slopes.
    const RVec mid = 0.5 * (y + next) + (h / 8.0) * (k1 - field(next));
    const CMat hm = family.fiber_hamiltonian(k, ClassicalState::unpack(mid)).matrix;
    // Identical Hamiltonians (constant fields) form runs composed by squaring.
    if (run > 0 && hm.rows() == last_h.rows() && hm == last_h) {
      ++run;
    } else {
      flush();
      step = unitary_step(hm, h);
      last_h = hm;
      run = 1;
    }
    y = next;
  }
  flush();

  out.op = FiberOperator{std::move(op), false, true};
  const double defect = unitarity_residual(out.op);
  if (defect > 1e-8) throw NumericalError("characteristic lost unitarity (" + std::to_string(defect) + ")", t);
  out.end = ClassicalState::unpack(y);
  return out;
}

Section exponentiate_generator(const GeneratorFamily& family, int k, double t, const Section& psi0) {
  if (!psi0.sampling) throw InputError("exponentiate_generator: section has no sampling");
  const OrbitSampling& sampling = *psi0.sampling;
  if (k < 0 || k >= family.dim()) throw InputError("exponentiate_generator: basis index out of range");
  if (sampling.action().group != family.action->group) {
    throw InputError("exponentiate_generator: sampling and family use different groups");
  }
  if (t == 0.0) return psi0;
  sampling.require_aligned(exp(family.action->group->basis_element(k), t));

  Section out = Section::zero(psi0.sampling);
  for (const auto& [i, v] : sparse(psi0)) {
    const Transport tr = characteristic(family, k, t, sampling.base_points()[i]);
    const int j = sampling.find(tr.end);
    if (j < 0) throw SupportError("exponentiate_generator: value at sample " + std::to_string(i) + " leaves the window");
    out.values[j] = out.values[j] + tr.op.apply(v);
  }
  return out;
}

Section reconstruct_group_operator(const GeneratorFamily& family, const GroupElement& g, const Section& psi) {
  const RVec t = factorize_second_kind(g);
  Section out = psi;
  for (int k = static_cast<int>(t.size()) - 1; k >= 0; --k) {
    if (t(k) != 0.0) out = exponentiate_generator(family, k, t(k), out);
  }
  return out;
}

Transport reconstruct_pointwise(const GeneratorFamily& family, const GroupElement& g, const ClassicalState& x) {
  const RVec t = factorize_second_kind(g);
  Transport out{x, FiberOperator::identity(family.dims())};
  for (int k = static_cast<int>(t.size()) - 1; k >= 0; --k) {
    if (t(k) == 0.0) continue;
    const Transport step = characteristic(family, k, t(k), out.end);
    out.op = step.op * out.op;
    out.end = step.end;
  }
  return out;
}

double word_identity_check(const GeneratorFamily& family, const std::vector<WordLetter>& word,
                           const std::vector<Section>& probes, const std::vector<double>& alphas) {
  const GroupPtr& group = family.action->group;
  for (const auto& letter : word) {
    if (letter.k < 0 || letter.k >= family.dim()) throw InputError("word_identity_check: basis index out of range");
    if (!letter.t) throw InputError("word_identity_check: letter without a path");
  }
  for (double alpha : alphas) {
    GroupElement m = group->identity();
    for (const auto& letter : word) m = m * exp(group->basis_element(letter.k), letter.t(alpha));
    const double defect = (m.matrix - group->identity().matrix).norm();
    if (defect > 1e-10) {
      throw PreconditionError("word_identity_check: matrix word is not the identity at alpha = " + std::to_string(alpha),
                              defect);
    }
  }
  double worst = 0.0;
  for (double alpha : alphas) {
    for (const Section& psi : probes) {
      Section out = psi;
      for (auto it = word.rbegin(); it != word.rend(); ++it) {
        out = exponentiate_generator(family, it->k, it->t(alpha), out);
      }
      worst = std::max(worst, section_norm(out - psi));
    }
  }
  return worst;
}

namespace {

std::vector<int> core_samples(const Section& psi, std::size_t count) {
  std::vector<std::pair<double, int>> norms;
  double peak = 0.0;
  for (int i = 0; i < psi.size(); ++i) peak = std::max(peak, psi.values[i].norm());
  for (int i = 0; i < psi.size(); ++i) {
    const double n = psi.values[i].norm();
    if (n > 0.0 && n >= 0.5 * peak) norms.emplace_back(-n, i);
  }
  std::sort(norms.begin(), norms.end());
  std::vector<int> out;
  for (std::size_t j = 0; j < norms.size() && j < count; ++j) out.push_back(norms[j].second);
  return out;
}

}  // namespace

IdentityResidual conjugation_check(const GeneratorFamily& family, int k, double t, const AlgebraElement& a,
                                   const SmoothSection& psi, double tau, std::vector<int> probes) {
  const OrbitSampling& sampling = psi.sampling();
  const GroupAction& action = sampling.action();
  const GroupPtr& group = family.action->group;
  if (a.group != group) throw InputError("conjugation_check: algebra element from another group");
  const Section value = psi.evaluate();
  if (probes.empty()) probes = core_samples(value, 4);
  const double scale = std::max(1.0, section_norm(value));

  const AlgebraElement bk = group->basis_element(k);
  const GroupElement forward = exp(bk, t);
  const GroupElement backward = exp(bk, -t);
  const AlgebraElement conjugated = adjoint(backward, a);

  // Pieces independent of tau: X = flow_t Y and U^{-t}(Y <- X).
  struct Probe {
    int i;
    ClassicalState x;
    FiberOperator back;
  };
  std::vector<Probe> prepared;
  for (int i : probes) {
    const ClassicalState& y = sampling.base_points()[i];
    const Transport to_x = characteristic(family, k, t, y);
    prepared.push_back({i, to_x.end, characteristic(family, k, -t, to_x.end).op});
  }

  auto residual_at = [&](double s) {
    const SmoothSection rhs = generator(conjugated, psi, s);
    double worst = 0.0;
    for (const Probe& p : prepared) {
      FiberVector phi = FiberVector::zero(family.dims());
      for (double sign : {1.0, -1.0}) {
        const GroupElement g = exp(a, sign * s);
        const ClassicalState w = action.base(g.inverse(), p.x);
        const FiberOperator ug = action.act(g, w).second;
        const ClassicalState v = characteristic(family, k, -t, w).end;
        const FiberOperator ut = characteristic(family, k, t, v).op;
        const GroupElement kappa = backward * g.inverse() * forward;
        const FiberVector chi = ug.apply(ut.apply(psi.value_at(kappa, p.i)));
        phi = phi + chi * cplx(sign);
      }
      phi = phi * (kI / (2.0 * s));
      const FiberVector lhs = p.back.apply(phi);
      worst = std::max(worst, (lhs - rhs.value(p.i)).norm());
    }
    return worst;
  };
  return refine("conjugation-flow", tau, 1.0, 1e-8 * scale, residual_at);
}

double group_law_verify(const GeneratorFamily& family, const GroupElement& g1, const GroupElement& g2,
                        const Section& psi) {
  const Section lhs = reconstruct_group_operator(family, g1, reconstruct_group_operator(family, g2, psi));
  const Section rhs = reconstruct_group_operator(family, g1 * g2, psi);
  return section_norm(lhs - rhs);
}

double generator_closure(const GeneratorFamily& family, const AlgebraElement& a, const ClassicalState& x,
                         double tau) {
  if (!(tau > 0.0)) throw InputError("generator_closure: tau must be positive");
  const Transport plus = reconstruct_pointwise(family, exp(a, tau), x);
  const Transport minus = reconstruct_pointwise(family, exp(a, -tau), x);
  const CMat fd = (kI / (2.0 * tau)) * (plus.op.matrix - minus.op.matrix);
  const int size = family.dims().size();
  CMat expected = CMat::Zero(size, size);
  for (int k = 0; k < family.dim(); ++k) {
    if (a.coords(k) != 0.0) expected += a.coords(k) * family.fiber_hamiltonian(k, x).matrix;
  }
  // A direction with vanishing fiber part is compared absolutely.
  if (expected.norm() == 0.0) return fd.norm();
  return (fd - expected).norm() / expected.norm();
}

IdentityResidual axiom_a2_check(const AlgebraElement& a, const SmoothSection& phi, const SmoothSection& psi,
                                double tau) {
  const Section phi_v = phi.evaluate();
  const Section psi_v = psi.evaluate();
  const double scale = std::max(1.0, section_norm(phi_v) * section_norm(psi_v));
  return refine("axiom-a2", tau, 1.0, 1e-10 * scale, [&](double s) {
    const auto d = pairing_derivative(a, phi, psi, s);
    const auto left = pairing(phi_v, generator(a, psi, s).evaluate());
    const auto right = pairing(generator(a, phi, s).evaluate(), psi_v);
    std::vector<cplx> lhs(d.size()), rhs(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      lhs[i] = -kI * d[i];
      rhs[i] = left[i] - right[i];
    }
    return max_difference(lhs, rhs);
  });
}

IdentityResidual axiom_a5_check(const AlgebraElement& a, const AlgebraElement& b, const SmoothSection& psi,
                                const SmoothSection& phi, double tau) {
  const double scale = std::max(1.0, section_norm(psi.evaluate()) * section_norm(phi.evaluate()));
  const AlgebraElement ab = bracket(a, b);
  return refine("axiom-a5", tau, 1.0, 1e-8 * scale, [&](double s) {
    const SmoothSection ha_psi = generator(a, psi, s);
    const SmoothSection hb_psi = generator(b, psi, s);
    const SmoothSection ha_phi = generator(a, phi, s);
    const SmoothSection hb_phi = generator(b, phi, s);
    const auto t1 = pairing(ha_psi, hb_phi);
    const auto t2 = pairing_derivative(a, psi, hb_phi, s);
    const auto t3 = pairing(hb_psi, ha_phi);
    const auto t4 = pairing_derivative(b, psi, ha_phi, s);
    const auto target = pairing(psi, generator(ab, phi, s));
    std::vector<cplx> lhs(t1.size()), rhs(t1.size());
    for (std::size_t i = 0; i < t1.size(); ++i) {
      lhs[i] = t1[i] - kI * t2[i] - t3[i] + kI * t4[i];
      rhs[i] = kI * target[i];
    }
    return max_difference(lhs, rhs);
  });
}

}  // namespace scb
