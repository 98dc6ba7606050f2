#include "scb/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scb/errors.hpp"

namespace scb {

double gauge_residual(const Gauge& gauge, double alpha, const ClassicalState& x1, const FiberVector& f1,
                      const ClassicalState& x2, const FiberVector& f2) {
  const ClassicalState y = gauge.lambda(alpha, x1);
  const FiberVector v = gauge.V(alpha, x1, f1.dims).apply(f1);
  return distance(y, x2) + (v - f2).norm();
}

GaugeMatch gauge_equivalent(const Gauge& gauge, const ClassicalState& x1, const FiberVector& f1,
                            const ClassicalState& x2, const FiberVector& f2) {
  auto r = [&](double a) { return gauge_residual(gauge, a, x1, f1, x2, f2); };
  GaugeMatch m;
  std::optional<double> closed;
  if (gauge.solve) closed = gauge.solve(x1, f1, x2, f2);
  if (closed && std::isfinite(*closed)) {
    m.alpha = *closed;
  } else {
    const auto [lo, hi] = gauge.search_range;
    if (hi > lo) {
      // Coarse scan, then golden-section refinement around the best node.
      const int nodes = 256;
      const double h = (hi - lo) / nodes;
      double best = lo, best_r = r(lo);
      for (int i = 1; i <= nodes; ++i) {
        const double a = lo + h * i;
        const double v = r(a);
        if (v < best_r) {
          best = a;
          best_r = v;
        }
      }
      double a = best - h, b = best + h;
      const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
      double c = b - phi * (b - a), d = a + phi * (b - a);
      double rc = r(c), rd = r(d);
      while (b - a > 1e-10) {
        if (rc < rd) {
          b = d;
          d = c;
          rd = rc;
          c = b - phi * (b - a);
          rc = r(c);
        } else {
          a = c;
          c = d;
          rc = rd;
          d = a + phi * (b - a);
          rd = r(d);
        }
      }
      m.alpha = 0.5 * (a + b);
      if (best_r < r(m.alpha)) m.alpha = best;
    }
  }
  m.residual = r(m.alpha);
  m.equivalent = m.residual <= 1e-8;
  return m;
}

StrictLaw strict_group_law(const GroupAction& action, const GroupElement& g1, const GroupElement& g2,
                           const ClassicalState& x, const FiberVector& f) {
  const auto [z1, u2] = action.act(g2, x);
  const auto [z2, u1] = action.act(g1, z1);
  const auto [w, u12] = action.act(g1 * g2, x);
  return {distance(z2, w), (u1.apply(u2.apply(f)) - u12.apply(f)).norm()};
}

std::vector<GaugeRelation> compensator_relations_check(const GroupAction& action, const Gauge& gauge,
                                                       const GaugeCompensator* compensator,
                                                       const RelationInputs& in, double tolerance) {
  const FiberDims& dims = action.dims;
  std::vector<GaugeRelation> out;

  // Conjugated gauge transformation, followed from Y = X.
  const ClassicalState& y = in.x;
  const auto [y1, u_inv] = action.act(in.g.inverse(), y);
  const ClassicalState y2 = gauge.lambda(in.alpha, y1);
  const FiberOperator v_alpha = gauge.V(in.alpha, y1, dims);
  const auto [y3, u_g] = action.act(in.g, y2);
  const FiberVector f3 = u_g.apply(v_alpha.apply(u_inv.apply(in.f)));
  double beta;
  if (compensator) {
    beta = compensator->beta(in.g, in.alpha);
  } else {
    const GaugeMatch m = gauge_equivalent(gauge, y, in.f, y3, f3);
    if (!m.equivalent) throw SearchError("compensator beta not found (residual " + std::to_string(m.residual) + ")");
    beta = m.alpha;
  }
  const double conj_base = distance(y3, gauge.lambda(beta, y));
  const double conj_fiber = (f3 - gauge.V(beta, y, dims).apply(in.f)).norm();

  // Composition defect of the action.
  const auto [z1, u2] = action.act(in.g2, in.x);
  const auto [z2, u1] = action.act(in.g1, z1);
  const auto [w, u12] = action.act(in.g1 * in.g2, in.x);
  const FiberVector lhs = u1.apply(u2.apply(in.f));
  const FiberVector direct = u12.apply(in.f);
  double gamma;
  if (compensator) {
    gamma = compensator->gamma(in.g1, in.g2);
  } else {
    const GaugeMatch m = gauge_equivalent(gauge, w, direct, z2, lhs);
    if (!m.equivalent) throw SearchError("compensator gamma not found (residual " + std::to_string(m.residual) + ")");
    gamma = m.alpha;
  }
  const double comp_base = distance(z2, gauge.lambda(gamma, w));
  const double comp_fiber = (lhs - gauge.V(gamma, w, dims).apply(direct)).norm();

  out.push_back({"gauge-conjugation-base", conj_base, {beta}, conj_base <= tolerance});
  out.push_back({"gauge-composition-base", comp_base, {gamma}, comp_base <= tolerance});
  out.push_back({"gauge-conjugation-fiber", conj_fiber, {beta}, conj_fiber <= tolerance});
  out.push_back({"gauge-composition-fiber", comp_fiber, {gamma}, comp_fiber <= tolerance});
  return out;
}

std::vector<double> gauge_shifts(const OrbitSampling& sampling) {
  if (!sampling.gauge()) return {0.0};
  std::vector<double> params = sampling.gauge_parameters();
  std::sort(params.begin(), params.end());
  params.erase(std::unique(params.begin(), params.end()), params.end());
  std::vector<double> shifts = sampling.gauge()->grid;
  shifts.push_back(0.0);
  for (double a : params) {
    for (double b : params) shifts.push_back(a - b);
  }
  std::sort(shifts.begin(), shifts.end());
  std::vector<double> unique;
  for (double s : shifts) {
    if (unique.empty() || std::abs(s - unique.back()) > 1e-12) unique.push_back(s);
  }
  return unique;
}

Section invariant_section_build(const std::vector<std::pair<int, FiberVector>>& representatives,
                                SamplingPtr sampling) {
  if (!sampling) throw InputError("invariant_section_build: no sampling");
  const OrbitSampling& s = *sampling;
  Section out = Section::zero(sampling);
  std::vector<bool> assigned(s.size(), false);
  const std::vector<double> shifts = gauge_shifts(s);
  for (const auto& [r, v] : representatives) {
    if (r < 0 || r >= s.size()) throw InputError("invariant_section_build: representative index out of range");
    const ClassicalState& yr = s.base_points()[r];
    for (double a : shifts) {
      int j = r;
      FiberVector value = v;
      if (a != 0.0) {
        const Gauge& gauge = *s.gauge();
        j = s.find(gauge.lambda(a, yr));
        if (j < 0) continue;
        value = gauge.V(a, yr, s.dims()).apply(v);
      }
      if (assigned[j]) {
        const double gap = (out.values[j] - value).norm();
        if (gap > 1e-10) {
          throw ConsistencyError("gauge orbit data disagree at sample " + std::to_string(j) + " (gap " +
                                 std::to_string(gap) + ")");
        }
        continue;
      }
      out.values[j] = value;
      assigned[j] = true;
    }
  }
  return out;
}

double invariance_residual(const Section& psi) {
  const OrbitSampling& s = *psi.sampling;
  if (!s.gauge()) return 0.0;
  const Gauge& gauge = *s.gauge();
  const std::vector<double> shifts = gauge_shifts(s);
  double worst = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    const ClassicalState& y = s.base_points()[i];
    for (double a : shifts) {
      if (a == 0.0) continue;
      const int j = s.find(gauge.lambda(a, y));
      if (j < 0) continue;
      const FiberVector moved = gauge.V(a, y, s.dims()).apply(psi.values[i]);
      worst = std::max(worst, (psi.values[j] - moved).norm());
    }
  }
  return worst;
}

Section gauge_section_transform(const GroupElement& g, const Section& psi) {
  if (!psi.sampling) throw InputError("gauge_section_transform: section has no sampling");
  const OrbitSampling& s = *psi.sampling;
  const double defect = invariance_residual(psi);
  if (defect > 1e-8) throw PreconditionError("gauge_section_transform: input is not gauge invariant", defect);
  s.require_aligned(g);
  const GroupAction& action = s.action();
  const std::vector<double> shifts = gauge_shifts(s);
  const Gauge* gauge = s.gauge();

  Section out = Section::zero(psi.sampling);
  std::vector<bool> assigned(s.size(), false);
  for (const auto& [i, v] : sparse(psi)) {
    const auto [y, u] = action.act(g, s.base_points()[i]);
    const FiberVector w = u.apply(v);
    int j = s.find(y);
    FiberVector value = w;
    if (j < 0 && gauge) {
      for (double a : shifts) {
        if (a == 0.0) continue;
        j = s.find(gauge->lambda(a, y));
        if (j >= 0) {
          value = gauge->V(a, y, s.dims()).apply(w);
          break;
        }
      }
    }
    if (j < 0) throw SupportError("gauge_section_transform: image of sample " + std::to_string(i) + " has no sampled gauge copy");
    if (!assigned[j]) {
      out.values[j] = value;
      assigned[j] = true;
    }
  }

  if (gauge) {
    for (int j = 0; j < s.size(); ++j) {
      if (assigned[j]) continue;
      const ClassicalState& y = s.base_points()[j];
      for (double a : shifts) {
        if (a == 0.0) continue;
        const int k = s.find(gauge->lambda(a, y));
        if (k < 0 || !assigned[k]) continue;
        // out_k = V_a out_j on an invariant result.
        out.values[j] = FiberVector{gauge->V(a, y, s.dims()).matrix.adjoint() * out.values[k].coeffs, s.dims()};
        break;
      }
    }
  }
  return out;
}

SamplingPtr rotation_sampling(std::shared_ptr<const GroupAction> action, const Gauge& gauge,
                              const ClassicalState& anchor, int n, int copies, double copy_step) {
  if (!action || action->group->id() != "SO2") throw InputError("rotation_sampling: needs an SO2 action");
  if (n < 2 || n % 2 != 0) throw InputError("rotation_sampling: n must be even and at least 2");
  if (copies < 0) throw InputError("rotation_sampling: copies must be non-negative");
  RVec spacing(1);
  spacing(0) = 2.0 * std::numbers::pi / n;
  SamplingOptions options;
  for (int j = -copies; j <= copies; ++j) {
    if (j != 0) options.gauge_copies.push_back(j * copy_step);
  }
  return OrbitSampling::lattice_box(std::move(action), anchor, spacing, {-n / 2 + 1}, {n / 2}, &gauge, options);
}

}  // namespace scb
