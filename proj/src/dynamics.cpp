#include "scb/dynamics.hpp"

#include <cmath>
#include <string>

#include "scb/errors.hpp"

namespace scb {

ClassicalState ClassicalState::make(double s, double p, double q) {
  return {s, RVec::Constant(1, p), RVec::Constant(1, q)};
}

bool ClassicalState::finite() const {
  return std::isfinite(S) && P.allFinite() && Q.allFinite();
}

RVec ClassicalState::packed() const {
  RVec v(1 + P.size() + Q.size());
  v(0) = S;
  v.segment(1, P.size()) = P;
  v.segment(1 + P.size(), Q.size()) = Q;
  return v;
}

ClassicalState ClassicalState::unpack(const RVec& v) {
  const Eigen::Index n = (v.size() - 1) / 2;
  return {v(0), v.segment(1, n), v.segment(1 + n, n)};
}

double distance(const ClassicalState& a, const ClassicalState& b) {
  return (a.packed() - b.packed()).norm();
}

HamiltonianSpec make_polynomial_hamiltonian(const PolynomialHamiltonian& c) {
  HamiltonianSpec h;
  h.n = 1;
  h.value = [c](const RVec& q, const RVec& p) {
    const double x = q(0), y = p(0);
    return 0.5 * c.pp * y * y + 0.5 * c.qq * x * x + c.qp * x * y + c.cubic * x * x * x;
  };
  h.dq = [c](const RVec& q, const RVec& p) {
    return RVec::Constant(1, c.qq * q(0) + c.qp * p(0) + 3.0 * c.cubic * q(0) * q(0));
  };
  h.dp = [c](const RVec& q, const RVec& p) { return RVec::Constant(1, c.pp * p(0) + c.qp * q(0)); };
  h.hqq = [c](const RVec& q, const RVec&) { return RMat::Constant(1, 1, c.qq + 6.0 * c.cubic * q(0)); };
  h.hqp = [c](const RVec&, const RVec&) { return RMat::Constant(1, 1, c.qp); };
  h.hpp = [c](const RVec&, const RVec&) { return RMat::Constant(1, 1, c.pp); };
  if (c.qp == 0.0) {
    h.separable = HamiltonianSpec::Separable{
        c.pp, [c](double x) { return 0.5 * c.qq * x * x + c.cubic * x * x * x; }};
  }
  return h;
}

double derivative_consistency(const HamiltonianSpec& h,
                              const std::vector<ClassicalState>& probes) {
  const double step = 1e-5;
  double worst = 0.0;
  auto rel = [](double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
  };
  for (const auto& x : probes) {
    const RVec gq = h.dq(x.Q, x.P);
    const RVec gp = h.dp(x.Q, x.P);
    const RMat aqq = h.hqq(x.Q, x.P);
    const RMat aqp = h.hqp(x.Q, x.P);
    const RMat app = h.hpp(x.Q, x.P);
    for (int j = 0; j < h.n; ++j) {
      RVec qp = x.Q, qm = x.Q, pp = x.P, pm = x.P;
      qp(j) += step;
      qm(j) -= step;
      pp(j) += step;
      pm(j) -= step;
      worst = std::max(worst, rel(gq(j), (h.value(qp, x.P) - h.value(qm, x.P)) / (2 * step)));
      worst = std::max(worst, rel(gp(j), (h.value(x.Q, pp) - h.value(x.Q, pm)) / (2 * step)));
      const RVec dqq = (h.dq(qp, x.P) - h.dq(qm, x.P)) / (2 * step);
      const RVec dpp = (h.dp(x.Q, pp) - h.dp(x.Q, pm)) / (2 * step);
      const RVec dpq = (h.dp(qp, x.P) - h.dp(qm, x.P)) / (2 * step);
      for (int k = 0; k < h.n; ++k) {
        worst = std::max(worst, rel(aqq(k, j), dqq(k)));
        worst = std::max(worst, rel(app(k, j), dpp(k)));
        worst = std::max(worst, rel(aqp(j, k), dpq(k)));
      }
    }
  }
  return worst;
}

RVec hamilton_field(const HamiltonianSpec& h, const ClassicalState& x) {
  const RVec qdot = h.dp(x.Q, x.P);
  const RVec pdot = -h.dq(x.Q, x.P);
  ClassicalState d{x.P.dot(qdot) - h.value(x.Q, x.P), pdot, qdot};
  return d.packed();
}

Trajectory classical_flow(const HamiltonianSpec& h, const ClassicalState& x0,
                          double T, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("classical_flow: dt must be positive and finite");
  if (!std::isfinite(T)) throw InputError("classical_flow: T must be finite");
  if (!x0.finite() || x0.n() != h.n || x0.P.size() != h.n) throw InputError("classical_flow: malformed initial state");

  Trajectory tr;
  tr.t.push_back(0.0);
  tr.states.push_back(x0);
  if (T == 0.0) return tr;

  const long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(T) / dt - 1e-9)));
  const double step = T / static_cast<double>(steps);
  tr.t.reserve(steps + 1);
  tr.states.reserve(steps + 1);
  tr.midpoints.reserve(steps);

  auto field = [&h](const RVec& y) { return hamilton_field(h, ClassicalState::unpack(y)); };
  RVec y = x0.packed();
  RVec fy = field(y);
  for (long i = 0; i < steps; ++i) {
    const RVec k1 = fy;
    const RVec k2 = field(y + 0.5 * step * k1);
    const RVec k3 = field(y + 0.5 * step * k2);
    const RVec k4 = field(y + step * k3);
    const RVec next = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t_next = step * static_cast<double>(i + 1);
    if (!next.allFinite()) throw NumericalError("classical_flow: state blew up", t_next);
    const RVec fnext = field(next);
    if (!fnext.allFinite()) throw NumericalError("classical_flow: vector field blew up", t_next);
    tr.midpoints.push_back(ClassicalState::unpack(0.5 * (y + next) + (step / 8.0) * (fy - fnext)));
    y = next;
    fy = fnext;
    tr.t.push_back(t_next);
    tr.states.push_back(ClassicalState::unpack(y));
  }
  tr.energy_drift = std::abs(h(tr.states.back()) - h(x0));
  return tr;
}

FiberOperator fluctuation_hamiltonian(const HamiltonianSpec& h,
                                      const ClassicalState& x,
                                      const FiberDims& dims) {
  return quadratic_hamiltonian(h.hqq(x.Q, x.P), h.hqp(x.Q, x.P), h.hpp(x.Q, x.P), dims);
}

FiberOperator fluctuation_propagator(const HamiltonianSpec& h,
                                     const Trajectory& trajectory,
                                     const FiberDims& dims) {
  const int size = dims.size();
  CMat u = CMat::Identity(size, size);
  if (trajectory.states.size() < 2) return {u, false, true};
  if (trajectory.midpoints.size() + 1 != trajectory.states.size()) {
    throw InputError("fluctuation_propagator: trajectory lacks midpoint data");
  }

  // Runs of identical steps (fixed Hessian, fixed dt) are composed by
  // repeated squaring.
  RMat last_qq, last_qp, last_pp;
  double last_dt = 0.0;
  CMat step_op;
  long run = 0;
  for (std::size_t i = 0; i + 1 < trajectory.states.size(); ++i) {
    const ClassicalState& mid = trajectory.midpoints[i];
    const double dt = trajectory.t[i + 1] - trajectory.t[i];
    RMat qq = h.hqq(mid.Q, mid.P), qp = h.hqp(mid.Q, mid.P), pp = h.hpp(mid.Q, mid.P);
    if (!qq.allFinite() || !qp.allFinite() || !pp.allFinite()) {
      throw NumericalError("fluctuation_propagator: non-finite Hessian", trajectory.t[i]);
    }
    const bool same = run > 0 && std::abs(dt - last_dt) <= 1e-12 * std::abs(last_dt) && qq == last_qq && qp == last_qp && pp == last_pp;
    if (same) {
      ++run;
      continue;
    }
    if (run > 0) u = matrix_power(step_op, run) * u;
    step_op = unitary_step(quadratic_hamiltonian(qq, qp, pp, dims).matrix, dt);
    last_qq = std::move(qq);
    last_qp = std::move(qp);
    last_pp = std::move(pp);
    last_dt = dt;
    run = 1;
  }
  if (run > 0) u = matrix_power(step_op, run) * u;
  FiberOperator result{u, false, true};
  const double defect = unitarity_residual(result);
  if (!(defect <= 1e-8)) {
    throw NumericalError("fluctuation_propagator: unitarity lost (" + std::to_string(defect) + ")",
                         trajectory.t.back());
  }
  return result;
}

BundleAutomorphism evolution_automorphism(const HamiltonianSpec& h, double t,
                                          double dt, const FiberDims& dims) {
  if (!std::isfinite(t)) throw InputError("evolution_automorphism: non-finite time");
  BundleAutomorphism a;
  a.base_map = [h, t, dt](const ClassicalState& x) {
    return classical_flow(h, x, t, dt).states.back();
  };
  a.fiber_map = [h, t, dt, dims](const ClassicalState& x) {
    return fluctuation_propagator(h, classical_flow(h, x, t, dt), dims);
  };
  return a;
}

}  // namespace scb
