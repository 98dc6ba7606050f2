#include "scb/bundle.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <memory>
#include <numbers>

#include "scb/errors.hpp"

namespace scb {

BundleAutomorphism GroupAction::automorphism(const GroupElement& g) const {
  BundleAutomorphism a;
  auto self = *this;
  a.base_map = [self, g](const ClassicalState& x) { return self.base(g, x); };
  a.fiber_map = [self, g](const ClassicalState& x) { return self.fiber(g, x); };
  return a;
}

namespace {

void require_group(const GroupElement& g, const GroupPtr& group) {
  if (g.group != group) throw InputError("group element belongs to " + g.group->id() + ", action expects " + group->id());
}

void require_one_dimensional(const ClassicalState& x) {
  if (x.n() != 1 || x.P.size() != 1) throw InputError("this action is defined for n = 1 only");
}

// exp(-i q p) and exp(i p xi) on the truncated fiber through fixed
// eigendecompositions, so every product stays exactly unitary.
class WeylDressing {
 public:
  explicit WeylDressing(const FiberDims& dims)
      : xi_(position_matrix(dims, 0)), p_(momentum_matrix(dims, 0)) {
    Eigen::SelfAdjointEigenSolver<CMat> ex(xi_), ep(p_);
    vx_ = ex.eigenvectors();
    lx_ = ex.eigenvalues();
    vp_ = ep.eigenvectors();
    lp_ = ep.eigenvalues();
  }

  CMat translate(double q) const { return phase(vp_, lp_, -q); }
  CMat boost(double p) const { return phase(vx_, lx_, p); }
  CMat W(const ClassicalState& x) const { return translate(x.Q(0)) * boost(x.P(0)); }

  const CMat& xi() const { return xi_; }
  const CMat& p() const { return p_; }

 private:
  static CMat phase(const CMat& v, const RVec& l, double s) {
    CVec d(l.size());
    for (Eigen::Index k = 0; k < l.size(); ++k) d(k) = std::exp(kI * (s * l(k)));
    return v * d.asDiagonal() * v.adjoint();
  }

  CMat xi_, p_;
  CMat vx_, vp_;
  RVec lx_, lp_;
};

RVec packed_field(double ds, double dp, double dq) {
  RVec v(3);
  v << ds, dp, dq;
  return v;
}

}  // namespace

GroupAction time_evolution_action(const HamiltonianSpec& h, const FiberDims& dims, double dt) {
  if (!(dt > 0.0)) throw InputError("time_evolution_action: dt must be positive");
  GroupAction a;
  a.name = "time-evolution";
  a.group = LieGroup::real_line();
  a.dims = dims;
  const GroupPtr group = a.group;
  a.base = [h, dt, group](const GroupElement& g, const ClassicalState& x) {
    require_group(g, group);
    return classical_flow(h, x, g.matrix(0, 1).real(), dt).states.back();
  };
  a.act = [h, dt, dims, group](const GroupElement& g, const ClassicalState& x) {
    require_group(g, group);
    const Trajectory tr = classical_flow(h, x, g.matrix(0, 1).real(), dt);
    return GroupAction::Pair{tr.states.back(), fluctuation_propagator(h, tr, dims)};
  };
  a.base_field = [h](int k, const ClassicalState& x) {
    if (k != 0) throw InputError("basis index out of range");
    return hamilton_field(h, x);
  };
  a.fiber_hamiltonian = [h, dims](int k, const ClassicalState& x) {
    if (k != 0) throw InputError("basis index out of range");
    return fluctuation_hamiltonian(h, x, dims);
  };
  return a;
}

namespace {

GroupAction translation_like(const std::string& name, GroupPtr group, const FiberDims& dims,
                             std::function<ClassicalState(const GroupElement&, const ClassicalState&)> base,
                             std::function<RVec(int, const ClassicalState&)> field,
                             std::vector<int> roles) {
  if (dims.n != 1) throw InputError(name + ": fiber must be one-dimensional");
  auto dressing = std::make_shared<const WeylDressing>(dims);
  GroupAction a;
  a.name = name;
  a.group = group;
  a.dims = dims;
  a.base = [base, group](const GroupElement& g, const ClassicalState& x) {
    require_group(g, group);
    require_one_dimensional(x);
    return base(g, x);
  };
  a.act = [base, group, dressing](const GroupElement& g, const ClassicalState& x) {
    require_group(g, group);
    require_one_dimensional(x);
    ClassicalState y = base(g, x);
    CMat u = dressing->W(y) * dressing->W(x).adjoint();
    return GroupAction::Pair{std::move(y), FiberOperator{std::move(u), false, true}};
  };
  a.base_field = field;
  // roles[k]: 0 shifts Q (H = p), 1 shifts P (H = -T xi T^dagger), 2 central.
  a.fiber_hamiltonian = [roles, dressing](int k, const ClassicalState& x) {
    if (k < 0 || k >= static_cast<int>(roles.size())) throw InputError("basis index out of range");
    require_one_dimensional(x);
    const Eigen::Index size = dressing->p().rows();
    CMat m;
    switch (roles[k]) {
      case 0:
        m = dressing->p();
        break;
      case 1: {
        const CMat t = dressing->translate(x.Q(0));
        m = -(t * dressing->xi() * t.adjoint());
        m = 0.5 * (m + m.adjoint()).eval();
        break;
      }
      default:
        m = CMat::Zero(size, size);
    }
    return FiberOperator{std::move(m), true, false};
  };
  return a;
}

}  // namespace

GroupAction heisenberg_weyl_action(const FiberDims& dims) {
  auto base = [](const GroupElement& g, const ClassicalState& x) {
    const double gx = g.matrix(0, 1).real();
    const double gy = g.matrix(1, 2).real();
    const double gz = g.matrix(0, 2).real();
    return ClassicalState::make(x.S + gz + gx * x.P(0), x.P(0) + gy, x.Q(0) + gx);
  };
  auto field = [](int k, const ClassicalState& x) {
    switch (k) {
      case 0: return packed_field(x.P(0), 0.0, 1.0);
      case 1: return packed_field(0.0, 1.0, 0.0);
      case 2: return packed_field(1.0, 0.0, 0.0);
      default: throw InputError("basis index out of range");
    }
  };
  return translation_like("heisenberg-weyl", LieGroup::heisenberg(), dims, base, field, {0, 1, 2});
}

GroupAction phase_space_translation_action(const FiberDims& dims) {
  auto base = [](const GroupElement& g, const ClassicalState& x) {
    return ClassicalState::make(x.S, x.P(0) + g.matrix(1, 2).real(), x.Q(0) + g.matrix(0, 2).real());
  };
  auto field = [](int k, const ClassicalState&) {
    switch (k) {
      case 0: return packed_field(0.0, 0.0, 1.0);
      case 1: return packed_field(0.0, 1.0, 0.0);
      default: throw InputError("basis index out of range");
    }
  };
  return translation_like("translations-r2", LieGroup::real_plane(), dims, base, field, {0, 1});
}

double so2_angle(const GroupElement& g) {
  double theta = std::atan2(g.matrix(1, 0).real(), g.matrix(0, 0).real());
  // -pi and pi are the same element; keep the representative in (-pi, pi].
  if (theta <= -std::numbers::pi + 1e-12) theta += 2.0 * std::numbers::pi;
  return theta;
}

GroupAction oscillator_rotation_action(RotationVariant variant, double eps, const FiberDims& dims, double dt) {
  if (!(eps > 0.0)) throw InputError("oscillator_rotation_action: eps must be positive");
  if (!(dt > 0.0)) throw InputError("oscillator_rotation_action: dt must be positive");
  const HamiltonianSpec h = make_polynomial_hamiltonian({1.0, 1.0, 0.0, 0.0});
  const double shift = variant == RotationVariant::GaugeShifted ? 0.5 * eps : 0.0;
  const double offset = variant == RotationVariant::Periodic ? 0.5 : 0.0;
  GroupAction a;
  switch (variant) {
    case RotationVariant::Raw: a.name = "oscillator-rotation"; break;
    case RotationVariant::GaugeShifted: a.name = "metaplectic-so2"; break;
    case RotationVariant::Periodic: a.name = "periodic-rotation"; break;
  }
  a.group = LieGroup::so2();
  a.dims = dims;
  const GroupPtr group = a.group;
  a.base = [h, dt, shift, group](const GroupElement& g, const ClassicalState& x) {
    require_group(g, group);
    const double theta = so2_angle(g);
    ClassicalState y = classical_flow(h, x, theta, dt).states.back();
    y.S += shift * theta;
    return y;
  };
  a.act = [h, dt, shift, offset, dims, group](const GroupElement& g, const ClassicalState& x) {
    require_group(g, group);
    const double theta = so2_angle(g);
    const Trajectory tr = classical_flow(h, x, theta, dt);
    ClassicalState y = tr.states.back();
    y.S += shift * theta;
    FiberOperator u = fluctuation_propagator(h, tr, dims);
    if (offset != 0.0) u.matrix *= std::exp(kI * (offset * theta));
    return GroupAction::Pair{std::move(y), std::move(u)};
  };
  a.base_field = [h, shift](int k, const ClassicalState& x) {
    if (k != 0) throw InputError("basis index out of range");
    RVec v = hamilton_field(h, x);
    v(0) += shift;
    return v;
  };
  a.fiber_hamiltonian = [h, dims, offset](int k, const ClassicalState& x) {
    if (k != 0) throw InputError("basis index out of range");
    FiberOperator m = fluctuation_hamiltonian(h, x, dims);
    m.matrix -= offset * CMat::Identity(m.matrix.rows(), m.matrix.cols());
    return m;
  };
  return a;
}

GroupAction metaplectic_action(double eps, const FiberDims& dims, double dt) {
  return oscillator_rotation_action(RotationVariant::GaugeShifted, eps, dims, dt);
}

Gauge trivial_gauge() {
  Gauge g;
  g.id = "trivial";
  g.lambda = [](double, const ClassicalState& x) { return x; };
  g.V = [](double, const ClassicalState&, const FiberDims& d) { return FiberOperator::identity(d); };
  g.solve = [](const ClassicalState&, const FiberVector&, const ClassicalState&, const FiberVector&) {
    return std::optional<double>(0.0);
  };
  return g;
}

Gauge u1_phase_gauge(std::vector<double> grid) {
  Gauge g;
  g.id = "u1-phase";
  g.lambda = [](double, const ClassicalState& x) { return x; };
  g.V = [](double theta, const ClassicalState&, const FiberDims& d) {
    FiberOperator v = FiberOperator::identity(d);
    v.matrix *= std::exp(kI * theta);
    v.hermitian = false;
    return v;
  };
  g.solve = [](const ClassicalState&, const FiberVector& f1, const ClassicalState&, const FiberVector& f2) {
    const cplx overlap = inner(f1, f2);
    return std::optional<double>(std::abs(overlap) > 0.0 ? std::arg(overlap) : 0.0);
  };
  g.search_range = {-std::numbers::pi, std::numbers::pi};
  g.grid = std::move(grid);
  return g;
}

Gauge action_shift_gauge(std::vector<double> grid) {
  Gauge g;
  g.id = "action-shift";
  g.lambda = [](double c, const ClassicalState& x) {
    ClassicalState y = x;
    y.S += c;
    return y;
  };
  g.V = [](double, const ClassicalState&, const FiberDims& d) { return FiberOperator::identity(d); };
  g.solve = [](const ClassicalState& x1, const FiberVector&, const ClassicalState& x2, const FiberVector&) {
    return std::optional<double>(x2.S - x1.S);
  };
  g.grid = std::move(grid);
  return g;
}

Gauge ansatz_phase_gauge(double eps, std::vector<double> grid) {
  if (!(eps > 0.0)) throw InputError("ansatz_phase_gauge: eps must be positive");
  Gauge g;
  g.id = "ansatz-phase";
  g.lambda = [eps](double phi, const ClassicalState& x) {
    ClassicalState y = x;
    y.S += eps * phi;
    return y;
  };
  g.V = [](double phi, const ClassicalState&, const FiberDims& d) {
    FiberOperator v = FiberOperator::identity(d);
    v.matrix *= std::exp(-kI * phi);
    v.hermitian = false;
    return v;
  };
  g.solve = [eps](const ClassicalState& x1, const FiberVector&, const ClassicalState& x2, const FiberVector&) {
    return std::optional<double>((x2.S - x1.S) / eps);
  };
  g.grid = std::move(grid);
  return g;
}

GaugeCompensator trivial_compensator() {
  return {[](const GroupElement&, double alpha) { return alpha; },
          [](const GroupElement&, const GroupElement&) { return 0.0; }};
}

GaugeCompensator metaplectic_compensator() {
  auto gamma = [](const GroupElement& g1, const GroupElement& g2) {
    const double lost = so2_angle(g1) + so2_angle(g2) - so2_angle(g1 * g2);
    return std::numbers::pi * std::round(lost / (2.0 * std::numbers::pi));
  };
  return {[gamma](const GroupElement& g, double alpha) { return alpha + gamma(g, g.inverse()); }, gamma};
}

}  // namespace scb
