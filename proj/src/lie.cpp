#include "scb/lie.hpp"

#include <cmath>
#include <numbers>

#include "scb/errors.hpp"

namespace scb {

namespace {

CMat unit(int n, int i, int j) {
  CMat m = CMat::Zero(n, n);
  m(i, j) = 1.0;
  return m;
}

bool all_finite(const CMat& m) {
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    if (!std::isfinite(m.data()[k].real()) || !std::isfinite(m.data()[k].imag())) return false;
  }
  return true;
}

// Residual of "equal to the identity except on the listed free entries".
LieGroup::Residual unipotent_residual(std::vector<std::pair<int, int>> free_entries) {
  return [free_entries](const CMat& g) {
    CMat d = g - CMat::Identity(g.rows(), g.cols());
    for (auto [i, j] : free_entries) d(i, j) = cplx(0.0, d(i, j).imag());
    return d.norm();
  };
}

double orthogonal_residual(const CMat& g) {
  const CMat id = CMat::Identity(g.rows(), g.cols());
  return (g.transpose() * g - id).norm() + g.imag().norm() +
         std::abs(g.determinant() - 1.0);
}

double special_unitary_residual(const CMat& g) {
  const CMat id = CMat::Identity(g.rows(), g.cols());
  return (g.adjoint() * g - id).norm() + std::abs(g.determinant() - 1.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Elements

AlgebraElement AlgebraElement::operator+(const AlgebraElement& other) const {
  return group->algebra(coords + other.coords);
}

AlgebraElement AlgebraElement::operator-(const AlgebraElement& other) const {
  return group->algebra(coords - other.coords);
}

AlgebraElement AlgebraElement::operator*(double s) const {
  return group->algebra(coords * s);
}

GroupElement GroupElement::operator*(const GroupElement& other) const {
  if (group != other.group) throw InputError("group product across different groups");
  return {group, matrix * other.matrix};
}

GroupElement GroupElement::inverse() const { return {group, matrix.inverse()}; }

// ---------------------------------------------------------------------------
// LieGroup

GroupPtr LieGroup::create(std::string id, std::vector<CMat> basis,
                          Residual manifold_residual, ClosedForm closed_form,
                          double domain_radius) {
  if (basis.empty()) throw InputError("group " + id + ": empty basis");
  const Eigen::Index m = basis.front().rows();
  for (const auto& b : basis) {
    if (b.rows() != m || b.cols() != m) throw InputError("group " + id + ": basis matrices must be square and equal-sized");
    if (!all_finite(b)) throw InputError("group " + id + ": non-finite basis entry");
  }
  auto g = std::shared_ptr<LieGroup>(new LieGroup());
  g->id_ = std::move(id);
  g->basis_ = std::move(basis);
  g->closed_form_ = std::move(closed_form);
  g->domain_radius_ = domain_radius;

  const Eigen::Index n = static_cast<Eigen::Index>(g->basis_.size());
  g->expansion_.resize(2 * m * m, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const CMat& b = g->basis_[k];
    for (Eigen::Index e = 0; e < m * m; ++e) {
      g->expansion_(e, k) = b.data()[e].real();
      g->expansion_(m * m + e, k) = b.data()[e].imag();
    }
  }
  g->expansion_qr_.compute(g->expansion_);
  if (g->expansion_qr_.rank() != n) throw InputError("group " + g->id_ + ": basis is linearly dependent");

  if (manifold_residual) {
    g->residual_ = std::move(manifold_residual);
  } else {
    // Registered groups without a defining equation: distance between g and
    // the recomposition of its own second-kind coordinates.
    std::weak_ptr<const LieGroup> weak = g;
    g->residual_ = [weak](const CMat& mat) {
      auto self = weak.lock();
      try {
        const GroupElement el{self, mat};
        return (self->compose_second_kind(factorize_second_kind(el)).matrix - mat).norm();
      } catch (const DomainError&) {
        return std::numeric_limits<double>::infinity();
      }
    };
  }
  return g;
}

GroupPtr LieGroup::real_line() {
  static const GroupPtr g = create(
      "R", {unit(2, 0, 1)}, unipotent_residual({{0, 1}}),
      [](const CMat& m) { return RVec::Constant(1, m(0, 1).real()); },
      std::numeric_limits<double>::infinity());
  return g;
}

GroupPtr LieGroup::real_plane() {
  static const GroupPtr g = create(
      "R2", {unit(3, 0, 2), unit(3, 1, 2)}, unipotent_residual({{0, 2}, {1, 2}}),
      [](const CMat& m) {
        RVec t(2);
        t << m(0, 2).real(), m(1, 2).real();
        return t;
      },
      std::numeric_limits<double>::infinity());
  return g;
}

GroupPtr LieGroup::heisenberg() {
  // exp(X a) exp(P b) exp(Z c) = I + a E12 + b E23 + (ab + c) E13.
  static const GroupPtr g = create(
      "H3", {unit(3, 0, 1), unit(3, 1, 2), unit(3, 0, 2)},
      unipotent_residual({{0, 1}, {1, 2}, {0, 2}}),
      [](const CMat& m) {
        RVec t(3);
        const double a = m(0, 1).real();
        const double b = m(1, 2).real();
        t << a, b, m(0, 2).real() - a * b;
        return t;
      },
      std::numeric_limits<double>::infinity());
  return g;
}

GroupPtr LieGroup::so2() {
  CMat j = CMat::Zero(2, 2);
  j(0, 1) = -1.0;
  j(1, 0) = 1.0;
  // atan2 picks the angle in (-pi, pi]; the chart covers the whole circle.
  static const GroupPtr g = create(
      "SO2", {j}, orthogonal_residual,
      [](const CMat& m) { return RVec::Constant(1, std::atan2(m(1, 0).real(), m(0, 0).real())); },
      std::numeric_limits<double>::infinity());
  return g;
}

GroupPtr LieGroup::so3() {
  std::vector<CMat> basis(3, CMat::Zero(3, 3));
  // (J_k)_{ij} = -epsilon_{kij}
  basis[0](1, 2) = -1.0;
  basis[0](2, 1) = 1.0;
  basis[1](0, 2) = 1.0;
  basis[1](2, 0) = -1.0;
  basis[2](0, 1) = -1.0;
  basis[2](1, 0) = 1.0;
  static const GroupPtr g = create("SO3", basis, orthogonal_residual, nullptr, 1.0);
  return g;
}

GroupPtr LieGroup::su2() {
  std::vector<CMat> basis(3, CMat::Zero(2, 2));
  // -i sigma_k / 2
  basis[0](0, 1) = cplx(0.0, -0.5);
  basis[0](1, 0) = cplx(0.0, -0.5);
  basis[1](0, 1) = -0.5;
  basis[1](1, 0) = 0.5;
  basis[2](0, 0) = cplx(0.0, -0.5);
  basis[2](1, 1) = cplx(0.0, 0.5);
  static const GroupPtr g = create("SU2", basis, special_unitary_residual, nullptr, 1.0);
  return g;
}

GroupPtr LieGroup::by_id(const std::string& id) {
  if (id == "R") return real_line();
  if (id == "R2") return real_plane();
  if (id == "H3") return heisenberg();
  if (id == "SO2") return so2();
  if (id == "SO3") return so3();
  if (id == "SU2") return su2();
  throw InputError("unknown group id: " + id);
}

AlgebraElement LieGroup::algebra(const RVec& coords) const {
  if (coords.size() != dim()) throw InputError("algebra coordinates have wrong length for group " + id_);
  if (!coords.allFinite()) throw InputError("non-finite algebra coordinates");
  CMat m = CMat::Zero(matrix_size(), matrix_size());
  for (int k = 0; k < dim(); ++k) m += coords(k) * basis_[k];
  return {shared_from_this(), coords, m};
}

AlgebraElement LieGroup::basis_element(int k) const {
  if (k < 0 || k >= dim()) throw InputError("basis index out of range");
  return algebra(RVec::Unit(dim(), k));
}

AlgebraElement LieGroup::zero_algebra() const { return algebra(RVec::Zero(dim())); }

AlgebraElement LieGroup::expand(const CMat& m, double tol) const {
  if (m.rows() != matrix_size() || m.cols() != matrix_size()) throw InputError("matrix size does not match group " + id_);
  if (!all_finite(m)) throw InputError("non-finite matrix");
  const Eigen::Index mm = m.size();
  RVec v(2 * mm);
  for (Eigen::Index e = 0; e < mm; ++e) {
    v(e) = m.data()[e].real();
    v(mm + e) = m.data()[e].imag();
  }
  const RVec c = expansion_qr_.solve(v);
  const double residual = (expansion_ * c - v).norm();
  if (residual > tol) {
    throw ClosureError("matrix does not lie in the algebra of " + id_ + " (residual " + std::to_string(residual) + ")");
  }
  return algebra(c);
}

GroupElement LieGroup::element(const CMat& m, double tol) const {
  if (m.rows() != matrix_size() || m.cols() != matrix_size() || !all_finite(m)) {
    throw InputError("malformed group matrix for " + id_);
  }
  const double r = residual_(m);
  if (!(r <= tol)) throw InputError("matrix is off the " + id_ + " manifold (residual " + std::to_string(r) + ")");
  return {shared_from_this(), m};
}

GroupElement LieGroup::identity() const {
  return {shared_from_this(), CMat::Identity(matrix_size(), matrix_size())};
}

GroupElement LieGroup::compose_second_kind(const RVec& t) const {
  if (t.size() != dim()) throw InputError("coordinate vector has wrong length");
  CMat g = CMat::Identity(matrix_size(), matrix_size());
  for (int k = 0; k < dim(); ++k) g = g * expm(t(k) * basis_[k]);
  return {shared_from_this(), g};
}

double LieGroup::haar_density(const RVec& t) const {
  // g^{-1} d_k g = Ad_{(E_k ... E_n)^{-1}} B_k, with E_j = exp(B_j t_j).
  const int n = dim();
  RMat jac(n, n);
  CMat tail = CMat::Identity(matrix_size(), matrix_size());
  for (int k = n - 1; k >= 0; --k) {
    tail = expm(t(k) * basis_[k]) * tail;
    const CMat col = tail.inverse() * basis_[k] * tail;
    jac.col(k) = expand(col, 1e-8).coords;
  }
  return std::abs(jac.determinant());
}

// ---------------------------------------------------------------------------
// Operations

GroupElement exp(const AlgebraElement& a, double t) {
  if (!std::isfinite(t)) throw InputError("exp: non-finite parameter");
  if (!a.group || !all_finite(a.matrix)) throw InputError("exp: malformed algebra element");
  return {a.group, expm(t * a.matrix)};
}

AlgebraElement bracket(const AlgebraElement& a, const AlgebraElement& b) {
  if (a.group != b.group) throw InputError("bracket across different algebras");
  return a.group->expand(a.matrix * b.matrix - b.matrix * a.matrix);
}

AlgebraElement adjoint(const GroupElement& h, const AlgebraElement& a) {
  if (h.group != a.group) throw InputError("adjoint across different groups");
  return a.group->expand(h.matrix * a.matrix * h.matrix.inverse());
}

RVec factorize_second_kind(const GroupElement& g) {
  const LieGroup& grp = *g.group;
  const int m = grp.matrix_size();
  const CMat id = CMat::Identity(m, m);
  if (!all_finite(g.matrix)) throw InputError("factorize: non-finite matrix");
  if ((g.matrix - id).norm() > grp.domain_radius()) {
    throw DomainError("element outside the factorization domain of " + grp.id());
  }
  if (grp.closed_form_) return grp.closed_form_(g.matrix);

  // Gauss-Newton on t -> exp(B_1 t_1)...exp(B_n t_n) - g from t = 0.
  const int n = grp.dim();
  RVec t = RVec::Zero(n);
  const Eigen::Index mm = static_cast<Eigen::Index>(m) * m;
  for (int iter = 0; iter < 60; ++iter) {
    std::vector<CMat> factors(n);
    for (int k = 0; k < n; ++k) factors[k] = expm(t(k) * grp.basis_[k]);
    std::vector<CMat> prefix(n + 1, id);
    for (int k = 0; k < n; ++k) prefix[k + 1] = prefix[k] * factors[k];
    const CMat f = prefix[n] - g.matrix;
    if (f.norm() < 1e-14) return t;

    RMat jac(2 * mm, n);
    RVec rhs(2 * mm);
    for (int k = 0; k < n; ++k) {
      CMat suffix = id;
      for (int j = k; j < n; ++j) suffix = suffix * factors[j];
      const CMat d = prefix[k] * grp.basis_[k] * suffix;
      for (Eigen::Index e = 0; e < mm; ++e) {
        jac(e, k) = d.data()[e].real();
        jac(mm + e, k) = d.data()[e].imag();
      }
    }
    for (Eigen::Index e = 0; e < mm; ++e) {
      rhs(e) = -f.data()[e].real();
      rhs(mm + e) = -f.data()[e].imag();
    }
    t += jac.colPivHouseholderQr().solve(rhs);
    if (!t.allFinite() || t.norm() > 10.0) break;
  }
  const GroupElement back = grp.compose_second_kind(t);
  if (t.allFinite() && (back.matrix - g.matrix).norm() < 1e-12) return t;
  throw DomainError("second-kind factorization did not converge for " + grp.id());
}

HaarQuadrature haar_quadrature(const GroupPtr& group, const HaarWindow& window,
                               int resolution) {
  if (resolution < 2) throw InputError("haar_quadrature: resolution must be at least 2");
  const int n = group->dim();
  if (static_cast<int>(window.box.size()) != n) throw InputError("haar_quadrature: window box dimension mismatch");

  auto rule = [&](int res, std::vector<HaarSample>* out) {
    std::vector<double> h(n);
    for (int d = 0; d < n; ++d) h[d] = (window.box[d].second - window.box[d].first) / (res - 1);
    std::vector<int> idx(n, 0);
    double total = 0.0;
    RVec t(n);
    while (true) {
      double w = 1.0;
      for (int d = 0; d < n; ++d) {
        t(d) = window.box[d].first + idx[d] * h[d];
        w *= h[d] * ((idx[d] == 0 || idx[d] == res - 1) ? 0.5 : 1.0);
      }
      const double fv = window.f(t);
      if (fv != 0.0) {
        const double weight = w * fv * group->haar_density(t);
        total += weight;
        if (out) out->push_back({group->compose_second_kind(t), weight});
      }
      int d = 0;
      while (d < n && ++idx[d] == res) idx[d++] = 0;
      if (d == n) break;
    }
    return total;
  };

  HaarQuadrature q;
  const double fine = rule(resolution, &q.samples);
  const int coarse_res = std::max(2, (resolution + 1) / 2);
  q.error_estimate = std::abs(fine - rule(coarse_res, nullptr));
  return q;
}

}  // namespace scb
