#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "scb/linalg.hpp"

namespace scb {

class LieGroup;
using GroupPtr = std::shared_ptr<const LieGroup>;

/// Element of the Lie algebra of a registered group, in its faithful matrix
/// representation. `coords` are with respect to the group's basis B_1..B_n.
struct AlgebraElement {
  GroupPtr group;
  RVec coords;
  CMat matrix;

  AlgebraElement operator+(const AlgebraElement& other) const;
  AlgebraElement operator-(const AlgebraElement& other) const;
  AlgebraElement operator*(double s) const;
};

struct GroupElement {
  GroupPtr group;
  CMat matrix;

  GroupElement operator*(const GroupElement& other) const;
  GroupElement inverse() const;
};

/// Immutable description of a matrix Lie group: basis of the algebra, the
/// manifold residual, and how second-kind coordinates are recovered.
class LieGroup : public std::enable_shared_from_this<LieGroup> {
 public:
  using Residual = std::function<double(const CMat&)>;
  using ClosedForm = std::function<RVec(const CMat&)>;

  /// `domain_radius` bounds ||g - I||_F for factorization; infinity means the
  /// closed form is valid on the whole group.
  static GroupPtr create(std::string id, std::vector<CMat> basis,
                         Residual manifold_residual, ClosedForm closed_form,
                         double domain_radius);

  // Built-in catalog.
  static GroupPtr real_line();     // "R": time translations
  static GroupPtr real_plane();    // "R2": phase-space translations
  static GroupPtr heisenberg();    // "H3": basis X, P, Z with [X,P] = Z
  static GroupPtr so2();           // "SO2"
  static GroupPtr so3();           // "SO3": basis J1, J2, J3
  static GroupPtr su2();           // "SU2": basis -i sigma_k / 2

  /// Built-in lookup; throws InputError for unknown ids.
  static GroupPtr by_id(const std::string& id);

  const std::string& id() const { return id_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  int matrix_size() const { return static_cast<int>(basis_.front().rows()); }
  const std::vector<CMat>& basis() const { return basis_; }
  double domain_radius() const { return domain_radius_; }
  bool has_closed_form() const { return static_cast<bool>(closed_form_); }

  double manifold_residual(const CMat& g) const { return residual_(g); }

  AlgebraElement algebra(const RVec& coords) const;
  AlgebraElement basis_element(int k) const;
  AlgebraElement zero_algebra() const;

  /// Re-expands an arbitrary matrix in the basis. Throws ClosureError when the
  /// least-squares residual exceeds `tol`.
  AlgebraElement expand(const CMat& m, double tol = 1e-10) const;

  /// Throws InputError when the matrix is off the manifold by more than tol.
  GroupElement element(const CMat& m, double tol = 1e-10) const;
  GroupElement identity() const;

  /// exp(B_1 t_1) ... exp(B_n t_n).
  GroupElement compose_second_kind(const RVec& t) const;

  /// Left-invariant Haar density at second-kind coordinates t, i.e.
  /// |det| of the Maurer-Cartan form g^{-1} dg in the basis.
  double haar_density(const RVec& t) const;

 private:
  LieGroup() = default;
  friend RVec factorize_second_kind(const GroupElement& g);

  std::string id_;
  std::vector<CMat> basis_;
  Residual residual_;
  ClosedForm closed_form_;
  double domain_radius_ = std::numeric_limits<double>::infinity();
  // Columns are [Re vec(B_k); Im vec(B_k)].
  RMat expansion_;
  Eigen::ColPivHouseholderQR<RMat> expansion_qr_;
};

GroupElement exp(const AlgebraElement& a, double t);

AlgebraElement bracket(const AlgebraElement& a, const AlgebraElement& b);

/// h A h^{-1}.
AlgebraElement adjoint(const GroupElement& h, const AlgebraElement& a);

/// Second-kind canonical coordinates (t_1..t_n) with
/// g = exp(B_1 t_1) ... exp(B_n t_n). Throws DomainError outside the chart.
RVec factorize_second_kind(const GroupElement& g);

struct HaarSample {
  GroupElement point;
  double weight;
};

/// Window on second-kind coordinates; `box` bounds its support per axis.
struct HaarWindow {
  std::function<double(const RVec&)> f;
  std::vector<std::pair<double, double>> box;
};

struct HaarQuadrature {
  std::vector<HaarSample> samples;
  /// |difference| between this rule and one at roughly half resolution.
  double error_estimate = 0.0;
};

/// Tensor trapezoid rule with `resolution` nodes per axis over the window box,
/// weighted by window * Haar density. Throws InputError for resolution < 2.
HaarQuadrature haar_quadrature(const GroupPtr& group, const HaarWindow& window,
                               int resolution);

}  // namespace scb
