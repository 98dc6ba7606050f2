#pragma once

#include <functional>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include "scb/bundle.hpp"

namespace scb {

struct SamplingOptions {
  /// Base points closer than this are one point (stabilizer detection).
  double match_tolerance = 1e-7;
  /// Gauge parameters added as copies of every point.
  std::vector<double> gauge_copies;
};

/// Finite piece of the orbit of an anchor: lattice group elements in
/// second-kind coordinates and their base points. Optional gauge copies
/// lambda_alpha u_g X carry their gauge parameter.
class OrbitSampling {
 public:
  using Options = SamplingOptions;

  /// All lattice points exp(B_1 s_1 m_1) ... exp(B_n s_n m_n) with
  /// lo_k <= m_k <= hi_k. The box must contain the identity.
  static std::shared_ptr<const OrbitSampling> lattice_box(
      std::shared_ptr<const GroupAction> action, const ClassicalState& anchor,
      const RVec& spacing, const std::vector<int>& lo, const std::vector<int>& hi,
      const Gauge* gauge = nullptr, Options options = {});

  const GroupAction& action() const { return *action_; }
  std::shared_ptr<const GroupAction> action_ptr() const { return action_; }
  const ClassicalState& anchor() const { return anchor_; }
  const RVec& spacing() const { return spacing_; }
  const FiberDims& dims() const { return action_->dims; }
  const Gauge* gauge() const { return gauge_.get(); }

  int size() const { return static_cast<int>(base_points_.size()); }
  const std::vector<GroupElement>& samples() const { return samples_; }
  const std::vector<RVec>& coords() const { return coords_; }
  const std::vector<double>& gauge_parameters() const { return gauge_params_; }
  const std::vector<ClassicalState>& base_points() const { return base_points_; }
  int identity_index() const { return identity_index_; }

  /// Index of the sampled point within the match tolerance, or -1.
  int find(const ClassicalState& x) const;

  /// Lattice multiples of the second-kind coordinates of g, if aligned.
  bool aligned(const GroupElement& g) const;
  /// Throws AlignmentError when g is off the lattice.
  void require_aligned(const GroupElement& g) const;

  /// Largest |recomputed - stored| over the base points.
  double recompute_residual() const;
  /// Smallest distance between two stored points.
  double min_separation() const;

 private:
  OrbitSampling() = default;
  int insert(const ClassicalState& x);
  std::vector<long long> cell(const ClassicalState& x) const;

  struct CellHash {
    std::size_t operator()(const std::vector<long long>& c) const;
  };

  std::shared_ptr<const GroupAction> action_;
  std::shared_ptr<const Gauge> gauge_;
  ClassicalState anchor_;
  RVec spacing_;
  Options options_;
  std::vector<GroupElement> samples_;
  std::vector<RVec> coords_;
  std::vector<double> gauge_params_;
  std::vector<ClassicalState> base_points_;
  int identity_index_ = -1;
  std::unordered_multimap<std::vector<long long>, int, CellHash> index_;
};

using SamplingPtr = std::shared_ptr<const OrbitSampling>;

struct BaseFunction {
  std::function<cplx(const ClassicalState&)> eval;
  bool smooth = true;

  cplx operator()(const ClassicalState& x) const { return eval(x); }
  static BaseFunction constant(cplx c);
};

struct Section {
  SamplingPtr sampling;
  std::vector<FiberVector> values;

  static Section zero(SamplingPtr sampling);
  int size() const { return static_cast<int>(values.size()); }
  Section operator+(const Section& o) const;
  Section operator-(const Section& o) const;
  Section operator*(cplx s) const;
};

/// Nonzero entries (sample index, value).
using SparseSection = std::vector<std::pair<int, FiberVector>>;

SparseSection sparse(const Section& psi);
Section densify(SamplingPtr sampling, const SparseSection& s);

/// max over samples of the fiber norm.
double section_norm(const Section& psi);

/// (U_g psi)_Y = U_g(Y <- u_{g^-1} Y) psi_{u_{g^-1} Y}, computed by pushing
/// every nonzero value forward. Throws AlignmentError for g off the lattice and
/// SupportError when a nonzero value leaves the sampling.
Section section_transform(const GroupElement& g, const Section& psi);
SparseSection transform_sparse(const OrbitSampling& sampling, const GroupElement& g,
                               const SparseSection& psi);

Section multiply(const BaseFunction& alpha, const Section& psi);

/// X -> alpha(u_{g^-1} X).
BaseFunction pullback(const GroupAction& action, const GroupElement& g, const BaseFunction& alpha);

/// Fiber inner products <phi, psi>_X per sample. Throws InputError when the
/// samplings differ.
std::vector<cplx> pairing(const Section& phi, const Section& psi);

/// Value at u_g X of U_g applied to the section supported at X with value
/// phi0.
FiberVector reconstruct_pointwise_operator(const GroupElement& g, const ClassicalState& x,
                                           const FiberVector& phi0, SamplingPtr sampling);

}  // namespace scb
