#pragma once

#include <string>
#include <utility>
#include <vector>

#include "scb/sections.hpp"

namespace scb {

struct GaugeMatch {
  bool equivalent = false;
  double alpha = 0.0;
  /// |lambda_alpha X1 - X2| + |V_alpha f1 - f2|
  double residual = 0.0;
};

/// Closed form when the gauge has one, otherwise a scan of search_range
/// followed by golden-section refinement. Equivalent iff residual <= 1e-8.
GaugeMatch gauge_equivalent(const Gauge& gauge, const ClassicalState& x1, const FiberVector& f1,
                            const ClassicalState& x2, const FiberVector& f2);

double gauge_residual(const Gauge& gauge, double alpha, const ClassicalState& x1, const FiberVector& f1,
                      const ClassicalState& x2, const FiberVector& f2);

/// Plain group law without gauge: |u_{g1} u_{g2} X - u_{g1 g2} X| and
/// |U_{g1} U_{g2} f - U_{g1 g2} f|.
struct StrictLaw {
  double base = 0.0;
  double fiber = 0.0;
};
StrictLaw strict_group_law(const GroupAction& action, const GroupElement& g1, const GroupElement& g2,
                           const ClassicalState& x, const FiberVector& f);

struct GaugeRelation {
  std::string relation;
  double residual = 0.0;
  std::vector<double> compensator;
  bool pass = false;
};

struct RelationInputs {
  GroupElement g;
  GroupElement g1;
  GroupElement g2;
  double alpha = 0.0;
  ClassicalState x;
  FiberVector f;
};

/// Residuals of the four compensator relations: the base ones on points, the
/// fiber ones on f. A null compensator is solved point by point through
/// gauge_equivalent; an unresolved one throws SearchError.
std::vector<GaugeRelation> compensator_relations_check(const GroupAction& action, const Gauge& gauge,
                                                       const GaugeCompensator* compensator,
                                                       const RelationInputs& in, double tolerance = 1e-6);

/// Gauge parameters that relate sampled points: the gauge grid together with
/// every difference of stored gauge parameters.
std::vector<double> gauge_shifts(const OrbitSampling& sampling);

/// Extends representative values to the whole sampling by
/// Psi_{lambda_alpha Y} = V_alpha Psi_Y. Throws ConsistencyError when two
/// transports disagree, including a stabilizer lambda_alpha Y = Y whose V_alpha
/// moves Psi_Y.
Section invariant_section_build(const std::vector<std::pair<int, FiberVector>>& representatives,
                                SamplingPtr sampling);

/// Largest violation of Psi_{lambda_alpha Y} = V_alpha Psi_Y over sampled pairs.
double invariance_residual(const Section& psi);

/// (U_g Psi)_Y on a gauge-invariant section. Images that leave the sampling
/// are folded back along the gauge orbit; points left unassigned are filled
/// from assigned gauge-equivalent ones. Throws PreconditionError on a
/// non-invariant input and SupportError when an image has no sampled gauge
/// copy.
Section gauge_section_transform(const GroupElement& g, const Section& psi);

/// SO2 lattice theta_m = 2 pi m / n, m in (-n/2, n/2], with gauge copies
/// alpha = j * copy_step for |j| <= copies.
SamplingPtr rotation_sampling(std::shared_ptr<const GroupAction> action, const Gauge& gauge,
                              const ClassicalState& anchor, int n, int copies, double copy_step);

}  // namespace scb
