#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "scb/generators.hpp"

namespace scb {

/// Infinitesimal data per basis direction B_k: the base vector field and the
/// Hermitian fiber Hamiltonian H(B_k : X). Built from a GroupAction, whose
/// finite maps are never consulted by the integrator.
struct GeneratorFamily {
  std::shared_ptr<const GroupAction> action;
  /// RK4 step for the characteristics.
  double dt = 1e-3;

  static GeneratorFamily from_action(std::shared_ptr<const GroupAction> action, double dt);

  int dim() const { return action->group->dim(); }
  const FiberDims& dims() const { return action->dims; }
  RVec base_field(int k, const ClassicalState& x) const { return action->base_field(k, x); }
  /// Throws NumericalError when the output is not Hermitian to 1e-10.
  FiberOperator fiber_hamiltonian(int k, const ClassicalState& x) const;
};

/// Characteristic of B_k: end point X(t) and U^t(X(t) <- X(0)).
struct Transport {
  ClassicalState end;
  FiberOperator op;
};

/// RK4 along base_field with midpoint-exponential fiber steps. Steps whose
/// Hamiltonian is bitwise unchanged reuse the previous step unitary.
Transport characteristic(const GeneratorFamily& family, int k, double t, const ClassicalState& x);

/// U^t_{B_k} psi0 by characteristics: every nonzero value is carried from X
/// to X(t). Throws AlignmentError when exp(B_k t) is off the lattice and
/// SupportError when a value leaves the window.
Section exponentiate_generator(const GeneratorFamily& family, int k, double t, const Section& psi0);

/// U^{t_1}_{B_1} ... U^{t_n}_{B_n} psi with the rightmost factor applied first.
Section reconstruct_group_operator(const GeneratorFamily& family, const GroupElement& g, const Section& psi);

/// The reconstructed operator at one base point: (end point, fiber map).
Transport reconstruct_pointwise(const GeneratorFamily& family, const GroupElement& g, const ClassicalState& x);

struct WordLetter {
  int k = 0;
  std::function<double(double)> t;
};

/// max over alpha and probes of |U^{t_1(alpha)}_{B_{i_1}} ... psi - psi|.
/// Throws PreconditionError when the matrix word differs from the identity
/// by more than 1e-10 at a sampled alpha.
double word_identity_check(const GeneratorFamily& family, const std::vector<WordLetter>& word,
                           const std::vector<Section>& probes,
                           const std::vector<double>& alphas = {0.0, 0.25, 0.5, 0.75, 1.0});

/// U^{-t}_{B_k} H(A) U^t_{B_k} psi against H(exp(-B_k t) A exp(B_k t)) psi,
/// evaluated pointwise at `probes` (sample indices; empty picks the core of
/// psi). Order >= 1 under tau -> tau/2.
IdentityResidual conjugation_check(const GeneratorFamily& family, int k, double t, const AlgebraElement& a,
                                   const SmoothSection& psi, double tau, std::vector<int> probes = {});

/// |R(g1) R(g2) psi - R(g1 g2) psi| for the reconstructed action R.
double group_law_verify(const GeneratorFamily& family, const GroupElement& g1, const GroupElement& g2,
                        const Section& psi);

/// Relative distance at X between i (R(exp(A tau)) - R(exp(-A tau))) / (2 tau)
/// and sum_k a_k H(B_k : X), the fiber part of the family generator.
double generator_closure(const GeneratorFamily& family, const AlgebraElement& a, const ClassicalState& x,
                         double tau);

/// -i delta[A] <phi, psi> - (<phi, H(A) psi> - <H(A) phi, psi>), sup over samples.
IdentityResidual axiom_a2_check(const AlgebraElement& a, const SmoothSection& phi, const SmoothSection& psi,
                                double tau);

/// <H(A)psi, H(B)phi> - i delta[A]<psi, H(B)phi> - (A <-> B) - i <psi, H([A,B]) phi>.
IdentityResidual axiom_a5_check(const AlgebraElement& a, const AlgebraElement& b, const SmoothSection& psi,
                                const SmoothSection& phi, double tau);

}  // namespace scb
