#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "scb/sections.hpp"

namespace scb {

/// Compactly supported kernel on second-kind coordinates.
struct SmoothingKernel {
  std::function<double(const RVec&)> gamma;
  /// Support is contained in prod_k [-radii_k, radii_k].
  std::vector<double> radii;
  /// Unit mass at the identity; gamma is then ignored.
  bool point_mass = false;

  /// Product of exp(-1/(1 - s^2)) bumps, s = t_k / r_k, with unit mass in
  /// the coordinate measure.
  static SmoothingKernel bump(std::vector<double> radii);
  static SmoothingKernel identity_mass();
};

/// Lattice quadrature of the kernel against the Haar measure; weights carry
/// gamma, the cell volume and the Haar density.
std::vector<HaarSample> kernel_quadrature(const SmoothingKernel& kernel, const OrbitSampling& sampling);

/// Psi = sum_i w_i U_{g_i} phi over the kernel quadrature.
Section garding_smooth(const SmoothingKernel& kernel, const Section& phi);

class GardingSource;

/// Element of the smooth domain: a finite combination of
///   c * v[alpha_1] ... v[alpha_m] U_k smooth(gamma, phi)
/// with arbitrary (not necessarily lattice) k. U_k acts on the kernel,
/// U_k smooth(gamma, phi) = smooth(gamma(k^-1 .), phi), so every group element
/// near the identity can be applied without leaving the lattice.
class SmoothSection {
 public:
  struct Options {
    /// Extra lattice layers around the kernel support, per axis.
    std::vector<int> margin;
  };

  static SmoothSection smooth(const SmoothingKernel& kernel, const Section& phi, Options options = {});

  const OrbitSampling& sampling() const;
  SamplingPtr sampling_ptr() const;

  SmoothSection transformed(const GroupElement& g) const;
  SmoothSection multiplied(const BaseFunction& alpha) const;
  SmoothSection operator+(const SmoothSection& o) const;
  SmoothSection operator-(const SmoothSection& o) const;
  SmoothSection operator*(cplx c) const;

  Section evaluate() const;
  /// Value at sample i.
  FiberVector value(int i) const;
  /// Value at the off-lattice orbit point u_k Z_i.
  FiberVector value_at(const GroupElement& k, int i) const;

  int terms() const { return static_cast<int>(terms_.size()); }

 private:
  struct Term {
    cplx c;
    std::vector<BaseFunction> factors;
    GroupElement k;
    std::shared_ptr<const GardingSource> source;
  };
  std::vector<Term> terms_;
};

/// H(A) = (i / 2 tau) (U_{exp(A tau)} - U_{exp(-A tau)}) on the smooth domain.
SmoothSection generator(const AlgebraElement& a, const SmoothSection& psi, double tau);

struct GeneratorApplication {
  Section input;
  AlgebraElement direction;
  double fd_step = 0.0;
  Section result;
  /// log2 of the change ratio between tau and tau/2 results versus tau/4;
  /// NaN when tau/4 is off the lattice.
  double order_estimate = 0.0;
};

/// Central difference on a lattice section; exp(+-tau A) must be aligned.
GeneratorApplication generator_apply(const AlgebraElement& a, const Section& psi, double tau);

/// (alpha(u_{exp(A tau)} X) - alpha(u_{exp(-A tau)} X)) / (2 tau).
BaseFunction base_derivative(const GroupAction& action, const AlgebraElement& a,
                             const BaseFunction& alpha, double tau);
std::vector<cplx> base_derivative_samples(const OrbitSampling& sampling, const AlgebraElement& a,
                                          const BaseFunction& alpha, double tau);

/// <phi, psi> at every sample.
std::vector<cplx> pairing(const SmoothSection& phi, const SmoothSection& psi);
/// delta[A] <phi, psi> through <phi, psi>_{u_{exp(A s)} Y} = <U_{exp(-A s)} phi, U_{exp(-A s)} psi>_Y.
std::vector<cplx> pairing_derivative(const AlgebraElement& a, const SmoothSection& phi,
                                     const SmoothSection& psi, double tau);

struct IdentityResidual {
  std::string name;
  double tau = 0.0;
  double residual = 0.0;
  double refined_residual = 0.0;
  double order_estimate = 0.0;
  double required_order = 2.0;
  double floor = 0.0;
  bool pass = false;
};

struct IdentityReport {
  std::vector<IdentityResidual> residuals;
  bool pass() const;
  /// Throws IdentityViolation naming the first failing identity.
  void require_pass() const;
};

/// Residual pair at tau and tau/2; passes when the refined residual is at the
/// roundoff floor or the measured order reaches the contract (10% measurement
/// slack on order 2).
IdentityResidual refine(const std::string& name, double tau, double required_order, double floor,
                        const std::function<double(double)>& residual_at);

struct IdentityInputs {
  AlgebraElement a;
  AlgebraElement b;
  BaseFunction alpha;
  /// Lattice element for the conjugation identity.
  GroupElement h;
};

/// Residuals (i) linearity, (ii) conjugation, (iii) commutator,
/// (iv) multiplication commutator, (v) pairing derivative.
IdentityReport identity_suite(const IdentityInputs& in, const SmoothSection& psi, double tau);

/// Sup over samples of |a_i - b_i|.
double max_difference(const std::vector<cplx>& a, const std::vector<cplx>& b);

}  // namespace scb
