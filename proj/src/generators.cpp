#include "scb/generators.hpp"

#include <cmath>
#include <limits>

#include "scb/errors.hpp"

namespace scb {

namespace {

double bump1(double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }

// Integral of bump1 over [-1, 1].
double bump_mass() {
  static const double mass = [] {
    const int n = 20000;
    double sum = 0.0;
    for (int i = 1; i < n; ++i) sum += bump1(-1.0 + 2.0 * i / n);
    return sum * 2.0 / n;
  }();
  return mass;
}

double cell_volume(const RVec& spacing) { return spacing.prod(); }

std::vector<int> axis_extent(const SmoothingKernel& kernel, const RVec& spacing, const std::vector<int>& margin) {
  const int dim = static_cast<int>(spacing.size());
  if (static_cast<int>(kernel.radii.size()) != dim) throw InputError("kernel radii must match the group dimension");
  std::vector<int> extent(dim);
  for (int k = 0; k < dim; ++k) {
    extent[k] = static_cast<int>(std::ceil(kernel.radii[k] / spacing(k) - 1e-9));
    if (!margin.empty()) extent[k] += margin[k];
  }
  return extent;
}

template <typename F>
void for_each_index(const std::vector<int>& extent, F&& f) {
  const int dim = static_cast<int>(extent.size());
  std::vector<int> m(dim);
  for (int k = 0; k < dim; ++k) m[k] = -extent[k];
  while (true) {
    f(m);
    int k = dim - 1;
    while (k >= 0 && m[k] == extent[k]) {
      m[k] = -extent[k];
      --k;
    }
    if (k < 0) break;
    ++m[k];
  }
}

}  // namespace

SmoothingKernel SmoothingKernel::bump(std::vector<double> radii) {
  double norm = 1.0;
  for (double r : radii) {
    if (!(r > 0.0)) throw InputError("kernel radii must be positive");
    norm *= r * bump_mass();
  }
  SmoothingKernel k;
  k.radii = radii;
  k.gamma = [radii, norm](const RVec& t) {
    double v = 1.0 / norm;
    for (std::size_t a = 0; a < radii.size() && v != 0.0; ++a) v *= bump1(t(a) / radii[a]);
    return v;
  };
  return k;
}

SmoothingKernel SmoothingKernel::identity_mass() {
  SmoothingKernel k;
  k.point_mass = true;
  return k;
}

std::vector<HaarSample> kernel_quadrature(const SmoothingKernel& kernel, const OrbitSampling& sampling) {
  const GroupPtr& group = sampling.action().group;
  if (kernel.point_mass) return {HaarSample{group->identity(), 1.0}};
  const RVec& spacing = sampling.spacing();
  const double cell = cell_volume(spacing);
  std::vector<HaarSample> out;
  for_each_index(axis_extent(kernel, spacing, {}), [&](const std::vector<int>& m) {
    RVec t(spacing.size());
    for (Eigen::Index k = 0; k < t.size(); ++k) t(k) = spacing(k) * m[k];
    const double w = kernel.gamma(t);
    if (w == 0.0) return;
    out.push_back({group->compose_second_kind(t), w * cell * group->haar_density(t)});
  });
  return out;
}

Section garding_smooth(const SmoothingKernel& kernel, const Section& phi) {
  const OrbitSampling& sampling = *phi.sampling;
  const SparseSection source = sparse(phi);
  Section out = Section::zero(phi.sampling);
  for (const auto& sample : kernel_quadrature(kernel, sampling)) {
    for (const auto& [i, v] : transform_sparse(sampling, sample.point, source)) {
      out.values[i].coeffs += sample.weight * v.coeffs;
    }
  }
  return out;
}

/// Lattice family U_g phi over the margin-enlarged kernel box, shared by all
/// terms derived from one smoothing.
class GardingSource {
 public:
  GardingSource(const SmoothingKernel& kernel, const Section& phi, const std::vector<int>& margin)
      : sampling_(phi.sampling), kernel_(kernel) {
    const GroupPtr& group = sampling_->action().group;
    const RVec& spacing = sampling_->spacing();
    const double cell = cell_volume(spacing);
    const SparseSection source = sparse(phi);
    std::vector<int> pad = margin;
    if (pad.empty()) pad.assign(spacing.size(), 3);
    const std::vector<int> extent = axis_extent(kernel, spacing, pad);
    by_sample_.resize(sampling_->size());
    for_each_index(extent, [&](const std::vector<int>& m) {
      RVec t(spacing.size());
      bool edge = false;
      for (Eigen::Index k = 0; k < t.size(); ++k) {
        t(k) = spacing(k) * m[k];
        edge = edge || std::abs(m[k]) == extent[k];
      }
      const int node = static_cast<int>(nodes_.size());
      nodes_.push_back(group->compose_second_kind(t));
      cell_.push_back(cell * group->haar_density(t));
      boundary_.push_back(edge);
      images_.push_back(transform_sparse(*sampling_, nodes_.back(), source));
      for (int e = 0; e < static_cast<int>(images_.back().size()); ++e) {
        by_sample_[images_.back()[e].first].emplace_back(node, e);
      }
    });
  }

  const SamplingPtr& sampling() const { return sampling_; }

  double weight(const GroupElement& kinv, int node) const {
    const double w = cell_[node] * kernel_.gamma(factorize_second_kind(kinv * nodes_[node]));
    if (w != 0.0 && boundary_[node]) {
      throw SupportError("translated kernel reaches the edge of the quadrature window");
    }
    return w;
  }

  /// sum_nodes w(node) (U_node phi), accumulated into `acc` (dense).
  void accumulate(const GroupElement& k, std::vector<CVec>& acc, std::vector<char>& touched) const {
    const GroupElement kinv = k.inverse();
    for (int node = 0; node < static_cast<int>(nodes_.size()); ++node) {
      const double w = weight(kinv, node);
      if (w == 0.0) continue;
      for (const auto& [i, v] : images_[node]) {
        if (!touched[i]) {
          acc[i] = CVec::Zero(v.coeffs.size());
          touched[i] = 1;
        }
        acc[i] += w * v.coeffs;
      }
    }
  }

  CVec value(const GroupElement& k, int i) const {
    const GroupElement kinv = k.inverse();
    CVec out = CVec::Zero(sampling_->dims().size());
    for (const auto& [node, e] : by_sample_[i]) {
      const double w = weight(kinv, node);
      if (w != 0.0) out += w * images_[node][e].second.coeffs;
    }
    return out;
  }

 private:
  SamplingPtr sampling_;
  SmoothingKernel kernel_;
  std::vector<GroupElement> nodes_;
  std::vector<double> cell_;
  std::vector<bool> boundary_;
  std::vector<SparseSection> images_;
  std::vector<std::vector<std::pair<int, int>>> by_sample_;
};

SmoothSection SmoothSection::smooth(const SmoothingKernel& kernel, const Section& phi, Options options) {
  if (kernel.point_mass) throw InputError("smooth sections need a kernel with a density");
  SmoothSection s;
  auto source = std::make_shared<const GardingSource>(kernel, phi, options.margin);
  s.terms_.push_back({1.0, {}, phi.sampling->action().group->identity(), std::move(source)});
  return s;
}

const OrbitSampling& SmoothSection::sampling() const { return *sampling_ptr(); }

SamplingPtr SmoothSection::sampling_ptr() const {
  if (terms_.empty()) throw InputError("empty smooth section");
  return terms_.front().source->sampling();
}

SmoothSection SmoothSection::transformed(const GroupElement& g) const {
  SmoothSection out = *this;
  for (auto& t : out.terms_) {
    const GroupAction& action = t.source->sampling()->action();
    t.k = g * t.k;
    for (auto& f : t.factors) f = pullback(action, g, f);
  }
  return out;
}

SmoothSection SmoothSection::multiplied(const BaseFunction& alpha) const {
  SmoothSection out = *this;
  for (auto& t : out.terms_) t.factors.push_back(alpha);
  return out;
}

SmoothSection SmoothSection::operator+(const SmoothSection& o) const {
  if (!terms_.empty() && !o.terms_.empty() && sampling_ptr() != o.sampling_ptr()) {
    throw InputError("smooth sections live on different samplings");
  }
  SmoothSection out = *this;
  out.terms_.insert(out.terms_.end(), o.terms_.begin(), o.terms_.end());
  return out;
}

SmoothSection SmoothSection::operator-(const SmoothSection& o) const { return *this + o * cplx(-1.0); }

SmoothSection SmoothSection::operator*(cplx c) const {
  SmoothSection out = *this;
  for (auto& t : out.terms_) t.c *= c;
  return out;
}

Section SmoothSection::evaluate() const {
  const SamplingPtr sampling = sampling_ptr();
  const auto& pts = sampling->base_points();
  Section out = Section::zero(sampling);
  std::vector<CVec> acc(sampling->size());
  std::vector<char> touched(sampling->size());
  for (const auto& t : terms_) {
    std::fill(touched.begin(), touched.end(), 0);
    t.source->accumulate(t.k, acc, touched);
    for (int i = 0; i < sampling->size(); ++i) {
      if (!touched[i]) continue;
      cplx factor = t.c;
      for (const auto& f : t.factors) factor *= f(pts[i]);
      out.values[i].coeffs += factor * acc[i];
    }
  }
  return out;
}

FiberVector SmoothSection::value(int i) const {
  const SamplingPtr sampling = sampling_ptr();
  if (i < 0 || i >= sampling->size()) throw InputError("sample index out of range");
  const ClassicalState& y = sampling->base_points()[i];
  FiberVector out = FiberVector::zero(sampling->dims());
  for (const auto& t : terms_) {
    cplx factor = t.c;
    for (const auto& f : t.factors) factor *= f(y);
    if (factor == 0.0) continue;
    out.coeffs += factor * t.source->value(t.k, i);
  }
  return out;
}

FiberVector SmoothSection::value_at(const GroupElement& k, int i) const {
  const SamplingPtr sampling = sampling_ptr();
  const FiberVector pulled = transformed(k.inverse()).value(i);
  return sampling->action().fiber(k, sampling->base_points()[i]).apply(pulled);
}

SmoothSection generator(const AlgebraElement& a, const SmoothSection& psi, double tau) {
  if (!(tau > 0.0)) throw InputError("generator: tau must be positive");
  return (psi.transformed(exp(a, tau)) - psi.transformed(exp(a, -tau))) * (kI / (2.0 * tau));
}

GeneratorApplication generator_apply(const AlgebraElement& a, const Section& psi, double tau) {
  if (!(tau > 0.0)) throw InputError("generator_apply: tau must be positive");
  auto at = [&](double s) {
    return (section_transform(exp(a, s), psi) - section_transform(exp(a, -s), psi)) * (kI / (2.0 * s));
  };
  GeneratorApplication g{psi, a, tau, at(tau), std::numeric_limits<double>::quiet_NaN()};
  const OrbitSampling& sampling = *psi.sampling;
  if (sampling.aligned(exp(a, tau / 4.0))) {
    const Section half = at(tau / 2.0);
    const Section quarter = at(tau / 4.0);
    const double d1 = section_norm(g.result - half);
    const double d2 = section_norm(half - quarter);
    if (d2 > 0.0) g.order_estimate = std::log2(d1 / d2);
  }
  return g;
}

BaseFunction base_derivative(const GroupAction& action, const AlgebraElement& a, const BaseFunction& alpha,
                             double tau) {
  if (!(tau > 0.0)) throw InputError("base_derivative: tau must be positive");
  const GroupElement plus = exp(a, tau), minus = exp(a, -tau);
  auto base = action.base;
  auto eval = alpha.eval;
  return {[base, eval, plus, minus, tau](const ClassicalState& x) {
            return (eval(base(plus, x)) - eval(base(minus, x))) / (2.0 * tau);
          },
          alpha.smooth};
}

std::vector<cplx> base_derivative_samples(const OrbitSampling& sampling, const AlgebraElement& a,
                                          const BaseFunction& alpha, double tau) {
  const BaseFunction d = base_derivative(sampling.action(), a, alpha, tau);
  std::vector<cplx> out;
  out.reserve(sampling.size());
  for (const auto& x : sampling.base_points()) out.push_back(d(x));
  return out;
}

std::vector<cplx> pairing(const SmoothSection& phi, const SmoothSection& psi) {
  return pairing(phi.evaluate(), psi.evaluate());
}

std::vector<cplx> pairing_derivative(const AlgebraElement& a, const SmoothSection& phi, const SmoothSection& psi,
                                     double tau) {
  const GroupElement back = exp(a, -tau), fwd = exp(a, tau);
  const auto plus = pairing(phi.transformed(back), psi.transformed(back));
  const auto minus = pairing(phi.transformed(fwd), psi.transformed(fwd));
  std::vector<cplx> out(plus.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (plus[i] - minus[i]) / (2.0 * tau);
  return out;
}

double max_difference(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  if (a.size() != b.size()) throw InputError("max_difference: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

bool IdentityReport::pass() const {
  for (const auto& r : residuals) {
    if (!r.pass) return false;
  }
  return true;
}

void IdentityReport::require_pass() const {
  for (const auto& r : residuals) {
    if (!r.pass) {
      throw IdentityViolation("identity " + r.name + " does not converge (residual " + std::to_string(r.residual) +
                              " -> " + std::to_string(r.refined_residual) + ")");
    }
  }
}

IdentityResidual refine(const std::string& name, double tau, double required_order, double floor,
                        const std::function<double(double)>& residual_at) {
  IdentityResidual r;
  r.name = name;
  r.tau = tau;
  r.required_order = required_order;
  r.floor = floor;
  r.residual = residual_at(tau);
  r.refined_residual = residual_at(tau / 2.0);
  if (r.refined_residual > 0.0 && r.residual > 0.0) {
    r.order_estimate = std::log2(r.residual / r.refined_residual);
  } else {
    r.order_estimate = std::numeric_limits<double>::infinity();
  }
  // A refined residual at roundoff carries no order information.
  const bool at_floor = r.refined_residual <= floor;
  r.pass = std::isfinite(r.residual) && (at_floor || r.order_estimate >= required_order);
  return r;
}

IdentityReport identity_suite(const IdentityInputs& in, const SmoothSection& psi, double tau) {
  const OrbitSampling& sampling = psi.sampling();
  const double scale = std::max(1.0, section_norm(psi.evaluate()));
  const double floor = 1e-10 * scale;
  IdentityReport report;

  report.residuals.push_back(refine("linearity", tau, 1.9, floor, [&](double s) {
    const SmoothSection lhs = generator(in.a + in.b * 2.0, psi, s);
    const SmoothSection rhs = generator(in.a, psi, s) + generator(in.b, psi, s) * cplx(2.0);
    return section_norm((lhs - rhs).evaluate());
  }));

  report.residuals.push_back(refine("conjugation", tau, 1.9, floor, [&](double s) {
    const SmoothSection lhs = generator(in.a, psi.transformed(in.h.inverse()), s).transformed(in.h);
    const SmoothSection rhs = generator(adjoint(in.h, in.a), psi, s);
    return section_norm((lhs - rhs).evaluate());
  }));

  report.residuals.push_back(refine("commutator", tau, 1.0, 1e-8 * scale, [&](double s) {
    const SmoothSection ab = generator(in.a, generator(in.b, psi, s), s);
    const SmoothSection ba = generator(in.b, generator(in.a, psi, s), s);
    const SmoothSection c = generator(bracket(in.a, in.b), psi, s);
    return section_norm((ab - ba - c * kI).evaluate());
  }));

  report.residuals.push_back(refine("multiplication", tau, 1.9, floor, [&](double s) {
    const SmoothSection h_then_v = generator(in.a, psi.multiplied(in.alpha), s);
    const SmoothSection v_then_h = generator(in.a, psi, s).multiplied(in.alpha);
    const SmoothSection rhs = psi.multiplied(base_derivative(sampling.action(), in.a, in.alpha, s));
    return section_norm(((h_then_v - v_then_h) * kI - rhs).evaluate());
  }));

  report.residuals.push_back(refine("pairing-derivative", tau, 1.9, floor, [&](double s) {
    const Section value = psi.evaluate();
    const Section h = generator(in.a, psi, s).evaluate();
    const auto d = pairing_derivative(in.a, psi, psi, s);
    const auto left = pairing(value, h);
    const auto right = pairing(h, value);
    std::vector<cplx> lhs(d.size()), rhs(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      lhs[i] = -kI * d[i];
      rhs[i] = left[i] - right[i];
    }
    return max_difference(lhs, rhs);
  }));
  return report;
}

}  // namespace scb
