#include "scb/sections.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "scb/errors.hpp"

namespace scb {

std::size_t OrbitSampling::CellHash::operator()(const std::vector<long long>& c) const {
  std::size_t h = 1469598103934665603ull;
  for (long long v : c) {
    h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

std::vector<long long> OrbitSampling::cell(const ClassicalState& x) const {
  const RVec v = x.packed();
  const double size = 4.0 * options_.match_tolerance;
  std::vector<long long> c(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) c[k] = static_cast<long long>(std::floor(v(k) / size));
  return c;
}

int OrbitSampling::find(const ClassicalState& x) const {
  if (!x.finite() || x.n() != anchor_.n()) return -1;
  const std::vector<long long> centre = cell(x);
  const std::size_t d = centre.size();
  std::vector<long long> probe(d);
  // Visit the 3^d neighbouring cells.
  std::size_t combos = 1;
  for (std::size_t k = 0; k < d; ++k) combos *= 3;
  int best = -1;
  double best_dist = options_.match_tolerance;
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t rest = c;
    for (std::size_t k = 0; k < d; ++k) {
      probe[k] = centre[k] + static_cast<long long>(rest % 3) - 1;
      rest /= 3;
    }
    auto range = index_.equal_range(probe);
    for (auto it = range.first; it != range.second; ++it) {
      const double dist = distance(base_points_[it->second], x);
      if (dist <= best_dist) {
        best_dist = dist;
        best = it->second;
      }
    }
  }
  return best;
}

int OrbitSampling::insert(const ClassicalState& x) {
  if (!x.finite()) throw NumericalError("orbit sampling: non-finite base point", 0.0);
  if (find(x) >= 0) return -1;
  const int id = static_cast<int>(base_points_.size());
  base_points_.push_back(x);
  index_.emplace(cell(x), id);
  return id;
}

SamplingPtr OrbitSampling::lattice_box(std::shared_ptr<const GroupAction> action,
                                       const ClassicalState& anchor, const RVec& spacing,
                                       const std::vector<int>& lo, const std::vector<int>& hi,
                                       const Gauge* gauge, Options options) {
  if (!action) throw InputError("orbit sampling: no action");
  const int dim = action->group->dim();
  if (spacing.size() != dim || static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim) {
    throw InputError("orbit sampling: spacing and box must match the group dimension");
  }
  if (!(spacing.array() > 0.0).all()) throw InputError("orbit sampling: spacing must be positive");
  for (int k = 0; k < dim; ++k) {
    if (lo[k] > 0 || hi[k] < 0) throw InputError("orbit sampling: box must contain the identity");
  }
  if (!anchor.finite()) throw InputError("orbit sampling: non-finite anchor");
  if (!(options.match_tolerance > 0.0)) throw InputError("orbit sampling: match tolerance must be positive");

  std::shared_ptr<OrbitSampling> s(new OrbitSampling());
  s->action_ = std::move(action);
  s->anchor_ = anchor;
  s->spacing_ = spacing;
  s->options_ = options;
  if (gauge) s->gauge_ = std::make_shared<const Gauge>(*gauge);
  const GroupPtr& group = s->action_->group;

  // The identity goes first so that stabilizer duplicates collapse onto it.
  std::vector<std::vector<int>> indices{std::vector<int>(dim, 0)};
  std::vector<int> m(lo);
  while (true) {
    bool zero = true;
    for (int v : m) zero = zero && v == 0;
    if (!zero) indices.push_back(m);
    int k = dim - 1;
    while (k >= 0 && m[k] == hi[k]) {
      m[k] = lo[k];
      --k;
    }
    if (k < 0) break;
    ++m[k];
  }

  for (const auto& idx : indices) {
    RVec t(dim);
    for (int k = 0; k < dim; ++k) t(k) = spacing(k) * idx[k];
    GroupElement g = group->compose_second_kind(t);
    const int id = s->insert(s->action_->base(g, anchor));
    if (id < 0) continue;
    s->samples_.push_back(std::move(g));
    s->coords_.push_back(t);
    s->gauge_params_.push_back(0.0);
  }
  s->identity_index_ = 0;

  if (!options.gauge_copies.empty()) {
    if (!s->gauge_) throw InputError("orbit sampling: gauge copies need a gauge");
    const int plain = s->size();
    for (double alpha : options.gauge_copies) {
      if (alpha == 0.0) continue;
      for (int i = 0; i < plain; ++i) {
        const int id = s->insert(s->gauge_->lambda(alpha, s->base_points_[i]));
        if (id < 0) continue;
        s->samples_.push_back(s->samples_[i]);
        s->coords_.push_back(s->coords_[i]);
        s->gauge_params_.push_back(alpha);
      }
    }
  }
  return s;
}

bool OrbitSampling::aligned(const GroupElement& g) const {
  if (g.group != action_->group) return false;
  const RVec t = factorize_second_kind(g);
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    const double r = t(k) / spacing_(k);
    if (std::abs(r - std::round(r)) > 1e-7) return false;
  }
  return true;
}

void OrbitSampling::require_aligned(const GroupElement& g) const {
  if (g.group != action_->group) throw InputError("group element from a different group");
  if (!aligned(g)) throw AlignmentError("group element is not on the sampling lattice");
}

double OrbitSampling::recompute_residual() const {
  double worst = 0.0;
  for (int i = 0; i < size(); ++i) {
    ClassicalState x = action_->base(samples_[i], anchor_);
    if (gauge_params_[i] != 0.0) x = gauge_->lambda(gauge_params_[i], x);
    worst = std::max(worst, distance(x, base_points_[i]));
  }
  return worst;
}

double OrbitSampling::min_separation() const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < size(); ++i) {
    for (int j = i + 1; j < size(); ++j) best = std::min(best, distance(base_points_[i], base_points_[j]));
  }
  return best;
}

BaseFunction BaseFunction::constant(cplx c) {
  return {[c](const ClassicalState&) { return c; }, true};
}

Section Section::zero(SamplingPtr sampling) {
  Section s;
  s.values.assign(sampling->size(), FiberVector::zero(sampling->dims()));
  s.sampling = std::move(sampling);
  return s;
}

namespace {

void require_same(const Section& a, const Section& b) {
  if (a.sampling != b.sampling || a.values.size() != b.values.size()) {
    throw InputError("sections live on different samplings");
  }
}

}  // namespace

Section Section::operator+(const Section& o) const {
  require_same(*this, o);
  Section r = *this;
  for (int i = 0; i < size(); ++i) r.values[i].coeffs += o.values[i].coeffs;
  return r;
}

Section Section::operator-(const Section& o) const {
  require_same(*this, o);
  Section r = *this;
  for (int i = 0; i < size(); ++i) r.values[i].coeffs -= o.values[i].coeffs;
  return r;
}

Section Section::operator*(cplx s) const {
  Section r = *this;
  for (auto& v : r.values) v.coeffs *= s;
  return r;
}

SparseSection sparse(const Section& psi) {
  SparseSection out;
  for (int i = 0; i < psi.size(); ++i) {
    if (psi.values[i].coeffs.squaredNorm() > 0.0) out.emplace_back(i, psi.values[i]);
  }
  return out;
}

Section densify(SamplingPtr sampling, const SparseSection& s) {
  Section out = Section::zero(std::move(sampling));
  for (const auto& [i, v] : s) out.values[i].coeffs += v.coeffs;
  return out;
}

double section_norm(const Section& psi) {
  if (psi.values.empty()) throw InputError("section_norm: empty sampling");
  double best = 0.0;
  for (const auto& v : psi.values) best = std::max(best, v.norm());
  return best;
}

SparseSection transform_sparse(const OrbitSampling& sampling, const GroupElement& g,
                               const SparseSection& psi) {
  sampling.require_aligned(g);
  std::map<int, FiberVector> out;
  for (const auto& [i, v] : psi) {
    if (v.coeffs.squaredNorm() == 0.0) continue;
    const auto [y, u] = sampling.action().act(g, sampling.base_points()[i]);
    const int j = sampling.find(y);
    if (j < 0) throw SupportError("section transform: support leaves the sampled window");
    FiberVector w = u.apply(v);
    auto it = out.find(j);
    if (it == out.end()) {
      out.emplace(j, std::move(w));
    } else {
      it->second.coeffs += w.coeffs;
    }
  }
  return SparseSection(out.begin(), out.end());
}

Section section_transform(const GroupElement& g, const Section& psi) {
  return densify(psi.sampling, transform_sparse(*psi.sampling, g, sparse(psi)));
}

Section multiply(const BaseFunction& alpha, const Section& psi) {
  Section out = psi;
  const auto& pts = psi.sampling->base_points();
  for (int i = 0; i < psi.size(); ++i) out.values[i].coeffs *= alpha(pts[i]);
  return out;
}

BaseFunction pullback(const GroupAction& action, const GroupElement& g, const BaseFunction& alpha) {
  const GroupElement inv = g.inverse();
  auto base = action.base;
  auto eval = alpha.eval;
  return {[base, inv, eval](const ClassicalState& x) { return eval(base(inv, x)); }, alpha.smooth};
}

std::vector<cplx> pairing(const Section& phi, const Section& psi) {
  require_same(phi, psi);
  std::vector<cplx> out(phi.size());
  for (int i = 0; i < phi.size(); ++i) out[i] = inner(phi.values[i], psi.values[i]);
  return out;
}

FiberVector reconstruct_pointwise_operator(const GroupElement& g, const ClassicalState& x,
                                           const FiberVector& phi0, SamplingPtr sampling) {
  const int i = sampling->find(x);
  if (i < 0) throw InputError("reconstruct_pointwise_operator: point is not on the sampled orbit");
  if (!(phi0.dims == sampling->dims())) throw InputError("reconstruct_pointwise_operator: fiber mismatch");
  Section bump = Section::zero(sampling);
  bump.values[i] = phi0;
  const Section image = section_transform(g, bump);
  const int j = sampling->find(sampling->action().base(g, x));
  if (j < 0) throw SupportError("reconstruct_pointwise_operator: image leaves the sampled window");
  return image.values[j];
}

}  // namespace scb
