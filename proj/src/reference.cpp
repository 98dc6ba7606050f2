#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "scb/dynamics.hpp"
#include "scb/errors.hpp"

namespace scb {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPair {
 public:
  explicit FftPair(CVec& buffer) {
    auto* data = reinterpret_cast<fftw_complex*>(buffer.data());
    const int n = static_cast<int>(buffer.size());
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_1d(n, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_1d(n, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FftPair() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  FftPair(const FftPair&) = delete;
  FftPair& operator=(const FftPair&) = delete;

  void forward() { fftw_execute(forward_); }
  void backward() { fftw_execute(backward_); }

 private:
  fftw_plan forward_;
  fftw_plan backward_;
};

// Angular wavenumbers in FFTW's output order.
RVec wavenumbers(const Grid1D& grid) {
  const int n = grid.size;
  RVec k(n);
  const double base = 2.0 * std::numbers::pi / grid.length();
  for (int i = 0; i < n; ++i) k(i) = base * (i <= n / 2 ? i : i - n);
  return k;
}

int highest_mode(const FiberVector& f) {
  const double floor = 1e-10 * std::max(f.norm(), 1e-300);
  for (int k = static_cast<int>(f.coeffs.size()) - 1; k >= 0; --k) {
    if (std::abs(f.coeffs(k)) > floor) return k;
  }
  return 0;
}

double support_radius(int k_max) { return std::sqrt(2.0 * k_max + 1.0); }

// Fraction of the norm beyond 80% of the Nyquist wavenumber, and the edge
// amplitude relative to the peak.
void check_resolved(const CVec& psi, const Grid1D& grid, const char* when) {
  const double peak = psi.cwiseAbs().maxCoeff();
  if (peak == 0.0) return;
  const double edge = std::max(std::abs(psi(0)), std::abs(psi(grid.size - 1)));
  if (edge > 1e-8 * peak) {
    throw ResolutionError(std::string("reference_schrodinger: wavefunction reaches the grid edge ") + when);
  }
  CVec spec = psi;
  FftPair fft(spec);
  fft.forward();
  const RVec k = wavenumbers(grid);
  const double nyquist = std::numbers::pi / grid.dx;
  double high = 0.0, total = 0.0;
  for (int i = 0; i < grid.size; ++i) {
    const double w = std::norm(spec(i));
    total += w;
    if (std::abs(k(i)) > 0.8 * nyquist) high += w;
  }
  if (high > 1e-16 * total) {
    throw ResolutionError(std::string("reference_schrodinger: spectrum reaches Nyquist ") + when);
  }
}

}  // namespace

CVec ansatz_wavefunction(const ClassicalState& x, const FiberVector& f,
                         double eps, const Grid1D& grid) {
  if (x.n() != 1 || f.dims.n != 1) throw InputError("ansatz_wavefunction: one dimension only");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InputError("ansatz_wavefunction: eps must be positive");
  if (grid.size < 2 || !(grid.dx > 0.0)) throw InputError("ansatz_wavefunction: empty grid");
  if (!x.finite()) throw InputError("ansatz_wavefunction: non-finite classical state");

  const double q = x.Q(0), p = x.P(0);
  const double se = std::sqrt(eps);
  const int k_max = highest_mode(f);
  const double radius = support_radius(k_max);

  const double half_width = 8.0 * se * radius;
  if (grid.x0 > q - half_width || grid.x(grid.size - 1) < q + half_width) {
    throw ResolutionError("ansatz_wavefunction: grid does not cover the wave packet");
  }
  const double wavenumber = std::abs(p) / eps + radius / se;
  if (grid.dx * wavenumber > 2.0 * std::numbers::pi / 8.0) {
    throw ResolutionError("ansatz_wavefunction: fewer than 8 points per oscillation");
  }

  const int count = k_max + 1;
  const cplx global = std::exp(kI * (x.S / eps)) * std::pow(eps, -0.25);
  CVec psi(grid.size);
  for (int i = 0; i < grid.size; ++i) {
    const double dx = grid.x(i) - q;
    const RVec h = hermite_functions(dx / se, count);
    cplx amp = 0.0;
    for (int k = 0; k < count; ++k) amp += f.coeffs(k) * h(k);
    psi(i) = global * std::exp(kI * (p * dx / eps)) * amp;
  }
  return psi;
}

double l2_norm(const CVec& psi, const Grid1D& grid) {
  return std::sqrt(grid.dx * psi.squaredNorm());
}

CVec reference_schrodinger(const HamiltonianSpec& h, const CVec& psi0,
                           double eps, double T, const Grid1D& grid,
                           const ReferenceOptions& options) {
  if (h.n != 1 || !h.separable) throw InputError("reference_schrodinger: needs a separable 1-D Hamiltonian");
  if (!(eps > 0.0) || !std::isfinite(T)) throw InputError("reference_schrodinger: eps > 0 and finite T required");
  if (psi0.size() != grid.size || grid.size < 4) throw InputError("reference_schrodinger: grid/data mismatch");
  if (!(options.dt > 0.0)) throw InputError("reference_schrodinger: dt must be positive");
  if (T == 0.0) return psi0;

  check_resolved(psi0, grid, "initially");

  const auto& sep = *h.separable;
  const long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(T) / options.dt - 1e-9)));
  const double dt = T / static_cast<double>(steps);

  RVec v(grid.size);
  for (int i = 0; i < grid.size; ++i) v(i) = sep.potential(grid.x(i));

  // Potential phase per step must stay below pi where the packet lives.
  const double peak = psi0.cwiseAbs().maxCoeff();
  double vmin = 0.0, vmax = 0.0;
  bool seen = false;
  for (int i = 0; i < grid.size; ++i) {
    if (std::abs(psi0(i)) < 1e-6 * peak) continue;
    vmin = seen ? std::min(vmin, v(i)) : v(i);
    vmax = seen ? std::max(vmax, v(i)) : v(i);
    seen = true;
  }
  if ((vmax - vmin) * std::abs(dt) / eps > std::numbers::pi) {
    throw ResolutionError("reference_schrodinger: time step too large for the potential");
  }

  CVec half_v(grid.size);
  for (int i = 0; i < grid.size; ++i) half_v(i) = std::exp(-kI * (0.5 * dt * v(i) / eps));
  const RVec k = wavenumbers(grid);
  CVec kinetic(grid.size);
  const double scale = 1.0 / grid.size;
  for (int i = 0; i < grid.size; ++i) {
    kinetic(i) = scale * std::exp(-kI * (0.5 * eps * sep.inverse_mass * k(i) * k(i) * dt));
  }

  CVec psi = psi0;
  FftPair fft(psi);
  for (long s = 0; s < steps; ++s) {
    psi.array() *= half_v.array();
    fft.forward();
    psi.array() *= kinetic.array();
    fft.backward();
    psi.array() *= half_v.array();
  }
  if (!psi.allFinite()) throw NumericalError("reference_schrodinger: non-finite wavefunction", T);
  check_resolved(psi, grid, "at the final time");
  return psi;
}

Grid1D grid_for_trajectory(const Trajectory& trajectory, const FiberVector& f,
                           double eps) {
  if (trajectory.states.empty()) throw InputError("grid_for_trajectory: empty trajectory");
  if (!(eps > 0.0)) throw InputError("grid_for_trajectory: eps must be positive");
  // Propagation may fill every retained mode, so size for the full cutoff.
  const double radius = support_radius(std::max(f.dims.ncut - 1, 0));
  const double se = std::sqrt(eps);
  double qmin = trajectory.states.front().Q(0), qmax = qmin, pmax = 0.0;
  for (const auto& x : trajectory.states) {
    qmin = std::min(qmin, x.Q(0));
    qmax = std::max(qmax, x.Q(0));
    pmax = std::max(pmax, std::abs(x.P(0)));
  }
  const double margin = 8.0 * se * radius * 1.05 + 1e-9;
  const double lo = qmin - margin, hi = qmax + margin;
  const double wavenumber = pmax / eps + radius / se;
  const double dx_needed = 2.0 * std::numbers::pi / (8.0 * wavenumber) * 0.95;
  int n = 64;
  while ((hi - lo) / n > dx_needed) n *= 2;
  Grid1D g;
  g.size = n;
  g.dx = (hi - lo) / (n - 1);
  g.x0 = lo;
  return g;
}

double ansatz_error(const HamiltonianSpec& h, const ClassicalState& x0,
                    const FiberVector& f0, double eps, double T,
                    const AnsatzErrorOptions& options) {
  if (h.n != 1 || f0.dims.n != 1) throw InputError("ansatz_error: one dimension only");
  const FiberDims dims{1, std::max(options.ncut, f0.dims.ncut)};
  FiberVector f = FiberVector::zero(dims);
  f.coeffs.head(f0.coeffs.size()) = f0.coeffs;

  const Trajectory tr = classical_flow(h, x0, T, options.dt);
  const FiberOperator u = fluctuation_propagator(h, tr, dims);
  const Grid1D grid = grid_for_trajectory(tr, f, eps);

  const CVec start = ansatz_wavefunction(x0, f, eps, grid);
  const CVec reference = reference_schrodinger(h, start, eps, T, grid, {options.reference_dt});
  const CVec propagated = ansatz_wavefunction(tr.states.back(), u.apply(f), eps, grid);
  return l2_norm(propagated - reference, grid);
}

}  // namespace scb
