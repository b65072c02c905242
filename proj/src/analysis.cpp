#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>

#include "nhemit/analysis.hpp"
#include "nhemit/boundstates.hpp"
#include "nhemit/errors.hpp"

namespace nhemit {

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("linear fit needs at least two (x, y) pairs");
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    res += r * r;
  }
  f.r_squared = syy > 0 ? std::clamp(1.0 - res / syy, 0.0, 1.0) : 1.0;
  return f;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y, double x_min, double x_max) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] >= x_min && x[i] <= x_max && std::isfinite(y[i])) {
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
  return linear_fit(xs, ys);
}

namespace {

// Diagonal similarity D^{-1} H D minimizing the Frobenius norm, found by Newton
// iteration on the log-scales. Skin-effect chains need scale ratios far beyond
// what LAPACK's power-of-two balancing reaches.
Eigen::VectorXd balancing_logscales(const SparseH& h) {
  const Eigen::Index n = h.rows();
  struct Edge { int i, j; double a; };
  std::vector<Edge> edges;
  for (Eigen::Index i = 0; i < h.outerSize(); ++i)
    for (SparseH::InnerIterator it(h, i); it; ++it)
      if (it.row() != it.col() && std::norm(it.value()) > 0)
        edges.push_back({int(it.row()), int(it.col()), std::norm(it.value())});
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  auto cost = [&](const Eigen::VectorXd& v) {
    double f = 0;
    for (const auto& e : edges) f += e.a * std::exp(2 * (v[e.j] - v[e.i]));
    return f;
  };
  double f = cost(u);
  for (int iter = 0; iter < 100 && f > 0; ++iter) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    for (const auto& e : edges) {
      double b = e.a * std::exp(2 * (u[e.j] - u[e.i]));
      grad[e.j] += 2 * b;
      grad[e.i] -= 2 * b;
      diag[e.i] += 4 * b;
      diag[e.j] += 4 * b;
      trip.emplace_back(e.i, e.j, -4 * b);
      trip.emplace_back(e.j, e.i, -4 * b);
    }
    if (grad.cwiseAbs().maxCoeff() <= 1e-10 * f) break;
    const double reg = 1e-10 * std::max(diag.maxCoeff(), 1e-300);
    for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(int(i), int(i), diag[i] + reg);
    Eigen::SparseMatrix<double> hess(n, n);
    hess.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(hess);
    if (solver.info() != Eigen::Success) break;
    Eigen::VectorXd step = solver.solve(-grad);
    double alpha = 1.0, next = f;
    Eigen::VectorXd trial;
    for (int k = 0; k < 40; ++k, alpha *= 0.5) {
      trial = u + alpha * step;
      next = cost(trial);
      if (next < f) break;
    }
    if (!(next < f) || trial.cwiseAbs().maxCoeff() > 300) break;
    const bool done = f - next <= 1e-14 * f;
    u = trial;
    f = next;
    if (done) break;
  }
  return u;
}

}  // namespace

PowerLawFit fit_power_law(const std::vector<double>& times, const std::vector<double>& values, const FitWindow& w) {
  if (times.size() != values.size()) throw PreconditionError("times and values differ in length");
  std::vector<double> lx, ly;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i], v = values[i];
    if (t < w.t_min || t > w.t_max || !(t > 0) || !(v > w.floor) || !(v > 1e-300) || !std::isfinite(v)) continue;
    lx.push_back(std::log(t));
    ly.push_back(std::log(v));
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  if (int(lx.size()) < w.min_samples)
    throw PreconditionError("power-law fit needs at least " + std::to_string(w.min_samples) + " usable samples");
  auto f = linear_fit(lx, ly);
  PowerLawFit out;
  out.exponent = f.slope;
  out.coefficient = std::exp(f.intercept);
  out.t_min = lo;
  out.t_max = hi;
  out.r_squared = f.r_squared;
  out.samples = int(lx.size());
  out.low_confidence = f.r_squared < 0.98;
  return out;
}

std::vector<LocalExponent> local_exponents(const std::vector<double>& times, const std::vector<double>& values,
                                           int half_width) {
  if (times.size() != values.size()) throw PreconditionError("times and values differ in length");
  if (half_width < 1) throw PreconditionError("window half-width must be positive");
  std::vector<LocalExponent> out;
  const int n = int(times.size());
  for (int i = half_width; i + half_width < n; ++i) {
    std::vector<double> lx, ly;
    for (int j = i - half_width; j <= i + half_width; ++j)
      if (times[j] > 0 && values[j] > 0) {
        lx.push_back(std::log(times[j]));
        ly.push_back(std::log(values[j]));
      }
    if (int(lx.size()) < 2 * half_width + 1) continue;
    out.push_back({times[i], linear_fit(lx, ly).slope});
  }
  return out;
}

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw PreconditionError("matrix must be square");
  const lapack_int n = lapack_int(m.rows());
  Eigen::MatrixXcd a = m;  // column major copy, overwritten
  Eigen::VectorXcd w(n);
  lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, w.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw ConvergenceError("zgeev failed with code " + std::to_string(info));
  return w;
}

SpectrumReport spectrum(const EffectiveModel& model, const EmitterSet& emitters, const Extent& extent,
                        Boundary boundary) {
  SiteIndexer idx{extent, model.sublattices(), int(emitters.size())};
  if (idx.dimension() > 4000) throw PreconditionError("dense diagonalization limited to 4000 states");
  SpectrumReport r;
  r.boundary = boundary;
  r.extent = extent;
  SparseH h = real_space_hamiltonian(model, emitters, extent, boundary);
  Eigen::VectorXd u = balancing_logscales(h);
  Eigen::MatrixXcd m = dense(h);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) *= std::exp(u[j] - u[i]);
  Eigen::VectorXcd w = eigenvalues(m);
  r.eigenvalues.assign(w.data(), w.data() + w.size());
  std::sort(r.eigenvalues.begin(), r.eigenvalues.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return r;
}

std::pair<SpectrumReport, SpectrumReport> spectra(const EffectiveModel& model, const EmitterSet& emitters,
                                                  const Extent& extent) {
  return {spectrum(model, emitters, extent, Boundary::periodic), spectrum(model, emitters, extent, Boundary::open)};
}

double mean_squared_displacement(const Eigen::VectorXcd& state, const SiteIndexer& idx, const Cell& origin,
                                 Boundary boundary) {
  if (state.size() != Eigen::Index(idx.dimension())) throw PreconditionError("state does not match the lattice");
  const int dim = idx.extent.dimension;
  double num = 0.0, den = 0.0;
  for (std::size_t i = std::size_t(idx.emitters); i < idx.dimension(); ++i) {
    const double p = std::norm(state[Eigen::Index(i)]);
    if (p == 0.0) continue;
    Cell c = idx.cell_of(i);
    double r2 = 0.0;
    for (int d = 0; d < dim; ++d) {
      const int n = idx.extent.cells[d];
      int dx = c[d] - origin[d];
      if (boundary == Boundary::periodic) {
        dx = ((dx % n) + n) % n;
        if (dx >= (n + 1) / 2) dx -= n;
      }
      r2 += double(dx) * dx;
    }
    num += r2 * p;
    den += p;
  }
  return den > 0 ? num / den : std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> msd(const Trajectory& tr, const SiteIndexer& idx, const Cell& origin, Boundary boundary) {
  if (tr.states.empty()) throw PreconditionError("trajectory carries no photon field");
  std::vector<double> out;
  bool any = false;
  for (const auto& s : tr.states) {
    out.push_back(mean_squared_displacement(s, idx, origin, boundary));
    any = any || std::isfinite(out.back());
  }
  if (!any) throw PreconditionError("photon field is empty at every time");
  return out;
}

std::vector<cplx> overlap_dynamics(const Eigen::VectorXcd& bound, const Trajectory& tr) {
  if (tr.states.empty()) throw PreconditionError("trajectory carries no states");
  std::vector<cplx> out;
  for (const auto& s : tr.states) {
    if (s.size() != bound.size()) throw PreconditionError("bound state and trajectory use different bases");
    out.push_back(bound.dot(s));
  }
  return out;
}

BicScaling bic_scaling(double hopping, double kappa, double g, const std::vector<int>& sizes, double t_plateau) {
  if (sizes.size() < 2) throw PreconditionError("need at least two sizes");
  BicScaling out;
  auto lat = catalog::alternating_loss(hopping, kappa);
  auto model = build_effective(lat);
  for (int cells : sizes) {
    if (cells < 4) throw PreconditionError("chain too short");
    const int xe = cells / 2;
    BicScalingRow row;
    row.cells = cells;
    row.weight = bic_construct(hopping, kappa, g, cells, xe).emitter_weight;
    row.predicted_plateau = row.weight * row.weight;

    EmitterSet ems({Emitter{{xe, 0}, {{0, g}}, 0.0}});
    auto h = real_space_hamiltonian(model, ems, extent_1d(cells), Boundary::open);
    SiteIndexer idx{extent_1d(cells), 2, 1};
    // The continuum tail relaxes at a rate ~ 1/L^2, so the time is doubled
    // until two successive populations agree.
    Eigen::VectorXcd psi = emitter_excitation(idx, 0);
    double t_now = 0.0, t_next = t_plateau, previous = -1.0;
    for (int attempt = 0;; ++attempt) {
      auto tr = evolve_finite(h, psi, {t_next - t_now}, 1, {}, true);
      psi = tr.states.back();
      t_now = t_next;
      const double p = std::norm(psi[0]);
      row.plateau = p;
      row.t_final = t_now;
      row.oscillation = previous < 0 ? 1.0 : std::abs(p - previous) / p;
      if (row.oscillation < 1e-3) break;
      if (attempt == 16) throw ConvergenceError("BIC plateau not reached");
      previous = p;
      t_next *= 2;
    }
    out.rows.push_back(row);
  }
  std::vector<double> x, y;
  for (const auto& r : out.rows) {
    x.push_back(1.0 / r.cells);
    y.push_back(r.weight);
  }
  auto f = linear_fit(x, y);
  out.slope = f.slope;
  out.intercept = f.intercept;
  out.linear_r_squared = f.r_squared;
  return out;
}

}  // namespace nhemit
