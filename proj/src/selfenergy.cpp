#include "nhemit/selfenergy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "nhemit/errors.hpp"

namespace nhemit {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

using RequestKey = std::tuple<int, int, int, int>;

int intern(std::map<RequestKey, int>& index, std::vector<ElementRequest>& list, const ElementRequest& r) {
  RequestKey key{r.offset[0], r.offset[1], r.to, r.from};
  auto it = index.find(key);
  if (it != index.end()) return it->second;
  const int id = int(list.size());
  list.push_back(r);
  index.emplace(key, id);
  return id;
}
}  // namespace

SelfEnergy::SelfEnergy(EffectiveModel model, EmitterSet emitters, std::shared_ptr<const LatticePropagator> propagator)
    : model_(std::move(model)), emitters_(std::move(emitters)), prop_(std::move(propagator)) {
  if (!prop_) throw PreconditionError("self-energy needs a propagator");
  if (prop_->dimension() != model_.dimension() || prop_->sublattices() != model_.sublattices())
    throw PreconditionError("propagator does not match the lattice");
  emitters_.validate(model_.lattice);
  std::map<RequestKey, int> index;
  for (std::size_t m = 0; m < emitters_.size(); ++m) {
    for (std::size_t n = 0; n < emitters_.size(); ++n) {
      const auto& em = emitters_[m];
      const auto& en = emitters_[n];
      Cell d{em.cell[0] - en.cell[0], em.cell[1] - en.cell[1]};
      for (const auto& [sm, gm] : em.couplings) {
        for (const auto& [sn, gn] : en.couplings) {
          const int id = intern(index, requests_, ElementRequest{d, sm, sn});
          terms_.push_back({int(m), int(n), id, std::conj(gm) * gn});
        }
      }
    }
  }
}

Eigen::MatrixXcd SelfEnergy::operator()(cplx z, Sheet sheet) const {
  const int n = int(emitters_.size());
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(n, n);
  if (requests_.empty()) return s;
  const auto values = prop_->elements(z, requests_, sheet);
  for (const auto& t : terms_) s(t.m, t.n) += t.weight * values[t.request];
  return s;
}

Eigen::MatrixXcd SelfEnergy::green(cplx z, Sheet sheet) const {
  const int n = int(emitters_.size());
  Eigen::MatrixXcd m = z * Eigen::MatrixXcd::Identity(n, n);
  m -= emitters_.detunings().asDiagonal();
  m -= (*this)(z, sheet);
  return m.partialPivLu().inverse();
}

std::vector<cplx> SelfEnergy::photon_amplitudes(cplx energy, const Eigen::VectorXcd& ce,
                                                const std::vector<std::pair<Cell, int>>& sites, Sheet sheet) const {
  if (ce.size() != Eigen::Index(emitters_.size())) throw PreconditionError("emitter amplitude vector has wrong size");
  std::map<RequestKey, int> index;
  std::vector<ElementRequest> reqs;
  struct Use { std::size_t site; int request; cplx weight; };
  std::vector<Use> uses;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto& [cell, s] = sites[i];
    for (std::size_t n = 0; n < emitters_.size(); ++n) {
      const auto& e = emitters_[n];
      Cell d{cell[0] - e.cell[0], cell[1] - e.cell[1]};
      for (const auto& [sn, g] : e.couplings)
        uses.push_back({i, intern(index, reqs, ElementRequest{d, s, sn}), g * ce[n]});
    }
  }
  std::vector<cplx> out(sites.size());
  if (reqs.empty()) return out;
  const auto values = prop_->elements(energy, reqs, sheet);
  for (const auto& u : uses) out[u.site] += u.weight * values[u.request];
  return out;
}

Eigen::MatrixXcd sigma_numeric(const EffectiveModel& model, const EmitterSet& emitters, cplx z, int grid,
                               double tol) {
  if (grid > 0) return SelfEnergy(model, emitters, quadrature_propagator(model, grid))(z);
  const std::size_t max_points = std::size_t(1) << 20;
  int n = model.dimension() == 1 ? 256 : 32;
  Eigen::MatrixXcd prev = SelfEnergy(model, emitters, quadrature_propagator(model, n))(z);
  while (true) {
    const int next = 2 * n;
    const std::size_t pts = model.dimension() == 1 ? std::size_t(next) : std::size_t(next) * next;
    if (pts > max_points) throw ConvergenceError("self-energy quadrature did not converge within 2^20 points");
    Eigen::MatrixXcd cur = SelfEnergy(model, emitters, quadrature_propagator(model, next))(z);
    const double scale = std::max(1.0, cur.cwiseAbs().maxCoeff());
    if ((cur - prev).cwiseAbs().maxCoeff() <= tol * scale) return cur;
    prev = std::move(cur);
    n = next;
  }
}

cplx sigma_hn_closed(cplx z, int x, double hopping, double kappa, cplx g_m, cplx g_n, Sheet sheet) {
  if (std::abs(std::abs(hopping) - 0.5 * kappa) < 1e-14)
    throw PreconditionError("unidirectional point |J| = kappa/2; use the unidirectional form");
  ChainPropagator chain(hopping + 0.5 * kappa, hopping - 0.5 * kappa, -I * kappa);
  return std::conj(g_m) * g_n * chain.phi(z, x, sheet);
}

cplx sigma_hn_unidirectional(cplx z, int x, double kappa, double g) {
  const cplx q = z + I * kappa;
  const double mod = std::abs(q);
  if (std::abs(mod - kappa) < 1e-12 * kappa) throw BranchAmbiguityError("z on the unidirectional loop");
  const bool outside = mod > kappa;
  if (x >= 0) return outside ? g * g / q * std::pow(kappa / q, x) : cplx{};
  if (outside) return 0.0;
  return -g * g / kappa * std::pow(q / kappa, -1 - x);
}

cplx sigma_pt_closed(cplx z, int x, PtPair pair, double hopping, double kappa, double g, Sheet sheet) {
  AlternatingLossPropagator prop(hopping, kappa);
  int to = 0, from = 0;
  switch (pair) {
    case PtPair::AA: break;
    case PtPair::BB: to = from = 1; break;
    case PtPair::AB: from = 1; break;
    case PtPair::BA: to = 1; break;
  }
  return g * g * prop.element(z, {x, 0}, to, from, sheet);
}

cplx sigma_2d_closed(cplx z, double kappa, double g) {
  return g * g * Swap2dPropagator(kappa).element(z, {0, 0}, 0, 0, Sheet::first);
}

cplx sigma_wick(cplx z, const std::function<cplx(cplx)>& hermitian_sigma) {
  return -I * hermitian_sigma(-I * z);
}

cplx sigma_wick_chain(cplx z, double hopping, double g, Sheet sheet) {
  return g * g * WickChainPropagator(hopping).element(z, {0, 0}, 0, 0, sheet);
}

namespace {
double winding_at(const EffectiveModel& model, cplx z, int n, double& max_step) {
  const int nb = model.sublattices();
  double total = 0.0;
  max_step = 0.0;
  cplx prev{};
  for (int i = 0; i <= n; ++i) {
    const double k = kTwoPi * i / n;
    Eigen::MatrixXcd m = bloch(model, {k, 0.0}) - z * Eigen::MatrixXcd::Identity(nb, nb);
    const cplx det = m.determinant();
    if (std::abs(det) < 1e-14) throw SingularResolventError("z on the PBC spectrum in winding number", k, 0.0);
    if (i > 0) {
      const double step = std::arg(det / prev);
      total += step;
      max_step = std::max(max_step, std::abs(step));
    }
    prev = det;
  }
  return total / kTwoPi;
}
}  // namespace

int winding_number(const EffectiveModel& model, cplx z) {
  if (model.dimension() != 1) throw PreconditionError("winding number is defined for 1D lattices");
  double step = 0.0;
  double w = winding_at(model, z, 2048, step);
  if (step > std::numbers::pi / 4) {
    w = winding_at(model, z, 16384, step);
    if (step > std::numbers::pi / 4) throw ConvergenceError("winding phase not resolved at 16384 points");
  }
  return int(std::lround(w));
}

HoppingRanges hopping_ranges(const EffectiveModel& model) {
  if (model.dimension() != 1 || model.sublattices() != 1)
    throw PreconditionError("hopping ranges need a single-band 1D lattice");
  HoppingRanges r;
  for (const auto& h : model.hoppings) {
    if (std::abs(h.amplitude) < 1e-14) continue;
    if (h.offset[0] > 0) r.right = std::max(r.right, h.offset[0]);
    if (h.offset[0] < 0) r.left = std::max(r.left, -h.offset[0]);
  }
  return r;
}

VanishingCheck maximal_winding_vanishing_check(const EffectiveModel& model, cplx z, int max_offset, int grid) {
  VanishingCheck out;
  out.ranges = hopping_ranges(model);
  out.index = winding_number(model, z);
  if (out.ranges.right > 0 && out.index == -out.ranges.right) out.predicted = VanishingSide::nonnegative;
  else if (out.ranges.left > 0 && out.index == out.ranges.left) out.predicted = VanishingSide::nonpositive;
  if (out.predicted == VanishingSide::none) return out;
  std::vector<ElementRequest> reqs;
  for (int x = 0; x <= max_offset; ++x)
    reqs.push_back({{out.predicted == VanishingSide::nonnegative ? x : -x, 0}, 0, 0});
  auto largest = [&](int n) {
    double m = 0.0;
    for (const auto& v : QuadraturePropagator(model, n).elements(z, reqs, Sheet::first)) m = std::max(m, std::abs(v));
    return m;
  };
  if (grid > 0) {
    out.max_forbidden = largest(grid);
  } else {
    // refine until the grid no longer changes the answer at the 1e-13 level
    int n = 4096;
    double prev = largest(n);
    while (true) {
      if (2 * n > (1 << 20)) throw ConvergenceError("vanishing check did not converge within 2^20 points");
      n *= 2;
      const double cur = largest(n);
      if (std::abs(cur - prev) < 1e-13) {
        prev = cur;
        break;
      }
      prev = cur;
    }
    out.max_forbidden = prev;
  }
  out.holds = out.max_forbidden < 1e-10;
  return out;
}

SpectrumSampler::SpectrumSampler(const EffectiveModel& model, int grid) {
  const int ny = model.dimension() == 1 ? 1 : grid;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < ny; ++j) {
      Eigen::MatrixXcd h = bloch(model, {kTwoPi * i / grid, model.dimension() == 1 ? 0.0 : kTwoPi * j / grid});
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h, false);
      for (Eigen::Index q = 0; q < es.eigenvalues().size(); ++q) points_.push_back(es.eigenvalues()[q]);
    }
  }
}

double SpectrumSampler::distance(cplx z) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& p : points_) d = std::min(d, std::abs(z - p));
  return d;
}

}  // namespace nhemit
