#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "nhemit/elliptic.hpp"
#include "nhemit/errors.hpp"
#include "nhemit/selfenergy.hpp"

namespace nhemit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kCircleGuard = 1e-12;

// Roots of a y^2 + b y + c with P'(y) at each root, plus which of them are
// enclosed by the unit circle on the requested sheet.
struct QuadraticRoots {
  cplx y[2];
  cplx dp[2];
  bool inside[2] = {false, false};
  int count = 0;
};

QuadraticRoots enclosed_roots(cplx a, cplx b, cplx c, Sheet sheet) {
  QuadraticRoots r;
  if (a == cplx{}) {
    if (b == cplx{}) return r;  // constant polynomial, no poles
    r.y[0] = -c / b;
    r.dp[0] = b;
    r.count = 1;
  } else {
    const cplx sd = std::sqrt(b * b - 4.0 * a * c);
    const double s = (std::conj(b) * sd).real() >= 0.0 ? 1.0 : -1.0;
    const cplx q = -0.5 * (b + s * sd);
    if (q == cplx{}) throw BranchAmbiguityError("double root at the origin");
    r.y[0] = q / a;
    r.y[1] = c / q;
    r.dp[0] = -s * sd;
    r.dp[1] = s * sd;
    r.count = 2;
  }
  double closest = std::numeric_limits<double>::infinity();
  for (int j = 0; j < r.count; ++j) {
    const double mod = std::abs(r.y[j]);
    if (std::abs(mod - 1.0) < kCircleGuard)
      throw BranchAmbiguityError("characteristic root on the unit circle; z is on the PBC spectrum");
    r.inside[j] = mod < 1.0;
    closest = std::min(closest, std::abs(std::log(mod)));
  }
  if (sheet == Sheet::second) {
    // Continue across the nearest cut: the root(s) closest to the unit
    // circle change side.
    for (int j = 0; j < r.count; ++j)
      if (std::abs(std::abs(std::log(std::abs(r.y[j]))) - closest) <= 1e-9 * std::max(1.0, closest))
        r.inside[j] = !r.inside[j];
  }
  for (int j = 0; j < r.count; ++j)
    if (r.inside[j] && r.dp[j] == cplx{}) throw BranchAmbiguityError("degenerate enclosed root");
  return r;
}

template <class F>
cplx residue_sum(const QuadraticRoots& r, F&& f) {
  cplx acc{};
  for (int j = 0; j < r.count; ++j)
    if (r.inside[j]) acc += f(r.y[j]) / r.dp[j];
  return acc;
}

cplx ipow(cplx y, int n) {
  cplx out{1.0, 0.0};
  cplx base = y;
  while (n > 0) {
    if (n & 1) out *= base;
    base *= base;
    n >>= 1;
  }
  return out;
}

void inverse_small(const cplx* h, int n, cplx z, cplx* out) {
  if (n == 1) {
    out[0] = 1.0 / (z - h[0]);
    return;
  }
  if (n == 2) {
    const cplx a = z - h[0], b = -h[1], c = -h[2], d = z - h[3];
    const cplx det = a * d - b * c;
    out[0] = d / det;
    out[1] = -b / det;
    out[2] = -c / det;
    out[3] = a / det;
    return;
  }
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> hm(h, n, n);
  Eigen::MatrixXcd m = z * Eigen::MatrixXcd::Identity(n, n) - hm;
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> inv = m.partialPivLu().inverse();
  std::copy(inv.data(), inv.data() + n * n, out);
}

std::vector<cplx> band_energies(const Eigen::MatrixXcd& h) {
  const int n = int(h.rows());
  if (n == 1) return {h(0, 0)};
  if (n == 2) {
    const cplx tr = h(0, 0) + h(1, 1);
    const cplx det = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
    const cplx sd = std::sqrt(tr * tr - 4.0 * det);
    return {0.5 * (tr + sd), 0.5 * (tr - sd)};
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h, false);
  std::vector<cplx> out(n);
  for (int i = 0; i < n; ++i) out[i] = es.eigenvalues()[i];
  return out;
}

}  // namespace

std::vector<cplx> LatticePropagator::elements(cplx z, const std::vector<ElementRequest>& requests,
                                              Sheet sheet) const {
  std::vector<cplx> out;
  out.reserve(requests.size());
  for (const auto& r : requests) out.push_back(element(z, r.offset, r.to, r.from, sheet));
  return out;
}

// ---------------------------------------------------------------- quadrature

QuadraturePropagator::QuadraturePropagator(const EffectiveModel& model, int grid)
    : dim_(model.dimension()), nsub_(model.sublattices()), grid_(grid) {
  if (grid < 4) throw PreconditionError("quadrature grid too small");
  const std::size_t npts = dim_ == 1 ? std::size_t(grid) : std::size_t(grid) * grid;
  ks_.reserve(npts);
  blochs_.reserve(npts * nsub_ * nsub_);
  eigen_.reserve(npts * nsub_);
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < (dim_ == 1 ? 1 : grid); ++j) {
      std::array<double, 2> k{kTwoPi * i / grid, dim_ == 1 ? 0.0 : kTwoPi * j / grid};
      Eigen::MatrixXcd h = bloch(model, k);
      ks_.push_back(k);
      for (const auto& e : band_energies(h)) eigen_.push_back(e);
      for (int a = 0; a < nsub_; ++a)
        for (int b = 0; b < nsub_; ++b) blochs_.push_back(h(a, b));
    }
  }
}

double QuadraturePropagator::distance_to_spectrum(cplx z) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& e : eigen_) d = std::min(d, std::abs(z - e));
  return d;
}

cplx QuadraturePropagator::element(cplx z, const Cell& r, int to, int from, Sheet sheet) const {
  return elements(z, {ElementRequest{r, to, from}}, sheet).front();
}

std::vector<cplx> QuadraturePropagator::elements(cplx z, const std::vector<ElementRequest>& requests,
                                                 Sheet sheet) const {
  if (sheet != Sheet::first) throw PreconditionError("k-grid quadrature only gives the first sheet");
  for (std::size_t i = 0; i < eigen_.size(); ++i) {
    if (std::abs(z - eigen_[i]) < 1e-9) {
      const auto& k = ks_[i / nsub_];
      throw SingularResolventError("z lies on the spectrum of h_k", k[0], k[1]);
    }
  }
  std::vector<cplx> acc(requests.size());
  std::vector<cplx> inv(nsub_ * nsub_);
  for (std::size_t p = 0; p < ks_.size(); ++p) {
    inverse_small(&blochs_[p * nsub_ * nsub_], nsub_, z, inv.data());
    const auto& k = ks_[p];
    for (std::size_t q = 0; q < requests.size(); ++q) {
      const auto& rq = requests[q];
      const double ph = k[0] * rq.offset[0] + (dim_ == 2 ? k[1] * rq.offset[1] : 0.0);
      acc[q] += std::polar(1.0, ph) * inv[rq.to * nsub_ + rq.from];
    }
  }
  const double norm = 1.0 / double(ks_.size());
  for (auto& v : acc) v *= norm;
  return acc;
}

// ---------------------------------------------------------------- chain

ChainPropagator::ChainPropagator(cplx t_right, cplx t_left, cplx onsite)
    : tr_(t_right), tl_(t_left), eps_(onsite) {
  if (tr_ == cplx{} && tl_ == cplx{}) throw ModelError("chain without hopping");
}

cplx ChainPropagator::phi(cplx z, int x, Sheet sheet) const {
  const cplx w = z - eps_;
  // For x >= 0 substitute y = e^{ik}; for x < 0, y = e^{-ik}.
  const cplx a = x >= 0 ? tl_ : tr_;
  const cplx c = x >= 0 ? tr_ : tl_;
  const auto roots = enclosed_roots(a, -w, c, sheet);
  const int n = std::abs(x);
  return -residue_sum(roots, [n](cplx y) { return ipow(y, n); });
}

cplx ChainPropagator::element(cplx z, const Cell& r, int to, int from, Sheet sheet) const {
  (void)to;
  (void)from;
  return phi(z, r[0], sheet);
}

// ---------------------------------------------------------------- alternating loss

AlternatingLossPropagator::AlternatingLossPropagator(double hopping, double kappa) : j_(hopping), kappa_(kappa) {
  if (hopping == 0.0) throw ModelError("alternating-loss chain needs nonzero hopping");
}

cplx AlternatingLossPropagator::element(cplx z, const Cell& r, int to, int from, Sheet sheet) const {
  const int x = r[0];
  if (z == cplx{} && to == 0 && from == 0) return 0.0;  // limit z sqrt-vanishing
  const double j2 = j_ * j_;
  const cplx a = -j2, c = -j2;
  const cplx b = -2.0 * j2 + z * (z + I * kappa_);
  auto roots = enclosed_roots(a, b, c, Sheet::first);
  if (sheet == Sheet::second) {
    roots.inside[0] = !roots.inside[0];
    roots.inside[1] = !roots.inside[1];
  }
  if (to == from) {
    const int n = std::abs(x);
    const cplx q = residue_sum(roots, [n](cplx y) { return ipow(y, n); });
    return (to == 0 ? z : z + I * kappa_) * q;
  }
  // A row / B column at offset x; the reverse is the same function at -x.
  const int xa = to == 0 ? x : -x;
  const int n0 = std::abs(xa), n1 = std::abs(xa - 1);
  return j_ * residue_sum(roots, [n0, n1](cplx y) { return ipow(y, n0) + ipow(y, n1); });
}

// ---------------------------------------------------------------- wick chain

WickChainPropagator::WickChainPropagator(double hopping)
    : j_(hopping), chain_(-I * hopping, -I * hopping, -2.0 * I * hopping) {
  if (!(hopping > 0.0)) throw ModelError("Wick chain needs a positive hopping");
}

cplx WickChainPropagator::element(cplx z, const Cell& r, int to, int from, Sheet sheet) const {
  if (r[0] != 0) return chain_.element(z, r, to, from, sheet);
  if (z == cplx{} || z == -4.0 * I * j_) throw BranchAmbiguityError("Wick chain branch point");
  const cplx s = 1.0 + 4.0 * I * j_ / z;
  if (std::abs(s.imag()) < 1e-15 && s.real() <= 0.0)
    throw BranchAmbiguityError("z on the Wick chain spectrum");
  const cplx v = 1.0 / (z * std::sqrt(s));
  return sheet == Sheet::first ? v : -v;
}

// ---------------------------------------------------------------- 2D swap model

Swap2dPropagator::Swap2dPropagator(double kappa) : kappa_(kappa) {
  if (!(kappa > 0.0)) throw ModelError("swap model needs a positive loss rate");
}

cplx Swap2dPropagator::element(cplx z, const Cell& r, int to, int from, Sheet sheet) const {
  if (r[0] != 0 || r[1] != 0 || to != from)
    throw PreconditionError("only on-site diagonal elements of the 2D propagator are known in closed form");
  if (sheet != Sheet::first) throw PreconditionError("second sheet not available for the 2D closed form");
  const cplx w = z + 2.0 * I * kappa_;
  if (w == cplx{}) throw BranchAmbiguityError("2D propagator singular at z = -2i kappa");
  const cplx m = std::pow(2.0 * kappa_ / w, 4);
  return 2.0 / (std::numbers::pi * w) * elliptic_k(m);
}

// ---------------------------------------------------------------- factories

std::shared_ptr<const LatticePropagator> quadrature_propagator(const EffectiveModel& model, int grid) {
  return std::make_shared<QuadraturePropagator>(model, grid);
}

std::shared_ptr<const LatticePropagator> closed_form_propagator(const Lattice& lattice) {
  auto p = [&](const char* key) { return lattice.params.at(key); };
  if (lattice.name == "hatano_nelson") {
    const double j = p("J"), k = p("kappa");
    return std::make_shared<ChainPropagator>(j + 0.5 * k, j - 0.5 * k, -I * k);
  }
  if (lattice.name == "hn_unidirectional") {
    const double k = p("kappa");
    return std::make_shared<ChainPropagator>(k, 0.0, -I * k);
  }
  if (lattice.name == "hermitian_chain") {
    const double j = p("J");
    const bool shifted = p("shifted") != 0.0;
    return std::make_shared<ChainPropagator>(shifted ? -j : j, shifted ? -j : j, shifted ? -2.0 * j : 0.0);
  }
  if (lattice.name == "alternating_loss") return std::make_shared<AlternatingLossPropagator>(p("J"), p("kappa"));
  if (lattice.name == "wick_chain") return std::make_shared<WickChainPropagator>(p("J"));
  if (lattice.name == "swap2d") return std::make_shared<Swap2dPropagator>(p("kappa"));
  return nullptr;
}

}  // namespace nhemit
