#include <algorithm>
#include <array>
#include <cmath>

#include "nhemit/dynamics.hpp"
#include "nhemit/errors.hpp"
#include "nhemit/parallel.hpp"

namespace nhemit {

namespace {

// 15-point Kronrod rule with its embedded 7-point Gauss rule.
constexpr std::array<double, 8> kx = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                      0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kw = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for kx[1], kx[3], kx[5], kx[7]
constexpr std::array<double, 4> gw = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct LineIntegrand {
  const SelfEnergy& sigma;
  const std::vector<Eigen::VectorXcd>& moments;  // C_n c0
  cplx centre;
  double eta;
  Eigen::VectorXcd c0;

  Eigen::VectorXcd operator()(double e) const {
    cplx z(e, eta);
    Eigen::VectorXcd r = sigma.green(z) * c0;
    cplx inv = 1.0 / (z - centre), p = inv;
    for (const auto& m : moments) {
      r -= p * m;
      p *= inv;
    }
    return r;
  }
};

struct Accumulator {
  std::vector<double> times;
  std::vector<double> growth;  // e^{eta t} / (2 pi)
  double growth_max = 0.0;
  int comps;
  std::vector<cplx> sum;       // [time][comp]
  std::size_t panels = 0, evaluations = 0;
};

// Integrates one panel, splitting until the Kronrod/Gauss difference meets the
// share of the tolerance proportional to its width.
void integrate_panel(const LineIntegrand& f, double a, double b, double budget, std::size_t& panel_cap,
                     Accumulator& acc, std::vector<cplx>& k_sum, std::vector<cplx>& g_sum) {
  struct Pending { double a, b; int depth; };
  std::vector<Pending> stack{{a, b, 0}};
  const std::size_t nt = acc.times.size();
  const int nc = acc.comps;
  std::array<Eigen::VectorXcd, 15> vals;
  std::array<double, 15> nodes;
  while (!stack.empty()) {
    Pending p = stack.back();
    stack.pop_back();
    double mid = 0.5 * (p.a + p.b), half = 0.5 * (p.b - p.a);
    for (int j = 0; j < 7; ++j) {
      nodes[j] = mid - half * kx[j];
      nodes[14 - j] = mid + half * kx[j];
    }
    nodes[7] = mid;
    for (int j = 0; j < 15; ++j) vals[j] = f(nodes[j]);
    acc.evaluations += 15;
    std::fill(k_sum.begin(), k_sum.end(), cplx{});
    std::fill(g_sum.begin(), g_sum.end(), cplx{});
    for (std::size_t i = 0; i < nt; ++i) {
      const double t = acc.times[i];
      for (int j = 0; j < 15; ++j) {
        int m = j <= 7 ? j : 14 - j;
        double wk = kw[m];
        double wg = (m % 2 == 1) ? gw[m / 2] : 0.0;
        cplx ph = std::polar(1.0, -nodes[j] * t);
        for (int c = 0; c < nc; ++c) {
          cplx v = ph * vals[j][c];
          k_sum[i * nc + c] += wk * v;
          if (wg != 0.0) g_sum[i * nc + c] += wg * v;
        }
      }
    }
    double scale = 0.0, resabs = 0.0;
    for (int j = 0; j < 15; ++j) {
      double m = vals[j].cwiseAbs().maxCoeff();
      scale = std::max(scale, m);
      resabs += kw[j <= 7 ? j : 14 - j] * m;
    }
    resabs *= half;
    // QUADPACK-style sharpening of the raw Kronrod/Gauss difference
    double err = 0.0;
    for (std::size_t i = 0; i < nt; ++i)
      for (int c = 0; c < nc; ++c) {
        double diff = std::abs(k_sum[i * nc + c] - g_sum[i * nc + c]) * half;
        if (resabs > 0 && diff > 0) diff *= std::min(1.0, std::pow(200.0 * diff / resabs, 1.5));
        err = std::max(err, diff * acc.growth[i]);
      }
    // below this the difference is rounding noise
    const double floor = 1e-13 * scale * half * acc.growth_max;
    bool accept = err <= std::max(budget * (p.b - p.a), floor) || p.depth > 40;
    if (!accept && panel_cap == 0) throw ConvergenceError("resolvent quadrature exceeded its panel budget");
    if (accept) {
      for (std::size_t q = 0; q < k_sum.size(); ++q) acc.sum[q] += half * k_sum[q];
      ++acc.panels;
    } else {
      --panel_cap;
      stack.push_back({mid, p.b, p.depth + 1});
      stack.push_back({p.a, mid, p.depth + 1});
    }
  }
}

EmitterSet shifted_emitters(const EmitterSet& emitters, const Cell& shift, int dim) {
  std::vector<Emitter> moved(emitters.begin(), emitters.end());
  for (auto& e : moved)
    for (int d = 0; d < dim; ++d) e.cell[d] += shift[d];
  return EmitterSet(std::move(moved));
}

}  // namespace

std::vector<Eigen::MatrixXcd> emitter_moments(const EffectiveModel& model, const EmitterSet& emitters, cplx shift,
                                              int order) {
  const int dim = model.dimension();
  const int ne = int(emitters.size());
  if (ne == 0) throw PreconditionError("no emitters");
  Cell lo{0, 0}, hi{0, 0};
  for (int d = 0; d < dim; ++d) {
    lo[d] = hi[d] = emitters[0].cell[d];
    for (const auto& e : emitters) {
      lo[d] = std::min(lo[d], e.cell[d]);
      hi[d] = std::max(hi[d], e.cell[d]);
    }
  }
  // a walk of `order` steps never reaches the periodic seam
  const int margin = (order + 1) * std::max(model.range, 1) + 2;
  Cell shift_cells{0, 0};
  std::array<int, 2> size{1, 1};
  for (int d = 0; d < dim; ++d) {
    shift_cells[d] = margin - lo[d];
    size[d] = hi[d] - lo[d] + 2 * margin + 1;
  }
  EmitterSet moved = shifted_emitters(emitters, shift_cells, dim);
  Extent ext = dim == 1 ? extent_1d(size[0]) : extent_2d(size[0], size[1]);
  SparseH h = real_space_hamiltonian(model, moved, ext, Boundary::periodic);

  std::vector<Eigen::MatrixXcd> out(order + 1, Eigen::MatrixXcd(ne, ne));
  Eigen::VectorXcd v(h.rows()), w(h.rows());
  for (int n = 0; n < ne; ++n) {
    v.setZero();
    v[n] = 1.0;
    for (int k = 0; k <= order; ++k) {
      out[k].col(n) = v.head(ne);
      w.noalias() = h * v;
      w -= shift * v;
      v.swap(w);
    }
  }
  return out;
}

std::vector<Eigen::VectorXcd> emitter_amplitudes_resolvent(const SelfEnergy& sigma, const Eigen::VectorXcd& c0,
                                                           const std::vector<double>& times,
                                                           const ResolventOptions& opt,
                                                           ResolventDiagnostics* diag) {
  const int ne = int(sigma.emitters().size());
  if (c0.size() != ne) throw PreconditionError("initial emitter vector has the wrong size");
  if (opt.expansion_order < 1) throw PreconditionError("expansion order must be positive");
  if (!(opt.tolerance > 0)) throw PreconditionError("tolerance must be positive");
  std::vector<Eigen::VectorXcd> out;
  if (times.empty()) return out;
  double t_max = 0.0;
  for (double t : times) {
    if (t < 0) throw PreconditionError("negative time");
    t_max = std::max(t_max, t);
  }

  const double eta = opt.eta > 0 ? opt.eta : std::min(0.5, 2.0 / std::max(t_max, 1e-300));
  const int order = opt.expansion_order;
  const cplx mean = sigma.emitters().detunings().mean();
  // Centre the expansion roughly half the emitter-visible spectral radius below
  // the axis so the subtracted terms stay O(1) near the real line.
  double shift = opt.shift;
  if (shift <= 0) {
    auto probe = emitter_moments(sigma.model(), sigma.emitters(), mean, order);
    double rho = 0.0;
    for (int n = 1; n <= order; ++n) rho = std::max(rho, std::pow((probe[n] * c0).norm() / c0.norm(), 1.0 / n));
    shift = std::max(1.0, 0.5 * rho);
  }
  const cplx centre = mean - I * shift;
  auto mats = emitter_moments(sigma.model(), sigma.emitters(), centre, order);
  std::vector<Eigen::VectorXcd> moments;
  for (int n = 0; n < order; ++n) moments.push_back(mats[n] * c0);
  const double lead = (mats[order] * c0).norm();

  // Window from the size of the first neglected term of the expansion.
  const double growth_max = std::exp(eta * t_max);
  double radius = 1.0;
  for (int n = 1; n <= order; ++n) radius = std::max(radius, std::pow((mats[n] * c0).norm(), 1.0 / n));
  double window = opt.window;
  if (window <= 0) {
    double tail = std::pow(4.0 * lead * growth_max / (M_PI * order * opt.tolerance), 1.0 / order);
    window = std::max({tail, 3.0 * radius, 10.0});
  }

  Accumulator acc;
  acc.times = times;
  acc.comps = ne;
  for (double t : times) acc.growth.push_back(std::exp(eta * t) / (2.0 * M_PI));
  acc.growth_max = growth_max / (2.0 * M_PI);
  acc.sum.assign(times.size() * ne, cplx{});

  LineIntegrand f{sigma, moments, centre, eta, c0};
  const double lo = centre.real() - window, hi = centre.real() + window;
  const double width0 = std::min(4.0 / std::max(t_max, 1e-300), window / 32.0);
  const std::size_t initial = std::size_t(std::ceil((hi - lo) / width0));
  const double budget = 0.5 * opt.tolerance / (hi - lo);

  // Fixed blocks summed in order keep the result independent of the thread count.
  const std::size_t blocks = std::min<std::size_t>(initial, 64);
  std::vector<Accumulator> partial(blocks, acc);
  const std::size_t cap_per_block = opt.max_panels / blocks + 1;
  parallel_for(blocks, [&](std::size_t b) {
    Accumulator& a = partial[b];
    std::vector<cplx> ks(a.sum.size()), gs(a.sum.size());
    std::size_t cap = cap_per_block;
    std::size_t first = initial * b / blocks, last = initial * (b + 1) / blocks;
    for (std::size_t p = first; p < last; ++p) {
      double pa = lo + (hi - lo) * double(p) / double(initial);
      double pb = lo + (hi - lo) * double(p + 1) / double(initial);
      integrate_panel(f, pa, pb, budget, cap, a, ks, gs);
    }
  });
  for (const auto& a : partial) {
    for (std::size_t q = 0; q < acc.sum.size(); ++q) acc.sum[q] += a.sum[q];
    acc.panels += a.panels;
    acc.evaluations += a.evaluations;
  }

  out.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(ne);
    // analytic transform of the subtracted terms: (-it)^n / n! e^{-i a t}
    cplx coef = std::exp(-I * centre * t);
    for (int n = 0; n < order; ++n) {
      c += coef * moments[n];
      coef *= -I * t / double(n + 1);
    }
    for (int m = 0; m < ne; ++m) c[m] += I * acc.growth[i] * acc.sum[i * ne + m];
    out.push_back(std::move(c));
  }
  if (diag) *diag = {eta, window, acc.panels, acc.evaluations};
  return out;
}

}  // namespace nhemit
