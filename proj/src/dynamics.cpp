#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "nhemit/dynamics.hpp"
#include "nhemit/errors.hpp"

namespace nhemit {

namespace {

// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double r = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = r;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1) * r * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (r * p1 - p0) / (r * r - 1.0);
      double step = p1 / dp;
      r -= step;
      if (std::abs(step) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 - r);
    w[i] = 1.0 / ((1.0 - r * r) * dp * dp);
  }
}

// Per-k factorization of h_k for repeated exponentials.
struct BlochTable {
  int dim, nsub, grid;
  std::vector<std::array<double, 2>> ks;
  std::vector<Eigen::MatrixXcd> h, vec, inv;
  std::vector<Eigen::VectorXcd> val;
  std::vector<char> direct;  // 1: eigenbasis too ill-conditioned, use expm

  BlochTable(const EffectiveModel& model, int n) : dim(model.dimension()), nsub(model.sublattices()), grid(n) {
    std::size_t count = dim == 1 ? std::size_t(n) : std::size_t(n) * n;
    for (std::size_t q = 0; q < count; ++q) {
      int i0 = int(dim == 1 ? q : q / n), i1 = int(dim == 1 ? 0 : q % n);
      std::array<double, 2> k{2.0 * M_PI * i0 / n, dim == 2 ? 2.0 * M_PI * i1 / n : 0.0};
      ks.push_back(k);
      Eigen::MatrixXcd hk = bloch(model, k);
      h.push_back(hk);
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(hk);
      Eigen::MatrixXcd v = es.eigenvectors();
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(v);
      double cond = svd.singularValues()(0) / svd.singularValues()(nsub - 1);
      bool bad = !(cond < 1e6);
      direct.push_back(bad ? 1 : 0);
      val.push_back(es.eigenvalues());
      vec.push_back(v);
      inv.push_back(bad ? Eigen::MatrixXcd() : Eigen::MatrixXcd(v.inverse()));
    }
  }

  Eigen::MatrixXcd propagate(std::size_t q, double t) const {
    if (direct[q]) return Eigen::MatrixXcd((-I * t * h[q]).exp());
    Eigen::VectorXcd ph = (-I * t * val[q].array()).exp();
    return vec[q] * ph.asDiagonal() * inv[q];
  }
};

double group_velocity_bound(const EffectiveModel& model) {
  double v = 0.0;
  for (const auto& hop : model.hoppings)
    v += std::abs(hop.amplitude) * std::hypot(double(hop.offset[0]), double(hop.offset[1]));
  return v;
}

}  // namespace

Eigen::MatrixXcd bare_propagator(const EffectiveModel& model, const Cell& r, double t, int k_grid) {
  BlochTable table(model, k_grid);
  const int ns = model.sublattices();
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(ns, ns);
  for (std::size_t q = 0; q < table.ks.size(); ++q) {
    double phase = table.ks[q][0] * r[0] + (model.dimension() == 2 ? table.ks[q][1] * r[1] : 0.0);
    sum += std::polar(1.0, phase) * table.propagate(q, t);
  }
  return sum / double(table.ks.size());
}

PhotonField photon_field_resolvent(const SelfEnergy& sigma, const Eigen::VectorXcd& c0,
                                   const std::vector<std::pair<Cell, int>>& sites, double dt, int steps,
                                   const PhotonFieldOptions& opt) {
  if (!(dt > 0) || steps < 0) throw PreconditionError("photon field needs dt > 0 and steps >= 0");
  if (opt.substeps < 1 || opt.gauss_order < 1) throw PreconditionError("bad panel settings");
  const EffectiveModel& model = sigma.model();
  const EmitterSet& ems = sigma.emitters();
  const int dim = model.dimension(), ns = model.sublattices();
  const int ne = int(ems.size());
  for (const auto& [cell, s] : sites)
    if (s < 0 || s >= ns) throw PreconditionError("site sublattice out of range");

  // Emitter amplitudes at the Gauss nodes of every panel.
  const double h = dt / opt.substeps;
  const int panels = steps * opt.substeps;
  std::vector<double> gx, gw;
  gauss_legendre(opt.gauss_order, gx, gw);
  const int order = opt.gauss_order;
  std::vector<double> node_times;
  for (int p = 0; p < panels; ++p)
    for (int q = 0; q < order; ++q) node_times.push_back((p + gx[q]) * h);
  std::vector<Eigen::VectorXcd> ce;
  if (!node_times.empty()) ce = emitter_amplitudes_resolvent(sigma, c0, node_times, opt.resolvent);

  // k grid large enough that the periodic images stay outside the light cone.
  const double t_max = dt * steps;
  int reach = 0;
  for (const auto& [cell, s] : sites)
    for (const auto& e : ems)
      for (int d = 0; d < dim; ++d) reach = std::max(reach, std::abs(cell[d] - e.cell[d]));
  const double need = 2.0 * (reach + 2.0 * group_velocity_bound(model) * t_max + 40.0);
  int grid = std::max(opt.k_grid, 16);
  while (grid < need) grid *= 2;
  const int limit = dim == 1 ? (1 << 16) : 1024;
  if (grid > limit) throw PreconditionError("propagation kernel exceeds the supported truncation radius");
  BlochTable table(model, grid);
  const std::size_t nk = table.ks.size();

  // Phase tables per (site, emitter) offset.
  const std::size_t nsite = sites.size();
  std::vector<std::vector<cplx>> phases(nsite * ne);
  for (std::size_t a = 0; a < nsite; ++a)
    for (int n = 0; n < ne; ++n) {
      auto& ph = phases[a * ne + n];
      ph.resize(nk);
      for (std::size_t q = 0; q < nk; ++q) {
        double arg = 0.0;
        for (int d = 0; d < dim; ++d) arg += table.ks[q][d] * (sites[a].first[d] - ems[n].cell[d]);
        ph[q] = std::polar(1.0, arg) / double(nk);
      }
    }

  // kernel[(lag*order + q)][site][emitter] at tau = lag*h + (1 - x_q) h
  std::vector<cplx> kernel(std::size_t(panels) * order * nsite * ne);
  std::vector<Eigen::VectorXcd> coupled(ne);  // couplings per emitter as a sublattice vector
  for (int n = 0; n < ne; ++n) {
    coupled[n] = Eigen::VectorXcd::Zero(ns);
    for (const auto& [s, g] : ems[n].couplings) coupled[n][s] += g;
  }
  // U_k(tau) g_n = V_k diag(e^{-i lambda tau}) V_k^{-1} g_n, with V^{-1} g_n cached.
  std::vector<cplx> proj(nk * ne * ns);
  for (std::size_t k = 0; k < nk; ++k) {
    if (table.direct[k]) continue;
    for (int n = 0; n < ne; ++n) {
      Eigen::VectorXcd y = table.inv[k] * coupled[n];
      for (int b = 0; b < ns; ++b) proj[(k * ne + n) * ns + b] = y[b];
    }
  }
  std::vector<cplx> w(nk * ne);  // [k][emitter] component on the site sublattice
  std::vector<cplx> ex(ns);
  for (int lag = 0; lag < panels; ++lag)
    for (int q = 0; q < order; ++q) {
      double tau = (lag + 1.0 - gx[q]) * h;
      std::size_t base = (std::size_t(lag) * order + q) * nsite * ne;
      for (int s = 0; s < ns; ++s) {
        bool used = false;
        for (const auto& st : sites) used = used || st.second == s;
        if (!used) continue;
        for (std::size_t k = 0; k < nk; ++k) {
          if (table.direct[k]) {
            Eigen::MatrixXcd uk = table.propagate(k, tau);
            for (int n = 0; n < ne; ++n) w[k * ne + n] = (uk.row(s) * coupled[n]).value();
            continue;
          }
          for (int b = 0; b < ns; ++b) ex[b] = std::exp(-I * tau * table.val[k][b]);
          for (int n = 0; n < ne; ++n) {
            cplx acc = 0.0;
            for (int b = 0; b < ns; ++b) acc += table.vec[k](s, b) * ex[b] * proj[(k * ne + n) * ns + b];
            w[k * ne + n] = acc;
          }
        }
        for (std::size_t a = 0; a < nsite; ++a) {
          if (sites[a].second != s) continue;
          for (int n = 0; n < ne; ++n) {
            const auto& ph = phases[a * ne + n];
            cplx acc = 0.0;
            for (std::size_t k = 0; k < nk; ++k) acc += ph[k] * w[k * ne + n];
            kernel[base + a * ne + n] = acc;
          }
        }
      }
    }

  PhotonField out;
  for (int j = 0; j <= steps; ++j) {
    out.times.push_back(j * dt);
    std::vector<cplx> field(nsite, cplx{});
    const int pj = j * opt.substeps;
    for (int p = 0; p < pj; ++p)
      for (int q = 0; q < order; ++q) {
        const auto& c = ce[std::size_t(p) * order + q];
        std::size_t base = (std::size_t(pj - p - 1) * order + q) * nsite * ne;
        for (std::size_t a = 0; a < nsite; ++a) {
          cplx acc = 0.0;
          for (int n = 0; n < ne; ++n) acc += kernel[base + a * ne + n] * c[n];
          field[a] += gw[q] * h * acc;
        }
      }
    for (auto& v : field) v *= -I;
    out.amplitudes.push_back(std::move(field));
  }
  return out;
}

double free_propagation_hn(double hopping, double kappa, int x, double t) {
  const double jp = hopping + 0.5 * kappa, jm = hopping - 0.5 * kappa;
  const int ax = std::abs(x);
  const double damp = std::exp(-2.0 * kappa * t);
  if (t == 0.0) return x == 0 ? 1.0 : 0.0;
  if (std::abs(jm) < 1e-15 * std::max(1.0, std::abs(jp))) {
    // only hops to the right survive
    if (x < 0) return 0.0;
    double lg = 2.0 * (ax * std::log(std::abs(jp) * t) - std::lgamma(ax + 1.0));
    return std::exp(lg) * damp;
  }
  if (std::abs(jp) < 1e-15 * std::max(1.0, std::abs(jm))) {
    if (x > 0) return 0.0;
    double lg = 2.0 * (ax * std::log(std::abs(jm) * t) - std::lgamma(ax + 1.0));
    return std::exp(lg) * damp;
  }
  const double ratio = std::pow(std::abs(jp / jm), double(x));
  const double s2 = 4.0 * hopping * hopping - kappa * kappa;
  if (s2 >= 0) {
    double b = std::cyl_bessel_j(double(ax), std::sqrt(s2) * t);
    return ratio * b * b * damp;
  }
  // imaginary argument: J_x(i y)^2 (-1)^x cancels the sign of the ratio
  double b = std::cyl_bessel_i(double(ax), std::sqrt(-s2) * t);
  return ratio * b * b * damp;
}

double gbz_radius(double hopping, double kappa) {
  const double jp = hopping + 0.5 * kappa, jm = hopping - 0.5 * kappa;
  if (!(jm > 0)) throw PreconditionError("GBZ radius needs J > kappa/2");
  return std::sqrt(jm / jp);
}

RunningWave running_wave_hn(double hopping, double kappa, cplx delta, double g, int x, double t, double radius,
                            int nodes) {
  const double jp = hopping + 0.5 * kappa, jm = hopping - 0.5 * kappa;
  const double gbz = gbz_radius(hopping, kappa);
  if (radius <= 0) radius = gbz;
  if (radius < gbz - 1e-12 || radius > 1.0 + 1e-12)
    throw PreconditionError("contour radius must lie between the GBZ radius and 1");
  const cplx dk = delta + I * kappa;

  // beta^2 times the denominator
  Eigen::Matrix<cplx, 5, 1> c;
  c << jp * jp, -dk * jp, -g * g, dk * jm, -jm * jm;  // descending powers
  Eigen::Matrix4cd comp = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 4; ++i) comp(0, i) = -c[i + 1] / c[0];
  for (int i = 1; i < 4; ++i) comp(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(comp);
  auto quartic = [&](cplx b) { return (((c[0] * b + c[1]) * b + c[2]) * b + c[3]) * b + c[4]; };
  auto dquartic = [&](cplx b) { return ((4.0 * c[0] * b + 3.0 * c[1]) * b + 2.0 * c[2]) * b + c[3]; };
  std::vector<cplx> roots;
  for (int i = 0; i < 4; ++i) {
    cplx b = es.eigenvalues()[i];
    for (int it = 0; it < 3; ++it) b -= quartic(b) / dquartic(b);
    roots.push_back(b);
  }
  for (cplx b : roots)
    if (std::abs(std::abs(b) - 1.0) < 1e-10) throw BranchAmbiguityError("integrand pole on the Brillouin zone");

  auto shape = [&](cplx b) { return jp * b - jm / b; };
  auto expo = [&](cplx b) { return std::exp(-I * (jp * b + jm / b) * t - kappa * t); };

  for (int attempt = 0;; ++attempt) {
    bool clash = false;
    for (cplx b : roots)
      if (std::abs(std::abs(b) - radius) < 1e-8) clash = true;
    if (!clash) break;
    if (attempt == 2) throw BranchAmbiguityError("integrand pole on the integration circle");
    radius = std::min(1.0, radius + 1e-6);
  }

  RunningWave out;
  out.radius = radius;
  out.poles = roots;
  for (cplx b : roots) {
    double m = std::abs(b);
    if (m > radius && m < 1.0) {
      out.residues += g * std::pow(b, double(1 - x)) * expo(b) * shape(b) / dquartic(b);
      ++out.poles_crossed;
    }
  }
  auto circle = [&](int n) {
    cplx sum = 0.0;
    for (int i = 0; i < n; ++i) {
      cplx b = std::polar(radius, 2.0 * M_PI * i / n);
      sum += g * std::pow(b, double(2 - x)) * expo(b) * shape(b) / quartic(b);
    }
    return sum / double(n);
  };
  int n = nodes > 0 ? nodes : 256;
  cplx val = circle(n);
  if (nodes <= 0) {
    for (;;) {
      cplx next = circle(2 * n);
      n *= 2;
      bool done = std::abs(next - val) < 1e-14 * std::max(1.0, std::abs(next));
      val = next;
      if (done) break;
      if (n > (1 << 22)) throw ConvergenceError("running-wave circle quadrature did not converge");
    }
  }
  out.circle = val;
  out.total = out.circle + out.residues;
  return out;
}

cplx BranchCut::amplitude(double t) const {
  return prefactor * std::exp(-I * branch_point * t) / std::pow(t, nu + 1.0);
}

BranchCut branch_cut_asymptotics(const SelfEnergy& sigma, cplx zbp, const Eigen::VectorXcd& c0,
                                 const Eigen::VectorXcd& observe) {
  const int ne = int(sigma.emitters().size());
  if (c0.size() != ne || observe.size() != ne) throw PreconditionError("emitter vector size mismatch");
  auto diff = [&](double r) {
    cplx z = zbp + I * r;
    return observe.dot((sigma.green(z, Sheet::first) - sigma.green(z, Sheet::second)) * c0);
  };
  const auto rs = logspace(1e-6, 1e-2, 25);
  std::vector<cplx> d;
  for (double r : rs) d.push_back(diff(r));
  // least squares slope of ln|D| against ln r
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    double lx = std::log(rs[i]), ly = std::log(std::abs(d[i]));
    if (!std::isfinite(ly)) throw ConvergenceError("sheet difference vanishes at the branch point");
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double m = double(rs.size());
  BranchCut out;
  out.branch_point = zbp;
  out.nu_fit = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  out.nu = std::round(2.0 * out.nu_fit) / 2.0;
  auto coeff = [&](std::size_t i) { return d[i] / std::pow(I * rs[i], out.nu); };
  out.coefficient = coeff(0);
  // spread over the two decades closest to the branch point
  for (std::size_t i = 0; i < rs.size() && rs[i] <= 1e-4 * (1 + 1e-9); ++i)
    out.spread = std::max(out.spread, std::abs(coeff(i) - out.coefficient) / std::abs(out.coefficient));
  if (out.spread > 0.05 || std::abs(out.nu_fit - out.nu) > 0.1)
    throw ConvergenceError("sheet difference is not a power law near the branch point");
  out.prefactor = std::exp(-I * M_PI * (out.nu + 1.0) / 2.0) * std::tgamma(out.nu + 1.0) * out.coefficient /
                  (2.0 * M_PI);
  return out;
}

SpaResult spa_poles(cplx delta, const std::function<cplx(cplx)>& sigma) {
  SpaResult out;
  cplx s;
  try {
    s = sigma(delta);
    const double h = 1e-6;
    cplx ds = (sigma(delta + h) - sigma(delta - h)) / (2.0 * h);
    if (!std::isfinite(std::abs(ds)) || std::abs(ds) > 1e8) out.breakdown = true;
  } catch (const Error&) {
    out.breakdown = true;
    s = cplx(std::numeric_limits<double>::infinity(), 0.0);
  }
  if (!std::isfinite(std::abs(s)) || std::abs(s) > 1e8) out.breakdown = true;
  if (!std::isfinite(std::abs(s))) s = cplx(std::nan(""), std::nan(""));
  out.pole = delta + s;
  out.rate = -out.pole.imag();
  return out;
}

cplx UnidirectionalPoles::amplitude(double t) const {
  return r_plus * std::exp(-I * z_plus * t) + r_minus * std::exp(-I * z_minus * t);
}

cplx UnidirectionalPoles::nearest(cplx delta) const {
  return std::abs(z_plus - delta) <= std::abs(z_minus - delta) ? z_plus : z_minus;
}

UnidirectionalPoles exact_unidirectional_poles(cplx delta, double g, double kappa) {
  cplx disc = std::sqrt((delta + I * kappa) * (delta + I * kappa) + 4.0 * g * g);
  if (std::abs(disc) < 1e-12)
    throw PreconditionError("dressed exceptional point: the two poles coincide and the amplitude is confluent");
  UnidirectionalPoles p;
  p.z_plus = 0.5 * (delta - I * kappa + disc);
  p.z_minus = 0.5 * (delta - I * kappa - disc);
  p.r_plus = (p.z_plus + I * kappa) / (p.z_plus - p.z_minus);
  p.r_minus = -(p.z_minus + I * kappa) / (p.z_plus - p.z_minus);
  return p;
}

}  // namespace nhemit
