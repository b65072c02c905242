#include <algorithm>
#include <cmath>

#include "nhemit/dynamics.hpp"
#include "nhemit/errors.hpp"

namespace nhemit {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

Trajectory evolve_finite(const SparseH& h, const Eigen::VectorXcd& psi0, const std::vector<double>& times,
                         int emitters, const IntegratorOptions& opt, bool keep_states, const Observer& observer) {
  if (psi0.size() != h.rows()) throw PreconditionError("initial state does not match the Hamiltonian");
  if (emitters < 0 || emitters > psi0.size()) throw PreconditionError("bad emitter count");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] >= times[i - 1])) throw PreconditionError("time grid must be ascending");
  if (!times.empty() && times.front() < 0) throw PreconditionError("time grid must start at or after 0");

  const Eigen::Index n = psi0.size();
  Trajectory out;
  Eigen::VectorXcd y = psi0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y5(n);
  auto rhs = [&](const Eigen::VectorXcd& v, Eigen::VectorXcd& dv) { dv.noalias() = h * v; dv *= -I; };

  auto record = [&](double t) {
    out.times.push_back(t);
    out.emitters.push_back(y.head(emitters));
    if (keep_states) out.states.push_back(y);
    double p = y.squaredNorm();
    if (!out.norms.empty() && p > out.norms.back() + 1e-12) out.norm_monotone = false;
    out.norms.push_back(p);
    if (observer) observer(t, y);
  };

  double t = 0.0;
  double step = opt.initial_step;
  rhs(y, k1);
  for (double target : times) {
    while (t < target) {
      if (out.steps >= opt.max_steps) throw ConvergenceError("integrator step budget exhausted");
      double hstep = std::min(step, target - t);
      bool last = hstep >= target - t;
      tmp = y + hstep * a21 * k1;
      rhs(tmp, k2);
      tmp = y + hstep * (a31 * k1 + a32 * k2);
      rhs(tmp, k3);
      tmp = y + hstep * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(tmp, k4);
      tmp = y + hstep * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(tmp, k5);
      tmp = y + hstep * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(tmp, k6);
      y5 = y + hstep * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      rhs(y5, k7);
      tmp = hstep * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      // max norm: an RMS over mostly-empty lattice sites would hide local errors
      double err = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
        err = std::max(err, std::abs(tmp[i]) / sc);
      }
      ++out.steps;
      if (err <= 1.0) {
        t = last ? target : t + hstep;
        y.swap(y5);
        k1.swap(k7);
      }
      double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (err > 1.0) factor = std::min(factor, 1.0);
      // keep the unclipped step so short hops to output times do not shrink it
      if (!(last && err <= 1.0 && hstep < step)) step = hstep * factor;
      if (step < 1e-14 * std::max(1.0, std::abs(target)))
        throw ConvergenceError("integrator step size underflow");
    }
    record(t);
  }
  return out;
}

Eigen::VectorXcd emitter_excitation(const SiteIndexer& idx, int n) {
  if (n < 0 || n >= idx.emitters) throw PreconditionError("emitter index out of range");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index(idx.dimension()));
  v[n] = 1.0;
  return v;
}

Eigen::VectorXcd photon_excitation(const SiteIndexer& idx, const Cell& cell, int sublattice) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index(idx.dimension()));
  v[Eigen::Index(idx.site(cell, sublattice))] = 1.0;
  return v;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(std::max(n, 0));
  if (n == 1) v[0] = a;
  for (int i = 0; i < n && n > 1; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
  return v;
}

std::vector<double> logspace(double a, double b, int n) {
  if (a <= 0 || b <= 0) throw PreconditionError("logspace needs positive bounds");
  auto v = linspace(std::log(a), std::log(b), n);
  for (auto& x : v) x = std::exp(x);
  return v;
}

}  // namespace nhemit
