#include <doctest.h>

#include <chrono>
#include <cmath>

#include "nhemit/dynamics.hpp"
#include "nhemit/errors.hpp"

using namespace nhemit;

namespace {

struct Setup {
  EffectiveModel model;
  EmitterSet emitters;
  SiteIndexer idx;
  SparseH h;
};

Setup hn_setup(double J, double g, cplx delta, int cells, int at) {
  auto lat = catalog::hatano_nelson(J, 1.0);
  Setup s{build_effective(lat), EmitterSet({Emitter{{at, 0}, {{0, g}}, delta}}), {}, {}};
  s.idx = SiteIndexer{extent_1d(cells), 1, 1};
  s.h = real_space_hamiltonian(s.model, s.emitters, extent_1d(cells), Boundary::periodic);
  return s;
}

}  // namespace

TEST_CASE("oracle integrator matches the Krylov reference") {
  // frozen from tests/oracles/dynamics_oracle.py (ring of 801, emitter at 400)
  struct Row { double g; cplx delta; double t; cplx ce, right3, left2; };
  const Row rows[] = {
      {2.0, 0.0, 1.0, 0.4258281674488622, 0.32172220562510462, {0, 0.15318469882403207}},
      {2.0, 0.0, 10.0, 0.00028849715521018468, 0.00019692854883629826, {0, 7.5697671697978411e-05}},
      {5.0, 0.0, 5.0, 0.015216948906459502, 0.0041786880221845474, {0, 2.1200207202054786e-05}},
      {0.5, {0, -1}, 10.0, 2.7227054442779148e-05, 4.9263483077423767e-06, {0, 2.2332061798040042e-06}},
  };
  for (const auto& r : rows) {
    auto s = hn_setup(2.5, r.g, r.delta, 801, 400);
    auto tr = evolve_finite(s.h, emitter_excitation(s.idx, 0), {0.0, r.t}, 1, {}, true);
    CHECK(std::abs(tr.emitters[1][0] - r.ce) < 1e-9);
    CHECK(std::abs(tr.states[1][s.idx.site({403, 0}, 0)] - r.right3) < 1e-9);
    CHECK(std::abs(tr.states[1][s.idx.site({398, 0}, 0)] - r.left2) < 1e-9);
    CHECK(tr.norm_monotone);
    CHECK(std::abs(tr.norms[0] - 1.0) < 1e-12);
    CHECK(tr.emitters[0][0] == cplx(1.0));
  }
}

TEST_CASE("free propagation follows the Bessel law") {
  auto lat = catalog::hatano_nelson(2.5, 1.0);
  auto model = build_effective(lat);
  SiteIndexer idx{extent_1d(401), 1, 0};
  auto h = real_space_hamiltonian(model, EmitterSet{}, extent_1d(401), Boundary::periodic);
  auto tr = evolve_finite(h, photon_excitation(idx, {200, 0}, 0), {3.0, 8.0}, 0, {}, true);
  double worst = 0.0;
  for (int k = 0; k < 2; ++k)
    for (int x = -50; x <= 50; ++x) {
      double p = std::norm(tr.states[k][idx.site({200 + x, 0}, 0)]);
      worst = std::max(worst, std::abs(p - free_propagation_hn(2.5, 1.0, x, tr.times[k])));
    }
  CHECK(worst < 1e-10);
  CHECK(free_propagation_hn(2.5, 1.0, 0, 0.0) == 1.0);
  // unitary limit: probabilities sum to one
  double total = 0.0;
  for (int x = -200; x <= 200; ++x) total += free_propagation_hn(1.0, 0.0, x, 7.0);
  CHECK(std::abs(total - 1.0) < 1e-10);
  // unidirectional limit and imaginary-argument branch stay finite and consistent
  CHECK(free_propagation_hn(0.5, 1.0, -1, 2.0) == 0.0);
  CHECK(std::abs(free_propagation_hn(0.5, 1.0, 2, 2.0) - std::pow(2.0, 4) / 4.0 * std::exp(-4.0)) < 1e-14);
  CHECK(std::abs(free_propagation_hn(0.5 + 1e-7, 1.0, 2, 2.0) - free_propagation_hn(0.5, 1.0, 2, 2.0)) < 1e-5);
  CHECK(std::abs(free_propagation_hn(0.5 - 1e-7, 1.0, 2, 2.0) - free_propagation_hn(0.5, 1.0, 2, 2.0)) < 1e-5);
}

TEST_CASE("unidirectional two-pole solution") {
  auto p = exact_unidirectional_poles(0.0, 1.0, 1.0);
  CHECK(std::abs(p.z_plus - cplx(std::sqrt(3.0) / 2, -0.5)) < 1e-14);
  CHECK(std::abs(p.z_minus - cplx(-std::sqrt(3.0) / 2, -0.5)) < 1e-14);
  CHECK(std::abs(p.r_plus + p.r_minus - 1.0) < 1e-14);
  CHECK(std::abs(p.amplitude(0.0) - 1.0) < 1e-14);
  // frozen Krylov reference, kappa = 1, g = 1, t = 7
  CHECK(std::abs(p.amplitude(7.0) - 0.025641038385769529) < 1e-12);

  auto lat = catalog::hn_unidirectional(1.0);
  auto model = build_effective(lat);
  for (cplx delta : {cplx(0.0), cplx(2.0, 0.0), cplx(0.3, -0.7)}) {
    EmitterSet ems({Emitter{{300, 0}, {{0, 0.8}}, delta}});
    auto h = real_space_hamiltonian(model, ems, extent_1d(601), Boundary::periodic);
    SiteIndexer idx{extent_1d(601), 1, 1};
    auto times = linspace(0.0, 20.0, 41);
    auto tr = evolve_finite(h, emitter_excitation(idx, 0), times, 1);
    auto poles = exact_unidirectional_poles(delta, 0.8, 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
      worst = std::max(worst, std::abs(tr.emitters[i][0] - poles.amplitude(times[i])));
    CHECK(worst < 1e-9);
  }
  auto g0 = exact_unidirectional_poles(cplx(0.4, -0.2), 0.0, 1.0);
  CHECK(std::abs(std::abs(g0.amplitude(3.0)) - std::exp(-0.6)) < 1e-14);
  CHECK_THROWS_AS(exact_unidirectional_poles({0.0, -1.0}, 0.0, 1.0), PreconditionError);
}

TEST_CASE("single-pole approximation and its breakdown") {
  auto sigma = [](double g) { return [g](cplx z) { return g * g / (z + I); }; };
  auto spa = spa_poles(2.0, sigma(0.2));
  auto exact = exact_unidirectional_poles(2.0, 0.2, 1.0);
  double rate = -exact.nearest(2.0).imag();
  CHECK(!spa.breakdown);
  CHECK(std::abs(spa.rate - rate) / rate < 0.05);
  auto broken = spa_poles({0.0, -1.0}, sigma(0.2));
  CHECK(broken.breakdown);
  auto at_ep = exact_unidirectional_poles({0.0, -1.0}, 0.2, 1.0);
  CHECK(std::abs(std::abs(at_ep.r_plus) - std::abs(at_ep.r_minus)) < 1e-12);
  // weak coupling: the approximation becomes exact
  auto weak = spa_poles(2.0, sigma(1e-4));
  CHECK(std::abs(weak.pole - exact_unidirectional_poles(2.0, 1e-4, 1.0).nearest(2.0)) < 1e-15);
}

TEST_CASE("resolvent engine against the oracle") {
  auto run = [](const Lattice& lat, double g, cplx delta, int sub, double tmax) {
    auto model = build_effective(lat);
    const int cells = 2001;
    EmitterSet ems({Emitter{{cells / 2, 0}, {{sub, g}}, delta}});
    SelfEnergy sigma(model, ems, closed_form_propagator(lat));
    auto times = linspace(0.0, tmax, 81);
    auto res = emitter_amplitudes_resolvent(sigma, Eigen::VectorXcd::Ones(1), times);
    auto h = real_space_hamiltonian(model, ems, extent_1d(cells), Boundary::periodic);
    SiteIndexer idx{extent_1d(cells), lat.sublattices, 1};
    auto tr = evolve_finite(h, emitter_excitation(idx, 0), times, 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) worst = std::max(worst, std::abs(res[i][0] - tr.emitters[i][0]));
    return worst;
  };
  CHECK(run(catalog::hatano_nelson(2.5, 1.0), 2.0, 0.0, 0, 20.0) < 1e-6);
  CHECK(run(catalog::hatano_nelson(2.5, 1.0), 5.0, 0.0, 0, 20.0) < 1e-6);
  CHECK(run(catalog::alternating_loss(1.0, 1.0), 1.5, 0.0, 0, 20.0) < 1e-6);
  CHECK(run(catalog::alternating_loss(1.0, 1.0), 1.5, 0.3, 1, 20.0) < 1e-6);
  CHECK(run(catalog::wick_chain(1.0), 1.0, 0.5, 0, 20.0) < 1e-6);
}

TEST_CASE("resolvent engine reproduces the frozen Krylov values") {
  auto lat = catalog::hatano_nelson(2.5, 1.0);
  SelfEnergy sigma(build_effective(lat), EmitterSet({Emitter{{0, 0}, {{0, 2.0}}, 0.0}}), closed_form_propagator(lat));
  auto res = emitter_amplitudes_resolvent(sigma, Eigen::VectorXcd::Ones(1), {0.0, 1.0, 10.0});
  CHECK(std::abs(res[0][0] - 1.0) < 1e-10);
  CHECK(std::abs(res[1][0] - 0.4258281674488622) < 1e-9);
  CHECK(std::abs(res[2][0] - 0.00028849715521018468) < 1e-9);
}

TEST_CASE("photon field by convolution") {
  auto lat = catalog::hatano_nelson(2.5, 1.0);
  auto model = build_effective(lat);
  const int cells = 801, at = 400;
  EmitterSet ems({Emitter{{at, 0}, {{0, 2.0}}, 0.0}});
  SelfEnergy sigma(model, ems, closed_form_propagator(lat));
  std::vector<std::pair<Cell, int>> sites;
  for (int x = -12; x <= 12; ++x) sites.push_back({{at + x, 0}, 0});
  auto field = photon_field_resolvent(sigma, Eigen::VectorXcd::Ones(1), sites, 0.5, 20);
  auto h = real_space_hamiltonian(model, ems, extent_1d(cells), Boundary::periodic);
  SiteIndexer idx{extent_1d(cells), 1, 1};
  auto tr = evolve_finite(h, emitter_excitation(idx, 0), field.times, 1, {}, true);
  double worst = 0.0;
  for (std::size_t j = 0; j < field.times.size(); ++j)
    for (std::size_t a = 0; a < sites.size(); ++a)
      worst = std::max(worst, std::abs(field.amplitudes[j][a] - tr.states[j][idx.site(sites[a].first, 0)]));
  CHECK(worst < 1e-6);

  // short times: c_r(t) / t -> -i g at the emitter, zero elsewhere
  auto early = photon_field_resolvent(sigma, Eigen::VectorXcd::Ones(1), {{{at, 0}, 0}, {{at + 1, 0}, 0}}, 1e-4, 1);
  CHECK(std::abs(early.amplitudes[1][0] / 1e-4 - cplx(0, -2.0)) < 1e-3);
  CHECK(std::abs(early.amplitudes[1][1] / 1e-4) < 1e-3);
}

TEST_CASE("photon field of the unidirectional chain stays on one side") {
  auto lat = catalog::hn_unidirectional(1.0);
  EmitterSet ems({Emitter{{0, 0}, {{0, 0.7}}, 0.2}});
  SelfEnergy sigma(build_effective(lat), ems, closed_form_propagator(lat));
  std::vector<std::pair<Cell, int>> sites;
  for (int x = -6; x <= 6; ++x) sites.push_back({{x, 0}, 0});
  auto field = photon_field_resolvent(sigma, Eigen::VectorXcd::Ones(1), sites, 0.5, 10);
  double left = 0.0, right = 0.0;
  for (const auto& row : field.amplitudes)
    for (std::size_t a = 0; a < sites.size(); ++a)
      (sites[a].first[0] < 0 ? left : right) = std::max(sites[a].first[0] < 0 ? left : right, std::abs(row[a]));
  CHECK(left < 1e-12);
  CHECK(right > 1e-2);
}

TEST_CASE("running wave on the generalized Brillouin zone") {
  const double J = 2.5, kappa = 1.0, g = 2.0;
  auto a = running_wave_hn(J, kappa, 0.0, g, 5, 8.0);
  CHECK(std::abs(a.radius - std::sqrt(2.0 / 3.0)) < 1e-12);
  // moving the contour only trades circle for residues
  auto b = running_wave_hn(J, kappa, 0.0, g, 5, 8.0, 1.0);
  auto c = running_wave_hn(J, kappa, 0.0, g, 5, 8.0, 0.9);
  CHECK(std::abs(a.total - b.total) < 1e-10);
  CHECK(std::abs(a.total - c.total) < 1e-10);
  CHECK(a.poles_crossed == 3);
  // direct k-integral of the running-wave expression at |beta| = 1
  cplx direct = 0.0;
  const int n = 1 << 14;
  for (int i = 0; i < n; ++i) {
    double k = 2.0 * M_PI * i / n;
    cplx hk = (J + kappa / 2) * std::exp(-I * k) + (J - kappa / 2) * std::exp(I * k) - I * kappa;
    cplx shape = (J + kappa / 2) * std::exp(-I * k) - (J - kappa / 2) * std::exp(I * k);
    direct += g * std::exp(I * k * 5.0 - I * hk * 8.0) / (hk - g * g / shape);
  }
  direct /= double(n);
  CHECK(std::abs(direct - a.total) < 1e-10);
  CHECK_THROWS_AS(running_wave_hn(J, kappa, 0.0, g, 5, 8.0, 0.5), PreconditionError);
}

TEST_CASE("branch-cut asymptotics of the Wick chain") {
  const double J = 1.0, g = 1.0;
  auto lat = catalog::wick_chain(J);
  SelfEnergy sigma(build_effective(lat), EmitterSet({Emitter{{0, 0}, {{0, g}}, 0.0}}), closed_form_propagator(lat));
  auto bc = branch_cut_asymptotics(sigma, 0.0, Eigen::VectorXcd::Ones(1), Eigen::VectorXcd::Ones(1));
  CHECK(bc.nu == 0.5);
  CHECK(std::abs(bc.coefficient - (-4.0 * std::sqrt(cplx(0, J)) / (g * g))) < 1e-3);
  CHECK(std::abs(bc.population(300.0) * std::pow(300.0, 3) * M_PI * J * J * J - 1.0) < 1e-3);
}

TEST_CASE("branch-cut exponents of the alternating-loss lattice") {
  const double J = 1.0, kappa = 1.0, g = 1.5;
  auto lat = catalog::alternating_loss(J, kappa);
  auto model = build_effective(lat);
  auto one = [&](int sub, cplx delta) {
    SelfEnergy sigma(model, EmitterSet({Emitter{{0, 0}, {{sub, g}}, delta}}), closed_form_propagator(lat));
    return branch_cut_asymptotics(sigma, 0.0, Eigen::VectorXcd::Ones(1), Eigen::VectorXcd::Ones(1));
  };
  auto a0 = one(0, 0.0);
  CHECK(a0.nu == -0.5);
  CHECK(std::abs(std::abs(a0.coefficient) - 4 * J * std::sqrt(kappa) / (g * g)) < 1e-3);
  auto a1 = one(0, 1.0);
  CHECK(a1.nu == 0.5);
  CHECK(std::abs(std::abs(a1.coefficient) - g * g / (J * std::sqrt(kappa))) < 1e-3);
  auto b = one(1, 0.5);
  CHECK(b.nu == 0.5);
  CHECK(std::abs(std::abs(b.coefficient) - 4 * J / (g * g * std::sqrt(kappa))) < 1e-3);

  EmitterSet pair({Emitter{{0, 0}, {{0, g}}, 2.0}, Emitter{{1, 0}, {{0, g}}, 2.0}});
  SelfEnergy sigma(model, pair, closed_form_propagator(lat));
  Eigen::VectorXcd sym = Eigen::VectorXcd::Ones(2) / std::sqrt(2.0);
  auto two = branch_cut_asymptotics(sigma, 0.0, sym, sym);
  CHECK(two.nu == 1.5);
  // the resolvent amplitude approaches the branch-cut law
  auto c = emitter_amplitudes_resolvent(sigma, sym, {600.0}, {.tolerance = 1e-13});
  CHECK(std::abs(std::norm(sym.dot(c[0])) / two.population(600.0) - 1.0) < 0.02);
}
