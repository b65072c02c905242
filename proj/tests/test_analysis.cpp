#include <doctest.h>

#include <cmath>
#include <random>

#include "nhemit/analysis.hpp"
#include "nhemit/errors.hpp"

using namespace nhemit;

TEST_CASE("power-law fit recovers synthetic exponents") {
  std::vector<double> t, y;
  for (double x : logspace(10, 1000, 50)) {
    t.push_back(x);
    y.push_back(0.37 * std::pow(x, -3.2));
  }
  auto f = fit_power_law(t, y);
  CHECK(std::abs(f.exponent + 3.2) < 1e-10);
  CHECK(std::abs(f.coefficient / 0.37 - 1.0) < 1e-10);
  CHECK(f.r_squared > 0.999999);
  CHECK_FALSE(f.low_confidence);
  // transient and noise-floor samples are dropped
  t.push_back(1.0);
  y.push_back(5.0);
  t.push_back(2000.0);
  y.push_back(1e-30);
  auto g = fit_power_law(t, y);
  CHECK(g.samples == 50);
  CHECK(std::abs(g.exponent + 3.2) < 1e-10);
}

TEST_CASE("exponential decay is flagged on log-log axes") {
  std::vector<double> t, y;
  for (double x : linspace(5, 500, 200)) {
    t.push_back(x);
    y.push_back(std::exp(-x));
  }
  auto f = fit_power_law(t, y);
  CHECK(f.low_confidence);
  CHECK_THROWS_AS(fit_power_law({10, 20, 30}, {1, 2, 3}), PreconditionError);
}

TEST_CASE("local exponents follow a crossover") {
  std::vector<double> t, y;
  for (double x : logspace(1, 1e4, 120)) {
    t.push_back(x);
    y.push_back(1.0 / x + 100.0 / (x * x * x));  // t^-3 early, t^-1 late
  }
  auto le = local_exponents(t, y, 3);
  CHECK(le.front().exponent < -2.9);
  CHECK(le.back().exponent > -1.01);
}

TEST_CASE("periodic and open spectra of the Hatano-Nelson chain") {
  const double J = 0.6, kappa = 1.0;
  auto model = build_effective(catalog::hatano_nelson(J, kappa));
  auto [pbc, obc] = spectra(model, EmitterSet{}, extent_1d(50));
  REQUIRE(pbc.eigenvalues.size() == 50);
  REQUIRE(obc.eigenvalues.size() == 50);
  double ellipse = 0.0, flat = 0.0;
  for (cplx e : pbc.eigenvalues)
    ellipse = std::max(ellipse, std::abs(std::pow(e.real() / (2 * J), 2) + std::pow(e.imag() + kappa, 2) - 1.0));
  CHECK(ellipse < 1e-10);
  // open chain: a Hermitian-like line at Im = -kappa with the reduced bandwidth
  const double band = 2 * std::sqrt(J * J - kappa * kappa / 4);
  std::vector<double> expected;
  for (int n = 1; n <= 50; ++n) expected.push_back(band * std::cos(M_PI * n / 51.0));
  std::sort(expected.begin(), expected.end());
  for (int n = 0; n < 50; ++n) {
    flat = std::max(flat, std::abs(obc.eigenvalues[n].imag() + kappa));
    CHECK(std::abs(obc.eigenvalues[n].real() - expected[n]) < 1e-6);
  }
  CHECK(flat < 1e-6);

  // strong coupling: the open spectrum approaches two vacancy-split chains
  EmitterSet strong({Emitter{{20, 0}, {{0, 200.0}}, 0.0}});
  auto with = spectrum(model, strong, extent_1d(50), Boundary::open);
  auto left = spectrum(model, EmitterSet{}, extent_1d(20), Boundary::open);
  auto right = spectrum(model, EmitterSet{}, extent_1d(29), Boundary::open);
  int matched = 0;
  for (const auto* part : {&left, &right})
    for (cplx e : part->eigenvalues)
      for (cplx f : with.eigenvalues)
        if (std::abs(e - f) < 1e-2) {
          ++matched;
          break;
        }
  CHECK(matched == 49);
}

TEST_CASE("mean squared displacement") {
  auto model = build_effective(catalog::swap2d(1.0));
  auto run = [&](Cell at) {
    auto ext = extent_2d(24, 24);
    EmitterSet ems({Emitter{at, {{0, 0.4}}, 0.0}});
    auto h = real_space_hamiltonian(model, ems, ext, Boundary::periodic);
    SiteIndexer idx{ext, 2, 1};
    auto tr = evolve_finite(h, emitter_excitation(idx, 0), {0.0, 2.0, 4.0}, 1, {}, true);
    return msd(tr, idx, at, Boundary::periodic);
  };
  auto a = run({12, 12}), b = run({3, 20});
  CHECK(std::isnan(a[0]));
  for (int i = 1; i < 3; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);

  // free photon: diffusive spreading with slope kappa/2
  auto ext = extent_2d(40, 40);
  auto h = real_space_hamiltonian(model, EmitterSet{}, ext, Boundary::periodic);
  SiteIndexer idx{ext, 2, 0};
  auto tr = evolve_finite(h, photon_excitation(idx, {20, 20}, 0), {10.0, 20.0}, 0, {}, true);
  auto m = msd(tr, idx, {20, 20}, Boundary::periodic);
  CHECK(std::abs((m[1] - m[0]) / 10.0 - 0.5) < 0.02);

  // Hermitian chain: ballistic, <x^2> grows as t^2
  auto chain = build_effective(catalog::hatano_nelson(1.0, 0.0));
  auto hc = real_space_hamiltonian(chain, EmitterSet{}, extent_1d(301), Boundary::periodic);
  SiteIndexer ic{extent_1d(301), 1, 0};
  auto tc = evolve_finite(hc, photon_excitation(ic, {150, 0}, 0), {20.0, 40.0}, 0, {}, true);
  auto mc = msd(tc, ic, {150, 0}, Boundary::periodic);
  CHECK(std::abs(mc[1] / mc[0] - 4.0) < 1e-6);
  Trajectory empty;
  CHECK_THROWS_AS(msd(empty, ic, {0, 0}, Boundary::periodic), PreconditionError);
}

TEST_CASE("overlap dynamics") {
  auto model = build_effective(catalog::hatano_nelson(0.5, 0.0));
  EmitterSet ems({Emitter{{20, 0}, {{0, 0.5}}, 0.0}});
  auto h = real_space_hamiltonian(model, ems, extent_1d(80), Boundary::periodic);
  SiteIndexer idx{extent_1d(80), 1, 1};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense(h));
  Eigen::Index best;
  es.eigenvectors().row(0).cwiseAbs2().maxCoeff(&best);
  Eigen::VectorXcd bound = es.eigenvectors().col(best);
  auto times = linspace(0.0, 40.0, 21);
  Eigen::VectorXcd p0 = photon_excitation(idx, {0, 0}, 0), p1 = photon_excitation(idx, {5, 0}, 0);
  auto a = evolve_finite(h, p0, times, 1, {}, true);
  auto b = evolve_finite(h, p1, times, 1, {}, true);
  const cplx ca(0.3, 0.1), cb(-0.2, 0.7);
  auto c = evolve_finite(h, ca * p0 + cb * p1, times, 1, {}, true);
  auto oa = overlap_dynamics(bound, a), ob = overlap_dynamics(bound, b), oc = overlap_dynamics(bound, c);
  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK(std::abs(oc[i] - (ca * oa[i] + cb * ob[i])) < 1e-12);
    CHECK(std::abs(std::abs(oa[i]) - std::abs(oa[0])) < 1e-10);
  }
  CHECK(oa[0] == bound.dot(p0));
  CHECK_THROWS_AS(overlap_dynamics(Eigen::VectorXcd::Ones(3), a), PreconditionError);
}

TEST_CASE("bic finite-size scaling") {
  auto s = bic_scaling(1.0, 1.0, 1.2, {40, 80});
  REQUIRE(s.rows.size() == 2);
  for (const auto& r : s.rows) CHECK(std::abs(r.plateau / r.predicted_plateau - 1.0) < 0.01);
  CHECK(s.rows[0].weight > s.rows[1].weight);
  // weight = a / (a + L/2) with a = (J/g)^2
  const double a = 1.0 / 1.44;
  CHECK(std::abs(s.rows[1].weight - a / (a + 40.0)) < 1e-12);
}
