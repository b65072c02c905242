#include <doctest.h>

#include <cmath>
#include <random>

#include "nhemit/boundstates.hpp"
#include "nhemit/errors.hpp"

using namespace nhemit;

namespace {
EmitterSet three_pinned(double g) {
  std::vector<Emitter> v;
  const int xs[3] = {0, 4, 9};
  for (int n = 1; n <= 3; ++n) v.push_back(Emitter{{xs[n - 1], 0}, {{0, g}}, cplx(0.05 * (n + 1), -0.5)});
  return EmitterSet(v);
}
}  // namespace

TEST_CASE("hidden states are pinned to the detunings with one-sided clouds") {
  auto lat = catalog::hatano_nelson(0.15, 1.0);
  auto model = build_effective(lat);
  SelfEnergy sigma(model, three_pinned(0.5), closed_form_propagator(lat));
  SpectrumSampler spec(model, 2048);
  BoundStateOptions opt;
  opt.seeds_re = opt.seeds_im = 20;
  auto states = find_bound_states(sigma, {-0.28, 0.28, -1.8, -0.2}, opt, &spec);
  REQUIRE(states.size() == 3);
  for (int n = 0; n < 3; ++n) {
    const cplx delta(0.05 * (n + 2), -0.5);
    CHECK(std::abs(states[n].energy - delta) < 1e-12);
    CHECK(states[n].kind == BoundStateClass::hidden);
    auto prof = photon_profile(sigma, states[n].energy, states[n].emitter_amplitudes, 30);
    // amplitudes of emitters beyond the pinned one vanish, and so does the cloud
    int last = 0;
    for (int m = 0; m < 3; ++m)
      if (std::abs(states[n].emitter_amplitudes[m]) > 1e-12) last = m;
    CHECK(last == n);
    const int edge = sigma.emitters()[last].cell[0];
    for (const auto& p : prof)
      if (p.cell[0] >= edge) CHECK(std::abs(p.amplitude) < 1e-12);
    auto loc = localization_lengths(prof, sigma.emitters());
    CHECK(loc.right_vanishes);
    CHECK_FALSE(loc.left_vanishes);
  }
}

TEST_CASE("pinning holds for random detunings in the maximal-winding region") {
  auto lat = catalog::hatano_nelson(0.3, 1.0);
  auto model = build_effective(lat);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int done = 0;
  while (done < 200) {
    cplx delta{0.6 * u(rng), -1.0 + u(rng)};
    // interior of the ellipse (Re/0.6)^2 + (Im+1)^2 < 1, away from its edge
    const double r = std::pow(delta.real() / 0.6, 2) + std::pow(delta.imag() + 1.0, 2);
    if (r > 0.9) continue;
    REQUIRE(winding_number(model, delta) == -1);
    SelfEnergy sigma(model, EmitterSet({Emitter{{0, 0}, {{0, 0.8}}, delta}}), closed_form_propagator(lat));
    auto st = refine_bound_state(sigma, delta + cplx(1e-3, 1e-3));
    REQUIRE(st);
    CHECK(std::abs(st->energy - delta) < 1e-9);
    ++done;
  }
}

TEST_CASE("Hermitian chain: one bound state on each side of the band") {
  const double j = 1.0, g = 0.3;
  auto lat = catalog::hatano_nelson(j, 0.0);
  auto model = build_effective(lat);
  SelfEnergy sigma(model, EmitterSet({Emitter{{0, 0}, {{0, g}}, 0.0}}), closed_form_propagator(lat));
  SpectrumSampler spec(model, 2048);
  auto states = find_bound_states(sigma, {-3, 3, -0.1, 0.1}, {}, &spec);
  REQUIRE(states.size() == 2);
  // finite-ring oracle
  Eigen::MatrixXcd h = dense(real_space_hamiltonian(model, sigma.emitters(), extent_1d(400), Boundary::periodic));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const auto& ev = es.eigenvalues();
  // the ring has a finite-size error of order y^L for this weakly bound state
  CHECK(std::abs(states[0].energy - ev[0]) < 1e-6);
  CHECK(std::abs(states[1].energy - ev[ev.size() - 1]) < 1e-6);
  for (const auto& s : states) {
    CHECK(std::abs(s.energy.imag()) < 1e-12);
    CHECK(s.kind == BoundStateClass::conventional);
  }
}

TEST_CASE("conventional states appear only above a coupling threshold") {
  auto lat = catalog::hatano_nelson(0.15, 1.0);
  auto model = build_effective(lat);
  SpectrumSampler spec(model, 2048);
  BoundStateOptions opt;
  opt.seeds_re = opt.seeds_im = 16;
  auto count_conventional = [&](double g) {
    SelfEnergy sigma(model, EmitterSet({Emitter{{0, 0}, {{0, g}}, cplx(0.0, -0.5)}}), closed_form_propagator(lat));
    int n = 0;
    for (const auto& s : find_bound_states(sigma, {-3, 3, -3, 1}, opt, &spec))
      if (s.kind == BoundStateClass::conventional) ++n;
    return n;
  };
  CHECK(count_conventional(0.1) == 0);
  CHECK(count_conventional(1.5) == 2);
}

TEST_CASE("bound states match eigenvalues of a large ring") {
  auto lat = catalog::hatano_nelson(0.15, 1.0);
  auto model = build_effective(lat);
  auto em = three_pinned(1.0);
  SelfEnergy sigma(model, em, closed_form_propagator(lat));
  SpectrumSampler spec(model, 2048);
  BoundStateOptions opt;
  opt.seeds_re = opt.seeds_im = 24;
  auto states = find_bound_states(sigma, {-3, 3, -3, 1}, opt, &spec);
  REQUIRE(states.size() >= 3);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dense(real_space_hamiltonian(model, em, extent_1d(400), Boundary::periodic)), false);
  for (const auto& s : states) {
    double best = 1e9;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) best = std::min(best, std::abs(es.eigenvalues()[i] - s.energy));
    CHECK(best < 1e-6);
  }
}

TEST_CASE("normalization: k-space weight equals the real-space cloud") {
  auto lat = catalog::hatano_nelson(0.15, 1.0);
  auto model = build_effective(lat);
  SelfEnergy sigma(model, EmitterSet({Emitter{{0, 0}, {{0, 1.5}}, cplx(0.0, -0.5)}}), closed_form_propagator(lat));
  auto st = refine_bound_state(sigma, {1.6, -0.3});
  REQUIRE(st);
  CHECK(st->kind == BoundStateClass::unclassified);  // not classified by refine
  st->profile = photon_profile(sigma, st->energy, st->emitter_amplitudes, 80);
  double real_space = 0;
  for (const auto& p : st->profile) real_space += std::norm(p.amplitude);
  CHECK(photon_weight(sigma, st->energy, st->emitter_amplitudes, 8192) == doctest::Approx(real_space).epsilon(1e-10));
  normalize(*st, sigma);
  double total = st->emitter_amplitudes.squaredNorm();
  for (const auto& p : st->profile) total += std::norm(p.amplitude);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  // decay lengths follow the characteristic roots
  auto loc = localization_lengths(st->profile, sigma.emitters());
  ChainPropagator chain(0.65, 0.15 - 0.5, -I);
  const double yr = std::abs(chain.phi(st->energy, 2) / chain.phi(st->energy, 1));
  const double yl = std::abs(chain.phi(st->energy, -2) / chain.phi(st->energy, -1));
  CHECK(loc.right == doctest::Approx(-1.0 / std::log(yr)).epsilon(1e-6));
  CHECK(loc.left == doctest::Approx(-1.0 / std::log(yl)).epsilon(1e-6));
}

TEST_CASE("bound state in the continuum on the open alternating-loss chain") {
  for (int L : {20, 41}) {
    auto s = bic_construct(1.0, 1.0, 1.2, L, L / 2);
    CHECK(s.residual < 1e-13);
    const double a = 1.0 / (1.2 * 1.2);
    CHECK(s.emitter_weight == doctest::Approx(a / (a + (L - L / 2))).epsilon(1e-12));
  }
}

TEST_CASE("two-emitter trapped state and its parity rule") {
  for (int sep = 1; sep <= 4; ++sep) {
    auto st = two_emitter_trapped_state(1.0, 1.0, 1.5, 30, 10, 10 + sep, 0);
    REQUIRE(st);
    CHECK(st->residual < 1e-13);
    CHECK(st->sector == (sep % 2 == 1 ? 1 : -1));
    CHECK(trapped_sector_from_self_energy(1.0, 1.0, 1.5, sep) == st->sector);
    CHECK_FALSE(two_emitter_trapped_state(1.0, 1.0, 1.5, 30, 10, 10 + sep, 1));
  }
}
