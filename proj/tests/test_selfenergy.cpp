#include <doctest.h>

#include <cmath>
#include <random>

#include "nhemit/elliptic.hpp"
#include "nhemit/errors.hpp"
#include "nhemit/selfenergy.hpp"

using namespace nhemit;

// Reference values below come from tests/oracles/self_energy_oracle.py
// (30-digit mpmath quadrature of the Bloch resolvent).

namespace {
bool close(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

EmitterSet single(int x, int s, double g, cplx delta = 0.0) {
  return EmitterSet({Emitter{{x, 0}, {{s, g}}, delta}});
}
}  // namespace

TEST_CASE("Hatano-Nelson closed form against frozen quadrature values") {
  CHECK(close(sigma_hn_closed({0.3, -0.2}, 0, 0.15, 1.0, 1.0, 1.0), {1.1547005383792516, -0.57735026918962574}, 1e-13));
  CHECK(close(sigma_hn_closed({0.3, -0.2}, -2, 0.15, 1.0, 1.0, 1.0), {-0.15688570643196276, -0.22591179408869212}, 1e-13));
  CHECK(close(sigma_hn_closed({1.0, 0.5}, 3, 2.5, 1.0, 1.0, 1.0), {0.1155834869365923, 0.087401911056919581}, 1e-13));
  CHECK(close(sigma_hn_closed({1.0, 0.5}, -4, 2.5, 1.0, 1.0, 1.0), {0.019259205256355547, -0.017140135069292344}, 1e-13));
  CHECK(close(sigma_hn_closed({0.05, -0.5}, -3, 0.15, 1.0, 1.0, 1.0), {0.072826581702321342, -0.18206645425580338}, 1e-13));
  // inside the loop the non-negative offsets vanish identically
  for (int x = 0; x < 6; ++x) CHECK(sigma_hn_closed({0.05, -0.5}, x, 0.15, 1.0, 1.0, 1.0) == cplx{});
}

TEST_CASE("alternating-loss closed form against frozen quadrature values") {
  const cplx z{0.4, 0.1};
  CHECK(close(sigma_pt_closed(z, 0, PtPair::AA, 1, 1, 1), {-0.12350994049679432, -0.27069164230554333}, 1e-13));
  CHECK(close(sigma_pt_closed(z, 2, PtPair::BB, 1, 1, 1), {0.32603885677544607, -0.0024255816182420786}, 1e-13));
  CHECK(close(sigma_pt_closed(z, 1, PtPair::AB, 1, 1, 1), {-0.37582158483131003, -0.12206879573434554}, 1e-13));
  CHECK(close(sigma_pt_closed(z, -1, PtPair::AB, 1, 1, 1), {0.16726669720485046, 0.17970858669729052}, 1e-13));
  CHECK(close(sigma_pt_closed(z, 1, PtPair::BA, 1, 1, 1), {0.16726669720485046, 0.17970858669729052}, 1e-13));
  CHECK(sigma_pt_closed(0.0, 0, PtPair::AA, 1, 1, 1.5) == cplx{});
}

TEST_CASE("Wick chain and 2D closed forms against frozen values") {
  CHECK(close(sigma_wick_chain({0.5, 0.2}, 1.0, 1.0), {0.403305011445971, -0.52571543505324739}, 1e-13));
  CHECK(close(sigma_2d_closed({1.0, -0.1}, 1.0, 1.0), {0.24584201142314341, -0.34677602629128128}, 1e-12));
  // z = 4iJ, g = J: Sigma = -iJ/(4 sqrt 2)
  const double j = 0.8;
  CHECK(close(sigma_wick_chain(4.0 * I * j, j, j), -I * j / (4.0 * std::sqrt(2.0)), 1e-14));
}

TEST_CASE("unidirectional piecewise form agrees with the general chain formula") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  auto prop = closed_form_propagator(catalog::hn_unidirectional(1.0));
  int tested = 0;
  while (tested < 200) {
    cplx z{u(rng), u(rng) - 1.0};
    if (std::abs(std::abs(z + I) - 1.0) < 1e-3) continue;
    for (int x = -4; x <= 4; ++x)
      CHECK(close(sigma_hn_unidirectional(z, x, 1.0, 0.7), 0.49 * prop->element(z, {x, 0}, 0, 0, Sheet::first), 1e-12));
    ++tested;
  }
  // outside the disk the sum over x >= 0 is geometric
  CHECK(close(sigma_hn_unidirectional(1.0, 2, 1.0, 1.0), 1.0 / (1.0 + I) * std::pow(1.0 / (1.0 + I), 2), 1e-15));
  CHECK_THROWS_AS(sigma_hn_unidirectional(0.0, 0, 1.0, 1.0), BranchAmbiguityError);
}

TEST_CASE("closed forms agree with k-grid quadrature at random points") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  struct Case { Lattice lat; };
  for (const auto& lat : {catalog::hatano_nelson(0.15, 1.0), catalog::hatano_nelson(2.5, 1.0),
                          catalog::hn_unidirectional(1.0), catalog::alternating_loss(1.0, 1.0),
                          catalog::wick_chain(1.0)}) {
    auto model = build_effective(lat);
    auto closed = closed_form_propagator(lat);
    REQUIRE(closed);
    auto quad = std::make_shared<QuadraturePropagator>(model, 8192);
    int done = 0;
    while (done < 10) {
      cplx z{u(rng), u(rng) - 1.0};
      if (quad->distance_to_spectrum(z) < 0.2) continue;
      for (int s = 0; s < model.sublattices(); ++s)
        for (int t = 0; t < model.sublattices(); ++t)
          for (int x = -3; x <= 3; ++x)
            CHECK(close(closed->element(z, {x, 0}, s, t, Sheet::first), quad->element(z, {x, 0}, s, t, Sheet::first), 1e-10));
      ++done;
    }
  }
}

TEST_CASE("self-energy matrix from the propagator") {
  auto lat = catalog::hatano_nelson(0.15, 1.0);
  auto model = build_effective(lat);
  EmitterSet em({Emitter{{0, 0}, {{0, 0.5}}, 0.0}, Emitter{{3, 0}, {{0, 0.5}}, 0.0}});
  SelfEnergy sigma(model, em, closed_form_propagator(lat));
  const cplx z{0.05, -0.5};
  auto s = sigma(z);
  // inside the loop: strictly triangular
  CHECK(s(0, 0) == cplx{});
  CHECK(s(1, 1) == cplx{});
  CHECK(s(1, 0) == cplx{});
  CHECK(std::abs(s(0, 1)) > 1e-3);
  auto numeric = sigma_numeric(model, em, z);
  CHECK((numeric - s).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Wick map relates the Wick chain to the Hermitian chain") {
  const double j = 1.0, g = 0.6;
  auto herm = [&](cplx e) { return g * g / (e * std::sqrt(1.0 + 4.0 * j / e)); };
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int t = 0; t < 50; ++t) {
    cplx z{u(rng), u(rng)};
    if (std::abs(z.real()) < 1e-3) continue;
    CHECK(close(sigma_wick(z, herm), sigma_wick_chain(z, j, g), 1e-12));
  }
  // Sigma(iE + 0+) has real part Gamma(E)/2 of the Hermitian bath
  auto herm_model = build_effective(catalog::hermitian_chain(j, true));
  EmitterSet em = single(0, 0, g);
  for (double e : {-3.5, -2.0, -0.7}) {
    const double gamma = -2.0 * herm(cplx(e, 1e-12)).imag();
    CHECK(sigma_wick_chain(cplx(1e-12, e), j, g).real() == doctest::Approx(gamma / 2).epsilon(1e-8));
    (void)herm_model;
    (void)em;
  }
}

TEST_CASE("complex elliptic K matches its defining integral") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int t = 0; t < 40; ++t) {
    cplx m{u(rng), u(rng)};
    // composite midpoint on the smooth integrand
    const int n = 20000;
    cplx acc{};
    for (int i = 0; i < n; ++i) {
      const double th = (i + 0.5) * (M_PI / 2) / n;
      acc += 1.0 / std::sqrt(1.0 - m * std::sin(th) * std::sin(th));
    }
    acc *= (M_PI / 2) / n;
    CHECK(std::abs(elliptic_k(m) - acc) < 1e-7);
  }
  CHECK(std::abs(elliptic_k(0.0) - M_PI / 2) < 1e-15);
  CHECK_THROWS_AS(elliptic_k(2.0), BranchAmbiguityError);
}

TEST_CASE("2D closed form against quadrature and its logarithmic limit") {
  auto lat = catalog::swap2d(1.0);
  auto model = build_effective(lat);
  EmitterSet em({Emitter{{0, 0}, {{0, 1.0}}, 0.0}});
  auto s = sigma_numeric(model, em, {1.0, -0.1}, 1024);
  CHECK(std::abs(s(0, 0) - sigma_2d_closed({1.0, -0.1}, 1.0, 1.0)) < 1e-6);
  for (double r : {1e-5, 1e-7}) {
    const cplx z = r * std::polar(1.0, 0.3);
    const cplx approx = I / (2 * M_PI) * std::log(z / (8.0 * I));
    CHECK(std::abs(sigma_2d_closed(z, 1.0, 1.0) - approx) < 1e-3);
  }
}

TEST_CASE("winding numbers and maximal-winding vanishing") {
  auto hn = build_effective(catalog::hatano_nelson(0.15, 1.0));
  CHECK(winding_number(hn, {0.0, -1.0}) == -1);
  CHECK(winding_number(hn, {2.0, -1.0}) == 0);
  CHECK(winding_number(hn, {0.0, 0.5}) == 0);
  auto nnn = build_effective(catalog::hn_nnn(1.0, 2.0));
  CHECK(winding_number(nnn, {0.0, -3.0}) == -2);
  CHECK(winding_number(nnn, {2.0, -3.0}) == -1);
  auto chk = maximal_winding_vanishing_check(hn, {0.05, -0.5});
  CHECK(chk.predicted == VanishingSide::nonnegative);
  CHECK(chk.holds);
  auto chk2 = maximal_winding_vanishing_check(nnn, {0.0, -3.0});
  CHECK(chk2.predicted == VanishingSide::nonnegative);
  CHECK(chk2.holds);
  auto chk3 = maximal_winding_vanishing_check(nnn, {2.0, -3.0});
  CHECK(chk3.predicted == VanishingSide::none);
  // reversed chirality: vanishing on the other side
  auto flipped = build_effective(catalog::hatano_nelson(-0.15, 1.0));
  auto chk4 = maximal_winding_vanishing_check(flipped, {0.05, -0.5});
  CHECK(chk4.index == 1);
  CHECK(chk4.predicted == VanishingSide::nonpositive);
  CHECK(chk4.holds);
  CHECK_THROWS_AS(winding_number(hn, {0.3, -1.0}), SingularResolventError);
}

TEST_CASE("second sheet continues the function across the cut") {
  // Just below vs just above the Hermitian band: the first-sheet value on one
  // side equals the second-sheet value on the other.
  auto chain = ChainPropagator(1.0, 1.0, 0.0);
  const cplx up{0.4, 1e-7}, down{0.4, -1e-7};
  CHECK(close(chain.phi(up, 0, Sheet::first), chain.phi(down, 0, Sheet::second), 1e-5));
  CHECK(close(sigma_wick_chain(cplx(1e-9, -1.0), 1.0, 1.0, Sheet::first),
              sigma_wick_chain(cplx(-1e-9, -1.0), 1.0, 1.0, Sheet::second), 1e-6));
  const cplx a{0.3, -0.5 - 1e-8}, b{0.3, -0.5 + 1e-8};
  CHECK(close(sigma_pt_closed(a, 1, PtPair::AB, 1, 1, 1, Sheet::first), sigma_pt_closed(b, 1, PtPair::AB, 1, 1, 1, Sheet::second), 1e-5));
}

TEST_CASE("quadrature rejects points on the spectrum") {
  auto model = build_effective(catalog::hatano_nelson(0.15, 1.0));
  QuadraturePropagator q(model, 64);
  const cplx on = bloch(model, {2 * M_PI * 5 / 64, 0})(0, 0);
  CHECK_THROWS_AS(q.element(on, {0, 0}, 0, 0, Sheet::first), SingularResolventError);
  CHECK_THROWS_AS(sigma_hn_closed(on, 0, 0.15, 1.0, 1.0, 1.0), BranchAmbiguityError);
}
