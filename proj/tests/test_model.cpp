#include <doctest.h>

#include <cmath>
#include <random>

#include "nhemit/errors.hpp"
#include "nhemit/model.hpp"

using namespace nhemit;

namespace {
double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }
}

TEST_CASE("hatano-nelson effective hoppings and Bloch matrix") {
  const double j = 0.15, kappa = 1.0;
  auto m = build_effective(catalog::hatano_nelson(j, kappa));
  for (double k : {0.0, 0.3, 1.7, -2.2}) {
    cplx expect = 2 * j * std::cos(k) - I * kappa * (std::sin(k) + 1.0);
    CHECK(std::abs(bloch(m, {k, 0})(0, 0) - expect) < 1e-14);
  }
  // hidden: rightward hop J + kappa/2, leftward J - kappa/2, on-site -i kappa
  for (const auto& h : m.hoppings) {
    if (h.offset[0] == 1) CHECK(std::abs(h.amplitude - cplx(j + 0.5 * kappa)) < 1e-15);
    if (h.offset[0] == -1) CHECK(std::abs(h.amplitude - cplx(j - 0.5 * kappa)) < 1e-15);
    if (h.offset[0] == 0) CHECK(std::abs(h.amplitude - cplx(0, -kappa)) < 1e-15);
  }
}

TEST_CASE("alternating-loss and swap2d Bloch matrices") {
  const double j = 1.0, kappa = 1.0;
  auto m = build_effective(catalog::alternating_loss(j, kappa));
  for (double k : {0.0, 0.4, 2.9}) {
    Eigen::Matrix2cd expect;
    expect << -I * kappa, j * (1.0 + std::polar(1.0, -k)), j * (1.0 + std::polar(1.0, k)), 0.0;
    CHECK(max_abs(bloch(m, {k, 0}) - expect) < 1e-14);
  }
  auto s = build_effective(catalog::swap2d(kappa));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (int t = 0; t < 20; ++t) {
    const double kx = u(rng), ky = u(rng);
    Eigen::Matrix2cd expect;
    expect << -2.0 * I, 1.0 + std::polar(1.0, -(kx + ky)), std::polar(1.0, kx) + std::polar(1.0, ky), -2.0 * I;
    expect *= kappa;
    Eigen::MatrixXcd h = bloch(s, {kx, ky});
    CHECK(max_abs(h - expect) < 1e-14);
    Eigen::Matrix2cd shifted = h + 2.0 * I * kappa * Eigen::Matrix2cd::Identity();
    Eigen::Matrix2cd sq = shifted * shifted;
    CHECK(max_abs(sq - 2.0 * kappa * kappa * (std::cos(kx) + std::cos(ky)) * Eigen::Matrix2cd::Identity()) < 1e-13);
  }
}

TEST_CASE("Bloch matrix from effective hoppings equals the jump-operator form") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (const auto& name : catalog::names()) {
    auto lat = catalog::by_name(name, {});
    auto m = build_effective(lat);
    for (int t = 0; t < 10; ++t) {
      std::array<double, 2> k{u(rng), lat.dimension == 2 ? u(rng) : 0.0};
      CHECK(max_abs(bloch(m, k) - bloch_from_jumps(lat, k)) < 1e-13);
    }
  }
}

TEST_CASE("every catalog model is dissipative") {
  for (const auto& name : catalog::names()) {
    auto m = build_effective(catalog::by_name(name, {}));
    for (int i = 0; i < 64; ++i) {
      for (int j = 0; j < (m.dimension() == 2 ? 64 : 1); ++j) {
        Eigen::MatrixXcd h = bloch(m, {2 * M_PI * i / 64, 2 * M_PI * j / 64});
        Eigen::MatrixXcd herm = (h - h.adjoint()) / (2.0 * I);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
        CHECK(es.eigenvalues().maxCoeff() <= 1e-12);
      }
    }
  }
}

TEST_CASE("hn_nnn Bloch matrix") {
  auto m = build_effective(catalog::hn_nnn(1.0, 2.0));
  for (double k : {0.0, 1.1, -2.5}) {
    cplx expect = (std::polar(1.0, -k) - I) + 2.0 * (std::polar(1.0, -2 * k) - I);
    CHECK(std::abs(bloch(m, {k, 0})(0, 0) - expect) < 1e-14);
  }
}

TEST_CASE("real-space Hamiltonian matches Bloch spectrum on a periodic ring") {
  auto m = build_effective(catalog::hatano_nelson(0.3, 1.0));
  const int L = 12;
  SparseH h = real_space_hamiltonian(m, EmitterSet{}, extent_1d(L), Boundary::periodic);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dense(h));
  for (int q = 0; q < L; ++q) {
    cplx e = bloch(m, {2 * M_PI * q / L, 0})(0, 0);
    double best = 1e9;
    for (int i = 0; i < L; ++i) best = std::min(best, std::abs(es.eigenvalues()[i] - e));
    CHECK(best < 1e-10);
  }
}

TEST_CASE("alternating-loss chain with real couplings is complex symmetric") {
  auto m = build_effective(catalog::alternating_loss(1.0, 1.0));
  EmitterSet em({Emitter{{5, 0}, {{0, 1.2}}, 0.0}, Emitter{{9, 0}, {{1, 0.7}}, 0.3}});
  Eigen::MatrixXcd h = dense(real_space_hamiltonian(m, em, extent_1d(20), Boundary::open));
  CHECK(max_abs(h - h.transpose()) < 1e-15);
  CHECK(h.rows() == 2 + 40);
  CHECK(std::abs(h(0, 2 + 2 * 5)) == doctest::Approx(1.2));
}

TEST_CASE("emitters are ordered by position") {
  EmitterSet em({Emitter{{7, 0}, {{0, 1.0}}, 0.1}, Emitter{{2, 0}, {{0, 1.0}}, 0.2}});
  CHECK(em[0].cell[0] == 2);
  CHECK(em[1].cell[0] == 7);
}

TEST_CASE("Wick rotation maps the shifted Hermitian chain onto the Wick chain") {
  const double j = 0.7;
  auto herm = build_effective(catalog::hermitian_chain(j, true));
  auto rotated = wick_rotate(herm);
  auto wick = build_effective(catalog::wick_chain(j));
  for (double k : {0.0, 0.9, 2.0, 3.1}) {
    CHECK(std::abs(bloch(rotated, {k, 0})(0, 0) - bloch(wick, {k, 0})(0, 0)) < 1e-14);
    CHECK(std::abs(bloch(wick, {k, 0})(0, 0) - (-2.0 * I * j * (std::cos(k) + 1.0))) < 1e-14);
  }
  CHECK_THROWS_AS(wick_rotate(build_effective(catalog::hatano_nelson(0.3, 1.0))), PreconditionError);
}

TEST_CASE("model validation rejects bad input") {
  Lattice l = catalog::hatano_nelson(0.2, 1.0);
  l.hoppings.push_back({{2, 0}, 0, 0, 0.5});  // no Hermitian partner
  CHECK_THROWS_AS(l.validate(), ModelError);
  CHECK_THROWS_AS(catalog::swap2d(0.0), ModelError);
  CHECK_THROWS_AS(catalog::by_name("nope", {}), ModelError);
  Lattice bad = catalog::hatano_nelson(0.2, 1.0);
  bad.jumps.front().terms.front().sublattice = 3;
  CHECK_THROWS_AS(bad.validate(), ModelError);
}
