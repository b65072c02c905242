#include "nhemit/boundstates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/SVD>

#include "nhemit/errors.hpp"

namespace nhemit {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::MatrixXcd characteristic(const SelfEnergy& sigma, cplx e) {
  const int n = int(sigma.emitters().size());
  Eigen::MatrixXcd m = e * Eigen::MatrixXcd::Identity(n, n);
  m -= sigma.emitters().detunings().asDiagonal();
  m -= sigma(e);
  return m;
}

cplx char_det(const SelfEnergy& sigma, cplx e) { return characteristic(sigma, e).determinant(); }

// Fix the global phase so the largest emitter amplitude is real positive.
void fix_phase(Eigen::VectorXcd& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (std::abs(v[imax]) > 0) v *= std::abs(v[imax]) / v[imax];
}
}  // namespace

const char* to_string(BoundStateClass c) {
  switch (c) {
    case BoundStateClass::conventional: return "conventional";
    case BoundStateClass::hidden: return "hidden";
    case BoundStateClass::bic: return "bic";
    default: return "unclassified";
  }
}

std::optional<BoundState> refine_bound_state(const SelfEnergy& sigma, cplx seed, const BoundStateOptions& opt) {
  cplx e = seed;
  const double h = opt.derivative_step;
  bool converged = false;
  try {
    for (int it = 0; it < opt.max_iterations; ++it) {
      const cplx f = char_det(sigma, e);
      if (f == cplx{}) {
        converged = true;
        break;
      }
      const cplx df = (char_det(sigma, e + h) - char_det(sigma, e - h)) / (2.0 * h);
      if (df == cplx{} || !std::isfinite(std::abs(df))) return std::nullopt;
      // Backtracking: shrink the step while it lands on a cut or does not
      // reduce |f|. Roots close to band edges need this.
      cplx step = f / df;
      cplx trial = e - step;
      for (int halve = 0; halve < 30; ++halve) {
        bool ok = false;
        try {
          ok = std::abs(char_det(sigma, trial)) < std::abs(f);
        } catch (const Error&) {
        }
        if (ok || std::abs(step) < opt.newton_tol * std::max(1.0, std::abs(e))) break;
        step *= 0.5;
        trial = e - step;
      }
      e = trial;
      if (!std::isfinite(std::abs(e))) return std::nullopt;
      if (std::abs(step) < opt.newton_tol * std::max(1.0, std::abs(e))) {
        converged = true;
        break;
      }
    }
    if (!converged) return std::nullopt;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(characteristic(sigma, e), Eigen::ComputeFullV);
    BoundState out;
    out.energy = e;
    const auto n = svd.singularValues().size();
    out.residual = svd.singularValues()[n - 1];
    out.emitter_amplitudes = svd.matrixV().col(n - 1);
    fix_phase(out.emitter_amplitudes);
    if (out.residual > opt.residual_tol) return std::nullopt;
    return out;
  } catch (const Error&) {
    return std::nullopt;  // seed wandered onto a cut or the spectrum
  }
}

std::vector<BoundState> find_bound_states(const SelfEnergy& sigma, const SearchRegion& region,
                                          const BoundStateOptions& opt, const SpectrumSampler* spectrum) {
  if (sigma.emitters().empty()) throw PreconditionError("bound-state search needs at least one emitter");
  std::vector<BoundState> found;
  const double dre = (region.re1 - region.re0) / opt.seeds_re;
  const double dim = (region.im1 - region.im0) / opt.seeds_im;
  for (int i = 0; i < opt.seeds_re; ++i) {
    for (int j = 0; j < opt.seeds_im; ++j) {
      const cplx seed{region.re0 + (i + 0.5) * dre, region.im0 + (j + 0.5) * dim};
      auto st = refine_bound_state(sigma, seed, opt);
      if (!st || !region.contains(st->energy, 1e-12)) continue;
      if (spectrum && spectrum->distance(st->energy) < opt.spectrum_tube) continue;
      auto dup = std::find_if(found.begin(), found.end(), [&](const BoundState& b) {
        return std::abs(b.energy - st->energy) < opt.dedupe_radius;
      });
      if (dup == found.end()) found.push_back(std::move(*st));
      else if (st->residual < dup->residual) *dup = std::move(*st);
    }
  }
  for (auto& b : found) {
    try {
      b.kind = classify(sigma.model(), b.energy, spectrum);
    } catch (const Error&) {
      b.kind = BoundStateClass::unclassified;
    }
  }
  std::sort(found.begin(), found.end(), [](const BoundState& a, const BoundState& b) {
    return a.energy.real() != b.energy.real() ? a.energy.real() < b.energy.real() : a.energy.imag() < b.energy.imag();
  });
  return found;
}

std::vector<PhotonSite> photon_profile(const SelfEnergy& sigma, cplx energy, const Eigen::VectorXcd& ce, int radius,
                                       Sheet sheet) {
  const auto& em = sigma.emitters();
  if (em.empty()) throw PreconditionError("photon profile needs emitters");
  Cell lo = em[0].cell, hi = em[0].cell;
  for (const auto& e : em) {
    for (int d = 0; d < 2; ++d) {
      lo[d] = std::min(lo[d], e.cell[d]);
      hi[d] = std::max(hi[d], e.cell[d]);
    }
  }
  const bool two_d = sigma.model().dimension() == 2;
  std::vector<std::pair<Cell, int>> sites;
  for (int x = lo[0] - radius; x <= hi[0] + radius; ++x)
    for (int y = two_d ? lo[1] - radius : 0; y <= (two_d ? hi[1] + radius : 0); ++y)
      for (int s = 0; s < sigma.model().sublattices(); ++s) sites.push_back({{x, y}, s});
  const auto amps = sigma.photon_amplitudes(energy, ce, sites, sheet);
  std::vector<PhotonSite> out(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) out[i] = {sites[i].first, sites[i].second, amps[i]};
  return out;
}

double photon_weight(const SelfEnergy& sigma, cplx energy, const Eigen::VectorXcd& ce, int grid) {
  const auto& model = sigma.model();
  const auto& em = sigma.emitters();
  const int nb = model.sublattices();
  const bool two_d = model.dimension() == 2;
  if (grid <= 0) grid = two_d ? 256 : 8192;
  double acc = 0.0;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < (two_d ? grid : 1); ++j) {
      std::array<double, 2> k{kTwoPi * i / grid, two_d ? kTwoPi * j / grid : 0.0};
      Eigen::VectorXcd src = Eigen::VectorXcd::Zero(nb);
      for (std::size_t n = 0; n < em.size(); ++n) {
        const double ph = k[0] * em[n].cell[0] + (two_d ? k[1] * em[n].cell[1] : 0.0);
        for (const auto& [s, g] : em[n].couplings) src[s] += g * std::polar(1.0, -ph) * ce[n];
      }
      Eigen::MatrixXcd m = energy * Eigen::MatrixXcd::Identity(nb, nb) - bloch(model, k);
      acc += (m.partialPivLu().solve(src)).squaredNorm();
    }
  }
  return acc / (two_d ? double(grid) * grid : double(grid));
}

double normalize(BoundState& state, const SelfEnergy& sigma, int grid) {
  const double w = photon_weight(sigma, state.energy, state.emitter_amplitudes, grid);
  const double total = state.emitter_amplitudes.squaredNorm() + w;
  const double scale = 1.0 / std::sqrt(total);
  state.emitter_amplitudes *= scale;
  for (auto& p : state.profile) p.amplitude *= scale;
  state.normalized = true;
  return w / total;
}

BoundStateClass classify(const EffectiveModel& model, cplx energy, const SpectrumSampler* spectrum, double bic_tol) {
  const bool near_spectrum = spectrum && spectrum->distance(energy) < 1e-6;
  if (model.dimension() != 1) {
    if (std::abs(energy.imag()) < bic_tol && near_spectrum) return BoundStateClass::bic;
    return BoundStateClass::conventional;
  }
  int index = 0;
  try {
    index = winding_number(model, energy);
  } catch (const SingularResolventError&) {
    return std::abs(energy.imag()) < bic_tol ? BoundStateClass::bic : BoundStateClass::unclassified;
  }
  if (std::abs(energy.imag()) < bic_tol && (near_spectrum || index != 0)) return BoundStateClass::bic;
  if (index == 0) return BoundStateClass::conventional;
  if (model.sublattices() != 1) return BoundStateClass::unclassified;
  const auto r = hopping_ranges(model);
  if ((r.right > 0 && index == -r.right) || (r.left > 0 && index == r.left)) return BoundStateClass::hidden;
  return BoundStateClass::conventional;
}

LocalizationLengths localization_lengths(const std::vector<PhotonSite>& profile, const EmitterSet& emitters,
                                         double vanish_tol) {
  if (emitters.empty()) throw PreconditionError("localization lengths need emitters");
  int xmin = emitters[0].cell[0], xmax = xmin;
  for (const auto& e : emitters) {
    xmin = std::min(xmin, e.cell[0]);
    xmax = std::max(xmax, e.cell[0]);
  }
  std::map<int, double> by_cell;
  for (const auto& p : profile) by_cell[p.cell[0]] = std::max(by_cell[p.cell[0]], std::abs(p.amplitude));

  auto fit_side = [&](bool right, double& length, bool& vanishes) {
    std::vector<double> xs, ys;
    double biggest = 0.0;
    for (const auto& [x, a] : by_cell) {
      if (right ? x <= xmax : x >= xmin) continue;
      biggest = std::max(biggest, a);
      if (a > 1e-250) {
        xs.push_back(right ? x - xmax : xmin - x);
        ys.push_back(std::log(a));
      }
    }
    vanishes = biggest < vanish_tol;
    length = 0.0;
    if (vanishes || xs.size() < 2) return;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= xs.size();
    my /= xs.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = sxy / sxx;
    length = slope < 0 ? -1.0 / slope : std::numeric_limits<double>::infinity();
  };
  LocalizationLengths out;
  fit_side(false, out.left, out.left_vanishes);
  fit_side(true, out.right, out.right_vanishes);
  return out;
}

Eigen::VectorXcd to_real_space(const BoundState& state, const SiteIndexer& idx, Boundary boundary) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(idx.dimension());
  v.head(state.emitter_amplitudes.size()) = state.emitter_amplitudes;
  for (const auto& p : state.profile) {
    Cell c = p.cell;
    if (boundary == Boundary::periodic) {
      c[0] = ((c[0] % idx.extent.cells[0]) + idx.extent.cells[0]) % idx.extent.cells[0];
      if (idx.extent.dimension == 2)
        c[1] = ((c[1] % idx.extent.cells[1]) + idx.extent.cells[1]) % idx.extent.cells[1];
    } else if (!idx.contains(c)) {
      continue;
    }
    v[idx.site(c, p.sublattice)] += p.amplitude;
  }
  return v;
}

RealSpaceState bic_construct(double hopping, double kappa, double g, int cells, int emitter_cell) {
  if (g == 0.0) throw PreconditionError("bound state in the continuum needs g != 0");
  if (emitter_cell < 0 || emitter_cell >= cells) throw PreconditionError("emitter outside the chain");
  auto model = build_effective(catalog::alternating_loss(hopping, kappa));
  EmitterSet em({Emitter{{emitter_cell, 0}, {{0, g}}, 0.0}});
  const auto ext = extent_1d(cells);
  SiteIndexer idx{ext, 2, 1};
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(idx.dimension());
  v[0] = hopping / g;
  for (int x = emitter_cell; x < cells; ++x) v[idx.site({x, 0}, 1)] = (x - emitter_cell) % 2 == 0 ? -1.0 : 1.0;
  v.normalize();
  RealSpaceState out;
  out.vector = v;
  out.residual = (real_space_hamiltonian(model, em, ext, Boundary::open) * v).norm();
  out.emitter_weight = std::norm(v[0]);
  return out;
}

std::optional<RealSpaceState> two_emitter_trapped_state(double hopping, double kappa, double g, int cells, int x1,
                                                        int x2, int sublattice) {
  if (x1 == x2) throw PreconditionError("emitters must sit in different cells");
  if (x1 > x2) std::swap(x1, x2);
  if (x1 < 0 || x2 >= cells) throw PreconditionError("emitter outside the chain");
  if (sublattice != 0) return std::nullopt;
  auto model = build_effective(catalog::alternating_loss(hopping, kappa));
  EmitterSet em({Emitter{{x1, 0}, {{0, g}}, 0.0}, Emitter{{x2, 0}, {{0, g}}, 0.0}});
  const auto ext = extent_1d(cells);
  SiteIndexer idx{ext, 2, 2};
  const int sector = (x2 - x1) % 2 == 1 ? 1 : -1;
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(idx.dimension());
  v[0] = hopping / g;
  v[1] = sector * hopping / g;
  for (int x = x1; x < x2; ++x) v[idx.site({x, 0}, 1)] = (x - x1) % 2 == 0 ? -1.0 : 1.0;
  v.normalize();
  RealSpaceState out;
  out.vector = v;
  out.sector = sector;
  out.emitter_weight = std::norm(v[0]) + std::norm(v[1]);
  out.residual = (real_space_hamiltonian(model, em, ext, Boundary::open) * v).norm();
  return out;
}

int trapped_sector_from_self_energy(double hopping, double kappa, double g, int separation) {
  auto combo = [&](cplx z, int s) {
    return sigma_pt_closed(z, 0, PtPair::AA, hopping, kappa, g) +
           double(s) * sigma_pt_closed(z, -separation, PtPair::AA, hopping, kappa, g);
  };
  const cplx z1{0.0, 1e-4}, z2{0.0, 1e-6};
  double best_slope = -1.0;
  int best = 0;
  for (int s : {1, -1}) {
    const double slope = std::log(std::abs(combo(z1, s)) / std::abs(combo(z2, s))) / std::log(1e2);
    if (slope > best_slope) {
      best_slope = slope;
      best = s;
    }
  }
  return best;
}

}  // namespace nhemit
