#pragma once

#include <optional>
#include <vector>

#include "nhemit/model.hpp"
#include "nhemit/selfenergy.hpp"

namespace nhemit {

struct SearchRegion {
  double re0 = -1.0, re1 = 1.0, im0 = -1.0, im1 = 1.0;
  bool contains(cplx z, double slack = 0.0) const {
    return z.real() >= re0 - slack && z.real() <= re1 + slack && z.imag() >= im0 - slack && z.imag() <= im1 + slack;
  }
};

struct BoundStateOptions {
  int seeds_re = 40;
  int seeds_im = 40;
  double derivative_step = 1e-6;
  double newton_tol = 1e-14;
  int max_iterations = 80;
  double dedupe_radius = 1e-6;
  double spectrum_tube = 1e-6;
  double residual_tol = 1e-9;
};

enum class BoundStateClass { conventional, hidden, bic, unclassified };
const char* to_string(BoundStateClass c);

struct PhotonSite {
  Cell cell{0, 0};
  int sublattice = 0;
  cplx amplitude{};
};

struct BoundState {
  cplx energy{};
  Eigen::VectorXcd emitter_amplitudes;  // unit norm until normalize() is called
  double residual = 0.0;                // smallest singular value of E - Delta - Sigma(E)
  BoundStateClass kind = BoundStateClass::unclassified;
  std::vector<PhotonSite> profile;
  bool normalized = false;
};

// Roots of det[E - Delta - Sigma(E)] in `region` from a grid of Newton seeds.
// If `spectrum` is given, roots within options.spectrum_tube of it are dropped.
std::vector<BoundState> find_bound_states(const SelfEnergy& sigma, const SearchRegion& region,
                                          const BoundStateOptions& options = {},
                                          const SpectrumSampler* spectrum = nullptr);

// Single Newton solve from one seed; nullopt if it does not converge.
std::optional<BoundState> refine_bound_state(const SelfEnergy& sigma, cplx seed, const BoundStateOptions& options = {});

// Photon cloud on every sublattice of the cells within `radius` of the emitters.
std::vector<PhotonSite> photon_profile(const SelfEnergy& sigma, cplx energy, const Eigen::VectorXcd& ce, int radius,
                                       Sheet sheet = Sheet::first);

// Scales the state so that |c_e|^2 + sum |c_r|^2 = 1, with the photon weight
// obtained from a k-grid sum. Returns the photon weight fraction.
double normalize(BoundState& state, const SelfEnergy& sigma, int grid = 0);

// Photon weight c_e^dag (1/N) sum_k g_k^dag [(E-h_k)(E-h_k)^dag]^{-1} g_k c_e.
double photon_weight(const SelfEnergy& sigma, cplx energy, const Eigen::VectorXcd& ce, int grid);

BoundStateClass classify(const EffectiveModel& model, cplx energy, const SpectrumSampler* spectrum = nullptr,
                         double bic_tol = 1e-9);

struct LocalizationLengths {
  double left = 0.0;   // decay length towards smaller x, 0 when that side vanishes
  double right = 0.0;
  bool left_vanishes = false;
  bool right_vanishes = false;
};

LocalizationLengths localization_lengths(const std::vector<PhotonSite>& profile, const EmitterSet& emitters,
                                         double vanish_tol = 1e-12);

// Bound state written on a finite lattice in the real-space basis.
Eigen::VectorXcd to_real_space(const BoundState& state, const SiteIndexer& indexer, Boundary boundary);

struct RealSpaceState {
  cplx energy{};
  Eigen::VectorXcd vector;
  double residual = 0.0;        // |H psi - E psi|
  double emitter_weight = 0.0;  // |c_e|^2 after normalization
  int sector = 0;               // +1 symmetric, -1 antisymmetric (two emitters)
};

// Zero-energy state of an A-site emitter (Delta = 0) on an open
// alternating-loss chain of `cells` cells.
RealSpaceState bic_construct(double hopping, double kappa, double g, int cells, int emitter_cell);

// Zero-energy state trapped between two emitters; nullopt for B-site emitters.
std::optional<RealSpaceState> two_emitter_trapped_state(double hopping, double kappa, double g, int cells, int x1,
                                                        int x2, int sublattice);

// Sector (+1 / -1) whose self-energy Sigma_11 +- Sigma_12 loses its
// square-root term at z -> 0, judged from the scaling between two small |z|.
int trapped_sector_from_self_energy(double hopping, double kappa, double g, int separation);

}  // namespace nhemit
