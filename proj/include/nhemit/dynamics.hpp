#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "nhemit/model.hpp"
#include "nhemit/selfenergy.hpp"

namespace nhemit {

// ------------------------------------------------------------ finite lattice

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-13;
  double initial_step = 1e-3;
  std::size_t max_steps = 200'000'000;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> emitters;  // emitter amplitudes at each time
  std::vector<Eigen::VectorXcd> states;    // full vectors, only when requested
  std::vector<double> norms;               // total single-excitation probability
  bool norm_monotone = true;
  std::size_t steps = 0;
};

using Observer = std::function<void(double t, const Eigen::VectorXcd& psi)>;

// Adaptive Dormand-Prince 5(4) integration of i d/dt psi = H psi, reporting at
// each entry of `times` (ascending, starting at or after 0).
Trajectory evolve_finite(const SparseH& h, const Eigen::VectorXcd& psi0, const std::vector<double>& times,
                         int emitters, const IntegratorOptions& options = {}, bool keep_states = false,
                         const Observer& observer = {});

Eigen::VectorXcd emitter_excitation(const SiteIndexer& idx, int n);
Eigen::VectorXcd photon_excitation(const SiteIndexer& idx, const Cell& cell, int sublattice);

std::vector<double> linspace(double a, double b, int n);
std::vector<double> logspace(double a, double b, int n);

// ------------------------------------------------------------ resolvent engine

struct ResolventOptions {
  double eta = 0.0;            // height of the integration line; 0 = min(0.5, 2/t_max)
  double window = 0.0;         // energy half-width; 0 = from the tail bound
  int expansion_order = 6;     // large-|z| terms subtracted analytically
  double shift = 0.0;          // expansion centre depth below the axis; 0 = automatic
  double tolerance = 1e-10;    // absolute target for each amplitude
  std::size_t max_panels = 4'000'000;
};

struct ResolventDiagnostics {
  double eta = 0.0;
  double window = 0.0;
  std::size_t panels = 0;
  std::size_t evaluations = 0;
};

// c_e(t) = (i/2pi) int dz G_e(z) exp(-i z t) c_e(0) along Im z = eta > 0. The
// line lies above every singularity of G_e, so the result is exact up to
// quadrature error; no eta -> 0 extrapolation is needed.
std::vector<Eigen::VectorXcd> emitter_amplitudes_resolvent(const SelfEnergy& sigma, const Eigen::VectorXcd& c0,
                                                           const std::vector<double>& times,
                                                           const ResolventOptions& options = {},
                                                           ResolventDiagnostics* diagnostics = nullptr);

// Moments P (H - a)^n P of the full single-excitation Hamiltonian restricted
// to the emitters, n = 0..order.
std::vector<Eigen::MatrixXcd> emitter_moments(const EffectiveModel& model, const EmitterSet& emitters, cplx shift,
                                              int order);

struct PhotonFieldOptions {
  int substeps = 4;        // Gauss panels per output interval
  int gauss_order = 8;
  int k_grid = 1024;       // per dimension, for the bare propagator
  ResolventOptions resolvent;
};

struct PhotonField {
  std::vector<double> times;
  std::vector<std::vector<cplx>> amplitudes;  // [time][site]
};

// Photon amplitudes on `sites` at t = j*dt, j = 0..steps, from the emitter
// amplitudes by the retarded convolution with the bare lattice propagator.
PhotonField photon_field_resolvent(const SelfEnergy& sigma, const Eigen::VectorXcd& c0,
                                   const std::vector<std::pair<Cell, int>>& sites, double dt, int steps,
                                   const PhotonFieldOptions& options = {});

// Bare propagator phi_r(t) = int dk e^{ik.r} e^{-i h_k t}, block [to][from].
Eigen::MatrixXcd bare_propagator(const EffectiveModel& model, const Cell& r, double t, int k_grid = 1024);

// ------------------------------------------------------------ closed forms

// |c_x(t)|^2 of a photon released at the origin of a Hatano-Nelson chain.
double free_propagation_hn(double hopping, double kappa, int x, double t);

struct RunningWave {
  cplx circle{};     // integral on the generalized Brillouin zone
  cplx residues{};   // poles crossed while shrinking the contour
  cplx total{};
  double radius = 1.0;
  int poles_crossed = 0;
  std::vector<cplx> poles;  // all roots of the integrand denominator in beta
};

// sqrt((J - kappa/2) / (J + kappa/2)); needs J > kappa/2.
double gbz_radius(double hopping, double kappa);

// Running-wave photon amplitude at site x (emitter at 0) for the
// Hatano-Nelson chain, evaluated on the circle |beta| = radius (default GBZ).
RunningWave running_wave_hn(double hopping, double kappa, cplx delta, double g, int x, double t,
                            double radius = 0.0, int nodes = 0);

struct BranchCut {
  cplx branch_point{};
  double nu = 0.0;
  double nu_fit = 0.0;
  cplx coefficient{};   // F in G_r - G_l ~ F (z - z_bp)^nu
  cplx prefactor{};     // c_BC(t) = prefactor exp(-i z_bp t) / t^{nu+1}
  double spread = 0.0;  // relative spread of F over the fit window
  cplx amplitude(double t) const;
  double population(double t) const { return std::norm(amplitude(t)); }
};

// Long-time contribution of the branch point z_bp. `observe` and `c0`
// select the matrix element u^dag G c0 for several emitters.
BranchCut branch_cut_asymptotics(const SelfEnergy& sigma, cplx branch_point, const Eigen::VectorXcd& c0,
                                 const Eigen::VectorXcd& observe);

struct SpaResult {
  cplx pole{};
  double rate = 0.0;  // -Im pole, NaN when Sigma(Delta) is not finite
  bool breakdown = false;
};

// Single-pole approximation c_e ~ exp(-i [Delta + Sigma(Delta)] t).
SpaResult spa_poles(cplx delta, const std::function<cplx(cplx)>& sigma);

struct UnidirectionalPoles {
  cplx z_plus{}, z_minus{};
  cplx r_plus{}, r_minus{};
  cplx amplitude(double t) const;
  // pole nearest to the bare detuning
  cplx nearest(cplx delta) const;
};

UnidirectionalPoles exact_unidirectional_poles(cplx delta, double g, double kappa);

}  // namespace nhemit
