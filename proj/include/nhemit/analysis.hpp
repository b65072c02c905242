#pragma once

#include <vector>

#include "nhemit/dynamics.hpp"

namespace nhemit {

struct PowerLawFit {
  double exponent = 0.0;     // slope of ln y against ln t
  double coefficient = 0.0;  // y ~ coefficient * t^exponent
  double t_min = 0.0, t_max = 0.0;
  double r_squared = 0.0;
  int samples = 0;
  bool low_confidence = false;
};

struct FitWindow {
  double t_min = 5.0;  // earlier samples are treated as transient
  double t_max = 1e300;
  double floor = 1e-24;  // smaller values are numerical noise
  int min_samples = 20;
};

struct LinearFit {
  double slope = 0.0, intercept = 0.0, r_squared = 0.0;
};

// Ordinary least squares y = intercept + slope x; the second form keeps only
// x in [x_min, x_max].
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y, double x_min, double x_max);

// Least squares on (ln t, ln y). Throws PreconditionError with fewer than
// `min_samples` usable points.
PowerLawFit fit_power_law(const std::vector<double>& times, const std::vector<double>& values,
                          const FitWindow& window = {});

struct LocalExponent {
  double time;
  double exponent;
};

// d ln y / d ln t by least squares over a sliding window of 2*half_width+1
// samples.
std::vector<LocalExponent> local_exponents(const std::vector<double>& times, const std::vector<double>& values,
                                           int half_width = 3);

struct SpectrumReport {
  std::vector<cplx> eigenvalues;
  Boundary boundary = Boundary::periodic;
  Extent extent;
};

// All eigenvalues of the finite single-excitation Hamiltonian.
SpectrumReport spectrum(const EffectiveModel& model, const EmitterSet& emitters, const Extent& extent,
                        Boundary boundary);
std::pair<SpectrumReport, SpectrumReport> spectra(const EffectiveModel& model, const EmitterSet& emitters,
                                                  const Extent& extent);
// Eigenvalues of a general dense matrix (LAPACK zgeev).
Eigen::VectorXcd eigenvalues(const Eigen::MatrixXcd& m);

// Photon <r^2> about `origin` using the minimal-image distance for periodic
// extents. Entries with no photon weight are NaN; an all-empty trajectory
// throws.
double mean_squared_displacement(const Eigen::VectorXcd& state, const SiteIndexer& idx, const Cell& origin,
                                 Boundary boundary);
std::vector<double> msd(const Trajectory& trajectory, const SiteIndexer& idx, const Cell& origin,
                        Boundary boundary);

// <bound|psi(t)> for every stored state of the trajectory.
std::vector<cplx> overlap_dynamics(const Eigen::VectorXcd& bound, const Trajectory& trajectory);

struct BicScalingRow {
  int cells = 0;
  double weight = 0.0;          // |c_e|^2 of the normalized BIC
  double predicted_plateau = 0.0;  // weight^2
  double plateau = 0.0;         // long-time |c_e(t)|^2 from the oracle
  double t_final = 0.0;
  double oscillation = 0.0;     // relative change over the last doubling of t
};

struct BicScaling {
  std::vector<BicScalingRow> rows;
  // straight-line fit of weight against 1/L
  double slope = 0.0, intercept = 0.0, linear_r_squared = 0.0;
};

// Alternating-loss chain under OBC, Delta = 0, emitter on A of the middle cell.
BicScaling bic_scaling(double hopping, double kappa, double g, const std::vector<int>& sizes, double t_plateau = 200.0);

}  // namespace nhemit
