#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nhemit/model.hpp"

namespace nhemit {

// Which side of a branch cut a value is continued from. `second` is the
// analytic continuation of the first-sheet function across the nearest cut.
enum class Sheet { first, second };

struct ElementRequest {
  Cell offset{0, 0};
  int to = 0;
  int from = 0;
};

// Real-space bare photon resolvent
//   G0(z; r)_{to,from} = int d^dk/(2pi)^d exp(i k.r) [(z - h_k)^{-1}]_{to,from}.
class LatticePropagator {
 public:
  virtual ~LatticePropagator() = default;
  virtual int dimension() const = 0;
  virtual int sublattices() const = 0;
  virtual std::string method() const = 0;
  virtual cplx element(cplx z, const Cell& r, int to, int from, Sheet sheet) const = 0;
  virtual std::vector<cplx> elements(cplx z, const std::vector<ElementRequest>& requests, Sheet sheet) const;
};

// Trapezoidal k-grid sum. Exponentially accurate away from the spectrum.
class QuadraturePropagator final : public LatticePropagator {
 public:
  QuadraturePropagator(const EffectiveModel& model, int grid);
  int dimension() const override { return dim_; }
  int sublattices() const override { return nsub_; }
  std::string method() const override { return "quadrature"; }
  int grid() const { return grid_; }
  cplx element(cplx z, const Cell& r, int to, int from, Sheet sheet) const override;
  std::vector<cplx> elements(cplx z, const std::vector<ElementRequest>& requests, Sheet sheet) const override;
  double distance_to_spectrum(cplx z) const;

 private:
  int dim_, nsub_, grid_;
  std::vector<cplx> blochs_;  // row-major h_k, one block per grid point
  std::vector<std::array<double, 2>> ks_;
  std::vector<cplx> eigen_;  // all band energies on the grid
};

// Single-band chain h_k = t_right e^{-ik} + t_left e^{ik} + onsite, solved by
// residues of the characteristic quadratic. Covers the Hatano-Nelson family,
// its unidirectional limit and the Hermitian chain.
class ChainPropagator final : public LatticePropagator {
 public:
  ChainPropagator(cplx t_right, cplx t_left, cplx onsite);
  int dimension() const override { return 1; }
  int sublattices() const override { return 1; }
  std::string method() const override { return "closed_form"; }
  cplx element(cplx z, const Cell& r, int to, int from, Sheet sheet) const override;
  cplx phi(cplx z, int x, Sheet sheet = Sheet::first) const;

 private:
  cplx tr_, tl_, eps_;
};

// Two-band chain with loss on sublattice A (index 0).
class AlternatingLossPropagator final : public LatticePropagator {
 public:
  AlternatingLossPropagator(double hopping, double kappa);
  int dimension() const override { return 1; }
  int sublattices() const override { return 2; }
  std::string method() const override { return "closed_form"; }
  cplx element(cplx z, const Cell& r, int to, int from, Sheet sheet) const override;

 private:
  double j_, kappa_;
};

// Chain with h_k = -2iJ(1 + cos k). On-site element uses the square-root
// form; other offsets use the chain residues.
class WickChainPropagator final : public LatticePropagator {
 public:
  explicit WickChainPropagator(double hopping);
  int dimension() const override { return 1; }
  int sublattices() const override { return 1; }
  std::string method() const override { return "closed_form"; }
  cplx element(cplx z, const Cell& r, int to, int from, Sheet sheet) const override;

 private:
  double j_;
  ChainPropagator chain_;
};

// Square-lattice swap model; only on-site, same-sublattice elements are known
// in closed form (complete elliptic integral).
class Swap2dPropagator final : public LatticePropagator {
 public:
  explicit Swap2dPropagator(double kappa);
  int dimension() const override { return 2; }
  int sublattices() const override { return 2; }
  std::string method() const override { return "closed_form"; }
  cplx element(cplx z, const Cell& r, int to, int from, Sheet sheet) const override;

 private:
  double kappa_;
};

std::shared_ptr<const LatticePropagator> quadrature_propagator(const EffectiveModel& model, int grid);
// Closed form for catalog lattices. Returns nullptr when none is known.
std::shared_ptr<const LatticePropagator> closed_form_propagator(const Lattice& lattice);

// Emitter self-energy Sigma(z) built from a propagator.
class SelfEnergy {
 public:
  SelfEnergy(EffectiveModel model, EmitterSet emitters, std::shared_ptr<const LatticePropagator> propagator);

  Eigen::MatrixXcd operator()(cplx z, Sheet sheet = Sheet::first) const;
  // (z - Delta - Sigma(z))^{-1}
  Eigen::MatrixXcd green(cplx z, Sheet sheet = Sheet::first) const;
  // c_{r,s} for the photon cloud attached to emitter amplitudes c_e at energy E.
  std::vector<cplx> photon_amplitudes(cplx energy, const Eigen::VectorXcd& ce,
                                      const std::vector<std::pair<Cell, int>>& sites,
                                      Sheet sheet = Sheet::first) const;

  const EffectiveModel& model() const { return model_; }
  const EmitterSet& emitters() const { return emitters_; }
  const LatticePropagator& propagator() const { return *prop_; }
  std::shared_ptr<const LatticePropagator> propagator_ptr() const { return prop_; }
  std::string method() const { return prop_->method(); }

 private:
  EffectiveModel model_;
  EmitterSet emitters_;
  std::shared_ptr<const LatticePropagator> prop_;
  std::vector<ElementRequest> requests_;
  struct Term { int m, n, request; cplx weight; };
  std::vector<Term> terms_;
};

// Self-energy by k-grid quadrature. grid <= 0 doubles the grid from a
// default until successive values agree to `tol`.
Eigen::MatrixXcd sigma_numeric(const EffectiveModel& model, const EmitterSet& emitters, cplx z,
                               int grid = 0, double tol = 1e-12);

// Hatano-Nelson closed form for one matrix element, x = x_m - x_n.
cplx sigma_hn_closed(cplx z, int x, double hopping, double kappa, cplx g_m, cplx g_n,
                     Sheet sheet = Sheet::first);
// Unidirectional limit written out piecewise.
cplx sigma_hn_unidirectional(cplx z, int x, double kappa, double g);

enum class PtPair { AA, BB, AB, BA };
cplx sigma_pt_closed(cplx z, int x, PtPair pair, double hopping, double kappa, double g,
                     Sheet sheet = Sheet::first);
cplx sigma_2d_closed(cplx z, double kappa, double g);
// Sigma(z) = -i Sigma_B(-i z) for a Hermitian bath self-energy Sigma_B.
cplx sigma_wick(cplx z, const std::function<cplx(cplx)>& hermitian_sigma);
cplx sigma_wick_chain(cplx z, double hopping, double g, Sheet sheet = Sheet::first);

// ind(h_k - z) for a 1D model. Throws if z is on the spectrum.
int winding_number(const EffectiveModel& model, cplx z);

// Hopping ranges of a single-band 1D model: `right` is the largest positive
// offset carrying amplitude, `left` the largest negative one (as a positive
// number).
struct HoppingRanges { int right = 0; int left = 0; };
HoppingRanges hopping_ranges(const EffectiveModel& model);

enum class VanishingSide { none, nonnegative, nonpositive };

struct VanishingCheck {
  int index = 0;
  HoppingRanges ranges;
  VanishingSide predicted = VanishingSide::none;
  double max_forbidden = 0.0;  // largest |G0(z; x)| on the predicted side
  bool holds = true;
};

// grid <= 0 refines the k-grid until the result is stable.
VanishingCheck maximal_winding_vanishing_check(const EffectiveModel& model, cplx z, int max_offset = 12,
                                               int grid = 0);

// Sampled PBC spectrum for distance queries.
class SpectrumSampler {
 public:
  SpectrumSampler(const EffectiveModel& model, int grid);
  double distance(cplx z) const;
  const std::vector<cplx>& points() const { return points_; }

 private:
  std::vector<cplx> points_;
};

}  // namespace nhemit
