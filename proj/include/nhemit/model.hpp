#pragma once

#include <array>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace nhemit {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

// Unit-cell coordinate. Only the first `dimension` entries are meaningful.
using Cell = std::array<int, 2>;

// amplitude * a^dag_{r+offset, to} a_{r, from}, repeated for every cell r.
struct Hopping {
  Cell offset{0, 0};
  int from = 0;
  int to = 0;
  cplx amplitude{0.0, 0.0};
};

// L_r contains coefficient * a_{r+offset, sublattice}.
struct JumpTerm {
  Cell offset{0, 0};
  int sublattice = 0;
  cplx coefficient{0.0, 0.0};
};

struct JumpChannel {
  std::vector<JumpTerm> terms;
};

struct Lattice {
  int dimension = 1;
  int sublattices = 1;
  double kappa = 0.0;
  std::vector<Hopping> hoppings;
  std::vector<JumpChannel> jumps;
  // Catalog entry this lattice came from ("custom" otherwise) and its
  // parameters. Used to pick closed-form propagators.
  std::string name = "custom";
  std::map<std::string, double> params;

  void validate() const;
};

struct Emitter {
  Cell cell{0, 0};
  std::vector<std::pair<int, cplx>> couplings;  // (sublattice, g)
  cplx detuning{0.0, 0.0};

  int primary_sublattice() const;
};

// Emitters kept sorted by cell, then by first coupled sublattice. The
// sorted position is the matrix index used everywhere else.
class EmitterSet {
 public:
  EmitterSet() = default;
  explicit EmitterSet(std::vector<Emitter> emitters);

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const Emitter& operator[](std::size_t n) const { return items_[n]; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  Eigen::VectorXcd detunings() const;
  void validate(const Lattice& lattice) const;

 private:
  std::vector<Emitter> items_;
};

// Lattice after folding the jump operators into the hoppings.
struct EffectiveModel {
  Lattice lattice;
  std::vector<Hopping> hoppings;  // merged, one entry per (offset, to, from)
  int range = 0;                  // max |offset component|
  int dimension() const { return lattice.dimension; }
  int sublattices() const { return lattice.sublattices; }
};

EffectiveModel build_effective(const Lattice& lattice);

// h_k = sum_r J_r exp(-i k.r) over the effective hoppings.
Eigen::MatrixXcd bloch(const EffectiveModel& model, std::array<double, 2> k);

// Same matrix computed directly from the jump operators; used as a check.
Eigen::MatrixXcd bloch_from_jumps(const Lattice& lattice, std::array<double, 2> k);

enum class Boundary { periodic, open };

struct Extent {
  int dimension = 1;
  std::array<int, 2> cells{1, 1};
  std::size_t cell_count() const {
    return dimension == 1 ? std::size_t(cells[0]) : std::size_t(cells[0]) * std::size_t(cells[1]);
  }
};

Extent extent_1d(int length);
Extent extent_2d(int lx, int ly);

// Basis: emitters first, then photon sites, cells row-major with the
// sublattice index running fastest.
struct SiteIndexer {
  Extent extent;
  int sublattices = 1;
  int emitters = 0;

  std::size_t dimension() const { return emitters + extent.cell_count() * sublattices; }
  std::size_t site(const Cell& cell, int sublattice) const;
  Cell cell_of(std::size_t index) const;
  int sublattice_of(std::size_t index) const;
  bool contains(const Cell& cell) const;
};

using SparseH = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

SparseH real_space_hamiltonian(const EffectiveModel& model, const EmitterSet& emitters,
                               const Extent& extent, Boundary boundary);

Eigen::MatrixXcd dense(const SparseH& h);

// H -> iH. Input must be Hermitian.
EffectiveModel wick_rotate(const EffectiveModel& hermitian);

namespace catalog {
Lattice hatano_nelson(double hopping, double kappa);
Lattice hn_unidirectional(double kappa);
Lattice alternating_loss(double hopping, double kappa);
Lattice wick_chain(double hopping);
Lattice swap2d(double kappa);
Lattice hn_nnn(double kappa, double kappa_next);

// Hermitian nearest-neighbour chain, h_k = -2J(cos k + 1) when `shifted`.
Lattice hermitian_chain(double hopping, bool shifted);

Lattice by_name(const std::string& name, const std::map<std::string, double>& params);
std::vector<std::string> names();
}  // namespace catalog

}  // namespace nhemit
