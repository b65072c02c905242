#include "nhemit/model.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "nhemit/errors.hpp"

namespace nhemit {

namespace {

using HopKey = std::tuple<int, int, int, int>;  // offset x, offset y, to, from

std::map<HopKey, cplx> merge(const std::vector<Hopping>& hops) {
  std::map<HopKey, cplx> out;
  for (const auto& h : hops) out[{h.offset[0], h.offset[1], h.to, h.from}] += h.amplitude;
  return out;
}

std::vector<Hopping> unmerge(const std::map<HopKey, cplx>& m, double drop = 1e-15) {
  std::vector<Hopping> out;
  for (const auto& [key, amp] : m) {
    if (std::abs(amp) <= drop) continue;
    const auto& [dx, dy, to, from] = key;
    out.push_back({{dx, dy}, from, to, amp});
  }
  return out;
}

bool is_hermitian(const std::map<HopKey, cplx>& m, double tol) {
  for (const auto& [key, amp] : m) {
    const auto& [dx, dy, to, from] = key;
    auto it = m.find({-dx, -dy, from, to});
    cplx partner = it == m.end() ? cplx{} : it->second;
    if (std::abs(amp - std::conj(partner)) > tol) return false;
  }
  return true;
}

double phase_dot(const std::array<double, 2>& k, const Cell& d, int dim) {
  return dim == 1 ? k[0] * d[0] : k[0] * d[0] + k[1] * d[1];
}

}  // namespace

void Lattice::validate() const {
  if (dimension != 1 && dimension != 2) throw ModelError("lattice dimension must be 1 or 2");
  if (sublattices < 1) throw ModelError("lattice needs at least one sublattice");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ModelError("loss rate must be finite and non-negative");
  auto check_offset = [&](const Cell& c) {
    if (dimension == 1 && c[1] != 0) throw ModelError("1D lattice with a 2D offset");
  };
  for (const auto& h : hoppings) {
    check_offset(h.offset);
    if (h.from < 0 || h.from >= sublattices || h.to < 0 || h.to >= sublattices)
      throw ModelError("hopping sublattice index out of range");
    if (!std::isfinite(h.amplitude.real()) || !std::isfinite(h.amplitude.imag()))
      throw ModelError("hopping amplitude is not finite");
  }
  if (!is_hermitian(merge(hoppings), 1e-12)) throw ModelError("coherent hoppings are not Hermitian");
  for (const auto& ch : jumps) {
    if (ch.terms.empty()) throw ModelError("empty jump channel");
    for (const auto& t : ch.terms) {
      check_offset(t.offset);
      if (t.sublattice < 0 || t.sublattice >= sublattices) throw ModelError("jump sublattice out of range");
    }
  }
}

int Emitter::primary_sublattice() const {
  return couplings.empty() ? 0 : couplings.front().first;
}

EmitterSet::EmitterSet(std::vector<Emitter> emitters) : items_(std::move(emitters)) {
  std::stable_sort(items_.begin(), items_.end(), [](const Emitter& a, const Emitter& b) {
    if (a.cell != b.cell) return a.cell < b.cell;
    return a.primary_sublattice() < b.primary_sublattice();
  });
}

Eigen::VectorXcd EmitterSet::detunings() const {
  Eigen::VectorXcd d(items_.size());
  for (std::size_t n = 0; n < items_.size(); ++n) d[n] = items_[n].detuning;
  return d;
}

void EmitterSet::validate(const Lattice& lattice) const {
  for (const auto& e : items_) {
    if (lattice.dimension == 1 && e.cell[1] != 0) throw ModelError("emitter cell has two coordinates on a 1D lattice");
    for (const auto& [s, g] : e.couplings)
      if (s < 0 || s >= lattice.sublattices) throw ModelError("emitter couples to a missing sublattice");
  }
}

EffectiveModel build_effective(const Lattice& lattice) {
  lattice.validate();
  auto m = merge(lattice.hoppings);
  const cplx pref = -0.5 * I * lattice.kappa;
  for (const auto& ch : lattice.jumps) {
    for (const auto& a : ch.terms) {
      for (const auto& b : ch.terms) {
        Cell d{a.offset[0] - b.offset[0], a.offset[1] - b.offset[1]};
        m[{d[0], d[1], a.sublattice, b.sublattice}] += pref * std::conj(a.coefficient) * b.coefficient;
      }
    }
  }
  EffectiveModel out;
  out.lattice = lattice;
  out.hoppings = unmerge(m);
  for (const auto& h : out.hoppings)
    out.range = std::max({out.range, std::abs(h.offset[0]), std::abs(h.offset[1])});
  return out;
}

Eigen::MatrixXcd bloch(const EffectiveModel& model, std::array<double, 2> k) {
  const int n = model.sublattices();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& hop : model.hoppings)
    h(hop.to, hop.from) += hop.amplitude * std::polar(1.0, -phase_dot(k, hop.offset, model.dimension()));
  return h;
}

Eigen::MatrixXcd bloch_from_jumps(const Lattice& lattice, std::array<double, 2> k) {
  const int n = lattice.sublattices;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& hop : lattice.hoppings)
    h(hop.to, hop.from) += hop.amplitude * std::polar(1.0, -phase_dot(k, hop.offset, lattice.dimension));
  for (const auto& ch : lattice.jumps) {
    Eigen::VectorXcd l = Eigen::VectorXcd::Zero(n);
    for (const auto& t : ch.terms)
      l[t.sublattice] += t.coefficient * std::polar(1.0, phase_dot(k, t.offset, lattice.dimension));
    h += -0.5 * I * lattice.kappa * l.conjugate() * l.transpose();
  }
  return h;
}

Extent extent_1d(int length) {
  if (length < 1) throw PreconditionError("lattice extent must be positive");
  return Extent{1, {length, 1}};
}

Extent extent_2d(int lx, int ly) {
  if (lx < 1 || ly < 1) throw PreconditionError("lattice extent must be positive");
  return Extent{2, {lx, ly}};
}

bool SiteIndexer::contains(const Cell& c) const {
  if (c[0] < 0 || c[0] >= extent.cells[0]) return false;
  if (extent.dimension == 2 && (c[1] < 0 || c[1] >= extent.cells[1])) return false;
  return extent.dimension == 2 || c[1] == 0;
}

std::size_t SiteIndexer::site(const Cell& c, int s) const {
  std::size_t cell = extent.dimension == 1 ? std::size_t(c[0])
                                           : std::size_t(c[0]) * extent.cells[1] + std::size_t(c[1]);
  return emitters + cell * sublattices + s;
}

Cell SiteIndexer::cell_of(std::size_t index) const {
  std::size_t cell = (index - emitters) / sublattices;
  if (extent.dimension == 1) return {int(cell), 0};
  return {int(cell / extent.cells[1]), int(cell % extent.cells[1])};
}

int SiteIndexer::sublattice_of(std::size_t index) const {
  return int((index - emitters) % sublattices);
}

SparseH real_space_hamiltonian(const EffectiveModel& model, const EmitterSet& emitters,
                               const Extent& extent, Boundary boundary) {
  if (extent.dimension != model.dimension()) throw PreconditionError("extent and lattice dimension differ");
  emitters.validate(model.lattice);
  SiteIndexer idx{extent, model.sublattices(), int(emitters.size())};
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(extent.cell_count() * model.hoppings.size() + 4 * emitters.size());

  const int lx = extent.cells[0];
  const int ly = extent.dimension == 2 ? extent.cells[1] : 1;
  auto wrap = [&](int v, int len, bool& ok) {
    if (boundary == Boundary::periodic) return ((v % len) + len) % len;
    ok = ok && v >= 0 && v < len;
    return v;
  };
  for (int x = 0; x < lx; ++x) {
    for (int y = 0; y < ly; ++y) {
      Cell src{x, y};
      for (const auto& h : model.hoppings) {
        bool ok = true;
        Cell dst{wrap(x + h.offset[0], lx, ok), extent.dimension == 2 ? wrap(y + h.offset[1], ly, ok) : 0};
        if (!ok) continue;
        trip.emplace_back(int(idx.site(dst, h.to)), int(idx.site(src, h.from)), h.amplitude);
      }
    }
  }
  for (std::size_t n = 0; n < emitters.size(); ++n) {
    const auto& e = emitters[n];
    if (!idx.contains(e.cell)) throw PreconditionError("emitter lies outside the finite lattice");
    trip.emplace_back(int(n), int(n), e.detuning);
    for (const auto& [s, g] : e.couplings) {
      const int site = int(idx.site(e.cell, s));
      trip.emplace_back(site, int(n), g);
      trip.emplace_back(int(n), site, std::conj(g));
    }
  }
  const int dim = int(idx.dimension());
  SparseH h(dim, dim);
  h.setFromTriplets(trip.begin(), trip.end());
  h.makeCompressed();
  return h;
}

Eigen::MatrixXcd dense(const SparseH& h) { return Eigen::MatrixXcd(h); }

EffectiveModel wick_rotate(const EffectiveModel& hermitian) {
  auto m = merge(hermitian.hoppings);
  if (!is_hermitian(m, 1e-12)) throw PreconditionError("Wick rotation needs a Hermitian Hamiltonian");
  EffectiveModel out = hermitian;
  for (auto& h : out.hoppings) h.amplitude *= I;
  out.lattice.hoppings = out.hoppings;
  out.lattice.jumps.clear();
  out.lattice.kappa = 0.0;
  out.lattice.name = "wick_rotated_" + hermitian.lattice.name;
  return out;
}

namespace catalog {

namespace {
Hopping hop1(int d, cplx a) { return Hopping{{d, 0}, 0, 0, a}; }
void require_loss(double kappa) {
  if (!(kappa > 0.0)) throw ModelError("this model needs a positive loss rate");
}
}  // namespace

Lattice hatano_nelson(double hopping, double kappa) {
  if (kappa < 0.0) throw ModelError("negative loss rate");
  Lattice l;
  l.name = "hatano_nelson";
  l.params = {{"J", hopping}, {"kappa", kappa}};
  l.kappa = kappa;
  l.hoppings = {hop1(1, hopping), hop1(-1, hopping)};
  l.jumps = {JumpChannel{{{{0, 0}, 0, 1.0}, {{1, 0}, 0, -I}}}};
  return l;
}

Lattice hn_unidirectional(double kappa) {
  require_loss(kappa);
  Lattice l = hatano_nelson(0.5 * kappa, kappa);
  l.name = "hn_unidirectional";
  l.params = {{"kappa", kappa}};
  return l;
}

Lattice alternating_loss(double hopping, double kappa) {
  if (kappa < 0.0) throw ModelError("negative loss rate");
  Lattice l;
  l.name = "alternating_loss";
  l.params = {{"J", hopping}, {"kappa", kappa}};
  l.sublattices = 2;
  l.kappa = kappa;
  // A at cell x couples to B at x and x-1.
  l.hoppings = {
      {{0, 0}, 1, 0, hopping}, {{1, 0}, 1, 0, hopping},
      {{0, 0}, 0, 1, hopping}, {{-1, 0}, 0, 1, hopping},
  };
  l.jumps = {JumpChannel{{{{0, 0}, 0, std::sqrt(2.0)}}}};
  return l;
}

Lattice wick_chain(double hopping) {
  if (!(hopping > 0.0)) throw ModelError("Wick chain needs a positive hopping");
  Lattice l;
  l.name = "wick_chain";
  l.params = {{"J", hopping}};
  l.kappa = 2.0 * hopping;
  l.jumps = {JumpChannel{{{{0, 0}, 0, 1.0}, {{1, 0}, 0, 1.0}}}};
  return l;
}

Lattice swap2d(double kappa) {
  require_loss(kappa);
  Lattice l;
  l.name = "swap2d";
  l.params = {{"kappa", kappa}};
  l.dimension = 2;
  l.sublattices = 2;
  l.kappa = kappa;
  const double j = 0.5 * kappa;
  const int A = 0, B = 1;
  for (Cell d : {Cell{0, 0}, Cell{1, 0}, Cell{0, 1}, Cell{1, 1}}) {
    l.hoppings.push_back({d, B, A, j});
    l.hoppings.push_back({{-d[0], -d[1]}, A, B, j});
  }
  l.jumps = {
      JumpChannel{{{{0, 0}, A, 1.0}, {{-1, 0}, B, -I}}},
      JumpChannel{{{{0, 0}, A, 1.0}, {{0, -1}, B, -I}}},
      JumpChannel{{{{0, 0}, B, 1.0}, {{0, 0}, A, -I}}},
      JumpChannel{{{{0, 0}, B, 1.0}, {{1, 1}, A, -I}}},
  };
  return l;
}

Lattice hn_nnn(double kappa, double kappa_next) {
  require_loss(kappa);
  if (!(kappa_next > 0.0)) throw ModelError("next-nearest loss rate must be positive");
  // Two unidirectional channels; the second one is rescaled so a single
  // global loss rate can be kept.
  const double r = std::sqrt(kappa_next / kappa);
  Lattice l;
  l.name = "hn_nnn";
  l.params = {{"kappa", kappa}, {"kappa2", kappa_next}};
  l.kappa = kappa;
  l.hoppings = {hop1(1, 0.5 * kappa), hop1(-1, 0.5 * kappa), hop1(2, 0.5 * kappa_next), hop1(-2, 0.5 * kappa_next)};
  l.jumps = {
      JumpChannel{{{{0, 0}, 0, 1.0}, {{1, 0}, 0, -I}}},
      JumpChannel{{{{0, 0}, 0, r}, {{2, 0}, 0, -I * r}}},
  };
  return l;
}

Lattice hermitian_chain(double hopping, bool shifted) {
  Lattice l;
  l.name = "hermitian_chain";
  l.params = {{"J", hopping}, {"shifted", shifted ? 1.0 : 0.0}};
  l.hoppings = {hop1(1, shifted ? -hopping : hopping), hop1(-1, shifted ? -hopping : hopping)};
  if (shifted) l.hoppings.push_back(hop1(0, -2.0 * hopping));
  return l;
}

Lattice by_name(const std::string& name, const std::map<std::string, double>& params) {
  auto get = [&](const char* key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  for (const auto& [key, v] : params) {
    static const char* known[] = {"J", "kappa", "kappa2", "shifted"};
    if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; }))
      throw ModelError("unknown model parameter '" + key + "'");
    (void)v;
  }
  if (name == "hatano_nelson") return hatano_nelson(get("J", 0.15), get("kappa", 1.0));
  if (name == "hn_unidirectional") return hn_unidirectional(get("kappa", 1.0));
  if (name == "alternating_loss") return alternating_loss(get("J", 1.0), get("kappa", 1.0));
  if (name == "wick_chain") return wick_chain(get("J", 1.0));
  if (name == "swap2d") return swap2d(get("kappa", 1.0));
  if (name == "hn_nnn") return hn_nnn(get("kappa", 1.0), get("kappa2", 2.0));
  if (name == "hermitian_chain") return hermitian_chain(get("J", 1.0), get("shifted", 0.0) != 0.0);
  throw ModelError("unknown catalog model '" + name + "'");
}

std::vector<std::string> names() {
  return {"hatano_nelson", "hn_unidirectional", "alternating_loss", "wick_chain", "swap2d", "hn_nnn", "hermitian_chain"};
}

}  // namespace catalog

}  // namespace nhemit
