#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "nhemit/acceptance.hpp"
#include "nhemit/analysis.hpp"
#include "nhemit/boundstates.hpp"
#include "nhemit/dynamics.hpp"
#include "nhemit/errors.hpp"
#include "nhemit/io.hpp"
#include "nhemit/parallel.hpp"
#include "nhemit/scenarios.hpp"

using namespace nhemit;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0, kUsage = 2, kNumerical = 3, kCheckFailed = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, sep)) out.push_back(part);
  return out;
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (...) {
  }
  throw UsageError("not a number: '" + s + "'");
}

int to_int(const std::string& s) {
  const double v = to_double(s);
  if (v != std::floor(v)) throw UsageError("not an integer: '" + s + "'");
  return int(v);
}

struct Axis {
  double a, b;
  int n;
  double at(int i) const { return n == 1 ? a : a + (b - a) * i / (n - 1); }
};

Axis parse_axis(const std::string& s) {
  auto p = split(s, ':');
  if (p.size() != 3) throw UsageError("expected lo:hi:n, got '" + s + "'");
  Axis ax{to_double(p[0]), to_double(p[1]), to_int(p[2])};
  if (ax.n < 1) throw UsageError("axis needs at least one point");
  return ax;
}

std::pair<Axis, Axis> parse_z_grid(const std::string& s) {
  auto p = split(s, ',');
  if (p.size() != 2) throw UsageError("--z-grid expects re0:re1:n,im0:im1:m");
  return {parse_axis(p[0]), parse_axis(p[1])};
}

SearchRegion parse_region(const std::string& s) {
  auto p = split(s, ':');
  if (p.size() != 4) throw UsageError("--region expects re0:re1:im0:im1");
  return {to_double(p[0]), to_double(p[1]), to_double(p[2]), to_double(p[3])};
}

Extent parse_cells(const std::string& s, int dimension) {
  auto p = split(s, ',');
  if (int(p.size()) != dimension) throw UsageError("--cells needs " + std::to_string(dimension) + " entries");
  return dimension == 1 ? extent_1d(to_int(p[0])) : extent_2d(to_int(p[0]), to_int(p[1]));
}

Boundary parse_boundary(const std::string& s) {
  if (s == "pbc" || s == "periodic") return Boundary::periodic;
  if (s == "obc" || s == "open") return Boundary::open;
  throw UsageError("boundary must be pbc or obc");
}

Cell parse_cell(const std::string& s, int dimension) {
  auto p = split(s, ',');
  if (int(p.size()) != dimension) throw UsageError("cell '" + s + "' does not match the lattice dimension");
  Cell c{0, 0};
  for (int d = 0; d < dimension; ++d) c[d] = to_int(p[d]);
  return c;
}

// Model from --model plus any --emitter additions.
struct ModelArgs {
  std::string model;
  std::vector<std::string> emitters;

  void add(CLI::App* app, bool required = true) {
    auto* o = app->add_option("--model", model, "model spec: JSON file or catalog string name:k=v,...");
    if (required) o->required();
    app->add_option("--emitter", emitters, "extra emitter cell=..;sub=..;g=..;delta=..");
  }

  ModelSpec load() const {
    ModelSpec spec = load_model(model);
    if (!emitters.empty()) {
      std::vector<Emitter> all(spec.emitters.begin(), spec.emitters.end());
      for (const auto& e : emitters) all.push_back(parse_emitter(e, spec.lattice.dimension));
      spec.emitters = EmitterSet(all);
      spec.emitters.validate(spec.lattice);
    }
    return spec;
  }
};

std::shared_ptr<const LatticePropagator> propagator_for(const ModelSpec& spec, int grid) {
  if (grid <= 0)
    if (auto p = closed_form_propagator(spec.lattice)) return p;
  return quadrature_propagator(build_effective(spec.lattice), grid > 0 ? grid : 4096);
}

void print_json(const json& doc, const std::string& path) {
  if (path.empty() || path == "-")
    std::cout << doc.dump(2) << "\n";
  else
    write_json(path, doc);
}

// ---------------------------------------------------------------- selfenergy
struct SelfEnergyCmd {
  ModelArgs m;
  std::string grid_spec, out = "-";
  int grid = 0;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("selfenergy", "self-energy matrix on a grid of complex energies");
    m.add(c);
    c->add_option("--z-grid", grid_spec, "re0:re1:n,im0:im1:m")->required();
    c->add_option("--grid", grid, "k-grid for numerical quadrature (0: closed form when available, else adaptive)");
    c->add_option("--out", out, "CSV path, - for stdout");
    c->callback([this] { run(); });
  }

  void run() {
    auto spec = m.load();
    if (spec.emitters.empty()) throw UsageError("the model has no emitters");
    auto [re, im] = parse_z_grid(grid_spec);
    auto model = build_effective(spec.lattice);
    auto closed = grid == 0 ? closed_form_propagator(spec.lattice) : nullptr;
    std::optional<SelfEnergy> sigma;
    if (closed) sigma.emplace(model, spec.emitters, closed);
    else if (grid > 0) sigma.emplace(model, spec.emitters, quadrature_propagator(model, grid));
    const int n = int(spec.emitters.size());
    std::vector<std::string> header{"re_z", "im_z"};
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        header.push_back("re_s" + std::to_string(a) + std::to_string(b));
        header.push_back("im_s" + std::to_string(a) + std::to_string(b));
      }
    std::vector<std::vector<double>> rows(std::size_t(re.n) * im.n);
    parallel_for(rows.size(), [&](std::size_t k) {
      const cplx z(re.at(int(k) / im.n), im.at(int(k) % im.n));
      Eigen::MatrixXcd s = sigma ? (*sigma)(z) : sigma_numeric(model, spec.emitters, z);
      std::vector<double> r{z.real(), z.imag()};
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          r.push_back(s(a, b).real());
          r.push_back(s(a, b).imag());
        }
      rows[k] = std::move(r);
    });
    CsvWriter w(out);
    w.header(header);
    for (const auto& r : rows) w.row(r);
  }
};

// ---------------------------------------------------------------- bound-states
struct BoundStatesCmd {
  ModelArgs m;
  std::string region, out = "-";
  int seeds = 40, radius = 30, grid = 0;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("bound-states", "roots of det[E - Delta - Sigma(E)] with photon profiles");
    m.add(c);
    c->add_option("--region", region, "re0:re1:im0:im1")->required();
    c->add_option("--seeds", seeds, "Newton seeds per axis");
    c->add_option("--radius", radius, "profile radius in cells");
    c->add_option("--grid", grid, "k-grid for the propagator (0: closed form when available)");
    c->add_option("--out", out, "JSON path; profiles go next to it");
    c->callback([this] { run(); });
  }

  void run() {
    auto spec = m.load();
    if (spec.emitters.empty()) throw UsageError("the model has no emitters");
    SelfEnergy sigma(build_effective(spec.lattice), spec.emitters, propagator_for(spec, grid));
    SpectrumSampler sampler(sigma.model(), 2048);
    BoundStateOptions opt;
    opt.seeds_re = opt.seeds_im = seeds;
    auto states = find_bound_states(sigma, parse_region(region), opt, &sampler);
    const bool to_stdout = out.empty() || out == "-";
    const fs::path base = to_stdout ? fs::path("bound_states.json") : fs::path(out);
    const std::string dir = base.has_parent_path() ? base.parent_path().string() : ".";
    json doc = export_bound_states(sigma, states, dir, base.stem().string() + "_profile", radius);
    print_json(doc, out);
  }
};

// ---------------------------------------------------------------- dynamics
struct DynamicsCmd {
  ModelArgs m;
  std::string engine = "oracle", initial = "emitter:0", out = "-", cells, boundary = "pbc", field_dir;
  double t_max = 10.0, tolerance = 1e-10;
  int samples = 101;
  std::string branch_point = "0";

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("dynamics", "emitter amplitudes in time");
    m.add(c);
    c->add_option("--engine", engine, "oracle | resolvent | asymptotic")
        ->check(CLI::IsMember({"oracle", "resolvent", "asymptotic"}));
    c->add_option("--t-max", t_max);
    c->add_option("--t-samples", samples);
    c->add_option("--initial", initial, "emitter:<n> or photon:<cell>[:<sublattice>]");
    c->add_option("--cells", cells, "finite lattice for the oracle, e.g. 401 or 30,30");
    c->add_option("--boundary", boundary, "pbc | obc");
    c->add_option("--tolerance", tolerance, "resolvent accuracy per amplitude");
    c->add_option("--branch-point", branch_point, "branch point for the asymptotic engine");
    c->add_option("--field-dir", field_dir, "oracle only: write photon snapshots field_<i>.csv here");
    c->add_option("--out", out, "CSV path");
    c->callback([this] { run(); });
  }

  void run() {
    auto spec = m.load();
    const int n = int(spec.emitters.size());
    auto times = linspace(0.0, t_max, samples);
    auto parts = split(initial, ':');
    if (parts.size() < 2) throw UsageError("--initial expects emitter:<n> or photon:<cell>");
    std::vector<Eigen::VectorXcd> amps;
    std::vector<double> totals;

    if (engine == "oracle") {
      if (cells.empty()) throw UsageError("the oracle engine needs --cells");
      auto ext = parse_cells(cells, spec.lattice.dimension);
      SiteIndexer idx{ext, spec.lattice.sublattices, n};
      Eigen::VectorXcd psi0;
      if (parts[0] == "emitter") {
        const int e = to_int(parts[1]);
        if (e < 0 || e >= n) throw UsageError("no emitter " + parts[1]);
        psi0 = emitter_excitation(idx, e);
      } else if (parts[0] == "photon") {
        const int sub = parts.size() > 2 ? to_int(parts[2]) : 0;
        psi0 = photon_excitation(idx, parse_cell(parts[1], spec.lattice.dimension), sub);
      } else {
        throw UsageError("--initial expects emitter:<n> or photon:<cell>");
      }
      const auto bc = parse_boundary(boundary);
      std::size_t frame = 0;
      Observer snap;
      if (!field_dir.empty()) {
        fs::create_directories(field_dir);
        snap = [&](double t, const Eigen::VectorXcd& v) {
          CsvWriter w((fs::path(field_dir) / ("field_" + std::to_string(frame++) + ".csv")).string());
          w.header({"t", "x", "y", "sublattice", "re", "im"});
          for (std::size_t k = std::size_t(n); k < idx.dimension(); ++k) {
            Cell c = idx.cell_of(k);
            w.row({t, double(c[0]), double(c[1]), double(idx.sublattice_of(k)), v[k].real(), v[k].imag()});
          }
        };
      }
      auto tr = evolve_finite(real_space_hamiltonian(build_effective(spec.lattice), spec.emitters, ext, bc), psi0, times,
                              n, {}, false, snap);
      amps = tr.emitters;
      totals = tr.norms;
    } else {
      if (parts[0] != "emitter") throw UsageError("the " + engine + " engine supports only emitter initial states");
      const int e = to_int(parts[1]);
      if (e < 0 || e >= n) throw UsageError("no emitter " + parts[1]);
      SelfEnergy sigma(build_effective(spec.lattice), spec.emitters, propagator_for(spec, 0));
      Eigen::VectorXcd c0 = Eigen::VectorXcd::Zero(n);
      c0[e] = 1.0;
      if (engine == "resolvent") {
        ResolventOptions opt;
        opt.tolerance = tolerance;
        amps = emitter_amplitudes_resolvent(sigma, c0, times, opt);
      } else {
        std::vector<BranchCut> cuts;
        for (int k = 0; k < n; ++k) {
          Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n);
          u[k] = 1.0;
          cuts.push_back(branch_cut_asymptotics(sigma, parse_complex(branch_point), c0, u));
        }
        for (double t : times) {
          Eigen::VectorXcd a(n);
          for (int k = 0; k < n; ++k) a[k] = t > 0 ? cuts[k].amplitude(t) : cplx(std::nan(""), std::nan(""));
          amps.push_back(a);
        }
      }
    }
    std::vector<std::string> header{"t"};
    for (int k = 0; k < n; ++k) {
      header.push_back("re_c" + std::to_string(k));
      header.push_back("im_c" + std::to_string(k));
    }
    if (!totals.empty()) header.push_back("P_total");
    CsvWriter w(out);
    w.header(header);
    for (std::size_t i = 0; i < times.size(); ++i) {
      std::vector<double> r{times[i]};
      for (int k = 0; k < n; ++k) {
        r.push_back(amps[i][k].real());
        r.push_back(amps[i][k].imag());
      }
      if (!totals.empty()) r.push_back(totals[i]);
      w.row(r);
    }
  }
};

// ---------------------------------------------------------------- spectra
struct SpectraCmd {
  ModelArgs m;
  std::string cells, boundary = "both", out = "-", summary;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("spectra", "eigenvalues of the finite lattice");
    m.add(c);
    c->add_option("--cells", cells, "e.g. 50 or 20,20")->required();
    c->add_option("--boundary", boundary, "pbc | obc | both");
    c->add_option("--out", out, "CSV path");
    c->add_option("--summary", summary, "JSON summary path (stdout when omitted and --out is a file)");
    c->callback([this] { run(); });
  }

  void run() {
    auto spec = m.load();
    auto model = build_effective(spec.lattice);
    auto ext = parse_cells(cells, spec.lattice.dimension);
    std::vector<SpectrumReport> reps;
    if (boundary == "both") {
      auto [p, o] = spectra(model, spec.emitters, ext);
      reps = {p, o};
    } else {
      reps.push_back(spectrum(model, spec.emitters, ext, parse_boundary(boundary)));
    }
    CsvWriter w(out);
    w.header({"open", "re", "im"});
    json s = json::object();
    for (const auto& r : reps) {
      double lo = 1e300, hi = -1e300;
      for (cplx e : r.eigenvalues) {
        w.row({r.boundary == Boundary::open ? 1.0 : 0.0, e.real(), e.imag()});
        lo = std::min(lo, e.imag());
        hi = std::max(hi, e.imag());
      }
      s[r.boundary == Boundary::open ? "obc" : "pbc"] = {{"count", r.eigenvalues.size()}, {"min_im", lo}, {"max_im", hi}};
    }
    if (!summary.empty() || out != "-") print_json(s, summary);
  }
};

// ---------------------------------------------------------------- winding
struct WindingCmd {
  ModelArgs m;
  std::string grid_spec, out = "-";
  bool vanishing = false;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("winding", "spectral winding number on a grid of reference energies");
    m.add(c);
    c->add_option("--z-grid", grid_spec, "re0:re1:n,im0:im1:m")->required();
    c->add_flag("--vanishing", vanishing, "also test the one-sided vanishing of the bare propagator");
    c->add_option("--out", out, "CSV path");
    c->callback([this] { run(); });
  }

  void run() {
    auto spec = m.load();
    auto model = build_effective(spec.lattice);
    if (model.dimension() != 1 || model.sublattices() != 1) throw UsageError("winding needs a single-band 1D model");
    auto [re, im] = parse_z_grid(grid_spec);
    std::vector<std::vector<double>> rows(std::size_t(re.n) * im.n);
    parallel_for(rows.size(), [&](std::size_t k) {
      const cplx z(re.at(int(k) / im.n), im.at(int(k) % im.n));
      double index = std::nan(""), forbidden = std::nan(""), holds = std::nan("");
      try {
        index = winding_number(model, z);
        if (vanishing) {
          auto v = maximal_winding_vanishing_check(model, z);
          forbidden = v.max_forbidden;
          holds = v.holds ? 1.0 : 0.0;
        }
      } catch (const Error&) {
      }
      rows[k] = vanishing ? std::vector<double>{z.real(), z.imag(), index, forbidden, holds}
                          : std::vector<double>{z.real(), z.imag(), index};
    });
    CsvWriter w(out);
    if (vanishing)
      w.header({"re", "im", "index", "max_forbidden", "holds"});
    else
      w.header({"re", "im", "index"});
    for (const auto& r : rows) w.row(r);
  }
};

// ---------------------------------------------------------------- gbz
struct GbzCmd {
  double hopping = 2.5, kappa = 1.0, g = 0.0, t_max = 20.0;
  std::string delta = "0", out = "-";
  int x = 0, samples = 0;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("gbz", "generalized Brillouin zone of the Hatano-Nelson chain and running waves");
    c->add_option("--J", hopping);
    c->add_option("--kappa", kappa);
    c->add_option("--g", g, "emitter coupling; with --t-samples writes the running wave at --x");
    c->add_option("--delta", delta);
    c->add_option("--x", x);
    c->add_option("--t-max", t_max);
    c->add_option("--t-samples", samples);
    c->add_option("--out", out, "CSV path for the running wave");
    c->callback([this] { run(); });
  }

  void run() {
    const double radius = gbz_radius(hopping, kappa);
    json s = {{"J", hopping}, {"kappa", kappa}, {"radius", radius}};
    if (samples > 0) {
      if (!(g > 0)) throw UsageError("--g is required for the running wave");
      CsvWriter w(out);
      w.header({"t", "re_total", "im_total", "abs2_gbz", "abs2_residues", "abs2_total", "poles_crossed"});
      for (double t : linspace(0.0, t_max, samples)) {
        if (t <= 0) continue;
        auto rw = running_wave_hn(hopping, kappa, parse_complex(delta), g, x, t);
        w.row({t, rw.total.real(), rw.total.imag(), std::norm(rw.circle), std::norm(rw.residues), std::norm(rw.total),
               double(rw.poles_crossed)});
      }
    }
    if (samples == 0 || out != "-") std::cout << s.dump(2) << "\n";
  }
};

// ---------------------------------------------------------------- csv input
std::map<std::string, std::vector<double>> read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read " + path);
  std::string line;
  std::getline(f, line);
  auto names = split(line, ',');
  std::map<std::string, std::vector<double>> cols;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto v = split(line, ',');
    for (std::size_t k = 0; k < names.size() && k < v.size(); ++k) cols[names[k]].push_back(std::stod(v[k]));
  }
  return cols;
}

// ---------------------------------------------------------------- fit-decay
struct FitDecayCmd {
  std::string in, t_column = "t", column, out = "-", summary;
  double t_min = 5.0, t_max = 1e300;
  int half_width = 3;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("fit-decay", "power-law fit and local exponents of a decay curve");
    c->add_option("--in", in, "CSV file")->required();
    c->add_option("--column", column, "population column; or re_/im_ prefix pair via --column c0")->required();
    c->add_option("--t-column", t_column);
    c->add_option("--t-min", t_min);
    c->add_option("--t-max", t_max);
    c->add_option("--half-width", half_width, "sliding window for local exponents");
    c->add_option("--out", out, "CSV of local exponents");
    c->add_option("--summary", summary, "JSON summary path");
    c->callback([this] { run(); });
  }

  void run() {
    auto cols = read_csv(in);
    if (!cols.count(t_column)) throw UsageError("no column " + t_column);
    std::vector<double> y;
    if (cols.count(column)) {
      y = cols[column];
    } else if (cols.count("re_" + column) && cols.count("im_" + column)) {
      const auto &re = cols["re_" + column], &im = cols["im_" + column];
      for (std::size_t i = 0; i < re.size(); ++i) y.push_back(re[i] * re[i] + im[i] * im[i]);
    } else {
      throw UsageError("no column " + column);
    }
    const auto& t = cols[t_column];
    FitWindow w;
    w.t_min = t_min;
    w.t_max = t_max;
    auto fit = fit_power_law(t, y, w);
    std::vector<double> tt, yy;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] > 0 && y[i] > 0) {
        tt.push_back(t[i]);
        yy.push_back(y[i]);
      }
    CsvWriter csv(out);
    csv.header({"t", "exponent"});
    for (const auto& le : local_exponents(tt, yy, half_width)) csv.row({le.time, le.exponent});
    json s = {{"exponent", fit.exponent}, {"coefficient", fit.coefficient}, {"r_squared", fit.r_squared},
              {"t_min", fit.t_min},       {"t_max", fit.t_max},             {"samples", fit.samples},
              {"low_confidence", fit.low_confidence}};
    if (!summary.empty() || out != "-") print_json(s, summary);
  }
};

// ---------------------------------------------------------------- msd
struct MsdCmd {
  ModelArgs m;
  std::string cells, initial = "emitter:0", out = "-", summary;
  double t_max = 20.0, fit_from = 0.0;
  int samples = 41;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("msd", "photon mean squared displacement on a periodic lattice");
    m.add(c);
    c->add_option("--cells", cells)->required();
    c->add_option("--initial", initial, "emitter:<n> or photon:<cell>");
    c->add_option("--t-max", t_max);
    c->add_option("--t-samples", samples);
    c->add_option("--fit-from", fit_from, "first time used in the log-log slope");
    c->add_option("--out", out);
    c->add_option("--summary", summary);
    c->callback([this] { run(); });
  }

  void run() {
    auto spec = m.load();
    const int n = int(spec.emitters.size());
    auto ext = parse_cells(cells, spec.lattice.dimension);
    SiteIndexer idx{ext, spec.lattice.sublattices, n};
    auto parts = split(initial, ':');
    if (parts.size() < 2) throw UsageError("--initial expects emitter:<n> or photon:<cell>");
    Eigen::VectorXcd psi0;
    Cell origin;
    if (parts[0] == "emitter") {
      const int e = to_int(parts[1]);
      if (e < 0 || e >= n) throw UsageError("no emitter " + parts[1]);
      psi0 = emitter_excitation(idx, e);
      origin = spec.emitters[e].cell;
    } else {
      origin = parse_cell(parts[1], spec.lattice.dimension);
      psi0 = photon_excitation(idx, origin, parts.size() > 2 ? to_int(parts[2]) : 0);
    }
    auto times = linspace(0.0, t_max, samples);
    std::vector<double> values;
    evolve_finite(real_space_hamiltonian(build_effective(spec.lattice), spec.emitters, ext, Boundary::periodic), psi0,
                  times, n, {}, false, [&](double, const Eigen::VectorXcd& v) {
                    values.push_back(mean_squared_displacement(v, idx, origin, Boundary::periodic));
                  });
    CsvWriter w(out);
    w.header({"t", "msd"});
    std::vector<double> lt, lm;
    for (std::size_t i = 0; i < times.size(); ++i) {
      w.row({times[i], values[i]});
      if (times[i] > 0 && times[i] >= fit_from && values[i] > 0) {
        lt.push_back(std::log(times[i]));
        lm.push_back(std::log(values[i]));
      }
    }
    json s = json::object();
    if (lt.size() >= 2) {
      auto f = linear_fit(lt, lm);
      s = {{"loglog_slope", f.slope}, {"r_squared", f.r_squared}};
    }
    if (!summary.empty() || out != "-") print_json(s, summary);
  }
};

// ---------------------------------------------------------------- overlap
struct OverlapCmd {
  ModelArgs m;
  std::string cells, boundary = "pbc", initial, bound = "emitter-weight", out = "-", summary;
  double t_max = 40.0;
  int samples = 41;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("overlap", "overlap of the evolving state with a bound eigenvector");
    m.add(c);
    c->add_option("--cells", cells)->required();
    c->add_option("--boundary", boundary);
    c->add_option("--initial", initial, "photon:<cell>[:<sublattice>]")->required();
    c->add_option("--bound", bound, "emitter-weight, or nearest:<E> for the eigenvalue closest to E");
    c->add_option("--t-max", t_max);
    c->add_option("--t-samples", samples);
    c->add_option("--out", out);
    c->add_option("--summary", summary);
    c->callback([this] { run(); });
  }

  void run() {
    auto spec = m.load();
    const int n = int(spec.emitters.size());
    if (n == 0) throw UsageError("the model has no emitters");
    auto ext = parse_cells(cells, spec.lattice.dimension);
    SiteIndexer idx{ext, spec.lattice.sublattices, n};
    auto h = real_space_hamiltonian(build_effective(spec.lattice), spec.emitters, ext, parse_boundary(boundary));
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dense(h));
    const bool by_energy = bound.rfind("nearest:", 0) == 0;
    if (!by_energy && bound != "emitter-weight") throw UsageError("--bound must be emitter-weight or nearest:<E>");
    const cplx target = by_energy ? parse_complex(bound.substr(8)) : cplx{};
    Eigen::Index best = 0;
    double score = -1e300;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const double s = by_energy ? -std::abs(es.eigenvalues()[i] - target)
                                 : es.eigenvectors().col(i).head(n).squaredNorm() / es.eigenvectors().col(i).squaredNorm();
      if (s > score) {
        score = s;
        best = i;
      }
    }
    Eigen::VectorXcd b = es.eigenvectors().col(best).normalized();
    auto parts = split(initial, ':');
    if (parts.size() < 2 || parts[0] != "photon") throw UsageError("--initial expects photon:<cell>");
    auto psi0 = photon_excitation(idx, parse_cell(parts[1], spec.lattice.dimension), parts.size() > 2 ? to_int(parts[2]) : 0);
    auto tr = evolve_finite(h, psi0, linspace(0.0, t_max, samples), n, {}, true);
    auto ov = overlap_dynamics(b, tr);
    CsvWriter w(out);
    w.header({"t", "re", "im", "abs"});
    double lo = 1e300, hi = 0;
    for (std::size_t i = 0; i < ov.size(); ++i) {
      w.row({tr.times[i], ov[i].real(), ov[i].imag(), std::abs(ov[i])});
      lo = std::min(lo, std::abs(ov[i]));
      hi = std::max(hi, std::abs(ov[i]));
    }
    json s = {{"bound_energy", {es.eigenvalues()[best].real(), es.eigenvalues()[best].imag()}},
              {"min_abs", lo},
              {"max_abs", hi}};
    if (!summary.empty() || out != "-") print_json(s, summary);
  }
};

// ---------------------------------------------------------------- bic-scaling
struct BicScalingCmd {
  double hopping = 1.0, kappa = 1.0, g = 1.2, t_plateau = 200.0;
  std::vector<int> sizes{40, 80, 160};
  std::string out = "-", summary;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("bic-scaling", "bound-state-in-continuum weight against chain length");
    c->add_option("--J", hopping);
    c->add_option("--kappa", kappa);
    c->add_option("--g", g);
    c->add_option("--sizes", sizes)->delimiter(',');
    c->add_option("--t-plateau", t_plateau);
    c->add_option("--out", out);
    c->add_option("--summary", summary);
    c->callback([this] { run(); });
  }

  void run() {
    auto s = bic_scaling(hopping, kappa, g, sizes, t_plateau);
    CsvWriter w(out);
    w.header({"L", "weight", "weight_squared", "plateau", "t_final", "oscillation"});
    for (const auto& r : s.rows) w.row({double(r.cells), r.weight, r.predicted_plateau, r.plateau, r.t_final, r.oscillation});
    json j = {{"slope", s.slope}, {"intercept", s.intercept}, {"r_squared", s.linear_r_squared}};
    if (!summary.empty() || out != "-") print_json(j, summary);
  }
};

// ---------------------------------------------------------------- reproduce
struct ReproduceCmd {
  std::string target, out_dir = "results";
  int jobs_opt = 0;
  int* status;

  void add(CLI::App& root, int* exit_status) {
    status = exit_status;
    auto* c = root.add_subcommand("reproduce", "regenerate figure data: <id>, <config.json> or all");
    c->add_option("target", target)->required();
    c->add_option("--out-dir", out_dir);
    c->add_option("--jobs", jobs_opt, "scenarios run concurrently");
    c->callback([this] { run(); });
  }

  void run() {
    std::vector<json> configs;
    auto ids = scenario_ids();
    if (target == "all") {
      for (const auto& id : ids) configs.push_back(default_config(id));
    } else if (std::find(ids.begin(), ids.end(), target) != ids.end()) {
      configs.push_back(default_config(target));
    } else if (fs::is_regular_file(target)) {
      std::ifstream f(target);
      try {
        configs.push_back(json::parse(f));
      } catch (const json::exception& e) {
        throw UsageError(std::string("bad config: ") + e.what());
      }
      if (!configs.back().contains("id")) throw UsageError("config has no id");
    } else {
      throw UsageError("unknown scenario '" + target + "'");
    }
    const bool nested = configs.size() > 1;
    std::vector<json> summaries(configs.size());
    std::mutex io;
    auto one = [&](std::size_t k) {
      const std::string id = configs[k].at("id");
      const std::string dir = nested || target == "all" ? (fs::path(out_dir) / id).string() : out_dir;
      auto rep = run_scenario(configs[k], dir);
      summaries[k] = {{"id", id}, {"passed", rep.passed}, {"seconds", rep.seconds}, {"checks", rep.checks}, {"dir", dir}};
      std::lock_guard<std::mutex> g(io);
      std::cerr << (rep.passed ? "ok    " : "FAIL  ") << id << "  " << rep.seconds << " s\n";
    };
    if (jobs_opt > 1 && nested) {
      // scenario-level threads; keep each scenario's own loops serial
      set_jobs(1);
      std::vector<std::thread> pool;
      std::atomic<std::size_t> next{0};
      std::exception_ptr failure;
      for (int w = 0; w < jobs_opt; ++w)
        pool.emplace_back([&] {
          for (std::size_t k; (k = next.fetch_add(1)) < configs.size();) try {
              one(k);
            } catch (...) {
              std::lock_guard<std::mutex> g(io);
              if (!failure) failure = std::current_exception();
            }
        });
      for (auto& t : pool) t.join();
      if (failure) std::rethrow_exception(failure);
    } else {
      if (jobs_opt > 0) set_jobs(jobs_opt);
      for (std::size_t k = 0; k < configs.size(); ++k) one(k);
    }
    bool ok = true;
    json failed = json::array();
    for (const auto& s : summaries)
      if (!s["passed"].get<bool>()) {
        ok = false;
        failed.push_back(s);
      }
    if (!ok) {
      std::cout << json{{"failed", failed}}.dump(2) << "\n";
      *status = kCheckFailed;
    }
  }
};

// ---------------------------------------------------------------- validate-all
struct ValidateCmd {
  std::string tag, out = "-";
  int* status;

  void add(CLI::App& root, int* exit_status) {
    status = exit_status;
    auto* c = root.add_subcommand("validate-all", "run the acceptance suite");
    c->add_option("--tag", tag, "only criteria exercising this module");
    c->add_option("--out", out, "JSON report path");
    c->callback([this] { run(); });
  }

  void run() {
    json report = json::array();
    bool ok = true;
    for (const auto& r : run_acceptance(tag)) {
      std::cerr << (r.passed ? "PASS " : "FAIL ") << r.id << " " << r.name << "\n";
      report.push_back(to_json(r));
      ok = ok && r.passed;
    }
    print_json({{"passed", ok}, {"criteria", report}}, out);
    if (!ok) *status = kCheckFailed;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum emitters coupled to non-Hermitian photonic lattices"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads for inner loops (default: NH_EMITTERS_JOBS or all cores)");
  int status = kOk;

  SelfEnergyCmd selfenergy;
  BoundStatesCmd bound_states;
  DynamicsCmd dynamics;
  SpectraCmd spectra_cmd;
  WindingCmd winding;
  GbzCmd gbz;
  FitDecayCmd fit_decay;
  MsdCmd msd_cmd;
  OverlapCmd overlap;
  BicScalingCmd bic;
  ReproduceCmd reproduce;
  ValidateCmd validate;
  selfenergy.add(app);
  bound_states.add(app);
  dynamics.add(app);
  spectra_cmd.add(app);
  winding.add(app);
  gbz.add(app);
  fit_decay.add(app);
  msd_cmd.add(app);
  overlap.add(app);
  bic.add(app);
  reproduce.add(app, &status);
  validate.add(app, &status);
  app.parse_complete_callback([&] {
    if (threads > 0) set_jobs(threads);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return status;
}
