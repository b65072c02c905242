#include "nhemit/scenarios.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "nhemit/analysis.hpp"
#include "nhemit/dynamics.hpp"
#include "nhemit/errors.hpp"
#include "nhemit/io.hpp"

namespace nhemit {

namespace fs = std::filesystem;

json export_bound_states(const SelfEnergy& sigma, std::vector<BoundState>& states, const std::string& dir,
                         const std::string& stem, int radius, std::vector<std::string>* artifacts) {
  fs::create_directories(dir);
  json out = json::array();
  for (std::size_t n = 0; n < states.size(); ++n) {
    auto& st = states[n];
    st.profile = photon_profile(sigma, st.energy, st.emitter_amplitudes, radius);
    json weight = nullptr;
    try {
      const double photon = normalize(st, sigma);
      weight = photon;
    } catch (const Error&) {
      // non-normalizable on this grid; keep unit emitter norm
    }
    const std::string name = stem + "_" + std::to_string(n) + ".csv";
    CsvWriter w((fs::path(dir) / name).string());
    w.header({"x", "y", "sublattice", "re", "im", "abs2"});
    for (const auto& p : st.profile)
      w.row({double(p.cell[0]), double(p.cell[1]), double(p.sublattice), p.amplitude.real(), p.amplitude.imag(),
             std::norm(p.amplitude)});
    if (artifacts) artifacts->push_back(name);
    json ce = json::array();
    for (Eigen::Index m = 0; m < st.emitter_amplitudes.size(); ++m)
      ce.push_back({st.emitter_amplitudes[m].real(), st.emitter_amplitudes[m].imag()});
    out.push_back({{"E", {st.energy.real(), st.energy.imag()}},
                   {"class", to_string(st.kind)},
                   {"c_e", ce},
                   {"profile_csv_path", name},
                   {"residual", st.residual},
                   {"photon_weight", weight}});
  }
  return out;
}

std::string plot_script(const std::string& title, const json& panels) {
  std::ostringstream s;
  s << "# Regenerate the figure from the CSV files in this directory.\n"
       "import json, os\n"
       "import numpy as np\n"
       "import matplotlib.pyplot as plt\n\n"
       "here = os.path.dirname(os.path.abspath(__file__))\n"
       "panels = json.loads(r'''"
    << panels.dump() << "''')\n"
    << "fig, axes = plt.subplots(1, len(panels), figsize=(4.5 * len(panels), 3.8), squeeze=False)\n"
       "for ax, p in zip(axes[0], panels):\n"
       "    d = np.genfromtxt(os.path.join(here, p['csv']), delimiter=',', names=True)\n"
       "    style = p.get('style', 'line')\n"
       "    if style == 'map':\n"
       "        sc = ax.scatter(d[p['x']], d[p['y'][0]], c=d[p['c']], s=6, marker='s', cmap='viridis')\n"
       "        fig.colorbar(sc, ax=ax, label=p['c'])\n"
       "        ax.set_ylabel(p['y'][0])\n"
       "    else:\n"
       "        for col in p['y']:\n"
       "            kw = dict(ls='none', marker='.') if style == 'scatter' else {}\n"
       "            ax.plot(d[p['x']], d[col], label=col, **kw)\n"
       "        if len(p['y']) > 1:\n"
       "            ax.legend(fontsize=7)\n"
       "    if p.get('logx'):\n"
       "        ax.set_xscale('log')\n"
       "    if p.get('logy'):\n"
       "        ax.set_yscale('log')\n"
       "    ax.set_xlabel(p['x'])\n"
       "    ax.set_title(p.get('title', ''), fontsize=9)\n"
       "fig.suptitle("
    << json(title).dump()
    << ")\n"
       "fig.tight_layout()\n"
       "fig.savefig(os.path.join(here, 'figure.png'), dpi=150)\n";
  return s.str();
}

namespace {

json cx(cplx z) { return json::array({z.real(), z.imag()}); }

cplx to_cplx(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
  if (v.is_string()) return parse_complex(v.get<std::string>());
  throw ModelError("expected a complex number, got " + v.dump());
}

json catalog_model(const std::string& name, const std::map<std::string, double>& params,
                   const json& emitters = json::array()) {
  return {{"catalog", name}, {"params", params}, {"emitters", emitters}};
}

json emitter_doc(std::vector<int> cell, int sub, double g, cplx delta) {
  return {{"cell", cell}, {"sublattice", sub}, {"g_re", g}, {"g_im", 0.0}, {"delta_re", delta.real()}, {"delta_im", delta.imag()}};
}

class Run {
 public:
  Run(const json& cfg, const std::string& dir) : cfg_(cfg), dir_(dir) {
    fs::create_directories(dir_);
    report.id = cfg.at("id").get<std::string>();
  }

  const json& cfg() const { return cfg_; }
  const json& at(const char* key) const { return cfg_.at(key); }
  double num(const char* key) const { return cfg_.at(key).get<double>(); }
  int integer(const char* key) const { return cfg_.at(key).get<int>(); }
  ModelSpec model(const char* key = "model") const { return parse_model_spec(cfg_.at(key)); }
  std::string dir() const { return dir_.string(); }

  std::string path(const std::string& name) {
    report.artifacts.push_back(name);
    return (dir_ / name).string();
  }

  void csv(const std::string& name, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    CsvWriter w(path(name));
    w.header(header);
    for (const auto& r : rows) w.row(r);
  }

  void json_file(const std::string& name, const json& doc) { write_json(path(name), doc); }

  void check(const std::string& name, bool ok, const json& value) {
    report.checks[name] = {{"passed", ok}, {"value", value}};
    if (!ok) report.passed = false;
  }

  void panel(json p) { panels_.push_back(std::move(p)); }

  void finish(const std::string& title) {
    std::ofstream f(path("plot.py"));
    f << plot_script(title, panels_);
  }

  ScenarioReport report;

 private:
  json cfg_;
  fs::path dir_;
  json panels_ = json::array();
};

std::vector<double> populations(const std::vector<Eigen::VectorXcd>& amps) {
  std::vector<double> out;
  for (const auto& a : amps) out.push_back(a.squaredNorm());
  return out;
}

// |c|^2 t^{-p} averaged in log space over [t0, t1]: the prefactor at a fixed exponent.
double prefactor_at(const std::vector<double>& t, const std::vector<double>& p, double exponent, double t0, double t1) {
  double acc = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t0 && t[i] <= t1) {
      acc += std::log(p[i] * std::pow(t[i], -exponent));
      ++n;
    }
  return n ? std::exp(acc / n) : std::nan("");
}

std::shared_ptr<const LatticePropagator> best_propagator(const Lattice& lat) {
  if (auto p = closed_form_propagator(lat)) return p;
  return quadrature_propagator(build_effective(lat), 4096);
}

SelfEnergy sigma_of(const ModelSpec& spec) {
  return SelfEnergy(build_effective(spec.lattice), spec.emitters, best_propagator(spec.lattice));
}

// Power-law check over [t0, t1]: exponent within `tol`, optional prefactor within 10%.
void law_check(Run& run, const std::string& name, const std::vector<double>& t, const std::vector<double>& p,
               double exponent, double coefficient, double tol, double t0 = 100.0, double t1 = 1000.0) {
  FitWindow w;
  w.t_min = t0;
  w.t_max = t1;
  auto fit = fit_power_law(t, p, w);
  run.check(name + " exponent", std::abs(fit.exponent - exponent) <= tol,
            {{"fitted", fit.exponent}, {"expected", exponent}, {"r_squared", fit.r_squared}});
  if (coefficient > 0) {
    const double c = prefactor_at(t, p, exponent, t0, t1);
    run.check(name + " coefficient", std::abs(c / coefficient - 1.0) <= 0.1, {{"measured", c}, {"expected", coefficient}});
  }
}

// ------------------------------------------------------------------ fig2
void fig2(Run& run) {
  auto spec = run.model();
  SelfEnergy sigma = sigma_of(spec);
  SpectrumSampler sampler(sigma.model(), 4096);
  // a wide search plus a dense one near the detunings; roots found twice are merged
  std::vector<BoundState> states;
  for (const auto& r : run.at("regions")) {
    BoundStateOptions opt;
    opt.seeds_re = opt.seeds_im = r.at("seeds").get<int>();
    const auto& b = r.at("box");
    for (auto& st : find_bound_states(sigma, {b[0], b[1], b[2], b[3]}, opt, &sampler)) {
      bool seen = false;
      for (const auto& old : states) seen = seen || std::abs(old.energy - st.energy) < opt.dedupe_radius;
      if (!seen) states.push_back(std::move(st));
    }
  }
  const int radius = run.integer("profile_radius");
  json doc = export_bound_states(sigma, states, run.dir(), "profile", radius, &run.report.artifacts);
  run.json_file("bound_states.json", doc);

  int hidden = 0, conventional = 0;
  double pin = 0.0, leak = 0.0;
  for (const auto& st : states) {
    if (st.kind == BoundStateClass::conventional) ++conventional;
    if (st.kind != BoundStateClass::hidden) continue;
    ++hidden;
    double best = 1e300;
    for (const auto& e : sigma.emitters()) best = std::min(best, std::abs(st.energy - e.detuning));
    pin = std::max(pin, best);
    int last = 0;
    for (Eigen::Index m = 0; m < st.emitter_amplitudes.size(); ++m)
      if (std::abs(st.emitter_amplitudes[m]) > 1e-12) last = int(m);
    for (const auto& p : st.profile)
      if (p.cell[0] >= sigma.emitters()[last].cell[0]) leak = std::max(leak, std::abs(p.amplitude));
  }
  run.check("hidden states", hidden == int(sigma.emitters().size()), hidden);
  run.check("hidden energies pinned", pin < 1e-9, pin);
  run.check("one-sided hidden clouds", leak < 1e-12, leak);
  run.check("conventional states present", conventional > 0, conventional);
  for (std::size_t n = 0; n < states.size(); ++n)
    run.panel({{"csv", doc[n]["profile_csv_path"]}, {"x", "x"}, {"y", {"abs2"}}, {"logy", true},
               {"title", std::string(to_string(states[n].kind)) + " E=" + cx(states[n].energy).dump()}});
  run.finish("Bound states of three emitters on the Hatano-Nelson chain");
}

// ------------------------------------------------------------------ fig3
void fig3(Run& run) {
  auto spec = run.model();
  const auto& e = spec.emitters[0];
  const double J = spec.lattice.params.at("J"), kappa = spec.lattice.params.at("kappa");
  const double g = e.couplings[0].second.real();
  SelfEnergy sigma = sigma_of(spec);
  const int reach = run.integer("x_range");
  const double dt = run.num("dt");
  const int steps = run.integer("steps");
  std::vector<std::pair<Cell, int>> sites;
  for (int x = -reach; x <= reach; ++x) sites.push_back({{e.cell[0] + x, 0}, 0});
  auto field = photon_field_resolvent(sigma, Eigen::VectorXcd::Ones(1), sites, dt, steps);
  std::vector<std::vector<double>> rows;
  for (std::size_t j = 0; j < field.times.size(); ++j)
    for (std::size_t a = 0; a < sites.size(); ++a) {
      const double t = field.times[j], p = std::norm(field.amplitudes[j][a]);
      rows.push_back({t, double(a) - reach, p, p * std::sqrt(2 * J * t)});
    }
  run.csv("field.csv", {"t", "x", "abs2", "abs2_rescaled"}, rows);

  // emitter amplitude, resolvent against the finite ring
  auto res = emitter_amplitudes_resolvent(sigma, Eigen::VectorXcd::Ones(1), field.times);
  const int cells = run.integer("oracle_cells");
  EmitterSet ring_em({Emitter{{cells / 2, 0}, e.couplings, e.detuning}});
  auto model = build_effective(spec.lattice);
  SiteIndexer idx{extent_1d(cells), 1, 1};
  auto tr = evolve_finite(real_space_hamiltonian(model, ring_em, extent_1d(cells), Boundary::periodic),
                          emitter_excitation(idx, 0), field.times, 1, {}, true);
  double field_gap = 0.0;
  for (std::size_t j = 0; j < field.times.size(); ++j)
    for (std::size_t a = 0; a < sites.size(); ++a)
      field_gap = std::max(field_gap, std::abs(field.amplitudes[j][a] - tr.states[j][idx.site({cells / 2 + int(a) - reach, 0}, 0)]));
  run.check("photon field matches oracle", field_gap < 1e-6, field_gap);
  double gap = 0.0;
  rows.clear();
  for (std::size_t j = 0; j < field.times.size(); ++j) {
    gap = std::max(gap, std::abs(res[j][0] - tr.emitters[j][0]));
    rows.push_back({field.times[j], res[j][0].real(), res[j][0].imag(), std::norm(res[j][0]), std::norm(tr.emitters[j][0])});
  }
  run.csv("emitter.csv", {"t", "re", "im", "abs2", "abs2_oracle"}, rows);
  run.check("resolvent matches oracle", gap < 1e-6, gap);

  // running-wave decomposition at one site
  const int probe = run.integer("probe_x");
  rows.clear();
  RunningWave last;
  for (std::size_t j = 1; j < field.times.size(); ++j) {
    const double t = field.times[j];
    last = running_wave_hn(J, kappa, e.detuning, g, probe, t);
    rows.push_back({t, std::norm(last.circle), std::norm(last.residues), std::norm(last.total),
                    free_propagation_hn(J, kappa, probe, t)});
  }
  run.csv("running_wave.csv", {"t", "gbz_abs2", "residues_abs2", "total_abs2", "free_propagation"}, rows);
  const double t_end = field.times.back();
  auto bz = running_wave_hn(J, kappa, e.detuning, g, probe, t_end, 1.0);
  run.check("contour independence", std::abs(bz.total - last.total) < 1e-10, std::abs(bz.total - last.total));
  json poles = json::array();
  for (cplx b : last.poles) poles.push_back({{"beta", cx(b)}, {"crossed", std::abs(b) > last.radius && std::abs(b) < 1.0}});
  run.json_file("poles.json", {{"gbz_radius", last.radius}, {"poles", poles}, {"poles_crossed", last.poles_crossed}});

  run.panel({{"csv", "field.csv"}, {"x", "x"}, {"y", {"t"}}, {"c", "abs2_rescaled"}, {"style", "map"}, {"title", "photon field"}});
  run.panel({{"csv", "running_wave.csv"}, {"x", "t"}, {"y", {"total_abs2", "gbz_abs2", "residues_abs2", "free_propagation"}},
             {"logy", true}, {"title", "site " + std::to_string(probe)}});
  run.panel({{"csv", "emitter.csv"}, {"x", "t"}, {"y", {"abs2", "abs2_oracle"}}, {"logy", true}, {"title", "emitter"}});
  run.finish("Photon emission into the Hatano-Nelson chain");
}

// ------------------------------------------------------------------ fig4 / fig6
struct DecayCurve {
  cplx delta;
  std::vector<double> pop;
};

std::vector<DecayCurve> single_emitter_curves(Run& run, const json& deltas, const std::vector<double>& times) {
  auto base = run.model();
  const double g = run.num("g");
  const int sub = run.integer("sublattice");
  std::vector<DecayCurve> out;
  for (const auto& d : deltas) {
    const cplx delta = to_cplx(d);
    ModelSpec spec{base.lattice, EmitterSet({Emitter{{0, 0}, {{sub, g}}, delta}})};
    ResolventOptions opt;
    opt.tolerance = run.num("tolerance");
    out.push_back({delta, populations(emitter_amplitudes_resolvent(sigma_of(spec), Eigen::VectorXcd::Ones(1), times, opt))});
  }
  return out;
}

std::pair<double, double> fit_window(const Run& run) {
  if (!run.cfg().contains("fit_window")) return {100.0, 1000.0};
  const auto& w = run.at("fit_window");
  return {w[0].get<double>(), w[1].get<double>()};
}

void write_curves(Run& run, const std::vector<double>& times, const std::vector<DecayCurve>& curves,
                  const std::vector<std::pair<std::string, std::function<double(double)>>>& lines) {
  std::vector<std::string> header{"t"};
  for (std::size_t c = 0; c < curves.size(); ++c) header.push_back("delta_" + std::to_string(c));
  for (const auto& [name, f] : lines) header.push_back(name);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<double> r{times[i]};
    for (const auto& c : curves) r.push_back(c.pop[i]);
    for (const auto& [name, f] : lines) r.push_back(f(times[i]));
    rows.push_back(r);
  }
  run.csv("decay.csv", header, rows);
  json legend = json::array();
  for (std::size_t c = 0; c < curves.size(); ++c) legend.push_back({{"column", header[c + 1]}, {"delta", cx(curves[c].delta)}});
  run.json_file("columns.json", legend);
  std::vector<std::string> ys(header.begin() + 1, header.end());
  run.panel({{"csv", "decay.csv"}, {"x", "t"}, {"y", ys}, {"logx", true}, {"logy", true}, {"title", "|c_e|^2"}});

  // sliding-window exponents
  header.resize(curves.size() + 1);
  rows.clear();
  std::vector<std::vector<LocalExponent>> le;
  for (const auto& c : curves) le.push_back(local_exponents(times, c.pop, 3));
  for (std::size_t i = 0; i < le[0].size(); ++i) {
    std::vector<double> r{le[0][i].time};
    for (const auto& l : le) r.push_back(l[i].exponent);
    rows.push_back(r);
  }
  run.csv("local_exponents.csv", header, rows);
  run.panel({{"csv", "local_exponents.csv"}, {"x", "t"}, {"y", std::vector<std::string>(header.begin() + 1, header.end())},
             {"logx", true}, {"title", "d ln|c_e|^2 / d ln t"}});
}

double mean_local_exponent(const std::vector<double>& times, const std::vector<double>& pop, double t0, double t1) {
  std::vector<double> lt, lp;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] >= t0 && times[i] <= t1) {
      lt.push_back(std::log(times[i]));
      lp.push_back(std::log(pop[i]));
    }
  return linear_fit(lt, lp).slope;
}

void fig4a(Run& run) {
  const double J = run.at("model").at("params").at("J"), kappa = run.at("model").at("params").at("kappa");
  const double g = run.num("g"), g4 = std::pow(g, 4);
  auto times = logspace(run.num("t_min"), run.num("t_max"), run.integer("samples"));
  auto curves = single_emitter_curves(run, run.at("deltas"), times);
  const auto [w0, w1] = fit_window(run);
  std::vector<std::pair<std::string, std::function<double(double)>>> lines;
  lines.push_back({"t1c", [=](double t) { return 4 * J * J * kappa / (M_PI * g4) / t; }});
  for (const auto& c : curves) {
    if (std::abs(c.delta) == 0.0) {
      law_check(run, "delta=0 t^-1", times, c.pop, -1, 4 * J * J * kappa / (M_PI * g4), 0.1, w0, w1);
      continue;
    }
    const double coef = g4 / (16 * M_PI * std::pow(std::abs(c.delta), 4) * J * J * kappa);
    lines.push_back({"t3c_" + std::to_string(lines.size() - 1), [=](double t) { return coef / (t * t * t); }});
    if (std::abs(c.delta) >= 0.5) law_check(run, "delta=" + cx(c.delta).dump() + " t^-3", times, c.pop, -3, coef, 0.1, w0, w1);
  }
  // small detuning: t^-1 first, t^-3 only after a few thousand 1/kappa
  const auto& cross = run.at("crossover");
  const cplx d = to_cplx(cross.at("delta"));
  auto ct = logspace(run.num("t_min"), cross.at("t_max").get<double>(), cross.at("samples").get<int>());
  auto pop = single_emitter_curves(run, json::array({cross.at("delta")}), ct)[0].pop;
  const double c1 = 4 * J * J * kappa / (M_PI * g4), c3 = g4 / (16 * M_PI * std::pow(std::abs(d), 4) * J * J * kappa);
  const auto& early = cross.at("early");
  const auto& late = cross.at("late");
  const double pe = mean_local_exponent(ct, pop, early[0], early[1]), pl = mean_local_exponent(ct, pop, late[0], late[1]);
  const double coef = prefactor_at(ct, pop, -3, late[0], late[1]);
  run.check("crossover early exponent", std::abs(pe + 1) <= 0.2, pe);
  run.check("crossover late exponent", std::abs(pl + 3) <= 0.2, pl);
  run.check("crossover late coefficient", std::abs(coef / c3 - 1) <= 0.1, {{"measured", coef}, {"expected", c3}});
  std::vector<std::vector<double>> rows;
  auto le = local_exponents(ct, pop, 3);
  for (std::size_t i = 0; i < ct.size(); ++i) {
    double e = std::nan("");
    for (const auto& l : le)
      if (l.time == ct[i]) e = l.exponent;
    rows.push_back({ct[i], pop[i], c1 / ct[i], c3 / (ct[i] * ct[i] * ct[i]), e});
  }
  run.csv("crossover.csv", {"t", "abs2", "t1c", "t3c", "local_exponent"}, rows);
  run.panel({{"csv", "crossover.csv"}, {"x", "t"}, {"y", {"abs2", "t1c", "t3c"}}, {"logx", true}, {"logy", true},
             {"title", "Delta = " + cx(d).dump()}});
  write_curves(run, times, curves, lines);
  run.finish("A-site emitter on the alternating-loss lattice");
}

void fig4b(Run& run) {
  const double J = run.at("model").at("params").at("J"), kappa = run.at("model").at("params").at("kappa");
  const double g = run.num("g");
  const double coef = J * J / (M_PI * std::pow(g, 4) * kappa);
  auto times = logspace(run.num("t_min"), run.num("t_max"), run.integer("samples"));
  auto curves = single_emitter_curves(run, run.at("deltas"), times);
  const auto [w0, w1] = fit_window(run);
  double spread = 0.0;
  for (const auto& c : curves) {
    law_check(run, "delta=" + cx(c.delta).dump() + " t^-3", times, c.pop, -3, coef, 0.1, w0, w1);
    spread = std::max(spread, std::abs(prefactor_at(times, c.pop, -3, w1 / 2, w1) / coef - 1.0));
  }
  run.check("curves collapse at late times", spread < 0.1, spread);
  write_curves(run, times, curves, {{"ndt3c", [=](double t) { return coef / (t * t * t); }}});
  run.finish("B-site emitter on the alternating-loss lattice");
}

void fig6(Run& run) {
  auto spec = run.model();
  const double J = spec.lattice.params.at("J"), kappa = spec.lattice.params.at("kappa");
  const double g = run.num("g"), g4 = std::pow(g, 4);
  auto model = build_effective(spec.lattice);
  // bands and a histogram of Im E
  std::vector<std::vector<double>> rows;
  double min_gap = 1e300;
  const int nk = 2048;
  std::vector<double> ims;
  for (int i = 0; i <= nk; ++i) {
    const double k = -M_PI + 2 * M_PI * i / nk;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(bloch(model, {k, 0.0}));
    cplx a = es.eigenvalues()[0], b = es.eigenvalues()[1];
    if (a.imag() > b.imag()) std::swap(a, b);
    min_gap = std::min(min_gap, std::abs(a - b));
    rows.push_back({k, a.real(), a.imag(), b.real(), b.imag()});
    if (i < nk) {
      ims.push_back(a.imag());
      ims.push_back(b.imag());
    }
  }
  run.csv("bands.csv", {"k", "re_lower", "im_lower", "re_upper", "im_upper"}, rows);
  run.check("no exceptional point", min_gap > 1e-6, min_gap);
  const double lo = *std::min_element(ims.begin(), ims.end()), hi = *std::max_element(ims.begin(), ims.end());
  const int bins = 100;
  std::vector<double> hist(bins, 0.0);
  for (double v : ims) hist[std::min(bins - 1, int((v - lo) / (hi - lo) * bins))] += 1.0;
  rows.clear();
  for (int b = 0; b < bins; ++b) rows.push_back({lo + (b + 0.5) * (hi - lo) / bins, hist[b] / (ims.size() * (hi - lo) / bins)});
  run.csv("dos.csv", {"im_E", "density"}, rows);

  auto times = logspace(run.num("t_min"), run.num("t_max"), run.integer("samples"));
  auto curves = single_emitter_curves(run, run.at("deltas"), times);
  const auto [w0, w1] = fit_window(run);
  std::vector<std::pair<std::string, std::function<double(double)>>> lines;
  for (const auto& c : curves) {
    if (std::abs(c.delta) == 0.0) {
      const double coef = 4 * J * J * kappa / (M_PI * g4);
      law_check(run, "delta=0 t^-1", times, c.pop, -1, coef, 0.1, w0, w1);
      lines.push_back({"t1c", [=](double t) { return coef / t; }});
    } else {
      const double coef = g4 / (16 * M_PI * std::pow(std::abs(c.delta), 4) * J * J * kappa);
      law_check(run, "delta=" + cx(c.delta).dump() + " t^-3", times, c.pop, -3, coef, 0.1, w0, w1);
      lines.push_back({"t3c", [=](double t) { return coef / (t * t * t); }});
    }
  }
  run.panel({{"csv", "bands.csv"}, {"x", "k"}, {"y", {"im_lower", "im_upper"}}, {"title", "Im h_k"}});
  run.panel({{"csv", "dos.csv"}, {"x", "im_E"}, {"y", {"density"}}, {"logy", true}, {"title", "density of states"}});
  write_curves(run, times, curves, lines);
  run.finish("Alternating-loss lattice without exceptional points");
}

// ------------------------------------------------------------------ fig5
void fig5(Run& run) {
  auto spec = run.model();
  const double J = spec.lattice.params.at("J"), kappa = spec.lattice.params.at("kappa");
  const double g = run.num("g");
  std::vector<int> sizes = run.at("sizes").get<std::vector<int>>();
  auto times = linspace(0.0, run.num("t_max"), run.integer("samples"));
  auto model = build_effective(spec.lattice);
  std::vector<std::vector<double>> pops;
  for (int L : sizes) {
    EmitterSet em({Emitter{{L / 2, 0}, {{0, g}}, 0.0}});
    SiteIndexer idx{extent_1d(L), 2, 1};
    auto tr = evolve_finite(real_space_hamiltonian(model, em, extent_1d(L), Boundary::open), emitter_excitation(idx, 0), times, 1);
    pops.push_back(populations(tr.emitters));
  }
  std::vector<std::string> header{"t"};
  for (int L : sizes) header.push_back("L" + std::to_string(L));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<double> r{times[i]};
    for (const auto& p : pops) r.push_back(p[i]);
    rows.push_back(r);
  }
  run.csv("dynamics.csv", header, rows);

  auto scaling = bic_scaling(J, kappa, g, sizes, run.num("t_max"));
  rows.clear();
  for (const auto& r : scaling.rows) {
    rows.push_back({double(r.cells), 1.0 / r.cells, r.weight, r.predicted_plateau, r.plateau, r.t_final});
    run.check("plateau L=" + std::to_string(r.cells), std::abs(r.plateau / r.predicted_plateau - 1.0) < 0.05,
              {{"plateau", r.plateau}, {"weight_squared", r.predicted_plateau}, {"t_final", r.t_final}});
  }
  run.csv("plateau.csv", {"L", "inverse_L", "weight", "weight_squared", "plateau", "t_final"}, rows);
  run.check("weight linear in 1/L", scaling.linear_r_squared > 0.99, scaling.linear_r_squared);
  run.panel({{"csv", "dynamics.csv"}, {"x", "t"}, {"y", std::vector<std::string>(header.begin() + 1, header.end())},
             {"logy", true}, {"title", "|c_e|^2, open chain"}});
  run.panel({{"csv", "plateau.csv"}, {"x", "inverse_L"}, {"y", {"plateau", "weight_squared"}}, {"style", "scatter"},
             {"title", "long-time population"}});
  run.finish("Bound state in the continuum on the open alternating-loss chain");
}

// ------------------------------------------------------------------ fig7
void fig7(Run& run) {
  auto spec = run.model();
  const double J = spec.lattice.params.at("J"), kappa = spec.lattice.params.at("kappa");
  auto model = build_effective(spec.lattice);
  const int cells = run.integer("cells");
  const cplx delta = to_cplx(run.at("delta"));
  std::vector<std::vector<double>> rows;
  double ellipse = 0.0, flat = 0.0;
  for (const auto& gv : run.at("couplings")) {
    const double g = gv.get<double>();
    EmitterSet em = g > 0 ? EmitterSet({Emitter{{cells / 2, 0}, {{0, g}}, delta}}) : EmitterSet{};
    auto [pbc, obc] = spectra(model, em, extent_1d(cells));
    for (const auto* rep : {&pbc, &obc})
      for (cplx e : rep->eigenvalues) {
        rows.push_back({g, rep->boundary == Boundary::periodic ? 0.0 : 1.0, e.real(), e.imag()});
        if (g == 0 && rep->boundary == Boundary::periodic)
          ellipse = std::max(ellipse, std::abs(std::hypot(e.real() / (2 * J), (e.imag() + kappa) / kappa) - 1.0));
        if (g == 0 && rep->boundary == Boundary::open) flat = std::max(flat, std::abs(e.imag() + kappa));
      }
  }
  run.csv("spectra.csv", {"g", "open", "re", "im"}, rows);
  rows.clear();
  for (int i = 0; i <= 512; ++i) {
    const cplx h = bloch(model, {2 * M_PI * i / 512, 0.0})(0, 0);
    rows.push_back({h.real(), h.imag()});
  }
  run.csv("dispersion.csv", {"re", "im"}, rows);
  run.check("bare periodic spectrum on the ellipse", ellipse < 1e-8, ellipse);
  run.check("bare open spectrum has constant imaginary part", flat < 1e-8, flat);
  run.panel({{"csv", "spectra.csv"}, {"x", "re"}, {"y", {"im"}}, {"c", "open"}, {"style", "map"}, {"title", "all couplings"}});
  run.panel({{"csv", "dispersion.csv"}, {"x", "re"}, {"y", {"im"}}, {"title", "bare dispersion"}});
  run.finish("Periodic and open spectra with one emitter");
}

// ------------------------------------------------------------------ fig8
void fig8(Run& run) {
  auto spec = run.model();
  const auto& e = spec.emitters[0];
  auto model = build_effective(spec.lattice);
  const int n = run.integer("cells");
  auto ext = extent_2d(n, n);
  SiteIndexer idx{ext, 2, 1};
  auto times = linspace(0.0, run.num("t_max"), run.integer("samples"));
  std::vector<double> snaps = run.at("snapshots").get<std::vector<double>>();
  std::vector<double> msd_values;
  std::vector<std::vector<double>> snap_rows;
  auto tr = evolve_finite(real_space_hamiltonian(model, spec.emitters, ext, Boundary::periodic), emitter_excitation(idx, 0),
                          times, 1, {}, false, [&](double t, const Eigen::VectorXcd& v) {
                            msd_values.push_back(mean_squared_displacement(v, idx, e.cell, Boundary::periodic));
                            for (double s : snaps)
                              if (std::abs(s - t) < 1e-12)
                                for (int x = 0; x < n; ++x)
                                  for (int y = 0; y < n; ++y)
                                    snap_rows.push_back({t, double(x), double(y),
                                                         std::norm(v[idx.site({x, y}, 0)]) + std::norm(v[idx.site({x, y}, 1)])});
                          });
  SelfEnergy sigma(model, EmitterSet({Emitter{{0, 0}, e.couplings, e.detuning}}), best_propagator(spec.lattice));
  auto res = emitter_amplitudes_resolvent(sigma, Eigen::VectorXcd::Ones(1), times);
  std::vector<std::vector<double>> rows;
  double gap = 0.0;
  const double compare_until = run.num("compare_until");
  for (std::size_t i = 0; i < times.size(); ++i) {
    rows.push_back({times[i], std::norm(tr.emitters[i][0]), std::norm(res[i][0]), msd_values[i]});
    if (times[i] <= compare_until) gap = std::max(gap, std::abs(tr.emitters[i][0] - res[i][0]));
  }
  run.csv("emitter.csv", {"t", "abs2", "abs2_resolvent", "msd"}, rows);
  run.csv("snapshots.csv", {"t", "x", "y", "abs2"}, snap_rows);
  run.check("finite lattice matches resolvent", gap < 1e-6, gap);

  auto late = logspace(5.0, run.num("t_late"), 60);
  ResolventOptions opt;
  opt.tolerance = 1e-11;
  auto pop = populations(emitter_amplitudes_resolvent(sigma, Eigen::VectorXcd::Ones(1), late, opt));
  rows.clear();
  double lo = 0, hi = -1e300;
  bool any = false;
  for (const auto& le : local_exponents(late, pop, 3)) {
    rows.push_back({le.time, le.exponent});
    if (le.time < 200) continue;
    lo = any ? std::min(lo, le.exponent) : le.exponent;
    hi = std::max(hi, le.exponent);
    any = true;
  }
  run.csv("local_exponents.csv", {"t", "exponent"}, rows);
  run.check("late exponent within [-3, -2]", any && lo >= -3 && hi <= -2, {{"min", lo}, {"max", hi}});
  run.panel({{"csv", "emitter.csv"}, {"x", "t"}, {"y", {"abs2", "abs2_resolvent"}}, {"logy", true}, {"title", "emitter"}});
  run.panel({{"csv", "emitter.csv"}, {"x", "t"}, {"y", {"msd"}}, {"title", "mean squared displacement"}});
  run.panel({{"csv", "local_exponents.csv"}, {"x", "t"}, {"y", {"exponent"}}, {"logx", true}, {"title", "local exponent"}});
  run.finish("Emission into the 2D lattice");
}

// ------------------------------------------------------------------ fig9
void fig9(Run& run) {
  auto base = run.model();
  auto model = build_effective(base.lattice);
  const double g = run.num("g");
  auto times = logspace(run.num("t_min"), run.num("t_max"), run.integer("samples"));
  std::vector<std::string> header{"t"};
  std::vector<std::vector<double>> pops;
  for (const auto& c : run.at("pairs")) {
    const int x12 = c.at("x12");
    const cplx delta = to_cplx(c.at("delta"));
    EmitterSet em({Emitter{{0, 0}, {{0, g}}, delta}, Emitter{{x12, 0}, {{0, g}}, delta}});
    SelfEnergy sigma(model, em, best_propagator(base.lattice));
    ResolventOptions opt;
    opt.tolerance = c.value("tolerance", 1e-10);
    Eigen::VectorXcd sym = Eigen::VectorXcd::Ones(2) / std::sqrt(2.0);
    auto pop = populations(emitter_amplitudes_resolvent(sigma, sym, times, opt));
    std::string name = "x12_" + std::to_string(x12) + "_delta_" + format_number(delta.real());
    if (delta.imag() != 0.0) name += "_" + format_number(delta.imag()) + "i";
    header.push_back(name);
    if (c.contains("exponent")) law_check(run, name, times, pop, c.at("exponent"), 0.0, 0.2);
    if (c.value("trapped", false)) {
      // limit = (emitter weight of the trapped state)^2; the approach is ~ t^-1/2, so extrapolate
      const double J = base.lattice.params.at("J"), kappa = base.lattice.params.at("kappa");
      auto st = two_emitter_trapped_state(J, kappa, g, x12 + 2, 1, 1 + x12, 0);
      const double predicted = std::pow(st->emitter_weight, 2);
      std::vector<double> ts, ps;
      for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] >= 100) {
          ts.push_back(times[i]);
          ps.push_back(pop[i]);
        }
      Eigen::MatrixXd a(ts.size(), 3);
      Eigen::VectorXd b(ts.size());
      for (std::size_t i = 0; i < ts.size(); ++i) {
        a.row(i) << 1.0, 1.0 / std::sqrt(ts[i]), 1.0 / ts[i];
        b[i] = ps[i];
      }
      const double limit = a.colPivHouseholderQr().solve(b)[0];
      run.check(name + " trapped population", std::abs(limit / predicted - 1.0) < 0.01,
                {{"extrapolated", limit}, {"final", pop.back()}, {"weight_squared", predicted}, {"residual", st->residual}});
    }
    pops.push_back(pop);
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<double> r{times[i]};
    for (const auto& p : pops) r.push_back(p[i]);
    rows.push_back(r);
  }
  run.csv("emitters.csv", header, rows);
  run.json_file("columns.json", run.at("pairs"));

  // bath between and around a distant pair
  const auto& bath = run.at("bath");
  const int x12 = bath.at("x12"), cells = bath.at("cells");
  const cplx delta = to_cplx(bath.at("delta"));
  const int x1 = cells / 2 - x12 / 2;
  EmitterSet em({Emitter{{x1, 0}, {{0, g}}, delta}, Emitter{{x1 + x12, 0}, {{0, g}}, delta}});
  SiteIndexer idx{extent_1d(cells), 2, 2};
  Eigen::VectorXcd psi0 = (emitter_excitation(idx, 0) + emitter_excitation(idx, 1)) / std::sqrt(2.0);
  auto bt = linspace(0.0, bath.at("t_max").get<double>(), bath.at("samples").get<int>());
  const int half = bath.at("window");
  rows.clear();
  evolve_finite(real_space_hamiltonian(model, em, extent_1d(cells), Boundary::periodic), psi0, bt, 2, {}, false,
                [&](double t, const Eigen::VectorXcd& v) {
                  for (int x = x1 - half; x <= x1 + x12 + half; ++x)
                    rows.push_back({t, double(x - x1), std::norm(v[idx.site({x, 0}, 0)]) + std::norm(v[idx.site({x, 0}, 1)])});
                });
  run.csv("bath.csv", {"t", "x", "abs2"}, rows);
  run.panel({{"csv", "emitters.csv"}, {"x", "t"}, {"y", std::vector<std::string>(header.begin() + 1, header.end())},
             {"logx", true}, {"logy", true}, {"title", "emitter population"}});
  run.panel({{"csv", "bath.csv"}, {"x", "x"}, {"y", {"t"}}, {"c", "abs2"}, {"style", "map"}, {"title", "bath"}});
  run.finish("Two emitters on the A sublattice");
}

// ------------------------------------------------------------------ fig10
void fig10(Run& run) {
  auto spec = run.model();
  const double kappa = spec.lattice.params.at("kappa");
  const double g = run.num("g");
  auto sigma = [&](cplx z) { return g * g / (z + I * kappa); };
  const auto& grid = run.at("grid");  // re0, re1, im0, im1, nre, nim
  const int nre = grid[4], nim = grid[5];
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < nre; ++i)
    for (int j = 0; j < nim; ++j) {
      const cplx d{grid[0].get<double>() + (grid[1].get<double>() - grid[0].get<double>()) * i / (nre - 1),
                   grid[2].get<double>() + (grid[3].get<double>() - grid[2].get<double>()) * j / (nim - 1)};
      double exact = std::nan("");
      try {
        exact = exact_unidirectional_poles(d, g, kappa).nearest(d).imag();
      } catch (const PreconditionError&) {
      }
      auto spa = spa_poles(d, sigma);
      rows.push_back({d.real(), d.imag(), exact, spa.pole.imag(), spa.breakdown ? 1.0 : 0.0});
    }
  run.csv("poles.csv", {"re_delta", "im_delta", "im_pole_exact", "im_pole_spa", "breakdown"}, rows);
  rows.clear();
  auto model = build_effective(spec.lattice);
  for (int i = 0; i <= 256; ++i) {
    const cplx h = bloch(model, {2 * M_PI * i / 256, 0.0})(0, 0);
    rows.push_back({h.real(), h.imag()});
  }
  run.csv("pbc_spectrum.csv", {"re", "im"}, rows);
  double worst = 0.0;
  for (int k = 0; k < 48; ++k) {
    const cplx d = -I * kappa + kappa * std::polar(1.0, 2 * M_PI * k / 48.0);
    const double exact = -exact_unidirectional_poles(d, g, kappa).nearest(d).imag();
    worst = std::max(worst, std::abs(spa_poles(d, sigma).rate - exact) / exact);
  }
  run.check("agreement on the periodic spectrum", worst < 0.05, worst);
  run.check("breakdown at the open-boundary spectrum", spa_poles(-I * kappa, sigma).breakdown, true);
  run.panel({{"csv", "poles.csv"}, {"x", "re_delta"}, {"y", {"im_delta"}}, {"c", "im_pole_exact"}, {"style", "map"}, {"title", "exact"}});
  run.panel({{"csv", "poles.csv"}, {"x", "re_delta"}, {"y", {"im_delta"}}, {"c", "im_pole_spa"}, {"style", "map"}, {"title", "single pole"}});
  run.finish("Single-pole approximation on the unidirectional chain");
}

// ------------------------------------------------------------------ fig11
std::vector<cplx> overlap_series(const ModelSpec& spec, int cells, int photon_cell, const std::vector<double>& times,
                                 bool by_energy) {
  auto model = build_effective(spec.lattice);
  auto h = real_space_hamiltonian(model, spec.emitters, extent_1d(cells), Boundary::periodic);
  SiteIndexer idx{extent_1d(cells), 1, int(spec.emitters.size())};
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dense(h));
  const cplx delta = spec.emitters[0].detuning;
  Eigen::Index best = 0;
  double score = -1e300;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    Eigen::VectorXcd v = es.eigenvectors().col(i).normalized();
    const double s = by_energy ? -std::abs(es.eigenvalues()[i] - delta) : std::norm(v[0]);
    if (s > score) {
      score = s;
      best = i;
    }
  }
  Eigen::VectorXcd bound = es.eigenvectors().col(best).normalized();
  auto tr = evolve_finite(h, photon_excitation(idx, {photon_cell, 0}, 0), times, idx.emitters, {}, true);
  return overlap_dynamics(bound, tr);
}

void fig11(Run& run) {
  const int cells = run.integer("cells"), photon = run.integer("photon_cell");
  auto times = linspace(0.0, run.num("t_max"), run.integer("samples"));
  auto nh = overlap_series(run.model(), cells, photon, times, true);
  auto herm = overlap_series(run.model("control"), cells, photon, times, false);
  std::vector<std::vector<double>> rows;
  double lo = 1e300, hi = 0, hlo = 1e300, hhi = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    rows.push_back({times[i], std::abs(nh[i]), std::abs(herm[i])});
    lo = std::min(lo, std::abs(nh[i]));
    hi = std::max(hi, std::abs(nh[i]));
    hlo = std::min(hlo, std::abs(herm[i]));
    hhi = std::max(hhi, std::abs(herm[i]));
  }
  run.csv("overlap.csv", {"t", "abs_overlap", "abs_overlap_hermitian"}, rows);
  run.check("non-Hermitian overlap varies", hi - lo > 0.1, hi - lo);
  run.check("Hermitian overlap constant", hhi - hlo < 1e-10, hhi - hlo);
  run.panel({{"csv", "overlap.csv"}, {"x", "t"}, {"y", {"abs_overlap", "abs_overlap_hermitian"}}, {"title", "|<bound|psi(t)>|"}});
  run.finish("Exciting the hidden bound state with a photon");
}

// ------------------------------------------------------------------ fig12
void fig12(Run& run) {
  auto spec = run.model();
  auto model = build_effective(spec.lattice);
  const double g = run.num("g");
  const auto& grid = run.at("grid");
  const int nre = grid[4], nim = grid[5];
  auto at = [&](int i, int j) {
    return cplx{grid[0].get<double>() + (grid[1].get<double>() - grid[0].get<double>()) * i / (nre - 1),
                grid[2].get<double>() + (grid[3].get<double>() - grid[2].get<double>()) * j / (nim - 1)};
  };
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < nre; ++i)
    for (int j = 0; j < nim; ++j) {
      const cplx z = at(i, j);
      double index = std::nan("");
      try {
        index = winding_number(model, z);
      } catch (const Error&) {
      }
      rows.push_back({z.real(), z.imag(), index});
    }
  run.csv("winding.csv", {"re", "im", "index"}, rows);

  auto prop = quadrature_propagator(model, 4096);
  const int stride = run.integer("pin_stride");
  rows.clear();
  double pinned_worst = 0.0, unpinned_best = 0.0;
  for (int i = 0; i < nre; i += stride)
    for (int j = 0; j < nim; j += stride) {
      const cplx d = at(i, j);
      int index;
      try {
        index = winding_number(model, d);
      } catch (const Error&) {
        continue;
      }
      if (index == 0) continue;
      SelfEnergy sigma(model, EmitterSet({Emitter{{0, 0}, {{0, g}}, d}}), prop);
      auto st = refine_bound_state(sigma, d);
      if (!st) continue;
      const double shift = std::abs(st->energy - d);
      rows.push_back({d.real(), d.imag(), double(index), st->energy.real(), st->energy.imag(), shift});
      if (index == -2) pinned_worst = std::max(pinned_worst, shift);
      if (index == -1) unpinned_best = std::max(unpinned_best, shift);
    }
  run.csv("pinning.csv", {"re_delta", "im_delta", "index", "re_E", "im_E", "abs_E_minus_delta"}, rows);
  run.check("pinned in the maximal region", pinned_worst < 1e-9, pinned_worst);
  run.check("not pinned in the index -1 region", unpinned_best > 1e-3, unpinned_best);
  run.panel({{"csv", "winding.csv"}, {"x", "re"}, {"y", {"im"}}, {"c", "index"}, {"style", "map"}, {"title", "winding number"}});
  run.panel({{"csv", "pinning.csv"}, {"x", "re_delta"}, {"y", {"im_delta"}}, {"c", "abs_E_minus_delta"}, {"style", "map"},
             {"title", "|E_b - Delta|"}});
  run.finish("Maximal and non-maximal winding regions");
}

// ------------------------------------------------------------------ registry
struct Recipe {
  std::function<json()> config;
  std::function<void(Run&)> run;
};

const std::map<std::string, Recipe>& recipes() {
  static const std::map<std::string, Recipe> r = [] {
    std::map<std::string, Recipe> m;
    const auto pt = [](double J) { return catalog_model("alternating_loss", {{"J", J}, {"kappa", 1.0}}); };
    m["fig2"] = {[] {
                   json em = json::array();
                   const int xs[3] = {0, 4, 9};
                   for (int n = 1; n <= 3; ++n) em.push_back(emitter_doc({xs[n - 1]}, 0, 0.5, cplx(0.05 * (n + 1), -0.5)));
                   return json{{"model", catalog_model("hatano_nelson", {{"J", 0.15}, {"kappa", 1.0}}, em)},
                               {"regions", {{{"box", {-3.0, 3.0, -3.0, 1.0}}, {"seeds", 24}},
                                            {{"box", {-0.28, 0.28, -1.8, -0.2}}, {"seeds", 20}}}},
                               {"profile_radius", 30}};
                 },
                 fig2};
    auto fig3_config = [](double g, cplx delta) {
      return [=] {
        return json{{"model", catalog_model("hatano_nelson", {{"J", 2.5}, {"kappa", 1.0}}, json::array({emitter_doc({0}, 0, g, delta)}))},
                    {"x_range", 40},
                    {"dt", 0.25},
                    {"steps", 80},
                    {"probe_x", 10},
                    {"oracle_cells", 801}};
      };
    };
    m["fig3a"] = {fig3_config(2.0, cplx(0, -1)), fig3};
    m["fig3c"] = {fig3_config(2.0, 0.0), fig3};
    m["fig3e"] = {fig3_config(5.0, 0.0), fig3};
    m["fig4a"] = {[=] {
                    return json{{"model", pt(1.0)}, {"g", 1.5}, {"sublattice", 0}, {"deltas", {0.0, 0.1, 0.5, 1.0}},
                                {"t_min", 1.0}, {"t_max", 1000.0}, {"samples", 121}, {"tolerance", 1e-10},
                                {"fit_window", {100.0, 1000.0}},
                                {"crossover", {{"delta", 0.1}, {"t_max", 10000.0}, {"samples", 81},
                                               {"early", {5.0, 30.0}}, {"late", {4000.0, 10000.0}}}}};
                  },
                  fig4a};
    m["fig4b"] = {[=] {
                    return json{{"model", pt(1.0)}, {"g", 1.5}, {"sublattice", 1}, {"deltas", {0.0, 0.5, 1.0, 2.0}},
                                {"t_min", 1.0}, {"t_max", 1000.0}, {"samples", 121}, {"tolerance", 1e-10},
                                {"fit_window", {100.0, 1000.0}}};
                  },
                  fig4b};
    m["fig5"] = {[=] { return json{{"model", pt(1.0)}, {"g", 1.2}, {"sizes", {40, 80, 160}}, {"t_max", 200.0}, {"samples", 401}}; },
                 fig5};
    m["fig6"] = {[=] {
                   return json{{"model", pt(0.2)}, {"g", 1.5}, {"sublattice", 0}, {"deltas", {0.0, 1.0}},
                               {"t_min", 1.0}, {"t_max", 10000.0}, {"samples", 161}, {"tolerance", 1e-10},
                               {"fit_window", {2000.0, 10000.0}}};
                 },
                 fig6};
    m["fig7"] = {[] {
                   return json{{"model", catalog_model("hatano_nelson", {{"J", 0.6}, {"kappa", 1.0}})},
                               {"delta", {0.0, -0.5}}, {"couplings", {0.0, 0.3, 1.0, 3.0}}, {"cells", 50}};
                 },
                 fig7};
    m["fig8"] = {[] {
                   return json{{"model", catalog_model("swap2d", {{"kappa", 1.0}}, json::array({emitter_doc({15, 15}, 0, 0.4, 0.0)}))},
                               {"cells", 30}, {"t_max", 40.0}, {"samples", 81}, {"snapshots", {5.0, 10.0, 20.0, 40.0}},
                               {"compare_until", 20.0}, {"t_late", 1000.0}};
                 },
                 fig8};
    m["fig9"] = {[=] {
                   json pairs = json::array({
                       json{{"x12", 1}, {"delta", 2.0}, {"exponent", -5.0}, {"tolerance", 1e-13}},
                       json{{"x12", 1}, {"delta", 0.0}, {"trapped", true}},
                       json{{"x12", 2}, {"delta", 0.0}, {"exponent", -1.0}},
                       json{{"x12", 3}, {"delta", 0.0}, {"trapped", true}},
                   });
                   return json{{"model", pt(1.0)}, {"g", 1.5}, {"pairs", pairs}, {"t_min", 0.1}, {"t_max", 1000.0}, {"samples", 121},
                               {"bath", {{"x12", 5}, {"delta", 0.0}, {"cells", 201}, {"t_max", 30.0}, {"samples", 61}, {"window", 20}}}};
                 },
                 fig9};
    m["fig10"] = {[] {
                    return json{{"model", catalog_model("hn_unidirectional", {{"kappa", 1.0}})}, {"g", 0.2},
                                {"grid", {-2.0, 2.0, -2.5, 0.5, 81, 61}}};
                  },
                  fig10};
    m["fig11"] = {[] {
                    return json{
                        {"model", catalog_model("hn_unidirectional", {{"kappa", 1.0}}, json::array({emitter_doc({20}, 0, 0.5, cplx(0, -0.5))}))},
                        {"control", catalog_model("hatano_nelson", {{"J", 0.5}, {"kappa", 0.0}}, json::array({emitter_doc({20}, 0, 0.5, 0.0)}))},
                        {"cells", 80}, {"photon_cell", 0}, {"t_max", 60.0}, {"samples", 61}};
                  },
                  fig11};
    m["fig12"] = {[] {
                    return json{{"model", catalog_model("hn_nnn", {{"kappa", 1.0}, {"kappa2", 2.0}})}, {"g", 0.5},
                                {"grid", {-4.0, 4.0, -6.5, 1.5, 81, 81}}, {"pin_stride", 4}};
                  },
                  fig12};
    return m;
  }();
  return r;
}

}  // namespace

std::vector<std::string> scenario_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, r] : recipes()) ids.push_back(id);
  std::sort(ids.begin(), ids.end(), [](const std::string& a, const std::string& b) {
    auto num = [](const std::string& s) { return std::stoi(s.substr(3)); };
    return num(a) != num(b) ? num(a) < num(b) : a < b;
  });
  return ids;
}

json default_config(const std::string& id) {
  auto it = recipes().find(id);
  if (it == recipes().end()) throw PreconditionError("unknown scenario '" + id + "'");
  json cfg = it->second.config();
  cfg["id"] = id;
  return cfg;
}

ScenarioReport run_scenario(const json& config, const std::string& out_dir) {
  const std::string id = config.at("id").get<std::string>();
  auto it = recipes().find(id);
  if (it == recipes().end()) throw PreconditionError("unknown scenario '" + id + "'");
  const auto t0 = std::chrono::steady_clock::now();
  Run run(config, out_dir);
  run.json_file("config.json", config);
  try {
    it->second.run(run);
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed scenario config: ") + e.what());
  }
  run.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  run.json_file("report.json", {{"id", id}, {"passed", run.report.passed}, {"checks", run.report.checks},
                                {"artifacts", run.report.artifacts}});
  return run.report;
}

}  // namespace nhemit
