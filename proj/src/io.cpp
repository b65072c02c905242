#include "nhemit/io.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nhemit/errors.hpp"

namespace nhemit {

namespace {

Cell read_cell(const json& v, int dim) {
  if (!v.is_array() || int(v.size()) != dim) throw ModelError("cell/offset must have " + std::to_string(dim) + " entries");
  Cell c{0, 0};
  for (int d = 0; d < dim; ++d) c[d] = v.at(d).get<int>();
  return c;
}

json write_cell(const Cell& c, int dim) {
  json a = json::array();
  for (int d = 0; d < dim; ++d) a.push_back(c[d]);
  return a;
}

double get_or(const json& o, const char* key, double fallback) {
  return o.contains(key) ? o.at(key).get<double>() : fallback;
}

std::vector<Emitter> read_emitters(const json& doc, int dim) {
  std::vector<Emitter> out;
  if (!doc.contains("emitters")) return out;
  for (const auto& e : doc.at("emitters")) {
    Emitter em;
    em.cell = read_cell(e.at("cell"), dim);
    if (e.contains("couplings")) {
      for (const auto& c : e.at("couplings"))
        em.couplings.push_back({c.at("sublattice").get<int>(), cplx(get_or(c, "g_re", 0), get_or(c, "g_im", 0))});
    } else {
      em.couplings.push_back({e.value("sublattice", 0), cplx(get_or(e, "g_re", 0), get_or(e, "g_im", 0))});
    }
    em.detuning = cplx(get_or(e, "delta_re", 0), get_or(e, "delta_im", 0));
    out.push_back(em);
  }
  return out;
}

}  // namespace

ModelSpec parse_model_spec(const json& doc) {
  try {
    ModelSpec spec;
    if (doc.contains("catalog")) {
      std::map<std::string, double> params;
      if (doc.contains("params"))
        for (auto it = doc.at("params").begin(); it != doc.at("params").end(); ++it)
          params[it.key()] = it.value().get<double>();
      spec.lattice = catalog::by_name(doc.at("catalog").get<std::string>(), params);
    } else {
      Lattice& lat = spec.lattice;
      lat.dimension = doc.at("dimension").get<int>();
      lat.sublattices = doc.at("sublattices").get<int>();
      lat.kappa = doc.value("kappa", 0.0);
      if (lat.dimension != 1 && lat.dimension != 2) throw ModelError("dimension must be 1 or 2");
      if (doc.contains("hoppings"))
        for (const auto& h : doc.at("hoppings"))
          lat.hoppings.push_back({read_cell(h.at("offset"), lat.dimension), h.at("from").get<int>(),
                                  h.at("to").get<int>(), cplx(get_or(h, "re", 0), get_or(h, "im", 0))});
      if (doc.contains("jumps")) {
        std::map<int, JumpChannel> channels;
        for (const auto& j : doc.at("jumps")) {
          int ch = j.value("channel", int(channels.size()));
          for (const auto& t : j.at("terms"))
            channels[ch].terms.push_back({read_cell(t.at("offset"), lat.dimension), t.at("sublattice").get<int>(),
                                          cplx(get_or(t, "re", 0), get_or(t, "im", 0))});
        }
        for (auto& [ch, c] : channels) lat.jumps.push_back(std::move(c));
      }
    }
    spec.lattice.validate();
    spec.emitters = EmitterSet(read_emitters(doc, spec.lattice.dimension));
    spec.emitters.validate(spec.lattice);
    return spec;
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed model spec: ") + e.what());
  }
}

json to_json(const ModelSpec& spec) {
  const Lattice& lat = spec.lattice;
  const int dim = lat.dimension;
  json doc;
  if (lat.name != "custom") {
    doc["catalog"] = lat.name;
    doc["params"] = lat.params;
  } else {
    doc["dimension"] = dim;
    doc["sublattices"] = lat.sublattices;
    doc["kappa"] = lat.kappa;
    doc["hoppings"] = json::array();
    for (const auto& h : lat.hoppings)
      doc["hoppings"].push_back({{"offset", write_cell(h.offset, dim)},
                                 {"from", h.from},
                                 {"to", h.to},
                                 {"re", h.amplitude.real()},
                                 {"im", h.amplitude.imag()}});
    doc["jumps"] = json::array();
    for (std::size_t c = 0; c < lat.jumps.size(); ++c) {
      json terms = json::array();
      for (const auto& t : lat.jumps[c].terms)
        terms.push_back({{"offset", write_cell(t.offset, dim)},
                         {"sublattice", t.sublattice},
                         {"re", t.coefficient.real()},
                         {"im", t.coefficient.imag()}});
      doc["jumps"].push_back({{"channel", c}, {"terms", terms}});
    }
  }
  doc["emitters"] = json::array();
  for (const auto& e : spec.emitters) {
    json couplings = json::array();
    for (const auto& [s, g] : e.couplings)
      couplings.push_back({{"sublattice", s}, {"g_re", g.real()}, {"g_im", g.imag()}});
    doc["emitters"].push_back({{"cell", write_cell(e.cell, dim)},
                               {"couplings", couplings},
                               {"delta_re", e.detuning.real()},
                               {"delta_im", e.detuning.imag()}});
  }
  return doc;
}

ModelSpec load_model(const std::string& arg) {
  std::ifstream in(arg);
  if (in) {
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw ModelError(arg + ": " + e.what());
    }
    return parse_model_spec(doc);
  }
  // catalog spec string
  std::string name = arg, rest;
  if (auto colon = arg.find(':'); colon != std::string::npos) {
    name = arg.substr(0, colon);
    rest = arg.substr(colon + 1);
  }
  std::map<std::string, double> params;
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ModelError("catalog parameter '" + item + "' needs the form key=value");
    try {
      params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ModelError("bad value in '" + item + "'");
    }
  }
  ModelSpec spec;
  spec.lattice = catalog::by_name(name, params);
  return spec;
}

cplx parse_complex(const std::string& raw) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw ModelError("empty complex number");
  auto number = [&](const std::string& part, bool imag) -> double {
    std::string p = part;
    if (imag) {
      p.pop_back();
      if (p.empty() || p == "+") return 1.0;
      if (p == "-") return -1.0;
    }
    std::size_t used = 0;
    double v = std::stod(p, &used);
    if (used != p.size()) throw ModelError("bad complex number '" + raw + "'");
    return v;
  };
  try {
    if (s.back() != 'i' && s.back() != 'j') return {number(s, false), 0.0};
    // split at the last sign that is not part of an exponent
    std::size_t split = std::string::npos;
    for (std::size_t i = s.size() - 1; i > 0; --i)
      if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
        split = i;
        break;
      }
    if (split == std::string::npos) return {0.0, number(s, true)};
    return {number(s.substr(0, split), false), number(s.substr(split), true)};
  } catch (const std::logic_error&) {
    throw ModelError("bad complex number '" + raw + "'");
  }
}

Emitter parse_emitter(const std::string& text, int dim) {
  Emitter e;
  int sub = 0;
  cplx g = 0.0;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ModelError("emitter field '" + item + "' needs key=value");
    const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    try {
      if (key == "cell") {
        std::stringstream cs(val);
        std::string c;
        int d = 0;
        while (std::getline(cs, c, ',')) {
          if (d >= dim) throw ModelError("emitter cell has too many coordinates");
          e.cell[d++] = std::stoi(c);
        }
        if (d != dim) throw ModelError("emitter cell has too few coordinates");
      } else if (key == "sub") {
        sub = std::stoi(val);
      } else if (key == "g") {
        g = parse_complex(val);
      } else if (key == "delta") {
        e.detuning = parse_complex(val);
      } else {
        throw ModelError("unknown emitter field '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw ModelError("bad emitter field '" + item + "'");
    }
  }
  e.couplings.push_back({sub, g});
  return e;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path) {
  if (path.empty() || path == "-") {
    out_ = &std::cout;
    owned_ = false;
  } else {
    auto* f = new std::ofstream(path);
    if (!*f) {
      delete f;
      throw Error("cannot open " + path + " for writing");
    }
    out_ = f;
    owned_ = true;
  }
}

CsvWriter::~CsvWriter() {
  out_->flush();
  if (owned_) delete out_;
}

void CsvWriter::header(const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) *out_ << (i ? "," : "") << cols[i];
  *out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) *out_ << (i ? "," : "") << format_number(values[i]);
  *out_ << '\n';
}

void write_json(const std::string& path, const json& doc) {
  if (path.empty() || path == "-") {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << doc.dump(2) << '\n';
}

}  // namespace nhemit
