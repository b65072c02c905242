#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhemit/model.hpp"

namespace nhemit {

using json = nlohmann::json;

struct ModelSpec {
  Lattice lattice;
  EmitterSet emitters;
};

// Model-spec document. Either an explicit lattice
//   {"dimension", "sublattices", "kappa", "hoppings": [...], "jumps": [...], "emitters": [...]}
// or a catalog entry {"catalog": name, "params": {...}, "emitters": [...]}.
ModelSpec parse_model_spec(const json& doc);
json to_json(const ModelSpec& spec);

// "name:J=0.15,kappa=1" for catalog lattices, otherwise a path to a JSON
// document.
ModelSpec load_model(const std::string& argument);

// "cell=3;sub=0;g=0.5;delta=0.1-0.5i" (2D cells as "cell=3,4").
Emitter parse_emitter(const std::string& text, int dimension);

// Accepts "1.5", "-0.5i", "0.1-0.5i", "2+i".
cplx parse_complex(const std::string& text);

// Shortest round-trip representation (17 significant digits).
std::string format_number(double v);

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void header(const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);

 private:
  std::ostream* out_;
  bool owned_;
};

void write_json(const std::string& path, const json& doc);

}  // namespace nhemit
