#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "nhemit/errors.hpp"
#include "nhemit/io.hpp"
#include "nhemit/scenarios.hpp"

using namespace nhemit;

TEST_CASE("complex number parsing") {
  CHECK(parse_complex("1.5") == cplx(1.5, 0));
  CHECK(parse_complex("-0.5i") == cplx(0, -0.5));
  CHECK(parse_complex("0.1-0.5i") == cplx(0.1, -0.5));
  CHECK(parse_complex("2+i") == cplx(2, 1));
  CHECK(parse_complex("-i") == cplx(0, -1));
  CHECK(parse_complex("1e-3+2e-2j") == cplx(1e-3, 2e-2));
  CHECK_THROWS_AS(parse_complex("abc"), ModelError);
  CHECK_THROWS_AS(parse_complex(""), ModelError);
}

TEST_CASE("catalog strings and emitters") {
  auto spec = load_model("hatano_nelson:J=0.6,kappa=1");
  CHECK(spec.lattice.name == "hatano_nelson");
  CHECK(spec.lattice.params.at("J") == 0.6);
  CHECK(spec.emitters.empty());
  auto e = parse_emitter("cell=3;sub=0;g=0.5;delta=0.1-0.5i", 1);
  CHECK(e.cell[0] == 3);
  CHECK(e.couplings.size() == 1);
  CHECK(e.couplings[0].second == cplx(0.5, 0));
  CHECK(e.detuning == cplx(0.1, -0.5));
  auto e2 = parse_emitter("cell=3,4;sub=1;g=0.4;delta=0", 2);
  CHECK(e2.cell == Cell{3, 4});
  CHECK_THROWS_AS(load_model("no_such_model:J=1"), ModelError);
}

TEST_CASE("model documents round-trip") {
  ModelSpec spec{catalog::alternating_loss(1.0, 1.0),
                 EmitterSet({Emitter{{0, 0}, {{0, 1.5}}, cplx(0.1, -0.2)}, Emitter{{3, 0}, {{1, cplx(0.2, 0.3)}}, 0.0}})};
  auto back = parse_model_spec(to_json(spec));
  CHECK(to_json(back) == to_json(spec));
  for (double k : {0.0, 0.7, -2.1})
    CHECK((bloch(build_effective(back.lattice), {k, 0}) - bloch(build_effective(spec.lattice), {k, 0})).norm() < 1e-15);

  // explicit lattice form
  json doc = {{"dimension", 1},
              {"sublattices", 1},
              {"kappa", 1.0},
              {"hoppings", {{{"offset", {1}}, {"from", 0}, {"to", 0}, {"re", 0.3}, {"im", 0.0}},
                            {{"offset", {-1}}, {"from", 0}, {"to", 0}, {"re", 0.3}, {"im", 0.0}}}},
              {"jumps", {{{"channel", 0}, {"terms", {{{"offset", {0}}, {"sublattice", 0}, {"re", 1.0}, {"im", 0.0}},
                                                    {{"offset", {1}}, {"sublattice", 0}, {"re", 0.0}, {"im", -1.0}}}}}}},
              {"emitters", json::array()}};
  auto custom = parse_model_spec(doc);
  auto hn = build_effective(catalog::hatano_nelson(0.3, 1.0));
  for (double k : {0.0, 0.7, -2.1})
    CHECK(std::abs(bloch(build_effective(custom.lattice), {k, 0})(0, 0) - bloch(hn, {k, 0})(0, 0)) < 1e-14);
  CHECK(parse_model_spec(to_json(custom)).lattice.hoppings.size() == custom.lattice.hoppings.size());
  CHECK_THROWS_AS(parse_model_spec(json{{"dimension", "one"}}), ModelError);
}

TEST_CASE("numbers keep 17 significant digits") {
  const double v = 0.1 + 0.2;
  CHECK(std::stod(format_number(v)) == v);
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("scenario configs reproduce identical data") {
  namespace fs = std::filesystem;
  const fs::path a = fs::temp_directory_path() / "nhemit_test_fig7_a", b = fs::temp_directory_path() / "nhemit_test_fig7_b";
  fs::remove_all(a);
  fs::remove_all(b);
  auto first = run_scenario(default_config("fig7"), a.string());
  CHECK(first.passed);
  std::ifstream cfg(a / "config.json");
  auto second = run_scenario(json::parse(cfg), b.string());
  CHECK(second.passed);
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  for (const auto& name : first.artifacts)
    if (fs::path(name).extension() == ".csv") CHECK(slurp(a / name) == slurp(b / name));
  CHECK_THROWS_AS(default_config("fig99"), PreconditionError);
  fs::remove_all(a);
  fs::remove_all(b);
}
