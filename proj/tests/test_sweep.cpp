#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "ecomb/errors.hpp"
#include "ecomb/lattice.hpp"
#include "ecomb/observables.hpp"
#include "ecomb/recipes.hpp"
#include "ecomb/sweep.hpp"

using namespace ecomb;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ecomb_sweep_test_" + std::to_string(static_cast<long>(::getpid())));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

} // namespace

TEST_CASE("sweep configs parse values and generated axes") {
  const json j = {
      {"name", "width-scan"},
      {"solver", "analytic"},
      {"base", {{"v_over_c", 1.0 / 3.0}}},
      {"axes",
       json::array({{{"name", "beta_abs"}, {"values", {0.5, 1.0, 2.0}}},
                    {{"name", "span_over_z0"},
                     {"start", 10.0},
                     {"stop", 40.0},
                     {"count", 4}},
                    {{"name", "zT"},
                     {"start", 1.0},
                     {"stop", 100.0},
                     {"count", 3},
                     {"spacing", "log"}}})},
      {"observables", {"sigma", "doc1_max"}},
  };
  const SweepConfig cfg = parse_sweep_config(j);
  CHECK(cfg.name == "width-scan");
  CHECK(cfg.solver == "analytic");
  REQUIRE(cfg.axes.size() == 3);
  CHECK(cfg.axes[0].values == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(cfg.axes[1].values == std::vector<double>{10.0, 20.0, 30.0, 40.0});
  REQUIRE(cfg.axes[2].values.size() == 3);
  CHECK(cfg.axes[2].values[1] == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(cfg.observables == std::vector<std::string>{"sigma", "doc1_max"});
}

TEST_CASE("bad sweep configs are refused") {
  CHECK_THROWS_AS(parse_sweep_config({{"axes", json::array()}}), ConfigError);
  CHECK_THROWS_AS(parse_sweep_config({{"solver", "subjective"},
                                      {"axes", json::array({{{"name", "x"}, {"values", {1.0}}}})}}),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_sweep_config(
          {{"axes", json::array({{{"name", "x"}, {"start", -1.0}, {"stop", 2.0}, {"count", 3}, {"spacing", "log"}}})}}),
      ConfigError);
  CHECK_THROWS_AS(
      parse_sweep_config(
          {{"axes", json::array({{{"name", "x"}, {"start", 0.0}, {"stop", 1.0}, {"count", 0}}})}}),
      ConfigError);
  CHECK_THROWS_AS(
      parse_sweep_config({{"schema_version", 12},
                          {"axes", json::array({{{"name", "x"}, {"values", {1.0}}}})}}),
      ConfigError);
}

TEST_CASE("a single-point sweep reproduces a direct solve") {
  json j = {
      {"solver", "lattice"},
      {"base", {{"v_over_c", 1.0 / 3.0}, {"talbot_over_z0", 40.0}, {"ell_max", 8}}},
      {"axes", json::array({{{"name", "beta_abs"}, {"values", {0.9}}}})},
      {"observables", {"sigma", "resonant_weight", "doc1_max", "doc1_argmax"}},
  };
  const SweepOutcome out = run_sweep(parse_sweep_config(j));
  REQUIRE(out.dataset.rows.size() == 1);
  const auto& row = out.dataset.rows[0];
  REQUIRE(row.size() == 5);

  SolverNumerics num;
  num.ell_max = 8;
  const DimensionlessProblem p = matched_problem(1.0 / 3.0, 0.9, 40.0, 50.0, num);
  const ResonantExtraction ex = extract_resonant(evolve(p).final_state);
  const DocMax best = max_doc_over_distance(ex.spectrum, 1);
  CHECK(row[0] == 0.9);
  CHECK(row[1] == doctest::Approx(sideband_sigma(ex.spectrum)).epsilon(1e-13));
  CHECK(row[2] == doctest::Approx(ex.resonant_weight).epsilon(1e-13));
  CHECK(row[3] == doctest::Approx(best.value).epsilon(1e-12));
  CHECK(row[4] == doctest::Approx(best.d_over_zT).scale(1.0).epsilon(1e-9));

  REQUIRE(out.problems.size() == 1);
  CHECK(out.problems[0].at("ell_max") == 8);
}

TEST_CASE("worker count never changes the emitted bytes") {
  TempDir tmp;
  json j = {
      {"name", "det"},
      {"solver", "analytic"},
      {"base", {{"v_over_c", 1.0 / 3.0}}},
      {"axes",
       json::array({{{"name", "beta_abs"}, {"start", 0.25}, {"stop", 3.0}, {"count", 7}},
                    {{"name", "span_over_z0"}, {"values", {20.0, 30.0}}}})},
      {"observables", {"sigma", "doc1_max", "doc2_argmax"}},
  };
  SweepConfig serial = parse_sweep_config(j);
  serial.workers = 1;
  SweepConfig threaded = parse_sweep_config(j);
  threaded.workers = 4;

  const SweepOutcome a = run_sweep(serial);
  const SweepOutcome b = run_sweep(threaded);
  REQUIRE(a.dataset.rows.size() == 14);
  REQUIRE(b.dataset.rows.size() == 14);
  for (std::size_t i = 0; i < a.dataset.rows.size(); ++i) {
    CHECK(a.dataset.rows[i] == b.dataset.rows[i]);
  }

  write_dataset_csv(tmp.file("serial.csv"), a.dataset);
  write_dataset_csv(tmp.file("threaded.csv"), b.dataset);
  CHECK(slurp(tmp.file("serial.csv")) == slurp(tmp.file("threaded.csv")));
  write_dataset_records(tmp.file("serial.records.json"), a.dataset);
  write_dataset_records(tmp.file("threaded.records.json"), b.dataset);
  CHECK(slurp(tmp.file("serial.records.json")) == slurp(tmp.file("threaded.records.json")));
}

TEST_CASE("threaded lattice points land in their own slots") {
  json j = {
      {"solver", "lattice"},
      {"base", {{"v_over_c", 1.0 / 3.0}, {"ell_max", 6}, {"slice_count", 400}}},
      {"axes", json::array({{{"name", "beta_abs"}, {"values", {0.3, 0.6, 0.9}}}})},
      {"observables", {"sigma"}},
      {"workers", 3},
  };
  const SweepOutcome threaded = run_sweep(parse_sweep_config(j));
  json j1 = j;
  j1["workers"] = 1;
  const SweepOutcome serial = run_sweep(parse_sweep_config(j1));
  REQUIRE(threaded.dataset.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(threaded.dataset.rows[i] == serial.dataset.rows[i]);
    CHECK(threaded.dataset.rows[i][0] == serial.dataset.rows[i][0]);
  }
}

TEST_CASE("sweep failures carry the config exit class") {
  json j = {
      {"solver", "analytic"},
      {"base", {{"v_over_c", 1.0 / 3.0}}},
      {"axes", json::array({{{"name", "beta_abs"}, {"values", {1.0}}}})},
      {"observables", {"entropy"}},
  };
  CHECK_THROWS_AS(run_sweep(parse_sweep_config(j)), ConfigError);

  json missing = j;
  missing["observables"] = {"sigma"};
  missing["base"] = json::object();
  CHECK_THROWS_AS(run_sweep(parse_sweep_config(missing)), ConfigError);
}

TEST_CASE("recipes run end to end and leave a manifest") {
  CHECK_THROWS_AS(run_recipe({.name = "fig9z"}), ConfigError);
  const auto names = recipe_names();
  CHECK(!names.empty());

  TempDir tmp;
  RecipeRequest req;
  req.name = "fig2b";
  req.out_dir = tmp.path.string();
  const Dataset ds = run_recipe(req);
  CHECK(!ds.rows.empty());
  CHECK(ds.columns == std::vector<std::string>{"beta_abs", "ell", "prob"});

  CHECK(fs::exists(tmp.path / "fig2b.csv"));
  CHECK(fs::exists(tmp.path / "fig2b.records.json"));
  CHECK(fs::exists(tmp.path / "fig2b.manifest.json"));

  const Dataset back = read_dataset_records(tmp.file("fig2b.records.json"));
  REQUIRE(back.rows.size() == ds.rows.size());
  CHECK(back.rows == ds.rows);

  const RunManifest m = read_manifest(tmp.file("fig2b.manifest.json"));
  CHECK(m.command.find("fig2b") != std::string::npos);
  REQUIRE(m.outputs.size() == 2);
  for (const auto& out : m.outputs) {
    CHECK(out.bytes > 0);
    CHECK(out.fnv1a64.rfind("0x", 0) == 0);
  }
}
