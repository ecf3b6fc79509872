#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "lps/io.hpp"

using namespace lps;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("lps_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("decimal17 formatting round-trips doubles") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e17, 1e-300, 3.141592653589793,
                   -0.0, 123456789.123456789}) {
    const std::string s = format_double17(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("algebra serialization round trip is bit exact") {
  for (const auto& a : algebra_catalog()) {
    json j = algebra_to_json(*a);
    // Through text, as the CLI would write it.
    json parsed = json::parse(j.dump());
    AlgebraPtr back = algebra_from_json(parsed);
    REQUIRE(back->dim() == a->dim());
    for (int k = 0; k < a->dim(); ++k)
      CHECK((back->structure()[k] - a->structure()[k]).cwiseAbs().maxCoeff() ==
            0.0);
    if (a->has_rep())
      for (int i = 0; i < a->dim(); ++i)
        CHECK((back->rep()[i] - a->rep()[i]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("malformed algebras are rejected") {
  json j = algebra_to_json(*algebra_so3());
  j["c"][2][0][1] = 2.0;  // breaks antisymmetry against c[2][1][0]
  CHECK_THROWS_AS(algebra_from_json(j), InputError);
}

TEST_CASE("document reference resolution") {
  Document doc = Document::from_json(json::object());
  CHECK(doc.algebra("builtin:so3")->dim() == 3);
  CHECK(doc.subgroup("builtin:so3_so2").r() == 1);
  CHECK(doc.chart("builtin:hopf").base_dim() == 2);
  CHECK(doc.gauge_chart("builtin:free_hopf").n() == 2);
  CHECK_THROWS_AS(doc.algebra("builtin:nope"), InputError);
  CHECK_THROWS_AS(doc.subgroup("missing"), InputError);
}

TEST_CASE("config-defined subgroup and chart") {
  Document doc = Document::load(std::string(LPS_SOURCE_DIR) + "/configs/custom_pair.json");
  SubgroupSpec h = doc.subgroup("half_turn");
  CHECK(h.r() == 0);
  CHECK(h.generators().size() == 1);
  StrataReport rep = enumerate_strata(h, 150, 5);
  CHECK(rep.classes.size() == 3);  // same stratification as the builtin pair

  ConnectionChart chart = doc.chart("shear");
  Eigen::VectorXd x(2);
  x << 0.3, -0.2;
  CurvatureTable table = curvature_structure(chart);
  CHECK(table.value(x, 0, 1)(0) == doctest::Approx(1.0));
}

TEST_CASE("polynomial specs validate arity") {
  Document doc = Document::from_json(json::object());
  json bad = json::parse(R"({"terms":[{"coeff":1.0,"powers":[1,0]}]})");
  CHECK_THROWS_AS(doc.poly_spec(bad, 3), InputError);
}

TEST_CASE("catalog command lists the required entries") {
  RunConfig rc;
  rc.command = "catalog";
  rc.out_dir = scratch_dir("catalog").string();
  rc.quiet = true;
  CHECK(run_command(rc) == 0);
  json rec = json::parse(slurp(fs::path(rc.out_dir) / "catalog.json"));
  REQUIRE(rec.at("entries").size() >= 5);
  std::vector<std::string> need = {"so3_so2", "su2_u1", "so3_z2", "free_hopf",
                                   "homogeneous_t_star_s2"};
  for (const auto& want : need) {
    bool found = false;
    for (const auto& e : rec.at("entries"))
      if (e.at("name") == want) found = true;
    CAPTURE(want);
    CHECK(found);
  }
  // Every stored expected value carries its provenance.
  for (const auto& e : rec.at("entries"))
    for (const auto& ev : e.at("expected")) {
      const std::string basis = ev.at("basis").get<std::string>();
      CHECK((basis == "exact" || basis == "oracle"));
      if (basis == "oracle") CHECK(ev.contains("oracle"));
    }
}

TEST_CASE("record documents are deterministic for a fixed seed") {
  const fs::path dir = scratch_dir("determinism");
  const fs::path cfg = dir / "cfg.json";
  {
    std::ofstream out(cfg);
    out << R"({"run":{"subgroup":"builtin:so3_z2","samples":120}})";
  }
  RunConfig rc;
  rc.command = "strata";
  rc.config_path = cfg.string();
  rc.seed = 99;
  rc.quiet = true;
  rc.out_dir = (dir / "a").string();
  CHECK(run_command(rc) == 0);
  rc.out_dir = (dir / "b").string();
  CHECK(run_command(rc) == 0);
  CHECK(slurp(dir / "a" / "strata.json") == slurp(dir / "b" / "strata.json"));
  CHECK(slurp(dir / "a" / "strata_table.tsv") ==
        slurp(dir / "b" / "strata_table.tsv"));
  // A different seed still passes but may sample differently; the record
  // stores the seed either way.
  json rec = json::parse(slurp(dir / "a" / "strata.json"));
  CHECK(rec.at("seed").get<std::uint64_t>() == 99);
}

TEST_CASE("tolerance overrides flip assertions") {
  const fs::path dir = scratch_dir("tol");
  RunConfig rc;
  rc.command = "jacobi";
  rc.quiet = true;
  rc.out_dir = dir.string();
  json cfg;
  cfg["run"]["gauge"] = "builtin:abelian_b1";
  cfg["run"]["trials"] = 5;
  const fs::path cfg_path = dir / "cfg.json";
  {
    std::ofstream out(cfg_path);
    out << cfg.dump();
  }
  rc.config_path = cfg_path.string();
  CHECK(run_command(rc) == 0);
  rc.tolerances.set("gauge_jacobi", 1e-30);  // unreachable
  CHECK(run_command(rc) == 2);
}

TEST_CASE("negative control exits with the assertion code") {
  const fs::path dir = scratch_dir("neg");
  RunConfig rc;
  rc.command = "jacobi";
  rc.quiet = true;
  rc.out_dir = dir.string();
  rc.config_path = std::string(LPS_SOURCE_DIR) + "/configs/jacobi_negative_control.json";
  CHECK(run_command(rc) == 2);
}

TEST_CASE("input errors are reported as such") {
  RunConfig rc;
  rc.command = "definitely-not-a-command";
  rc.quiet = true;
  rc.out_dir = scratch_dir("err").string();
  CHECK_THROWS_AS(run_command(rc), InputError);
  rc.command = "strata";
  rc.config_path = "/nonexistent/config.json";
  CHECK_THROWS_AS(run_command(rc), InputError);
}

TEST_CASE("lp commands reject non-invariant functions") {
  const fs::path dir = scratch_dir("cert");
  json cfg;
  cfg["run"]["subgroup"] = "builtin:so3_so2";
  // mu1 is not invariant under rotations about e3.
  cfg["run"]["f"]["terms"] = json::array(
      {json{{"coeff", 1.0}, {"powers", json::array({1, 0, 0})}}});
  cfg["run"]["g"]["terms"] = json::array(
      {json{{"coeff", 1.0}, {"powers", json::array({0, 0, 1})}}});
  cfg["run"]["points"] = json::array({json::array({0.5, 0.0, 0.0})});
  const fs::path cfg_path = dir / "cfg.json";
  {
    std::ofstream out(cfg_path);
    out << cfg.dump();
  }
  RunConfig rc;
  rc.command = "lp-bracket";
  rc.quiet = true;
  rc.out_dir = dir.string();
  rc.config_path = cfg_path.string();
  CHECK_THROWS_AS(run_command(rc), InputError);
}
