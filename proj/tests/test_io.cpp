#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>

#include "pmorph/config.hpp"
#include "pmorph/io.hpp"

using namespace pmorph;
namespace fs = std::filesystem;

TEST_CASE("sha1 known vectors") {
  CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
  CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
  CHECK(sha1_hex("The quick brown fox jumps over the lazy dog") ==
        "2fd4e1c67a2d28fced849ee1bb76e7391b93eb12");
  // long input spanning several blocks
  std::string big(1000, 'a');
  CHECK(sha1_hex(big) == "291e9a6c66994949b57ba5e650361e98fc36b1ba");
}

TEST_CASE("git blob hash matches git hash-object") {
  CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("format_double round-trips 17 significant digits") {
  for (double x : {1.0 / 3.0, 0.1, -2.5, 1e300, 5e-324, 0.0, 123456789.123456789}) {
    std::string s = format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
    CHECK(s.find(',') == std::string::npos);
  }
}

TEST_CASE("atomic write leaves no staging file") {
  fs::path dir = fs::temp_directory_path() / "pmorph_io_test";
  fs::remove_all(dir);
  fs::path target = dir / "sub" / "file.txt";
  atomic_write_file(target, "payload");
  CHECK(read_file(target) == "payload");
  CHECK_FALSE(fs::exists(target.string() + ".partial"));
  atomic_write_file(target, "replaced");
  CHECK(read_file(target) == "replaced");
  fs::remove_all(dir);
}

TEST_CASE("grid point CSV") {
  GridGeometry g(2, 0, 2);
  std::string csv = grid_points_csv(g);
  CHECK(csv == "index,digits,value\n0,00,0\n1,10,1\n2,01,2\n3,11,3\n");
  GridGeometry gm(2, 1, 1);
  std::string csvm = grid_points_csv(gm);
  CHECK(csvm ==
        "index,digits,value\n0,00,0\n1,10,1/2\n2,01,1\n3,11,3/2\n");
}

TEST_CASE("config parsing accepts the full schema") {
  const std::string text = R"({
    "grid": {"p": 2, "M": 0, "L": 3},
    "operator": {"alpha": 1.0, "paper_literal_matrix": false, "dense_cap": 512},
    "kinetics": {"model": "schnakenberg", "params": {"a": 0.2, "b": 1.3},
                 "gamma": 10.0, "d": 30.0},
    "simulation": {"t_end": 1.0, "dt": 0.001, "scheme": "imex_euler",
                   "perturbation_amplitude": 0.01, "seed": 42,
                   "snapshot_stride": 10},
    "output": {"directory": "runs/demo", "prefix": "demo"}
  })";
  RunConfig cfg = parse_config(text);
  CHECK(cfg.grid.p == 2);
  CHECK(cfg.grid.L == 3);
  REQUIRE(cfg.op.has_value());
  CHECK(cfg.op->alpha == 1.0);
  CHECK(cfg.op->dense_cap == 512);
  REQUIRE(cfg.kinetics.has_value());
  CHECK(cfg.kinetics->model == "schnakenberg");
  CHECK(cfg.kinetics->params.at("b") == 1.3);
  REQUIRE(cfg.simulation.has_value());
  CHECK(cfg.simulation->seeds == std::vector<std::uint64_t>{42});
  CHECK(cfg.output.directory == "runs/demo");
  CHECK(cfg.output.prefix == "demo");

  GridGeometry g = make_geometry(cfg);
  CHECK(g.N == 8);
  KineticsModel m = make_kinetics(*cfg.kinetics);
  CHECK(m.gamma == 10.0);
}

TEST_CASE("config rejects unknown keys and missing fields by name") {
  CHECK_THROWS_WITH(parse_config(R"({"grid": {"p": 2, "M": 0, "L": 1}, "grd": {}})"),
                    Catch::Matchers::ContainsSubstring("grd"));
  CHECK_THROWS_WITH(
      parse_config(R"({"grid": {"p": 2, "M": 0, "L": 1, "cap": 4}})"),
      Catch::Matchers::ContainsSubstring("grid.cap"));
  CHECK_THROWS_WITH(parse_config(R"({"grid": {"M": 0, "L": 1}})"),
                    Catch::Matchers::ContainsSubstring("grid.p"));
  CHECK_THROWS_WITH(parse_config(R"({"grid": {"p": 2, "M": 0}})"),
                    Catch::Matchers::ContainsSubstring("grid.L"));
  CHECK_THROWS_AS(parse_config("not json at all"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"([1, 2, 3])"), ConfigError);
  // seed and seeds are mutually exclusive
  CHECK_THROWS_WITH(
      parse_config(R"({"grid": {"p": 2, "M": 0, "L": 1},
                       "simulation": {"t_end": 1, "dt": 0.1, "seed": 1,
                                      "seeds": [1, 2]}})"),
      Catch::Matchers::ContainsSubstring("seeds"));
  // wrong type
  CHECK_THROWS_WITH(parse_config(R"({"grid": {"p": "two", "M": 0, "L": 1}})"),
                    Catch::Matchers::ContainsSubstring("grid.p"));
}

TEST_CASE("composite p is rejected when building the geometry") {
  RunConfig cfg = parse_config(R"({"grid": {"p": 6, "M": 0, "L": 2}})");
  CHECK_THROWS_AS(make_geometry(cfg), ConfigError);
}

TEST_CASE("unknown kinetics model raises KineticsError") {
  RunConfig cfg = parse_config(R"({
    "grid": {"p": 2, "M": 0, "L": 2},
    "kinetics": {"model": "gray-scott", "gamma": 1.0, "d": 2.0}
  })");
  REQUIRE(cfg.kinetics.has_value());
  CHECK_THROWS_AS(make_kinetics(*cfg.kinetics), KineticsError);
  // missing parameter
  RunConfig cfg2 = parse_config(R"({
    "grid": {"p": 2, "M": 0, "L": 2},
    "kinetics": {"model": "schnakenberg", "params": {"a": 0.2},
                 "gamma": 1.0, "d": 2.0}
  })");
  CHECK_THROWS_WITH(make_kinetics(*cfg2.kinetics),
                    Catch::Matchers::ContainsSubstring("'b'"));
}

TEST_CASE("report JSON carries the condition table") {
  KineticsModel m = make_schnakenberg(0.2, 1.3, 10.0, 30.0);
  TuringReport rep = turing_report(m, GridGeometry(2, 0, 3), 1.0);
  json j = turing_report_json(rep);
  CHECK(j["conditions"]["T1"]["holds"].get<bool>());
  CHECK(j["conditions"]["T6"]["holds"].get<bool>());
  CHECK(j["turing_unstable"].get<bool>());
  CHECK(j["unstable_scales"].size() == 2);
  std::string text = turing_report_text(rep);
  CHECK(text.find("Turing unstable") != std::string::npos);

  std::string csv = dispersion_csv(rep);
  CHECK(csv.rfind("kappa,re_lambda1,re_lambda2\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 201);
}

TEST_CASE("spectrum report JSON") {
  SpectrumReport rep = verify_spectrum(VladimirovOperator(GridGeometry(2, 0, 2), 1.0));
  json j = spectrum_report_json(rep);
  CHECK(j["matched"].get<bool>());
  CHECK(j["eigenvalues"].size() == 3);
}

TEST_CASE("snapshot CSV layout") {
  GridGeometry g(2, 0, 2);
  Trajectory traj;
  traj.snapshots.push_back(
      {0, 0.0, Eigen::VectorXd::Ones(g.N), Eigen::VectorXd::Zero(g.N)});
  traj.snapshots.push_back(
      {5, 0.5, 2.0 * Eigen::VectorXd::Ones(g.N), Eigen::VectorXd::Zero(g.N)});
  std::string csv = snapshots_csv(traj, g);
  CHECK(csv.rfind("step,t,index,digits,u,v\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * g.N);
  CHECK(csv.find("5,0.5,0,00,2,0") != std::string::npos);
}
