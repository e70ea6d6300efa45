#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "strongstab/bench.hpp"
#include "strongstab/cli.hpp"
#include "support.hpp"

using namespace strongstab;
using namespace strongstab::cli;
namespace fs = std::filesystem;

namespace {

/// Fresh directory under the system temp dir, removed on scope exit.
struct TempDir {
  fs::path path;

  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("strongstab_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return (path / name).string();
  }
};

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

RunConfig config_in(const TempDir& dir) {
  RunConfig c;
  c.out_dir = dir.path.string();
  return c;
}

const char* kScalar = R"({"name": "scalar", "A": [[1]], "B": [[1]], "C": [[1]]})";

std::string lee_soh_text() {
  PlantFile file{"lee_soh", bench::lee_soh_plant(), false};
  return plant_to_json(file).dump(2);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("plant files round-trip bit for bit") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> wide(-1e3, 1e3);
  Matrix A = testing::random_matrix(rng, 3, 3);
  A(0, 0) = 0.1;
  A(0, 1) = 1.0 / 3.0;
  A(1, 0) = 1e-300;
  A(1, 1) = 4.9e-324;  // denormal
  A(2, 2) = wide(rng) * 1e-17;
  const GeneralizedPlant P = GeneralizedPlant::from_blocks(
      A, testing::random_matrix(rng, 3, 2), testing::random_matrix(rng, 3, 1),
      testing::random_matrix(rng, 2, 3), testing::random_matrix(rng, 1, 3), Matrix::Zero(2, 2),
      testing::random_matrix(rng, 2, 1), testing::random_matrix(rng, 1, 2));
  const PlantFile first{"roundtrip", P, false};
  const std::string text = plant_to_json(first).dump();
  const PlantFile second = parse_plant(text);
  const PlantFile third = parse_plant(plant_to_json(second).dump(2));
  for (const PlantFile* f : {&second, &third}) {
    CHECK(f->name == "roundtrip");
    CHECK(f->plant.ss().A == P.ss().A);
    CHECK(f->plant.ss().B == P.ss().B);
    CHECK(f->plant.ss().C == P.ss().C);
    CHECK(f->plant.ss().D == P.ss().D);
    CHECK(f->plant.m1() == 2);
    CHECK(f->plant.p2() == 1);
  }
  CHECK(plant_to_json(third).dump() == text);
}

TEST_CASE("plain and transfer-function plant files") {
  const PlantFile plain = parse_plant(kScalar);
  CHECK(plain.plain);
  CHECK(plain.plant.m1() == 0);
  CHECK(plain.plant.m2() == 1);
  CHECK(parse_plant(plant_to_json(plain).dump()).plain);

  const PlantFile tf = parse_plant(R"({
    "name": "g1",
    "tf": [[{"num": [1, -1, -25, 25], "den": [1, -26, 85, 650, 1000]}],
           [{"num": [1, -5, -1, 5], "den": [1, -26, 85, 650, 1000]}]],
    "partition": {"m1": 0, "m2": 1, "p1": 0, "p2": 2}})");
  CHECK(tf.plant.states() == 4);
  const StateSpace ref = tf_to_ss(bench::g1(10.0));
  const Complex s(0.3, 1.1);
  CHECK((tf.plant.ss().evaluate(s) - ref.evaluate(s)).norm() < 1e-9);
}

TEST_CASE("malformed JSON reports the line") {
  try {
    parse_plant("{\"A\": [[1]],\n \"B\": [[1]]\n \"C\": [[1]]}", "bad.json");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("bad.json:3:") != std::string::npos);
  }
}

TEST_CASE("dimension mismatches are rejected on load") {
  auto code_of = [](const std::string& text) {
    try {
      parse_plant(text);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(code_of(R"({"A": [[1, 0]], "B": [[1]], "C": [[1]]})").find("not square") != std::string::npos);
  CHECK(code_of(R"({"A": [[1]], "B": [[1], [2]], "C": [[1]]})").find("B has shape") != std::string::npos);
  CHECK(code_of(R"({"A": [[1]], "B": [[1]], "C": [[1]], "D": [[2]]})").find("D must be zero") !=
        std::string::npos);
  CHECK(code_of(R"({"A": [[1]], "B": [[1]], "C": [[1]], "states": 2})").find("states") !=
        std::string::npos);
  CHECK(code_of(R"({"A": [[1, 2], [3]], "B": [[1]], "C": [[1]]})").find("ragged") != std::string::npos);
  CHECK(code_of(R"({"A": [[1]], "B1": [[1]], "B2": [[1, 2]], "C1": [[1]], "C2": [[1]],
                    "D11": [[0]], "D12": [[1]], "D21": [[1]]})")
            .find("has shape") != std::string::npos);
  CHECK_FALSE(code_of(R"({"A": [[1]]})").empty());
}

TEST_CASE("config merging, environment overrides and validation") {
  RunConfig c;
  apply_json(c, json::parse(R"({"bisect_tol": 1e-4, "seed": 99, "sweep_points": 7})"));
  CHECK(c.bisect_tol == 1e-4);
  CHECK(c.seed == 99);
  CHECK(c.sweep_points == 7);
  CHECK_THROWS_AS(apply_json(c, json::parse(R"({"nonsense": 1})")), Error);

  ::setenv("STRONGSTAB_SCHUR_TOL", "1e-7", 1);
  ::setenv("STRONGSTAB_SEED", "12345", 1);
  apply_environment(c);
  ::unsetenv("STRONGSTAB_SCHUR_TOL");
  ::unsetenv("STRONGSTAB_SEED");
  CHECK(c.schur_tol == 1e-7);
  CHECK(c.seed == 12345);
  CHECK(c.hinf_options().riccati.imaginary_axis_tol == 1e-7);
  CHECK(c.hinf_options().gamma_rel_tol == 1e-4);

  RunConfig bad;
  bad.bisect_tol = 0.0;
  CHECK_THROWS_AS(validate(bad), Error);
  bad = RunConfig{};
  bad.gamma_lo = 10.0;
  bad.gamma_hi = 1.0;
  CHECK_THROWS_AS(validate(bad), Error);

  apply_json(c, json::parse(
                    R"({"weights": {"W1": {"num": [1], "den": [1, 1]}, "W2": {"num": [0.2], "den": [1]}}})"));
  REQUIRE(c.weights.W1.has_value());
  CHECK(c.weights.W1->states() == 1);
  CHECK(c.weights.W2->states() == 0);
  CHECK(c.snapshot().at("weights").contains("W2"));
}

TEST_CASE("exit codes and grids") {
  CHECK(exit_code_for(ErrorCode::Infeasible) == 2);
  CHECK(exit_code_for(ErrorCode::GammaInfeasible) == 2);
  CHECK(exit_code_for(ErrorCode::InnerLmiInfeasible) == 2);
  CHECK(exit_code_for(ErrorCode::ParseError) == 1);
  CHECK(parse_grid("0.5:10:60").size() == 60);
  CHECK_THROWS_AS(parse_grid("1:2"), Error);
  CHECK_THROWS_AS(parse_grid("2:1:5"), Error);
  CHECK(format6(1.369573) == "1.36957");
  CHECK(format6(34.2401) == "34.2401");
}

TEST_CASE("strongstab command: minimized bound equals the library value") {
  TempDir dir;
  const std::string path = dir.write("scalar.json", kScalar);
  std::ostringstream out, err;
  StrongStabArgs args;
  args.plant_path = path;
  args.minimize = true;
  args.dump_lmi = true;
  REQUIRE(cmd_strongstab(args, config_in(dir), out, err) == kSuccess);
  const json report = read_json(dir.path / "scalar_strongstab.json");
  const double library =
      strong_stabilize(PlantTriple::from(parse_plant(kScalar).plant), std::nullopt, true).gamma_K;
  CHECK(report.at("result").at("gamma_K").get<double>() == library);
  CHECK(report.at("result").at("gamma_K").get<double>() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(report.at("version") == STRONGSTAB_VERSION);
  CHECK(report.contains("seed"));
  CHECK(report.at("config").at("bisect_tol") == 1e-5);
  CHECK(report.at("recomputed").at("controller_norm_below_gamma_K") == true);
  CHECK(fs::exists(dir.path / "scalar_lmi.txt"));
  CHECK(out.str().find("gamma_K = 1") != std::string::npos);
}

TEST_CASE("strongstab command: stable plant gives an all-zero controller output") {
  TempDir dir;
  const std::string path =
      dir.write("stable.json", R"({"name": "stable", "A": [[-1, 0], [0, -2]], "B": [[1], [1]], "C": [[1, 1]]})");
  std::ostringstream out, err;
  StrongStabArgs args;
  args.plant_path = path;
  REQUIRE(cmd_strongstab(args, config_in(dir), out, err) == kSuccess);
  const json report = read_json(dir.path / "stable_strongstab.json");
  for (const auto& row : report.at("result").at("controller").at("C")) {
    for (const auto& v : row) CHECK(v.get<double>() == 0.0);
  }
}

TEST_CASE("strongstab command: infeasible bound and malformed file") {
  TempDir dir;
  const std::string path = dir.write("scalar.json", kScalar);
  std::ostringstream out, err;
  StrongStabArgs args;
  args.plant_path = path;
  args.gamma_K = 0.5;
  CHECK(cmd_strongstab(args, config_in(dir), out, err) == kInfeasible);
  const json report = read_json(dir.path / "scalar_strongstab.json");
  CHECK(report.at("status") == "infeasible");
  CHECK(report.at("error").at("code") == "Infeasible");

  args.plant_path = dir.write("bad.json", "{\"A\": [[1]],\n\"B\": }");
  args.gamma_K.reset();
  std::ostringstream err2;
  CHECK(cmd_strongstab(args, config_in(dir), out, err2) == kError);
  CHECK(err2.str().find("bad.json:2:") != std::string::npos);

  args.plant_path = (dir.path / "missing.json").string();
  CHECK(cmd_strongstab(args, config_in(dir), out, err2) == kError);
}

TEST_CASE("stable-hinf command on the Lee-Soh plant") {
  TempDir dir;
  const std::string path = dir.write("lee_soh.json", lee_soh_text());
  std::ostringstream out, err;
  StableHinfArgs args;
  args.plant_path = path;
  args.min_gamma = true;
  REQUIRE(cmd_stable_hinf(args, config_in(dir), out, err) == kSuccess);
  const json report = read_json(dir.path / "lee_soh_stable_hinf.json");
  CHECK(report.at("gamma").get<double>() == doctest::Approx(1.3696).epsilon(1e-3));
  const json& cert = report.at("certificates");
  CHECK(cert.at("controller_abscissa").get<double>() < 0.0);
  CHECK(cert.at("closed_loop_abscissa").get<double>() < 0.0);
  CHECK(cert.at("closed_loop_norm").get<double>() < report.at("gamma").get<double>());
  const json& re = report.at("recomputed");
  CHECK(re.at("controller_abscissa").get<double>() < 0.0);
  CHECK(re.at("closed_loop_abscissa").get<double>() < 0.0);
  CHECK(re.at("closed_loop_norm_below_bound") == true);
  CHECK(re.at("closed_loop_random_peak").get<double>() <= re.at("closed_loop_hinf_norm").get<double>() * (1 + 1e-6));
  CHECK(report.at("controller_order") == 4);
  CHECK(out.str().find("gamma = 1.3695") != std::string::npos);

  args.min_gamma = false;
  args.gamma = 1.2;
  std::ostringstream err2;
  CHECK(cmd_stable_hinf(args, config_in(dir), out, err2) == kInfeasible);
  CHECK(err2.str().find("GammaInfeasible") != std::string::npos);
  CHECK(read_json(dir.path / "lee_soh_stable_hinf.json").at("error").at("code") == "GammaInfeasible");

  args.gamma.reset();
  CHECK(cmd_stable_hinf(args, config_in(dir), out, err2) == kError);  // neither flag
}

TEST_CASE("bench command writes the sweep CSV") {
  TempDir dir;
  std::ostringstream out, err;
  BenchArgs args;
  args.case_name = "g1-sweep";
  args.alpha = "8:12:3";
  REQUIRE(cmd_bench(args, config_in(dir), out, err) == kSuccess);
  std::ifstream csv(dir.path / "bench_g1-sweep.csv");
  std::vector<std::string> lines;
  for (std::string line; std::getline(csv, line);) lines.push_back(line);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0].find("dominance") != std::string::npos);
  const json summary = read_json(dir.path / "bench_g1-sweep_summary.json");
  CHECK(summary.at("cases").at(0).at("dominance_violations") == 0);

  args.case_name = "nonsense";
  CHECK(cmd_bench(args, config_in(dir), out, err) == kError);
}

TEST_CASE("bench command on the Lee-Soh case reports its expectations") {
  TempDir dir;
  std::ostringstream out, err;
  BenchArgs args;
  args.case_name = "lee-soh";
  const int code = cmd_bench(args, config_in(dir), out, err);
  const json summary = read_json(dir.path / "bench_lee-soh_summary.json");
  const json& c = summary.at("cases").at(0);
  CHECK(c.at("gamma_min").get<double>() == doctest::Approx(1.36957).epsilon(1e-3));
  bool all_pass = true;
  for (const auto& e : c.at("expectations")) all_pass = all_pass && e.at("pass").get<bool>();
  CHECK(code == (all_pass ? kSuccess : kError));
  CHECK(fs::exists(dir.path / "bench_lee-soh.csv"));
}

TEST_CASE("analyze command") {
  TempDir dir;
  std::ostringstream out, err;
  AnalyzeArgs args;
  args.plant_path = dir.write("g1a3.json", R"({
    "name": "g1a3",
    "tf": [[{"num": [1, -1, -25, 25], "den": [1, -19, -27, 125, 300]}],
           [{"num": [1, -5, -1, 5], "den": [1, -19, -27, 125, 300]}]],
    "partition": {"m1": 0, "m2": 1, "p1": 0, "p2": 2}})");
  REQUIRE(cmd_analyze(args, config_in(dir), out, err) == kSuccess);
  const json report = read_json(dir.path / "g1a3_analyze.json");
  CHECK(report.at("pip").at("satisfied") == false);
  std::vector<double> zeros;
  for (const auto& z : report.at("zeros")) zeros.push_back(z.at(0).get<double>());
  std::sort(zeros.begin(), zeros.end());
  REQUIRE(zeros.size() == 2);
  CHECK(zeros[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(zeros[1] == doctest::Approx(5.0).epsilon(1e-6));

  args.plant_path = dir.write("lee_soh.json", lee_soh_text());
  args.assumptions = true;
  REQUIRE(cmd_analyze(args, config_in(dir), out, err) == kSuccess);
  CHECK(read_json(dir.path / "lee_soh_analyze.json").at("assumption_violations").empty());

  args.plant_path = dir.write("stable.json", R"({"A": [[-1]], "B": [[2]], "C": [[1]]})");
  args.assumptions = false;
  args.norm = true;
  REQUIRE(cmd_analyze(args, config_in(dir), out, err) == kSuccess);
  CHECK(read_json(dir.path / "stable_analyze.json").at("hinf_norm").get<double>() ==
        doctest::Approx(2.0).epsilon(1e-6));
}

}  // TEST_SUITE
