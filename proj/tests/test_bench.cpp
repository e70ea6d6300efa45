#include <doctest.h>

#include <sstream>

#include "strongstab/bench.hpp"
#include "strongstab/polynomial.hpp"
#include "support.hpp"

using namespace strongstab;
using namespace strongstab::testing;

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::size_t fields(const std::string& line) { return std::count(line.begin(), line.end(), ',') + 1; }

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("benchmark plant reproduces its transfer functions after the axis shift") {
  const double beta = 0.01, eps = 1e-4;
  const GeneralizedPlant P = bench::benchmark10_plant(beta, eps);
  REQUIRE(P.states() == 8);
  const Polynomial den{1, 0.161, 6, 0.582, 9.984, 0.407, 3.9822, 0, 0};
  const Polynomial n_z{0.03, 0.008, 0.19, 0.037, 0.36, 0.05, 0.18, 0.015};
  const Polynomial n_y{0.0064, 0.0024, 0.071, 1, 0.1045, 1};
  for (Complex s : {Complex(0.1, 0.9), Complex(0.0, 2.0), Complex(-0.3, 0.4)}) {
    const Complex shifted = s + eps;
    const ComplexMatrix G = P.ss().evaluate(s);
    const Complex gy = evaluate(n_y, shifted) / evaluate(den, shifted);
    const Complex gz = evaluate(n_z, shifted) / evaluate(den, shifted);
    // Inputs (w1, w2, u), outputs (z1, z2, y).
    CHECK(std::abs(G(2, 2) - gy) < 1e-8 * std::max(1.0, std::abs(gy)));
    CHECK(std::abs(G(2, 0) - gy) < 1e-8 * std::max(1.0, std::abs(gy)));
    CHECK(std::abs(G(2, 1) - 1.0) < 1e-14);
    CHECK(std::abs(G(0, 2) - gz) < 1e-8 * std::max(1.0, std::abs(gz)));
    CHECK(std::abs(G(1, 2) - beta) < 1e-14);
  }
}

TEST_CASE("mixed sensitivity plant has the expected channels") {
  const GeneralizedPlant P = bench::siso_mixed_sensitivity_plant();
  CHECK(P.states() == 5);
  const Polynomial pn = from_roots({-5.0, 1.0, 5.0});
  const Polynomial pd = from_roots({{-2.0, 1.0}, {-2.0, -1.0}, 20.0, 30.0});
  const Complex s(0.2, 3.0);
  const Complex p = evaluate(pn, s) / evaluate(pd, s), w1 = 1.0 / (s + 1.0);
  const ComplexMatrix G = P.ss().evaluate(s);
  CHECK(std::abs(G(0, 0) - w1) < 1e-10);
  CHECK(std::abs(G(0, 1) + w1 * p) < 1e-10);
  CHECK(std::abs(G(1, 1) - 0.2) < 1e-14);
  CHECK(std::abs(G(2, 0) - 1.0) < 1e-14);
  CHECK(std::abs(G(2, 1) + p) < 1e-10);
  // w never reaches the unstable poles of P (20 and 30), so the A.3 pencil
  // loses row rank there; the Riccati synthesis only needs it on the axis.
  const auto violations = validate_assumptions(P);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].which == Assumption::A3);
}

TEST_CASE("Lee-Soh case report") {
  const bench::SynthesisReport r = bench::case_lee_soh();
  CHECK(r.plant_order == 2);
  CHECK(r.controller_order == 4);
  CHECK(r.gamma_opt == doctest::Approx(1.29022).epsilon(1e-4));
  CHECK(r.gamma_min == doctest::Approx(1.36957).epsilon(1e-3));
  CHECK(r.certificates_hold());
  REQUIRE(r.expectations.size() == 3);
  CHECK(r.expectations[1].pass());
  CHECK(r.expectations[2].pass());
  CHECK(r.runtime_seconds < 5.0);
  const auto row = bench::report_csv_row(r);
  CHECK(fields(row) == fields(bench::report_csv_header()));
}

TEST_CASE("sweep rows respect PIP and dominance") {
  const auto rows = bench::case_g1_g2_sweep(bench::SweepPlant::G1, {3.0, 10.0, 30.0});
  REQUIRE(rows.size() == 3);
  CHECK_FALSE(rows[0].pip);
  CHECK(std::isinf(rows[0].gamma_lmi));
  CHECK(rows[0].status != "ok");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].pip);
    CHECK(rows[i].status == "ok");
    CHECK(std::isfinite(rows[i].gamma_lmi));
    CHECK(rows[i].dominance_holds());
  }
  const auto lines = split_lines(bench::sweep_csv(rows));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "alpha,pip,gamma_k_lmi,gamma_k_structured,dominance,status");
  for (const auto& line : lines) CHECK(fields(line) == 6);
}

TEST_CASE("dominance flags a violation") {
  bench::SweepRow row;
  row.gamma_lmi = 2.0;
  row.gamma_structured = 1.0;
  CHECK_FALSE(row.dominance_holds());
  row.gamma_structured = std::numeric_limits<double>::infinity();
  CHECK(row.dominance_holds());
}

TEST_CASE("default grids") {
  const auto g1 = bench::default_alpha_grid(bench::SweepPlant::G1);
  const auto g2 = bench::default_alpha_grid(bench::SweepPlant::G2);
  CHECK(g1.size() == 60);
  CHECK(g2.size() == 60);
  CHECK(g1.front() > 5.0);
  CHECK(bench::linspace(0.0, 1.0, 3) == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("cc pipeline needs weights") {
  try {
    bench::case_cc_pipeline({});
    FAIL("expected MissingWeights");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingWeights);
  }
}

TEST_CASE("expectation senses") {
  bench::Expectation within{"x", 1.0, 0.1, 1.05};
  CHECK(within.pass());
  within.actual = 0.85;
  CHECK_FALSE(within.pass());
  bench::Expectation at_most{"y", 2.0, 0.5, 1.0, bench::Expectation::Sense::AtMost};
  CHECK(at_most.pass());
  at_most.actual = 2.6;
  CHECK_FALSE(at_most.pass());
}

}  // TEST_SUITE
