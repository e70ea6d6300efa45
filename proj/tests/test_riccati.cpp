#include <doctest.h>

#include <random>

#include "strongstab/bench.hpp"
#include "strongstab/riccati.hpp"
#include "support.hpp"

using namespace strongstab;
using namespace strongstab::testing;

TEST_SUITE("riccati") {

TEST_CASE("stabilizing CARE solutions have small residuals") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 1 + trial % 8, m = 1 + trial % 3;
    const Matrix A = random_matrix(rng, n, n);
    const Matrix B = random_matrix(rng, n, m);
    const Matrix Cq = random_matrix(rng, n, n);
    const Matrix R = B * B.transpose();
    const Matrix Q = Cq.transpose() * Cq;
    const RiccatiSolution s = solve_care(A, R, Q);
    const Matrix res = A.transpose() * s.X + s.X * A - s.X * R * s.X + Q;
    CHECK(res.norm() < 1e-9 * std::max(1.0, s.X.norm()));
    CHECK(s.residual < 1e-9 * std::max(1.0, s.X.norm()));
    CHECK((s.X - s.X.transpose()).norm() < 1e-12 * std::max(1.0, s.X.norm()));
    CHECK(reference_abscissa(A - R * s.X) < 0.0);
  }
}

TEST_CASE("scalar CARE has the closed-form root") {
  // 2aX - bX² + q = 0 with stabilizing root (a + sqrt(a² + bq)) / b.
  const double a = 0.7, b = 2.0, q = 3.0;
  const RiccatiSolution s = solve_care(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b),
                                       Matrix::Constant(1, 1, q));
  CHECK(s.X(0, 0) == doctest::Approx((a + std::sqrt(a * a + b * q)) / b).epsilon(1e-13));
}

TEST_CASE("zero-weight Riccati returns X = 0 for Hurwitz A") {
  std::mt19937_64 rng(32);
  const Matrix A = random_hurwitz(rng, 4);
  const RiccatiSolution s = solve_stabilizing_riccati(A, random_matrix(rng, 4, 2));
  CHECK(s.X.norm() == 0.0);
}

TEST_CASE("zero-weight Riccati mirrors unstable poles") {
  // A = 1, B = 1: 2X - X² = 0, stabilizing root X = 2, A - BBᵀX = -1.
  const RiccatiSolution s =
      solve_stabilizing_riccati(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0));
  CHECK(s.X(0, 0) == doctest::Approx(2.0).epsilon(1e-13));
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 2 + trial % 5;
    const Matrix A = random_matrix(rng, n, n);
    const Matrix B = random_matrix(rng, n, 1 + trial % 2);
    const RiccatiSolution r = solve_stabilizing_riccati(A, B);
    const Matrix AX = A - B * B.transpose() * r.X;
    CHECK(r.residual < 1e-9 * std::max(1.0, r.X.norm()));
    // Unstable eigenvalues are reflected: spectrum of A_X = stable part of
    // eig(A) together with the mirror images of the unstable part.
    Eigen::VectorXcd mirrored = reference_eigenvalues(A);
    for (Index i = 0; i < mirrored.size(); ++i) {
      if (mirrored(i).real() > 0.0) mirrored(i) = -std::conj(mirrored(i));
    }
    CHECK(matched_spectrum_error(reference_eigenvalues(AX), mirrored) < 1e-7);
  }
}

TEST_CASE("imaginary-axis Hamiltonian eigenvalues are reported") {
  Matrix A(2, 2);
  A << 0, 1, -1, 0;
  CHECK_THROWS_AS(solve_care(A, Matrix::Zero(2, 2), Matrix::Zero(2, 2)), Error);
}

TEST_CASE("plant normalization gives unit D12 and D21") {
  const GeneralizedPlant P = bench::benchmark10_plant(0.01);
  const NormalizedPlant N = normalize_plant(P);
  const Matrix D12 = N.plant.D12(), D21 = N.plant.D21();
  CHECK((D12.transpose() * D12 - Matrix::Identity(1, 1)).norm() < 1e-14);
  CHECK((D21 * D21.transpose() - Matrix::Identity(1, 1)).norm() < 1e-14);
}

TEST_CASE("H-infinity Riccati pair on the Lee-Soh plant") {
  const NormalizedPlant N = normalize_plant(bench::lee_soh_plant());
  const HinfRiccatiPair ok = solve_hinf_riccati_pair(N.plant, 1.35);
  REQUIRE(ok.solvable);
  CHECK(ok.spectral_radius < 1.35 * 1.35);
  CHECK(ok.x_residual < 1e-9 * std::max(1.0, ok.X.norm()));
  CHECK(ok.y_residual < 1e-9 * std::max(1.0, ok.Y.norm()));
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(ok.X).eigenvalues().minCoeff() > -1e-10);
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(ok.Y).eigenvalues().minCoeff() > -1e-10);
  const HinfRiccatiPair bad = solve_hinf_riccati_pair(N.plant, 1.2);
  CHECK_FALSE(bad.solvable);
  CHECK_FALSE(bad.reason.empty());
}

}  // TEST_SUITE
