#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "strongstab/numerics.hpp"
#include "strongstab/sysmodel.hpp"

namespace strongstab::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index k = 0; k < cols; ++k) m(i, k) = normal(rng);
  }
  return m;
}

/// Random A with its spectrum moved to Re λ ≤ -margin. The shift uses
/// Eigen's general eigensolver directly, not the library under test.
inline Matrix random_hurwitz(std::mt19937_64& rng, Index n, double margin = 0.2) {
  Matrix A = random_matrix(rng, n, n);
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Matrix>(A, false).eigenvalues();
  const double abscissa = ev.real().maxCoeff();
  A -= (abscissa + margin) * Matrix::Identity(n, n);
  return A;
}

inline StateSpace random_stable_system(std::mt19937_64& rng, Index n, Index m, Index p,
                                       bool with_feedthrough = true) {
  return StateSpace(random_hurwitz(rng, n), random_matrix(rng, n, m), random_matrix(rng, p, n),
                    with_feedthrough ? random_matrix(rng, p, m, 0.3) : Matrix::Zero(p, m));
}

/// Eigenvalues via Eigen's unsymmetric solver, used as an oracle.
/// Diagonal similarity with power-of-two entries equalizing row and column
/// norms (Parlett and Reinsch), as LAPACK applies before an eigensolve.
inline Matrix reference_balance(Matrix M) {
  const Index n = M.rows();
  for (bool converged = false; !converged;) {
    converged = true;
    for (Index i = 0; i < n; ++i) {
      const double c = M.col(i).cwiseAbs().sum() - std::abs(M(i, i));
      const double r = M.row(i).cwiseAbs().sum() - std::abs(M(i, i));
      if (c == 0.0 || r == 0.0) continue;
      // c·f + r/f is smallest at f = sqrt(r / c); round to a power of two.
      const double f = std::exp2(std::round(0.5 * std::log2(r / c)));
      if (c * f + r / f < 0.95 * (c + r)) {
        converged = false;
        M.col(i) *= f;
        M.row(i) /= f;
      }
    }
  }
  return M;
}

inline Eigen::VectorXcd reference_eigenvalues(const Matrix& M) {
  if (M.rows() == 0) return Eigen::VectorXcd(0);
  return Eigen::EigenSolver<Matrix>(reference_balance(M), false).eigenvalues();
}

inline double reference_abscissa(const Matrix& M) {
  if (M.rows() == 0) return -std::numeric_limits<double>::infinity();
  return reference_eigenvalues(M).real().maxCoeff();
}

/// Largest eigenvalue of a symmetric matrix (its symmetric part, to be safe).
inline double max_symmetric_eigenvalue(const Matrix& M) {
  const Matrix S = (M + M.transpose()) / 2.0;
  return Eigen::SelfAdjointEigenSolver<Matrix>(S, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

/// Multiset distance: every λ in `a` is matched to the nearest unused μ in
/// `b`, relative to 1 + |λ|. Sizes must agree.
inline double matched_spectrum_error(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    Index best = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < b.size(); ++k) {
      if (used[k]) continue;
      const double d = std::abs(a(i) - b(k));
      if (d < dist) {
        dist = d;
        best = k;
      }
    }
    used[best] = true;
    worst = std::max(worst, dist / (1.0 + std::abs(a(i))));
  }
  return worst;
}

/// Peak σ_max on a log grid, evaluated with a dense complex solve.
inline double grid_peak(const StateSpace& S, double lo, double hi, int points) {
  double peak = 0.0;
  for (int k = 0; k < points; ++k) {
    const double w = lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1));
    Eigen::MatrixXcd pencil = Eigen::MatrixXcd::Identity(S.states(), S.states()) * std::complex<double>(0, w) -
                              S.A.cast<std::complex<double>>();
    const Eigen::MatrixXcd G =
        S.C.cast<std::complex<double>>() * pencil.fullPivLu().solve(S.B.cast<std::complex<double>>()) +
        S.D.cast<std::complex<double>>();
    peak = std::max(peak, Eigen::JacobiSVD<Eigen::MatrixXcd>(G).singularValues()(0));
  }
  return peak;
}

/// Random stable system rescaled through C and D to H∞ norm `target`.
inline StateSpace scaled_random_q(std::mt19937_64& rng, Index n, Index m, Index p, double target) {
  StateSpace Q = random_stable_system(rng, n, m, p);
  const double norm = hinf_norm(Q, 1e-9);
  Q.C *= target / norm;
  Q.D *= target / norm;
  return Q;
}

}  // namespace strongstab::testing
