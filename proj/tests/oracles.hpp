#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "strongstab/lmi.hpp"
#include "strongstab/sysmodel.hpp"

namespace strongstab::testing {

/// Orthonormal basis of the null space of M.
inline Matrix null_basis(const Matrix& M) {
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
  const Vector s = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) rank += s(i) > 1e-12 * std::max(1.0, s(0));
  return svd.matrixV().rightCols(M.cols() - rank);
}

/// Solvability LMIs of the γ-suboptimal H∞ problem in (R, S), posed without
/// any Riccati machinery:
///   N_Rᵀ [AR + RAᵀ, RC1ᵀ, B1; C1R, -γI, D11; B1ᵀ, D11ᵀ, -γI] N_R ≺ 0,
///   N_Sᵀ [AᵀS + SA, SB1, C1ᵀ; B1ᵀS, -γI, D11ᵀ; C1, D11, -γI] N_S ≺ 0,
///   [R, I; I, S] ≻ 0,
/// with N_R = diag(null [B2ᵀ D12ᵀ], I) and N_S = diag(null [C2 D21], I).
inline LmiProblem hinf_solvability_lmis(const GeneralizedPlant& P, double gamma) {
  const Index n = P.states(), m1 = P.m1(), p1 = P.p1();
  const Matrix A = P.A(), B1 = P.B1(), C1 = P.C1(), D11 = P.D11();
  LmiProblem problem;
  problem.add_variable({"R", n, n, VariableKind::Symmetric, true});
  problem.add_variable({"S", n, n, VariableKind::Symmetric, true});

  {
    const Index d = n + p1 + m1;
    Matrix outer_null(n + p1, P.m2());
    outer_null << P.B2(), P.D12();
    const Matrix NR0 = null_basis(outer_null.transpose());
    Matrix W = Matrix::Zero(d, NR0.cols() + m1);
    W.topLeftCorner(n + p1, NR0.cols()) = NR0;
    W.bottomRightCorner(m1, m1).setIdentity();
    Matrix F0 = Matrix::Zero(d, d);
    F0.block(0, n + p1, n, m1) = B1;
    F0.block(n, n, p1, p1) = -gamma * Matrix::Identity(p1, p1);
    F0.block(n, n + p1, p1, m1) = D11;
    F0.block(n + p1, n + p1, m1, m1) = -gamma * Matrix::Identity(m1, m1);
    F0 = F0.triangularView<Eigen::Upper>().toDenseMatrix() +
         F0.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().transpose();
    Matrix left = Matrix::Zero(d, n);
    left.topRows(n) = A;
    left.middleRows(n, p1) = C1;
    Matrix E1 = Matrix::Zero(n, d);
    E1.leftCols(n).setIdentity();
    problem.add_constraint({"primal", W.transpose() * F0 * W, {{"R", W.transpose() * left, E1 * W}}, {}});
  }
  {
    const Index d = n + m1 + p1;
    Matrix outer(P.p2(), n + m1);
    outer << P.C2(), P.D21();
    const Matrix NS0 = null_basis(outer);
    Matrix W = Matrix::Zero(d, NS0.cols() + p1);
    W.topLeftCorner(n + m1, NS0.cols()) = NS0;
    W.bottomRightCorner(p1, p1).setIdentity();
    Matrix F0 = Matrix::Zero(d, d);
    F0.block(0, n + m1, n, p1) = C1.transpose();
    F0.block(n, n, m1, m1) = -gamma * Matrix::Identity(m1, m1);
    F0.block(n, n + m1, m1, p1) = D11.transpose();
    F0.block(n + m1, n + m1, p1, p1) = -gamma * Matrix::Identity(p1, p1);
    F0 = F0.triangularView<Eigen::Upper>().toDenseMatrix() +
         F0.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().transpose();
    Matrix E1 = Matrix::Zero(d, n);
    E1.topRows(n).setIdentity();
    Matrix right = Matrix::Zero(n, d);
    right.leftCols(n) = A;
    right.middleCols(n, m1) = B1;
    problem.add_constraint({"dual", W.transpose() * F0 * W, {{"S", W.transpose() * E1, right * W}}, {}});
  }
  {
    Matrix F0 = Matrix::Zero(2 * n, 2 * n);
    F0.topRightCorner(n, n) = -Matrix::Identity(n, n);
    F0.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
    Matrix top = Matrix::Zero(2 * n, n), bottom = Matrix::Zero(2 * n, n);
    top.topRows(n).setIdentity();
    bottom.bottomRows(n).setIdentity();
    problem.add_constraint({"coupling", F0,
                            {{"R", -0.5 * top, top.transpose()}, {"S", -0.5 * bottom, bottom.transpose()}}, {}});
  }
  return problem;
}

/// γ_opt from bisection on the LMI solvability test.
inline double lmi_optimal_gamma(const GeneralizedPlant& P, double lo, double hi, double rel_tol) {
  while (hi - lo > rel_tol * hi) {
    const double mid = std::sqrt(lo * hi);
    if (solve_feasibility(hinf_solvability_lmis(P, mid)).feasible()) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace strongstab::testing
