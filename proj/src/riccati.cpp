#include "strongstab/riccati.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace strongstab {

namespace {

Matrix care_residual(const Matrix& A, const Matrix& R, const Matrix& Q, const Matrix& X) {
  return A.transpose() * X + X * A - X * R * X + Q;
}

Matrix inverse_sqrt_spd(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  return es.operatorInverseSqrt();
}

}  // namespace

RiccatiSolution solve_care(const Matrix& A, const Matrix& R, const Matrix& Q,
                           const RiccatiOptions& options) {
  require_square(A, "Riccati A");
  const Index n = A.rows();
  if (R.rows() != n || R.cols() != n || Q.rows() != n || Q.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "Riccati R and Q must match A");
  }
  RiccatiSolution sol;
  if (n == 0) {
    sol.X = Matrix(0, 0);
    sol.closed_loop_spectral_abscissa = -std::numeric_limits<double>::infinity();
    return sol;
  }

  Matrix H(2 * n, 2 * n);
  H << A, -R,
       -Q, -A.transpose();
  const SchurDecomposition schur = real_schur(H, SchurOrdering::StableFirst);
  const double axis_tol = options.imaginary_axis_tol * std::max(1.0, H.norm());
  for (const Complex& ev : schur.eigenvalues) {
    if (std::abs(ev.real()) <= axis_tol) {
      throw Error(ErrorCode::ImaginaryAxisEigenvalue,
                  "Hamiltonian has an eigenvalue on the imaginary axis");
    }
  }
  if (schur.stable_dim != n) {
    throw Error(ErrorCode::ImaginaryAxisEigenvalue,
                "Hamiltonian stable subspace has dimension " + std::to_string(schur.stable_dim) +
                    ", expected " + std::to_string(n));
  }

  const Matrix U1 = schur.Q.topLeftCorner(n, n);
  const Matrix U2 = schur.Q.bottomLeftCorner(n, n);
  sol.basis_condition = condition_number(U1);
  if (!(sol.basis_condition < options.singular_threshold)) {
    throw Error(ErrorCode::NotStabilizable,
                "stable invariant subspace is not a graph (U1 singular); no stabilizing solution");
  }
  if (sol.basis_condition > options.condition_threshold) {
    throw Error(ErrorCode::IllConditionedBasis,
                "stable-subspace basis condition number " + std::to_string(sol.basis_condition) +
                    " exceeds " + std::to_string(options.condition_threshold));
  }
  // X U1 = U2.
  Matrix X = U1.transpose().partialPivLu().solve(U2.transpose()).transpose();
  X = symmetric_part(X);
  double residual = frobenius_norm(care_residual(A, R, Q, X));

  if (options.newton_refinement) {
    const Matrix Acl = A - R * X;
    try {
      const Matrix dX = solve_sylvester(Acl.transpose(), Acl, -care_residual(A, R, Q, X));
      const Matrix Xn = symmetric_part(X + dX);
      const double rn = frobenius_norm(care_residual(A, R, Q, Xn));
      if (rn < residual) {
        X = Xn;
        residual = rn;
      }
    } catch (const Error&) {
      // Keep the Schur solution if the Newton correction is singular.
    }
  }

  sol.X = X;
  sol.residual = residual;
  sol.closed_loop_spectral_abscissa = spectral_abscissa(A - R * X);
  if (!(sol.closed_loop_spectral_abscissa < 0.0)) {
    throw Error(ErrorCode::RiccatiFailure, "computed Riccati solution is not stabilizing");
  }
  return sol;
}

RiccatiSolution solve_stabilizing_riccati(const Matrix& A, const Matrix& B,
                                          const RiccatiOptions& options) {
  require_square(A, "Riccati A");
  if (B.rows() != A.rows()) throw Error(ErrorCode::DimensionMismatch, "B must have rows(A) rows");
  const Index n = A.rows();
  if (n > 0 && is_hurwitz(A)) {
    // Eq. has no constant term: X = 0 is a root and stabilizing.
    RiccatiSolution sol;
    sol.X = Matrix::Zero(n, n);
    sol.closed_loop_spectral_abscissa = spectral_abscissa(A);
    return sol;
  }
  return solve_care(A, B * B.transpose(), Matrix::Zero(n, n), options);
}

NormalizedPlant normalize_plant(const GeneralizedPlant& P) {
  const Matrix D12 = P.D12(), D21 = P.D21();
  const Matrix G12 = D12.transpose() * D12;
  const Matrix G21 = D21 * D21.transpose();
  if (P.m2() > 0 && (P.p1() < P.m2() || condition_number(G12) > 1e12)) {
    throw Error(ErrorCode::NormalizationFailure, "D12 must have full column rank");
  }
  if (P.p2() > 0 && (P.m1() < P.p2() || condition_number(G21) > 1e12)) {
    throw Error(ErrorCode::NormalizationFailure, "D21 must have full row rank");
  }
  NormalizedPlant out;
  out.Su = P.m2() > 0 ? inverse_sqrt_spd(G12) : Matrix(0, 0);
  out.Sy = P.p2() > 0 ? inverse_sqrt_spd(G21) : Matrix(0, 0);
  out.plant = GeneralizedPlant::from_blocks(P.A(), P.B1(), P.B2() * out.Su, P.C1(),
                                            out.Sy * P.C2(), P.D11(), D12 * out.Su,
                                            out.Sy * D21);
  return out;
}

HinfRiccatiPair solve_hinf_riccati_pair(const GeneralizedPlant& P, double gamma,
                                        const RiccatiOptions& options) {
  HinfRiccatiPair out;
  const Index n = P.states(), m1 = P.m1(), m2 = P.m2(), p1 = P.p1(), p2 = P.p2();
  const Matrix A = P.A(), B1 = P.B1(), C1 = P.C1();
  const Matrix& B = P.ss().B;
  const Matrix& C = P.ss().C;
  const double g2 = gamma * gamma;

  if (!(gamma > sigma_max(P.D11()))) {
    out.reason = "gamma does not exceed sigma_max(D11)";
    return out;
  }

  // D1. = [D11 D12], D.1 = [D11; D21].
  Matrix D1r(p1, m1 + m2), D1c(p1 + p2, m1);
  D1r << P.D11(), P.D12();
  D1c << P.D11(), P.D21();
  Matrix Rx = D1r.transpose() * D1r;
  Rx.topLeftCorner(m1, m1) -= g2 * Matrix::Identity(m1, m1);
  Matrix Ry = D1c * D1c.transpose();
  Ry.topLeftCorner(p1, p1) -= g2 * Matrix::Identity(p1, p1);
  Eigen::FullPivLU<Matrix> rx_lu(Rx), ry_lu(Ry);
  if (!rx_lu.isInvertible() || !ry_lu.isInvertible()) {
    out.reason = "singular R matrix in the H-infinity Riccati equations";
    return out;
  }

  const Matrix Ax = A - B * rx_lu.solve(D1r.transpose() * C1);
  const Matrix Rbx = symmetric_part(Matrix(B * rx_lu.solve(B.transpose())));
  const Matrix Qx =
      symmetric_part(Matrix(C1.transpose() * C1 - C1.transpose() * D1r * rx_lu.solve(D1r.transpose() * C1)));

  const Matrix Ay = A.transpose() - C.transpose() * ry_lu.solve(D1c * B1.transpose());
  const Matrix Rby = symmetric_part(Matrix(C.transpose() * ry_lu.solve(C)));
  const Matrix Qy =
      symmetric_part(Matrix(B1 * B1.transpose() - B1 * D1c.transpose() * ry_lu.solve(D1c * B1.transpose())));

  try {
    const RiccatiSolution xs = solve_care(Ax, Rbx, Qx, options);
    out.X = xs.X;
    out.x_condition = xs.basis_condition;
    out.x_residual = xs.residual;
  } catch (const Error& e) {
    out.reason = std::string("X-Riccati: ") + e.what();
    return out;
  }
  try {
    const RiccatiSolution ys = solve_care(Ay, Rby, Qy, options);
    out.Y = ys.X;
    out.y_condition = ys.basis_condition;
    out.y_residual = ys.residual;
  } catch (const Error& e) {
    out.reason = std::string("Y-Riccati: ") + e.what();
    return out;
  }

  auto min_eig = [](const Matrix& M) {
    return M.rows() == 0 ? 0.0 : Eigen::SelfAdjointEigenSolver<Matrix>(M).eigenvalues()(0);
  };
  const double psd_tol_x = 1e-9 * (1.0 + out.X.norm());
  const double psd_tol_y = 1e-9 * (1.0 + out.Y.norm());
  if (min_eig(out.X) < -psd_tol_x) {
    out.reason = "X-infinity is not positive semidefinite";
    return out;
  }
  if (min_eig(out.Y) < -psd_tol_y) {
    out.reason = "Y-infinity is not positive semidefinite";
    return out;
  }
  out.spectral_radius = n == 0 ? 0.0 : eigenvalues(out.X * out.Y).cwiseAbs().maxCoeff();
  if (!(out.spectral_radius < g2)) {
    out.reason = "spectral radius condition rho(X Y) < gamma^2 fails";
    return out;
  }
  out.solvable = true;
  return out;
}

HinfRiccatiPair solve_h2_like_pair(const GeneralizedPlant& P, double gamma,
                                   const RiccatiOptions& options) {
  return solve_hinf_riccati_pair(normalize_plant(P).plant, gamma, options);
}

}  // namespace strongstab
