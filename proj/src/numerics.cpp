#include "strongstab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace strongstab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularPencil: return "SingularPencil";
    case ErrorCode::DegeneratePencil: return "DegeneratePencil";
    case ErrorCode::ImproperTransfer: return "ImproperTransfer";
    case ErrorCode::AlgebraicLoop: return "AlgebraicLoop";
    case ErrorCode::NonStrictlyProperController: return "NonStrictlyProperController";
    case ErrorCode::UnstableSystem: return "UnstableSystem";
    case ErrorCode::NotStabilizable: return "NotStabilizable";
    case ErrorCode::ImaginaryAxisEigenvalue: return "ImaginaryAxisEigenvalue";
    case ErrorCode::IllConditionedBasis: return "IllConditionedBasis";
    case ErrorCode::NormalizationFailure: return "NormalizationFailure";
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::SolverStall: return "SolverStall";
    case ErrorCode::BracketInfeasible: return "BracketInfeasible";
    case ErrorCode::NonMonotoneDetected: return "NonMonotoneDetected";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::RiccatiFailure: return "RiccatiFailure";
    case ErrorCode::NormComputationFailure: return "NormComputationFailure";
    case ErrorCode::GammaInfeasible: return "GammaInfeasible";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::InnerLmiInfeasible: return "InnerLmiInfeasible";
    case ErrorCode::CrossCheckMismatch: return "CrossCheckMismatch";
    case ErrorCode::MissingWeights: return "MissingWeights";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

namespace {

struct Block {
  Index start;
  Index size;
};

std::vector<Block> diagonal_blocks(const Matrix& T) {
  std::vector<Block> blocks;
  const Index n = T.rows();
  Index i = 0;
  while (i < n) {
    if (i + 1 < n && T(i + 1, i) != 0.0) {
      blocks.push_back({i, 2});
      i += 2;
    } else {
      blocks.push_back({i, 1});
      i += 1;
    }
  }
  return blocks;
}

void block_eigenvalues(const Matrix& T, const Block& b, Complex* out) {
  if (b.size == 1) {
    out[0] = T(b.start, b.start);
    return;
  }
  const double a = T(b.start, b.start), bb = T(b.start, b.start + 1);
  const double c = T(b.start + 1, b.start), d = T(b.start + 1, b.start + 1);
  const double mean = 0.5 * (a + d);
  const double disc = 0.25 * (a - d) * (a - d) + bb * c;
  const Complex root = std::sqrt(Complex(disc, 0.0));
  out[0] = mean + root;
  out[1] = mean - root;
}

// Swaps the adjacent diagonal blocks of sizes p (leading, at k) and q.
// Bai-Demmel direct swap: the invariant subspace of the trailing block is
// spanned by [-X; I] where T11 X - X T22 = T12.
void swap_adjacent(Matrix& T, Matrix& Q, Index k, Index p, Index q) {
  const Index m = p + q;
  const Matrix T11 = T.block(k, k, p, p);
  const Matrix T22 = T.block(k + p, k + p, q, q);
  const Matrix T12 = T.block(k, k + p, p, q);

  Matrix kron = Matrix::Zero(p * q, p * q);
  for (Index j = 0; j < q; ++j) {
    kron.block(j * p, j * p, p, p) += T11;
    for (Index i = 0; i < q; ++i) {
      kron.block(i * p, j * p, p, p) -= T22(j, i) * Matrix::Identity(p, p);
    }
  }
  const Vector rhs = Eigen::Map<const Vector>(T12.data(), p * q);
  Eigen::FullPivLU<Matrix> lu(kron);
  if (lu.rank() < p * q) {
    throw Error(ErrorCode::NonConvergence, "Schur reordering: blocks share an eigenvalue");
  }
  const Vector x = lu.solve(rhs);
  Matrix basis(m, q);
  basis.topRows(p) = -Eigen::Map<const Matrix>(x.data(), p, q);
  basis.bottomRows(q) = Matrix::Identity(q, q);

  Eigen::HouseholderQR<Matrix> qr(basis);
  const Matrix U = qr.householderQ() * Matrix::Identity(m, m);

  T.middleRows(k, m) = (U.transpose() * T.middleRows(k, m)).eval();
  T.middleCols(k, m) = (T.middleCols(k, m) * U).eval();
  Q.middleCols(k, m) = (Q.middleCols(k, m) * U).eval();
  T.block(k + q, k, p, q).setZero();
}

}  // namespace

SchurDecomposition real_schur(const Eigen::Ref<const Matrix>& M, SchurOrdering ordering) {
  require_square(M, "real_schur input");
  if (!M.allFinite()) throw Error(ErrorCode::BadShape, "real_schur: non-finite entries");
  SchurDecomposition out;
  const Index n = M.rows();
  if (n == 0) {
    out.Q = Matrix(0, 0);
    out.T = Matrix(0, 0);
    return out;
  }

  Eigen::RealSchur<Matrix> schur(M, true);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::NonConvergence, "real Schur QR iteration exceeded its iteration cap");
  }
  out.T = schur.matrixT();
  out.Q = schur.matrixU();
  // RealSchur leaves roundoff below the quasi-triangle.
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 2; i < n; ++i) out.T(i, j) = 0.0;
  }

  auto is_stable = [&](const Block& b) {
    Complex ev[2];
    block_eigenvalues(out.T, b, ev);
    return ev[0].real() < 0.0;
  };

  if (ordering == SchurOrdering::StableFirst) {
    Index insert_at = 0;
    auto blocks = diagonal_blocks(out.T);
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      if (!is_stable(blocks[bi])) continue;
      // Bubble block bi up until it sits at insert_at.
      std::size_t cur = bi;
      while (blocks[cur].start > insert_at) {
        const Block lead = blocks[cur - 1];
        const Block trail = blocks[cur];
        swap_adjacent(out.T, out.Q, lead.start, lead.size, trail.size);
        blocks[cur - 1] = {lead.start, trail.size};
        blocks[cur] = {lead.start + trail.size, lead.size};
        --cur;
      }
      insert_at += blocks[cur].size;
    }
    out.stable_dim = insert_at;
  }

  const auto blocks = diagonal_blocks(out.T);
  out.eigenvalues.resize(n);
  Index stable = 0;
  for (const auto& b : blocks) {
    Complex ev[2];
    block_eigenvalues(out.T, b, ev);
    for (Index i = 0; i < b.size; ++i) {
      out.eigenvalues(b.start + i) = ev[i];
      if (ev[i].real() < 0.0) ++stable;
    }
  }
  if (ordering == SchurOrdering::None) out.stable_dim = stable;
  return out;
}

namespace {

// Power-of-two diagonal scaling that equalizes off-diagonal row and column
// norms (xGEBAL without the permutation step). Eigen's EigenSolver does not
// balance, and closed loops with fast observer poles are badly scaled.
Matrix balanced(Matrix M) {
  constexpr double kRadix = 2.0;
  const Index n = M.rows();
  bool changed = true;
  for (int sweep = 0; changed && sweep < 100; ++sweep) {
    changed = false;
    for (Index i = 0; i < n; ++i) {
      const double col = M.col(i).cwiseAbs().sum() - std::abs(M(i, i));
      const double row = M.row(i).cwiseAbs().sum() - std::abs(M(i, i));
      if (col == 0.0 || row == 0.0) continue;
      double c = col, r = row, f = 1.0, g = r / kRadix;
      while (c < g) {
        f *= kRadix;
        c *= kRadix;
        r /= kRadix;
        g /= kRadix;
      }
      g = c / kRadix;
      while (g >= r) {
        f /= kRadix;
        c /= kRadix;
        g /= kRadix;
        r *= kRadix;
      }
      if (c + r < 0.95 * (col + row)) {
        M.col(i) *= f;
        M.row(i) /= f;
        changed = true;
      }
    }
  }
  return M;
}

}  // namespace

ComplexVector eigenvalues(const Eigen::Ref<const Matrix>& M) {
  require_square(M, "eigenvalues input");
  if (M.rows() == 0) return ComplexVector(0);
  Eigen::EigenSolver<Matrix> es(balanced(M), false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NonConvergence, "eigenvalue iteration did not converge");
  }
  return es.eigenvalues();
}

SvdResult svd(const Eigen::Ref<const Matrix>& M) {
  if (!M.allFinite()) throw Error(ErrorCode::BadShape, "svd: non-finite entries");
  Eigen::JacobiSVD<Matrix> s(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {s.matrixU(), s.singularValues(), s.matrixV()};
}

Matrix solve_sylvester(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                       const Eigen::Ref<const Matrix>& C) {
  require_square(A, "Sylvester A");
  require_square(B, "Sylvester B");
  if (C.rows() != A.rows() || C.cols() != B.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "Sylvester: C must be rows(A) x rows(B)");
  }
  const Index n = A.rows(), m = B.rows();
  if (n == 0 || m == 0) return Matrix::Zero(n, m);

  Eigen::ComplexSchur<Matrix> sa(A), sb(B);
  if (sa.info() != Eigen::Success || sb.info() != Eigen::Success) {
    throw Error(ErrorCode::NonConvergence, "Sylvester: complex Schur failed");
  }
  const ComplexMatrix& TA = sa.matrixT();
  const ComplexMatrix& TB = sb.matrixT();
  const ComplexMatrix F = sa.matrixU().adjoint() * C.cast<Complex>() * sb.matrixU();

  const double scale = std::max({A.norm(), B.norm(), 1.0});
  ComplexMatrix Y(n, m);
  for (Index j = 0; j < m; ++j) {
    ComplexVector rhs = F.col(j);
    if (j > 0) rhs -= Y.leftCols(j) * TB.col(j).head(j);
    ComplexMatrix shifted = TA;
    shifted.diagonal().array() += TB(j, j);
    for (Index i = 0; i < n; ++i) {
      if (std::abs(shifted(i, i)) <= 1e-14 * scale) {
        throw Error(ErrorCode::SingularPencil, "Sylvester: spec(A) and spec(-B) intersect");
      }
    }
    Y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  return (sa.matrixU() * Y * sb.matrixU().adjoint()).real();
}

Matrix solve_lyapunov(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& Q) {
  const Matrix X = solve_sylvester(A.transpose(), A, -Q);
  return symmetric_part(X);
}

double spectral_abscissa(const Eigen::Ref<const Matrix>& M) {
  if (M.rows() == 0) return -std::numeric_limits<double>::infinity();
  return eigenvalues(M).real().maxCoeff();
}

bool is_hurwitz(const Eigen::Ref<const Matrix>& M, double margin) {
  return spectral_abscissa(M) < -margin;
}

double sigma_max(const Eigen::Ref<const Matrix>& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
}

double sigma_max(const Eigen::Ref<const ComplexMatrix>& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<ComplexMatrix>(M).singularValues()(0);
}

double condition_number(const Eigen::Ref<const Matrix>& M) {
  if (M.size() == 0) return 1.0;
  const Vector s = Eigen::JacobiSVD<Matrix>(M).singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

Index numerical_rank(const Eigen::Ref<const ComplexMatrix>& M, double tol) {
  if (M.size() == 0) return 0;
  const Vector s = Eigen::JacobiSVD<ComplexMatrix>(M).singularValues();
  const double thresh = tol * std::max(1.0, s(0));
  return (s.array() > thresh).count();
}

}  // namespace strongstab
