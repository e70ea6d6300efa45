#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "strongstab/error.hpp"

namespace strongstab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Absolute floor used wherever a relative tolerance would collapse to zero.
inline constexpr double kAbsoluteFloor = 1e-12;

enum class SchurOrdering { None, StableFirst };

/// Real Schur form M = Q T Qᵀ. With StableFirst ordering the first
/// `stable_dim` diagonal entries of T carry every eigenvalue with negative
/// real part.
struct SchurDecomposition {
  Matrix Q;
  Matrix T;
  ComplexVector eigenvalues;  // in diagonal-block order of T
  Index stable_dim = 0;
};

struct SvdResult {
  Matrix U;
  Vector sigma;  // nonincreasing
  Matrix V;
};

SchurDecomposition real_schur(const Eigen::Ref<const Matrix>& M,
                              SchurOrdering ordering = SchurOrdering::None);

ComplexVector eigenvalues(const Eigen::Ref<const Matrix>& M);

SvdResult svd(const Eigen::Ref<const Matrix>& M);

/// Solves A X + X B = C by the Bartels-Stewart method on complex Schur forms.
/// Throws SingularPencil when A and -B share an eigenvalue.
Matrix solve_sylvester(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                       const Eigen::Ref<const Matrix>& C);

/// Solves Aᵀ X + X A + Q = 0.
Matrix solve_lyapunov(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& Q);

/// Largest real part over the spectrum; -inf for an empty matrix.
double spectral_abscissa(const Eigen::Ref<const Matrix>& M);

bool is_hurwitz(const Eigen::Ref<const Matrix>& M, double margin = 0.0);

double sigma_max(const Eigen::Ref<const Matrix>& M);

double sigma_max(const Eigen::Ref<const ComplexMatrix>& M);

/// σ_max / σ_min; +inf when singular.
double condition_number(const Eigen::Ref<const Matrix>& M);

/// Numerical rank with threshold tol·max(1, σ_max).
Index numerical_rank(const Eigen::Ref<const ComplexMatrix>& M, double tol);

template <typename Derived>
typename Derived::PlainObject symmetric_part(const Eigen::MatrixBase<Derived>& M) {
  return (M + M.transpose()) / typename Derived::Scalar(2);
}

template <typename Derived>
typename Derived::RealScalar frobenius_norm(const Eigen::MatrixBase<Derived>& M) {
  return M.size() == 0 ? typename Derived::RealScalar(0) : M.norm();
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& M, const char* what) {
  if (M.rows() != M.cols()) {
    throw Error(ErrorCode::NotSquare, std::string(what) + " must be square, got " +
                                          std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
  }
}

}  // namespace strongstab
