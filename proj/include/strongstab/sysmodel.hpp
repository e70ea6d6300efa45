#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "strongstab/numerics.hpp"
#include "strongstab/polynomial.hpp"

namespace strongstab {

/// Continuous-time realization G(s) = C (sI - A)⁻¹ B + D.
template <typename Scalar>
struct BasicStateSpace {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  MatrixType A, B, C, D;

  BasicStateSpace() : A(0, 0), B(0, 0), C(0, 0), D(0, 0) {}

  BasicStateSpace(MatrixType a, MatrixType b, MatrixType c, MatrixType d)
      : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
    validate();
  }

  /// Static gain with no states.
  static BasicStateSpace gain(const MatrixType& d) {
    return BasicStateSpace(MatrixType(0, 0), MatrixType(0, d.cols()), MatrixType(d.rows(), 0), d);
  }

  Index states() const { return A.rows(); }
  Index inputs() const { return D.cols(); }
  Index outputs() const { return D.rows(); }

  void validate() const {
    if (A.rows() != A.cols() || B.rows() != A.rows() || C.cols() != A.rows() ||
        D.rows() != C.rows() || D.cols() != B.cols()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "state space: A " + shape(A) + ", B " + shape(B) + ", C " + shape(C) + ", D " +
                      shape(D));
    }
  }

  /// Frequency response at a complex point s.
  Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic> evaluate(
      std::complex<double> s) const {
    using CMat = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>;
    CMat out = D.template cast<std::complex<double>>();
    if (states() == 0) return out;
    CMat pencil = -A.template cast<std::complex<double>>();
    pencil.diagonal().array() += s;
    const CMat x = pencil.partialPivLu().solve(B.template cast<std::complex<double>>());
    out.noalias() += C.template cast<std::complex<double>>() * x;
    return out;
  }

 private:
  static std::string shape(const MatrixType& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
  }
};

using StateSpace = BasicStateSpace<double>;

/// Entry of a transfer matrix; coefficients highest power first.
struct RationalFunction {
  Polynomial num;
  Polynomial den;

  Complex evaluate(Complex s) const;
};

struct TransferMatrix {
  Index rows = 0;
  Index cols = 0;
  std::vector<RationalFunction> entries;  // row-major

  TransferMatrix() = default;
  TransferMatrix(Index r, Index c, std::vector<RationalFunction> e);

  const RationalFunction& operator()(Index i, Index j) const { return entries[i * cols + j]; }
  ComplexMatrix evaluate(Complex s) const;
};

/// Partitioned plant with disturbance/control inputs (m1, m2) and
/// performance/measured outputs (p1, p2). The (2,2) feedthrough is zero.
class GeneralizedPlant {
 public:
  GeneralizedPlant() = default;
  GeneralizedPlant(StateSpace ss, Index m1, Index m2, Index p1, Index p2);

  static GeneralizedPlant from_blocks(const Matrix& A, const Matrix& B1, const Matrix& B2,
                                      const Matrix& C1, const Matrix& C2, const Matrix& D11,
                                      const Matrix& D12, const Matrix& D21);

  const StateSpace& ss() const { return ss_; }
  Index states() const { return ss_.states(); }
  Index m1() const { return m1_; }
  Index m2() const { return m2_; }
  Index p1() const { return p1_; }
  Index p2() const { return p2_; }

  Matrix A() const { return ss_.A; }
  Matrix B1() const { return ss_.B.leftCols(m1_); }
  Matrix B2() const { return ss_.B.rightCols(m2_); }
  Matrix C1() const { return ss_.C.topRows(p1_); }
  Matrix C2() const { return ss_.C.bottomRows(p2_); }
  Matrix D11() const { return ss_.D.topLeftCorner(p1_, m1_); }
  Matrix D12() const { return ss_.D.topRightCorner(p1_, m2_); }
  Matrix D21() const { return ss_.D.bottomLeftCorner(p2_, m1_); }

 private:
  StateSpace ss_;
  Index m1_ = 0, m2_ = 0, p1_ = 0, p2_ = 0;
};

/// Real nonnegative poles/zeros on the extended axis; +inf encodes s = ∞.
struct PipReport {
  std::vector<double> real_nonneg_zeros;
  std::vector<double> real_nonneg_poles;
  bool satisfied = true;
  std::optional<std::pair<double, double>> violating_pair;
};

enum class Assumption { A1, A2, A3, A4 };

struct AssumptionViolation {
  Assumption which;
  std::string detail;
};

std::string_view to_string(Assumption a);

// ---- realization -----------------------------------------------------------

StateSpace tf_to_ss(const TransferMatrix& T, double tol = 1e-9);

/// Orthogonal staircase reduction to a controllable and observable
/// realization; rank decisions use threshold tol·max(1, ‖A‖, ‖B‖, ‖C‖).
StateSpace minimal_realization(const StateSpace& S, double tol = 1e-9);

StateSpace series(const StateSpace& first, const StateSpace& second);

/// Block-diagonal stacking: inputs and outputs are concatenated.
StateSpace append(const StateSpace& a, const StateSpace& b);

/// Similarity transform x = T x̃.
StateSpace similarity(const StateSpace& S, const Matrix& T);

// ---- interconnection -------------------------------------------------------

/// F_l(G, K) = G11 + G12 K (I - G22 K)⁻¹ G21, realized with states (x_G, x_K).
StateSpace lft_lower(const GeneralizedPlant& G, const StateSpace& K);

/// Closed-loop A-matrix [[A, B2 C_K], [B_K C2, A_K]] for a strictly proper K.
Matrix feedback_A_matrix(const GeneralizedPlant& G, const StateSpace& K);

/// Closed-loop A-matrix of the plant u→y channel (A, B, C, D22 = 0) with an
/// arbitrary proper controller.
Matrix closed_loop_A(const Matrix& A, const Matrix& B, const Matrix& C, const StateSpace& K);

// ---- analysis --------------------------------------------------------------

/// H∞ norm by bisection on the imaginary-axis eigenvalue test of the
/// associated Hamiltonian matrix. Requires A Hurwitz.
double hinf_norm(const StateSpace& S, double rel_tol = 1e-6);

/// Hankel singular values of a stable system, nonincreasing.
Vector hankel_singular_values(const StateSpace& S);

/// Finite invariant zeros: points where the Rosenbrock pencil
/// [[A - λI, B], [C, D]] drops below its normal rank.
ComplexVector transmission_zeros(const StateSpace& S);

PipReport check_pip(const StateSpace& S, double tol = 1e-7);

std::vector<AssumptionViolation> validate_assumptions(const GeneralizedPlant& G, double tol = 1e-7);

/// Logarithmic frequency grid.
std::vector<double> log_grid(double lo, double hi, int points);

/// max_ω σ_max(S(jω)) over a grid.
double sweep_peak_gain(const StateSpace& S, const std::vector<double>& omegas);

}  // namespace strongstab
