#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "strongstab/sysmodel.hpp"

namespace strongstab {

Complex RationalFunction::evaluate(Complex s) const {
  return strongstab::evaluate(num, s) / strongstab::evaluate(den, s);
}

TransferMatrix::TransferMatrix(Index r, Index c, std::vector<RationalFunction> e)
    : rows(r), cols(c), entries(std::move(e)) {
  if (static_cast<Index>(entries.size()) != rows * cols) {
    throw Error(ErrorCode::DimensionMismatch, "transfer matrix entry count != rows*cols");
  }
  for (auto& entry : entries) {
    entry.num = trim(entry.num);
    entry.den = trim(entry.den);
    if (degree(entry.den) < 0) throw Error(ErrorCode::ImproperTransfer, "zero denominator");
    if (degree(entry.num) > degree(entry.den)) {
      throw Error(ErrorCode::ImproperTransfer, "numerator degree exceeds denominator degree");
    }
  }
}

ComplexMatrix TransferMatrix::evaluate(Complex s) const {
  ComplexMatrix out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = (*this)(i, j).evaluate(s);
  return out;
}

GeneralizedPlant::GeneralizedPlant(StateSpace ss, Index m1, Index m2, Index p1, Index p2)
    : ss_(std::move(ss)), m1_(m1), m2_(m2), p1_(p1), p2_(p2) {
  if (m1 < 0 || m2 < 0 || p1 < 0 || p2 < 0 || m1 + m2 != ss_.inputs() ||
      p1 + p2 != ss_.outputs()) {
    throw Error(ErrorCode::DimensionMismatch, "generalized plant partition does not match I/O");
  }
  if (ss_.D.bottomRightCorner(p2_, m2_).cwiseAbs().sum() != 0.0) {
    throw Error(ErrorCode::DimensionMismatch, "generalized plant requires D22 = 0");
  }
}

GeneralizedPlant GeneralizedPlant::from_blocks(const Matrix& A, const Matrix& B1,
                                               const Matrix& B2, const Matrix& C1,
                                               const Matrix& C2, const Matrix& D11,
                                               const Matrix& D12, const Matrix& D21) {
  const Index n = A.rows();
  const Index m1 = B1.cols(), m2 = B2.cols(), p1 = C1.rows(), p2 = C2.rows();
  if (B1.rows() != n || B2.rows() != n || C1.cols() != n || C2.cols() != n ||
      D11.rows() != p1 || D11.cols() != m1 || D12.rows() != p1 || D12.cols() != m2 ||
      D21.rows() != p2 || D21.cols() != m1) {
    throw Error(ErrorCode::DimensionMismatch, "generalized plant blocks are inconsistent");
  }
  Matrix B(n, m1 + m2), C(p1 + p2, n), D = Matrix::Zero(p1 + p2, m1 + m2);
  B << B1, B2;
  C << C1, C2;
  D.topLeftCorner(p1, m1) = D11;
  D.topRightCorner(p1, m2) = D12;
  D.bottomLeftCorner(p2, m1) = D21;
  return GeneralizedPlant(StateSpace(A, B, C, D), m1, m2, p1, p2);
}

namespace {

Polynomial monic(const Polynomial& p) { return scale(p, 1.0 / p.front()); }

bool same_polynomial(const Polynomial& a, const Polynomial& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1e-12 * (1.0 + std::abs(a[i]))) return false;
  }
  return true;
}

// Controllable canonical form of a single-input column sharing one
// denominator: returns (A, b, C, d).
StateSpace realize_column(const std::vector<Polynomial>& nums, const Polynomial& den) {
  const Polynomial d = monic(den);
  const double lead = den.front();
  const int k = degree(d);
  const Index p = static_cast<Index>(nums.size());
  Matrix A = Matrix::Zero(k, k), B = Matrix::Zero(k, 1), C = Matrix::Zero(p, k),
         D = Matrix::Zero(p, 1);
  if (k > 0) {
    for (int j = 0; j < k; ++j) A(0, j) = -d[j + 1];
    for (int j = 1; j < k; ++j) A(j, j - 1) = 1.0;
    B(0, 0) = 1.0;
  }
  for (Index i = 0; i < p; ++i) {
    // Pad to length k+1 and divide by the denominator's leading coefficient.
    Polynomial n(k + 1, 0.0);
    const Polynomial& src = nums[i];
    for (std::size_t t = 0; t < src.size(); ++t) n[k + 1 - src.size() + t] = src[t] / lead;
    D(i, 0) = n[0];
    for (int j = 0; j < k; ++j) C(i, j) = n[j + 1] - n[0] * d[j + 1];
  }
  return StateSpace(A, B, C, D);
}

// Controllable staircase; returns the number of controllable states and
// leaves (A, B, C) in staircase coordinates.
Index controllable_staircase(Matrix& A, Matrix& B, Matrix& C, double tol) {
  const Index n = A.rows();
  const double scale = std::max({1.0, frobenius_norm(A), frobenius_norm(B), frobenius_norm(C)});
  Index done = 0, prev_start = 0, prev_size = 0;
  while (done < n) {
    const Index rem = n - done;
    const Matrix sub = done == 0 ? Matrix(B) : Matrix(A.block(done, prev_start, rem, prev_size));
    if (sub.cols() == 0) break;
    Eigen::JacobiSVD<Matrix> s(sub, Eigen::ComputeFullU);
    const Vector& sv = s.singularValues();
    Index r = 0;
    while (r < sv.size() && sv(r) > tol * scale) ++r;
    const Matrix& U = s.matrixU();
    A.middleRows(done, rem) = (U.transpose() * A.middleRows(done, rem)).eval();
    A.middleCols(done, rem) = (A.middleCols(done, rem) * U).eval();
    B.middleRows(done, rem) = (U.transpose() * B.middleRows(done, rem)).eval();
    C.middleCols(done, rem) = (C.middleCols(done, rem) * U).eval();
    if (r == 0) break;
    prev_start = done;
    prev_size = r;
    done += r;
  }
  return done;
}

}  // namespace

StateSpace minimal_realization(const StateSpace& S, double tol) {
  Matrix A = S.A, B = S.B, C = S.C;
  const Index nc = controllable_staircase(A, B, C, tol);
  Matrix Ac = A.topLeftCorner(nc, nc), Bc = B.topRows(nc), Cc = C.leftCols(nc);

  Matrix At = Ac.transpose(), Bt = Cc.transpose(), Ct = Bc.transpose();
  const Index no = controllable_staircase(At, Bt, Ct, tol);
  return StateSpace(At.topLeftCorner(no, no).transpose(), Ct.leftCols(no).transpose(),
                    Bt.topRows(no).transpose(), S.D);
}

StateSpace tf_to_ss(const TransferMatrix& T, double tol) {
  StateSpace acc = StateSpace::gain(Matrix::Zero(T.rows, 0));
  for (Index j = 0; j < T.cols; ++j) {
    // Realize the column with a shared denominator when possible.
    bool shared = true;
    const Polynomial d0 = monic(T(0, j).den);
    for (Index i = 1; i < T.rows && shared; ++i) shared = same_polynomial(monic(T(i, j).den), d0);

    StateSpace column;
    if (shared) {
      std::vector<Polynomial> nums;
      const double lead0 = T(0, j).den.front();
      for (Index i = 0; i < T.rows; ++i) {
        nums.push_back(scale(T(i, j).num, lead0 / T(i, j).den.front()));
      }
      column = realize_column(nums, T(0, j).den);
    } else {
      column = StateSpace::gain(Matrix::Zero(0, 1));
      for (Index i = 0; i < T.rows; ++i) {
        const StateSpace entry = realize_column({T(i, j).num}, T(i, j).den);
        // Stack outputs, share the input.
        const Index n0 = column.states(), n1 = entry.states();
        Matrix A = Matrix::Zero(n0 + n1, n0 + n1), B(n0 + n1, 1), C = Matrix::Zero(i + 1, n0 + n1),
               D(i + 1, 1);
        A.topLeftCorner(n0, n0) = column.A;
        A.bottomRightCorner(n1, n1) = entry.A;
        B << column.B, entry.B;
        C.topLeftCorner(i, n0) = column.C;
        C.bottomRightCorner(1, n1) = entry.C;
        D << column.D, entry.D;
        column = StateSpace(A, B, C, D);
      }
    }
    // Append the column as a new input.
    const Index n0 = acc.states(), n1 = column.states();
    Matrix A = Matrix::Zero(n0 + n1, n0 + n1), B = Matrix::Zero(n0 + n1, j + 1),
           C(T.rows, n0 + n1), D(T.rows, j + 1);
    A.topLeftCorner(n0, n0) = acc.A;
    A.bottomRightCorner(n1, n1) = column.A;
    B.topLeftCorner(n0, j) = acc.B;
    B.bottomRightCorner(n1, 1) = column.B;
    C << acc.C, column.C;
    D << acc.D, column.D;
    acc = StateSpace(A, B, C, D);
  }
  return minimal_realization(acc, tol);
}

StateSpace series(const StateSpace& first, const StateSpace& second) {
  if (second.inputs() != first.outputs()) {
    throw Error(ErrorCode::DimensionMismatch, "series: output/input count mismatch");
  }
  const Index n1 = first.states(), n2 = second.states();
  Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = first.A;
  A.bottomLeftCorner(n2, n1) = second.B * first.C;
  A.bottomRightCorner(n2, n2) = second.A;
  Matrix B(n1 + n2, first.inputs());
  B << first.B, second.B * first.D;
  Matrix C(second.outputs(), n1 + n2);
  C << second.D * first.C, second.C;
  return StateSpace(A, B, C, second.D * first.D);
}

StateSpace append(const StateSpace& a, const StateSpace& b) {
  const Index n1 = a.states(), n2 = b.states();
  Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = a.A;
  A.bottomRightCorner(n2, n2) = b.A;
  Matrix B = Matrix::Zero(n1 + n2, a.inputs() + b.inputs());
  B.topLeftCorner(n1, a.inputs()) = a.B;
  B.bottomRightCorner(n2, b.inputs()) = b.B;
  Matrix C = Matrix::Zero(a.outputs() + b.outputs(), n1 + n2);
  C.topLeftCorner(a.outputs(), n1) = a.C;
  C.bottomRightCorner(b.outputs(), n2) = b.C;
  Matrix D = Matrix::Zero(a.outputs() + b.outputs(), a.inputs() + b.inputs());
  D.topLeftCorner(a.outputs(), a.inputs()) = a.D;
  D.bottomRightCorner(b.outputs(), b.inputs()) = b.D;
  return StateSpace(A, B, C, D);
}

StateSpace similarity(const StateSpace& S, const Matrix& T) {
  Eigen::PartialPivLU<Matrix> lu(T);
  return StateSpace(lu.solve(S.A * T), lu.solve(S.B), S.C * T, S.D);
}

}  // namespace strongstab
