#include "strongstab/sysmodel.hpp"

namespace strongstab {

StateSpace lft_lower(const GeneralizedPlant& G, const StateSpace& K) {
  if (K.inputs() != G.p2() || K.outputs() != G.m2()) {
    throw Error(ErrorCode::DimensionMismatch,
                "lft_lower: controller must map " + std::to_string(G.p2()) + " measurements to " +
                    std::to_string(G.m2()) + " controls");
  }
  // D22 = 0, so I - D22 D_K = I and the loop is always well posed.
  const Index n = G.states(), nk = K.states();
  const Matrix B1 = G.B1(), B2 = G.B2(), C1 = G.C1(), C2 = G.C2();
  const Matrix D12 = G.D12(), D21 = G.D21();

  Matrix A(n + nk, n + nk);
  A << G.A() + B2 * K.D * C2, B2 * K.C,
       K.B * C2, K.A;
  Matrix B(n + nk, G.m1());
  B << B1 + B2 * K.D * D21,
       K.B * D21;
  Matrix C(G.p1(), n + nk);
  C << C1 + D12 * K.D * C2, D12 * K.C;
  const Matrix D = G.D11() + D12 * K.D * D21;
  return StateSpace(A, B, C, D);
}

Matrix feedback_A_matrix(const GeneralizedPlant& G, const StateSpace& K) {
  if (K.inputs() != G.p2() || K.outputs() != G.m2()) {
    throw Error(ErrorCode::DimensionMismatch, "feedback_A_matrix: controller I/O mismatch");
  }
  if (K.D.size() > 0 && K.D.cwiseAbs().maxCoeff() != 0.0) {
    throw Error(ErrorCode::NonStrictlyProperController,
                "feedback_A_matrix requires a controller with D_K = 0");
  }
  const Index n = G.states(), nk = K.states();
  Matrix Acl(n + nk, n + nk);
  Acl << G.A(), G.B2() * K.C,
         K.B * G.C2(), K.A;
  return Acl;
}

Matrix closed_loop_A(const Matrix& A, const Matrix& B, const Matrix& C, const StateSpace& K) {
  if (K.inputs() != C.rows() || K.outputs() != B.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "closed_loop_A: controller I/O mismatch");
  }
  const Index n = A.rows(), nk = K.states();
  Matrix Acl(n + nk, n + nk);
  Acl << A + B * K.D * C, B * K.C,
         K.B * C, K.A;
  return Acl;
}

}  // namespace strongstab
