#pragma once

#include <string>

#include "strongstab/numerics.hpp"
#include "strongstab/sysmodel.hpp"

namespace strongstab {

struct RiccatiOptions {
  /// An eigenvalue of the Hamiltonian with |Re λ| below this fraction of
  /// max(1, ‖H‖) counts as lying on the imaginary axis.
  double imaginary_axis_tol = 1e-9;
  /// Condition number of the stable-subspace basis U1 above which the
  /// solution is reported as IllConditionedBasis.
  double condition_threshold = 1e8;
  /// U1 is treated as singular (NotStabilizable) above this condition number.
  double singular_threshold = 1e14;
  bool newton_refinement = true;
};

struct RiccatiSolution {
  Matrix X;
  double residual = 0.0;  // Frobenius norm of the equation residual
  double closed_loop_spectral_abscissa = 0.0;
  double basis_condition = 1.0;
};

/// Stabilizing solution of Aᵀ X + X A - X R X + Q = 0, i.e. the one making
/// A - R X Hurwitz, from the ordered Schur form of [[A, -R], [-Q, -Aᵀ]].
RiccatiSolution solve_care(const Matrix& A, const Matrix& R, const Matrix& Q,
                           const RiccatiOptions& options = {});

/// Stabilizing solution of Aᵀ X + X A - X B Bᵀ X = 0. There is no state
/// weight, so X = 0 whenever A is already Hurwitz.
RiccatiSolution solve_stabilizing_riccati(const Matrix& A, const Matrix& B,
                                          const RiccatiOptions& options = {});

/// Input/output scalings that bring a plant to D12ᵀD12 = I, D21 D21ᵀ = I.
/// The controller of the scaled plant maps back as K = Su K̃ Sy.
struct NormalizedPlant {
  GeneralizedPlant plant;
  Matrix Su;  // m2 x m2
  Matrix Sy;  // p2 x p2
};

NormalizedPlant normalize_plant(const GeneralizedPlant& P);

/// Result of the γ-dependent H∞ Riccati pair on a normalized plant.
/// Infeasibility is a value: `solvable` is false and `reason` says why.
struct HinfRiccatiPair {
  bool solvable = false;
  std::string reason;
  Matrix X;  // X∞
  Matrix Y;  // Y∞
  double spectral_radius = 0.0;  // ρ(X∞ Y∞)
  double x_condition = 0.0;
  double y_condition = 0.0;
  double x_residual = 0.0;
  double y_residual = 0.0;
};

/// Solves the X∞ / Y∞ Riccati equations of the two-Riccati H∞ solution for
/// an already normalized plant and checks X∞ ⪰ 0, Y∞ ⪰ 0, ρ(X∞Y∞) < γ².
HinfRiccatiPair solve_hinf_riccati_pair(const GeneralizedPlant& normalized, double gamma,
                                        const RiccatiOptions& options = {});

/// Same as above, normalizing the plant first.
HinfRiccatiPair solve_h2_like_pair(const GeneralizedPlant& P, double gamma,
                                   const RiccatiOptions& options = {});

}  // namespace strongstab
