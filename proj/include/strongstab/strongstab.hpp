#pragma once

#include <optional>
#include <string>

#include "strongstab/lmi.hpp"
#include "strongstab/riccati.hpp"
#include "strongstab/sysmodel.hpp"

namespace strongstab {

/// The u→y channel of a plant: ẋ = A x + B u, y = C x.
struct PlantTriple {
  Matrix A;
  Matrix B;
  Matrix C;

  Index states() const { return A.rows(); }
  static PlantTriple from(const GeneralizedPlant& G) { return {G.A(), G.B2(), G.C2()}; }
  static PlantTriple from(const StateSpace& S) { return {S.A, S.B, S.C}; }
};

enum class Lemma1Variant {
  Full,           // Γ(X_K, A) + Γ(Z, C) < 0 and the bounded-real block LMI
  StabilityOnly,  // Γ(X_K, A) + Γ(Z, C) < 0 and Γ(X_K, A_X) + Γ(Z, C) < 0
  Structured,     // Full with Z frozen to -γ_K Cᵀ
};

/// Lemma 1 LMIs in X_K (symmetric, positive definite) and Z (n x p). When
/// `gamma_K` is empty the bound becomes a scalar decision variable named
/// "gamma_K".
LmiProblem build_lemma1_lmis(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& X,
                             std::optional<double> gamma_K,
                             Lemma1Variant variant = Lemma1Variant::Full);

struct StrongStabOptions {
  LmiOptions lmi;
  RiccatiOptions riccati;
  double gamma_lo = 1e-3;
  double gamma_hi = 1e6;
  /// A minimized bound is returned this far above the optimum, at an
  /// interior point of the LMIs.
  double rel_tol = 1e-3;
  double hinf_rel_tol = 1e-6;
};

struct StrongStabCertificates {
  double A_X_abscissa = 0.0;
  double A_Z_abscissa = 0.0;
  double controller_abscissa = 0.0;
  double closed_loop_abscissa = 0.0;
  /// Distance between eig(A_CL) and eig(A_X) ⊎ eig(A_Z) as multisets.
  double spectrum_split_error = 0.0;
  /// ‖K_G‖∞; NaN when the controller is not Hurwitz.
  double controller_hinf_norm = 0.0;
  double lmi_margin = 0.0;
  double riccati_residual = 0.0;
};

struct StrongStabResult {
  Matrix X;
  Matrix X_K;
  Matrix Z;
  /// Norm bound; +inf for stability-only designs.
  double gamma_K = 0.0;
  /// When minimized: a bound just below gamma_K verified infeasible, else NaN.
  double gamma_K_infeasible_below = 0.0;
  StateSpace controller;
  StrongStabCertificates certificates;
  Lemma1Variant variant = Lemma1Variant::Full;
  int solver_iterations = 0;
  Matrix A_X;  // A - B Bᵀ X
  Matrix A_Z;  // A + X_K⁻¹ Z C
};

/// Stable stabilizing controller of Lemma 1. With `minimize` the norm bound
/// is minimized; otherwise `gamma_K` is required.
StrongStabResult strong_stabilize(const PlantTriple& plant, std::optional<double> gamma_K,
                                  bool minimize, const StrongStabOptions& options = {});

/// Closed-loop stability only; no norm bound on the controller.
StrongStabResult strong_stabilize_stability_only(const PlantTriple& plant,
                                                 const StrongStabOptions& options = {});

/// Same LMIs restricted to Z = -γ_K Cᵀ.
StrongStabResult structured_baseline(const PlantTriple& plant, std::optional<double> gamma_K,
                                     bool minimize, const StrongStabOptions& options = {});

/// Two-port K⁰ with F_l(K⁰, Q) strongly stabilizing for every stable Q
/// with ‖Q‖∞ < gamma_Q.
struct ParameterizationSeed {
  GeneralizedPlant K0;
  double gamma_Q = 0.0;
};

ParameterizationSeed parameterize(const StrongStabResult& result, const PlantTriple& plant,
                                  double hinf_rel_tol = 1e-6);

/// Multiset distance between two spectra (greedy nearest matching).
double spectrum_distance(const ComplexVector& a, const ComplexVector& b);

inline constexpr const char* kSufficiencyNote =
    "condition is sufficient; plant may still be strongly stabilizable";

}  // namespace strongstab
