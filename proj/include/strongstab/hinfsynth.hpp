#pragma once

#include <optional>
#include <string>
#include <vector>

#include "strongstab/riccati.hpp"
#include "strongstab/strongstab.hpp"
#include "strongstab/sysmodel.hpp"

namespace strongstab {

struct HinfOptions {
  RiccatiOptions riccati;
  StrongStabOptions inner;
  double hinf_rel_tol = 1e-7;
  /// Relative width at which γ bisections stop.
  double gamma_rel_tol = 1e-5;
  /// Disagreement between the C_γ block formulas and the generic LFT, relative
  /// to the peak gain on the grid, above which synthesis fails hard.
  double crosscheck_tol = 1e-6;
  /// γ_K of the inner strong-stabilization problem; empty couples it to γ.
  std::optional<double> decoupled_gamma_K;
  /// Full Lemma 1 LMIs, or the Z = -γ_K Cᵀ restriction as a baseline.
  Lemma1Variant inner_variant = Lemma1Variant::Full;
};

/// Infimal achievable closed-loop H∞ norm over all stabilizing controllers,
/// by bisection on solvability of the Riccati pair.
double optimal_gamma(const GeneralizedPlant& P, const HinfOptions& options = {});

/// Central controller generator M∞ of the γ-suboptimal family
/// K = F_l(M∞, Q), Q stable with ‖Q‖∞ < γ. Partition: inputs (y, Q-out),
/// outputs (u, Q-in).
struct CentralController {
  GeneralizedPlant M;
  double gamma = 0.0;
  HinfRiccatiPair riccati;
};

CentralController central_controller(const GeneralizedPlant& P, double gamma,
                                     const HinfOptions& options = {});

struct StableHinfCertificates {
  double controller_abscissa = 0.0;
  double closed_loop_abscissa = 0.0;
  double closed_loop_norm = 0.0;
  double crosscheck_error = 0.0;
  /// ‖Q‖∞ of the stable parameter K_G driving the central generator.
  double parameter_norm = 0.0;

  bool hold(double gamma) const {
    return controller_abscissa < 0.0 && closed_loop_abscissa < 0.0 && closed_loop_norm < gamma;
  }
};

struct StableHinfController {
  double gamma = 0.0;
  StateSpace controller;  // C_γ
  CentralController central;
  StrongStabResult inner;
  StableHinfCertificates certificates;
};

/// Stable controller achieving ‖F_l(P, C_γ)‖∞ < γ, built from the central
/// generator and a strongly stabilizing parameter for its (A, B2, C2) channel.
/// Infeasibility throws GammaInfeasible or InnerLmiInfeasible.
StableHinfController stable_hinf(const GeneralizedPlant& P, double gamma,
                                 const HinfOptions& options = {});

/// Assembles C_γ from the printed block formulas.
StateSpace assemble_stable_controller(const GeneralizedPlant& M, const StrongStabResult& inner);

struct GammaProbe {
  double gamma = 0.0;
  bool feasible = false;
  std::string reason;
};

struct MinGammaResult {
  double gamma = 0.0;  // smallest γ with a certified stable controller
  double gamma_opt = 0.0;
  StableHinfController best;
  std::vector<GammaProbe> probes;
  bool non_monotone = false;
};

/// Smallest γ in [lo, hi] admitting a stable controller. `lo` defaults to
/// the unconstrained optimum, `hi` to a doubling search from it.
MinGammaResult min_gamma_stable(const GeneralizedPlant& P, std::optional<double> lo = {},
                                std::optional<double> hi = {}, const HinfOptions& options = {});

}  // namespace strongstab
