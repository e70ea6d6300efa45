#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "strongstab/hinfsynth.hpp"
#include "strongstab/strongstab.hpp"
#include "strongstab/sysmodel.hpp"

namespace strongstab::bench {

/// A named number checked against a reference value.
struct Expectation {
  enum class Sense { Within, AtMost };

  std::string name;
  double expected = 0.0;
  double tolerance = 0.0;
  double actual = 0.0;
  Sense sense = Sense::Within;

  bool pass() const {
    if (sense == Sense::AtMost) return actual <= expected + tolerance;
    return std::abs(actual - expected) <= tolerance;
  }
};

struct SynthesisReport {
  std::string name;
  std::map<std::string, double> parameters;
  Index plant_order = 0;
  Index controller_order = 0;
  double gamma_opt = 0.0;
  double gamma_min = 0.0;
  /// Same search with the Z = -γ_K Cᵀ inner step; NaN when not run,
  /// +inf when no probe succeeded.
  double gamma_structured = std::numeric_limits<double>::quiet_NaN();
  StableHinfCertificates certificates;
  std::vector<GammaProbe> probes;
  bool non_monotone = false;
  std::vector<Expectation> expectations;
  double runtime_seconds = 0.0;
  std::string notes;
  StateSpace controller;

  bool certificates_hold() const { return certificates.hold(gamma_min); }
  bool passed() const;
};

// ---- plants ----------------------------------------------------------------

GeneralizedPlant lee_soh_plant();

/// 8th-order benchmark with control weight `beta`. The shared denominator has
/// a double root at s = 0, so every state is shifted by -axis_shift.
GeneralizedPlant benchmark10_plant(double beta, double axis_shift = 1e-4);

/// z1 = W1 (w - P u), z2 = W2 u, y = w - P u for SISO P (strictly proper),
/// W1 and W2.
GeneralizedPlant mixed_sensitivity_plant(const StateSpace& P, const StateSpace& W1,
                                         const StateSpace& W2);

/// P = (s+5)(s-1)(s-5) / ((s²+4s+5)(s-20)(s-30)), W1 = 1/(s+1), W2 = 0.2.
GeneralizedPlant siso_mixed_sensitivity_plant();

/// P = (s²+0.1s+0.1) / ((s-0.1)(s-1)(s²+2s+3)).
StateSpace cc_plant();

TransferMatrix g1(double alpha);
TransferMatrix g2(double alpha);

// ---- cases -----------------------------------------------------------------

enum class SweepPlant { G1, G2 };

struct SweepRow {
  double alpha = 0.0;
  bool pip = false;
  double gamma_lmi = std::numeric_limits<double>::infinity();
  double gamma_structured = std::numeric_limits<double>::infinity();
  std::string status;  // "ok" or the first failure message

  /// γ_K(LMI) ≤ γ_K(structured) up to the solver's relative precision.
  bool dominance_holds(double rel_tol = 1e-4) const;
};

std::vector<double> linspace(double lo, double hi, int points);

/// Default α grids. G1 satisfies PIP only for α > 5. G2 satisfies it for
/// α ≠ 0 but the LMI condition only holds from about α = 8.
std::vector<double> default_alpha_grid(SweepPlant which, int points = 60);

std::vector<SweepRow> case_g1_g2_sweep(SweepPlant which, const std::vector<double>& alphas,
                                       const StrongStabOptions& options = {});

SynthesisReport case_lee_soh(const HinfOptions& options = {});
SynthesisReport case_benchmark10(double beta, double axis_shift = 1e-4,
                                 const HinfOptions& options = {});
SynthesisReport case_siso_mixed_sensitivity(bool with_structured = true,
                                            const HinfOptions& options = {});

struct Weights {
  std::optional<StateSpace> W1;
  std::optional<StateSpace> W2;
};

/// Full pipeline on the CC plant with caller-supplied weights; no reference
/// γ exists, so only certificates and order are checked.
SynthesisReport case_cc_pipeline(const Weights& weights, const HinfOptions& options = {});

/// γ_opt and γ_min of the benchmark at several axis shifts.
struct ShiftSensitivity {
  double beta = 0.0;
  std::vector<double> shifts;
  std::vector<double> gamma_opt;
  std::vector<double> gamma_min;
  double spread() const;  // largest change across shifts, either quantity
};

ShiftSensitivity benchmark10_shift_sensitivity(double beta, const std::vector<double>& shifts,
                                               const HinfOptions& options = {});

// ---- output ----------------------------------------------------------------

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string report_csv_header();
std::string report_csv_row(const SynthesisReport& r);

}  // namespace strongstab::bench
