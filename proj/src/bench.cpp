#include "strongstab/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

namespace strongstab::bench {

namespace {

using Clock = std::chrono::steady_clock;

/// Controllable canonical form of num_i(s) / den(s), den monic of degree n
/// and every numerator of degree < n.
StateSpace companion(const Polynomial& den, const std::vector<Polynomial>& nums) {
  const Polynomial d = trim(den);
  const int n = degree(d);
  const double lead = d.front();
  Matrix A = Matrix::Zero(n, n);
  A.topRightCorner(n - 1, n - 1).setIdentity();
  for (int k = 0; k < n; ++k) A(n - 1, k) = -d[n - k] / lead;
  Matrix B = Matrix::Zero(n, 1);
  B(n - 1, 0) = 1.0;
  Matrix C = Matrix::Zero(static_cast<Index>(nums.size()), n);
  for (std::size_t i = 0; i < nums.size(); ++i) {
    const Polynomial num = trim(nums[i]);
    if (degree(num) >= n) throw Error(ErrorCode::ImproperTransfer, "companion: numerator too high");
    for (int k = 0; k <= degree(num); ++k) C(i, k) = num[num.size() - 1 - k] / lead;
  }
  return StateSpace(A, B, C, Matrix::Zero(C.rows(), 1));
}

StateSpace siso(const Polynomial& num, const Polynomial& den) {
  return tf_to_ss(TransferMatrix(1, 1, {{num, den}}));
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

SynthesisReport run_case(std::string name, const GeneralizedPlant& P, bool with_structured,
                         const HinfOptions& options) {
  const auto t0 = Clock::now();
  SynthesisReport rep;
  rep.name = std::move(name);
  rep.plant_order = P.states();
  const MinGammaResult r = min_gamma_stable(P, std::nullopt, std::nullopt, options);
  rep.gamma_opt = r.gamma_opt;
  rep.gamma_min = r.gamma;
  rep.controller = r.best.controller;
  rep.controller_order = r.best.controller.states();
  rep.certificates = r.best.certificates;
  rep.probes = r.probes;
  rep.non_monotone = r.non_monotone;
  if (with_structured) {
    HinfOptions structured = options;
    structured.inner_variant = Lemma1Variant::Structured;
    try {
      rep.gamma_structured = min_gamma_stable(P, std::nullopt, std::nullopt, structured).gamma;
    } catch (const Error& e) {
      rep.gamma_structured = std::numeric_limits<double>::infinity();
      rep.notes += std::string("structured baseline: ") + e.what() + "; ";
    }
  }
  if (r.non_monotone) rep.notes += "non-monotone feasibility in gamma observed; ";
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

}  // namespace

bool SynthesisReport::passed() const {
  if (!certificates_hold()) return false;
  for (const Expectation& e : expectations) {
    if (!e.pass()) return false;
  }
  return true;
}

GeneralizedPlant lee_soh_plant() {
  Matrix A(2, 2), B1(2, 2), B2(2, 1), C1(2, 2), C2(1, 2), D12(2, 1), D21(1, 2);
  A << -2, 1.7321,
       1.7321, 0;
  B1 << 0.1, -0.1,
        -0.5, 0.5;
  B2 << 1, 0;
  C1 << 0.2, -1,
        0, 0;
  C2 << 10, 11.5470;
  D12 << 0, 1;
  D21 << 0.7071, 0.7071;
  return GeneralizedPlant::from_blocks(A, B1, B2, C1, C2, Matrix::Zero(2, 2), D12, D21);
}

GeneralizedPlant benchmark10_plant(double beta, double axis_shift) {
  const Polynomial den{1, 0.161, 6, 0.582, 9.984, 0.407, 3.9822, 0, 0};
  const Polynomial n_z{0.03, 0.008, 0.19, 0.037, 0.36, 0.05, 0.18, 0.015};
  const Polynomial n_y{0.0064, 0.0024, 0.071, 1, 0.1045, 1};
  const StateSpace G = companion(den, {n_z, n_y});
  const Index n = G.states();
  const Matrix A = G.A - axis_shift * Matrix::Identity(n, n);
  Matrix B1(n, 2), C1(2, n), D12(2, 1), D21(1, 2);
  B1 << G.B, Matrix::Zero(n, 1);
  C1 << G.C.row(0), Matrix::Zero(1, n);
  D12 << 0, beta;
  D21 << 0, 1;
  return GeneralizedPlant::from_blocks(A, B1, G.B, C1, G.C.row(1), Matrix::Zero(2, 2), D12, D21);
}

GeneralizedPlant mixed_sensitivity_plant(const StateSpace& P, const StateSpace& W1,
                                         const StateSpace& W2) {
  if (P.inputs() != 1 || P.outputs() != 1 || W1.inputs() != 1 || W1.outputs() != 1 ||
      W2.inputs() != 1 || W2.outputs() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "mixed sensitivity: SISO plant and weights only");
  }
  if (P.D(0, 0) != 0.0) {
    throw Error(ErrorCode::AssumptionViolated, "mixed sensitivity: P must be strictly proper");
  }
  const Index np = P.states(), n1 = W1.states(), n2 = W2.states(), n = np + n1 + n2;
  Matrix A = Matrix::Zero(n, n);
  A.topLeftCorner(np, np) = P.A;
  A.block(np, 0, n1, np) = -W1.B * P.C;
  A.block(np, np, n1, n1) = W1.A;
  A.bottomRightCorner(n2, n2) = W2.A;
  Matrix B1 = Matrix::Zero(n, 1), B2 = Matrix::Zero(n, 1);
  B1.block(np, 0, n1, 1) = W1.B;
  B2.topRows(np) = P.B;
  B2.bottomRows(n2) = W2.B;
  Matrix C1 = Matrix::Zero(2, n), C2 = Matrix::Zero(1, n);
  C1.block(0, 0, 1, np) = -W1.D * P.C;
  C1.block(0, np, 1, n1) = W1.C;
  C1.block(1, np + n1, 1, n2) = W2.C;
  C2.leftCols(np) = -P.C;
  Matrix D11(2, 1), D12(2, 1);
  D11 << W1.D(0, 0), 0;
  D12 << 0, W2.D(0, 0);
  return GeneralizedPlant::from_blocks(A, B1, B2, C1, C2, D11, D12, Matrix::Identity(1, 1));
}

GeneralizedPlant siso_mixed_sensitivity_plant() {
  const StateSpace P = siso(from_roots({-5.0, 1.0, 5.0}),
                            from_roots({{-2.0, 1.0}, {-2.0, -1.0}, 20.0, 30.0}));
  const StateSpace W1 = siso({1}, {1, 1});
  const StateSpace W2 = StateSpace::gain(Matrix::Constant(1, 1, 0.2));
  return mixed_sensitivity_plant(P, W1, W2);
}

StateSpace cc_plant() {
  return siso({1, 0.1, 0.1}, multiply(from_roots({0.1, 1.0}), {1, 2, 3}));
}

TransferMatrix g1(double alpha) {
  const Polynomial den = from_roots({{-2.0, 1.0}, {-2.0, -1.0}, alpha, 20.0});
  return TransferMatrix(2, 1, {{from_roots({-5.0, 1.0, 5.0}), den},
                               {from_roots({-1.0, 1.0, 5.0}), den}});
}

TransferMatrix g2(double alpha) {
  const Polynomial den = from_roots({{-2.0, 1.0}, {-2.0, -1.0}, 1.0, 5.0});
  const Polynomial pair = from_roots({{2.0, alpha}, {2.0, -alpha}});
  return TransferMatrix(2, 1, {{multiply({1, 1}, pair), den}, {multiply({1, 5}, pair), den}});
}

bool SweepRow::dominance_holds(double rel_tol) const {
  if (!std::isfinite(gamma_lmi) || !std::isfinite(gamma_structured)) return true;
  return gamma_lmi <= gamma_structured * (1.0 + rel_tol);
}

std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> out;
  if (points <= 0) return out;
  if (points == 1) return {lo};
  for (int i = 0; i < points; ++i) out.push_back(lo + (hi - lo) * i / (points - 1));
  return out;
}

std::vector<double> default_alpha_grid(SweepPlant which, int points) {
  return which == SweepPlant::G1 ? linspace(5.5, 40.0, points) : linspace(1.0, 20.0, points);
}

std::vector<SweepRow> case_g1_g2_sweep(SweepPlant which, const std::vector<double>& alphas,
                                       const StrongStabOptions& options) {
  std::vector<SweepRow> rows;
  rows.reserve(alphas.size());
  for (double alpha : alphas) {
    SweepRow row;
    row.alpha = alpha;
    std::vector<std::string> failures;
    try {
      const StateSpace ss = tf_to_ss(which == SweepPlant::G1 ? g1(alpha) : g2(alpha));
      row.pip = check_pip(ss).satisfied;
      const PlantTriple plant = PlantTriple::from(ss);
      try {
        row.gamma_lmi = strong_stabilize(plant, std::nullopt, true, options).gamma_K;
      } catch (const Error& e) {
        failures.push_back(std::string("lmi: ") + e.what());
      }
      try {
        row.gamma_structured = structured_baseline(plant, std::nullopt, true, options).gamma_K;
      } catch (const Error& e) {
        failures.push_back(std::string("structured: ") + e.what());
      }
    } catch (const Error& e) {
      failures.push_back(e.what());
    }
    row.status = failures.empty() ? "ok" : failures.front();
    rows.push_back(std::move(row));
  }
  return rows;
}

SynthesisReport case_lee_soh(const HinfOptions& options) {
  SynthesisReport rep = run_case("lee-soh", lee_soh_plant(), false, options);
  rep.expectations = {
      {"gamma_opt", 1.2929, 0.001, rep.gamma_opt},
      {"gamma_min", 1.36957, 0.01, rep.gamma_min},
      {"controller_order", 4, 0, static_cast<double>(rep.controller_order)},
  };
  return rep;
}

SynthesisReport case_benchmark10(double beta, double axis_shift, const HinfOptions& options) {
  SynthesisReport rep = run_case("benchmark10", benchmark10_plant(beta, axis_shift), false, options);
  rep.parameters = {{"beta", beta}, {"axis_shift", axis_shift}};
  struct Row {
    double beta, gamma_opt, gamma_go;
  };
  static constexpr Row kTable[] = {{0.1, 0.232, 0.241}, {0.01, 0.142, 0.176}, {0.001, 0.122, 0.170}};
  for (const Row& row : kTable) {
    if (std::abs(row.beta - beta) > 1e-12 * row.beta) continue;
    rep.expectations = {
        {"gamma_opt", row.gamma_opt, 0.005, rep.gamma_opt},
        {"gamma_min", row.gamma_go, 0.01, rep.gamma_min},
    };
  }
  rep.expectations.push_back({"controller_order", 16, 0, static_cast<double>(rep.controller_order)});
  return rep;
}

SynthesisReport case_siso_mixed_sensitivity(bool with_structured, const HinfOptions& options) {
  SynthesisReport rep =
      run_case("siso-mixed-sensitivity", siso_mixed_sensitivity_plant(), with_structured, options);
  rep.expectations = {
      {"gamma_opt", 34.24, 0.1, rep.gamma_opt},
      {"gamma_min", 35.29, 0.5, rep.gamma_min, Expectation::Sense::AtMost},
  };
  if (with_structured) {
    // The baseline stands in for a different Riccati-based method, so only
    // a band around that method's published value is meaningful.
    rep.expectations.push_back({"gamma_structured", 42.5, 4.5, rep.gamma_structured});
  }
  return rep;
}

SynthesisReport case_cc_pipeline(const Weights& weights, const HinfOptions& options) {
  if (!weights.W1 || !weights.W2) {
    throw Error(ErrorCode::MissingWeights,
                "cc pipeline needs user-supplied W1 and W2; no published weights are available");
  }
  const GeneralizedPlant P = mixed_sensitivity_plant(cc_plant(), *weights.W1, *weights.W2);
  SynthesisReport rep = run_case("cc-pipeline", P, false, options);
  rep.expectations = {{"controller_order", 2.0 * static_cast<double>(P.states()), 0,
                       static_cast<double>(rep.controller_order)}};
  return rep;
}

double ShiftSensitivity::spread() const {
  auto range = [](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
  };
  return std::max(range(gamma_opt), range(gamma_min));
}

ShiftSensitivity benchmark10_shift_sensitivity(double beta, const std::vector<double>& shifts,
                                               const HinfOptions& options) {
  ShiftSensitivity out;
  out.beta = beta;
  for (double eps : shifts) {
    const MinGammaResult r =
        min_gamma_stable(benchmark10_plant(beta, eps), std::nullopt, std::nullopt, options);
    out.shifts.push_back(eps);
    out.gamma_opt.push_back(r.gamma_opt);
    out.gamma_min.push_back(r.gamma);
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "alpha,pip,gamma_k_lmi,gamma_k_structured,dominance,status\n";
  for (const SweepRow& r : rows) {
    std::string status = r.status;
    for (char& c : status) {
      if (c == ',' || c == '\n') c = ';';
    }
    os << fmt(r.alpha) << ',' << (r.pip ? "true" : "false") << ',' << fmt(r.gamma_lmi) << ','
       << fmt(r.gamma_structured) << ',' << (r.dominance_holds() ? "true" : "false") << ','
       << status << '\n';
  }
  return os.str();
}

std::string report_csv_header() {
  return "case,parameters,plant_order,controller_order,gamma_opt,gamma_min,gamma_structured,"
         "closed_loop_norm,controller_abscissa,closed_loop_abscissa,runtime_s,pass";
}

std::string report_csv_row(const SynthesisReport& r) {
  std::ostringstream os;
  os << r.name << ',';
  bool first = true;
  for (const auto& [k, v] : r.parameters) {
    os << (first ? "" : ";") << k << '=' << fmt(v);
    first = false;
  }
  os << ',' << r.plant_order << ',' << r.controller_order << ',' << fmt(r.gamma_opt) << ','
     << fmt(r.gamma_min) << ',' << fmt(r.gamma_structured) << ','
     << fmt(r.certificates.closed_loop_norm) << ',' << fmt(r.certificates.controller_abscissa)
     << ',' << fmt(r.certificates.closed_loop_abscissa) << ',' << fmt(r.runtime_seconds) << ','
     << (r.passed() ? "pass" : "fail");
  return os.str();
}

}  // namespace strongstab::bench
