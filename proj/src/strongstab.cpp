#include "strongstab/strongstab.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace strongstab {

namespace {

constexpr const char* kGammaVar = "gamma_K";

/// γ·M for a scalar variable γ and symmetric M, as a sum of rank-one terms
/// (½ λ_i v_i) γ v_iᵀ + transpose.
void append_scaled(std::vector<LmiTerm>& terms, const std::string& var, const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric_part(M));
  const double drop = 1e-14 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  for (Index i = 0; i < M.rows(); ++i) {
    const double lambda = es.eigenvalues()(i);
    if (std::abs(lambda) <= drop) continue;
    const Vector v = es.eigenvectors().col(i);
    terms.push_back({var, 0.5 * lambda * v, v.transpose(), false});
  }
}

Matrix selector(Index total, Index offset, Index size) {
  Matrix E = Matrix::Zero(total, size);
  E.block(offset, 0, size, size).setIdentity();
  return E;
}

void check_triple(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& X) {
  require_square(A, "A");
  const Index n = A.rows();
  if (B.rows() != n || C.cols() != n || X.rows() != n || X.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "Lemma 1: A, B, C, X dimensions disagree");
  }
}

Matrix x_k_inverse_times(const Matrix& X_K, const Matrix& rhs) {
  Eigen::LLT<Matrix> llt(X_K);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::Infeasible, "X_K lost positive definiteness; LMI margin too small");
  }
  return llt.solve(rhs);
}

StrongStabResult finish(const PlantTriple& plant, const RiccatiSolution& ric, const LmiProblem& lmis,
                        const LmiSolution& sol, double gamma_K, Lemma1Variant variant,
                        const StrongStabOptions& options) {
  const Index n = plant.states();
  StrongStabResult out;
  out.variant = variant;
  out.X = ric.X;
  out.X_K = symmetric_part(sol.assignments.at("X_K"));
  if (variant == Lemma1Variant::Structured) {
    out.Z = -gamma_K * plant.C.transpose();
  } else {
    out.Z = sol.assignments.at("Z");
  }
  out.gamma_K = gamma_K;
  out.gamma_K_infeasible_below = std::numeric_limits<double>::quiet_NaN();
  out.solver_iterations = sol.solver_iterations;

  out.A_X = plant.A - plant.B * plant.B.transpose() * out.X;
  const Matrix& A_X = out.A_X;
  const Matrix XkinvZ = x_k_inverse_times(out.X_K, out.Z);
  const Matrix A_K = A_X + XkinvZ * plant.C;
  const Matrix B_K = -XkinvZ;
  const Matrix C_K = -plant.B.transpose() * out.X;
  out.controller = StateSpace(A_K, B_K, C_K, Matrix::Zero(plant.B.cols(), plant.C.rows()));

  StrongStabCertificates& cert = out.certificates;
  cert.A_X_abscissa = spectral_abscissa(A_X);
  out.A_Z = plant.A + XkinvZ * plant.C;
  const Matrix& A_Z = out.A_Z;
  cert.A_Z_abscissa = spectral_abscissa(A_Z);
  cert.controller_abscissa = spectral_abscissa(A_K);
  Matrix A_cl(2 * n, 2 * n);
  A_cl << plant.A, plant.B * C_K,
          B_K * plant.C, A_K;
  const ComplexVector cl_eigs = eigenvalues(A_cl);
  cert.closed_loop_abscissa = cl_eigs.size() ? cl_eigs.real().maxCoeff() : 0.0;
  ComplexVector split(2 * n);
  split << eigenvalues(A_X), eigenvalues(A_Z);
  cert.spectrum_split_error = spectrum_distance(cl_eigs, split);
  cert.controller_hinf_norm = cert.controller_abscissa < 0.0
                                  ? hinf_norm(out.controller, options.hinf_rel_tol)
                                  : std::numeric_limits<double>::quiet_NaN();
  cert.lmi_margin = constraint_margin(lmis, sol.assignments);
  cert.riccati_residual = ric.residual;
  return out;
}

[[noreturn]] void throw_infeasible(const LmiResult& r, const std::string& what) {
  std::string msg = what + " infeasible (" + std::string(to_string(r.status)) + ", phase-I margin " +
                    std::to_string(r.best_margin) + "); " + kSufficiencyNote;
  if (!r.diagnostic.empty()) msg += " [" + r.diagnostic + "]";
  throw Error(ErrorCode::Infeasible, msg);
}

StrongStabResult solve_lemma1(const PlantTriple& plant, std::optional<double> gamma_K,
                              bool minimize_bound, Lemma1Variant variant,
                              const StrongStabOptions& options) {
  if (!minimize_bound && !gamma_K) {
    throw Error(ErrorCode::BadShape, "a norm bound gamma_K is required unless minimizing");
  }
  if (gamma_K && !(*gamma_K > 0.0)) {
    throw Error(ErrorCode::BadShape, "gamma_K must be positive");
  }
  const RiccatiSolution ric = solve_stabilizing_riccati(plant.A, plant.B, options.riccati);
  check_triple(plant.A, plant.B, plant.C, ric.X);

  if (!minimize_bound) {
    const LmiProblem lmis = build_lemma1_lmis(plant.A, plant.B, plant.C, ric.X, gamma_K, variant);
    const LmiResult r = solve_feasibility(lmis, options.lmi);
    if (!r.feasible()) throw_infeasible(r, "Lemma 1 LMIs");
    return finish(plant, ric, lmis, *r.solution, *gamma_K, variant, options);
  }

  // γ_K enters affinely, so it is minimized directly as a decision variable.
  // The upper bracket end caps the search; a witness just below the optimum
  // is checked infeasible as a certificate.
  LmiProblem lmis = build_lemma1_lmis(plant.A, plant.B, plant.C, ric.X, std::nullopt, variant);
  {
    AffineLmi cap;
    cap.label = "gamma_K <= gamma_hi";
    cap.constant = Matrix::Constant(1, 1, -options.gamma_hi);
    cap.terms.push_back({kGammaVar, Matrix::Constant(1, 1, 0.5), Matrix::Identity(1, 1), false});
    lmis.add_constraint(std::move(cap));
  }
  const LmiResult r = minimize(lmis, kGammaVar, options.lmi);
  if (!r.feasible()) {
    throw_infeasible(r, "Lemma 1 LMIs for gamma_K in [" + std::to_string(options.gamma_lo) + ", " +
                            std::to_string(options.gamma_hi) + "]");
  }
  const double best = r.solution->assignments.at(kGammaVar)(0, 0);
  // The minimizer sits on the boundary of the feasible set, where X_K is
  // close to singular and the controller badly conditioned. A feasibility
  // solve at a bound rel_tol above the optimum returns an interior point.
  const double relaxed = best * (1.0 + options.rel_tol);
  const LmiProblem fixed = build_lemma1_lmis(plant.A, plant.B, plant.C, ric.X, relaxed, variant);
  const LmiResult interior = solve_feasibility(fixed, options.lmi);
  StrongStabResult out = interior.feasible()
                             ? finish(plant, ric, fixed, *interior.solution, relaxed, variant, options)
                             : finish(plant, ric, lmis, *r.solution, best, variant, options);

  const double below = best * (1.0 - options.rel_tol);
  if (below > 0.0) {
    const LmiProblem probe = build_lemma1_lmis(plant.A, plant.B, plant.C, ric.X, below, variant);
    const LmiResult pr = solve_feasibility(probe, options.lmi);
    if (pr.status == LmiStatus::Infeasible) out.gamma_K_infeasible_below = below;
  }
  return out;
}

}  // namespace

LmiProblem build_lemma1_lmis(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& X,
                             std::optional<double> gamma_K, Lemma1Variant variant) {
  check_triple(A, B, C, X);
  const Index n = A.rows(), m = B.cols(), p = C.rows();
  const Matrix A_X = A - B * B.transpose() * X;
  const bool structured = variant == Lemma1Variant::Structured;

  LmiProblem prob;
  prob.add_variable({"X_K", n, n, VariableKind::Symmetric, true});
  if (!structured) prob.add_variable({"Z", n, p, VariableKind::Rectangular, false});
  if (!gamma_K) prob.add_variable({kGammaVar, 1, 1, VariableKind::Symmetric, false});

  // Γ(X_K, M) + Γ(Z, C) embedded in the leading n x n block of a d x d matrix.
  auto lyapunov_block = [&](const Matrix& M, Index d, AffineLmi& lmi) {
    const Matrix E1 = selector(d, 0, n);
    lmi.terms.push_back({"X_K", E1, M * E1.transpose(), false});
    const Matrix CtC = C.transpose() * C;
    if (!structured) {
      lmi.terms.push_back({"Z", E1, C * E1.transpose(), false});
    } else if (gamma_K) {
      lmi.constant.topLeftCorner(n, n) -= 2.0 * *gamma_K * CtC;
    } else {
      Matrix big = Matrix::Zero(d, d);
      big.topLeftCorner(n, n) = -2.0 * CtC;
      append_scaled(lmi.terms, kGammaVar, big);
    }
  };

  {
    AffineLmi open_loop;
    open_loop.label = "Gamma(X_K, A) + Gamma(Z, C) < 0";
    open_loop.constant = Matrix::Zero(n, n);
    open_loop.reference_norm = 0.0;
    lyapunov_block(A, n, open_loop);
    prob.add_constraint(std::move(open_loop));
  }

  if (variant == Lemma1Variant::StabilityOnly) {
    AffineLmi shifted;
    shifted.label = "Gamma(X_K, A_X) + Gamma(Z, C) < 0";
    shifted.constant = Matrix::Zero(n, n);
    shifted.reference_norm = 0.0;
    lyapunov_block(A_X, n, shifted);
    prob.add_constraint(std::move(shifted));
    return prob;
  }

  const Index d = n + p + m;
  AffineLmi brl;
  brl.label = "bounded-real block LMI";
  brl.constant = Matrix::Zero(d, d);
  const Matrix XB = X * B;
  brl.constant.block(0, n + p, n, m) = -XB;
  brl.constant.block(n + p, 0, m, n) = -XB.transpose();
  // Same ε whether γ_K is fixed (and folded into the constant) or a variable.
  brl.reference_norm = brl.constant.norm();
  lyapunov_block(A_X, d, brl);
  const Matrix E1 = selector(d, 0, n), E2 = selector(d, n, p);
  Matrix gamma_pattern = Matrix::Zero(d, d);
  gamma_pattern.bottomRightCorner(p + m, p + m) = -Matrix::Identity(p + m, p + m);
  if (structured) {
    // -Z = γ_K Cᵀ in the (1,2) block.
    gamma_pattern.block(0, n, n, p) = C.transpose();
    gamma_pattern.block(n, 0, p, n) = C;
  } else {
    brl.terms.push_back({"Z", -E1, E2.transpose(), false});
  }
  if (gamma_K) {
    brl.constant += *gamma_K * gamma_pattern;
  } else {
    append_scaled(brl.terms, kGammaVar, gamma_pattern);
  }
  prob.add_constraint(std::move(brl));
  return prob;
}

StrongStabResult strong_stabilize(const PlantTriple& plant, std::optional<double> gamma_K,
                                  bool minimize_bound, const StrongStabOptions& options) {
  return solve_lemma1(plant, gamma_K, minimize_bound, Lemma1Variant::Full, options);
}

StrongStabResult strong_stabilize_stability_only(const PlantTriple& plant,
                                                 const StrongStabOptions& options) {
  const RiccatiSolution ric = solve_stabilizing_riccati(plant.A, plant.B, options.riccati);
  const LmiProblem lmis = build_lemma1_lmis(plant.A, plant.B, plant.C, ric.X, std::nullopt,
                                            Lemma1Variant::StabilityOnly);
  const LmiResult r = solve_feasibility(lmis, options.lmi);
  if (!r.feasible()) throw_infeasible(r, "stability-only LMIs");
  return finish(plant, ric, lmis, *r.solution, std::numeric_limits<double>::infinity(),
                Lemma1Variant::StabilityOnly, options);
}

StrongStabResult structured_baseline(const PlantTriple& plant, std::optional<double> gamma_K,
                                     bool minimize_bound, const StrongStabOptions& options) {
  return solve_lemma1(plant, gamma_K, minimize_bound, Lemma1Variant::Structured, options);
}

ParameterizationSeed parameterize(const StrongStabResult& result, const PlantTriple& plant,
                                  double hinf_rel_tol) {
  const Index n = plant.states(), m = plant.B.cols(), p = plant.C.rows();
  const Matrix XkinvZ = x_k_inverse_times(result.X_K, result.Z);
  const Matrix A0 = result.A_X + XkinvZ * plant.C;
  Matrix B0(n, p + m), C0(m + p, n), D0 = Matrix::Zero(m + p, p + m);
  B0 << -XkinvZ, plant.B;
  C0 << -plant.B.transpose() * result.X, -plant.C;
  D0.topRightCorner(m, m).setIdentity();
  D0.bottomLeftCorner(p, p).setIdentity();

  ParameterizationSeed seed;
  seed.K0 = GeneralizedPlant(StateSpace(A0, B0, C0, D0), p, m, m, p);
  // With y = 0, Q closes the loop η → r = -C (sI - A0)⁻¹ B η inside K⁰.
  if (!is_hurwitz(A0)) {
    throw Error(ErrorCode::UnstableSystem, "A_X + X_K^-1 Z C is not Hurwitz; no parameterization");
  }
  const double norm = hinf_norm(StateSpace(A0, plant.B, plant.C, Matrix::Zero(p, m)), hinf_rel_tol);
  seed.gamma_Q = norm > 0.0 ? 1.0 / norm : std::numeric_limits<double>::infinity();
  return seed;
}

double spectrum_distance(const ComplexVector& a, const ComplexVector& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    Index best = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double dj = std::abs(a(i) - b(j));
      if (dj < dist) {
        dist = dj;
        best = j;
      }
    }
    used[best] = true;
    worst = std::max(worst, dist / (1.0 + std::abs(a(i))));
  }
  return worst;
}

}  // namespace strongstab
