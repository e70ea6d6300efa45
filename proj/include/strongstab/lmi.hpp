#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "strongstab/numerics.hpp"

namespace strongstab {

/// Γ(A, B) := Bᵀ Aᵀ + A B, symmetrized so the result is exactly symmetric.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> gamma_shorthand(
    const Eigen::MatrixBase<DerivedA>& A, const Eigen::MatrixBase<DerivedB>& B) {
  if (A.cols() != B.rows() || A.rows() != B.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "Gamma(A, B) needs A: r x k and B: k x r");
  }
  using Plain = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Plain AB = A * B;
  Plain out = AB + AB.transpose();
  return (out + out.transpose()) / typename DerivedA::Scalar(2);
}

enum class VariableKind { Symmetric, Rectangular };

struct MatrixVariable {
  std::string name;
  Index rows = 1;
  Index cols = 1;
  VariableKind kind = VariableKind::Symmetric;
  bool positive_definite = false;
};

/// One affine term: contributes L·V·R + (L·V·R)ᵀ, or the same with Vᵀ in
/// place of V when `transpose` is set.
struct LmiTerm {
  std::string variable;
  Matrix left;
  Matrix right;
  bool transpose = false;
};

/// constant + Σ terms ≺ 0.
struct AffineLmi {
  std::string label;
  Matrix constant;
  std::vector<LmiTerm> terms;
  /// Norm the relative strictness margin refers to; defaults to
  /// ‖constant‖_F. Set it when a fixed parameter folded into the constant
  /// would otherwise change ε_i.
  std::optional<double> reference_norm;
};

struct LmiProblem {
  std::vector<MatrixVariable> variables;
  std::vector<AffineLmi> constraints;

  LmiProblem& add_variable(MatrixVariable v);
  LmiProblem& add_constraint(AffineLmi c);
  const MatrixVariable& variable(const std::string& name) const;
};

struct LmiOptions {
  /// Strictness margin: constraint i is enforced as F_i ⪯ -ε_i I with
  /// ε_i = eps_strict if positive, else eps_relative·(1 + ‖F_i0‖_F).
  double eps_strict = 0.0;
  double eps_relative = 1e-6;
  /// Relative duality-gap target for objective minimization.
  double gap_tol = 1e-9;
  /// ‖x‖ ≤ radius bound on the stacked decision vector.
  double radius = 1e8;
  int max_newton_steps = 2000;
};

using Assignment = std::map<std::string, Matrix>;

struct LmiSolution {
  Assignment assignments;
  /// Largest eigenvalue over all constraints and definiteness conditions,
  /// recomputed from the assembled matrices.
  double margin = 0.0;
  int solver_iterations = 0;
};

enum class LmiStatus { Feasible, Infeasible, Stall };

std::string_view to_string(LmiStatus s);

/// Outcome of a solve. Infeasible and Stall are values, not exceptions.
struct LmiResult {
  LmiStatus status = LmiStatus::Infeasible;
  std::optional<LmiSolution> solution;
  /// Phase-I slack: the smallest t found with F_i + ε_i I ⪯ t I
  /// (normalized units); negative iff feasible.
  double best_margin = 0.0;
  std::vector<double> margin_trace;
  std::string diagnostic;
  int iterations = 0;

  bool feasible() const { return status == LmiStatus::Feasible; }
};

/// Assembles a constraint at an assignment (independent of the solver).
Matrix assemble(const AffineLmi& lmi, const Assignment& values);

/// Largest eigenvalue across every constraint and definiteness-tagged
/// variable (for those, of -V).
double constraint_margin(const LmiProblem& problem, const Assignment& values);

LmiResult solve_feasibility(const LmiProblem& problem, const LmiOptions& options = {});

/// Minimizes a scalar (1x1) variable subject to the constraints.
LmiResult minimize(const LmiProblem& problem, const std::string& objective,
                   const LmiOptions& options = {});

/// Bisection over a scalar parameter on which the constraints depend.
struct ScalarSearchResult {
  double value = 0.0;              // smallest feasible probe
  LmiSolution witness;             // solution at `value`
  double infeasible_below = 0.0;   // largest infeasible probe under `value`
  std::vector<std::pair<double, bool>> probes;
};

struct ScalarSearchOptions {
  double tol = 1e-4;
  bool relative = false;
  int scan_points = 6;  // coarse pre-scan used to detect non-monotonicity
};

ScalarSearchResult minimize_scalar(const std::function<LmiProblem(double)>& build, double lo,
                                   double hi, const ScalarSearchOptions& search,
                                   const LmiOptions& options = {});

/// Plain-text dump of every constraint's constant and term matrices.
std::string dump(const LmiProblem& problem);

}  // namespace strongstab
