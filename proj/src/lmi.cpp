#include "strongstab/lmi.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace strongstab {

std::string_view to_string(LmiStatus s) {
  switch (s) {
    case LmiStatus::Feasible: return "feasible";
    case LmiStatus::Infeasible: return "infeasible";
    case LmiStatus::Stall: return "stall";
  }
  return "?";
}

LmiProblem& LmiProblem::add_variable(MatrixVariable v) {
  if (v.rows < 1 || v.cols < 1) throw Error(ErrorCode::BadShape, "variable " + v.name + " is empty");
  if (v.kind == VariableKind::Symmetric && v.rows != v.cols) {
    throw Error(ErrorCode::BadShape, "symmetric variable " + v.name + " must be square");
  }
  if (v.positive_definite && v.kind != VariableKind::Symmetric) {
    throw Error(ErrorCode::BadShape, "definiteness requires a symmetric variable: " + v.name);
  }
  for (const auto& existing : variables) {
    if (existing.name == v.name) throw Error(ErrorCode::BadShape, "duplicate variable " + v.name);
  }
  variables.push_back(std::move(v));
  return *this;
}

LmiProblem& LmiProblem::add_constraint(AffineLmi c) {
  constraints.push_back(std::move(c));
  return *this;
}

const MatrixVariable& LmiProblem::variable(const std::string& name) const {
  for (const auto& v : variables) {
    if (v.name == name) return v;
  }
  throw Error(ErrorCode::BadShape, "unknown variable " + name);
}

namespace {

Index scalar_count(const MatrixVariable& v) {
  return v.kind == VariableKind::Symmetric ? v.rows * (v.rows + 1) / 2 : v.rows * v.cols;
}

// (row, col) of the k-th scalar of a variable.
std::pair<Index, Index> scalar_position(const MatrixVariable& v, Index k) {
  if (v.kind == VariableKind::Rectangular) return {k % v.rows, k / v.rows};
  Index j = 0;
  while ((j + 1) * (j + 2) / 2 <= k) ++j;
  return {k - j * (j + 1) / 2, j};
}

Matrix term_value(const LmiTerm& term, const Matrix& value) {
  const Matrix M = term.left * (term.transpose ? Matrix(value.transpose()) : value) * term.right;
  return M + M.transpose();
}

struct CompiledBlock {
  std::string label;
  Matrix F0;                                      // normalized, includes ε
  std::vector<std::pair<Index, Matrix>> coeffs;   // normalized
  double eps = 0.0;
  double scale = 1.0;
};

struct Compiled {
  std::vector<Index> offsets;
  Index total = 0;
  std::vector<CompiledBlock> blocks;
};

AffineLmi definiteness_constraint(const MatrixVariable& v) {
  AffineLmi c;
  c.label = v.name + " > 0";
  c.constant = Matrix::Zero(v.rows, v.rows);
  c.terms.push_back({v.name, -0.5 * Matrix::Identity(v.rows, v.rows),
                     Matrix::Identity(v.rows, v.rows), false});
  return c;
}

std::vector<AffineLmi> all_constraints(const LmiProblem& problem) {
  std::vector<AffineLmi> out = problem.constraints;
  for (const auto& v : problem.variables) {
    if (v.positive_definite) out.push_back(definiteness_constraint(v));
  }
  return out;
}

Compiled compile(const LmiProblem& problem, const LmiOptions& options) {
  Compiled out;
  for (const auto& v : problem.variables) {
    out.offsets.push_back(out.total);
    out.total += scalar_count(v);
  }
  auto index_of = [&](const std::string& name) -> Index {
    for (std::size_t i = 0; i < problem.variables.size(); ++i) {
      if (problem.variables[i].name == name) return static_cast<Index>(i);
    }
    throw Error(ErrorCode::BadShape, "constraint references unknown variable " + name);
  };

  for (const AffineLmi& lmi : all_constraints(problem)) {
    const Index d = lmi.constant.rows();
    if (d < 1 || lmi.constant.cols() != d) {
      throw Error(ErrorCode::BadShape, "constraint '" + lmi.label + "' constant must be square");
    }
    if ((lmi.constant - lmi.constant.transpose()).cwiseAbs().maxCoeff() >
        1e-9 * (1.0 + lmi.constant.cwiseAbs().maxCoeff())) {
      throw Error(ErrorCode::BadShape, "constraint '" + lmi.label + "' constant is not symmetric");
    }
    std::map<Index, Matrix> coeff;
    for (const LmiTerm& term : lmi.terms) {
      const Index vi = index_of(term.variable);
      const MatrixVariable& v = problem.variables[vi];
      const Index inner_rows = term.transpose ? v.cols : v.rows;
      const Index inner_cols = term.transpose ? v.rows : v.cols;
      if (term.left.rows() != d || term.left.cols() != inner_rows || term.right.rows() != inner_cols ||
          term.right.cols() != d) {
        throw Error(ErrorCode::BadShape, "term on " + v.name + " in '" + lmi.label +
                                             "' has incompatible coefficient shapes");
      }
      for (Index k = 0; k < scalar_count(v); ++k) {
        auto [i, j] = scalar_position(v, k);
        Matrix E = Matrix::Zero(v.rows, v.cols);
        E(i, j) = 1.0;
        if (v.kind == VariableKind::Symmetric) E(j, i) = 1.0;
        const Matrix contribution = term_value(term, E);
        if (contribution.cwiseAbs().maxCoeff() == 0.0) continue;
        auto [it, inserted] = coeff.try_emplace(out.offsets[vi] + k, contribution);
        if (!inserted) it->second += contribution;
      }
    }
    CompiledBlock block;
    block.label = lmi.label;
    const Matrix F0 = symmetric_part(lmi.constant);
    const double reference = lmi.reference_norm.value_or(frobenius_norm(F0));
    block.eps = options.eps_strict > 0.0 ? options.eps_strict
                                         : options.eps_relative * (1.0 + reference);
    block.scale = std::max(1.0, frobenius_norm(F0));
    block.F0 = (F0 + block.eps * Matrix::Identity(d, d)) / block.scale;
    for (auto& [k, M] : coeff) block.coeffs.emplace_back(k, symmetric_part(M) / block.scale);
    out.blocks.push_back(std::move(block));
  }
  return out;
}

Assignment unpack(const LmiProblem& problem, const Compiled& c, const Vector& x) {
  Assignment out;
  for (std::size_t vi = 0; vi < problem.variables.size(); ++vi) {
    const MatrixVariable& v = problem.variables[vi];
    Matrix M = Matrix::Zero(v.rows, v.cols);
    for (Index k = 0; k < scalar_count(v); ++k) {
      auto [i, j] = scalar_position(v, k);
      M(i, j) = x(c.offsets[vi] + k);
      if (v.kind == VariableKind::Symmetric) M(j, i) = x(c.offsets[vi] + k);
    }
    out.emplace(v.name, M);
  }
  return out;
}

// Log-det barrier over S_i(y) = -F_i(x) + s I (slack only in phase I) plus a
// ball constraint ‖x‖ < radius.
class Barrier {
 public:
  Barrier(const Compiled& c, bool slack, double radius)
      : blocks_(c.blocks), nx_(c.total), slack_(slack), radius2_(radius * radius) {
    for (const auto& b : blocks_) parameter_ += static_cast<double>(b.F0.rows());
    parameter_ += 1.0;
  }

  Index dim() const { return nx_ + (slack_ ? 1 : 0); }
  double parameter() const { return parameter_; }

  Matrix slack_matrix(const CompiledBlock& b, const Vector& y) const {
    Matrix S = -b.F0;
    for (const auto& [k, Fk] : b.coeffs) S.noalias() -= y(k) * Fk;
    if (slack_) S.diagonal().array() += y(nx_);
    return S;
  }

  bool value(const Vector& y, double* phi) const {
    const double d = radius2_ - y.head(nx_).squaredNorm();
    if (!(d > 0.0)) return false;
    double acc = -std::log(d);
    for (const auto& b : blocks_) {
      Eigen::LLT<Matrix> llt(slack_matrix(b, y));
      if (llt.info() != Eigen::Success) return false;
      const Vector diag = Matrix(llt.matrixL()).diagonal();
      if ((diag.array() <= 0.0).any()) return false;
      acc -= 2.0 * diag.array().log().sum();
    }
    *phi = acc;
    return std::isfinite(acc);
  }

  bool derivatives(const Vector& y, Vector* grad, Matrix* hess) const {
    const Index n = dim();
    grad->setZero(n);
    hess->setZero(n, n);
    const double d = radius2_ - y.head(nx_).squaredNorm();
    if (!(d > 0.0)) return false;
    grad->head(nx_) += 2.0 * y.head(nx_) / d;
    hess->topLeftCorner(nx_, nx_) += (2.0 / d) * Matrix::Identity(nx_, nx_) +
                                     (4.0 / (d * d)) * y.head(nx_) * y.head(nx_).transpose();

    std::vector<Index> idx;
    std::vector<Matrix> W;
    for (const auto& b : blocks_) {
      Eigen::LLT<Matrix> llt(slack_matrix(b, y));
      if (llt.info() != Eigen::Success) return false;
      const auto L = llt.matrixL();
      idx.clear();
      W.clear();
      // W_k = L⁻¹ (∂S/∂y_k) L⁻ᵀ.
      for (const auto& [k, Fk] : b.coeffs) {
        const Matrix X = L.solve(-Fk);
        W.push_back(L.solve(Matrix(X.transpose())).transpose());
        idx.push_back(k);
      }
      if (slack_) {
        const Index dsz = b.F0.rows();
        const Matrix X = L.solve(Matrix::Identity(dsz, dsz));
        W.push_back(L.solve(Matrix(X.transpose())).transpose());
        idx.push_back(nx_);
      }
      for (std::size_t a = 0; a < W.size(); ++a) {
        (*grad)(idx[a]) -= W[a].trace();
        for (std::size_t c = 0; c <= a; ++c) {
          const double v = (W[a].array() * W[c].array()).sum();
          (*hess)(idx[a], idx[c]) += v;
          if (a != c) (*hess)(idx[c], idx[a]) += v;
        }
      }
    }
    return true;
  }

 private:
  const std::vector<CompiledBlock>& blocks_;
  Index nx_;
  bool slack_;
  double radius2_;
  double parameter_ = 0.0;
};

struct CenterResult {
  bool ok = true;
  bool stalled = false;
  int steps = 0;
};

// Damped Newton centering of t·cᵀy + φ(y). `stop` is checked after every
// accepted step and ends centering early when it returns true.
template <typename Stop>
CenterResult center(const Barrier& barrier, Vector& y, const Vector& c, double t, int max_steps,
                    Stop&& stop) {
  CenterResult r;
  Vector g;
  Matrix H;
  double phi = 0.0;
  if (!barrier.value(y, &phi)) {
    r.ok = false;
    return r;
  }
  double f = t * c.dot(y) + phi;
  for (; r.steps < max_steps; ++r.steps) {
    if (!barrier.derivatives(y, &g, &H)) {
      r.ok = false;
      return r;
    }
    g += t * c;
    Eigen::LDLT<Matrix> ldlt(H);
    Vector dy = -ldlt.solve(g);
    if (ldlt.info() != Eigen::Success || !dy.allFinite()) {
      const double reg = 1e-12 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
      dy = -(H + reg * Matrix::Identity(H.rows(), H.cols())).ldlt().solve(g);
    }
    const double decrement = -g.dot(dy);
    if (decrement < 1e-10) break;
    double alpha = 1.0;
    double phi_new = 0.0;
    bool accepted = false;
    while (alpha > 1e-14) {
      const Vector trial = y + alpha * dy;
      if (barrier.value(trial, &phi_new)) {
        const double f_new = t * c.dot(trial) + phi_new;
        if (f_new <= f - 0.25 * alpha * decrement) {
          y = trial;
          f = f_new;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      r.stalled = true;
      break;
    }
    if (stop(y)) break;
  }
  return r;
}

LmiSolution make_solution(const LmiProblem& problem, const Compiled& c, const Vector& x,
                          int iterations) {
  LmiSolution sol;
  sol.assignments = unpack(problem, c, x);
  sol.margin = constraint_margin(problem, sol.assignments);
  sol.solver_iterations = iterations;
  return sol;
}

// Phase I: minimize s subject to F̂_i(x) ⪯ s I. Returns the status and leaves
// the best x in `x`.
LmiResult phase_one(const Compiled& c, const LmiOptions& options,
                    Vector& x) {
  LmiResult result;
  const Barrier barrier(c, true, options.radius);
  const Index n = c.total;
  Vector y = Vector::Zero(n + 1);
  double s0 = 0.0;
  for (const auto& b : c.blocks) {
    s0 = std::max(s0, Eigen::SelfAdjointEigenSolver<Matrix>(b.F0).eigenvalues().maxCoeff());
  }
  y(n) = s0 + 1.0;
  Vector cost = Vector::Zero(n + 1);
  cost(n) = 1.0;

  const double m = barrier.parameter();
  double t = 1.0 / (1.0 + s0);
  int total = 0;
  bool found = false;
  for (int outer = 0; outer < 200 && total < options.max_newton_steps; ++outer) {
    // Any iterate with negative slack is strictly feasible; stop there.
    const auto r = center(barrier, y, cost, t, options.max_newton_steps - total,
                          [n](const Vector& v) { return v(n) < 0.0; });
    total += r.steps;
    result.margin_trace.push_back(y(n));
    if (!r.ok) {
      result.status = LmiStatus::Stall;
      result.diagnostic = "phase I left the barrier domain";
      break;
    }
    if (y(n) < 0.0) {
      found = true;
      break;
    }
    if (y(n) - m / t > 0.0) {
      result.status = LmiStatus::Infeasible;
      result.diagnostic = "phase I lower bound on the margin is positive";
      break;
    }
    if (r.stalled && t > 1e10) {
      result.status = LmiStatus::Infeasible;
      result.diagnostic = "phase I stalled at a nonnegative margin";
      break;
    }
    if (t > 1e14) {
      result.status = LmiStatus::Infeasible;
      result.diagnostic = "phase I margin did not become negative";
      break;
    }
    t *= 8.0;
  }
  result.iterations = total;
  result.best_margin = y(n);
  x = y.head(n);
  if (found) {
    result.status = LmiStatus::Feasible;
  } else if (result.diagnostic.empty()) {
    result.status = LmiStatus::Stall;
    result.diagnostic = "phase I iteration budget exhausted";
  }
  return result;
}

}  // namespace

Matrix assemble(const AffineLmi& lmi, const Assignment& values) {
  Matrix out = lmi.constant;
  for (const LmiTerm& term : lmi.terms) {
    auto it = values.find(term.variable);
    if (it == values.end()) throw Error(ErrorCode::BadShape, "no value for " + term.variable);
    out += term_value(term, it->second);
  }
  return symmetric_part(out);
}

double constraint_margin(const LmiProblem& problem, const Assignment& values) {
  double margin = -std::numeric_limits<double>::infinity();
  for (const AffineLmi& lmi : all_constraints(problem)) {
    const Matrix M = assemble(lmi, values);
    margin = std::max(margin, Eigen::SelfAdjointEigenSolver<Matrix>(M, Eigen::EigenvaluesOnly)
                                  .eigenvalues()
                                  .maxCoeff());
  }
  return margin;
}

LmiResult solve_feasibility(const LmiProblem& problem, const LmiOptions& options) {
  const Compiled c = compile(problem, options);
  Vector x;
  LmiResult result = phase_one(c, options, x);
  if (result.feasible()) result.solution = make_solution(problem, c, x, result.iterations);
  return result;
}

LmiResult minimize(const LmiProblem& problem, const std::string& objective,
                   const LmiOptions& options) {
  const MatrixVariable& obj = problem.variable(objective);
  if (obj.rows != 1 || obj.cols != 1) {
    throw Error(ErrorCode::BadShape, "objective variable must be 1x1");
  }
  const Compiled c = compile(problem, options);
  Vector x;
  LmiResult result = phase_one(c, options, x);
  if (!result.feasible()) return result;

  Index obj_index = 0;
  for (std::size_t i = 0; i < problem.variables.size(); ++i) {
    if (problem.variables[i].name == objective) obj_index = c.offsets[i];
  }
  const Barrier barrier(c, false, options.radius);
  Vector cost = Vector::Zero(c.total);
  cost(obj_index) = 1.0;
  const double m = barrier.parameter();
  double t = m / std::max(1e-3, std::abs(x(obj_index)));
  int total = result.iterations;
  for (int outer = 0; outer < 100 && total < options.max_newton_steps; ++outer) {
    const auto r = center(barrier, x, cost, t, options.max_newton_steps - total,
                          [](const Vector&) { return false; });
    total += r.steps;
    result.margin_trace.push_back(x(obj_index));
    if (!r.ok) {
      result.status = LmiStatus::Stall;
      result.diagnostic = "phase II left the barrier domain";
      break;
    }
    if (m / t < options.gap_tol * std::max(1.0, std::abs(x(obj_index)))) break;
    t *= 10.0;
  }
  result.iterations = total;
  result.solution = make_solution(problem, c, x, total);
  return result;
}

ScalarSearchResult minimize_scalar(const std::function<LmiProblem(double)>& build, double lo,
                                   double hi, const ScalarSearchOptions& search,
                                   const LmiOptions& options) {
  if (!(lo < hi)) throw Error(ErrorCode::BadShape, "minimize_scalar: bracket must satisfy lo < hi");
  ScalarSearchResult out;
  std::optional<LmiSolution> best;
  auto probe = [&](double g) {
    const LmiResult r = solve_feasibility(build(g), options);
    out.probes.emplace_back(g, r.feasible());
    if (r.feasible()) best = r.solution;
    return r.feasible();
  };

  if (!probe(hi)) throw Error(ErrorCode::BracketInfeasible, "upper end of the bracket is infeasible");
  LmiSolution hi_solution = *best;

  // Coarse scan, low to high, to expose feasible-infeasible-feasible patterns.
  double feasible_hi = hi;
  double infeasible_lo = lo;
  bool lo_known = false;
  if (search.scan_points > 0) {
    bool seen_feasible = false;
    for (int i = 0; i < search.scan_points; ++i) {
      const double g = lo + (hi - lo) * i / search.scan_points;
      const bool ok = probe(g);
      if (ok && !seen_feasible) {
        seen_feasible = true;
        feasible_hi = g;
        hi_solution = *best;
      } else if (!ok && seen_feasible) {
        throw Error(ErrorCode::NonMonotoneDetected,
                    "feasible at " + std::to_string(feasible_hi) + " but infeasible at " +
                        std::to_string(g));
      }
      if (!ok) {
        infeasible_lo = g;
        lo_known = true;
      }
    }
  }
  if (!lo_known) {
    if (probe(lo)) {
      out.value = lo;
      out.witness = *best;
      out.infeasible_below = lo;
      return out;
    }
    infeasible_lo = lo;
  }

  double a = infeasible_lo, b = feasible_hi;
  LmiSolution witness = hi_solution;
  auto width_ok = [&] { return b - a <= search.tol * (search.relative ? b : 1.0); };
  if (!(search.tol > 0.0)) throw Error(ErrorCode::BadShape, "minimize_scalar: tol must be positive");
  for (int iter = 0; iter < 200 && !width_ok(); ++iter) {
    const double mid = 0.5 * (a + b);
    if (probe(mid)) {
      b = mid;
      witness = *best;
    } else {
      a = mid;
    }
  }
  out.value = b;
  out.witness = witness;
  out.infeasible_below = a;
  return out;
}

std::string dump(const LmiProblem& problem) {
  std::ostringstream os;
  os.precision(17);
  const Eigen::IOFormat fmt(Eigen::FullPrecision, 0, " ", "\n", "  ", "");
  for (const auto& v : problem.variables) {
    os << "variable " << v.name << ' ' << v.rows << ' ' << v.cols << ' '
       << (v.kind == VariableKind::Symmetric ? "symmetric" : "rectangular")
       << (v.positive_definite ? " pd" : "") << '\n';
  }
  for (const auto& lmi : problem.constraints) {
    os << "constraint " << lmi.label << ' ' << lmi.constant.rows() << '\n';
    os << " constant\n" << lmi.constant.format(fmt) << '\n';
    for (const auto& t : lmi.terms) {
      os << " term " << t.variable << (t.transpose ? " T" : "") << "\n  left\n"
         << t.left.format(fmt) << "\n  right\n"
         << t.right.format(fmt) << '\n';
    }
  }
  return os.str();
}

}  // namespace strongstab
