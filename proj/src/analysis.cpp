#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "strongstab/sysmodel.hpp"

namespace strongstab {

std::string_view to_string(Assumption a) {
  switch (a) {
    case Assumption::A1: return "A.1";
    case Assumption::A2: return "A.2";
    case Assumption::A3: return "A.3";
    case Assumption::A4: return "A.4";
  }
  return "?";
}

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> out(points);
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < points; ++i) {
    out[i] = std::pow(10.0, points == 1 ? a : a + (b - a) * i / (points - 1));
  }
  return out;
}

double sweep_peak_gain(const StateSpace& S, const std::vector<double>& omegas) {
  double peak = 0.0;
  for (double w : omegas) peak = std::max(peak, sigma_max(S.evaluate({0.0, w})));
  return peak;
}

Vector hankel_singular_values(const StateSpace& S) {
  if (S.states() == 0) return Vector(0);
  // A Wc + Wc Aᵀ + B Bᵀ = 0 and Aᵀ Wo + Wo A + Cᵀ C = 0.
  const Matrix Wc = solve_lyapunov(S.A.transpose(), S.B * S.B.transpose());
  const Matrix Wo = solve_lyapunov(S.A, S.C.transpose() * S.C);
  Vector hsv = eigenvalues(Wc * Wo).real().cwiseMax(0.0).cwiseSqrt();
  std::sort(hsv.data(), hsv.data() + hsv.size(), std::greater<>());
  return hsv;
}

double hinf_norm(const StateSpace& S, double rel_tol) {
  const double dnorm = sigma_max(S.D);
  if (S.states() == 0) return dnorm;
  if (!S.A.allFinite() || !is_hurwitz(S.A)) {
    throw Error(ErrorCode::UnstableSystem, "hinf_norm requires a Hurwitz A matrix");
  }
  auto gain_at = [&](double w) { return sigma_max(S.evaluate({0.0, w})); };

  double lo = std::max(dnorm, gain_at(0.0));
  for (const Complex& ev : eigenvalues(S.A)) {
    lo = std::max({lo, gain_at(std::abs(ev)), gain_at(std::abs(ev.imag()))});
  }
  double hi = dnorm + 2.0 * hankel_singular_values(S).sum();
  if (hi <= kAbsoluteFloor) return 0.0;
  hi = std::max(hi, lo * (1.0 + 4.0 * rel_tol));

  const Index n = S.states(), m = S.inputs(), p = S.outputs();
  const Matrix& A = S.A;
  const Matrix& B = S.B;
  const Matrix& C = S.C;
  const Matrix& D = S.D;
  for (int iter = 0; iter < 200 && hi - lo > 2.0 * rel_tol * lo; ++iter) {
    const double gamma = lo > 0.0 ? 0.5 * (lo + hi) : 0.5 * hi;
    // Hamiltonian whose imaginary-axis eigenvalues are the frequencies at
    // which σ_max(S(jω)) = γ.
    const Matrix R = gamma * gamma * Matrix::Identity(m, m) - D.transpose() * D;
    Eigen::LLT<Matrix> llt(R);
    if (llt.info() != Eigen::Success) {
      lo = gamma;
      continue;
    }
    const Matrix Ah = A + B * llt.solve(D.transpose() * C);
    Matrix H(2 * n, 2 * n);
    H << Ah, B * llt.solve(B.transpose()),
         -C.transpose() * (Matrix::Identity(p, p) + D * llt.solve(D.transpose())) * C,
         -Ah.transpose();
    const ComplexVector ev = eigenvalues(H);
    const double thresh = 1e-7 * std::max(1.0, H.norm());
    // Candidate crossings are confirmed by evaluating the gain there; a
    // confirmed crossing proves ‖S‖∞ ≥ γ, and the peak lies between
    // consecutive crossings, so the midpoints give the next lower bound.
    std::vector<double> crossings;
    for (const Complex& e : ev) {
      if (std::abs(e.real()) > thresh) continue;
      const double w = std::abs(e.imag());
      const double g = gain_at(w);
      lo = std::max(lo, g);
      if (g >= gamma * (1.0 - 1e-6)) crossings.push_back(w);
    }
    if (crossings.empty()) {
      hi = gamma;
      continue;
    }
    std::sort(crossings.begin(), crossings.end());
    lo = std::max(lo, gamma);
    for (std::size_t i = 0; i + 1 < crossings.size(); ++i) {
      lo = std::max(lo, gain_at(0.5 * (crossings[i] + crossings[i + 1])));
    }
    hi = std::max(hi, lo);
  }
  return 0.5 * (lo + hi);
}

namespace {

Matrix rosenbrock(const StateSpace& S) {
  const Index n = S.states();
  Matrix M(n + S.outputs(), n + S.inputs());
  M << S.A, S.B, S.C, S.D;
  return M;
}

ComplexVector square_pencil_zeros(const StateSpace& S) {
  const Index n = S.states(), m = S.inputs();
  const Matrix M = rosenbrock(S);
  Matrix N = Matrix::Zero(n + m, n + m);
  N.topLeftCorner(n, n).setIdentity();
  Eigen::GeneralizedEigenSolver<Matrix> ges;
  ges.compute(M, N, false);
  if (ges.info() != Eigen::Success) {
    throw Error(ErrorCode::NonConvergence, "QZ iteration on the Rosenbrock pencil failed");
  }
  const ComplexVector alphas = ges.alphas();
  const Vector betas = ges.betas();
  const double scale = std::max(1.0, M.norm());
  std::vector<Complex> zeros;
  for (Index i = 0; i < alphas.size(); ++i) {
    const double a = std::abs(alphas(i)), b = std::abs(betas(i));
    if (a <= 1e-9 * scale && b <= 1e-9) {
      throw Error(ErrorCode::DegeneratePencil,
                  "Rosenbrock pencil is singular for every λ (rank-deficient transfer matrix)");
    }
    if (a <= 1e8 * b) zeros.push_back(alphas(i) / betas(i));
  }
  return Eigen::Map<ComplexVector>(zeros.data(), static_cast<Index>(zeros.size()));
}

double rosenbrock_sigma_min(const StateSpace& S, Complex lambda) {
  ComplexMatrix P = rosenbrock(S).cast<Complex>();
  P.topLeftCorner(S.states(), S.states()).diagonal().array() -= lambda;
  const Vector sv = Eigen::JacobiSVD<ComplexMatrix>(P).singularValues();
  return sv(sv.size() - 1);
}

}  // namespace

ComplexVector transmission_zeros(const StateSpace& S) {
  const Index n = S.states(), m = S.inputs(), p = S.outputs();
  if (n == 0) return ComplexVector(0);
  if (p == m) return square_pencil_zeros(S);
  if (p < m) {
    return transmission_zeros(StateSpace(S.A.transpose(), S.C.transpose(), S.B.transpose(),
                                         S.D.transpose()));
  }
  // Tall: compress the outputs with a fixed random orthonormal projection.
  // The compressed system's zeros contain every zero of S; keep only the
  // points where the full pencil actually loses column rank.
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> normal;
  Matrix G(p, m);
  for (Index i = 0; i < G.size(); ++i) G.data()[i] = normal(rng);
  const Matrix W = Eigen::HouseholderQR<Matrix>(G).householderQ() * Matrix::Identity(p, m);
  const StateSpace squared(S.A, S.B, W.transpose() * S.C, W.transpose() * S.D);
  const ComplexVector candidates = square_pencil_zeros(squared);
  const double scale = std::max(1.0, rosenbrock(S).norm());
  std::vector<Complex> zeros;
  for (const Complex& z : candidates) {
    if (rosenbrock_sigma_min(S, z) <= 1e-6 * (scale + std::abs(z))) zeros.push_back(z);
  }
  return Eigen::Map<ComplexVector>(zeros.data(), static_cast<Index>(zeros.size()));
}

namespace {

bool is_real_nonneg(const Complex& z, double tol) {
  return std::abs(z.imag()) <= tol * (1.0 + std::abs(z.real())) && z.real() >= -tol;
}

}  // namespace

PipReport check_pip(const StateSpace& S, double tol) {
  const StateSpace Smin = minimal_realization(S);
  PipReport report;
  for (const Complex& z : transmission_zeros(Smin)) {
    if (is_real_nonneg(z, tol)) report.real_nonneg_zeros.push_back(std::max(0.0, z.real()));
  }
  // Zero at infinity when the feedthrough loses rank against the normal rank.
  const Index normal_rank = std::min(S.inputs(), S.outputs());
  if (normal_rank > 0 && numerical_rank(Smin.D.cast<Complex>(), tol) < normal_rank) {
    report.real_nonneg_zeros.push_back(std::numeric_limits<double>::infinity());
  }
  for (const Complex& pole : eigenvalues(Smin.A)) {
    if (is_real_nonneg(pole, tol)) report.real_nonneg_poles.push_back(std::max(0.0, pole.real()));
  }
  std::sort(report.real_nonneg_zeros.begin(), report.real_nonneg_zeros.end());
  std::sort(report.real_nonneg_poles.begin(), report.real_nonneg_poles.end());

  const auto& zs = report.real_nonneg_zeros;
  for (std::size_t i = 0; i + 1 < zs.size(); ++i) {
    const auto between = std::count_if(report.real_nonneg_poles.begin(),
                                       report.real_nonneg_poles.end(),
                                       [&](double p) { return p > zs[i] && p < zs[i + 1]; });
    if (between % 2 != 0) {
      report.satisfied = false;
      report.violating_pair = std::make_pair(zs[i], zs[i + 1]);
      break;
    }
  }
  return report;
}

namespace {

ComplexMatrix shifted_pencil(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                             Complex lambda) {
  const Index n = A.rows();
  ComplexMatrix P(n + C.rows(), n + B.cols());
  P << A.cast<Complex>() - lambda * ComplexMatrix::Identity(n, n), B.cast<Complex>(),
      C.cast<Complex>(), D.cast<Complex>();
  return P;
}

}  // namespace

std::vector<AssumptionViolation> validate_assumptions(const GeneralizedPlant& G, double tol) {
  std::vector<AssumptionViolation> out;
  const Index n = G.states();
  const Matrix A = G.A(), B1 = G.B1(), B2 = G.B2(), C1 = G.C1(), C2 = G.C2();
  const Matrix D12 = G.D12(), D21 = G.D21();
  const double rank_tol = std::max(tol, 1e-12);
  const ComplexVector eigs = eigenvalues(A);

  auto fmt = [](Complex z) {
    return std::to_string(z.real()) + (z.imag() >= 0 ? "+" : "") + std::to_string(z.imag()) + "j";
  };

  for (const Complex& ev : eigs) {
    if (ev.real() < -tol) continue;
    ComplexMatrix ctrb(n, n + B2.cols());
    ctrb << A.cast<Complex>() - ev * ComplexMatrix::Identity(n, n), B2.cast<Complex>();
    if (numerical_rank(ctrb, rank_tol) < n) {
      out.push_back({Assumption::A1, "(A, B2) has an uncontrollable mode at " + fmt(ev)});
    }
    ComplexMatrix obsv(n + C2.rows(), n);
    obsv << A.cast<Complex>() - ev * ComplexMatrix::Identity(n, n), C2.cast<Complex>();
    if (numerical_rank(obsv, rank_tol) < n) {
      out.push_back({Assumption::A1, "(C2, A) has an unobservable mode at " + fmt(ev)});
    }
  }

  auto check_pencil = [&](Assumption which, const Matrix& B, const Matrix& C, const Matrix& D,
                          Index required_rank) {
    if (std::min(n + C.rows(), n + B.cols()) < required_rank) {
      out.push_back({which, "pencil dimensions cannot reach full rank"});
      return;
    }
    std::vector<Complex> candidates(eigs.data(), eigs.data() + eigs.size());
    try {
      const ComplexVector z = transmission_zeros(StateSpace(A, B, C, D));
      candidates.insert(candidates.end(), z.data(), z.data() + z.size());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegeneratePencil) throw;
      out.push_back({which, "pencil is rank deficient for every λ"});
      return;
    }
    for (const Complex& lambda : candidates) {
      if (lambda.real() < -tol) continue;
      if (numerical_rank(shifted_pencil(A, B, C, D, lambda), rank_tol) < required_rank) {
        out.push_back({which, "pencil loses rank at λ = " + fmt(lambda)});
        return;
      }
    }
  };
  check_pencil(Assumption::A2, B2, C1, D12, n + B2.cols());
  check_pencil(Assumption::A3, B1, C2, D21, n + C2.rows());

  for (const Complex& ev : eigs) {
    if (std::abs(ev.real()) <= tol * (1.0 + std::abs(ev))) {
      out.push_back({Assumption::A4, "A has an imaginary-axis eigenvalue " + fmt(ev)});
      break;
    }
  }
  return out;
}

}  // namespace strongstab
