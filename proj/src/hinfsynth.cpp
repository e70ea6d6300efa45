#include "strongstab/hinfsynth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace strongstab {

namespace {

bool riccati_solvable(const GeneralizedPlant& normalized, double gamma, const RiccatiOptions& opts) {
  return solve_hinf_riccati_pair(normalized, gamma, opts).solvable;
}

double relative_response_gap(const StateSpace& a, const StateSpace& b) {
  double scale = 1.0;
  for (const Complex& ev : eigenvalues(a.A)) scale = std::max(scale, std::abs(ev));
  std::vector<double> omegas = log_grid(1e-3 * scale, 1e3 * scale, 48);
  omegas.push_back(0.0);
  double peak = 0.0, worst = 0.0;
  for (double w : omegas) {
    const Complex s(0.0, w);
    const ComplexMatrix ga = a.evaluate(s), gb = b.evaluate(s);
    peak = std::max(peak, sigma_max(ga));
    worst = std::max(worst, sigma_max(ComplexMatrix(ga - gb)));
  }
  return worst / std::max(peak, kAbsoluteFloor);
}

}  // namespace

double optimal_gamma(const GeneralizedPlant& P, const HinfOptions& options) {
  const GeneralizedPlant Pn = normalize_plant(P).plant;
  double hi = std::max(1.0, 2.0 * sigma_max(P.D11()));
  int doublings = 0;
  while (!riccati_solvable(Pn, hi, options.riccati)) {
    if (++doublings > 80) {
      throw Error(ErrorCode::GammaInfeasible, "no gamma up to 2^80 solves the Riccati pair");
    }
    hi *= 2.0;
  }
  double lo = hi;
  const double floor = sigma_max(P.D11());
  for (int i = 0; i < 80; ++i) {
    lo = 0.5 * lo;
    if (lo <= floor || !riccati_solvable(Pn, lo, options.riccati)) break;
    hi = lo;
  }
  lo = std::max(lo, floor);
  for (int it = 0; it < 200 && hi - lo > options.gamma_rel_tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (riccati_solvable(Pn, mid, options.riccati) ? hi : lo) = mid;
  }
  return hi;
}

CentralController central_controller(const GeneralizedPlant& P, double gamma,
                                     const HinfOptions& options) {
  if (P.D11().size() > 0 && P.D11().cwiseAbs().maxCoeff() > 0.0) {
    throw Error(ErrorCode::AssumptionViolated,
                "central controller requires D11 = 0; loop-shift the plant first");
  }
  const NormalizedPlant norm = normalize_plant(P);
  const GeneralizedPlant& Pn = norm.plant;
  CentralController out;
  out.gamma = gamma;
  out.riccati = solve_hinf_riccati_pair(Pn, gamma, options.riccati);
  if (!out.riccati.solvable) {
    throw Error(ErrorCode::GammaInfeasible,
                "gamma = " + std::to_string(gamma) + " not achievable: " + out.riccati.reason);
  }
  const Matrix &X = out.riccati.X, &Y = out.riccati.Y;
  const Index n = Pn.states(), m2 = Pn.m2(), p2 = Pn.p2();
  const Matrix A = Pn.A(), B1 = Pn.B1(), B2 = Pn.B2(), C1 = Pn.C1(), C2 = Pn.C2();
  const Matrix D12 = Pn.D12(), D21 = Pn.D21();
  const double ig2 = 1.0 / (gamma * gamma);

  const Matrix F = -(B2.transpose() * X + D12.transpose() * C1);
  const Matrix L = -(Y * C2.transpose() + B1 * D21.transpose());
  Eigen::PartialPivLU<Matrix> zlu(Matrix(Matrix::Identity(n, n) - ig2 * Y * X));
  const Matrix Zinf = zlu.inverse();
  const Matrix C2hat = C2 + ig2 * D21 * B1.transpose() * X;
  const Matrix B2hat = B2 + ig2 * Y * C1.transpose() * D12;
  const Matrix Ahat = A + ig2 * B1 * B1.transpose() * X + B2 * F + Zinf * L * C2hat;

  // Inputs (y, Q-out), outputs (u, Q-in); undo the D12 / D21 normalization
  // on the y → u channel only.
  Matrix Bc(n, p2 + m2), Cc(m2 + p2, n), Dc = Matrix::Zero(m2 + p2, p2 + m2);
  Bc << -Zinf * L * norm.Sy, Zinf * B2hat;
  Cc << norm.Su * F, -C2hat;
  Dc.topRightCorner(m2, m2) = norm.Su;
  Dc.bottomLeftCorner(p2, p2) = norm.Sy;
  out.M = GeneralizedPlant(StateSpace(Ahat, Bc, Cc, Dc), p2, m2, m2, p2);
  return out;
}

StateSpace assemble_stable_controller(const GeneralizedPlant& M, const StrongStabResult& inner) {
  const Matrix A = M.A(), B1 = M.B1(), B2 = M.B2(), C1 = M.C1(), C2 = M.C2();
  const Matrix D11 = M.D11(), D12 = M.D12(), D21 = M.D21();
  const Index n = M.states();
  const Matrix XkZ = inner.X_K.llt().solve(inner.Z);
  const Matrix BBX = B2 * B2.transpose() * inner.X;

  Matrix Ag(2 * n, 2 * n), Bg(2 * n, M.m1()), Cg(M.p1(), 2 * n);
  Ag << A - BBX, -BBX,
        Matrix::Zero(n, n), A + XkZ * C2;
  Bg << B1, -B1 - XkZ * D21;
  const Matrix DBX = D12 * B2.transpose() * inner.X;
  Cg << C1 - DBX, -DBX;
  return StateSpace(Ag, Bg, Cg, D11);
}

StableHinfController stable_hinf(const GeneralizedPlant& P, double gamma,
                                 const HinfOptions& options) {
  StableHinfController out;
  out.gamma = gamma;
  out.central = central_controller(P, gamma, options);
  const GeneralizedPlant& M = out.central.M;
  const PlantTriple channel{M.A(), M.B2(), M.C2()};
  const double gamma_K = options.decoupled_gamma_K.value_or(gamma);
  try {
    out.inner = options.inner_variant == Lemma1Variant::Structured
                    ? structured_baseline(channel, gamma_K, false, options.inner)
                    : strong_stabilize(channel, gamma_K, false, options.inner);
  } catch (const Error& e) {
    throw Error(ErrorCode::InnerLmiInfeasible,
                "no stable parameter with norm below " + std::to_string(gamma_K) + ": " + e.what());
  }
  out.controller = assemble_stable_controller(M, out.inner);

  StableHinfCertificates& cert = out.certificates;
  cert.crosscheck_error = relative_response_gap(out.controller, lft_lower(M, out.inner.controller));
  if (!(cert.crosscheck_error <= options.crosscheck_tol)) {
    throw Error(ErrorCode::CrossCheckMismatch,
                "block-formula controller differs from F_l(M, K) by " +
                    std::to_string(cert.crosscheck_error));
  }
  cert.parameter_norm = out.inner.certificates.controller_hinf_norm;
  cert.controller_abscissa = spectral_abscissa(out.controller.A);
  const StateSpace loop = lft_lower(P, out.controller);
  cert.closed_loop_abscissa = spectral_abscissa(loop.A);
  cert.closed_loop_norm = cert.closed_loop_abscissa < 0.0
                              ? hinf_norm(loop, options.hinf_rel_tol)
                              : std::numeric_limits<double>::infinity();
  return out;
}

MinGammaResult min_gamma_stable(const GeneralizedPlant& P, std::optional<double> lo_in,
                                std::optional<double> hi_in, const HinfOptions& options) {
  MinGammaResult out;
  out.gamma_opt = optimal_gamma(P, options);

  std::optional<StableHinfController> best;
  auto probe = [&](double gamma) {
    GammaProbe pr{gamma, false, {}};
    try {
      StableHinfController c = stable_hinf(P, gamma, options);
      if (c.certificates.hold(gamma)) {
        pr.feasible = true;
        if (!best || gamma < best->gamma) best = std::move(c);
      } else {
        pr.reason = "certificates fail: closed-loop norm " +
                    std::to_string(c.certificates.closed_loop_norm);
      }
    } catch (const Error& e) {
      pr.reason = e.what();
    }
    out.probes.push_back(pr);
    return pr.feasible;
  };

  double lo = lo_in.value_or(out.gamma_opt);
  double hi = 0.0;
  if (hi_in) {
    hi = *hi_in;
    if (!probe(hi)) {
      throw Error(ErrorCode::BracketInfeasible, "upper gamma " + std::to_string(hi) +
                                                    " admits no stable controller: " +
                                                    out.probes.back().reason);
    }
  } else {
    hi = std::max(lo, 1e-12) * 1.25;
    int steps = 0;
    while (!probe(hi)) {
      lo = hi;
      if (++steps > 40) {
        throw Error(ErrorCode::BracketInfeasible, "no stable controller found up to gamma " +
                                                      std::to_string(hi));
      }
      hi *= 2.0;
    }
  }

  // Coarse log-spaced scan so a feasible pocket below `hi` is not skipped.
  constexpr int kScan = 4;
  if (hi > lo * (1.0 + options.gamma_rel_tol)) {
    for (int k = 1; k <= kScan; ++k) {
      const double g = lo * std::pow(hi / lo, static_cast<double>(k) / (kScan + 1));
      if (probe(g)) {
        hi = g;
        break;
      }
      lo = g;
    }
  }
  for (int it = 0; it < 200 && hi - lo > options.gamma_rel_tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (probe(mid) ? hi : lo) = mid;
  }

  for (const GammaProbe& a : out.probes) {
    for (const GammaProbe& b : out.probes) {
      if (a.feasible && !b.feasible && b.gamma > a.gamma) out.non_monotone = true;
    }
  }
  out.best = std::move(*best);
  out.gamma = out.best.gamma;
  return out;
}

}  // namespace strongstab
