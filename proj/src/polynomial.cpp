#include "strongstab/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace strongstab {

Polynomial trim(Polynomial p) {
  auto first = std::find_if(p.begin(), p.end(), [](double c) { return c != 0.0; });
  if (first == p.end()) return {0.0};
  p.erase(p.begin(), first);
  return p;
}

int degree(const Polynomial& p) {
  const Polynomial t = trim(p);
  if (t.size() == 1 && t[0] == 0.0) return -1;
  return static_cast<int>(t.size()) - 1;
}

Polynomial multiply(const Polynomial& a, const Polynomial& b) {
  if (a.empty() || b.empty()) return {0.0};
  Polynomial out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Polynomial add(const Polynomial& a, const Polynomial& b) {
  const std::size_t n = std::max(a.size(), b.size());
  Polynomial out(n, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[n - a.size() + i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[n - b.size() + i] += b[i];
  return out;
}

Polynomial scale(const Polynomial& p, double k) {
  Polynomial out = p;
  for (double& c : out) c *= k;
  return out;
}

Polynomial from_roots(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> acc{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(acc.size() + 1, 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      next[i] += acc[i];
      next[i + 1] -= acc[i] * r;
    }
    acc = std::move(next);
  }
  Polynomial out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (std::abs(acc[i].imag()) > 1e-9 * (1.0 + std::abs(acc[i].real()))) {
      throw std::invalid_argument("from_roots: complex roots must appear in conjugate pairs");
    }
    out[i] = acc[i].real();
  }
  return out;
}

Polynomial shift_argument(const Polynomial& p, double shift) {
  // Horner in the shifted variable: p(s+a) = (...((c0)(s+a) + c1)(s+a) + ...).
  Polynomial acc{0.0};
  const Polynomial lin{1.0, shift};
  for (double c : p) acc = add(multiply(acc, lin), Polynomial{c});
  return trim(acc);
}

}  // namespace strongstab
