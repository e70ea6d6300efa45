#pragma once

#include <complex>
#include <vector>

namespace strongstab {

/// Real polynomial, coefficients ordered from the highest power down
/// (so {1, 2, 3} is s² + 2s + 3).
using Polynomial = std::vector<double>;

/// Drops leading zeros; the zero polynomial becomes {0}.
Polynomial trim(Polynomial p);

int degree(const Polynomial& p);

Polynomial multiply(const Polynomial& a, const Polynomial& b);

Polynomial add(const Polynomial& a, const Polynomial& b);

Polynomial scale(const Polynomial& p, double k);

/// Monic real polynomial with the given roots; complex roots must come in
/// conjugate pairs.
Polynomial from_roots(const std::vector<std::complex<double>>& roots);

/// p(s + shift), via Taylor re-expansion.
Polynomial shift_argument(const Polynomial& p, double shift);

template <typename Scalar>
Scalar evaluate(const Polynomial& p, const Scalar& s) {
  Scalar acc(0);
  for (double c : p) acc = acc * s + Scalar(c);
  return acc;
}

}  // namespace strongstab
