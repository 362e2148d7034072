#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pmorph {

using Int = boost::multiprecision::cpp_int;

// Exact carrier for p-adic quantities: fractional parts {x}_p, wavelet shifts
// n in Q_p/Z_p, and grid point values p^{-M}*I. cpp_rational keeps numerator
// and denominator coprime with a positive denominator, so equality testing
// and canonical-form checks are exact.
using Rational = boost::multiprecision::cpp_rational;

inline Int int_pow(Int base, unsigned exp) {
  Int result = 1;
  while (exp > 0) {
    if (exp & 1u) result *= base;
    base *= base;
    exp >>= 1u;
  }
  return result;
}

// p^e as an exact rational, e of either sign.
inline Rational rational_pow(int p, long e) {
  if (e >= 0) return Rational(int_pow(Int(p), static_cast<unsigned>(e)));
  return Rational(Int(1), int_pow(Int(p), static_cast<unsigned>(-e)));
}

inline std::string to_string(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

inline bool is_prime(int p) {
  if (p < 2) return false;
  for (int d = 2; static_cast<long long>(d) * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

// Inverse of a modulo m (m > 1, gcd(a, m) = 1), via extended Euclid.
inline Int mod_inverse(Int a, const Int& m) {
  a %= m;
  if (a < 0) a += m;
  Int r0 = m, r1 = a, s0 = 0, s1 = 1;
  while (r1 != 0) {
    Int q = r0 / r1;
    Int r2 = r0 - q * r1;
    r0 = r1;
    r1 = r2;
    Int s2 = s0 - q * s1;
    s0 = s1;
    s1 = s2;
  }
  if (r0 != 1) throw std::domain_error("mod_inverse: arguments not coprime");
  s0 %= m;
  if (s0 < 0) s0 += m;
  return s0;
}

}  // namespace pmorph
