#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "pmorph/rational.hpp"

namespace pmorph {

// Sentinel for ord(0) = +infinity.
inline constexpr long long kOrderInfinity = std::numeric_limits<long long>::max();

struct PadicConfig {
  int p;

  explicit PadicConfig(int prime) : p(prime) {
    if (!is_prime(prime))
      throw std::invalid_argument("PadicConfig: p = " + std::to_string(prime) +
                                  " is not prime");
  }
};

// Exact power of p dividing a nonzero integer.
inline long long int_order(Int n, int p) {
  if (n == 0) return kOrderInfinity;
  long long v = 0;
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

// ord_p(x): the gamma in x = p^gamma * a/b with a, b coprime to p.
inline long long padic_order(const Rational& x, int p) {
  if (!is_prime(p)) throw std::invalid_argument("padic_order: p not prime");
  if (x == 0) return kOrderInfinity;
  return int_order(numerator(x), p) - int_order(denominator(x), p);
}

// |x|_p = p^{-ord(x)}, |0|_p = 0; exact rational output.
inline Rational padic_norm(const Rational& x, int p) {
  long long v = padic_order(x, p);
  if (v == kOrderInfinity) return Rational(0);
  return rational_pow(p, static_cast<long>(-v));
}

// {x}_p: the tail of the p-adic expansion with negative exponents, i.e. the
// unique rational a/p^k in [0,1) with x - a/p^k in Z_p intersected with the
// p-coprime-denominator part. Zero when ord(x) >= 0. The digits of the
// p-coprime part are recovered with a modular inverse instead of an infinite
// expansion.
inline Rational fractional_part(const Rational& x, int p) {
  long long v = padic_order(x, p);
  if (v == kOrderInfinity || v >= 0) return Rational(0);
  unsigned k = static_cast<unsigned>(-v);
  Int pk = int_pow(Int(p), k);
  // x = p^{-k} * (a/b) with a, b coprime to p (lowest terms guarantee that
  // only one of numerator/denominator carries powers of p).
  Int a = numerator(x);
  Int b = denominator(x);
  while (a % p == 0) a /= p;
  while (b % p == 0) b /= p;
  Int digits = (a % pk) * mod_inverse(b, pk) % pk;
  if (digits < 0) digits += pk;
  return Rational(digits, pk);
}

// chi_p(x) = exp(2 pi i {x}_p). Exactly 1 when the fractional part vanishes;
// all p-adic bookkeeping stays exact, floating point enters only in the final
// cos/sin call.
inline std::complex<double> additive_character(const Rational& x, int p) {
  Rational q = fractional_part(x, p);
  if (q == 0) return {1.0, 0.0};
  double theta = 2.0 * M_PI * q.convert_to<double>();
  return {std::cos(theta), std::sin(theta)};
}

}  // namespace pmorph
