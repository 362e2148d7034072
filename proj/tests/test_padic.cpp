#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "pmorph/padic.hpp"
#include "pmorph/simulate.hpp"  // SeededRng

using namespace pmorph;

namespace {

// Independent oracle for {x}_p: extract the k = -ord(x) low digits of the
// p-coprime part a/b by long division in Z_p (digit d = a b^{-1} mod p,
// then a <- (a - d b)/p), and assemble sum d_i p^i / p^k.
Rational fractional_part_oracle(const Rational& x, int p) {
  if (x == 0) return Rational(0);
  Int a = numerator(x), b = denominator(x);
  long long va = 0, vb = 0;
  while (a % p == 0) {
    a /= p;
    ++va;
  }
  while (b % p == 0) {
    b /= p;
    ++vb;
  }
  long long ord = va - vb;
  if (ord >= 0) return Rational(0);
  Int inv_b = mod_inverse(b, Int(p));
  Int acc = 0, pw = 1;
  for (long long i = 0; i < -ord; ++i) {
    Int d = a * inv_b % p;
    if (d < 0) d += p;
    acc += d * pw;
    pw *= p;
    a = (a - d * b) / p;
  }
  return Rational(acc, pw);
}

Rational random_rational(SeededRng& rng, int span) {
  auto num = static_cast<long long>(rng.next() % (2 * span + 1)) - span;
  auto den = static_cast<long long>(rng.next() % span) + 1;
  return Rational(num, den);
}

}  // namespace

TEST_CASE("PadicConfig accepts primes and rejects composites") {
  for (int p : {2, 3, 5, 7, 11}) CHECK(PadicConfig(p).p == p);
  for (int p : {-3, 0, 1, 4, 6, 9, 15}) CHECK_THROWS_AS(PadicConfig(p), std::invalid_argument);
}

TEST_CASE("padic_order on rationals") {
  CHECK(padic_order(Rational(0), 5) == kOrderInfinity);
  CHECK(padic_order(Rational(1), 7) == 0);
  CHECK(padic_order(Rational(12), 2) == 2);
  CHECK(padic_order(Rational(3, 4), 2) == -2);
  CHECK(padic_order(Rational(9, 2), 3) == 2);
  CHECK(padic_order(Rational(-18), 3) == 2);
}

TEST_CASE("padic_norm values and ultrametric inequality") {
  CHECK(padic_norm(Rational(0), 3) == 0);
  CHECK(padic_norm(Rational(9, 2), 3) == Rational(1, 9));
  CHECK(padic_norm(Rational(1, 7), 7) == 7);

  SeededRng rng(20240811);
  for (int p : {2, 3, 5}) {
    for (int i = 0; i < 1000; ++i) {
      Rational x = random_rational(rng, 60);
      Rational y = random_rational(rng, 60);
      Rational lhs = padic_norm(x + y, p);
      Rational rhs = std::max(padic_norm(x, p), padic_norm(y, p));
      CHECK(lhs <= rhs);
    }
  }
}

TEST_CASE("fractional_part on pure p-power denominators") {
  CHECK(fractional_part(Rational(5), 3) == 0);
  CHECK(fractional_part(Rational(1, 2), 2) == Rational(1, 2));
  CHECK(fractional_part(Rational(3, 4), 2) == Rational(3, 4));
  CHECK(fractional_part(Rational(-1, 2), 2) == Rational(1, 2));
  CHECK(fractional_part(Rational(7, 9), 3) == Rational(7, 9));
}

TEST_CASE("fractional_part of p-adic units with general denominators") {
  // 1/3 is a 2-adic unit (ord = 0), so its fractional part vanishes even
  // though its digit expansion is infinite.
  CHECK(fractional_part(Rational(1, 3), 2) == fractional_part_oracle(Rational(1, 3), 2));
  CHECK(fractional_part(Rational(1, 3), 2) == 0);
  // 1/6 = 2^{-1} * (1/3): one p-power digit of the unit 1/3 = ...01011, so
  // {1/6}_2 = x_0 / 2 = 1/2.
  CHECK(fractional_part(Rational(1, 6), 2) == Rational(1, 2));
  CHECK(fractional_part(Rational(1, 6), 2) == fractional_part_oracle(Rational(1, 6), 2));

  SeededRng rng(77);
  for (int p : {2, 3, 5}) {
    for (int i = 0; i < 500; ++i) {
      Rational x = random_rational(rng, 40);
      Rational f = fractional_part(x, p);
      CHECK(f == fractional_part_oracle(x, p));
      CHECK(f >= 0);
      CHECK(f < 1);
      // x - {x}_p is a p-adic integer
      if (x != f) CHECK(padic_order(x - f, p) >= 0);
      // denominator of {x}_p is a power of p
      Int den = denominator(f);
      while (den % p == 0) den /= p;
      CHECK(den == 1);
    }
  }
}

TEST_CASE("additive_character values") {
  auto one = additive_character(Rational(2), 5);
  CHECK(one.real() == 1.0);
  CHECK(one.imag() == 0.0);

  auto minus_one = additive_character(Rational(1, 2), 2);
  CHECK(minus_one.real() == Catch::Approx(-1.0).margin(1e-12));
  CHECK(minus_one.imag() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("additive_character is multiplicative on grid values") {
  SeededRng rng(3);
  for (int p : {2, 3, 5}) {
    // random elements of p^{-M} Z with M = 3
    for (int i = 0; i < 300; ++i) {
      Rational x(static_cast<long long>(rng.next() % 4000) - 2000,
                 static_cast<long long>(int_pow(Int(p), 3).convert_to<long long>()));
      Rational y(static_cast<long long>(rng.next() % 4000) - 2000,
                 static_cast<long long>(int_pow(Int(p), 3).convert_to<long long>()));
      std::complex<double> lhs = additive_character(x + y, p);
      std::complex<double> rhs = additive_character(x, p) * additive_character(y, p);
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }
  }
}
