#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmorph/padic.hpp"
#include "pmorph/rational.hpp"

namespace pmorph {

// The finite model G_{L,M} = p^{-M} Z_p / p^L Z_p of the ball B_M: N = p^{L+M}
// points, canonically represented by I = sum_{j=-M}^{L-1} I_j p^j and stored
// losslessly as the integer Itilde = sum I_j p^{j+M} in [0, N).
struct GridGeometry {
  int p;
  int M;  // ball radius p^M
  int L;  // constancy scale p^{-L}
  std::int64_t N;

  GridGeometry(int p_, int M_, int L_) : p(p_), M(M_), L(L_), N(1) {
    if (!is_prime(p)) throw std::invalid_argument("GridGeometry: p must be prime");
    if (L < -M) throw std::invalid_argument("GridGeometry: require L >= -M");
    int depth = L + M;
    for (int i = 0; i < depth; ++i) {
      if (N > (std::int64_t{1} << 42) / p)
        throw std::invalid_argument("GridGeometry: p^(L+M) too large");
      N *= p;
    }
  }

  int levels() const { return L + M; }
  Rational cell_measure() const { return rational_pow(p, -L); }
  Rational ball_measure() const { return rational_pow(p, M); }

  bool operator==(const GridGeometry& o) const {
    return p == o.p && M == o.M && L == o.L;
  }
};

struct GridPoint {
  std::int64_t index = 0;   // Itilde
  std::vector<int> digits;  // least significant first, length L+M
  Rational value;           // p^{-M} * Itilde
};

inline GridPoint grid_point(const GridGeometry& g, std::int64_t index) {
  if (index < 0 || index >= g.N)
    throw std::out_of_range("grid_point: index outside [0, N)");
  GridPoint pt;
  pt.index = index;
  pt.digits.resize(g.levels());
  std::int64_t rest = index;
  for (int j = 0; j < g.levels(); ++j) {
    pt.digits[j] = static_cast<int>(rest % g.p);
    rest /= g.p;
  }
  pt.value = Rational(index) * rational_pow(g.p, -g.M);
  return pt;
}

// All N points in index order; deterministic.
inline std::vector<GridPoint> grid_enumerate(const GridGeometry& g) {
  std::vector<GridPoint> pts;
  pts.reserve(static_cast<std::size_t>(g.N));
  for (std::int64_t i = 0; i < g.N; ++i) pts.push_back(grid_point(g, i));
  return pts;
}

// Canonical index of x mod p^L Z_p for any x in p^{-M} Z_p (p-coprime
// denominators are p-adic units and are reduced with a modular inverse).
inline std::int64_t grid_index_from_value(const GridGeometry& g, const Rational& x) {
  Rational z = x * rational_pow(g.p, g.M);  // must lie in Z_p
  Int den = denominator(z);
  if (den % g.p == 0)
    throw std::invalid_argument("grid_index_from_value: not in p^{-M} Z_p");
  Int pn = int_pow(Int(g.p), static_cast<unsigned>(g.levels()));
  Int idx = numerator(z) % pn;
  if (den != 1) idx = idx * mod_inverse(den, pn) % pn;
  if (idx < 0) idx += pn;
  return idx.convert_to<std::int64_t>();
}

// Tree level at which a and b split: v = ord_p(Itilde_a - Itilde_b), in
// [0, L+M). Precondition a != b.
inline int distance_level(const GridGeometry& g, std::int64_t a, std::int64_t b) {
  std::int64_t d = a - b;
  if (d == 0) throw std::invalid_argument("distance_level: points coincide");
  if (d < 0) d = -d;
  int v = 0;
  while (d % g.p == 0) {
    d /= g.p;
    ++v;
  }
  return v;
}

// |a - b|_p from the exact integer difference of representatives: 0 iff a = b,
// else p^{M-v}; values range over {p^M, ..., p^{1-L}}.
inline Rational grid_distance_norm(const GridPoint& a, const GridPoint& b,
                                   const GridGeometry& g) {
  if (static_cast<int>(a.digits.size()) != g.levels() ||
      static_cast<int>(b.digits.size()) != g.levels() ||
      (a.index == b.index && a.value != b.value))
    throw std::invalid_argument("grid_distance_norm: geometry mismatch");
  if (a.index == b.index) return Rational(0);
  return rational_pow(g.p, g.M - distance_level(g, a.index, b.index));
}

// Group law of G_{L,M}: addition of representatives reduced mod p^L Z_p is
// addition of Itilde mod N.
inline std::int64_t grid_add(const GridGeometry& g, std::int64_t a, std::int64_t b) {
  return (a + b) % g.N;
}

inline std::int64_t grid_sub(const GridGeometry& g, std::int64_t a, std::int64_t b) {
  return ((a - b) % g.N + g.N) % g.N;
}

// Digit string, least significant digit first (tree level 1 = digit 0).
inline std::string digit_string(const GridPoint& pt) {
  std::string s;
  s.reserve(pt.digits.size());
  for (int d : pt.digits) s += static_cast<char>('0' + d);
  return s;
}

}  // namespace pmorph
