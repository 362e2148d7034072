#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "pmorph/grid.hpp"
#include "pmorph/padic.hpp"

namespace pmorph {

// Index (r, n, j) of a wavelet
//   Psi_{rnj}(x) = p^{-r/2} chi_p(p^{-1} j (p^r x - n)) Omega(|p^r x - n|_p),
// supported on the ball of radius p^r centered at p^{-r} n. n is the canonical
// representative of an element of Q_p/Z_p: 0, or a/p^k with k >= 1, p coprime
// to a, 0 < a < p^k.
struct WaveletIndex {
  int r = 0;
  Rational n;
  int j = 1;

  bool operator==(const WaveletIndex& o) const {
    return r == o.r && n == o.n && j == o.j;
  }
};

inline bool is_canonical_qpzp(const Rational& n, int p) {
  if (n == 0) return true;
  if (n < 0 || n >= 1) return false;
  Int den = denominator(n);
  // lowest terms: denominator must be a pure power of p
  while (den % p == 0) den /= p;
  return den == 1;
}

// ord_p(n) for canonical n (0 -> +infinity, a/p^k -> -k).
inline long long qpzp_order(const Rational& n, int p) {
  return padic_order(n, p);
}

// Grid admissibility: 1-L <= r <= M and n = 0 or ord(n) >= r-M. The upper
// bound and the n-condition select the wavelets supported in B_M; the lower
// bound is the local-constancy requirement p^{r-1} >= p^{-L} for membership
// in the grid space.
inline bool wavelet_admissible(const GridGeometry& g, const WaveletIndex& w) {
  if (w.j < 1 || w.j > g.p - 1) return false;
  if (w.r > g.M || w.r < 1 - g.L) return false;
  if (!is_canonical_qpzp(w.n, g.p)) return false;
  if (w.n != 0 && qpzp_order(w.n, g.p) < w.r - g.M) return false;
  return true;
}

inline void require_admissible(const GridGeometry& g, const WaveletIndex& w) {
  if (!wavelet_admissible(g, w))
    throw std::invalid_argument("wavelet index (r=" + std::to_string(w.r) +
                                ", n=" + to_string(w.n) +
                                ", j=" + std::to_string(w.j) +
                                ") is not admissible for this grid");
}

// Number of admissible triples at fixed scale r: (p-1) p^{M-r}.
inline std::int64_t wavelet_scale_multiplicity(const GridGeometry& g, int r) {
  std::int64_t m = g.p - 1;
  for (int i = 0; i < g.M - r; ++i) m *= g.p;
  return m;
}

// Eigenvalue of D^alpha on scale-r wavelets.
inline double wavelet_eigenvalue(int p, double alpha, int r) {
  return std::pow(static_cast<double>(p), (1.0 - r) * alpha);
}

// All grid-admissible (r, n, j), grouped by r from M down to 1-L; within a
// scale, n ordered by denominator exponent then numerator, j innermost.
// Total count is N - 1.
inline std::vector<WaveletIndex> admissible_wavelets(const GridGeometry& g) {
  std::vector<WaveletIndex> out;
  out.reserve(static_cast<std::size_t>(g.N - 1));
  for (int r = g.M; r >= 1 - g.L; --r) {
    std::vector<Rational> shifts{Rational(0)};
    Int pk = 1;
    for (int k = 1; k <= g.M - r; ++k) {
      pk *= g.p;
      for (Int a = 1; a < pk; ++a)
        if (a % g.p != 0) shifts.emplace_back(a, pk);
    }
    for (const Rational& n : shifts)
      for (int j = 1; j <= g.p - 1; ++j) out.push_back({r, n, j});
  }
  return out;
}

// Pointwise value of Psi_{rnj} at a rational x; all p-adic logic exact, one
// transcendental call at the end.
inline std::complex<double> wavelet_value(const WaveletIndex& w, const Rational& x,
                                          int p) {
  Rational y = rational_pow(p, w.r) * x - w.n;
  if (y != 0 && padic_order(y, p) < 0) return {0.0, 0.0};
  Rational q = fractional_part(Rational(w.j) * y / p, p);
  double amp = std::pow(static_cast<double>(p), -0.5 * w.r);
  if (q == 0) return {amp, 0.0};
  double theta = 2.0 * M_PI * q.convert_to<double>();
  return {amp * std::cos(theta), amp * std::sin(theta)};
}

inline std::complex<double> wavelet_eval(const WaveletIndex& w, const GridPoint& x,
                                         const GridGeometry& g) {
  require_admissible(g, w);
  return wavelet_value(w, x.value, g.p);
}

enum class WaveletPhase { cos, sin };

// Real eigenfunctions: the cos form is Re Psi, the sin form Im Psi, with the
// 2 pi convention fixed so that cos(2 pi {.}_p) = Re chi_p.
inline double real_wavelet_value(const WaveletIndex& w, WaveletPhase phase,
                                 const Rational& x, int p) {
  std::complex<double> z = wavelet_value(w, x, p);
  return phase == WaveletPhase::cos ? z.real() : z.imag();
}

inline double real_wavelet_eval(const WaveletIndex& w, WaveletPhase phase,
                                const GridPoint& x, const GridGeometry& g) {
  require_admissible(g, w);
  return real_wavelet_value(w, phase, x.value, g.p);
}

// Grid indices in the support ball B_r(p^{-r} n): Itilde congruent to the
// center index mod p^{M-r}; p^{L+r} of them, ascending.
inline std::vector<std::int64_t> wavelet_support(const GridGeometry& g,
                                                 const WaveletIndex& w) {
  require_admissible(g, w);
  std::int64_t center = grid_index_from_value(g, rational_pow(g.p, -w.r) * w.n);
  std::int64_t stride = 1;
  for (int i = 0; i < g.M - w.r; ++i) stride *= g.p;
  std::vector<std::int64_t> idx;
  idx.reserve(static_cast<std::size_t>(g.N / stride));
  for (std::int64_t i = center % stride; i < g.N; i += stride) idx.push_back(i);
  return idx;
}

// Sampled wavelet as a vector over the grid (complex).
inline Eigen::VectorXcd sample_wavelet(const WaveletIndex& w, const GridGeometry& g) {
  require_admissible(g, w);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(g.N);
  for (std::int64_t i : wavelet_support(g, w))
    v(i) = wavelet_value(w, grid_point(g, i).value, g.p);
  return v;
}

// ---------------------------------------------------------------------------
// Real orthonormal modes.
//
// Under the discrete inner product <f,g> = p^{-L} sum f(x) g(x), the complex
// wavelets plus the normalized constant p^{-M/2} Omega form an orthonormal
// basis. A real orthonormal basis of the wavelet span takes j up to the
// conjugacy j <-> p-j: for p = 2 the wavelets are already real (sin form
// vanishes identically); for odd p the cos/sin pair at canonical j has norm
// 1/sqrt(2) each, so samples are rescaled by sqrt(2).
// ---------------------------------------------------------------------------

inline int canonical_j_count(int p) { return p == 2 ? 1 : (p - 1) / 2; }

inline bool mode_has_sin(int p) { return p != 2; }

inline double real_mode_scale(int p) { return p == 2 ? 1.0 : std::sqrt(2.0); }

// Canonical (r, n, j <= (p-1)/2) list; each entry contributes a cos mode and,
// for odd p, a sin mode. Together with the constant these span R^N.
inline std::vector<WaveletIndex> canonical_real_modes(const GridGeometry& g) {
  std::vector<WaveletIndex> out;
  for (const WaveletIndex& w : admissible_wavelets(g))
    if (w.j <= canonical_j_count(g.p)) out.push_back(w);
  return out;
}

// Unit-norm (discrete inner product) sample of a real mode.
inline Eigen::VectorXd sample_real_mode(const WaveletIndex& w, WaveletPhase phase,
                                        const GridGeometry& g) {
  require_admissible(g, w);
  if (phase == WaveletPhase::sin && !mode_has_sin(g.p))
    throw std::invalid_argument("sample_real_mode: sin modes vanish for p = 2");
  double scale = real_mode_scale(g.p);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(g.N);
  for (std::int64_t i : wavelet_support(g, w))
    v(i) = scale * real_wavelet_value(w, phase, grid_point(g, i).value, g.p);
  return v;
}

// Matrix whose columns are all N-1 unit-norm real modes, ordered as
// canonical_real_modes with cos before sin; parallel list of scales returned
// through `scales`.
inline Eigen::MatrixXd real_mode_matrix(const GridGeometry& g,
                                        std::vector<int>* scales = nullptr) {
  std::vector<WaveletIndex> modes = canonical_real_modes(g);
  Eigen::MatrixXd W(g.N, g.N - 1);
  if (scales) scales->clear();
  Eigen::Index col = 0;
  for (const WaveletIndex& w : modes) {
    W.col(col++) = sample_real_mode(w, WaveletPhase::cos, g);
    if (scales) scales->push_back(w.r);
    if (mode_has_sin(g.p)) {
      W.col(col++) = sample_real_mode(w, WaveletPhase::sin, g);
      if (scales) scales->push_back(w.r);
    }
  }
  return W;
}

}  // namespace pmorph
