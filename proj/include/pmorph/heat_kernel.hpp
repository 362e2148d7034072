#pragma once

#include <cmath>
#include <stdexcept>

#include "pmorph/padic.hpp"

namespace pmorph {

// p-adic heat kernel Z(x,t) = int chi_p(-x xi) exp(-t |xi|^alpha) d xi,
// evaluated by the exact radial shell decomposition. For |x|_p = p^beta the
// shell integrals int_{|xi|=p^k} chi_p(x xi) d xi equal (1-1/p) p^k for
// k <= -beta, -p^{-beta} at k = 1-beta and vanish above, so
//   Z = sum_{k <= -beta} (1-1/p) p^k exp(-t p^{k alpha})
//       - p^{-beta} exp(-t p^{(1-beta) alpha});
// for x = 0 the sum runs over all k in Z. Series are truncated once terms
// fall below 1e-16 of the partial sum.
inline double heat_kernel(const Rational& x, double t, double alpha, int p) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_kernel: require t > 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("heat_kernel: require alpha > 0");
  if (!is_prime(p)) throw std::invalid_argument("heat_kernel: p not prime");

  const double pd = static_cast<double>(p);
  const double w = 1.0 - 1.0 / pd;
  const double logp = std::log(pd);
  auto term = [&](long long k) {
    double e = -t * std::pow(pd, static_cast<double>(k) * alpha);
    return w * std::pow(pd, static_cast<double>(k)) * std::exp(e);
  };
  // k index past which the exponential factor starts to decay in earnest
  const long long k_peak =
      static_cast<long long>(std::floor(std::log1p(1.0 / t) / (alpha * logp)));

  long long ord = padic_order(x, p);
  long long k_start;
  double sum;
  if (ord == kOrderInfinity) {
    // x = 0: two-sided series; start above the peak where exp(-t p^{k alpha})
    // has already collapsed.
    k_start = k_peak + static_cast<long long>(std::ceil(
                           std::log(800.0 / std::log(2.0)) / (alpha * logp))) +
              2;
    sum = 0.0;
  } else {
    long long beta = -ord;  // |x|_p = p^beta
    k_start = -beta;
    sum = -std::pow(pd, static_cast<double>(-beta)) *
          std::exp(-t * std::pow(pd, static_cast<double>(1 - beta) * alpha));
  }
  for (long long k = k_start; k >= k_start - 8192; --k) {
    double u = term(k);
    sum += u;
    if (k < k_peak && std::abs(sum) > 0.0 && u < 1e-16 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace pmorph
