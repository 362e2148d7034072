#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmorph/grid.hpp"
#include "pmorph/kinetics.hpp"
#include "pmorph/vladimirov.hpp"
#include "pmorph/wavelets.hpp"

namespace pmorph {

// Roots of x^2 + b x + c, cancellation-free (sign-aware quadratic formula);
// first root has the larger real part.
inline std::pair<std::complex<double>, std::complex<double>> quadratic_roots(
    double b, double c) {
  double disc = b * b - 4.0 * c;
  if (disc >= 0.0) {
    double s = std::sqrt(disc);
    double q = -0.5 * (b + std::copysign(s, b));
    double r1, r2;
    if (q != 0.0) {
      r1 = q;
      r2 = c / q;
    } else {
      r1 = r2 = -0.5 * b;
    }
    if (r1 < r2) std::swap(r1, r2);
    return {{r1, 0.0}, {r2, 0.0}};
  }
  double re = -0.5 * b, im = 0.5 * std::sqrt(-disc);
  return {{re, im}, {re, -im}};
}

struct Stability0d {
  std::complex<double> lambda1, lambda2;
  bool stable = false;           // both real parts < 0
  bool sufficient_pair = false;  // Tr < 0 and det > 0
};

// Kinetics-only linearization: roots of lambda^2 - gamma Tr lambda
// + gamma^2 det = 0.
inline Stability0d stability_0d(const JacobianAtSteadyState& j, double gamma) {
  auto [l1, l2] = quadratic_roots(-gamma * j.trace, gamma * gamma * j.det);
  Stability0d s;
  s.lambda1 = l1;
  s.lambda2 = l2;
  s.stable = l1.real() < 0.0 && l2.real() < 0.0;
  s.sufficient_pair = j.trace < 0.0 && j.det > 0.0;
  return s;
}

// h(kappa) = d kappa^2 - gamma kappa (d f_u0 + g_v0) + gamma^2 det J.
inline double h_of_kappa(const JacobianAtSteadyState& j, double gamma, double d,
                         double kappa) {
  return d * kappa * kappa - gamma * kappa * (d * j.f_u0 + j.g_v0) +
         gamma * gamma * j.det;
}

// Growth rates at diffusion eigenvalue kappa: roots of
// lambda^2 + {kappa (1+d) - gamma Tr J} lambda + h(kappa) = 0.
inline std::pair<std::complex<double>, std::complex<double>> dispersion(
    const JacobianAtSteadyState& j, double gamma, double d, double kappa) {
  return quadratic_roots(kappa * (1.0 + d) - gamma * j.trace,
                         h_of_kappa(j, gamma, d, kappa));
}

struct KappaExtrema {
  double kappa_min = 0;
  double h_min = 0;
  std::optional<double> kappa_c;  // filled at the bifurcation point h_min = 0
};

// Vertex of h: kappa_min = gamma (d f_u0 + g_v0) / (2d),
// h_min = gamma^2 (det J - (d f_u0 + g_v0)^2 / (4d)).
inline KappaExtrema kappa_extrema(const JacobianAtSteadyState& j, double gamma,
                                  double d) {
  if (!(d > 0.0)) throw std::invalid_argument("kappa_extrema: require d > 0");
  double s = d * j.f_u0 + j.g_v0;
  KappaExtrema out;
  out.kappa_min = gamma * s / (2.0 * d);
  out.h_min = gamma * gamma * (j.det - s * s / (4.0 * d));
  if (std::abs(out.h_min) <=
      1e-9 * gamma * gamma * std::max(1.0, std::abs(j.det)))
    out.kappa_c = gamma * std::sqrt(std::max(0.0, j.det / d));
  return out;
}

struct CriticalDiffusion {
  double d_c = 0;
  std::vector<double> all_roots;  // real roots of the d_c quadratic, ascending
};

// Solves f_u0^2 d^2 + 2 (2 f_v0 g_u0 - f_u0 g_v0) d + g_v0^2 = 0 and selects
// the root > 1 at which h_min changes sign from + to - as d increases
// (checked at d_c (1 -+ 1e-6)).
inline CriticalDiffusion critical_diffusion(const JacobianAtSteadyState& j) {
  if (j.f_u0 == 0.0)
    throw std::invalid_argument("critical_diffusion: requires f_u0 != 0");
  double qa = j.f_u0 * j.f_u0;
  double qb = 2.0 * (2.0 * j.f_v0 * j.g_u0 - j.f_u0 * j.g_v0);
  double qc = j.g_v0 * j.g_v0;
  double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0)
    throw std::runtime_error("no Turing bifurcation for these kinetics");
  auto [z1, z2] = quadratic_roots(qb / qa, qc / qa);
  CriticalDiffusion out;
  out.all_roots = {z2.real(), z1.real()};
  auto h_min_sign = [&](double d) {
    double s = d * j.f_u0 + j.g_v0;
    return j.det - s * s / (4.0 * d);
  };
  std::vector<double> selected;
  for (double root : out.all_roots) {
    if (!(root > 1.0)) continue;
    double delta = 1e-6 * root;
    if (h_min_sign(root - delta) > 0.0 && h_min_sign(root + delta) < 0.0)
      selected.push_back(root);
  }
  if (selected.empty())
    throw std::runtime_error("no Turing bifurcation for these kinetics");
  if (selected.size() > 1)
    throw std::runtime_error(
        "critical_diffusion: ambiguous root selection (both roots > 1 pass the "
        "sign transition)");
  out.d_c = selected.front();
  double s = out.d_c * j.f_u0 + j.g_v0;
  double closure = std::abs(j.det - s * s / (4.0 * out.d_c));
  if (closure > 1e-9 * std::max(1.0, std::abs(j.det)))
    throw std::runtime_error("critical_diffusion: det J = (d_c f_u0 + g_v0)^2 / "
                             "(4 d_c) closure failed");
  return out;
}

// Zeros of h when d is supercritical:
// kappa_{1,2} = gamma/(2d) [ (d f_u0 + g_v0) -+ sqrt(disc) ]; empty when the
// discriminant is not positive.
inline std::optional<std::pair<double, double>> kappa_band(
    const JacobianAtSteadyState& j, double gamma, double d) {
  double s = d * j.f_u0 + j.g_v0;
  double disc = s * s - 4.0 * d * j.det;
  if (disc <= 0.0 || s <= 0.0) return std::nullopt;
  double kappa2 = gamma * (s + std::sqrt(disc)) / (2.0 * d);
  double kappa1 = gamma * gamma * j.det / (d * kappa2);
  return {{kappa1, kappa2}};
}

struct UnstableScale {
  int r = 0;
  double kappa = 0;
  std::int64_t multiplicity = 0;
  double lambda_plus = 0;
};

struct DispersionSample {
  double kappa = 0, re_lambda1 = 0, re_lambda2 = 0;
};

struct TuringReport {
  SteadyState steady;
  JacobianAtSteadyState jac;
  double gamma = 0, d = 0, alpha = 0;
  int p = 0, M = 0, L = 0;

  // T1..T6 with evaluated left-hand sides
  bool t1 = false, t2 = false, t3 = false, t4 = false, t5 = false, t6 = false;
  double t1_lhs = 0;  // Tr J            (< 0)
  double t2_lhs = 0;  // det J           (> 0)
  double t3_lhs = 0;  // d f_u0 + g_v0   (> 0)
  double t4_lhs = 0;  // f_u0 * g_v0     (< 0)
  double t5_lhs = 0;  // discriminant    (> 0)

  double d_c = std::numeric_limits<double>::quiet_NaN();
  std::string d_c_note;
  double kappa_c = std::numeric_limits<double>::quiet_NaN();
  double kappa_min = 0, h_min = 0;
  double kappa1 = std::numeric_limits<double>::quiet_NaN();
  double kappa2 = std::numeric_limits<double>::quiet_NaN();

  std::vector<UnstableScale> unstable_scales;
  std::vector<int> marginal_scales;  // grid scales within 1e-12 of a band edge

  // the constant mode is excluded from T6 but reported
  double lambda_M = 0;
  bool lambda_M_in_band = false;
  double lambda_M_growth = 0;

  std::optional<UnstableScale> dominant;
  bool turing_unstable = false;
  std::vector<DispersionSample> samples;
};

// Full instability analysis: steady state, Jacobian, conditions T1-T6 with
// strict inequalities, critical diffusion, unstable wavenumber band, the
// grid's unstable scales, and a sampled dispersion relation.
inline TuringReport turing_report(const KineticsModel& model, const GridGeometry& g,
                                  double alpha,
                                  std::pair<double, double> guess = {1.0, 1.0}) {
  if (model.d == 1.0)
    throw std::invalid_argument(
        "turing_report: diffusion ratio d = 1 admits no diffusion-driven "
        "instability; require d != 1");
  if (!(model.gamma > 0.0))
    throw std::invalid_argument("turing_report: require gamma > 0");
  if (!(model.d > 0.0))
    throw std::invalid_argument("turing_report: require d > 0");

  TuringReport rep;
  rep.gamma = model.gamma;
  rep.d = model.d;
  rep.alpha = alpha;
  rep.p = g.p;
  rep.M = g.M;
  rep.L = g.L;
  rep.steady = find_steady_state(model, guess);
  rep.jac = jacobian_at(model, rep.steady);

  const double gamma = model.gamma, d = model.d;
  rep.t1_lhs = rep.jac.trace;
  rep.t1 = rep.t1_lhs < 0.0;
  rep.t2_lhs = rep.jac.det;
  rep.t2 = rep.t2_lhs > 0.0;
  rep.t3_lhs = d * rep.jac.f_u0 + rep.jac.g_v0;
  rep.t3 = rep.t3_lhs > 0.0;
  rep.t4_lhs = rep.jac.f_u0 * rep.jac.g_v0;
  rep.t4 = rep.t4_lhs < 0.0;
  rep.t5_lhs = rep.t3_lhs * rep.t3_lhs - 4.0 * d * rep.jac.det;
  rep.t5 = rep.t5_lhs > 0.0;

  KappaExtrema ext = kappa_extrema(rep.jac, gamma, d);
  rep.kappa_min = ext.kappa_min;
  rep.h_min = ext.h_min;

  try {
    CriticalDiffusion cd = critical_diffusion(rep.jac);
    rep.d_c = cd.d_c;
    rep.kappa_c = gamma * std::sqrt(rep.jac.det / cd.d_c);
  } catch (const std::exception& e) {
    rep.d_c_note = e.what();
  }

  auto band = kappa_band(rep.jac, gamma, d);
  if (band) {
    rep.kappa1 = band->first;
    rep.kappa2 = band->second;
  }

  OperatorConstants constants(g.p, g.M, alpha);
  rep.lambda_M = constants.lambda_M;
  auto strictly_inside = [&](double kappa) {
    return band && kappa > rep.kappa1 && kappa < rep.kappa2;
  };
  auto near_edge = [&](double kappa) {
    if (!band) return false;
    return std::abs(kappa - rep.kappa1) <= 1e-12 * std::max(1.0, rep.kappa1) ||
           std::abs(kappa - rep.kappa2) <= 1e-12 * std::max(1.0, rep.kappa2);
  };

  for (int r = g.M; r >= 1 - g.L; --r) {
    double kappa = wavelet_eigenvalue(g.p, alpha, r);
    if (near_edge(kappa)) {
      rep.marginal_scales.push_back(r);
      continue;
    }
    if (strictly_inside(kappa)) {
      double lambda_plus = dispersion(rep.jac, gamma, d, kappa).first.real();
      rep.unstable_scales.push_back(
          {r, kappa, wavelet_scale_multiplicity(g, r), lambda_plus});
    }
  }
  rep.t6 = !rep.unstable_scales.empty();

  rep.lambda_M_in_band = strictly_inside(constants.lambda_M);
  rep.lambda_M_growth =
      dispersion(rep.jac, gamma, d, constants.lambda_M).first.real();

  for (const UnstableScale& s : rep.unstable_scales)
    if (!rep.dominant || s.lambda_plus > rep.dominant->lambda_plus) rep.dominant = s;

  rep.turing_unstable = rep.t1 && rep.t2 && rep.t3 && rep.t4 && rep.t5 && rep.t6;

  // 200 log-spaced samples covering every grid eigenvalue with a factor-p margin
  double lo = wavelet_eigenvalue(g.p, alpha, g.M) / g.p;
  double hi = wavelet_eigenvalue(g.p, alpha, 1 - g.L) * g.p;
  const int count = 200;
  rep.samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    double kappa = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
    auto [l1, l2] = dispersion(rep.jac, gamma, d, kappa);
    rep.samples.push_back({kappa, l1.real(), l2.real()});
  }
  return rep;
}

}  // namespace pmorph
