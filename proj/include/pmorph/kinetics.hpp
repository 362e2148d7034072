#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pmorph {

// Two-species reaction pair (f, g) with analytic Jacobian, reaction strength
// gamma and diffusion ratio d. Immutable and shareable.
struct KineticsModel {
  std::string name;
  std::map<std::string, double> params;
  std::function<double(double, double)> f;
  std::function<double(double, double)> g;
  std::function<Eigen::Matrix2d(double, double)> jacobian;
  double gamma = 1.0;
  double d = 1.0;
  std::optional<std::pair<double, double>> closed_form_steady;
};

struct SteadyState {
  double u0 = 0;
  double v0 = 0;
  double residual = 0;
};

struct JacobianAtSteadyState {
  double f_u0 = 0, f_v0 = 0, g_u0 = 0, g_v0 = 0;
  double trace = 0, det = 0;
};

// Raised when the steady-state solve fails (no convergence, singular
// Jacobian, or a non-positive solution).
struct SteadyStateError : std::runtime_error {
  explicit SteadyStateError(const std::string& msg) : std::runtime_error(msg) {}
};

// f = a - u + u^2 v, g = b - u^2 v; steady state (a+b, b/(a+b)^2).
inline KineticsModel make_schnakenberg(double a, double b, double gamma, double d) {
  if (!(a > 0) || !(b > 0))
    throw std::invalid_argument("schnakenberg: require a, b > 0");
  KineticsModel m;
  m.name = "schnakenberg";
  m.params = {{"a", a}, {"b", b}};
  m.f = [a](double u, double v) { return a - u + u * u * v; };
  m.g = [b](double u, double v) { return b - u * u * v; };
  m.jacobian = [](double u, double v) {
    Eigen::Matrix2d J;
    J << -1.0 + 2.0 * u * v, u * u, -2.0 * u * v, -u * u;
    return J;
  };
  m.gamma = gamma;
  m.d = d;
  m.closed_form_steady = {{a + b, b / ((a + b) * (a + b))}};
  return m;
}

// f = a - (b+1)u + u^2 v, g = bu - u^2 v; steady state (a, b/a).
inline KineticsModel make_brusselator(double a, double b, double gamma, double d) {
  if (!(a > 0) || !(b > 0))
    throw std::invalid_argument("brusselator: require a, b > 0");
  KineticsModel m;
  m.name = "brusselator";
  m.params = {{"a", a}, {"b", b}};
  m.f = [a, b](double u, double v) { return a - (b + 1.0) * u + u * u * v; };
  m.g = [b](double u, double v) { return b * u - u * u * v; };
  m.jacobian = [b](double u, double v) {
    Eigen::Matrix2d J;
    J << -(b + 1.0) + 2.0 * u * v, u * u, b - 2.0 * u * v, -u * u;
    return J;
  };
  m.gamma = gamma;
  m.d = d;
  m.closed_form_steady = {{a, b / a}};
  return m;
}

// Damped Newton on (f, g) with the analytic Jacobian; converges to residual
// <= 1e-12 or reports the iteration trace. Built-in models use their closed
// forms as the starting point.
inline SteadyState find_steady_state(const KineticsModel& m,
                                     std::pair<double, double> guess) {
  auto residual_of = [&](double u, double v) {
    return std::max(std::abs(m.f(u, v)), std::abs(m.g(u, v)));
  };
  double u = guess.first, v = guess.second;
  if (m.closed_form_steady) {
    u = m.closed_form_steady->first;
    v = m.closed_form_steady->second;
  }
  std::ostringstream trace;
  double res = residual_of(u, v);
  for (int it = 0; it < 100 && res > 1e-12; ++it) {
    Eigen::Matrix2d J = m.jacobian(u, v);
    Eigen::Vector2d F(m.f(u, v), m.g(u, v));
    if (std::abs(J.determinant()) < 1e-300)
      throw SteadyStateError("find_steady_state: singular Jacobian at (" +
                             std::to_string(u) + ", " + std::to_string(v) + ")");
    Eigen::Vector2d delta = J.partialPivLu().solve(F);
    double step = 1.0;
    double best = res;
    double nu = u, nv = v;
    for (int back = 0; back < 40; ++back) {
      double cu = u - step * delta(0), cv = v - step * delta(1);
      double cres = residual_of(cu, cv);
      if (cres < best) {
        best = cres;
        nu = cu;
        nv = cv;
        break;
      }
      step *= 0.5;
    }
    if (best >= res) {
      trace << "iter " << it << ": stalled at residual " << res << "\n";
      break;
    }
    u = nu;
    v = nv;
    res = best;
    trace << "iter " << it << ": residual " << res << "\n";
  }
  if (res > 1e-12)
    throw SteadyStateError("find_steady_state: no convergence in 100 iterations\n" +
                           trace.str());
  if (!(u > 0.0) || !(v > 0.0))
    throw SteadyStateError("find_steady_state: steady state (" + std::to_string(u) +
                           ", " + std::to_string(v) + ") is not positive");
  return {u, v, res};
}

inline JacobianAtSteadyState jacobian_at(const KineticsModel& m, const SteadyState& s) {
  Eigen::Matrix2d J = m.jacobian(s.u0, s.v0);
  JacobianAtSteadyState out;
  out.f_u0 = J(0, 0);
  out.f_v0 = J(0, 1);
  out.g_u0 = J(1, 0);
  out.g_v0 = J(1, 1);
  out.trace = out.f_u0 + out.g_v0;
  out.det = out.f_u0 * out.g_v0 - out.f_v0 * out.g_u0;
  return out;
}

}  // namespace pmorph
