#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pmorph/grid.hpp"
#include "pmorph/kinetics.hpp"
#include "pmorph/modes.hpp"
#include "pmorph/threading.hpp"
#include "pmorph/turing.hpp"
#include "pmorph/vladimirov.hpp"

namespace pmorph {

enum class Scheme { imex_euler, rk4 };

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "imex_euler") return Scheme::imex_euler;
  if (s == "rk4") return Scheme::rk4;
  throw std::invalid_argument("unknown scheme '" + s + "' (imex_euler | rk4)");
}

inline std::string to_string(Scheme s) {
  return s == Scheme::imex_euler ? "imex_euler" : "rk4";
}

// Time integration setup for
//   du/dt = gamma f(u,v) - A (u - u_ref)
//   dv/dt = gamma g(u,v) - d A (v - v_ref).
// The operator acts on the deviation from the reference steady state: the
// perturbation space excludes the constant, so the uniform steady state is an
// exact fixed point while every wavelet mode sees its eigenvalue
// p^{(1-r)alpha}.
struct SimulationConfig {
  GridGeometry geometry;
  double alpha = 1.0;
  KineticsModel model;
  double u_ref = 0, v_ref = 0;  // reference steady state
  double t_end = 1.0;
  double dt = 1e-3;
  Scheme scheme = Scheme::imex_euler;
  double perturbation_amplitude = 1e-2;
  std::uint64_t seed = 1;
  std::int64_t snapshot_stride = 1;
};

// Config with the reference taken from the model's steady state.
inline SimulationConfig make_simulation_config(const GridGeometry& g, double alpha,
                                               const KineticsModel& model) {
  SteadyState s = find_steady_state(model, {1.0, 1.0});
  SimulationConfig cfg{g, alpha, model};
  cfg.u_ref = s.u0;
  cfg.v_ref = s.v0;
  return cfg;
}

struct SimulationState {
  double t = 0;
  Eigen::VectorXd u, v;
};

struct Snapshot {
  std::int64_t step = 0;
  double t = 0;
  Eigen::VectorXd u, v;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  SimulationState final_state;
};

// Thrown when the state leaves the finite range; carries the last good state.
struct SimulationBlowup : std::runtime_error {
  SimulationState last_good;
  std::int64_t step = 0;
  SimulationBlowup(const std::string& msg, SimulationState state, std::int64_t at)
      : std::runtime_error(msg), last_good(std::move(state)), step(at) {}
};

inline void validate(const SimulationConfig& cfg, const VladimirovOperator& op) {
  if (!(cfg.dt > 0)) throw std::invalid_argument("simulation: require dt > 0");
  if (cfg.t_end < 0) throw std::invalid_argument("simulation: require t_end >= 0");
  if (cfg.t_end > 0 && cfg.t_end < cfg.dt)
    throw std::invalid_argument("simulation: require t_end >= dt");
  if (!(cfg.perturbation_amplitude >= 0))
    throw std::invalid_argument("simulation: require perturbation amplitude >= 0");
  if (cfg.snapshot_stride < 1)
    throw std::invalid_argument("simulation: require snapshot_stride >= 1");
  if (cfg.scheme == Scheme::rk4) {
    double spread = cfg.dt * std::max(1.0, cfg.model.d) * op.max_eigenvalue();
    if (spread > 2.5)
      throw std::invalid_argument(
          "simulation: rk4 stability guard failed: dt * max eigenvalue of d*A = " +
          std::to_string(spread) + " > 2.5 (reduce dt or use imex_euler)");
  }
}

// splitmix64: fixed algorithm so streams are identical across platforms and
// standard library versions.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(next() >> 11) * 0x1.0p-53);
  }

 private:
  std::uint64_t state_;
};

// u = u_ref + du, v = v_ref + dv with du, dv i.i.d. uniform in +-eps*ref from
// the seeded generator, then mean-subtracted so the perturbation starts with
// exact zero grid mean (projection onto the wavelet span). Never clamps:
// amplitudes that could touch zero are rejected instead.
inline SimulationState initial_condition(const SimulationConfig& cfg) {
  double eps = cfg.perturbation_amplitude;
  if (eps >= 1.0)
    throw std::invalid_argument(
        "initial_condition: perturbation amplitude must be < 1 to preserve "
        "positivity");
  const std::int64_t n = cfg.geometry.N;
  SimulationState state;
  state.t = 0;
  state.u = Eigen::VectorXd::Constant(n, cfg.u_ref);
  state.v = Eigen::VectorXd::Constant(n, cfg.v_ref);
  if (eps == 0.0) return state;

  SeededRng rng(cfg.seed);
  Eigen::VectorXd du(n), dv(n);
  for (std::int64_t i = 0; i < n; ++i)
    du(i) = rng.uniform(-eps * cfg.u_ref, eps * cfg.u_ref);
  for (std::int64_t i = 0; i < n; ++i)
    dv(i) = rng.uniform(-eps * cfg.v_ref, eps * cfg.v_ref);
  du.array() -= du.mean();
  dv.array() -= dv.mean();
  state.u += du;
  state.v += dv;
  if ((state.u.array() < 0).any() || (state.v.array() < 0).any())
    throw std::invalid_argument(
        "initial_condition: perturbation would violate positivity; reduce "
        "amplitude");
  return state;
}

// Componentwise reaction terms f(u_I, v_I), g(u_I, v_I).
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> reaction_eval(
    const KineticsModel& model, const SimulationState& state) {
  const std::int64_t n = state.u.size();
  Eigen::VectorXd fu(n), gv(n);
  parallel_for(n, [&](std::int64_t i) {
    fu(i) = model.f(state.u(i), state.v(i));
    gv(i) = model.g(state.u(i), state.v(i));
  });
  if (!fu.allFinite() || !gv.allFinite())
    throw std::runtime_error("reaction_eval: non-finite reaction value");
  return {std::move(fu), std::move(gv)};
}

// One time step. imex_euler treats the reaction explicitly and the diffusion
// implicitly through the eigendecomposition of A; rk4 is the classical
// explicit scheme over apply_fast.
inline SimulationState step(const SimulationConfig& cfg, const VladimirovOperator& op,
                            const SimulationState& state) {
  const double gamma = cfg.model.gamma, d = cfg.model.d, dt = cfg.dt;
  SimulationState out;
  out.t = state.t + dt;
  if (cfg.scheme == Scheme::imex_euler) {
    auto [fu, gv] = reaction_eval(cfg.model, state);
    Eigen::VectorXd bu = (state.u.array() - cfg.u_ref).matrix() + dt * gamma * fu;
    Eigen::VectorXd bv = (state.v.array() - cfg.v_ref).matrix() + dt * gamma * gv;
    out.u = op.solve_shifted(dt, bu).array() + cfg.u_ref;
    out.v = op.solve_shifted(dt * d, bv).array() + cfg.v_ref;
  } else {
    auto rhs = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
      SimulationState s{0.0, u, v};
      auto [fu, gv] = reaction_eval(cfg.model, s);
      Eigen::VectorXd wu = u.array() - cfg.u_ref;
      Eigen::VectorXd wv = v.array() - cfg.v_ref;
      return std::pair<Eigen::VectorXd, Eigen::VectorXd>(
          gamma * fu - op.apply_fast(wu), gamma * gv - d * op.apply_fast(wv));
    };
    auto [k1u, k1v] = rhs(state.u, state.v);
    auto [k2u, k2v] = rhs(state.u + 0.5 * dt * k1u, state.v + 0.5 * dt * k1v);
    auto [k3u, k3v] = rhs(state.u + 0.5 * dt * k2u, state.v + 0.5 * dt * k2v);
    auto [k4u, k4v] = rhs(state.u + dt * k3u, state.v + dt * k3v);
    out.u = state.u + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    out.v = state.v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  return out;
}

// Integrates to t_end, recording every snapshot_stride-th step plus the
// initial and final states. Deterministic given config and seed; the time
// loop is sequential, parallelism lives inside reaction_eval/apply_fast.
inline Trajectory run(const SimulationConfig& cfg, const VladimirovOperator& op) {
  validate(cfg, op);
  Trajectory traj;
  SimulationState state = initial_condition(cfg);
  const std::int64_t total =
      cfg.t_end == 0 ? 0 : static_cast<std::int64_t>(std::llround(cfg.t_end / cfg.dt));
  traj.snapshots.push_back({0, 0.0, state.u, state.v});
  for (std::int64_t k = 1; k <= total; ++k) {
    SimulationState next;
    try {
      next = step(cfg, op, state);
    } catch (const std::exception& e) {
      throw SimulationBlowup("simulation aborted at step " + std::to_string(k) +
                                 ": " + e.what(),
                             std::move(state), k - 1);
    }
    if (!next.u.allFinite() || !next.v.allFinite())
      throw SimulationBlowup("simulation aborted at step " + std::to_string(k) +
                                 ": non-finite state",
                             std::move(state), k - 1);
    state = std::move(next);
    state.t = static_cast<double>(k) * cfg.dt;
    if (k % cfg.snapshot_stride == 0 || k == total)
      traj.snapshots.push_back({k, state.t, state.u, state.v});
  }
  traj.final_state = std::move(state);
  return traj;
}

// e^{Bt} for a real 2x2 matrix, closed form via the traceless split.
inline Eigen::Matrix2d expm2(const Eigen::Matrix2d& B, double t) {
  double mu = 0.5 * B.trace();
  Eigen::Matrix2d D = B - mu * Eigen::Matrix2d::Identity();
  double q2 = -D.determinant();  // q^2 = (a-d)^2/4 + bc
  double c, s;                   // cosh(qt), sinh(qt)/q (or trig analogue)
  if (q2 > 1e-300) {
    double q = std::sqrt(q2);
    c = std::cosh(q * t);
    s = std::sinh(q * t) / q;
  } else if (q2 < -1e-300) {
    double w = std::sqrt(-q2);
    c = std::cos(w * t);
    s = std::sin(w * t) / w;
  } else {
    c = 1.0;
    s = t;
  }
  return std::exp(mu * t) * (c * Eigen::Matrix2d::Identity() + s * D);
}

struct ForecastOptions {
  // Keep only the modes inside the unstable band (the asymptotic dominant-mode
  // form); by default every mode is retained and decaying modes decay.
  bool truncate_to_unstable_band = false;
};

// Linear evolution of a perturbation pair: each wavelet mode coefficient pair
// (c_u, c_v) evolves by exp((gamma J - kappa diag(1,d)) t); the constant
// component evolves with kappa = lambda_M.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> linear_forecast(
    const SimulationConfig& cfg, const VladimirovOperator& op,
    const Eigen::VectorXd& wu0, const Eigen::VectorXd& wv0, double t,
    ForecastOptions fopt = {}) {
  const GridGeometry& g = cfg.geometry;
  JacobianAtSteadyState j =
      jacobian_at(cfg.model, SteadyState{cfg.u_ref, cfg.v_ref, 0.0});
  Eigen::Matrix2d gammaJ;
  gammaJ << j.f_u0, j.f_v0, j.g_u0, j.g_v0;
  gammaJ *= cfg.model.gamma;
  Eigen::Matrix2d diff = Eigen::Vector2d(1.0, cfg.model.d).asDiagonal();
  auto band = kappa_band(j, cfg.model.gamma, cfg.model.d);
  auto keep = [&](double kappa) {
    if (!fopt.truncate_to_unstable_band) return true;
    return band && kappa > band->first && kappa < band->second;
  };
  auto mode_matrix = [&](double kappa) {
    return expm2(gammaJ - kappa * diff, t);
  };

  ModeSpectrum su = project_modes(wu0, g);
  ModeSpectrum sv = project_modes(wv0, g);
  ModeSpectrum out_u = su, out_v = sv;

  double lambda_M = op.constants().lambda_M;
  if (keep(lambda_M)) {
    Eigen::Vector2d c(su.constant_component, sv.constant_component);
    c = mode_matrix(lambda_M) * c;
    out_u.constant_component = c(0);
    out_v.constant_component = c(1);
  } else {
    out_u.constant_component = out_v.constant_component = 0.0;
  }

  for (std::size_t i = 0; i < su.entries.size(); ++i) {
    double kappa = wavelet_eigenvalue(g.p, cfg.alpha, su.entries[i].index.r);
    if (!keep(kappa)) {
      out_u.entries[i].amplitude_cos = out_u.entries[i].amplitude_sin = 0.0;
      out_v.entries[i].amplitude_cos = out_v.entries[i].amplitude_sin = 0.0;
      continue;
    }
    Eigen::Matrix2d E = mode_matrix(kappa);
    Eigen::Vector2d cc(su.entries[i].amplitude_cos, sv.entries[i].amplitude_cos);
    Eigen::Vector2d cs(su.entries[i].amplitude_sin, sv.entries[i].amplitude_sin);
    cc = E * cc;
    cs = E * cs;
    out_u.entries[i].amplitude_cos = cc(0);
    out_v.entries[i].amplitude_cos = cc(1);
    out_u.entries[i].amplitude_sin = cs(0);
    out_v.entries[i].amplitude_sin = cs(1);
  }
  for (ModeSpectrum* s : {&out_u, &out_v})
    for (ModeEntry& e : s->entries)
      e.power = e.amplitude_cos * e.amplitude_cos + e.amplitude_sin * e.amplitude_sin;

  return {reconstruct_modes(out_u, g), reconstruct_modes(out_v, g)};
}

// Left eigenvector of gamma J - kappa diag(1,d) for its larger eigenvalue:
// projecting a mode's (c_u, c_v) pair onto it isolates the exp(lambda_+ t)
// component, so growth-rate fits are free of the decaying transient.
inline Eigen::Vector2d growing_direction_left(const JacobianAtSteadyState& j,
                                              double gamma, double d, double kappa) {
  Eigen::Matrix2d B;
  B << gamma * j.f_u0 - kappa, gamma * j.f_v0, gamma * j.g_u0,
      gamma * j.g_v0 - kappa * d;
  double lambda_plus = dispersion(j, gamma, d, kappa).first.real();
  // rows of (B - lambda I) are orthogonal to the right eigenvector; a left
  // eigenvector is a null vector of (B^T - lambda I)
  Eigen::Vector2d cand1(B(1, 0), lambda_plus - B(0, 0));
  Eigen::Vector2d cand2(lambda_plus - B(1, 1), B(0, 1));
  Eigen::Vector2d l = cand1.norm() >= cand2.norm() ? cand1 : cand2;
  double n = l.norm();
  if (n == 0.0) return Eigen::Vector2d(1.0, 0.0);
  return l / n;
}

// Aggregated amplitude of the growing component over all modes at scale r.
inline double scale_growth_amplitude(const Eigen::VectorXd& wu,
                                     const Eigen::VectorXd& wv,
                                     const GridGeometry& g, int r,
                                     const Eigen::Vector2d& left) {
  double acc = 0.0;
  ModeSpectrum su = project_modes(wu, g);
  ModeSpectrum sv = project_modes(wv, g);
  for (std::size_t i = 0; i < su.entries.size(); ++i) {
    if (su.entries[i].index.r != r) continue;
    double ac = left(0) * su.entries[i].amplitude_cos +
                left(1) * sv.entries[i].amplitude_cos;
    double as = left(0) * su.entries[i].amplitude_sin +
                left(1) * sv.entries[i].amplitude_sin;
    acc += ac * ac + as * as;
  }
  return std::sqrt(acc);
}

// Least-squares slope of log(amplitude) against t; non-positive amplitudes
// are skipped.
inline std::optional<double> fit_log_slope(
    const std::vector<std::pair<double, double>>& t_amp) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& [t, a] : t_amp) {
    if (!(a > 0) || !std::isfinite(a)) continue;
    double y = std::log(a);
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++n;
  }
  if (n < 2) return std::nullopt;
  double denom = n * sxx - sx * sx;
  if (denom == 0) return std::nullopt;
  return (n * sxy - sx * sy) / denom;
}

}  // namespace pmorph
