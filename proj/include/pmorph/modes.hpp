#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pmorph/grid.hpp"
#include "pmorph/wavelets.hpp"

namespace pmorph {

struct ModeEntry {
  WaveletIndex index;        // canonical representative (j <= (p-1)/2)
  double amplitude_cos = 0;  // coefficient on the unit-norm cos mode
  double amplitude_sin = 0;  // coefficient on the unit-norm sin mode (0 for p = 2)
  double power = 0;          // amplitude_cos^2 + amplitude_sin^2
};

// Expansion of a grid field over the real orthonormal wavelet modes plus the
// normalized constant. Parseval holds exactly: constant_component^2 plus the
// total power equals the squared discrete L2 norm.
struct ModeSpectrum {
  std::vector<ModeEntry> entries;
  double constant_component = 0;

  double total_power() const {
    double s = 0;
    for (const ModeEntry& e : entries) s += e.power;
    return s;
  }
};

// Discrete inner product <f,g> = p^{-L} sum_x f(x) g(x) (cell Haar measure).
inline double discrete_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                             const GridGeometry& g) {
  return std::pow(static_cast<double>(g.p), -g.L) * a.dot(b);
}

inline double discrete_norm_sq(const Eigen::VectorXd& a, const GridGeometry& g) {
  return discrete_inner(a, a, g);
}

// Projects a field onto every canonical real mode and the constant. Inner
// products are accumulated over the mode supports only.
inline ModeSpectrum project_modes(const Eigen::VectorXd& field, const GridGeometry& g) {
  if (field.size() != g.N)
    throw std::invalid_argument("project_modes: field length != N");
  double weight = std::pow(static_cast<double>(g.p), -g.L);
  ModeSpectrum spec;
  spec.constant_component =
      weight * field.sum() * std::pow(static_cast<double>(g.p), -0.5 * g.M);
  double scale = real_mode_scale(g.p);
  for (const WaveletIndex& w : canonical_real_modes(g)) {
    ModeEntry entry;
    entry.index = w;
    double acc_cos = 0, acc_sin = 0;
    for (std::int64_t i : wavelet_support(g, w)) {
      std::complex<double> z = wavelet_value(w, grid_point(g, i).value, g.p);
      acc_cos += field(i) * z.real();
      acc_sin += field(i) * z.imag();
    }
    entry.amplitude_cos = weight * scale * acc_cos;
    entry.amplitude_sin = mode_has_sin(g.p) ? weight * scale * acc_sin : 0.0;
    entry.power = entry.amplitude_cos * entry.amplitude_cos +
                  entry.amplitude_sin * entry.amplitude_sin;
    spec.entries.push_back(entry);
  }
  return spec;
}

// Inverse of project_modes (exact up to roundoff: the modes are a basis).
inline Eigen::VectorXd reconstruct_modes(const ModeSpectrum& spec,
                                         const GridGeometry& g) {
  Eigen::VectorXd field = Eigen::VectorXd::Constant(
      g.N, spec.constant_component * std::pow(static_cast<double>(g.p), -0.5 * g.M));
  for (const ModeEntry& e : spec.entries) {
    if (e.amplitude_cos != 0.0)
      field += e.amplitude_cos * sample_real_mode(e.index, WaveletPhase::cos, g);
    if (mode_has_sin(g.p) && e.amplitude_sin != 0.0)
      field += e.amplitude_sin * sample_real_mode(e.index, WaveletPhase::sin, g);
  }
  return field;
}

}  // namespace pmorph
