#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmorph/clusters.hpp"
#include "pmorph/grid.hpp"
#include "pmorph/modes.hpp"
#include "pmorph/simulate.hpp"
#include "pmorph/turing.hpp"
#include "pmorph/vladimirov.hpp"

namespace pmorph {

using json = nlohmann::ordered_json;

// Locale-independent decimal form with 17 significant digits (doubles
// round-trip bit-exactly).
inline std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                 std::chars_format::general, 17);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), ptr);
}

// ---------------------------------------------------------------------------
// SHA-1 (for git-style content hashes and output checksums)
// ---------------------------------------------------------------------------

class Sha1 {
 public:
  Sha1() { reset(); }

  void reset() {
    h_ = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
    len_ = 0;
    buf_.clear();
  }

  void update(std::string_view data) {
    len_ += data.size();
    buf_.append(data);
    while (buf_.size() >= 64) {
      process(reinterpret_cast<const unsigned char*>(buf_.data()));
      buf_.erase(0, 64);
    }
  }

  std::string hex_digest() {
    std::string tail = buf_;
    std::uint64_t bits = len_ * 8;
    tail.push_back(static_cast<char>(0x80));
    while (tail.size() % 64 != 56) tail.push_back('\0');
    for (int i = 7; i >= 0; --i)
      tail.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
    for (std::size_t off = 0; off < tail.size(); off += 64)
      process(reinterpret_cast<const unsigned char*>(tail.data() + off));
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (std::uint32_t w : h_)
      for (int i = 7; i >= 0; --i) out.push_back(digits[(w >> (4 * i)) & 0xf]);
    reset();
    return out;
  }

 private:
  void process(const unsigned char* block) {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(block[4 * i]) << 24) | (std::uint32_t(block[4 * i + 1]) << 16) |
             (std::uint32_t(block[4 * i + 2]) << 8) | std::uint32_t(block[4 * i + 3]);
    auto rol = [](std::uint32_t x, int s) { return (x << s) | (x >> (32 - s)); };
    for (int i = 16; i < 80; ++i)
      w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    std::uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3], e = h_[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      std::uint32_t t = rol(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rol(b, 30);
      b = a;
      a = t;
    }
    h_[0] += a;
    h_[1] += b;
    h_[2] += c;
    h_[3] += d;
    h_[4] += e;
  }

  std::array<std::uint32_t, 5> h_{};
  std::uint64_t len_ = 0;
  std::string buf_;
};

inline std::string sha1_hex(std::string_view data) {
  Sha1 h;
  h.update(data);
  return h.hex_digest();
}

// git blob hash: sha1("blob <len>\0" + content)
inline std::string git_blob_sha1(std::string_view content) {
  Sha1 h;
  h.update("blob " + std::to_string(content.size()) + '\0');
  h.update(content);
  return h.hex_digest();
}

// Writes through a ".partial" staging file and renames into place, so no
// destination path ever holds partial content.
inline void atomic_write_file(const std::filesystem::path& path,
                              std::string_view content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::filesystem::path staging = path;
  staging += ".partial";
  {
    std::ofstream out(staging, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + staging.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + staging.string());
  }
  std::filesystem::rename(staging, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// CSV exports (comma separator, '.' decimal, 17 significant digits, header)
// ---------------------------------------------------------------------------

inline std::string grid_points_csv(const GridGeometry& g) {
  std::ostringstream out;
  out << "index,digits,value\n";
  for (std::int64_t i = 0; i < g.N; ++i) {
    GridPoint pt = grid_point(g, i);
    out << i << "," << digit_string(pt) << "," << to_string(pt.value) << "\n";
  }
  return out.str();
}

inline std::string snapshots_csv(const Trajectory& traj, const GridGeometry& g) {
  std::ostringstream out;
  out << "step,t,index,digits,u,v\n";
  std::vector<std::string> digits;
  digits.reserve(static_cast<std::size_t>(g.N));
  for (std::int64_t i = 0; i < g.N; ++i) digits.push_back(digit_string(grid_point(g, i)));
  for (const Snapshot& s : traj.snapshots)
    for (std::int64_t i = 0; i < g.N; ++i)
      out << s.step << "," << format_double(s.t) << "," << i << "," << digits[i] << ","
          << format_double(s.u(i)) << "," << format_double(s.v(i)) << "\n";
  return out.str();
}

inline std::string mode_spectrum_csv(const ModeSpectrum& spec) {
  std::ostringstream out;
  out << "r,n,j,amp_cos,amp_sin,power\n";
  for (const ModeEntry& e : spec.entries)
    out << e.index.r << "," << to_string(e.index.n) << "," << e.index.j << ","
        << format_double(e.amplitude_cos) << "," << format_double(e.amplitude_sin)
        << "," << format_double(e.power) << "\n";
  return out.str();
}

inline std::string dispersion_csv(const TuringReport& rep) {
  std::ostringstream out;
  out << "kappa,re_lambda1,re_lambda2\n";
  for (const DispersionSample& s : rep.samples)
    out << format_double(s.kappa) << "," << format_double(s.re_lambda1) << ","
        << format_double(s.re_lambda2) << "\n";
  return out.str();
}

inline std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::ostringstream out;
  out << "row,col,value\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      out << r << "," << c << "," << format_double(m(r, c)) << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Binary matrix format: 8-byte header (magic "PADOP\0" + little-endian u16
// version), then row-major doubles.
// ---------------------------------------------------------------------------

inline constexpr char kMatrixMagic[6] = {'P', 'A', 'D', 'O', 'P', '\0'};
inline constexpr std::uint16_t kMatrixVersion = 1;

inline std::string matrix_binary(const Eigen::MatrixXd& m) {
  std::string out;
  out.reserve(8 + static_cast<std::size_t>(m.size()) * sizeof(double));
  out.append(kMatrixMagic, 6);
  out.push_back(static_cast<char>(kMatrixVersion & 0xff));
  out.push_back(static_cast<char>(kMatrixVersion >> 8));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double v = m(r, c);
      char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      out.append(bytes, sizeof(double));
    }
  return out;
}

// Square row-major payload; the dimension is implied by the byte count.
inline Eigen::MatrixXd matrix_from_binary(std::string_view bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMatrixMagic, 6) != 0)
    throw std::runtime_error("matrix_from_binary: bad magic");
  std::uint16_t version = static_cast<std::uint8_t>(bytes[6]) |
                          (static_cast<std::uint16_t>(static_cast<std::uint8_t>(bytes[7])) << 8);
  if (version != kMatrixVersion)
    throw std::runtime_error("matrix_from_binary: unsupported version " +
                             std::to_string(version));
  std::size_t payload = bytes.size() - 8;
  if (payload % sizeof(double) != 0)
    throw std::runtime_error("matrix_from_binary: truncated payload");
  std::size_t count = payload / sizeof(double);
  auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(count))));
  if (static_cast<std::size_t>(n) * static_cast<std::size_t>(n) != count)
    throw std::runtime_error("matrix_from_binary: payload is not square");
  Eigen::MatrixXd m(n, n);
  const char* src = bytes.data() + 8;
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      double v;
      std::memcpy(&v, src, sizeof(double));
      src += sizeof(double);
      m(r, c) = v;
    }
  return m;
}

// ---------------------------------------------------------------------------
// JSON reports
// ---------------------------------------------------------------------------

inline json spectrum_report_json(const SpectrumReport& rep) {
  json lines = json::array();
  for (const SpectrumLine& l : rep.lines)
    lines.push_back({{"value", l.value},
                     {"multiplicity", l.multiplicity},
                     {"label", l.label}});
  json j{{"eigenvalues", lines},
         {"matched", rep.matched},
         {"max_relative_deviation", rep.max_relative_deviation},
         {"max_wavelet_residual", rep.max_wavelet_residual}};
  if (!rep.mismatches.empty()) j["mismatches"] = rep.mismatches;
  return j;
}

inline json turing_report_json(const TuringReport& r) {
  json scales = json::array();
  for (const UnstableScale& s : r.unstable_scales)
    scales.push_back({{"r", s.r},
                      {"kappa", s.kappa},
                      {"multiplicity", s.multiplicity},
                      {"lambda_plus", s.lambda_plus}});
  json j{
      {"grid", {{"p", r.p}, {"M", r.M}, {"L", r.L}}},
      {"alpha", r.alpha},
      {"gamma", r.gamma},
      {"d", r.d},
      {"steady_state",
       {{"u0", r.steady.u0}, {"v0", r.steady.v0}, {"residual", r.steady.residual}}},
      {"jacobian",
       {{"f_u0", r.jac.f_u0},
        {"f_v0", r.jac.f_v0},
        {"g_u0", r.jac.g_u0},
        {"g_v0", r.jac.g_v0},
        {"trace", r.jac.trace},
        {"det", r.jac.det}}},
      {"conditions",
       {{"T1", {{"holds", r.t1}, {"lhs", r.t1_lhs}}},
        {"T2", {{"holds", r.t2}, {"lhs", r.t2_lhs}}},
        {"T3", {{"holds", r.t3}, {"lhs", r.t3_lhs}}},
        {"T4", {{"holds", r.t4}, {"lhs", r.t4_lhs}}},
        {"T5", {{"holds", r.t5}, {"lhs", r.t5_lhs}}},
        {"T6", {{"holds", r.t6}, {"unstable_scale_count", r.unstable_scales.size()}}}}},
      {"d_c", r.d_c},
      {"kappa_c", r.kappa_c},
      {"kappa_min", r.kappa_min},
      {"h_min", r.h_min},
      {"kappa1", r.kappa1},
      {"kappa2", r.kappa2},
      {"unstable_scales", scales},
      {"marginal_scales", r.marginal_scales},
      {"lambda_M",
       {{"value", r.lambda_M},
        {"in_band", r.lambda_M_in_band},
        {"growth", r.lambda_M_growth}}},
      {"turing_unstable", r.turing_unstable},
  };
  if (!r.d_c_note.empty()) j["d_c_note"] = r.d_c_note;
  if (r.dominant)
    j["dominant_scale"] = {{"r", r.dominant->r},
                           {"kappa", r.dominant->kappa},
                           {"lambda_plus", r.dominant->lambda_plus}};
  return j;
}

inline std::string turing_report_text(const TuringReport& r) {
  std::ostringstream out;
  out << "Turing instability analysis\n";
  out << "  grid: p=" << r.p << " M=" << r.M << " L=" << r.L << "  alpha=" << r.alpha
      << "  gamma=" << r.gamma << "  d=" << r.d << "\n";
  out << "  steady state: u0=" << r.steady.u0 << " v0=" << r.steady.v0
      << " (residual " << r.steady.residual << ")\n";
  out << "  jacobian: f_u0=" << r.jac.f_u0 << " f_v0=" << r.jac.f_v0
      << " g_u0=" << r.jac.g_u0 << " g_v0=" << r.jac.g_v0 << "\n";
  auto row = [&](const char* name, bool holds, double lhs, const char* want) {
    out << "  " << name << ": " << (holds ? "holds" : "fails") << "  (lhs = " << lhs
        << ", want " << want << ")\n";
  };
  row("T1 trace", r.t1, r.t1_lhs, "< 0");
  row("T2 det", r.t2, r.t2_lhs, "> 0");
  row("T3 d*f_u0+g_v0", r.t3, r.t3_lhs, "> 0");
  row("T4 f_u0*g_v0", r.t4, r.t4_lhs, "< 0");
  row("T5 discriminant", r.t5, r.t5_lhs, "> 0");
  out << "  T6 band occupation: " << (r.t6 ? "holds" : "fails") << "  ("
      << r.unstable_scales.size() << " unstable scales)\n";
  out << "  d_c=" << r.d_c;
  if (!r.d_c_note.empty()) out << " (" << r.d_c_note << ")";
  out << "  kappa_c=" << r.kappa_c << "  kappa_min=" << r.kappa_min
      << "  h_min=" << r.h_min << "\n";
  out << "  band: (" << r.kappa1 << ", " << r.kappa2 << ")\n";
  out << "  lambda_M=" << r.lambda_M << (r.lambda_M_in_band ? " (in band)" : " (outside band)")
      << " growth=" << r.lambda_M_growth << "\n";
  for (const UnstableScale& s : r.unstable_scales)
    out << "  unstable scale r=" << s.r <<": kappa=" << s.kappa << " mult="
        << s.multiplicity << " lambda+=" << s.lambda_plus << "\n";
  if (r.dominant)
    out << "  dominant: r=" << r.dominant->r << " lambda+=" << r.dominant->lambda_plus
        << "\n";
  out << "verdict: " << (r.turing_unstable ? "Turing unstable" : "stable") << "\n";
  return out.str();
}

inline json cluster_report_json(const ClusterReport& rep) {
  json clusters = json::array();
  for (const Cluster& c : rep.clusters) {
    clusters.push_back({{"members", c.members},
                        {"size", c.members.size()},
                        {"mean_u", c.mean_u},
                        {"mean_v", c.mean_v},
                        {"sign", to_string(c.sign)},
                        {"level", c.level},
                        {"node", c.node}});
  }
  json histogram = json::object();
  for (const auto& [size, count] : rep.size_histogram)
    histogram[std::to_string(size)] = count;
  return json{{"threshold", rep.threshold},
              {"cluster_count", rep.clusters.size()},
              {"rich_count", rep.rich_count},
              {"poor_count", rep.poor_count},
              {"neutral_count", rep.neutral_count},
              {"size_histogram", histogram},
              {"clusters", clusters}};
}

}  // namespace pmorph
