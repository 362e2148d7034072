// padic-morphogen: instability analysis, operator diagnostics and time
// integration for p-adic reaction-diffusion systems on the grid G_{L,M}.
//
// Exit codes (stable contract):
//   0   command succeeded (for `analyze` this covers both verdicts)
//   2   malformed or invalid config
//   10  kinetics section invalid
//   11  steady-state solve failed
//   20  numerical spectrum does not match the analytic spectrum
//   21  N exceeds the dense cap for this command
//   30  simulation blow-up (last good snapshot preserved)

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "pmorph/config.hpp"
#include "pmorph/io.hpp"
#include "pmorph/pmorph.hpp"

namespace fs = std::filesystem;
using namespace pmorph;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitKinetics = 10;
constexpr int kExitSteadyState = 11;
constexpr int kExitSpectrumMismatch = 20;
constexpr int kExitDenseCap = 21;
constexpr int kExitBlowup = 30;

struct Invocation {
  std::string config_path;
  std::string out_override;
  int threads = 0;  // 0 = unset
};

class PhaseTimer {
 public:
  void start(const std::string& phase) {
    phase_ = phase;
    t0_ = std::chrono::steady_clock::now();
  }
  void stop() {
    if (phase_.empty()) return;
    auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_);
    seconds_[phase_] += dt.count();
    phase_.clear();
  }
  json to_json() const {
    json j = json::object();
    for (const auto& [k, v] : seconds_) j[k] = v;
    return j;
  }

 private:
  std::string phase_;
  std::chrono::steady_clock::time_point t0_;
  std::map<std::string, double> seconds_;
};

// Collects output files, then writes the manifest with per-file checksums.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& rel, std::string_view content) {
    atomic_write_file(dir_ / rel, content);
    checksums_[rel] = sha1_hex(content);
  }

  const fs::path& dir() const { return dir_; }

  void write_manifest(const std::string& command, const RunConfig& cfg,
                      const std::string& config_path, const PhaseTimer& timer,
                      const json& extra) {
    json files = json::array();
    for (const auto& [rel, sha] : checksums_)
      files.push_back({{"path", rel}, {"sha1", sha}});
    json manifest{{"tool", "padic-morphogen"},
                  {"version", PMORPH_VERSION},
                  {"command", command},
                  {"config_path", config_path},
                  {"config_sha1", git_blob_sha1(cfg.raw.dump(2) + "\n")},
                  {"config", cfg.raw},
                  {"output_directory", dir_.string()},
                  {"threads", thread_count()},
                  {"files", files},
                  {"timings_seconds", timer.to_json()}};
    if (!extra.is_null()) manifest["results"] = extra;
    atomic_write_file(dir_ / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  std::map<std::string, std::string> checksums_;
};

std::string prefixed(const RunConfig& cfg, const std::string& name) {
  if (cfg.output.prefix.empty()) return name;
  return cfg.output.prefix + "_" + name;
}

RunConfig load_config(const Invocation& inv) {
  if (!fs::exists(inv.config_path))
    throw ConfigError("config file not found: " + inv.config_path);
  RunConfig cfg = parse_config(read_file(inv.config_path));
  if (!inv.out_override.empty()) cfg.output.directory = inv.out_override;
  return cfg;
}

void apply_threads(const Invocation& inv) {
  set_thread_count(inv.threads > 0 ? inv.threads : thread_count_from_env());
}

int run_analyze(const Invocation& inv) {
  PhaseTimer timer;
  timer.start("parse_config");
  RunConfig cfg = load_config(inv);
  if (!cfg.op) throw ConfigError("missing required section 'operator'");
  if (!cfg.kinetics) throw ConfigError("missing required section 'kinetics'");
  if (!(cfg.op->alpha > 0)) throw ConfigError("field 'operator.alpha' must be > 0");
  GridGeometry geom = make_geometry(cfg);
  timer.stop();

  KineticsModel model = make_kinetics(*cfg.kinetics);

  TuringReport rep;
  try {
    timer.start("analysis");
    rep = turing_report(model, geom, cfg.op->alpha);
    timer.stop();
  } catch (const std::invalid_argument& e) {
    // d = 1 and friends: unusable kinetics parameters
    std::cerr << "kinetics error: " << e.what() << "\n";
    return kExitKinetics;
  }

  timer.start("write_outputs");
  OutputSet out(cfg.output.directory);
  out.write(prefixed(cfg, "turing_report.json"), turing_report_json(rep).dump(2) + "\n");
  out.write(prefixed(cfg, "turing_report.txt"), turing_report_text(rep));
  out.write(prefixed(cfg, "dispersion.csv"), dispersion_csv(rep));
  timer.stop();
  json extra{{"verdict", rep.turing_unstable ? "Turing unstable" : "stable"},
             {"unstable_scale_count", rep.unstable_scales.size()}};
  out.write_manifest("analyze", cfg, inv.config_path, timer, extra);
  std::cout << "verdict: " << (rep.turing_unstable ? "Turing unstable" : "stable")
            << " (report in " << out.dir().string() << ")\n";
  return 0;
}

int run_spectrum(const Invocation& inv) {
  PhaseTimer timer;
  timer.start("parse_config");
  RunConfig cfg = load_config(inv);
  if (!cfg.op) throw ConfigError("missing required section 'operator'");
  if (!(cfg.op->alpha > 0)) throw ConfigError("field 'operator.alpha' must be > 0");
  GridGeometry geom = make_geometry(cfg);
  OperatorOptions opt = make_operator_options(*cfg.op);
  timer.stop();

  if (geom.N > opt.dense_cap) {
    std::cerr << "N = " << geom.N << " exceeds the dense cap " << opt.dense_cap
              << "; the numerical check needs the dense matrix. The analytic "
                 "spectrum is still available through `analyze` outputs.\n";
    return kExitDenseCap;
  }

  timer.start("assemble");
  VladimirovOperator op(geom, cfg.op->alpha, opt);
  op.dense();
  timer.stop();

  timer.start("verify_spectrum");
  SpectrumReport rep = verify_spectrum(op);
  timer.stop();

  timer.start("write_outputs");
  OutputSet out(cfg.output.directory);
  out.write(prefixed(cfg, "spectrum.json"), spectrum_report_json(rep).dump(2) + "\n");
  std::ostringstream table;
  table << "analytic spectrum vs dense eigensolve (p=" << geom.p << " M=" << geom.M
        << " L=" << geom.L << " alpha=" << cfg.op->alpha
        << (opt.paper_literal ? ", paper-literal assembly" : "") << ")\n";
  table << "value  multiplicity  label\n";
  for (const SpectrumLine& l : rep.lines)
    table << format_double(l.value) << "  " << l.multiplicity << "  " << l.label
          << "\n";
  table << "max relative deviation: " << format_double(rep.max_relative_deviation)
        << "\n";
  table << "max wavelet residual:   " << format_double(rep.max_wavelet_residual)
        << "\n";
  table << "match: " << (rep.matched ? "yes" : "NO") << "\n";
  for (const std::string& m : rep.mismatches) table << "  mismatch: " << m << "\n";
  out.write(prefixed(cfg, "residuals.txt"), table.str());
  timer.stop();
  json extra{{"matched", rep.matched},
             {"max_relative_deviation", rep.max_relative_deviation},
             {"max_wavelet_residual", rep.max_wavelet_residual}};
  out.write_manifest("spectrum", cfg, inv.config_path, timer, extra);

  if (!rep.matched) {
    std::cerr << "spectrum mismatch: see " << (out.dir() / prefixed(cfg, "residuals.txt"))
              << "\n";
    return kExitSpectrumMismatch;
  }
  std::cout << "spectrum matched (max deviation "
            << format_double(rep.max_relative_deviation) << ")\n";
  return 0;
}

// Relative L2 distance after optimal sign alignment.
double aligned_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double denom = std::max(a.norm(), b.norm());
  if (denom == 0) return 0;
  return std::min((a - b).norm(), (a + b).norm()) / denom;
}

int run_simulate(const Invocation& inv) {
  PhaseTimer timer;
  timer.start("parse_config");
  RunConfig cfg = load_config(inv);
  if (!cfg.op) throw ConfigError("missing required section 'operator'");
  if (!cfg.kinetics) throw ConfigError("missing required section 'kinetics'");
  if (!cfg.simulation) throw ConfigError("missing required section 'simulation'");
  if (!(cfg.op->alpha > 0)) throw ConfigError("field 'operator.alpha' must be > 0");
  GridGeometry geom = make_geometry(cfg);
  OperatorOptions opt = make_operator_options(*cfg.op);
  timer.stop();

  KineticsModel model = make_kinetics(*cfg.kinetics);

  SimulationConfig sim{geom, cfg.op->alpha, model};
  SteadyState steady = find_steady_state(model, {1.0, 1.0});
  sim.u_ref = steady.u0;
  sim.v_ref = steady.v0;
  sim.t_end = cfg.simulation->t_end;
  sim.dt = cfg.simulation->dt;
  sim.scheme = scheme_from_string(cfg.simulation->scheme);
  sim.perturbation_amplitude = cfg.simulation->perturbation_amplitude;
  sim.snapshot_stride = cfg.simulation->snapshot_stride;

  if (sim.scheme == Scheme::imex_euler && geom.N > opt.dense_cap) {
    std::cerr << "N = " << geom.N << " exceeds the dense cap " << opt.dense_cap
              << "; the implicit diffusion solve needs the eigendecomposition. "
                 "Use scheme rk4 or raise operator.dense_cap.\n";
    return kExitDenseCap;
  }

  timer.start("assemble");
  VladimirovOperator op(geom, cfg.op->alpha, opt);
  timer.stop();

  // analysis context for the growth summary
  json growth = json();
  std::optional<TuringReport> analysis;
  try {
    analysis = turing_report(model, geom, cfg.op->alpha);
  } catch (const std::exception&) {
    // d = 1 or no bifurcation info: simulation still runs
  }

  OutputSet out(cfg.output.directory);
  const std::vector<std::uint64_t>& seeds = cfg.simulation->seeds;
  const bool multi = seeds.size() > 1;
  std::vector<Eigen::VectorXd> final_perturbations;
  json per_seed = json::array();

  for (std::uint64_t seed : seeds) {
    sim.seed = seed;
    std::string base = multi ? "seed_" + std::to_string(seed) + "/" : "";
    timer.start("integrate");
    Trajectory traj;
    try {
      traj = run(sim, op);
    } catch (const SimulationBlowup& e) {
      timer.stop();
      std::cerr << e.what() << "\n";
      std::ostringstream last;
      last << "index,u,v\n";
      for (std::int64_t i = 0; i < geom.N; ++i)
        last << i << "," << format_double(e.last_good.u(i)) << ","
             << format_double(e.last_good.v(i)) << "\n";
      out.write(base + prefixed(cfg, "last_good_state.csv"), last.str());
      json extra{{"error", e.what()}, {"failed_step", e.step}, {"seed", seed}};
      out.write_manifest("simulate", cfg, inv.config_path, timer, extra);
      return kExitBlowup;
    }
    timer.stop();

    timer.start("write_outputs");
    out.write(base + prefixed(cfg, "snapshots.csv"), snapshots_csv(traj, geom));

    Eigen::VectorXd wu = traj.final_state.u.array() - sim.u_ref;
    Eigen::VectorXd wv = traj.final_state.v.array() - sim.v_ref;
    out.write(base + prefixed(cfg, "modes_u.csv"),
              mode_spectrum_csv(project_modes(wu, geom)));
    out.write(base + prefixed(cfg, "modes_v.csv"),
              mode_spectrum_csv(project_modes(wv, geom)));

    double threshold = default_cluster_threshold(traj.final_state.u, sim.u_ref);
    ClusterReport clusters =
        cluster_analysis(traj.final_state.u, traj.final_state.v, geom, sim.u_ref,
                         threshold);
    out.write(base + prefixed(cfg, "clusters.json"),
              cluster_report_json(clusters).dump(2) + "\n");
    out.write(base + prefixed(cfg, "tree.dot"), cluster_tree_dot(clusters, geom));
    timer.stop();

    json seed_info{{"seed", seed},
                   {"cluster_count", clusters.clusters.size()},
                   {"final_stddev_u",
                    std::sqrt((wu.array() - wu.mean()).square().sum() /
                              static_cast<double>(geom.N))}};

    // fitted vs predicted growth rate of the dominant unstable mode
    if (analysis && analysis->dominant) {
      const UnstableScale& dom = *analysis->dominant;
      Eigen::Vector2d left =
          growing_direction_left(analysis->jac, model.gamma, model.d, dom.kappa);
      double window = 0.5 / dom.lambda_plus;
      std::vector<std::pair<double, double>> series;
      for (const Snapshot& s : traj.snapshots) {
        if (s.t > window) break;
        Eigen::VectorXd su = s.u.array() - sim.u_ref;
        Eigen::VectorXd sv = s.v.array() - sim.v_ref;
        series.emplace_back(s.t, scale_growth_amplitude(su, sv, geom, dom.r, left));
      }
      if (auto slope = fit_log_slope(series)) {
        seed_info["growth"] = {{"dominant_scale", dom.r},
                               {"predicted_lambda_plus", dom.lambda_plus},
                               {"fitted_rate", *slope},
                               {"fit_points", series.size()}};
      }
    }
    per_seed.push_back(seed_info);
    final_perturbations.push_back(wu);
  }

  json extra{{"seeds", per_seed}};
  if (multi) {
    // multistability summary: pairwise aligned distances of final patterns
    json pairs = json::array();
    int distinct_pairs = 0;
    for (std::size_t i = 0; i < final_perturbations.size(); ++i)
      for (std::size_t k = i + 1; k < final_perturbations.size(); ++k) {
        double dist = aligned_distance(final_perturbations[i], final_perturbations[k]);
        if (dist >= 1e-2) ++distinct_pairs;
        pairs.push_back({{"seed_a", seeds[i]},
                         {"seed_b", seeds[k]},
                         {"aligned_relative_l2", dist}});
      }
    extra["multistability"] = {{"pairwise", pairs},
                               {"distinct_pairs", distinct_pairs}};
  }
  out.write_manifest("simulate", cfg, inv.config_path, timer, extra);
  std::cout << "simulated " << seeds.size() << " run(s) into " << out.dir().string()
            << "\n";
  return 0;
}

int dispatch(const std::string& command, const Invocation& inv) {
  try {
    apply_threads(inv);
    if (command == "analyze") return run_analyze(inv);
    if (command == "spectrum") return run_spectrum(inv);
    return run_simulate(inv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const KineticsError& e) {
    std::cerr << "kinetics error: " << e.what() << "\n";
    return kExitKinetics;
  } catch (const SteadyStateError& e) {
    std::cerr << "steady-state error: " << e.what() << "\n";
    return kExitSteadyState;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-adic reaction-diffusion Turing systems: analysis, operator "
               "diagnostics and simulation"};
  app.require_subcommand(1);

  std::map<std::string, Invocation> inv;
  for (const char* name : {"analyze", "spectrum", "simulate"}) {
    CLI::App* sub = app.add_subcommand(
        name, name == std::string("analyze")
                  ? "Turing instability analysis (T1-T6, band, dispersion)"
                  : (name == std::string("spectrum")
                         ? "assemble the operator and verify its spectrum"
                         : "integrate the reaction-diffusion system"));
    Invocation& i = inv[name];
    sub->add_option("--config", i.config_path, "JSON config file")
        ->required();
    sub->add_option("--out", i.out_override, "output directory (overrides config)");
    sub->add_option("--threads", i.threads, "worker threads")
        ->envname("PADIC_MORPHOGEN_THREADS");
  }

  CLI11_PARSE(app, argc, argv);
  std::string command = app.get_subcommands().front()->get_name();
  return dispatch(command, inv[command]);
}
