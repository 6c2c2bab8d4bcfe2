#pragma once

#include "levyhom/analysis.hpp"
#include "levyhom/config.hpp"
#include "levyhom/integrate.hpp"
#include "levyhom/model.hpp"
#include "levyhom/report.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace levyhom {

/// Environment variable that overrides the configured output directory
/// (a --out flag still wins).
inline constexpr const char* kOutputDirEnv = "LEVYHOM_OUTPUT_DIR";

/// Fraction of blown-up paths above which a run fails.
inline constexpr double kMaxBlowupFraction = 0.01;

std::string version_tag();

/// Per-path scalar summaries of one coupled (full, limiting) simulation.
struct PathSummary {
  bool blowup = false;
  double sup_q_diff = 0.0;
  double sup_p = 0.0;
  double sup_K = 0.0;
  double sup_remainder = 0.0;
  double q_diff_T = 0.0;
  /// K^eps at the observation times.
  std::vector<double> K_obs;
};

struct PathSetup {
  const PresetModel* preset = nullptr;
  const LevyMeasureSpec* measure = nullptr;
  Vec compensator;
  double epsilon = 0.0;
  double base_step = 0.0;
  double horizon = 1.0;
  Vec q0;
  Vec p0;
  /// K is sampled at the last grid node at or before each of these times.
  std::vector<double> observation_times;
  double noise_sign = kNoiseDriftSign;
};

/// Integrates the full system, the limiting equation and the remainder
/// decomposition in lockstep on one jump realization, keeping only the
/// running sups. When `rows` is non-null, the state at each observation
/// time is appended for export.
PathSummary simulate_path(const PathSetup& setup, std::uint64_t seed,
                          std::vector<PathRow>* rows = nullptr, std::size_t path_index = 0);

/// Runs f(i) for i in [0, count) on `threads` workers (0 = hardware
/// concurrency). Each index is handled exactly once; the first exception
/// is rethrown after all workers stop.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& f);

/// Runs n_paths coupled simulations at one epsilon. Results are stored by
/// path index, so they do not depend on the thread count.
std::vector<PathSummary> simulate_ensemble(const PathSetup& setup, std::uint64_t master_seed,
                                           std::size_t n_paths, int threads);

struct EpsilonSummary {
  double epsilon = 0.0;
  double base_step = 0.0;
  std::size_t n_paths = 0;
  std::size_t excluded = 0;
  double seconds = 0.0;
};

struct RunOptions {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool no_plots = false;
  std::string config_path;
  /// Echoed verbatim into the manifest.
  nlohmann::ordered_json flags = nlohmann::ordered_json::object();
};

struct RunManifest {
  std::string config_hash;
  std::string version;
  std::string output_dir;
  std::uint64_t master_seed = 0;
  nlohmann::ordered_json flags = nlohmann::ordered_json::object();
  std::vector<std::pair<std::string, double>> stage_seconds;
  std::vector<EpsilonSummary> per_epsilon;
  std::vector<std::string> files;
  std::vector<SweepResult> sweeps;
  std::vector<LabeledFit> fits;
  nlohmann::ordered_json assumptions = nlohmann::ordered_json::object();

  nlohmann::ordered_json to_json() const;
};

/// Picks the output directory: --out, then the environment variable, then
/// the configuration.
std::string resolve_output_dir(const ExperimentConfig& cfg, const std::optional<std::string>& cli_out);

/// Largest configured theta below eta (the order used for the position
/// error); falls back to the smallest theta when none qualifies.
double convergence_theta_max(const std::vector<double>& thetas, double eta);

/// Failure during a run (not a configuration error).
class RunError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Executes the configured sweep and writes sweep.csv, rates.json,
/// manifest.json (plus rates.svg and paths.csv when enabled). On failure
/// every file written by the run is removed before the error propagates.
RunManifest run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Assembles the sweeps of a finished ensemble ladder.
std::vector<SweepResult> build_sweeps(const std::vector<double>& epsilons,
                                      const std::vector<std::vector<PathSummary>>& ensembles,
                                      const std::vector<double>& thetas,
                                      const std::vector<double>& deltas);

/// Fits every sweep against its theoretical exponent; sweeps without an
/// applicable exponent (e.g. theta >= eta for the position error) are
/// skipped.
std::vector<LabeledFit> fit_sweeps(const std::vector<SweepResult>& sweeps, double eta,
                                   double tolerance);

}  // namespace levyhom
