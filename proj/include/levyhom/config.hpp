#pragma once

#include "levyhom/levy_noise.hpp"
#include "levyhom/presets.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace levyhom {

inline constexpr int kConfigSchemaVersion = 1;

struct FieldError {
  std::string field;
  std::string constraint;
};

/// Raised for invalid experiment configurations; lists every violated field.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<FieldError> errors);
  const std::vector<FieldError>& errors() const { return errors_; }

private:
  std::vector<FieldError> errors_;
};

struct ExperimentConfig {
  std::string preset;
  PresetParams preset_params;
  LevyMeasureSpec measure;
  std::vector<double> epsilons;
  double horizon = 1.0;
  /// Fixed base step; when unset the step is eps^2 * min(1, 1/intensity)
  /// capped at step_cap.
  std::optional<double> base_step;
  double step_cap = 1e-2;
  std::size_t n_paths = 2000;
  std::vector<double> thetas{1.0, 2.0};
  std::vector<double> deltas{0.25};
  std::uint64_t master_seed = 1;
  std::string output_dir = "levyhom_out";
  bool emit_plots = true;
  std::vector<double> initial_q;
  std::vector<double> initial_p;
  double rate_tolerance = 0.1;
  int observation_points = 256;
  bool export_paths = false;

  /// The parsed document, used for hashing.
  nlohmann::json source;

  double step_for(double eps) const;
};

/// Parses and validates a configuration document. Unknown keys are errors.
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Reads a JSON config file; throws ConfigError for unreadable or
/// malformed files as well as for invalid content.
ExperimentConfig load_config(const std::string& path);

/// Parses a measure block (also used by tests and tools).
LevyMeasureSpec parse_measure(const nlohmann::json& doc, std::vector<FieldError>& errors,
                              const std::string& prefix = "measure");

/// FNV-1a hash of the canonical (key-sorted) serialization, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

/// Geometric ladder start * ratio^k, k = 0..count-1.
std::vector<double> geometric_ladder(double start, double ratio, int count);

}  // namespace levyhom
