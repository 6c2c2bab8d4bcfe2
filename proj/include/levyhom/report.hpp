#pragma once

#include "levyhom/analysis.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace levyhom {

/// I/O failure while writing or reading report files; what() names the path.
class ReportError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct LabeledFit {
  QuantityTag quantity = QuantityTag::sup_moment_q_diff;
  double theta = 1.0;
  RateFit fit;
};

/// %.17g, so doubles round-trip exactly.
std::string format_double(double x);

/// Writes sweep.csv and rates.json (and rates.svg when `plots`) into dir.
/// Returns the written file names, relative to dir.
std::vector<std::string> emit_report(const std::vector<SweepResult>& sweeps,
                                     const std::vector<LabeledFit>& fits,
                                     const std::filesystem::path& dir, bool plots);

/// Reads back a sweep.csv; rows are grouped by (quantity, theta) in file order.
std::vector<SweepResult> parse_sweep_csv(const std::filesystem::path& file);

/// Standalone log-log SVG of the sweeps with fitted and theoretical lines.
std::string render_rates_svg(const std::vector<SweepResult>& sweeps,
                             const std::vector<LabeledFit>& fits);

/// One row per node: path, epsilon, t, q..., p..., q_limit...
struct PathRow {
  std::size_t path = 0;
  double epsilon = 0.0;
  double t = 0.0;
  Vec q;
  Vec p;
  Vec q_limit;
};

void write_paths_csv(const std::vector<PathRow>& rows, const std::filesystem::path& file);

/// Writes text to file, throwing ReportError with the path on failure.
void write_text_file(const std::filesystem::path& file, const std::string& text);

}  // namespace levyhom
