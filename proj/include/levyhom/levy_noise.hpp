#pragma once

#include "levyhom/types.hpp"

#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

namespace levyhom {

/// Finitely many atoms x_k carrying probability weights w_k. The Lévy
/// measure is total_intensity * sum_k w_k delta_{x_k}.
struct AtomMarks {
  std::vector<Vec> points;
  std::vector<double> weights;
};

/// One-dimensional marks uniform on [lower, upper].
struct UniformMarks {
  double lower = -1.0;
  double upper = 1.0;
};

/// Marks whose norm has density proportional to r^(-1-tail_index) on
/// [lower, upper] (upper may be +inf). In one dimension the sign is +
/// with probability positive_fraction; in higher dimensions the direction
/// is uniform on the sphere.
struct ParetoMarks {
  double lower = 0.1;
  double upper = 5.0;
  double tail_index = 3.0;
  double positive_fraction = 0.5;
};

using MarkDistribution = std::variant<AtomMarks, UniformMarks, ParetoMarks>;

enum class ActivityKind { finite_activity, truncated_infinite_activity };

/// A finite-moment pure-jump Lévy measure, stored as the finite measure
/// that is actually simulated. For truncated infinite-activity measures
/// the jumps with norm below truncation_level have been discarded.
struct LevyMeasureSpec {
  int dim = 1;
  ActivityKind kind = ActivityKind::finite_activity;
  double total_intensity = 0.0;
  MarkDistribution marks = AtomMarks{};
  double truncation_level = 0.0;
  /// int_{|x|<rho} |x|^2 nu(dx) of the discarded small jumps: the variance
  /// rate of the martingale dropped by truncation. Zero for finite activity.
  double discarded_second_moment = 0.0;
};

/// Thrown when a requested moment of the measure is infinite.
class DivergentMoment : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Checks the structural invariants of a spec; throws std::invalid_argument.
void check_measure(const LevyMeasureSpec& spec);

LevyMeasureSpec compound_poisson(double intensity, MarkDistribution marks, int dim = 1);

/// Radial Lévy density scale * r^(-1-alpha) on (0, upper], truncated to
/// [rho, upper] with 0 < alpha < 2. Marks are drawn from the normalized
/// truncated law; the discarded small-jump mass only enters through
/// discarded_second_moment.
LevyMeasureSpec truncated_power_law(double scale, double alpha, double upper, double rho,
                                    int dim = 1, double positive_fraction = 0.5);

/// int |x|^r nu(dx). Throws std::invalid_argument for r < 0 and
/// DivergentMoment when the integral is infinite.
double measure_moment(const LevyMeasureSpec& spec, double r);

/// b_c = int_{|x|<1} x nu(dx).
Vec compensator_drift(const LevyMeasureSpec& spec);

/// int x nu(dx), the mean jump flux. Requires a finite first moment.
Vec first_moment(const LevyMeasureSpec& spec);

struct JumpEvent {
  double time = 0.0;
  Vec mark;
};

struct JumpRealization {
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<JumpEvent> events;
  std::uint64_t seed = 0;
};

/// Poisson number of events on (t0, t1], uniform times sorted ascending,
/// i.i.d. marks. A pure function of (spec, window, seed).
JumpRealization sample_jumps(const LevyMeasureSpec& spec, double t0, double t1,
                             std::uint64_t seed);

/// Value at time t of the triple-(0,0,nu) process driven by the
/// realization: sum of marks up to t minus (t - t0) * b_c.
Vec levy_value(const JumpRealization& jumps, const Vec& drift, double t);

}  // namespace levyhom
