#pragma once

#include "levyhom/types.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace levyhom {

enum class QuantityTag {
  sup_moment_q_diff,
  sup_moment_p,
  sup_moment_K,
  sup_expectation_K,
  sup_moment_remainder,
  prob_exceed,
};

std::string_view to_string(QuantityTag tag);
/// Throws std::invalid_argument for unknown names.
QuantityTag quantity_from_string(std::string_view name);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  std::size_t excluded_paths = 0;
};

struct SweepResult {
  QuantityTag quantity = QuantityTag::sup_moment_q_diff;
  /// Moment order theta, or the threshold delta for prob_exceed.
  double theta = 1.0;
  std::vector<double> epsilons;
  std::vector<Estimate> estimates;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double theoretical_exponent = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::size_t n_points = 0;
  std::size_t n_dropped = 0;
};

/// Node series of one path; each entry is a vector at a grid node.
using NodeSeries = std::vector<Vec>;

/// Sample mean and standard error of max_nodes |series|^theta over the
/// non-excluded paths. Paths flagged in `excluded` (may be empty) are
/// counted separately. Throws for theta <= 0 or an empty ensemble.
Estimate sup_moment_estimator(const std::vector<NodeSeries>& paths, double theta,
                              const std::vector<bool>& excluded = {});

/// Mean and standard error of a sample; the building block of the
/// estimators above (sample standard deviation with n - 1).
Estimate mean_estimate(const std::vector<double>& samples);

/// (theta/2)(1 - 1/eta) for theta <= 2 eta/(eta + 1), else 1 - theta/eta.
/// Requires eta > 1 and 0 < theta < eta.
double beta_exponent(double theta, double eta);
/// theta/2 - theta/(2 eta); rate of E[sup |p|^theta].
double p_sup_exponent(double theta, double eta);
/// 1 - max(2, theta)/2; rate of sup_t E[K^theta].
double k_moment_exponent(double theta);
/// -theta/2; rate of E[sup_t K^theta].
double k_sup_exponent(double theta);

/// Ordinary least squares of log(value) on log(epsilon). Non-positive
/// estimates are dropped; throws std::invalid_argument if fewer than four
/// points remain. pass <=> slope >= theoretical - tolerance.
RateFit fit_rate(const SweepResult& sweep, double theoretical, double tolerance);

struct Probability {
  double prob = 0.0;
  double std_error = 0.0;
};

/// Fraction of pairs whose max-node |q_full - q_reduced| exceeds delta,
/// with binomial standard error.
Probability probability_exceed(const std::vector<std::pair<NodeSeries, NodeSeries>>& pairs,
                               double delta);

/// Same from precomputed per-path sup distances.
Probability probability_exceed(const std::vector<double>& sup_distances, double delta);

}  // namespace levyhom
