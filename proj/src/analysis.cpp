#include "levyhom/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <utility>

namespace levyhom {

namespace {

constexpr std::array<std::pair<QuantityTag, std::string_view>, 6> kTagNames{{
    {QuantityTag::sup_moment_q_diff, "sup_moment_q_diff"},
    {QuantityTag::sup_moment_p, "sup_moment_p"},
    {QuantityTag::sup_moment_K, "sup_moment_K"},
    {QuantityTag::sup_expectation_K, "sup_expectation_K"},
    {QuantityTag::sup_moment_remainder, "sup_moment_remainder"},
    {QuantityTag::prob_exceed, "prob_exceed"},
}};

}  // namespace

std::string_view to_string(QuantityTag tag) {
  for (const auto& [t, name] : kTagNames)
    if (t == tag) return name;
  return "unknown";
}

QuantityTag quantity_from_string(std::string_view name) {
  for (const auto& [t, n] : kTagNames)
    if (n == name) return t;
  throw std::invalid_argument("unknown quantity tag '" + std::string(name) + "'");
}

Estimate mean_estimate(const std::vector<double>& samples) {
  Estimate e;
  e.n_paths = samples.size();
  if (samples.empty()) return e;
  CompensatedSum sum;
  for (double x : samples) sum.add(x);
  const double mean = sum.value() / static_cast<double>(samples.size());
  e.value = mean;
  if (samples.size() > 1) {
    CompensatedSum sq;
    for (double x : samples) sq.add((x - mean) * (x - mean));
    const double var = sq.value() / static_cast<double>(samples.size() - 1);
    e.std_error = std::sqrt(var / static_cast<double>(samples.size()));
  }
  return e;
}

Estimate sup_moment_estimator(const std::vector<NodeSeries>& paths, double theta,
                              const std::vector<bool>& excluded) {
  if (!(theta > 0.0)) throw std::invalid_argument("theta must be > 0");
  if (paths.empty()) throw std::invalid_argument("ensemble is empty");
  if (!excluded.empty() && excluded.size() != paths.size())
    throw std::invalid_argument("exclusion mask size differs from ensemble size");
  const std::size_t nodes = paths.front().size();
  std::vector<double> sups;
  sups.reserve(paths.size());
  std::size_t dropped = 0;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    if (paths[k].size() != nodes) throw std::invalid_argument("paths do not share a grid");
    if (!excluded.empty() && excluded[k]) {
      ++dropped;
      continue;
    }
    double sup = 0.0;
    for (const auto& v : paths[k]) sup = std::max(sup, v.norm());
    sups.push_back(std::pow(sup, theta));
  }
  Estimate e = mean_estimate(sups);
  e.excluded_paths = dropped;
  return e;
}

double beta_exponent(double theta, double eta) {
  if (!(eta > 1.0)) throw std::invalid_argument("beta_exponent requires eta > 1");
  if (!(theta > 0.0) || !(theta < eta))
    throw std::invalid_argument("beta_exponent requires 0 < theta < eta");
  if (theta <= 2.0 * eta / (eta + 1.0)) return 0.5 * theta * (1.0 - 1.0 / eta);
  return 1.0 - theta / eta;
}

double p_sup_exponent(double theta, double eta) {
  if (!(theta > 0.0)) throw std::invalid_argument("p_sup_exponent requires theta > 0");
  if (!(eta > 1.0)) throw std::invalid_argument("p_sup_exponent requires eta > 1");
  return theta / 2.0 - theta / (2.0 * eta);
}

double k_moment_exponent(double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("k_moment_exponent requires theta > 0");
  return 1.0 - std::max(2.0, theta) / 2.0;
}

double k_sup_exponent(double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("k_sup_exponent requires theta > 0");
  return -theta / 2.0;
}

RateFit fit_rate(const SweepResult& sweep, double theoretical, double tolerance) {
  if (sweep.epsilons.size() != sweep.estimates.size())
    throw std::invalid_argument("sweep epsilons and estimates differ in length");
  std::vector<double> xs;
  std::vector<double> ys;
  std::size_t dropped = 0;
  for (std::size_t k = 0; k < sweep.epsilons.size(); ++k) {
    const double v = sweep.estimates[k].value;
    if (!(v > 0.0) || !std::isfinite(v) || !(sweep.epsilons[k] > 0.0)) {
      ++dropped;
      continue;
    }
    xs.push_back(std::log(sweep.epsilons[k]));
    ys.push_back(std::log(v));
  }
  if (dropped > 0)
    std::cerr << "warning: fit_rate dropped " << dropped << " non-positive estimate(s) for "
              << to_string(sweep.quantity) << "\n";
  if (xs.size() < 4) throw std::invalid_argument("fit_rate needs at least 4 positive estimates");

  const double n = static_cast<double>(xs.size());
  CompensatedSum sx, sy;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sx.add(xs[k]);
    sy.add(ys[k]);
  }
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  CompensatedSum sxx, sxy, syy;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx.add((xs[k] - mx) * (xs[k] - mx));
    sxy.add((xs[k] - mx) * (ys[k] - my));
    syy.add((ys[k] - my) * (ys[k] - my));
  }
  if (!(sxx.value() > 0.0)) throw std::invalid_argument("fit_rate needs distinct epsilons");

  RateFit fit;
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  if (syy.value() > 0.0) {
    CompensatedSum ss_res;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double r = ys[k] - (fit.intercept + fit.slope * xs[k]);
      ss_res.add(r * r);
    }
    fit.r_squared = std::clamp(1.0 - ss_res.value() / syy.value(), 0.0, 1.0);
  } else {
    fit.r_squared = 1.0;
  }
  fit.theoretical_exponent = theoretical;
  fit.tolerance = tolerance;
  fit.pass = fit.slope >= theoretical - tolerance;
  fit.n_points = xs.size();
  fit.n_dropped = dropped;
  return fit;
}

Probability probability_exceed(const std::vector<double>& sup_distances, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  if (sup_distances.empty()) throw std::invalid_argument("ensemble is empty");
  std::size_t hits = 0;
  for (double d : sup_distances)
    if (d > delta) ++hits;
  const double n = static_cast<double>(sup_distances.size());
  const double p = static_cast<double>(hits) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

Probability probability_exceed(const std::vector<std::pair<NodeSeries, NodeSeries>>& pairs,
                               double delta) {
  std::vector<double> sups;
  sups.reserve(pairs.size());
  for (const auto& [full, reduced] : pairs) {
    if (full.size() != reduced.size()) throw std::invalid_argument("paired paths do not share a grid");
    double sup = 0.0;
    for (std::size_t k = 0; k < full.size(); ++k) sup = std::max(sup, (full[k] - reduced[k]).norm());
    sups.push_back(sup);
  }
  return probability_exceed(sups, delta);
}

}  // namespace levyhom
