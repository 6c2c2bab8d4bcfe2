#include "levyhom/levy_noise.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace levyhom {

namespace {

constexpr double kQuadratureTolerance = 1e-8;

template <typename F>
double integrate(F f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20,
                                                                         kQuadratureTolerance);
}

// Unnormalized radial density of ParetoMarks and its normalizer.
double pareto_norm(const ParetoMarks& m) {
  const double a = std::pow(m.lower, -m.tail_index);
  const double b = std::isinf(m.upper) ? 0.0 : std::pow(m.upper, -m.tail_index);
  return (a - b) / m.tail_index;
}

double pareto_density(const ParetoMarks& m, double r) {
  return std::pow(r, -1.0 - m.tail_index) / pareto_norm(m);
}

// E[|X|^r 1{lo <= |X| < hi}] for the radial Pareto law.
double pareto_partial_moment(const ParetoMarks& m, double r, double lo, double hi) {
  lo = std::max(lo, m.lower);
  hi = std::min(hi, m.upper);
  if (!(hi > lo)) return 0.0;
  if (std::isinf(hi) && r >= m.tail_index)
    throw DivergentMoment("moment of order " + std::to_string(r) +
                          " diverges for tail index " + std::to_string(m.tail_index));
  return integrate([&](double x) { return std::pow(x, r) * pareto_density(m, x); }, lo, hi);
}

// int_a^b |x|^r dx via the antiderivative sign(x)|x|^(r+1)/(r+1).
double abs_power_integral(double a, double b, double r) {
  auto g = [r](double x) { return std::copysign(std::pow(std::abs(x), r + 1.0) / (r + 1.0), x); };
  return g(b) - g(a);
}

Vec zero_vec(int dim) { return Vec::Zero(dim); }

}  // namespace

void check_measure(const LevyMeasureSpec& spec) {
  if (spec.dim < 1 || spec.dim > kMaxDim)
    throw std::invalid_argument("measure dim must be in [1, " + std::to_string(kMaxDim) + "]");
  if (!(spec.total_intensity >= 0.0) || std::isinf(spec.total_intensity))
    throw std::invalid_argument("total_intensity must be finite and >= 0");
  if (!(spec.truncation_level >= 0.0))
    throw std::invalid_argument("truncation_level must be >= 0");
  if (spec.kind == ActivityKind::finite_activity && spec.truncation_level != 0.0)
    throw std::invalid_argument("finite_activity measures carry truncation_level 0");
  if (spec.kind == ActivityKind::truncated_infinite_activity && !(spec.truncation_level > 0.0))
    throw std::invalid_argument("truncated_infinite_activity requires truncation_level > 0");

  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AtomMarks>) {
          if (m.points.empty() || m.points.size() != m.weights.size())
            throw std::invalid_argument("atom marks need matching nonempty points and weights");
          double total = 0.0;
          for (std::size_t k = 0; k < m.points.size(); ++k) {
            if (m.points[k].size() != spec.dim)
              throw std::invalid_argument("atom dimension differs from measure dim");
            if (m.points[k].norm() == 0.0)
              throw std::invalid_argument("atoms must not sit at the origin");
            if (!(m.weights[k] > 0.0)) throw std::invalid_argument("atom weights must be > 0");
            total += m.weights[k];
          }
          if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("atom weights must sum to 1");
        } else if constexpr (std::is_same_v<T, UniformMarks>) {
          if (spec.dim != 1) throw std::invalid_argument("uniform marks are one-dimensional");
          if (!(m.upper > m.lower) || !std::isfinite(m.lower) || !std::isfinite(m.upper))
            throw std::invalid_argument("uniform marks need finite lower < upper");
        } else {
          if (!(m.lower > 0.0) || !(m.upper > m.lower))
            throw std::invalid_argument("pareto marks need 0 < lower < upper");
          if (!(m.tail_index > 0.0)) throw std::invalid_argument("pareto tail_index must be > 0");
          if (!(m.positive_fraction >= 0.0 && m.positive_fraction <= 1.0))
            throw std::invalid_argument("positive_fraction must be in [0, 1]");
        }
      },
      spec.marks);
}

LevyMeasureSpec compound_poisson(double intensity, MarkDistribution marks, int dim) {
  LevyMeasureSpec spec;
  spec.dim = dim;
  spec.kind = ActivityKind::finite_activity;
  spec.total_intensity = intensity;
  spec.marks = std::move(marks);
  check_measure(spec);
  return spec;
}

LevyMeasureSpec truncated_power_law(double scale, double alpha, double upper, double rho,
                                    int dim, double positive_fraction) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("power-law exponent alpha must lie in (0, 2)");
  if (!(scale > 0.0)) throw std::invalid_argument("power-law scale must be > 0");
  if (!(rho > 0.0) || !(upper > rho))
    throw std::invalid_argument("power-law truncation needs 0 < rho < upper");
  ParetoMarks marks{rho, upper, alpha, positive_fraction};
  LevyMeasureSpec spec;
  spec.dim = dim;
  spec.kind = ActivityKind::truncated_infinite_activity;
  spec.total_intensity = scale * pareto_norm(marks);
  spec.marks = marks;
  spec.truncation_level = rho;
  spec.discarded_second_moment = scale * std::pow(rho, 2.0 - alpha) / (2.0 - alpha);
  check_measure(spec);
  return spec;
}

double measure_moment(const LevyMeasureSpec& spec, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("moment order must be >= 0");
  const double lambda = spec.total_intensity;
  if (lambda == 0.0) return 0.0;
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AtomMarks>) {
          double acc = 0.0;
          for (std::size_t k = 0; k < m.points.size(); ++k)
            acc += m.weights[k] * std::pow(m.points[k].norm(), r);
          return lambda * acc;
        } else if constexpr (std::is_same_v<T, UniformMarks>) {
          return lambda * abs_power_integral(m.lower, m.upper, r) / (m.upper - m.lower);
        } else {
          return lambda * pareto_partial_moment(m, r, m.lower, m.upper);
        }
      },
      spec.marks);
}

Vec compensator_drift(const LevyMeasureSpec& spec) {
  const double lambda = spec.total_intensity;
  Vec drift = zero_vec(spec.dim);
  if (lambda == 0.0) return drift;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AtomMarks>) {
          for (std::size_t k = 0; k < m.points.size(); ++k)
            if (m.points[k].norm() < 1.0) drift += lambda * m.weights[k] * m.points[k];
        } else if constexpr (std::is_same_v<T, UniformMarks>) {
          const double lo = std::max(m.lower, -1.0);
          const double hi = std::min(m.upper, 1.0);
          if (hi > lo) drift(0) = lambda * 0.5 * (hi * hi - lo * lo) / (m.upper - m.lower);
        } else {
          if (spec.dim == 1) {
            const double bias = 2.0 * m.positive_fraction - 1.0;
            if (bias != 0.0) drift(0) = lambda * bias * pareto_partial_moment(m, 1.0, 0.0, 1.0);
          }
        }
      },
      spec.marks);
  return drift;
}

Vec first_moment(const LevyMeasureSpec& spec) {
  const double lambda = spec.total_intensity;
  Vec mean = zero_vec(spec.dim);
  if (lambda == 0.0) return mean;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AtomMarks>) {
          for (std::size_t k = 0; k < m.points.size(); ++k)
            mean += lambda * m.weights[k] * m.points[k];
        } else if constexpr (std::is_same_v<T, UniformMarks>) {
          mean(0) = lambda * 0.5 * (m.lower + m.upper);
        } else {
          const double abs_mean = pareto_partial_moment(m, 1.0, m.lower, m.upper);
          if (spec.dim == 1) mean(0) = lambda * (2.0 * m.positive_fraction - 1.0) * abs_mean;
        }
      },
      spec.marks);
  return mean;
}

namespace {

Vec draw_mark(const LevyMeasureSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return std::visit(
      [&](const auto& m) -> Vec {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AtomMarks>) {
          std::discrete_distribution<std::size_t> pick(m.weights.begin(), m.weights.end());
          return m.points[pick(rng)];
        } else if constexpr (std::is_same_v<T, UniformMarks>) {
          std::uniform_real_distribution<double> u(m.lower, m.upper);
          Vec x(1);
          do {
            x(0) = u(rng);
          } while (x(0) == 0.0);
          return x;
        } else {
          const double a = std::pow(m.lower, -m.tail_index);
          const double b = std::isinf(m.upper) ? 0.0 : std::pow(m.upper, -m.tail_index);
          const double u = unit(rng);
          double r = std::pow(a - u * (a - b), -1.0 / m.tail_index);
          r = std::clamp(r, m.lower, m.upper);
          Vec x(spec.dim);
          if (spec.dim == 1) {
            x(0) = unit(rng) < m.positive_fraction ? r : -r;
          } else {
            std::normal_distribution<double> normal;
            double len = 0.0;
            do {
              for (int i = 0; i < spec.dim; ++i) x(i) = normal(rng);
              len = x.norm();
            } while (len == 0.0);
            x *= r / len;
          }
          return x;
        }
      },
      spec.marks);
}

}  // namespace

JumpRealization sample_jumps(const LevyMeasureSpec& spec, double t0, double t1,
                             std::uint64_t seed) {
  if (!(t1 > t0)) throw std::invalid_argument("sample_jumps requires t1 > t0");
  if (!std::isfinite(spec.total_intensity))
    throw std::invalid_argument("sample_jumps requires finite total_intensity");

  JumpRealization out;
  out.t0 = t0;
  out.t1 = t1;
  out.seed = seed;

  std::mt19937_64 rng(seed);
  const double mean_count = spec.total_intensity * (t1 - t0);
  if (mean_count <= 0.0) return out;

  std::poisson_distribution<std::int64_t> count_dist(mean_count);
  const auto count = static_cast<std::size_t>(count_dist(rng));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> times(count);
  for (;;) {
    // unit draws lie in [0, 1); reflecting lands them in (t0, t1].
    for (auto& t : times) t = t1 - unit(rng) * (t1 - t0);
    std::sort(times.begin(), times.end());
    const bool strictly_increasing =
        std::adjacent_find(times.begin(), times.end(),
                           [](double a, double b) { return !(a < b); }) == times.end();
    const bool inside = times.empty() || times.front() > t0;
    if (strictly_increasing && inside) break;
  }

  out.events.reserve(count);
  for (double t : times) out.events.push_back({t, draw_mark(spec, rng)});
  return out;
}

Vec levy_value(const JumpRealization& jumps, const Vec& drift, double t) {
  Vec value = -(t - jumps.t0) * drift;
  for (const auto& e : jumps.events) {
    if (e.time > t) break;
    value += e.mark;
  }
  return value;
}

}  // namespace levyhom
