#pragma once

#include "levyhom/levy_noise.hpp"
#include "levyhom/model.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace levyhom {

/// States whose norm exceeds this are treated as blown up.
inline constexpr double kBlowupNorm = 1e12;
/// Jump times closer than this to a uniform node replace that node.
inline constexpr double kNodeMergeTolerance = 1e-12;

/// Uniform nodes t0 + k * base_step (plus T) merged with every jump time of
/// a realization that falls in (t0, T].
struct TimeGrid {
  double t0 = 0.0;
  double T = 0.0;
  double base_step = 0.0;
  std::vector<double> nodes;
  /// Node index of each jump inside (t0, T], in time order.
  std::vector<std::size_t> jump_nodes;
  /// Index into JumpRealization::events of the jump at jump_nodes[k].
  std::vector<std::size_t> jump_events;

  std::size_t size() const { return nodes.size(); }

  static TimeGrid build(double t0, double T, double base_step, const JumpRealization& jumps);
};

/// Default base step: eps^2 * min(1, 1/intensity), capped at `cap`.
double default_base_step(double eps, double total_intensity, double cap = 1e-2);

struct SystemPath {
  TimeGrid grid;
  /// Post-jump state at every node.
  std::vector<FullState> states;
  /// State just before each jump (x^-), in event order.
  std::vector<FullState> left_limits;
  double epsilon = 0.0;
  Vec compensator;
  JumpRealization jumps;
  std::vector<double> kinetic_series;
  bool blowup_flag = false;
  /// First node at which the state was non-finite or exceeded kBlowupNorm.
  std::optional<std::size_t> blowup_node;
};

struct ReducedPath {
  TimeGrid grid;
  std::vector<Vec> q_states;
  /// Running noise-induced drift S at each node.
  std::vector<Vec> drift_S_series;
  Vec compensator;
  JumpRealization jumps;
  bool blowup_flag = false;
};

/// Quantities of one drift step of the full system, evaluated at the left
/// end point (t_i, x_i).
struct FullDriftTerms {
  Mat gamma;
  /// -grad_q K^eps - grad_q V + F
  Vec force;
  /// sigma * b_c
  Vec compensator_force;
};

/// One jump of the full system.
struct FullJumpTerms {
  FullState left;
  Mat sigma;
  Vec mark;
};

/// Explicit Euler stepping of
///   dq = grad_p H^eps dt,
///   dp = (-gamma grad_p H^eps - grad_q H^eps + F) dt + sigma(t, x^-) dL
/// with the compensator drift -sigma b_c dt in the drift step and
/// uncompensated jumps applied at jump nodes.
class FullStepper {
public:
  FullStepper(const HamiltonianModel& model, const CoefficientSet& coeffs, double eps,
              const Vec& compensator);

  /// Advances `state` to t_next; applies `mark` (if non-null) after the
  /// drift step. Fills the optional term records.
  void step(FullState& state, double t_next, const Vec* mark, FullDriftTerms* drift = nullptr,
            FullJumpTerms* jump = nullptr) const;

  double kinetic(const FullState& s) const;

private:
  const HamiltonianModel& model_;
  const CoefficientSet& coeffs_;
  double eps_;
  double inv_sqrt_eps_;
  Vec compensator_;
  bool has_compensator_;
  Vec cached_sigma_bc_;
};

/// Explicit Euler stepping of the limiting equation on the set x = (q, 0).
class LimitingStepper {
public:
  LimitingStepper(const HamiltonianModel& model, const CoefficientSet& coeffs,
                  const Vec& compensator);

  /// Advances q to t_next; at jump nodes applies gamma^{-1} sigma mark plus
  /// the noise-induced increment, which is returned through `dS`.
  void step(double t, Vec& q, double t_next, const Vec* mark, Vec* dS = nullptr) const;

private:
  const HamiltonianModel& model_;
  const CoefficientSet& coeffs_;
  Vec compensator_;
  bool has_compensator_;
  Vec cached_sigma_bc_;
};

/// Sign of the noise-induced increment relative to
/// d_{q^h}(gamma^{-1})_{ij} G_{jh}^{ab} (sigma m)_a (sigma m)_b.
inline constexpr double kNoiseDriftSign = +1.0;

/// Jump increment of the noise-induced drift S at (t, q) with sigma
/// evaluated at x = (q, 0).
Vec noise_drift_increment(double t, const Vec& q, const Vec& mark, const HamiltonianModel& model,
                          const CoefficientSet& coeffs);

/// Same increment with sigma evaluated at x = (q, p); used along full paths.
Vec noise_drift_increment_at(double t, const Vec& q, const Vec& p, const Vec& mark,
                             const CoefficientSet& coeffs, double sign = kNoiseDriftSign);

SystemPath integrate_full(const HamiltonianModel& model, const CoefficientSet& coeffs, double eps,
                          const FullState& init, const TimeGrid& grid, const JumpRealization& jumps,
                          const Vec& compensator);

ReducedPath integrate_limiting(const HamiltonianModel& model, const CoefficientSet& coeffs,
                               const Vec& init_q, const TimeGrid& grid, const JumpRealization& jumps,
                               const Vec& compensator);

/// Running decomposition
///   q^eps_t = q_0 + drift_t + noise_t + S_t + R_t
/// where drift and noise integrate gamma^{-1}(-grad_q H^eps + F) and
/// gamma^{-1} sigma dL on the path's own grid and S sums the noise-induced
/// increments along x^eps.
class RemainderAccumulator {
public:
  RemainderAccumulator(const CoefficientSet& coeffs, const Vec& q0,
                       double sign = kNoiseDriftSign);

  void add_drift(const FullDriftTerms& terms, double dt);
  void add_jump(const FullJumpTerms& terms);

  Vec remainder(const Vec& q) const { return q - q0_ - drift_ - noise_ - noise_induced_; }

  const Vec& drift() const { return drift_; }
  const Vec& noise() const { return noise_; }
  const Vec& noise_induced() const { return noise_induced_; }

private:
  const CoefficientSet& coeffs_;
  Vec q0_;
  double sign_;
  Vec drift_;
  Vec noise_;
  Vec noise_induced_;
};

struct RemainderDecomposition {
  std::vector<Vec> drift;
  std::vector<Vec> noise;
  std::vector<Vec> noise_induced;
  std::vector<Vec> remainder;
};

/// Node-wise remainder series of a full path. Throws std::invalid_argument
/// for exploded paths.
RemainderDecomposition remainder_path(const SystemPath& full, const HamiltonianModel& model,
                                      const CoefficientSet& coeffs,
                                      double sign = kNoiseDriftSign);

}  // namespace levyhom
