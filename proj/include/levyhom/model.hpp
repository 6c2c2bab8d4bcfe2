#pragma once

#include "levyhom/levy_noise.hpp"
#include "levyhom/types.hpp"

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace levyhom {

using ScalarKFn = std::function<double(double eps, double t, const Vec& q, const Vec& z)>;
using VectorKFn = std::function<Vec(double eps, double t, const Vec& q, const Vec& z)>;
using ScalarFieldFn = std::function<double(double t, const Vec& q)>;
using VectorFieldFn = std::function<Vec(double t, const Vec& q)>;

/// Callables making up the Hamiltonian family H^eps = K(eps,t,q,p/sqrt(eps)) + V(t,q).
struct HamiltonianParts {
  int n = 1;
  double eta = 2.0;
  ScalarKFn K;
  ScalarKFn dK_dt;
  VectorKFn grad_q_K;
  VectorKFn grad_z_K;
  ScalarFieldFn V;
  VectorFieldFn grad_q_V;
  /// q-gradient of the kinetic energy on the limit set z = 0. Optional;
  /// required only by the limiting integrator.
  VectorFieldFn grad_q_K_limit;
};

/// Immutable Hamiltonian family. Construction rejects eta <= 1 and missing
/// callables; all callables must be pure.
class HamiltonianModel {
public:
  explicit HamiltonianModel(HamiltonianParts parts);

  int n() const { return parts_.n; }
  double eta() const { return parts_.eta; }

  double K(double eps, double t, const Vec& q, const Vec& z) const { return parts_.K(eps, t, q, z); }
  double dK_dt(double eps, double t, const Vec& q, const Vec& z) const {
    return parts_.dK_dt(eps, t, q, z);
  }
  Vec grad_q_K(double eps, double t, const Vec& q, const Vec& z) const {
    return parts_.grad_q_K(eps, t, q, z);
  }
  Vec grad_z_K(double eps, double t, const Vec& q, const Vec& z) const {
    return parts_.grad_z_K(eps, t, q, z);
  }
  double V(double t, const Vec& q) const { return parts_.V(t, q); }
  Vec grad_q_V(double t, const Vec& q) const { return parts_.grad_q_V(t, q); }

  bool has_limit_gradient() const { return static_cast<bool>(parts_.grad_q_K_limit); }
  /// Throws std::logic_error when the model does not provide it.
  Vec grad_q_K_limit(double t, const Vec& q) const;

private:
  HamiltonianParts parts_;
};

using MatrixFieldFn = std::function<Mat(double t, const Vec& q)>;
using MatrixDerivFn = std::function<std::vector<Mat>(double t, const Vec& q)>;
using StateVectorFn = std::function<Vec(double t, const Vec& q, const Vec& p)>;
using StateMatrixFn = std::function<Mat(double t, const Vec& q, const Vec& p)>;

struct CoefficientParts {
  int n = 1;
  int d = 1;
  double lambda_min = 1.0;
  MatrixFieldFn gamma;
  /// Entry h is the matrix d gamma / d q^h.
  MatrixDerivFn dgamma_dq;
  MatrixFieldFn dgamma_dt;
  StateVectorFn F;
  StateMatrixFn sigma;
  /// Set when sigma(t, q, p) is known not to vary, which lets the
  /// integrators skip re-evaluating it in the compensator term.
  bool sigma_constant = false;
};

/// Dissipation, forcing and noise-intensity coefficients.
class CoefficientSet {
public:
  explicit CoefficientSet(CoefficientParts parts);

  int n() const { return parts_.n; }
  int d() const { return parts_.d; }
  double lambda_min() const { return parts_.lambda_min; }
  bool sigma_constant() const { return parts_.sigma_constant; }

  Mat gamma(double t, const Vec& q) const { return parts_.gamma(t, q); }
  std::vector<Mat> dgamma_dq(double t, const Vec& q) const { return parts_.dgamma_dq(t, q); }
  Mat dgamma_dt(double t, const Vec& q) const { return parts_.dgamma_dt(t, q); }
  Vec F(double t, const Vec& q, const Vec& p) const { return parts_.F(t, q, p); }
  Mat sigma(double t, const Vec& q, const Vec& p) const { return parts_.sigma(t, q, p); }

private:
  CoefficientParts parts_;
};

/// x = (q, p) at time t.
struct FullState {
  double t = 0.0;
  Vec q;
  Vec p;

  bool finite() const { return q.allFinite() && p.allFinite(); }
};

/// K^eps(t, x) = K(eps, t, q, p / sqrt(eps)). Throws for eps <= 0.
double kinetic_energy(const HamiltonianModel& model, double eps, const FullState& s);

/// Randomized probe specification for validate_assumptions. Probes are
/// drawn uniformly from the box |q_i| <= q_box, |z_i| <= z_box,
/// t in [0, horizon], eps in eps_values. Growth and boundedness clauses are
/// additionally re-evaluated on a box enlarged by expansion_factor.
struct ProbeGrid {
  double q_box = 3.0;
  double z_box = 3.0;
  double p_box = 3.0;
  double horizon = 1.0;
  std::vector<double> eps_values{0.25, 0.0625, 0.015625};
  int n_probes = 400;
  double expansion_factor = 4.0;
  std::uint64_t seed = 20240611;
};

struct ClauseResult {
  std::string name;
  bool pass = true;
  /// Informational clauses are reported but do not count toward all_pass().
  bool informational = false;
  /// Fitted constant (or the worst observed value) backing the verdict.
  double fitted = 0.0;
  std::string detail;
  /// Probe that witnesses a failure (or the extremal probe on success).
  std::optional<FullState> witness;
  std::optional<double> witness_eps;
};

struct ValidationReport {
  std::vector<ClauseResult> clauses;
  double detected_eta = 0.0;

  bool all_pass() const;
  const ClauseResult* find(const std::string& name) const;
};

/// Sampling-based check of the model assumptions. Failures become report
/// entries; the function itself does not throw for violated assumptions.
/// When a measure is supplied, its moments of order 2 and theta_max are
/// checked for finiteness.
ValidationReport validate_assumptions(const HamiltonianModel& model, const CoefficientSet& coeffs,
                                      const ProbeGrid& grid, double theta_max,
                                      const LevyMeasureSpec* measure = nullptr);

/// Smoluchowski-Kramers Hamiltonian K(eps,t,q,z) = |z|^2/2 with the supplied
/// potential, so that eps plays the role of the mass.
HamiltonianModel smoluchowski_kramers_model(int n, ScalarFieldFn V, VectorFieldFn grad_q_V);

struct PresetModel {
  HamiltonianModel model;
  CoefficientSet coeffs;
};

PresetModel smoluchowski_kramers_preset(int n, ScalarFieldFn V, VectorFieldFn grad_q_V,
                                        CoefficientSet coeffs);

}  // namespace levyhom
