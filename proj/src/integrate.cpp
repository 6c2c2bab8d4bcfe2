#include "levyhom/integrate.hpp"

#include "levyhom/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace levyhom {

namespace {

Vec solve_gamma(const Mat& gamma, const Vec& v) {
  if (gamma.rows() == 1) return v / gamma(0, 0);
  Eigen::LLT<Mat> llt(gamma);
  if (llt.info() != Eigen::Success) throw std::domain_error("gamma is not positive definite");
  return llt.solve(v);
}

Mat solve_gamma(const Mat& gamma, const Mat& m) {
  Eigen::LLT<Mat> llt(gamma);
  if (llt.info() != Eigen::Success) throw std::domain_error("gamma is not positive definite");
  return llt.solve(m);
}

bool exploded(const FullState& s) {
  return !s.finite() || s.q.norm() > kBlowupNorm || s.p.norm() > kBlowupNorm;
}

void check_grid(const TimeGrid& grid, const JumpRealization& jumps) {
  if (grid.nodes.empty()) throw std::invalid_argument("time grid is empty");
  if (jumps.t0 > grid.t0 || jumps.t1 < grid.T)
    throw std::invalid_argument("jump realization window does not cover the time grid");
}

}  // namespace

TimeGrid TimeGrid::build(double t0, double T, double base_step, const JumpRealization& jumps) {
  if (!(T > t0)) throw std::invalid_argument("time grid requires T > t0");
  if (!(base_step > 0.0)) throw std::invalid_argument("base_step must be > 0");

  TimeGrid g;
  g.t0 = t0;
  g.T = T;
  g.base_step = base_step;

  const double span = T - t0;
  const auto m = static_cast<std::size_t>(std::ceil(span / base_step - 1e-9));
  std::vector<double> uniform;
  uniform.reserve(m + 1);
  for (std::size_t k = 0; k < m; ++k) uniform.push_back(t0 + static_cast<double>(k) * base_step);
  uniform.push_back(T);

  std::vector<double> jump_times;
  for (std::size_t k = 0; k < jumps.events.size(); ++k)
    if (jumps.events[k].time > t0 && jumps.events[k].time <= T) {
      jump_times.push_back(jumps.events[k].time);
      g.jump_events.push_back(k);
    }

  g.nodes.reserve(uniform.size() + jump_times.size());
  g.jump_nodes.reserve(jump_times.size());
  std::size_t u = 0;
  std::size_t j = 0;
  while (u < uniform.size() || j < jump_times.size()) {
    if (j < jump_times.size() && (u == uniform.size() || jump_times[j] < uniform[u] - kNodeMergeTolerance)) {
      g.jump_nodes.push_back(g.nodes.size());
      g.nodes.push_back(jump_times[j++]);
      continue;
    }
    if (j < jump_times.size() && std::abs(jump_times[j] - uniform[u]) <= kNodeMergeTolerance) {
      const bool endpoint = u == 0 || u + 1 == uniform.size();
      if (u == 0) {
        // keep t0 as its own node; the jump follows it
        g.nodes.push_back(uniform[u++]);
        g.jump_nodes.push_back(g.nodes.size());
        g.nodes.push_back(jump_times[j++]);
      } else {
        g.jump_nodes.push_back(g.nodes.size());
        g.nodes.push_back(endpoint ? uniform[u] : jump_times[j]);
        ++u;
        ++j;
      }
      continue;
    }
    g.nodes.push_back(uniform[u++]);
  }
  return g;
}

double default_base_step(double eps, double total_intensity, double cap) {
  const double scale = total_intensity > 1.0 ? 1.0 / total_intensity : 1.0;
  return std::min(cap, eps * eps * scale);
}

FullStepper::FullStepper(const HamiltonianModel& model, const CoefficientSet& coeffs, double eps,
                         const Vec& compensator)
    : model_(model),
      coeffs_(coeffs),
      eps_(eps),
      inv_sqrt_eps_(1.0 / std::sqrt(eps)),
      compensator_(compensator),
      has_compensator_(compensator.size() > 0 && compensator.cwiseAbs().maxCoeff() != 0.0) {
  if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (compensator.size() != coeffs.d())
    throw std::invalid_argument("compensator dimension differs from noise dimension d");
  if (model.n() != coeffs.n()) throw std::invalid_argument("model and coefficient dimensions differ");
  const int n = coeffs.n();
  cached_sigma_bc_ = Vec::Zero(n);
  if (has_compensator_ && coeffs.sigma_constant())
    cached_sigma_bc_ = coeffs.sigma(0.0, Vec::Zero(n), Vec::Zero(n)) * compensator_;
}

double FullStepper::kinetic(const FullState& s) const {
  return kinetic_energy(model_, eps_, s);
}

void FullStepper::step(FullState& s, double t_next, const Vec* mark, FullDriftTerms* drift,
                       FullJumpTerms* jump) const {
  const double dt = t_next - s.t;
  const Vec z = s.p * inv_sqrt_eps_;
  const Vec dHdp = model_.grad_z_K(eps_, s.t, s.q, z) * inv_sqrt_eps_;
  const Mat gamma = coeffs_.gamma(s.t, s.q);
  const Vec force = -model_.grad_q_K(eps_, s.t, s.q, z) - model_.grad_q_V(s.t, s.q) +
                    coeffs_.F(s.t, s.q, s.p);
  Vec comp_force;
  if (!has_compensator_)
    comp_force = Vec::Zero(s.p.size());
  else if (coeffs_.sigma_constant())
    comp_force = cached_sigma_bc_;
  else
    comp_force = coeffs_.sigma(s.t, s.q, s.p) * compensator_;

  if (drift) {
    drift->gamma = gamma;
    drift->force = force;
    drift->compensator_force = comp_force;
  }

  s.q += dHdp * dt;
  s.p += (-(gamma * dHdp) + force - comp_force) * dt;
  s.t = t_next;

  if (mark) {
    const Mat sigma = coeffs_.sigma(s.t, s.q, s.p);
    if (jump) {
      jump->left = s;
      jump->sigma = sigma;
      jump->mark = *mark;
    }
    s.p += sigma * (*mark);
  }
}

LimitingStepper::LimitingStepper(const HamiltonianModel& model, const CoefficientSet& coeffs,
                                 const Vec& compensator)
    : model_(model),
      coeffs_(coeffs),
      compensator_(compensator),
      has_compensator_(compensator.size() > 0 && compensator.cwiseAbs().maxCoeff() != 0.0) {
  if (compensator.size() != coeffs.d())
    throw std::invalid_argument("compensator dimension differs from noise dimension d");
  if (model.n() != coeffs.n()) throw std::invalid_argument("model and coefficient dimensions differ");
  if (!model.has_limit_gradient())
    throw std::invalid_argument("limiting equation needs the model's grad_q_K_limit");
  const int n = coeffs.n();
  cached_sigma_bc_ = Vec::Zero(n);
  if (has_compensator_ && coeffs.sigma_constant())
    cached_sigma_bc_ = coeffs.sigma(0.0, Vec::Zero(n), Vec::Zero(n)) * compensator_;
}

void LimitingStepper::step(double t, Vec& q, double t_next, const Vec* mark, Vec* dS) const {
  const double dt = t_next - t;
  const int n = static_cast<int>(q.size());
  const Vec p0 = Vec::Zero(n);
  const Mat gamma = coeffs_.gamma(t, q);
  Vec force = -model_.grad_q_V(t, q) - model_.grad_q_K_limit(t, q) + coeffs_.F(t, q, p0);
  if (has_compensator_)
    force -= coeffs_.sigma_constant() ? cached_sigma_bc_ : Vec(coeffs_.sigma(t, q, p0) * compensator_);
  q += solve_gamma(gamma, force) * dt;

  if (mark) {
    const Mat g_left = coeffs_.gamma(t_next, q);
    const Vec kick = solve_gamma(g_left, Vec(coeffs_.sigma(t_next, q, p0) * (*mark)));
    const Vec inc = noise_drift_increment(t_next, q, *mark, model_, coeffs_);
    q += kick + inc;
    if (dS) *dS = inc;
  } else if (dS) {
    *dS = Vec::Zero(n);
  }
}

Vec noise_drift_increment_at(double t, const Vec& q, const Vec& p, const Vec& mark,
                             const CoefficientSet& coeffs, double sign) {
  const int n = static_cast<int>(q.size());
  Vec out = Vec::Zero(n);
  const std::vector<Mat> dgamma = coeffs.dgamma_dq(t, q);
  if (static_cast<int>(dgamma.size()) != n)
    throw std::invalid_argument("dgamma_dq must return n matrices");
  bool all_zero = true;
  for (const auto& m : dgamma)
    if (!m.isZero(0.0)) all_zero = false;
  if (all_zero) return out;

  const Mat gamma = coeffs.gamma(t, q);
  const GTensor G = g_tensor(gamma);
  const Vec w = coeffs.sigma(t, q, p) * mark;
  // W_{jh} = sum_{a,b} G_{jh}^{ab} w_a w_b
  const Eigen::MatrixXd W = G.contract(Eigen::MatrixXd(w * w.transpose()));
  for (int h = 0; h < n; ++h) {
    if (dgamma[h].isZero(0.0)) continue;
    // d_{q^h}(gamma^{-1}) = -gamma^{-1} (d_h gamma) gamma^{-1}
    const Mat dinv =
        -Mat(solve_gamma(gamma, Mat(solve_gamma(gamma, dgamma[h]).transpose())).transpose());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i) += dinv(i, j) * W(j, h);
  }
  return sign * out;
}

Vec noise_drift_increment(double t, const Vec& q, const Vec& mark, const HamiltonianModel& model,
                          const CoefficientSet& coeffs) {
  if (model.n() != static_cast<int>(q.size())) throw std::invalid_argument("q has wrong dimension");
  return noise_drift_increment_at(t, q, Vec::Zero(q.size()), mark, coeffs);
}

SystemPath integrate_full(const HamiltonianModel& model, const CoefficientSet& coeffs, double eps,
                          const FullState& init, const TimeGrid& grid, const JumpRealization& jumps,
                          const Vec& compensator) {
  if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  check_grid(grid, jumps);
  if (!init.finite()) throw std::invalid_argument("initial state must be finite");
  const FullStepper stepper(model, coeffs, eps, compensator);

  SystemPath path;
  path.grid = grid;
  path.epsilon = eps;
  path.compensator = compensator;
  path.jumps = jumps;
  path.states.reserve(grid.size());
  path.kinetic_series.reserve(grid.size());

  FullState s = init;
  s.t = grid.nodes.front();
  path.states.push_back(s);
  path.kinetic_series.push_back(stepper.kinetic(s));

  std::size_t next_jump = 0;
  FullJumpTerms jt;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const bool is_jump = next_jump < grid.jump_nodes.size() && grid.jump_nodes[next_jump] == i;
    if (!path.blowup_flag) {
      stepper.step(s, grid.nodes[i], is_jump ? &jumps.events[grid.jump_events[next_jump]].mark : nullptr, nullptr,
                   is_jump ? &jt : nullptr);
      if (exploded(s)) {
        path.blowup_flag = true;
        path.blowup_node = i;
      }
    } else {
      s.t = grid.nodes[i];
    }
    if (is_jump) {
      path.left_limits.push_back(path.blowup_flag ? s : jt.left);
      ++next_jump;
    }
    path.states.push_back(s);
    path.kinetic_series.push_back(path.blowup_flag ? std::nan("") : stepper.kinetic(s));
  }
  return path;
}

ReducedPath integrate_limiting(const HamiltonianModel& model, const CoefficientSet& coeffs,
                               const Vec& init_q, const TimeGrid& grid, const JumpRealization& jumps,
                               const Vec& compensator) {
  check_grid(grid, jumps);
  if (init_q.size() != model.n() || !init_q.allFinite())
    throw std::invalid_argument("initial q must be finite with dimension n");
  const LimitingStepper stepper(model, coeffs, compensator);

  ReducedPath path;
  path.grid = grid;
  path.compensator = compensator;
  path.jumps = jumps;
  path.q_states.reserve(grid.size());
  path.drift_S_series.reserve(grid.size());

  Vec q = init_q;
  Vec S = Vec::Zero(q.size());
  Vec dS;
  path.q_states.push_back(q);
  path.drift_S_series.push_back(S);
  std::size_t next_jump = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const bool is_jump = next_jump < grid.jump_nodes.size() && grid.jump_nodes[next_jump] == i;
    if (!path.blowup_flag) {
      stepper.step(grid.nodes[i - 1], q, grid.nodes[i], is_jump ? &jumps.events[grid.jump_events[next_jump]].mark : nullptr,
                   &dS);
      S += dS;
      if (!q.allFinite() || q.norm() > kBlowupNorm) path.blowup_flag = true;
    }
    if (is_jump) ++next_jump;
    path.q_states.push_back(q);
    path.drift_S_series.push_back(S);
  }
  return path;
}

RemainderAccumulator::RemainderAccumulator(const CoefficientSet& coeffs, const Vec& q0, double sign)
    : coeffs_(coeffs),
      q0_(q0),
      sign_(sign),
      drift_(Vec::Zero(q0.size())),
      noise_(Vec::Zero(q0.size())),
      noise_induced_(Vec::Zero(q0.size())) {}

void RemainderAccumulator::add_drift(const FullDriftTerms& terms, double dt) {
  drift_ += solve_gamma(terms.gamma, terms.force) * dt;
  noise_ -= solve_gamma(terms.gamma, terms.compensator_force) * dt;
}

void RemainderAccumulator::add_jump(const FullJumpTerms& terms) {
  const FullState& x = terms.left;
  const Mat gamma = coeffs_.gamma(x.t, x.q);
  noise_ += solve_gamma(gamma, Vec(terms.sigma * terms.mark));
  noise_induced_ += noise_drift_increment_at(x.t, x.q, x.p, terms.mark, coeffs_, sign_);
}

RemainderDecomposition remainder_path(const SystemPath& full, const HamiltonianModel& model,
                                      const CoefficientSet& coeffs, double sign) {
  if (full.blowup_flag) throw std::invalid_argument("remainder_path needs a non-exploded path");
  if (full.states.size() != full.grid.size()) throw std::invalid_argument("path and grid disagree");
  const FullStepper stepper(model, coeffs, full.epsilon, full.compensator);
  RemainderAccumulator acc(coeffs, full.states.front().q, sign);

  RemainderDecomposition out;
  const std::size_t N = full.grid.size();
  out.drift.reserve(N);
  out.noise.reserve(N);
  out.noise_induced.reserve(N);
  out.remainder.reserve(N);
  auto record = [&](const Vec& q) {
    out.drift.push_back(acc.drift());
    out.noise.push_back(acc.noise());
    out.noise_induced.push_back(acc.noise_induced());
    out.remainder.push_back(acc.remainder(q));
  };
  record(full.states.front().q);

  std::size_t next_jump = 0;
  FullDriftTerms dt_terms;
  for (std::size_t i = 1; i < N; ++i) {
    // Re-evaluate the drift terms at the left node; callables are pure, so
    // these match what the integrator used.
    FullState probe = full.states[i - 1];
    stepper.step(probe, full.grid.nodes[i], nullptr, &dt_terms, nullptr);
    acc.add_drift(dt_terms, full.grid.nodes[i] - full.grid.nodes[i - 1]);
    if (next_jump < full.grid.jump_nodes.size() && full.grid.jump_nodes[next_jump] == i) {
      const FullState& left = full.left_limits[next_jump];
      FullJumpTerms jt{left, coeffs.sigma(left.t, left.q, left.p), full.jumps.events[full.grid.jump_events[next_jump]].mark};
      acc.add_jump(jt);
      ++next_jump;
    }
    record(full.states[i].q);
  }
  return out;
}

}  // namespace levyhom
