#include "levyhom/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace levyhom {

HamiltonianModel::HamiltonianModel(HamiltonianParts parts) : parts_(std::move(parts)) {
  if (parts_.n < 1 || parts_.n > kMaxDim)
    throw std::invalid_argument("model dimension n must be in [1, " + std::to_string(kMaxDim) + "]");
  // The kinetic growth condition only asks eta > 0, but the moment rates need eta > 1.
  if (!(parts_.eta > 1.0)) throw std::invalid_argument("growth exponent eta must be > 1");
  if (!parts_.K || !parts_.dK_dt || !parts_.grad_q_K || !parts_.grad_z_K || !parts_.V ||
      !parts_.grad_q_V)
    throw std::invalid_argument("model is missing a required callable");
}

Vec HamiltonianModel::grad_q_K_limit(double t, const Vec& q) const {
  if (!parts_.grad_q_K_limit)
    throw std::logic_error("model does not provide grad_q_K_limit");
  return parts_.grad_q_K_limit(t, q);
}

CoefficientSet::CoefficientSet(CoefficientParts parts) : parts_(std::move(parts)) {
  if (parts_.n < 1 || parts_.n > kMaxDim || parts_.d < 1 || parts_.d > kMaxDim)
    throw std::invalid_argument("coefficient dimensions out of range");
  if (!(parts_.lambda_min > 0.0)) throw std::invalid_argument("lambda_min must be > 0");
  if (!parts_.gamma || !parts_.dgamma_dq || !parts_.dgamma_dt || !parts_.F || !parts_.sigma)
    throw std::invalid_argument("coefficient set is missing a required callable");
}

double kinetic_energy(const HamiltonianModel& model, double eps, const FullState& s) {
  if (!(eps > 0.0)) throw std::invalid_argument("kinetic_energy requires eps > 0");
  return model.K(eps, s.t, s.q, s.p / std::sqrt(eps));
}

bool ValidationReport::all_pass() const {
  return std::all_of(clauses.begin(), clauses.end(),
                     [](const ClauseResult& c) { return c.informational || c.pass; });
}

const ClauseResult* ValidationReport::find(const std::string& name) const {
  for (const auto& c : clauses)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

struct Probe {
  double eps;
  double t;
  Vec q;
  Vec z;
  Vec p;  // independent momentum draw for coefficient clauses
};

class ProbeSampler {
public:
  ProbeSampler(const ProbeGrid& grid, int n) : grid_(grid), n_(n), rng_(grid.seed) {}

  std::vector<Probe> draw(double scale) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> ut(0.0, grid_.horizon);
    std::uniform_int_distribution<std::size_t> pick(0, grid_.eps_values.size() - 1);
    std::vector<Probe> out;
    out.reserve(grid_.n_probes);
    for (int k = 0; k < grid_.n_probes; ++k) {
      Probe pr;
      pr.eps = grid_.eps_values[pick(rng_)];
      pr.t = ut(rng_);
      pr.q = Vec(n_);
      pr.z = Vec(n_);
      pr.p = Vec(n_);
      for (int i = 0; i < n_; ++i) {
        pr.q(i) = scale * grid_.q_box * u(rng_);
        pr.z(i) = scale * grid_.z_box * u(rng_);
        pr.p(i) = scale * grid_.p_box * u(rng_);
      }
      out.push_back(std::move(pr));
    }
    return out;
  }

  Vec direction() {
    std::normal_distribution<double> g;
    Vec v(n_);
    do {
      for (int i = 0; i < n_; ++i) v(i) = g(rng_);
    } while (v.norm() == 0.0);
    return v / v.norm();
  }

private:
  const ProbeGrid& grid_;
  int n_;
  std::mt19937_64 rng_;
};

FullState kinetic_witness(const Probe& pr) {
  return FullState{pr.t, pr.q, pr.z * std::sqrt(pr.eps)};
}

FullState coefficient_witness(const Probe& pr) { return FullState{pr.t, pr.q, pr.p}; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Growth/boundedness verdict: the fitted constant may not grow by more than
// this factor when the probe box is enlarged.
constexpr double kGrowthSlack = 2.0;
constexpr double kFdStep = 1e-5;
constexpr double kFdTolerance = 1e-4;

double matrix_norm(const Mat& m) { return m.norm(); }

// Maximum of a scalar functional over probes, recording the argmax.
template <typename F>
std::pair<double, const Probe*> max_over(const std::vector<Probe>& probes, F f) {
  double best = -std::numeric_limits<double>::infinity();
  const Probe* arg = nullptr;
  for (const auto& pr : probes) {
    const double v = f(pr);
    if (!(v <= best)) {
      best = v;
      arg = &pr;
    }
  }
  return {best, arg};
}

ClauseResult growth_clause(const std::string& name, const std::vector<Probe>& base,
                           const std::vector<Probe>& wide, const std::function<double(const Probe&)>& f,
                           bool kinetic_probe, bool informational = false) {
  const auto [c_base, arg_base] = max_over(base, f);
  const auto [c_wide, arg_wide] = max_over(wide, f);
  ClauseResult r;
  r.name = name;
  r.informational = informational;
  r.fitted = c_wide;
  r.pass = std::isfinite(c_wide) && c_wide <= kGrowthSlack * c_base + 1e-9;
  r.detail = "fitted " + fmt(c_base) + " on probe box, " + fmt(c_wide) + " on enlarged box";
  const Probe* w = arg_wide ? arg_wide : arg_base;
  if (w) {
    r.witness = kinetic_probe ? kinetic_witness(*w) : coefficient_witness(*w);
    r.witness_eps = w->eps;
  }
  return r;
}

double rel_err(const Vec& a, const Vec& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

ValidationReport validate_assumptions(const HamiltonianModel& model, const CoefficientSet& coeffs,
                                      const ProbeGrid& grid, double theta_max,
                                      const LevyMeasureSpec* measure) {
  if (grid.n_probes < 1 || grid.eps_values.empty())
    throw std::invalid_argument("probe grid must be nonempty");
  const int n = model.n();
  ValidationReport report;
  ProbeSampler sampler(grid, n);
  const auto base = sampler.draw(1.0);
  const auto wide = sampler.draw(grid.expansion_factor);

  auto K = [&](const Probe& pr) { return model.K(pr.eps, pr.t, pr.q, pr.z); };

  // K >= 0.
  {
    ClauseResult r;
    r.name = "kinetic_nonnegative";
    double worst = std::numeric_limits<double>::infinity();
    for (const auto* set : {&base, &wide})
      for (const auto& pr : *set) {
        const double k = K(pr);
        if (!(k >= worst)) {
          worst = k;
          r.witness = kinetic_witness(pr);
          r.witness_eps = pr.eps;
        }
      }
    r.fitted = worst;
    r.pass = worst >= 0.0;
    r.detail = "min K = " + fmt(worst);
    report.clauses.push_back(std::move(r));
  }

  // max{|dK/dt|, |grad_q K|, |grad_z K|} <= M1 + C K, fitted as C(1 + K).
  report.clauses.push_back(growth_clause(
      "growth_dK_dt", base, wide,
      [&](const Probe& pr) { return std::abs(model.dK_dt(pr.eps, pr.t, pr.q, pr.z)) / (1.0 + K(pr)); },
      true));
  report.clauses.push_back(growth_clause(
      "growth_grad_q_K", base, wide,
      [&](const Probe& pr) { return model.grad_q_K(pr.eps, pr.t, pr.q, pr.z).norm() / (1.0 + K(pr)); },
      true));
  report.clauses.push_back(growth_clause(
      "growth_grad_z_K", base, wide,
      [&](const Probe& pr) { return model.grad_z_K(pr.eps, pr.t, pr.q, pr.z).norm() / (1.0 + K(pr)); },
      true));

  // |grad_z K|^2 + M2 >= c K with M2 = 1; c is the fitted minimum ratio.
  {
    auto ratio = [&](const Probe& pr) {
      const double k = K(pr);
      if (k <= 0.0) return std::numeric_limits<double>::infinity();
      return (model.grad_z_K(pr.eps, pr.t, pr.q, pr.z).squaredNorm() + 1.0) / k;
    };
    auto neg = [&](const Probe& pr) { return -ratio(pr); };
    const auto [nb, ab] = max_over(base, neg);
    const auto [nw, aw] = max_over(wide, neg);
    ClauseResult r;
    r.name = "coercivity_grad_z_K";
    r.fitted = -nw;
    r.pass = -nw > 0.0 && -nw >= (-nb) / kGrowthSlack;
    r.detail = "fitted c = " + fmt(-nb) + " (M2 = 1), " + fmt(-nw) + " on enlarged box";
    if (const Probe* w = aw ? aw : ab) {
      r.witness = kinetic_witness(*w);
      r.witness_eps = w->eps;
    }
    report.clauses.push_back(std::move(r));
  }

  // K >= c |z|^eta.
  {
    auto ratio = [&](const Probe& pr) {
      const double zn = pr.z.norm();
      if (zn == 0.0) return std::numeric_limits<double>::infinity();
      return K(pr) / std::pow(zn, model.eta());
    };
    auto neg = [&](const Probe& pr) { return -ratio(pr); };
    const auto [nb, ab] = max_over(base, neg);
    const auto [nw, aw] = max_over(wide, neg);
    ClauseResult r;
    r.name = "kinetic_lower_bound_eta";
    r.fitted = std::min(-nb, -nw);
    r.pass = r.fitted > 1e-12 && -nw >= (-nb) / kGrowthSlack;
    r.detail = "fitted c = " + fmt(r.fitted) + " for eta = " + fmt(model.eta());
    if (const Probe* w = aw ? aw : ab) {
      r.witness = kinetic_witness(*w);
      r.witness_eps = w->eps;
    }
    report.clauses.push_back(std::move(r));
  }

  // Growth exponent detected along random rays at large |z|.
  {
    const double radius = grid.expansion_factor * grid.z_box;
    double detected = std::numeric_limits<double>::infinity();
    Probe worst;
    for (int k = 0; k < 32; ++k) {
      Probe pr = base[static_cast<std::size_t>(k) % base.size()];
      const Vec dir = sampler.direction();
      const double k1 = model.K(pr.eps, pr.t, pr.q, radius * dir);
      const double k2 = model.K(pr.eps, pr.t, pr.q, 2.0 * radius * dir);
      const double slope = (k1 > 0.0 && k2 > 0.0) ? std::log(k2 / k1) / std::log(2.0)
                                                  : -std::numeric_limits<double>::infinity();
      if (!(slope >= detected)) {
        detected = slope;
        pr.z = radius * dir;
        worst = pr;
      }
    }
    report.detected_eta = detected;
    ClauseResult r;
    r.name = "eta_compatible";
    r.fitted = detected;
    r.pass = model.eta() > 1.0 && detected >= model.eta() - 0.05;
    r.detail = "detected growth exponent " + fmt(detected) + ", declared " + fmt(model.eta());
    r.witness = kinetic_witness(worst);
    r.witness_eps = worst.eps;
    report.clauses.push_back(std::move(r));
  }

  // Lipschitz continuity of K in z. Incompatible with eta > 1 for unbounded
  // z, so it is reported but does not gate.
  {
    auto lip = [&](const std::vector<Probe>& set) {
      double best = 0.0;
      const Probe* arg = nullptr;
      for (std::size_t k = 0; k + 1 < set.size(); k += 2) {
        const Probe& a = set[k];
        const Vec z2 = set[k + 1].z;
        const double dz = (a.z - z2).norm();
        if (dz == 0.0) continue;
        const double v = std::abs(K(a) - model.K(a.eps, a.t, a.q, z2)) / dz;
        if (v > best) {
          best = v;
          arg = &a;
        }
      }
      return std::make_pair(best, arg);
    };
    const auto [lb, ab] = lip(base);
    const auto [lw, aw] = lip(wide);
    ClauseResult r;
    r.name = "kinetic_lipschitz_in_z";
    r.informational = true;
    r.fitted = lw;
    r.pass = lw <= kGrowthSlack * lb + 1e-9;
    r.detail = "sampled Lipschitz ratio " + fmt(lb) + " on probe box, " + fmt(lw) + " on enlarged box";
    if (const Probe* w = aw ? aw : ab) {
      r.witness = kinetic_witness(*w);
      r.witness_eps = w->eps;
    }
    report.clauses.push_back(std::move(r));
  }

  report.clauses.push_back(growth_clause(
      "potential_gradient_bounded", base, wide,
      [&](const Probe& pr) { return model.grad_q_V(pr.t, pr.q).norm(); }, false));

  // gamma symmetric with eigenvalues >= lambda_min.
  {
    ClauseResult sym;
    sym.name = "gamma_symmetric";
    ClauseResult floor;
    floor.name = "gamma_eigenvalue_floor";
    double worst_asym = 0.0;
    double worst_eig = std::numeric_limits<double>::infinity();
    for (const auto* set : {&base, &wide})
      for (const auto& pr : *set) {
        const Mat g = coeffs.gamma(pr.t, pr.q);
        const double asym = (g - g.transpose()).cwiseAbs().maxCoeff() /
                            std::max(1.0, g.cwiseAbs().maxCoeff());
        if (asym > worst_asym) {
          worst_asym = asym;
          sym.witness = coefficient_witness(pr);
        }
        const Mat gs = 0.5 * (g + g.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> es(gs, Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        if (!(lo >= worst_eig)) {
          worst_eig = lo;
          floor.witness = coefficient_witness(pr);
        }
      }
    sym.fitted = worst_asym;
    sym.pass = worst_asym <= 1e-12;
    sym.detail = "max relative asymmetry " + fmt(worst_asym);
    floor.fitted = worst_eig;
    floor.pass = worst_eig >= coeffs.lambda_min() - 1e-12;
    floor.detail = "smallest eigenvalue " + fmt(worst_eig) + " vs lambda_min " + fmt(coeffs.lambda_min());
    report.clauses.push_back(std::move(sym));
    report.clauses.push_back(std::move(floor));
  }

  report.clauses.push_back(growth_clause(
      "gamma_bounded", base, wide,
      [&](const Probe& pr) { return matrix_norm(coeffs.gamma(pr.t, pr.q)); }, false));
  report.clauses.push_back(growth_clause(
      "force_bounded", base, wide,
      [&](const Probe& pr) { return coeffs.F(pr.t, pr.q, pr.p).norm(); }, false));
  report.clauses.push_back(growth_clause(
      "sigma_bounded", base, wide,
      [&](const Probe& pr) { return matrix_norm(coeffs.sigma(pr.t, pr.q, pr.p)); }, false));
  report.clauses.push_back(growth_clause(
      "gamma_dq_bounded", base, wide,
      [&](const Probe& pr) {
        double s = 0.0;
        for (const auto& m : coeffs.dgamma_dq(pr.t, pr.q)) s += m.squaredNorm();
        return std::sqrt(s);
      },
      false));
  report.clauses.push_back(growth_clause(
      "gamma_dt_bounded", base, wide,
      [&](const Probe& pr) { return matrix_norm(coeffs.dgamma_dt(pr.t, pr.q)); }, false));

  // Sampled Lipschitz ratios on pairs: far pairs plus close pairs.
  auto lipschitz_clause = [&](const std::string& name,
                              const std::function<double(const Probe&, const Probe&)>& diff,
                              const std::function<double(const Probe&, const Probe&)>& dist,
                              bool kinetic_probe) {
    auto ratio_over = [&](const std::vector<Probe>& set) {
      double best = 0.0;
      const Probe* arg = nullptr;
      for (std::size_t k = 0; k + 1 < set.size(); ++k) {
        const Probe& a = set[k];
        // far pair
        Probe b = set[k + 1];
        b.eps = a.eps;
        b.t = a.t;
        // close pair along the same segment
        Probe c = a;
        const double h = 1e-3;
        c.q = a.q + h * (b.q - a.q);
        c.p = a.p + h * (b.p - a.p);
        c.z = a.z + h * (b.z - a.z);
        for (const Probe* other : {&b, &c}) {
          const double dx = dist(a, *other);
          if (dx == 0.0) continue;
          const double v = diff(a, *other) / dx;
          if (v > best) {
            best = v;
            arg = &a;
          }
        }
      }
      return std::make_pair(best, arg);
    };
    const auto [lb, ab] = ratio_over(base);
    const auto [lw, aw] = ratio_over(wide);
    ClauseResult r;
    r.name = name;
    r.fitted = std::max(lb, lw);
    r.pass = std::isfinite(lw) && lw <= kGrowthSlack * lb + 1e-9;
    r.detail = "sampled Lipschitz constant " + fmt(lb) + " on probe box, " + fmt(lw) + " on enlarged box";
    if (const Probe* w = aw ? aw : ab) {
      r.witness = kinetic_probe ? kinetic_witness(*w) : coefficient_witness(*w);
      r.witness_eps = w->eps;
    }
    return r;
  };
  auto state_dist = [](const Probe& a, const Probe& b) {
    return std::sqrt((a.q - b.q).squaredNorm() + (a.p - b.p).squaredNorm());
  };
  auto q_dist = [](const Probe& a, const Probe& b) { return (a.q - b.q).norm(); };

  report.clauses.push_back(lipschitz_clause(
      "lipschitz_F",
      [&](const Probe& a, const Probe& b) {
        return (coeffs.F(a.t, a.q, a.p) - coeffs.F(a.t, b.q, b.p)).norm();
      },
      state_dist, false));
  report.clauses.push_back(lipschitz_clause(
      "lipschitz_sigma",
      [&](const Probe& a, const Probe& b) {
        return (coeffs.sigma(a.t, a.q, a.p) - coeffs.sigma(a.t, b.q, b.p)).norm();
      },
      state_dist, false));
  report.clauses.push_back(lipschitz_clause(
      "lipschitz_gamma",
      [&](const Probe& a, const Probe& b) {
        return (coeffs.gamma(a.t, a.q) - coeffs.gamma(a.t, b.q)).norm();
      },
      q_dist, false));
  report.clauses.push_back(lipschitz_clause(
      "lipschitz_grad_q_K",
      [&](const Probe& a, const Probe& b) {
        return (model.grad_q_K(a.eps, a.t, a.q, a.z) - model.grad_q_K(a.eps, a.t, b.q, a.z)).norm();
      },
      q_dist, true));
  // Bounded second derivatives of gamma, via Lipschitz continuity of d gamma / dq.
  report.clauses.push_back(lipschitz_clause(
      "gamma_second_derivatives_bounded",
      [&](const Probe& a, const Probe& b) {
        const auto da = coeffs.dgamma_dq(a.t, a.q);
        const auto db = coeffs.dgamma_dq(a.t, b.q);
        double s = 0.0;
        for (std::size_t h = 0; h < da.size(); ++h) s += (da[h] - db[h]).squaredNorm();
        return std::sqrt(s);
      },
      q_dist, false));

  // Finite-difference consistency of supplied derivatives.
  {
    const int n_fd = std::min<int>(100, static_cast<int>(base.size()));
    auto fd_clause = [&](const std::string& name, const std::function<double(const Probe&)>& err,
                         bool kinetic_probe) {
      ClauseResult r;
      r.name = name;
      double worst = 0.0;
      for (int k = 0; k < n_fd; ++k) {
        const double e = err(base[k]);
        if (!(e <= worst)) {
          worst = e;
          r.witness = kinetic_probe ? kinetic_witness(base[k]) : coefficient_witness(base[k]);
          r.witness_eps = base[k].eps;
        }
      }
      r.fitted = worst;
      r.pass = worst <= kFdTolerance;
      r.detail = "max relative deviation from central differences " + fmt(worst);
      return r;
    };
    const double h = kFdStep;
    report.clauses.push_back(fd_clause(
        "fd_grad_z_K",
        [&](const Probe& pr) {
          Vec fd(n);
          for (int i = 0; i < n; ++i) {
            Vec zp = pr.z, zm = pr.z;
            zp(i) += h;
            zm(i) -= h;
            fd(i) = (model.K(pr.eps, pr.t, pr.q, zp) - model.K(pr.eps, pr.t, pr.q, zm)) / (2 * h);
          }
          return rel_err(fd, model.grad_z_K(pr.eps, pr.t, pr.q, pr.z));
        },
        true));
    report.clauses.push_back(fd_clause(
        "fd_grad_q_K",
        [&](const Probe& pr) {
          Vec fd(n);
          for (int i = 0; i < n; ++i) {
            Vec qp = pr.q, qm = pr.q;
            qp(i) += h;
            qm(i) -= h;
            fd(i) = (model.K(pr.eps, pr.t, qp, pr.z) - model.K(pr.eps, pr.t, qm, pr.z)) / (2 * h);
          }
          return rel_err(fd, model.grad_q_K(pr.eps, pr.t, pr.q, pr.z));
        },
        true));
    report.clauses.push_back(fd_clause(
        "fd_dK_dt",
        [&](const Probe& pr) {
          Vec fd(1), an(1);
          fd(0) = (model.K(pr.eps, pr.t + h, pr.q, pr.z) - model.K(pr.eps, pr.t - h, pr.q, pr.z)) / (2 * h);
          an(0) = model.dK_dt(pr.eps, pr.t, pr.q, pr.z);
          return rel_err(fd, an);
        },
        true));
    report.clauses.push_back(fd_clause(
        "fd_grad_q_V",
        [&](const Probe& pr) {
          Vec fd(n);
          for (int i = 0; i < n; ++i) {
            Vec qp = pr.q, qm = pr.q;
            qp(i) += h;
            qm(i) -= h;
            fd(i) = (model.V(pr.t, qp) - model.V(pr.t, qm)) / (2 * h);
          }
          return rel_err(fd, model.grad_q_V(pr.t, pr.q));
        },
        false));
    report.clauses.push_back(fd_clause(
        "fd_dgamma_dq",
        [&](const Probe& pr) {
          const auto an = coeffs.dgamma_dq(pr.t, pr.q);
          if (static_cast<int>(an.size()) != n) return std::numeric_limits<double>::infinity();
          double worst = 0.0;
          for (int hh = 0; hh < n; ++hh) {
            Vec qp = pr.q, qm = pr.q;
            qp(hh) += h;
            qm(hh) -= h;
            const Mat fd = (coeffs.gamma(pr.t, qp) - coeffs.gamma(pr.t, qm)) / (2 * h);
            worst = std::max(worst, (fd - an[hh]).norm() / std::max(1.0, an[hh].norm()));
          }
          return worst;
        },
        false));
    report.clauses.push_back(fd_clause(
        "fd_dgamma_dt",
        [&](const Probe& pr) {
          const Mat fd = (coeffs.gamma(pr.t + h, pr.q) - coeffs.gamma(pr.t - h, pr.q)) / (2 * h);
          const Mat an = coeffs.dgamma_dt(pr.t, pr.q);
          return (fd - an).norm() / std::max(1.0, an.norm());
        },
        false));
  }

  // Purity: repeated evaluation is bit-identical.
  {
    ClauseResult r;
    r.name = "callables_pure";
    r.pass = true;
    for (int k = 0; k < std::min<int>(20, static_cast<int>(base.size())); ++k) {
      const Probe& pr = base[k];
      const bool same =
          model.K(pr.eps, pr.t, pr.q, pr.z) == model.K(pr.eps, pr.t, pr.q, pr.z) &&
          model.grad_z_K(pr.eps, pr.t, pr.q, pr.z) == model.grad_z_K(pr.eps, pr.t, pr.q, pr.z) &&
          model.grad_q_V(pr.t, pr.q) == model.grad_q_V(pr.t, pr.q) &&
          coeffs.gamma(pr.t, pr.q) == coeffs.gamma(pr.t, pr.q) &&
          coeffs.F(pr.t, pr.q, pr.p) == coeffs.F(pr.t, pr.q, pr.p) &&
          coeffs.sigma(pr.t, pr.q, pr.p) == coeffs.sigma(pr.t, pr.q, pr.p);
      if (!same) {
        r.pass = false;
        r.witness = coefficient_witness(pr);
        break;
      }
    }
    r.detail = r.pass ? "repeated evaluations bit-identical" : "callable returned differing values";
    report.clauses.push_back(std::move(r));
  }

  // Moment exponent must satisfy theta < eta.
  {
    ClauseResult r;
    r.name = "theta_below_eta";
    r.fitted = theta_max;
    r.pass = theta_max > 0.0 && theta_max < model.eta();
    r.detail = "theta_max " + fmt(theta_max) + " vs eta " + fmt(model.eta());
    report.clauses.push_back(std::move(r));
  }

  if (measure) {
    auto moment_clause = [&](const std::string& name, double order) {
      ClauseResult r;
      r.name = name;
      try {
        r.fitted = measure_moment(*measure, order);
        r.pass = std::isfinite(r.fitted);
        r.detail = "moment of order " + fmt(order) + " = " + fmt(r.fitted);
      } catch (const DivergentMoment& e) {
        r.pass = false;
        r.fitted = std::numeric_limits<double>::infinity();
        r.detail = e.what();
      }
      return r;
    };
    report.clauses.push_back(moment_clause("measure_second_moment_finite", 2.0));
    report.clauses.push_back(moment_clause("measure_theta_moment_finite", std::max(2.0, theta_max)));
  }

  return report;
}

HamiltonianModel smoluchowski_kramers_model(int n, ScalarFieldFn V, VectorFieldFn grad_q_V) {
  HamiltonianParts parts;
  parts.n = n;
  parts.eta = 2.0;
  parts.K = [](double, double, const Vec&, const Vec& z) { return 0.5 * z.squaredNorm(); };
  parts.dK_dt = [](double, double, const Vec&, const Vec&) { return 0.0; };
  parts.grad_q_K = [n](double, double, const Vec&, const Vec&) { return Vec(Vec::Zero(n)); };
  parts.grad_z_K = [](double, double, const Vec&, const Vec& z) { return z; };
  parts.V = std::move(V);
  parts.grad_q_V = std::move(grad_q_V);
  parts.grad_q_K_limit = [n](double, const Vec&) { return Vec(Vec::Zero(n)); };
  return HamiltonianModel(std::move(parts));
}

PresetModel smoluchowski_kramers_preset(int n, ScalarFieldFn V, VectorFieldFn grad_q_V,
                                        CoefficientSet coeffs) {
  if (coeffs.n() != n) throw std::invalid_argument("coefficient dimension differs from model n");
  return PresetModel{smoluchowski_kramers_model(n, std::move(V), std::move(grad_q_V)),
                     std::move(coeffs)};
}

}  // namespace levyhom
