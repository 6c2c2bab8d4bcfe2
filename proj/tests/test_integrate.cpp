#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "levyhom/integrate.hpp"
#include "levyhom/presets.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>

using namespace levyhom;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

JumpRealization manual(double t0, double t1, std::vector<JumpEvent> events) {
  JumpRealization j;
  j.t0 = t0;
  j.t1 = t1;
  j.events = std::move(events);
  return j;
}

LevyMeasureSpec pm_one(double intensity) {
  return compound_poisson(intensity, AtomMarks{{v1(-1.0), v1(1.0)}, {0.5, 0.5}});
}

double sup_norm(const std::vector<Vec>& s) {
  double m = 0.0;
  for (const auto& v : s) m = std::max(m, v.norm());
  return m;
}

}  // namespace

TEST_CASE("time grid invariants") {
  const auto spec = compound_poisson(40.0, UniformMarks{-1.0, 1.0});
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto jumps = sample_jumps(spec, 0.0, 1.3, seed);
    const auto g = TimeGrid::build(0.0, 1.3, 0.01, jumps);
    CHECK(g.nodes.front() == 0.0);
    CHECK(g.nodes.back() == 1.3);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g.nodes[i] > g.nodes[i - 1]);
    REQUIRE(g.jump_nodes.size() == jumps.events.size());
    for (std::size_t k = 0; k < g.jump_nodes.size(); ++k) {
      CHECK(g.jump_events[k] == k);
      CHECK(std::abs(g.nodes[g.jump_nodes[k]] - jumps.events[k].time) <= kNodeMergeTolerance);
    }
  }
}

TEST_CASE("jumps within the merge tolerance replace the uniform node") {
  const auto j = manual(0.0, 1.0, {{0.5 + 1e-13, v1(1.0)}, {1.0, v1(-1.0)}});
  const auto g = TimeGrid::build(0.0, 1.0, 0.25, j);
  CHECK(g.nodes.size() == 5);
  REQUIRE(g.jump_nodes.size() == 2);
  CHECK(g.jump_nodes[0] == 2);
  CHECK(g.nodes[2] == 0.5 + 1e-13);
  CHECK(g.jump_nodes[1] == 4);
  CHECK(g.nodes[4] == 1.0);
  CHECK_THROWS_AS(TimeGrid::build(1.0, 1.0, 0.1, j), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid::build(0.0, 1.0, 0.0, j), std::invalid_argument);
}

TEST_CASE("default step rule") {
  CHECK(default_base_step(0.1, 2.0) == doctest::Approx(0.1 * 0.1 / 2.0));
  CHECK(default_base_step(0.25, 2.0) == 1e-2);
  CHECK(default_base_step(0.5, 0.5) == 1e-2);
  CHECK(default_base_step(0.05, 0.5) == doctest::Approx(0.0025));
}

TEST_CASE("free momentum decay converges at first order") {
  const double g = 2.0, eps = 0.1, p0 = 1.3, T = 0.5;
  const auto pm = make_preset("smoluchowski_kramers", PresetParams{.n = 1, .gamma_base = g, .sigma = 0.0});
  const auto none = manual(0.0, T, {});
  auto err = [&](double dt) {
    const auto grid = TimeGrid::build(0.0, T, dt, none);
    const auto path = integrate_full(pm.model, pm.coeffs, eps, FullState{0.0, v1(0.0), v1(p0)}, grid, none, v1(0.0));
    return std::abs(path.states.back().p(0) - p0 * std::exp(-g * T / eps));
  };
  const double e1 = err(1e-3), e2 = err(5e-4), e3 = err(2.5e-4);
  CHECK(e1 / e2 >= 1.5);
  CHECK(e1 / e2 <= 3.0);
  CHECK(e2 / e3 >= 1.5);
  CHECK(e2 / e3 <= 3.0);
  CHECK(e3 < 1e-3);
}

TEST_CASE("rest state stays at rest") {
  const auto pm = make_preset("sk_state_dependent_gamma", PresetParams{.n = 2});
  const auto none = manual(0.0, 1.0, {});
  const auto grid = TimeGrid::build(0.0, 1.0, 1e-3, none);
  FullState init{0.0, Vec::Constant(2, 0.4), Vec::Zero(2)};
  const auto full = integrate_full(pm.model, pm.coeffs, 0.01, init, grid, none, Vec::Zero(2));
  for (const auto& s : full.states) {
    CHECK(s.q == init.q);
    CHECK(s.p.norm() == 0.0);
  }
  const auto red = integrate_limiting(pm.model, pm.coeffs, init.q, grid, none, Vec::Zero(2));
  for (const auto& q : red.q_states) CHECK(q == init.q);
}

TEST_CASE("a single jump gives one momentum discontinuity of size sigma z") {
  const auto pm = make_preset("sk_state_dependent_gamma", PresetParams{.n = 1, .sigma = 0.7});
  const auto j = manual(0.0, 1.0, {{0.4321, v1(1.5)}});
  const auto grid = TimeGrid::build(0.0, 1.0, 1e-3, j);
  const double eps = 0.05;
  const auto path = integrate_full(pm.model, pm.coeffs, eps, FullState{0.0, v1(0.0), v1(0.0)}, grid, j, v1(0.0));
  std::size_t jumps = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double dp = path.states[i].p(0) - path.states[i - 1].p(0);
    if (std::abs(dp) > 0.5) {
      ++jumps;
      CHECK(i == grid.jump_nodes[0]);
      CHECK(path.states[i].p(0) - path.left_limits[0].p(0) == doctest::Approx(0.7 * 1.5).epsilon(1e-14));
    }
  }
  CHECK(jumps == 1);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(path.kinetic_series[i] == kinetic_energy(pm.model, eps, path.states[i]));
}

TEST_CASE("input checks") {
  const auto pm = make_preset("smoluchowski_kramers");
  const auto j = manual(0.0, 1.0, {});
  const auto grid = TimeGrid::build(0.0, 1.0, 0.1, j);
  const FullState init{0.0, v1(0.0), v1(0.0)};
  CHECK_THROWS_AS(integrate_full(pm.model, pm.coeffs, 0.0, init, grid, j, v1(0.0)), std::invalid_argument);
  CHECK_THROWS_AS(integrate_full(pm.model, pm.coeffs, 0.1, init, TimeGrid{}, j, v1(0.0)), std::invalid_argument);
  const auto short_j = manual(0.0, 0.5, {});
  CHECK_THROWS_AS(integrate_full(pm.model, pm.coeffs, 0.1, init, grid, short_j, v1(0.0)), std::invalid_argument);
  CHECK_THROWS_AS(integrate_limiting(pm.model, pm.coeffs, Vec::Zero(2), grid, j, v1(0.0)), std::invalid_argument);
}

TEST_CASE("blow-up is flagged, not thrown") {
  const auto pm = make_preset("smoluchowski_kramers");
  const auto j = manual(0.0, 1.0, {{0.3, v1(1e13)}});
  const auto grid = TimeGrid::build(0.0, 1.0, 0.01, j);
  const auto path = integrate_full(pm.model, pm.coeffs, 0.1, FullState{0.0, v1(0.0), v1(0.0)}, grid, j, v1(0.0));
  CHECK(path.blowup_flag);
  REQUIRE(path.blowup_node.has_value());
  CHECK(*path.blowup_node == grid.jump_nodes[0]);
  CHECK(path.states.size() == grid.size());
  CHECK_THROWS_AS(remainder_path(path, pm.model, pm.coeffs), std::invalid_argument);
}

TEST_CASE("noise-induced increment") {
  const auto flat = make_preset("smoluchowski_kramers", PresetParams{.n = 3});
  const auto curved = make_preset("sk_state_dependent_gamma", PresetParams{.n = 3});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 200; ++k) {
    Vec q(3), m(3);
    for (int i = 0; i < 3; ++i) {
      q(i) = nd(rng);
      m(i) = nd(rng);
    }
    const Vec z = noise_drift_increment(0.0, q, m, flat.model, flat.coeffs);
    CHECK(z.norm() == 0.0);
    CHECK(noise_drift_increment(0.0, q, Vec::Zero(3), curved.model, curved.coeffs).norm() == 0.0);
    // quadratic in the mark
    const Vec a = noise_drift_increment(0.0, q, m, curved.model, curved.coeffs);
    const Vec b = noise_drift_increment(0.0, q, Vec(-2.0 * m), curved.model, curved.coeffs);
    CHECK((b - 4.0 * a).norm() <= 1e-12 * std::max(1.0, b.norm()));
  }
}

TEST_CASE("scalar noise-induced increment closed form") {
  const double s0 = 0.8;
  const auto pm = make_preset("sk_state_dependent_gamma", PresetParams{.n = 1, .sigma = s0});
  for (double q : {-2.0, -0.3, 0.0, 0.9, 2.5}) {
    for (double m : {-1.7, 0.4, 2.0}) {
      const double g = 2.0 + std::sin(q), dg = std::cos(q);
      const double expect = -dg * s0 * s0 * m * m / (2.0 * g * g * g);
      const Vec dS = noise_drift_increment(0.0, v1(q), v1(m), pm.model, pm.coeffs);
      CHECK(dS(0) == doctest::Approx(expect).epsilon(1e-13).scale(1e-300));
      CHECK(std::abs(noise_drift_increment_at(0.0, v1(q), v1(0.0), v1(m), pm.coeffs, -1.0)(0) + expect) < 1e-14);
    }
  }
}

TEST_CASE("constant friction: limiting path matches the reduced equation oracle") {
  const auto pm = make_preset("smoluchowski_kramers",
                              PresetParams{.n = 2, .gamma_base = 1.5, .sigma = 0.6, .potential_amp = 0.8, .force_amp = 0.3});
  const auto spec = compound_poisson(3.0, AtomMarks{{Vec::Constant(2, 0.5), Vec::Constant(2, -1.2)}, {0.6, 0.4}}, 2);
  const Vec bc = compensator_drift(spec);
  oracle::ConstantFrictionProblem pb;
  pb.gamma = {{1.5, 0.0}, {0.0, 1.5}};
  pb.sigma = {{0.6, 0.0}, {0.0, 0.6}};
  pb.compensator = {bc(0), bc(1)};
  pb.grad_V = [](double, const std::vector<double>& q) {
    return std::vector<double>{0.8 * std::sin(q[0]), 0.8 * std::sin(q[1])};
  };
  pb.F = [](double t, const std::vector<double>&) { return std::vector<double>{0.3 * std::cos(t), 0.3 * std::cos(t)}; };
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto j = sample_jumps(spec, 0.0, 1.0, seed);
    const auto grid = TimeGrid::build(0.0, 1.0, 1e-3, j);
    Vec q0(2);
    q0 << 0.3, -0.2;
    const auto red = integrate_limiting(pm.model, pm.coeffs, q0, grid, j, bc);
    std::vector<std::pair<std::size_t, std::vector<double>>> marks;
    for (std::size_t k = 0; k < grid.jump_nodes.size(); ++k) {
      const Vec& m = j.events[grid.jump_events[k]].mark;
      marks.push_back({grid.jump_nodes[k], {m(0), m(1)}});
    }
    const auto ref = oracle::reduced_constant_friction(pb, {0.3, -0.2}, grid.nodes, marks);
    REQUIRE(ref.size() == red.q_states.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(std::abs(red.q_states[i](0) - ref[i][0]) < 1e-12);
      CHECK(std::abs(red.q_states[i](1) - ref[i][1]) < 1e-12);
      CHECK(red.drift_S_series[i].norm() == 0.0);
    }
  }
}

TEST_CASE("scalar state-dependent friction matches the one-off integrator") {
  const auto pm = make_preset("sk_state_dependent_gamma", PresetParams{.n = 1});
  const auto spec = compound_poisson(2.0, AtomMarks{{v1(-1.0), v1(0.6)}, {0.5, 0.5}});
  const Vec bc = compensator_drift(spec);
  REQUIRE(bc(0) == doctest::Approx(0.6));
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto j = sample_jumps(spec, 0.0, 1.0, seed);
    const auto grid = TimeGrid::build(0.0, 1.0, 1e-3, j);
    const auto red = integrate_limiting(pm.model, pm.coeffs, v1(0.25), grid, j, bc);
    std::vector<std::pair<std::size_t, double>> marks;
    for (std::size_t k = 0; k < grid.jump_nodes.size(); ++k)
      marks.push_back({grid.jump_nodes[k], j.events[grid.jump_events[k]].mark(0)});
    const auto ref = oracle::scalar_limit(2.0, 1.0, 1.0, bc(0), 0.25, grid.nodes, marks);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(red.q_states[i](0) - ref[i]) < 1e-10);
    // S only moves at jump nodes, once per jump
    std::size_t moves = 0;
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (red.drift_S_series[i] != red.drift_S_series[i - 1]) {
        ++moves;
        CHECK(std::find(grid.jump_nodes.begin(), grid.jump_nodes.end(), i) != grid.jump_nodes.end());
      }
    CHECK(moves == grid.jump_nodes.size());
  }
}

TEST_CASE("without noise both integrators are deterministic ODE solvers") {
  const auto pm = make_preset("sk_state_dependent_gamma",
                              PresetParams{.n = 2, .sigma = 0.0, .potential_amp = 1.0, .force_amp = 0.5});
  const auto spec = compound_poisson(5.0, AtomMarks{{Vec::Constant(2, 1.0)}, {1.0}}, 2);
  Vec q0(2);
  q0 << 0.5, -1.0;
  const auto ja = sample_jumps(spec, 0.0, 1.0, 1);
  const auto jb = manual(0.0, 1.0, {});
  const auto ga = TimeGrid::build(0.0, 1.0, 1e-3, ja);
  const auto gb = TimeGrid::build(0.0, 1.0, 1e-3, jb);
  const auto ra = integrate_limiting(pm.model, pm.coeffs, q0, ga, ja, compensator_drift(spec));
  const auto rb = integrate_limiting(pm.model, pm.coeffs, q0, gb, jb, Vec::Zero(2));
  // the extra jump nodes only refine the grid
  CHECK((ra.q_states.back() - rb.q_states.back()).norm() < 1e-3);
  CHECK(ra.drift_S_series.back().norm() == 0.0);
}

TEST_CASE("grid refinement is first order for the limiting equation") {
  const auto pm = make_preset("sk_state_dependent_gamma", PresetParams{.n = 2, .potential_amp = 1.0, .force_amp = 0.5});
  const auto none = manual(0.0, 1.0, {});
  Vec q0(2);
  q0 << 1.0, -0.5;
  auto endpoint = [&](double dt) {
    const auto g = TimeGrid::build(0.0, 1.0, dt, none);
    return Vec(integrate_limiting(pm.model, pm.coeffs, q0, g, none, Vec::Zero(2)).q_states.back());
  };
  const Vec ref = endpoint(1e-6);
  const double e1 = (endpoint(4e-3) - ref).norm();
  const double e2 = (endpoint(2e-3) - ref).norm();
  CHECK(e1 / e2 >= 1.5);
  CHECK(e1 / e2 <= 3.0);
}

TEST_CASE("constant coefficients: remainder equals -gamma^{-1}(p_t - p_0)") {
  const double g = 1.7;
  const auto pm = make_preset("smoluchowski_kramers",
                              PresetParams{.n = 1, .gamma_base = g, .sigma = 0.9, .force_amp = 0.4});
  const auto spec = compound_poisson(4.0, AtomMarks{{v1(0.5), v1(-1.5)}, {0.5, 0.5}});
  const Vec bc = compensator_drift(spec);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto j = sample_jumps(spec, 0.0, 1.0, seed);
    const auto grid = TimeGrid::build(0.0, 1.0, 1e-4, j);
    const auto full = integrate_full(pm.model, pm.coeffs, 0.01, FullState{0.0, v1(0.1), v1(0.3)}, grid, j, bc);
    const auto dec = remainder_path(full, pm.model, pm.coeffs);
    CHECK(dec.remainder.front().norm() == 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double closed = -(full.states[i].p(0) - 0.3) / g;
      CHECK(dec.remainder[i](0) == doctest::Approx(closed).epsilon(1e-10).scale(1.0));
      CHECK(dec.noise_induced[i].norm() == 0.0);
    }
  }
}

TEST_CASE("decomposition identity closes at every node") {
  const auto pm = make_preset("sk_state_dependent_gamma", PresetParams{.n = 2, .potential_amp = 0.5, .force_amp = 0.2});
  const auto spec = compound_poisson(3.0, ParetoMarks{0.2, 3.0, 2.5, 0.5}, 2);
  const Vec bc = compensator_drift(spec);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto j = sample_jumps(spec, 0.0, 1.0, seed);
    const auto grid = TimeGrid::build(0.0, 1.0, 1e-3, j);
    Vec q0(2), p0(2);
    q0 << 0.2, 0.1;
    p0 << -0.1, 0.4;
    const auto full = integrate_full(pm.model, pm.coeffs, 0.05, FullState{0.0, q0, p0}, grid, j, bc);
    const auto dec = remainder_path(full, pm.model, pm.coeffs);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Vec sum = q0 + dec.drift[i] + dec.noise[i] + dec.noise_induced[i] + dec.remainder[i];
      CHECK((full.states[i].q - sum).norm() <= 1e-12);
    }
  }
}

TEST_CASE("remainder shrinks along a 2x epsilon ladder and the + sign beats -") {
  const auto pm = make_preset("sk_state_dependent_gamma", PresetParams{.n = 1});
  const auto spec = pm_one(2.0);
  const Vec bc = compensator_drift(spec);
  const int N = 300;
  double mean_small = 0.0, mean_large = 0.0, mean_minus = 0.0;
  for (int k = 0; k < N; ++k) {
    const auto j = sample_jumps(spec, 0.0, 1.0, path_seed(42, k));
    for (double eps : {0.25, 0.125}) {
      const auto grid = TimeGrid::build(0.0, 1.0, default_base_step(eps, 2.0), j);
      const auto full = integrate_full(pm.model, pm.coeffs, eps, FullState{0.0, v1(0.0), v1(0.0)}, grid, j, bc);
      const double r = sup_norm(remainder_path(full, pm.model, pm.coeffs).remainder);
      (eps == 0.25 ? mean_large : mean_small) += r / N;
      if (eps == 0.125) mean_minus += sup_norm(remainder_path(full, pm.model, pm.coeffs, -1.0).remainder) / N;
    }
  }
  CHECK(mean_small < mean_large);
  CHECK(mean_small < mean_minus);
}

TEST_CASE("multi-dimensional increment against quadrature G") {
  const auto pm = make_preset("sk_state_dependent_gamma", PresetParams{.n = 3, .sigma = 0.9});
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 5; ++k) {
    Vec q(3), m(3);
    for (int i = 0; i < 3; ++i) {
      q(i) = nd(rng);
      m(i) = nd(rng);
    }
    const Eigen::MatrixXd g = pm.coeffs.gamma(0.0, q);
    const Eigen::MatrixXd gi = g.inverse();
    const auto dg = pm.coeffs.dgamma_dq(0.0, q);
    const Eigen::MatrixXd M = oracle::g_by_quadrature(g, pm.coeffs.lambda_min());
    const Eigen::VectorXd w = 0.9 * Eigen::VectorXd(m);
    Eigen::VectorXd expect = Eigen::VectorXd::Zero(3);
    for (int h = 0; h < 3; ++h) {
      const Eigen::MatrixXd dinv = -gi * Eigen::MatrixXd(dg[h]) * gi;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) expect(i) += dinv(i, j) * M(j * 3 + a, h * 3 + b) * w(a) * w(b);
    }
    const Vec got = noise_drift_increment(0.0, q, m, pm.model, pm.coeffs);
    CHECK((Eigen::VectorXd(got) - expect).norm() <= 1e-8 * std::max(1e-3, expect.norm()));
  }
}
