#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "levyhom/model.hpp"
#include "levyhom/presets.hpp"

#include <cmath>
#include <random>

using namespace levyhom;

namespace {

CoefficientParts scalar_parts() {
  CoefficientParts c;
  c.n = 1;
  c.d = 1;
  c.lambda_min = 1.0;
  c.gamma = [](double, const Vec& q) { return Mat(Mat::Constant(1, 1, 2.0 + std::sin(q(0)))); };
  c.dgamma_dq = [](double, const Vec& q) { return std::vector<Mat>{Mat::Constant(1, 1, std::cos(q(0)))}; };
  c.dgamma_dt = [](double, const Vec&) { return Mat(Mat::Zero(1, 1)); };
  c.F = [](double, const Vec&, const Vec&) { return Vec(Vec::Zero(1)); };
  c.sigma = [](double, const Vec&, const Vec&) { return Mat(Mat::Identity(1, 1)); };
  return c;
}

Vec zero_grad(double, const Vec& q) { return Vec::Zero(q.size()); }
double zero_pot(double, const Vec&) { return 0.0; }

}  // namespace

TEST_CASE("kinetic energy examples") {
  const auto pm = make_preset("smoluchowski_kramers", PresetParams{.n = 3});
  for (double eps : {1.0, 0.3, 1e-3}) {
    FullState s{0.2, Vec::Constant(3, 0.7), Vec::Zero(3)};
    CHECK(kinetic_energy(pm.model, eps, s) == 0.0);
    s.p(0) = std::sqrt(eps);
    CHECK(kinetic_energy(pm.model, eps, s) == doctest::Approx(0.5).epsilon(1e-15));
  }
  FullState s{0.0, Vec::Zero(3), Vec::Ones(3)};
  CHECK_THROWS_AS(kinetic_energy(pm.model, 0.0, s), std::invalid_argument);
  CHECK_THROWS_AS(kinetic_energy(pm.model, -1.0, s), std::invalid_argument);
}

TEST_CASE("SK kinetic energy is p^2/(2m)") {
  const auto pm = make_preset("sk_state_dependent_gamma", PresetParams{.n = 2});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5.0, 5.0), um(1e-4, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double m = um(rng);
    FullState s{u(rng), Vec::Constant(2, u(rng)), Vec(2)};
    s.p << u(rng), u(rng);
    const double direct = s.p.squaredNorm() / (2.0 * m);
    CHECK(kinetic_energy(pm.model, m, s) == doctest::Approx(direct).epsilon(1e-13));
    // scaling identity
    CHECK(kinetic_energy(pm.model, m, s) == pm.model.K(m, s.t, s.q, s.p / std::sqrt(m)));
  }
}

TEST_CASE("model construction checks") {
  HamiltonianParts h;
  h.n = 1;
  h.eta = 1.0;
  h.K = [](double, double, const Vec&, const Vec& z) { return 0.5 * z.squaredNorm(); };
  h.dK_dt = [](double, double, const Vec&, const Vec&) { return 0.0; };
  h.grad_q_K = [](double, double, const Vec& q, const Vec&) { return Vec(Vec::Zero(q.size())); };
  h.grad_z_K = [](double, double, const Vec&, const Vec& z) { return z; };
  h.V = zero_pot;
  h.grad_q_V = zero_grad;
  CHECK_THROWS_AS(HamiltonianModel{h}, std::invalid_argument);
  h.eta = 0.5;
  CHECK_THROWS_AS(HamiltonianModel{h}, std::invalid_argument);
  h.eta = 2.0;
  h.grad_z_K = nullptr;
  CHECK_THROWS_AS(HamiltonianModel{h}, std::invalid_argument);

  const auto sk = smoluchowski_kramers_model(1, zero_pot, zero_grad);
  CHECK(sk.eta() == 2.0);
  CHECK(sk.grad_q_K_limit(0.0, Vec::Ones(1)).norm() == 0.0);
  CHECK(sk.grad_q_K(0.1, 0.0, Vec::Ones(1), Vec::Ones(1)).norm() == 0.0);

  auto c = scalar_parts();
  c.lambda_min = 0.0;
  CHECK_THROWS_AS(CoefficientSet{c}, std::invalid_argument);
}

TEST_CASE("presets validate cleanly") {
  for (const std::string name : {"smoluchowski_kramers", "sk_state_dependent_gamma"}) {
    for (int n : {1, 3}) {
      CAPTURE(name);
      CAPTURE(n);
      const auto pm = make_preset(name, PresetParams{.n = n});
      const auto rep = validate_assumptions(pm.model, pm.coeffs, ProbeGrid{}, 1.0);
      for (const auto& c : rep.clauses) {
        CAPTURE(c.name);
        CAPTURE(c.detail);
        CHECK((c.pass || c.informational));
      }
      CHECK(rep.all_pass());
      CHECK(rep.detected_eta == doctest::Approx(2.0).epsilon(1e-6));
      const auto* lb = rep.find("kinetic_lower_bound_eta");
      REQUIRE(lb != nullptr);
      CHECK(lb->fitted == doctest::Approx(0.5).epsilon(1e-9));
    }
  }
}

TEST_CASE("eigenvalue crossing zero is caught with a witness") {
  auto c = scalar_parts();
  // 0.5 + sin q dips to -0.5
  c.gamma = [](double, const Vec& q) { return Mat(Mat::Constant(1, 1, 0.5 + std::sin(q(0)))); };
  c.lambda_min = 0.1;
  const CoefficientSet coeffs(c);
  const auto model = smoluchowski_kramers_model(1, zero_pot, zero_grad);
  const auto rep = validate_assumptions(model, coeffs, ProbeGrid{}, 1.0);
  const auto* floor = rep.find("gamma_eigenvalue_floor");
  REQUIRE(floor != nullptr);
  CHECK_FALSE(floor->pass);
  REQUIRE(floor->witness.has_value());
  CHECK(0.5 + std::sin(floor->witness->q(0)) < 0.1);
  CHECK_FALSE(rep.all_pass());
}

TEST_CASE("Lipschitz constant of sigma(q) = sin q") {
  auto c = scalar_parts();
  c.sigma = [](double, const Vec& q, const Vec&) { return Mat(Mat::Constant(1, 1, std::sin(q(0)))); };
  const CoefficientSet coeffs(c);
  const auto model = smoluchowski_kramers_model(1, zero_pot, zero_grad);
  ProbeGrid g;
  g.n_probes = 2000;
  const auto rep = validate_assumptions(model, coeffs, g, 1.0);
  const auto* lip = rep.find("lipschitz_sigma");
  REQUIRE(lip != nullptr);
  CHECK(lip->pass);
  CHECK(lip->fitted <= 1.0 + 1e-2);
  CHECK(lip->fitted > 0.9);
}

TEST_CASE("quartic potential gradient against central differences") {
  const auto pm = make_preset("anharmonic", PresetParams{.n = 2});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const double h = 1e-5;
  for (int k = 0; k < 200; ++k) {
    Vec q(2);
    q << u(rng), u(rng);
    const Vec g = pm.model.grad_q_V(0.0, q);
    for (int i = 0; i < 2; ++i) {
      Vec a = q, b = q;
      a(i) += h;
      b(i) -= h;
      const double fd = (pm.model.V(0.0, a) - pm.model.V(0.0, b)) / (2.0 * h);
      CHECK(g(i) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
      CHECK(g(i) == doctest::Approx(q(i) * q(i) * q(i)).epsilon(1e-14));
    }
  }
  // the quartic gradient is unbounded, which the boundedness clause reports
  const auto rep = validate_assumptions(pm.model, pm.coeffs, ProbeGrid{}, 1.0);
  CHECK_FALSE(rep.find("potential_gradient_bounded")->pass);
}

TEST_CASE("broken derivative is flagged by the finite-difference clause") {
  auto c = scalar_parts();
  c.dgamma_dq = [](double, const Vec& q) { return std::vector<Mat>{Mat::Constant(1, 1, -std::cos(q(0)))}; };
  const CoefficientSet coeffs(c);
  const auto model = smoluchowski_kramers_model(1, zero_pot, zero_grad);
  const auto rep = validate_assumptions(model, coeffs, ProbeGrid{}, 1.0);
  CHECK_FALSE(rep.find("fd_dgamma_dq")->pass);
}

TEST_CASE("gamma ignores momentum and callables are pure") {
  const auto pm = make_preset("sk_state_dependent_gamma", PresetParams{.n = 4});
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 100; ++k) {
    Vec q(4);
    for (int i = 0; i < 4; ++i) q(i) = nd(rng);
    const Mat a = pm.coeffs.gamma(0.3, q);
    const Mat b = pm.coeffs.gamma(0.3, q);
    CHECK(a == b);
    CHECK((a - a.transpose()).norm() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat>(a).eigenvalues().minCoeff() >= pm.coeffs.lambda_min() - 1e-12);
  }
}

TEST_CASE("theta and measure clauses") {
  const auto pm = make_preset("smoluchowski_kramers");
  CHECK_FALSE(validate_assumptions(pm.model, pm.coeffs, ProbeGrid{}, 2.0).find("theta_below_eta")->pass);
  CHECK(validate_assumptions(pm.model, pm.coeffs, ProbeGrid{}, 1.5).find("theta_below_eta")->pass);
  const auto heavy = compound_poisson(
      1.0, ParetoMarks{0.5, std::numeric_limits<double>::infinity(), 1.5, 0.5});
  const auto rep = validate_assumptions(pm.model, pm.coeffs, ProbeGrid{}, 1.0, &heavy);
  CHECK_FALSE(rep.find("measure_second_moment_finite")->pass);
  CHECK_FALSE(rep.all_pass());
}

TEST_CASE("preset registry") {
  const auto& reg = preset_registry();
  REQUIRE(reg.size() == 3);
  CHECK(reg[0].name == "smoluchowski_kramers");
  CHECK(reg[1].name == "sk_state_dependent_gamma");
  CHECK(reg[2].name == "anharmonic");
  CHECK_THROWS_AS(make_preset("nope"), std::invalid_argument);
  CHECK_THROWS_AS(make_preset("sk_state_dependent_gamma", PresetParams{.gamma_amp = 2.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_preset("smoluchowski_kramers", PresetParams{.gamma_amp = 0.5}),
                  std::invalid_argument);
}
