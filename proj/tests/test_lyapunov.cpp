#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "levyhom/lyapunov.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>

using namespace levyhom;
using Eigen::MatrixXd;

namespace {

MatrixXd random_spd(int n, std::mt19937_64& rng, double floor = 0.5) {
  std::normal_distribution<double> nd;
  MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
  return A * A.transpose() / n + floor * MatrixXd::Identity(n, n);
}

MatrixXd random_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
  return A;
}

double min_eig(const MatrixXd& g) { return Eigen::SelfAdjointEigenSolver<MatrixXd>(g).eigenvalues().minCoeff(); }

}  // namespace

TEST_CASE("identity friction halves C") {
  std::mt19937_64 rng(1);
  const MatrixXd C = random_matrix(4, rng);
  CHECK((solve_lyapunov(MatrixXd::Identity(4, 4), C) - C / 2).norm() < 1e-15);
}

TEST_CASE("diagonal closed form") {
  MatrixXd g(2, 2);
  g << 1, 0, 0, 2;
  MatrixXd expect(2, 2);
  expect << 0.5, 1.0 / 3.0, 1.0 / 3.0, 0.25;
  CHECK((solve_lyapunov(g, MatrixXd::Ones(2, 2)) - expect).norm() < 1e-15);
  CHECK((solve_lyapunov_kronecker(g, MatrixXd::Ones(2, 2)) - expect).norm() < 1e-15);
}

TEST_CASE("eigen route matches quadrature for n = 5") {
  std::mt19937_64 rng(7);
  const MatrixXd g = random_spd(5, rng);
  const MatrixXd C = random_matrix(5, rng);
  const MatrixXd V = solve_lyapunov(g, C);
  const MatrixXd Vq = oracle::lyapunov_by_quadrature(g, C, min_eig(g));
  CHECK((V - Vq).cwiseAbs().maxCoeff() <= 1e-7 * std::max(1.0, Vq.cwiseAbs().maxCoeff()));
}

TEST_CASE("scalar and identity G") {
  const GTensor G1 = g_tensor(MatrixXd::Constant(1, 1, 3.0));
  CHECK(G1(0, 0, 0, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  const GTensor G2 = g_tensor(MatrixXd::Identity(2, 2));
  for (int j = 0; j < 2; ++j)
    for (int h = 0; h < 2; ++h)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          CHECK(G2(j, h, a, b) == doctest::Approx((j == a && h == b) ? 0.5 : 0.0).epsilon(1e-15).scale(1.0));
  const GTensor G3 = g_tensor(4.0 * MatrixXd::Identity(3, 3));
  CHECK(G3(1, 2, 1, 2) == doctest::Approx(1.0 / 8.0).epsilon(1e-15));
  CHECK(std::abs(G3(1, 2, 2, 1)) < 1e-16);
}

TEST_CASE("G entries match quadrature for n = 4") {
  std::mt19937_64 rng(13);
  const MatrixXd g = random_spd(4, rng);
  const GTensor G = g_tensor(g);
  const MatrixXd M = oracle::g_by_quadrature(g, min_eig(g));
  const double scale = M.cwiseAbs().maxCoeff();
  for (int j = 0; j < 4; ++j)
    for (int h = 0; h < 4; ++h)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          const double ref = M(j * 4 + a, h * 4 + b);
          // entries near zero are compared against the tensor's scale
          CHECK(std::abs(G(j, h, a, b) - ref) <= 1e-6 * std::max(std::abs(ref), 1e-3 * scale));
        }
}

TEST_CASE("G symmetry and contraction identity") {
  std::mt19937_64 rng(17);
  for (int n = 1; n <= 6; ++n) {
    const MatrixXd g = random_spd(n, rng);
    const GTensor G = g_tensor(g);
    for (int j = 0; j < n; ++j)
      for (int h = 0; h < n; ++h)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) CHECK(std::abs(G(j, h, a, b) - G(h, j, b, a)) < 1e-14);
    const MatrixXd C = random_matrix(n, rng);
    CHECK((G.contract(C) - solve_lyapunov(g, C)).norm() <= 1e-10 * std::max(1.0, C.norm()));
  }
}

TEST_CASE("residual, definiteness, scale covariance, Kronecker agreement") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> dim(1, 6);
  for (int k = 0; k < 200; ++k) {
    const int n = dim(rng);
    const MatrixXd g = random_spd(n, rng, 0.05);
    const MatrixXd C = random_matrix(n, rng);
    const MatrixXd V = solve_lyapunov(g, C);
    CHECK((g * V + V * g - C).norm() <= 1e-10 * std::max(1.0, C.norm()));
    CHECK((V - solve_lyapunov_kronecker(g, C)).norm() <= 1e-9 * std::max(1.0, V.norm()));
    const MatrixXd S = C * C.transpose() + MatrixXd::Identity(n, n);
    CHECK(min_eig(solve_lyapunov(g, S)) > -1e-12);
    const double c = 3.7;
    CHECK((solve_lyapunov(c * g, C) - V / c).norm() <= 1e-12 * std::max(1.0, V.norm()));
  }
}

TEST_CASE("input checks") {
  MatrixXd asym(2, 2);
  asym << 1, 0.5, 0.0, 1;
  CHECK_THROWS_AS(solve_lyapunov(asym, MatrixXd::Ones(2, 2)), std::invalid_argument);
  MatrixXd indef(2, 2);
  indef << 1, 0, 0, -1;
  CHECK_THROWS_AS(solve_lyapunov(indef, MatrixXd::Ones(2, 2)), std::invalid_argument);
  CHECK_THROWS_AS(g_tensor(indef), std::invalid_argument);
  MatrixXd zero = MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(solve_lyapunov(zero, MatrixXd::Ones(2, 2)), std::invalid_argument);
}

TEST_CASE("matrix exponential examples") {
  CHECK((matrix_exponential(MatrixXd::Zero(3, 3)) - MatrixXd::Identity(3, 3)).norm() == 0.0);
  MatrixXd d(2, 2);
  d << 1, 0, 0, -1;
  const MatrixXd E = matrix_exponential(d);
  CHECK(E(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
  CHECK(E(1, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(std::abs(E(0, 1)) < 1e-16);

  // nilpotent: exp(N) = I + N
  MatrixXd N = MatrixXd::Zero(3, 3);
  N(0, 1) = 2.0;
  N(1, 2) = -1.0;
  const MatrixXd EN = matrix_exponential(N);
  MatrixXd expect = MatrixXd::Identity(3, 3) + N + N * N / 2.0;
  CHECK((EN - expect).norm() < 1e-14);

  // rotation generator
  MatrixXd R(2, 2);
  R << 0, -2.5, 2.5, 0;
  const MatrixXd ER = matrix_exponential(R);
  CHECK(ER(0, 0) == doctest::Approx(std::cos(2.5)).epsilon(1e-13));
  CHECK(ER(1, 0) == doctest::Approx(std::sin(2.5)).epsilon(1e-13));
}

TEST_CASE("exp(A) exp(-A) = I and agreement with the spectral formula") {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 50; ++k) {
    const int n = 1 + k % 6;
    MatrixXd A = random_matrix(n, rng);
    A = (A + A.transpose()).eval();
    // the product identity loses about eps * |e^A| |e^-A|, so keep |A| moderate
    const MatrixXd B = A * (3.0 / std::max(1.0, A.norm()));
    const MatrixXd P = matrix_exponential(B) * matrix_exponential(-B);
    CHECK((P - MatrixXd::Identity(n, n)).norm() < 1e-10);
    A *= 10.0 / std::max(1.0, A.norm());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
    const MatrixXd spectral =
        es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() * es.eigenvectors().transpose();
    CHECK((matrix_exponential(A) - spectral).norm() <= 1e-12 * spectral.norm() * 10);
  }
}
