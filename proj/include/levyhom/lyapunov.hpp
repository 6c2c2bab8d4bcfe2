#pragma once

#include <Eigen/Dense>

#include <vector>

namespace levyhom {

/// Solves gamma V + V gamma = C for symmetric positive-definite gamma,
/// i.e. V = int_0^inf exp(-y gamma) C exp(-y gamma) dy. Works in the
/// eigenbasis of gamma, where V~_{ab} = C~_{ab} / (lambda_a + lambda_b).
/// Throws std::invalid_argument if gamma is not symmetric (tolerance
/// 1e-10 relative to max(1, max|gamma|)) or has an eigenvalue <= 0.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& C);

/// Same equation through the n^2 x n^2 Kronecker system
/// (I (x) gamma + gamma (x) I) vec(V) = vec(C). Kept as a cross-check.
Eigen::MatrixXd solve_lyapunov_kronecker(const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& C);

/// G_{jh}^{ab} = int_0^inf (e^{-y gamma})_{ja} (e^{-y gamma})_{hb} dy.
class GTensor {
public:
  GTensor(int n, std::vector<double> values, Eigen::MatrixXd source_gamma);

  int n() const { return n_; }
  double operator()(int j, int h, int a, int b) const {
    return values_[((static_cast<std::size_t>(j) * n_ + h) * n_ + a) * n_ + b];
  }
  const Eigen::MatrixXd& source_gamma() const { return source_gamma_; }

  /// sum_{a,b} G_{jh}^{ab} C_{ab}, which equals solve_lyapunov(gamma, C).
  Eigen::MatrixXd contract(const Eigen::MatrixXd& C) const;

private:
  int n_;
  std::vector<double> values_;
  Eigen::MatrixXd source_gamma_;
};

/// G from the orthonormal eigenpairs (lambda_k, u_k) of gamma:
/// G_{jh}^{ab} = sum_{k,l} u_k[j] u_k[a] u_l[h] u_l[b] / (lambda_k + lambda_l).
GTensor g_tensor(const Eigen::MatrixXd& gamma);

/// exp(A) by scaling and squaring with the degree-13 Pade approximant.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& A);

}  // namespace levyhom
