#include "levyhom/lyapunov.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>
#include <string>

namespace levyhom {

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> checked_eigen(const Eigen::MatrixXd& gamma) {
  if (gamma.rows() != gamma.cols() || gamma.rows() == 0)
    throw std::invalid_argument("gamma must be a nonempty square matrix");
  if (!gamma.allFinite()) throw std::invalid_argument("gamma has non-finite entries");
  const double scale = std::max(1.0, gamma.cwiseAbs().maxCoeff());
  const double asym = (gamma - gamma.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale)
    throw std::invalid_argument("gamma is not symmetric (asymmetry " + std::to_string(asym) + ")");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gamma + gamma.transpose()));
  if (es.info() != Eigen::Success) throw std::invalid_argument("eigendecomposition of gamma failed");
  if (!(es.eigenvalues().minCoeff() > 0.0))
    throw std::invalid_argument("gamma must be positive definite");
  return es;
}

}  // namespace

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& C) {
  const auto es = checked_eigen(gamma);
  if (C.rows() != gamma.rows() || C.cols() != gamma.cols())
    throw std::invalid_argument("C must match the shape of gamma");
  const Eigen::MatrixXd& U = es.eigenvectors();
  const Eigen::VectorXd& lam = es.eigenvalues();
  Eigen::MatrixXd Ct = U.transpose() * C * U;
  for (Eigen::Index a = 0; a < Ct.rows(); ++a)
    for (Eigen::Index b = 0; b < Ct.cols(); ++b) Ct(a, b) /= lam(a) + lam(b);
  return U * Ct * U.transpose();
}

Eigen::MatrixXd solve_lyapunov_kronecker(const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& C) {
  checked_eigen(gamma);
  const Eigen::Index n = gamma.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n * n, n * n);
  // Column-major vec: vec(gamma V) = (I (x) gamma) vec V, vec(V gamma) = (gamma^T (x) I) vec V.
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      A.block(i * n, j * n, n, n) += I(i, j) * gamma;
      A.block(i * n, j * n, n, n) += gamma(j, i) * I;
    }
  const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(C.data(), n * n);
  const Eigen::VectorXd v = A.partialPivLu().solve(c);
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), n, n);
}

GTensor::GTensor(int n, std::vector<double> values, Eigen::MatrixXd source_gamma)
    : n_(n), values_(std::move(values)), source_gamma_(std::move(source_gamma)) {}

Eigen::MatrixXd GTensor::contract(const Eigen::MatrixXd& C) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_, n_);
  for (int j = 0; j < n_; ++j)
    for (int h = 0; h < n_; ++h) {
      double acc = 0.0;
      for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b) acc += (*this)(j, h, a, b) * C(a, b);
      out(j, h) = acc;
    }
  return out;
}

GTensor g_tensor(const Eigen::MatrixXd& gamma) {
  const auto es = checked_eigen(gamma);
  const int n = static_cast<int>(gamma.rows());
  const Eigen::MatrixXd& U = es.eigenvectors();
  const Eigen::VectorXd& lam = es.eigenvalues();

  // P_k = u_k u_k^T; G_{jh}^{ab} = sum_{k,l} P_k(j,a) P_l(h,b) / (lam_k + lam_l).
  std::vector<Eigen::MatrixXd> P(n);
  for (int k = 0; k < n; ++k) P[k] = U.col(k) * U.col(k).transpose();

  std::vector<double> values(static_cast<std::size_t>(n) * n * n * n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      const double w = 1.0 / (lam(k) + lam(l));
      for (int j = 0; j < n; ++j)
        for (int h = 0; h < n; ++h)
          for (int a = 0; a < n; ++a) {
            const double pja = P[k](j, a) * w;
            if (pja == 0.0) continue;
            for (int b = 0; b < n; ++b)
              values[((static_cast<std::size_t>(j) * n + h) * n + a) * n + b] += pja * P[l](h, b);
          }
    }
  return GTensor(n, std::move(values), gamma);
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("matrix_exponential needs a square matrix");
  const Eigen::Index n = A.rows();
  if (n == 0 || A.isZero(0.0)) return Eigen::MatrixXd::Identity(n, n);
  return A.exp();
}

}  // namespace levyhom
