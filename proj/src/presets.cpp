#include "levyhom/presets.hpp"

#include <cmath>
#include <stdexcept>

namespace levyhom {

const std::vector<PresetInfo>& preset_registry() {
  static const std::vector<PresetInfo> registry{
      {"smoluchowski_kramers",
       "K = |z|^2/2, constant gamma = gamma_base*I, V = potential_amp*sum(1 - cos q_i), "
       "F = force_amp*cos(t), sigma = sigma*I"},
      {"sk_state_dependent_gamma",
       "K = |z|^2/2, gamma_ii = gamma_base + gamma_amp*sin(q_i), "
       "gamma_ij = gamma_coupling*sin(q_i + q_j), otherwise as smoluchowski_kramers"},
      {"anharmonic",
       "K = |z|^2/2, V = potential_amp*sum(q_i^4)/4, constant gamma = gamma_base*I"},
  };
  return registry;
}

namespace {

CoefficientSet make_coefficients(int n, double gamma_base, double gamma_amp, double coupling,
                                 double sigma_scale, double force_amp) {
  const double lambda_min = gamma_base - std::abs(gamma_amp) - (n - 1) * std::abs(coupling);
  if (!(lambda_min > 0.0))
    throw std::invalid_argument("preset gamma parameters violate the eigenvalue floor "
                                "(gamma_base - |gamma_amp| - (n-1)|gamma_coupling| must be > 0)");
  const bool state_dependent = gamma_amp != 0.0 || coupling != 0.0;

  CoefficientParts c;
  c.n = n;
  c.d = n;
  c.lambda_min = lambda_min;
  if (state_dependent) {
    c.gamma = [=](double, const Vec& q) {
      Mat g(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          g(i, j) = i == j ? gamma_base + gamma_amp * std::sin(q(i)) : coupling * std::sin(q(i) + q(j));
      return g;
    };
    c.dgamma_dq = [=](double, const Vec& q) {
      std::vector<Mat> d(n, Mat::Zero(n, n));
      for (int h = 0; h < n; ++h) {
        d[h](h, h) = gamma_amp * std::cos(q(h));
        for (int j = 0; j < n; ++j) {
          if (j == h) continue;
          const double v = coupling * std::cos(q(h) + q(j));
          d[h](h, j) = v;
          d[h](j, h) = v;
        }
      }
      return d;
    };
  } else {
    c.gamma = [=](double, const Vec&) { return Mat(gamma_base * Mat::Identity(n, n)); };
    c.dgamma_dq = [=](double, const Vec&) { return std::vector<Mat>(n, Mat::Zero(n, n)); };
  }
  c.dgamma_dt = [=](double, const Vec&) { return Mat(Mat::Zero(n, n)); };
  c.F = [=](double t, const Vec&, const Vec&) {
    return Vec(Vec::Constant(n, force_amp * std::cos(t)));
  };
  c.sigma = [=](double, const Vec&, const Vec&) {
    return Mat(sigma_scale * Mat::Identity(n, n));
  };
  c.sigma_constant = true;
  return CoefficientSet(std::move(c));
}

}  // namespace

PresetModel make_preset(const std::string& name, const PresetParams& params) {
  const int n = params.n.value_or(1);
  if (n < 1 || n > kMaxDim) throw std::invalid_argument("preset n out of range");
  const double sigma = params.sigma.value_or(1.0);
  const double force_amp = params.force_amp.value_or(0.0);

  if (name == "smoluchowski_kramers" || name == "sk_state_dependent_gamma") {
    const bool dependent = name == "sk_state_dependent_gamma";
    const double gamma_base = params.gamma_base.value_or(2.0);
    const double gamma_amp = params.gamma_amp.value_or(dependent ? 1.0 : 0.0);
    const double coupling = params.gamma_coupling.value_or(dependent && n > 1 ? 0.25 / (n - 1) : 0.0);
    if (!dependent && (gamma_amp != 0.0 || coupling != 0.0))
      throw std::invalid_argument("smoluchowski_kramers has constant gamma; use sk_state_dependent_gamma");
    const double a = params.potential_amp.value_or(0.0);
    auto V = [a](double, const Vec& q) { return a * (1.0 - q.array().cos()).sum(); };
    auto grad_V = [a](double, const Vec& q) { return Vec(a * q.array().sin().matrix()); };
    return smoluchowski_kramers_preset(
        n, V, grad_V, make_coefficients(n, gamma_base, gamma_amp, coupling, sigma, force_amp));
  }
  if (name == "anharmonic") {
    if (params.gamma_amp.value_or(0.0) != 0.0 || params.gamma_coupling.value_or(0.0) != 0.0)
      throw std::invalid_argument("anharmonic preset has constant gamma");
    const double gamma_base = params.gamma_base.value_or(2.0);
    const double a = params.potential_amp.value_or(1.0);
    auto V = [a](double, const Vec& q) { return 0.25 * a * q.array().pow(4).sum(); };
    auto grad_V = [a](double, const Vec& q) { return Vec(a * q.array().cube().matrix()); };
    return smoluchowski_kramers_preset(
        n, V, grad_V, make_coefficients(n, gamma_base, 0.0, 0.0, sigma, force_amp));
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace levyhom
