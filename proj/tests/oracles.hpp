#ifndef TSE_TESTS_ORACLES_HPP
#define TSE_TESTS_ORACLES_HPP

// Independent numerical oracles used by the test suites. Everything here is
// deliberately written against the public value-only interfaces so it stays
// decoupled from the differentiation paths it checks.

#include <cmath>
#include <functional>
#include <vector>

#include "tse/net.hpp"

namespace oracles {

/// Central finite difference of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Two-sided second difference.
inline double second_diff(const std::function<double(double)>& f, double x,
                          double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

/// Finite-difference jet of a network output (value plus input derivatives),
/// independent of the propagated-jet path.
inline tse::net::NetJet fd_jet(const tse::net::MlpParams& p, double x, double t,
                               double h1 = 1e-4, double h2 = 1e-3) {
  tse::net::NetJet j;
  j.rho_hat = tse::net::forward(p, x, t);
  j.d_dx = central_diff([&](double xx) { return tse::net::forward(p, xx, t); }, x, h1);
  j.d_dt = central_diff([&](double tt) { return tse::net::forward(p, x, tt); }, t, h1);
  j.d2_dx2 = second_diff([&](double xx) { return tse::net::forward(p, xx, t); }, x, h2);
  return j;
}

/// Fourth-order five-point stencils: truncation O(h^4) keeps the oracle's
/// own error well under the 1e-5 comparison tolerance even for steep nets.
inline double central_diff4(const std::function<double(double)>& f, double x,
                            double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

inline double second_diff4(const std::function<double(double)>& f, double x,
                           double h) {
  return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
         (12 * h * h);
}

inline tse::net::NetJet fd_jet4(const tse::net::MlpParams& p, double x, double t,
                                double h = 1e-3) {
  tse::net::NetJet j;
  j.rho_hat = tse::net::forward(p, x, t);
  j.d_dx = central_diff4([&](double xx) { return tse::net::forward(p, xx, t); }, x, h);
  j.d_dt = central_diff4([&](double tt) { return tse::net::forward(p, x, tt); }, t, h);
  j.d2_dx2 = second_diff4([&](double xx) { return tse::net::forward(p, xx, t); }, x, h);
  return j;
}

/// Finite-difference gradient of a scalar function of a parameter vector.
inline std::vector<double> fd_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> theta, double h = 1e-5) {
  std::vector<double> g(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double saved = theta[k];
    theta[k] = saved + h;
    const double fp = f(theta);
    theta[k] = saved - h;
    const double fm = f(theta);
    theta[k] = saved;
    g[k] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Max-norm relative disagreement between two vectors:
/// max|a - b| / max(1, max|b|).
inline double max_rel_error(const std::vector<double>& a,
                            const std::vector<double>& b) {
  double diff = 0, scale = 1;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff = std::max(diff, std::fabs(a[k] - b[k]));
    scale = std::max(scale, std::fabs(b[k]));
  }
  return diff / scale;
}

inline double rel_error(double a, double b) {
  return std::fabs(a - b) / std::max(1.0, std::fabs(b));
}

/// Free-space heat-kernel evolution of a Gaussian bump of mass-preserving
/// form A * exp(-(x - c)^2 / (2 s0^2)): after time t with diffusivity eps the
/// profile is A * s0/s(t) * exp(-(x - c)^2 / (2 s(t)^2)), s(t)^2 = s0^2 + 2 eps t.
inline double heat_gaussian(double x, double t, double amplitude, double center,
                            double sigma0, double eps) {
  const double var = sigma0 * sigma0 + 2.0 * eps * t;
  return amplitude * sigma0 / std::sqrt(var) *
         std::exp(-(x - center) * (x - center) / (2.0 * var));
}

}  // namespace oracles

#endif  // TSE_TESTS_ORACLES_HPP
