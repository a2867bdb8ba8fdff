#include "tse/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace tse {

static void require_same_grid(const DensityField& a, const DensityField& b,
                              const char* op) {
  if (!(a.grid() == b.grid()))
    throw std::invalid_argument(std::string(op) + ": grid mismatch");
}

double relative_l2(const DensityField& truth, const DensityField& estimate) {
  require_same_grid(truth, estimate, "relative_l2");
  double num = 0.0, den = 0.0;
  const auto& t = truth.values();
  const auto& e = estimate.values();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double d = t[k] - e[k];
    num += d * d;
    den += t[k] * t[k];
  }
  if (den == 0.0)
    throw std::invalid_argument("relative_l2: truth has zero Frobenius norm");
  return std::sqrt(num / den);
}

double relative_mse_diff(const DensityField& a, const DensityField& b) {
  require_same_grid(a, b, "relative_mse_diff");
  double num = 0.0, den = 0.0;
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t k = 0; k < av.size(); ++k) {
    const double d = av[k] - bv[k];
    num += d * d;
    den += av[k] * av[k];
  }
  if (den == 0.0)
    throw std::invalid_argument("relative_mse_diff: first field is identically zero");
  return num / den;  // both sums divide by the same count
}

double bilinear(const DensityField& field, double x, double t) {
  const Grid& g = field.grid();
  const double slack_x = 1e-9 * (g.x1 - g.x0);
  const double slack_t = 1e-9 * (g.t1 - g.t0);
  if (x < g.x0 - slack_x || x > g.x1 + slack_x || t < g.t0 - slack_t ||
      t > g.t1 + slack_t)
    throw std::invalid_argument("bilinear: point outside field domain");

  double fx = (x - g.x0) / g.dx();
  double ft = (t - g.t0) / g.dt();
  int i = static_cast<int>(fx);
  int n = static_cast<int>(ft);
  if (i < 0) i = 0;
  if (n < 0) n = 0;
  if (i > g.nx - 1) i = g.nx - 1;
  if (n > g.nt - 1) n = g.nt - 1;
  const double ax = fx - i;
  const double at = ft - n;

  return (1 - at) * ((1 - ax) * field(n, i) + ax * field(n, i + 1)) +
         at * ((1 - ax) * field(n + 1, i) + ax * field(n + 1, i + 1));
}

}  // namespace tse
