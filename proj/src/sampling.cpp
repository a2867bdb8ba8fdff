#include "tse/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tse/analytic.hpp"
#include "tse/rng.hpp"

namespace tse::sampling {

CollocationSet latin_hypercube(int n, const Rect& bounds, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("latin_hypercube: need n >= 1");
  Rng rng(seed);

  auto stratified = [&](double lo, double hi) {
    std::vector<int> strata(n);
    std::iota(strata.begin(), strata.end(), 0);
    rng.shuffle(strata);
    std::vector<double> v(n);
    for (int k = 0; k < n; ++k)
      v[k] = lo + (hi - lo) * ((strata[k] + rng.uniform()) / n);
    return v;
  };

  const auto xs = stratified(bounds.x0, bounds.x1);
  const auto ts = stratified(bounds.t0, bounds.t1);
  CollocationSet set;
  set.points.reserve(n);
  for (int k = 0; k < n; ++k) set.points.emplace_back(xs[k], ts[k]);
  return set;
}

namespace {

// Seeded selection of `count` indices from [0, n) without replacement,
// returned in ascending order.
std::vector<int> choose_indices(int n, int count, Rng& rng) {
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(all[i], all[j]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

std::vector<Observation> sample_ic_bc(const DensityField& field, double fraction,
                                      std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("sample_ic_bc: fraction must be in (0, 1]");
  const Grid& g = field.grid();

  // Union of the t = 0 row and both boundary columns; the two corner nodes of
  // row 0 would otherwise appear twice.
  std::vector<Observation> pool;
  pool.reserve(g.x_nodes() + 2 * g.nt);
  for (int i = 0; i <= g.nx; ++i) pool.push_back({g.x(i), g.t0, field(0, i)});
  for (int n = 1; n <= g.nt; ++n) pool.push_back({g.x0, g.t(n), field(n, 0)});
  for (int n = 1; n <= g.nt; ++n) pool.push_back({g.x1, g.t(n), field(n, g.nx)});

  const int count =
      static_cast<int>(std::llround(fraction * static_cast<double>(pool.size())));
  if (count < 1)
    throw std::invalid_argument("sample_ic_bc: fraction keeps zero observations");

  Rng rng(seed);
  std::vector<Observation> out;
  out.reserve(count);
  for (int idx : choose_indices(static_cast<int>(pool.size()), count, rng))
    out.push_back(pool[idx]);
  return out;
}

std::vector<Observation> sample_eulerian(const DensityField& field,
                                         const std::vector<double>& positions,
                                         const std::vector<DropoutInterval>& dropout,
                                         std::uint64_t /*seed*/) {
  const Grid& g = field.grid();
  std::vector<Observation> out;
  for (int s = 0; s < static_cast<int>(positions.size()); ++s) {
    const double x = positions[s];
    if (x < g.x0 - 1e-9 * (g.x1 - g.x0) || x > g.x1 + 1e-9 * (g.x1 - g.x0))
      throw std::invalid_argument("sample_eulerian: sensor position outside domain");
    int i = static_cast<int>(std::llround((x - g.x0) / g.dx()));
    i = std::clamp(i, 0, g.nx);
    for (int n = 0; n <= g.nt; ++n) {
      const double t = g.t(n);
      bool dropped = false;
      for (const auto& d : dropout)
        if (d.sensor == s && t >= d.t_lo && t <= d.t_hi) {
          dropped = true;
          break;
        }
      if (!dropped) out.push_back({g.x(i), t, field(n, i)});
    }
  }
  return out;
}

std::vector<Observation> sample_lagrangian(const DensityField& field,
                                           const FdParams& fd, int cv_count,
                                           int n_points, std::uint64_t seed,
                                           bool periodic) {
  if (cv_count < 1) throw std::invalid_argument("sample_lagrangian: need cv_count >= 1");
  if (n_points < 1) throw std::invalid_argument("sample_lagrangian: need n_points >= 1");
  const Grid& g = field.grid();
  const double span = g.x1 - g.x0;
  Rng rng(seed);

  std::vector<Observation> harvest;
  harvest.reserve(static_cast<std::size_t>(cv_count) * g.t_nodes());
  for (int v = 0; v < cv_count; ++v) {
    double x = rng.uniform(g.x0, g.x1);
    for (int n = 0; n <= g.nt; ++n) {
      const double rho = bilinear(field, x, g.t(n));
      harvest.push_back({x, g.t(n), rho});
      if (n == g.nt) break;
      const double clamped = std::clamp(rho, 0.0, fd.rho_m);
      x += analytic::velocity(clamped, fd) * g.dt();
      if (periodic) {
        while (x >= g.x1) x -= span;
        while (x < g.x0) x += span;
      } else if (x > g.x1) {
        break;  // vehicle left the segment; trajectory truncated
      }
    }
  }

  if (harvest.empty())
    throw std::invalid_argument("sample_lagrangian: no harvestable points");
  if (static_cast<int>(harvest.size()) < n_points)
    throw std::invalid_argument(
        "sample_lagrangian: fleet harvests fewer points than requested");

  std::vector<Observation> out;
  out.reserve(n_points);
  for (int idx : choose_indices(static_cast<int>(harvest.size()), n_points, rng))
    out.push_back(harvest[idx]);
  return out;
}

}  // namespace tse::sampling
