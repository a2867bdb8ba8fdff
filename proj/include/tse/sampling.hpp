#ifndef TSE_SAMPLING_HPP
#define TSE_SAMPLING_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "tse/grid.hpp"

namespace tse::sampling {

/// Domain rectangle for collocation sampling.
struct Rect {
  double x0 = 0, x1 = 1, t0 = 0, t1 = 1;

  static Rect from_grid(const Grid& g) { return {g.x0, g.x1, g.t0, g.t1}; }
};

struct CollocationSet {
  std::vector<std::pair<double, double>> points;  // (x, t)
};

/// Latin hypercube sample of n points: per dimension, exactly one point in
/// each of the n equal-width strata, jittered uniformly within its stratum.
CollocationSet latin_hypercube(int n, const Rect& bounds, std::uint64_t seed);

/// Dropout window: observations of sensor `sensor` with t in [t_lo, t_hi]
/// are discarded.
struct DropoutInterval {
  int sensor = 0;
  double t_lo = 0, t_hi = 0;
};

/// Full declarative description of one training-point build.
struct SamplingPlan {
  double ic_bc_fraction = 0.0;             // fraction of initial+boundary nodes
  std::vector<double> eulerian_positions;  // fixed-sensor x positions
  std::vector<DropoutInterval> eulerian_dropout;
  int cv_count = 0;                        // vehicles carrying Lagrangian sensors
  int cv_points = 0;                       // total Lagrangian samples kept
  std::uint64_t seed = 0;
};

/// Uniform subsample (without replacement) of the union of the initial row
/// and the two boundary columns; corner nodes are deduplicated first.
/// Keeps round(fraction * union size) nodes.
std::vector<Observation> sample_ic_bc(const DensityField& field, double fraction,
                                      std::uint64_t seed);

/// Every time node at each sensor position (snapped to the nearest grid
/// node), minus dropout windows.
std::vector<Observation> sample_eulerian(const DensityField& field,
                                         const std::vector<double>& positions,
                                         const std::vector<DropoutInterval>& dropout,
                                         std::uint64_t seed);

/// Density samples along vehicle trajectories advected by the macroscopic
/// speed field: dx/dt = v(rho(x, t)), explicit Euler at the grid dt with
/// bilinear field interpolation. Periodic domains wrap; otherwise a
/// trajectory leaving the domain is truncated. The harvest is thinned by
/// seeded uniform selection to exactly n_points observations.
std::vector<Observation> sample_lagrangian(const DensityField& field,
                                           const FdParams& fd, int cv_count,
                                           int n_points, std::uint64_t seed,
                                           bool periodic);

}  // namespace tse::sampling

#endif  // TSE_SAMPLING_HPP
