#include "tse/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "tse/analytic.hpp"

namespace tse::solver {

static void check_row_finite(std::span<const double> row, const char* op) {
  for (double v : row)
    if (!std::isfinite(v))
      throw std::runtime_error(std::string(op) + ": non-finite value in row");
}

SolveConfig SolveConfig::make(const Grid& grid, const FdParams& fd, BoundaryKind bc,
                              std::vector<double> initial) {
  SolveConfig cfg;
  cfg.grid = grid;
  cfg.fd = fd;
  cfg.bc = std::move(bc);
  cfg.initial = std::move(initial);

  if (static_cast<int>(cfg.initial.size()) != grid.x_nodes())
    throw std::invalid_argument("SolveConfig: initial row must have nx+1 values");
  for (double v : cfg.initial)
    if (!(v >= 0.0) || !(v <= fd.rho_m))
      throw std::invalid_argument("SolveConfig: initial density outside [0, rho_m]");

  const double cfl = fd.v_f * grid.dt() / grid.dx();
  if (cfl > 1.0 + 1e-12)
    throw std::invalid_argument("SolveConfig: CFL number v_f*dt/dx exceeds 1");

  if (cfg.bc.type == BoundaryKind::Type::dirichlet) {
    if (static_cast<int>(cfg.bc.left.size()) != grid.t_nodes() ||
        static_cast<int>(cfg.bc.right.size()) != grid.t_nodes())
      throw std::invalid_argument("SolveConfig: Dirichlet series must have nt+1 values");
  }

  if (fd.epsilon > 0.0) {
    const double ratio = fd.epsilon * grid.dt() / (0.5 * grid.dx() * grid.dx());
    const double m = std::ceil(ratio - 1e-12);
    if (m > 1e6)
      throw std::invalid_argument("SolveConfig: diffusion sub-step count overflow");
    cfg.diffusion_substeps = m < 1.0 ? 1 : static_cast<int>(m);
  }
  return cfg;
}

std::vector<double> lax_friedrichs_step(std::span<const double> row,
                                        const SolveConfig& cfg, int next_time_index) {
  const Grid& g = cfg.grid;
  if (static_cast<int>(row.size()) != g.x_nodes())
    throw std::invalid_argument("lax_friedrichs_step: row must have nx+1 values");
  check_row_finite(row, "lax_friedrichs_step");
  const double cfl = cfg.fd.v_f * g.dt() / g.dx();
  if (cfl > 1.0 + 1e-12)
    throw std::runtime_error("lax_friedrichs_step: CFL violation");

  const int nx = g.nx;
  const double lambda = g.dt() / (2.0 * g.dx());
  std::vector<double> q(nx + 1);
  for (int i = 0; i <= nx; ++i) q[i] = analytic::flux(row[i], cfg.fd);

  std::vector<double> out(nx + 1);
  if (cfg.bc.type == BoundaryKind::Type::periodic) {
    // Node nx duplicates node 0; march the nx unique nodes with wraparound.
    for (int i = 0; i < nx; ++i) {
      const int im = i == 0 ? nx - 1 : i - 1;
      const int ip = i + 1 == nx ? 0 : i + 1;
      out[i] = 0.5 * (row[im] + row[ip]) - lambda * (q[ip] - q[im]);
    }
    out[nx] = out[0];
  } else {
    if (next_time_index < 0 || next_time_index > g.nt)
      throw std::invalid_argument(
          "lax_friedrichs_step: Dirichlet update needs the produced time index");
    for (int i = 1; i < nx; ++i)
      out[i] = 0.5 * (row[i - 1] + row[i + 1]) - lambda * (q[i + 1] - q[i - 1]);
    out[0] = cfg.bc.left[next_time_index];
    out[nx] = cfg.bc.right[next_time_index];
  }
  return out;
}

std::vector<double> diffusion_step(std::span<const double> row,
                                   const SolveConfig& cfg, int next_time_index) {
  const Grid& g = cfg.grid;
  if (!(cfg.fd.epsilon > 0.0))
    throw std::invalid_argument("diffusion_step: epsilon must be > 0");
  if (static_cast<int>(row.size()) != g.x_nodes())
    throw std::invalid_argument("diffusion_step: row must have nx+1 values");
  check_row_finite(row, "diffusion_step");

  const int nx = g.nx;
  const int m = cfg.diffusion_substeps;
  const double alpha = cfg.fd.epsilon * (g.dt() / m) / (g.dx() * g.dx());

  std::vector<double> cur(row.begin(), row.end());
  std::vector<double> next(nx + 1);
  for (int sub = 0; sub < m; ++sub) {
    if (cfg.bc.type == BoundaryKind::Type::periodic) {
      for (int i = 0; i < nx; ++i) {
        const int im = i == 0 ? nx - 1 : i - 1;
        const int ip = i + 1 == nx ? 0 : i + 1;
        next[i] = cur[i] + alpha * (cur[ip] - 2.0 * cur[i] + cur[im]);
      }
      next[nx] = next[0];
    } else {
      if (next_time_index < 0 || next_time_index > g.nt)
        throw std::invalid_argument(
            "diffusion_step: Dirichlet update needs the produced time index");
      for (int i = 1; i < nx; ++i)
        next[i] = cur[i] + alpha * (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]);
      next[0] = cfg.bc.left[next_time_index];
      next[nx] = cfg.bc.right[next_time_index];
    }
    std::swap(cur, next);
  }
  return cur;
}

DensityField solve(const SolveConfig& cfg) {
  const Grid& g = cfg.grid;
  DensityField field(g);
  auto row0 = field.row(0);
  for (int i = 0; i <= g.nx; ++i) row0[i] = cfg.initial[i];

  std::vector<double> cur = cfg.initial;
  for (int n = 0; n < g.nt; ++n) {
    cur = lax_friedrichs_step(cur, cfg, n + 1);
    if (cfg.fd.epsilon > 0.0) cur = diffusion_step(cur, cfg, n + 1);
    auto r = field.row(n + 1);
    for (int i = 0; i <= g.nx; ++i) r[i] = cur[i];
  }
  return field;
}

DensityField reconstruct_lax_friedrichs(std::span<const double> initial,
                                        std::span<const double> left,
                                        std::span<const double> right,
                                        const Grid& grid, const FdParams& fd) {
  if (static_cast<int>(initial.size()) != grid.x_nodes())
    throw std::invalid_argument("reconstruct_lax_friedrichs: initial must have nx+1 values");
  if (static_cast<int>(left.size()) != grid.t_nodes() ||
      static_cast<int>(right.size()) != grid.t_nodes())
    throw std::invalid_argument("reconstruct_lax_friedrichs: boundary series must have nt+1 values");

  const FdParams advective(fd.v_f, fd.rho_m, 0.0);
  const double cfl = fd.v_f * grid.dt() / grid.dx();
  const int refine = cfl > 1.0 + 1e-12 ? static_cast<int>(std::ceil(cfl - 1e-12)) : 1;

  if (refine == 1) {
    auto cfg = SolveConfig::make(
        grid, advective,
        BoundaryKind::dirichlet({left.begin(), left.end()}, {right.begin(), right.end()}),
        {initial.begin(), initial.end()});
    return solve(cfg);
  }

  // Coarse-in-time data: march on dt/refine with boundary values interpolated
  // linearly between the data rows, then sample every refine-th row.
  Grid fine(grid.x0, grid.x1, grid.t0, grid.t1, grid.nx, grid.nt * refine);
  std::vector<double> fleft(fine.t_nodes()), fright(fine.t_nodes());
  for (int n = 0; n < fine.t_nodes(); ++n) {
    const int base = n / refine;
    const double frac = static_cast<double>(n % refine) / refine;
    if (base >= grid.nt) {
      fleft[n] = left[grid.nt];
      fright[n] = right[grid.nt];
    } else {
      fleft[n] = (1 - frac) * left[base] + frac * left[base + 1];
      fright[n] = (1 - frac) * right[base] + frac * right[base + 1];
    }
  }
  auto cfg = SolveConfig::make(fine, advective,
                               BoundaryKind::dirichlet(std::move(fleft), std::move(fright)),
                               {initial.begin(), initial.end()});
  DensityField dense = solve(cfg);
  DensityField out(grid);
  for (int n = 0; n <= grid.nt; ++n) {
    auto src = dense.row(n * refine);
    auto dst = out.row(n);
    for (int i = 0; i <= grid.nx; ++i) dst[i] = src[i];
  }
  return out;
}

double ring_initial_profile(double x) {
  const double pi = 3.14159265358979323846;
  return 0.5 + 0.48 * std::sin(2.0 * pi * x) * std::exp(-(x - 0.5) * (x - 0.5));
}

namespace {

std::vector<double> profile_row(const Grid& grid) {
  std::vector<double> initial(grid.x_nodes());
  for (int i = 0; i < grid.nx; ++i) initial[i] = ring_initial_profile(grid.x(i));
  initial[grid.nx] = initial[0];  // exact periodic closure
  return initial;
}

}  // namespace

DensityField ring_road_field(double epsilon) {
  Grid grid(0.0, 1.0, 0.0, 3.0, 240, 960);
  const int r = kRingGenerationRefine;
  Grid fine(grid.x0, grid.x1, grid.t0, grid.t1, grid.nx * r, grid.nt * r);
  auto fine_cfg = SolveConfig::make(fine, FdParams(1.0, 1.0, epsilon),
                                    BoundaryKind::periodic(), profile_row(fine));
  const DensityField dense = solve(fine_cfg);

  DensityField field(grid);
  for (int n = 0; n <= grid.nt; ++n)
    for (int i = 0; i <= grid.nx; ++i) field(n, i) = dense(n * r, i * r);
  return field;
}

const RingPreset& ring_road_preset(RingKind kind, std::uint64_t /*seed*/) {
  // The presets are constants; each builds once.
  auto build = [](RingKind k) {
    Grid grid(0.0, 1.0, 0.0, 3.0, 240, 960);
    const double eps = k == RingKind::parabolic ? kRingDiffusion : 0.0;
    auto cfg = SolveConfig::make(grid, FdParams(1.0, 1.0, eps),
                                 BoundaryKind::periodic(), profile_row(grid));
    return RingPreset{std::move(cfg), ring_road_field(eps)};
  };
  if (kind == RingKind::hyperbolic) {
    static const RingPreset preset = build(RingKind::hyperbolic);
    return preset;
  }
  static const RingPreset preset = build(RingKind::parabolic);
  return preset;
}

}  // namespace tse::solver
