#ifndef TSE_GRID_HPP
#define TSE_GRID_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tse {

/// Uniform space-time grid. Field values live on the (nt+1) x (nx+1) nodes,
/// so the initial-condition row and the two boundary columns are whole node
/// lines and observation counts come out as exact integers.
struct Grid {
  double x0 = 0.0, x1 = 1.0;
  double t0 = 0.0, t1 = 1.0;
  int nx = 2;  // spatial cells (nodes = nx + 1)
  int nt = 1;  // time steps   (rows  = nt + 1)

  Grid() = default;

  Grid(double x0_, double x1_, double t0_, double t1_, int nx_, int nt_)
      : x0(x0_), x1(x1_), t0(t0_), t1(t1_), nx(nx_), nt(nt_) {
    if (nx < 2) throw std::invalid_argument("Grid: nx must be >= 2");
    if (nt < 1) throw std::invalid_argument("Grid: nt must be >= 1");
    if (!(x1 > x0)) throw std::invalid_argument("Grid: need x1 > x0");
    if (!(t1 > t0)) throw std::invalid_argument("Grid: need t1 > t0");
  }

  double dx() const { return (x1 - x0) / nx; }
  double dt() const { return (t1 - t0) / nt; }
  double x(int i) const { return x0 + i * dx(); }
  double t(int n) const { return t0 + n * dt(); }
  int x_nodes() const { return nx + 1; }
  int t_nodes() const { return nt + 1; }

  bool operator==(const Grid&) const = default;
};

/// Greenshields fundamental-diagram constants plus the diffusion coefficient
/// (epsilon = 0 selects the purely hyperbolic model).
struct FdParams {
  double v_f = 1.0;      // free-flow speed
  double rho_m = 1.0;    // maximum (jam) density
  double epsilon = 0.0;  // diffusion coefficient

  FdParams() = default;

  FdParams(double v_f_, double rho_m_, double epsilon_ = 0.0)
      : v_f(v_f_), rho_m(rho_m_), epsilon(epsilon_) {
    if (!(v_f > 0)) throw std::invalid_argument("FdParams: v_f must be > 0");
    if (!(rho_m > 0)) throw std::invalid_argument("FdParams: rho_m must be > 0");
    if (epsilon < 0) throw std::invalid_argument("FdParams: epsilon must be >= 0");
  }
};

/// Discretized density rho(x, t) on the nodes of a Grid; row n holds time
/// step n. Ground-truth fields and reconstructions share this type.
class DensityField {
 public:
  explicit DensityField(const Grid& grid, double fill = 0.0)
      : grid_(grid),
        values_(static_cast<std::size_t>(grid.t_nodes()) * grid.x_nodes(), fill) {}

  DensityField(const Grid& grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    const std::size_t want =
        static_cast<std::size_t>(grid_.t_nodes()) * grid_.x_nodes();
    if (values_.size() != want)
      throw std::invalid_argument("DensityField: values size does not match grid");
  }

  const Grid& grid() const { return grid_; }

  double operator()(int n, int i) const {
    return values_[static_cast<std::size_t>(n) * grid_.x_nodes() + i];
  }
  double& operator()(int n, int i) {
    return values_[static_cast<std::size_t>(n) * grid_.x_nodes() + i];
  }

  std::span<const double> row(int n) const {
    return {values_.data() + static_cast<std::size_t>(n) * grid_.x_nodes(),
            static_cast<std::size_t>(grid_.x_nodes())};
  }
  std::span<double> row(int n) {
    return {values_.data() + static_cast<std::size_t>(n) * grid_.x_nodes(),
            static_cast<std::size_t>(grid_.x_nodes())};
  }

  std::vector<double> column(int i) const {
    std::vector<double> col(grid_.t_nodes());
    for (int n = 0; n < grid_.t_nodes(); ++n) col[n] = (*this)(n, i);
    return col;
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// One labeled training point.
struct Observation {
  double x = 0, t = 0, rho = 0;
};

/// Bilinear interpolation of a field at an interior point of its domain.
/// Coordinates may touch the boundary; anything outside (beyond a small
/// rounding slack) is an error.
double bilinear(const DensityField& field, double x, double t);

}  // namespace tse

#endif  // TSE_GRID_HPP
