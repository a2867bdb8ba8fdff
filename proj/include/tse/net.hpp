#ifndef TSE_NET_HPP
#define TSE_NET_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tse/grid.hpp"

namespace tse::net {

/// Fully-connected network layout: (x, t) in, scalar density estimate out,
/// tanh hidden activations (C^2 everywhere, required for the second spatial
/// derivative), linear output head.
struct MlpShape {
  int input_dim = 2;
  std::vector<int> hidden;
  int output_dim = 1;

  /// 8 hidden layers of 20 tanh units: the toolkit's default architecture.
  static MlpShape canonical();

  void validate() const;

  int layer_count() const { return static_cast<int>(hidden.size()) + 1; }
  /// Node count of layer l, l = 0 (input) .. layer_count() (output).
  int width(int l) const;
  int param_count() const;
  /// Offsets of layer l's weight block / bias block inside theta, l = 1-based
  /// over the linear maps (1 .. layer_count()).
  int weight_offset(int l) const;
  int bias_offset(int l) const;

  bool operator==(const MlpShape&) const = default;
};

/// Affine map of the physical training domain onto [-1, 1]^2, baked into the
/// network so tanh layers see O(1) inputs; jets are chain-rule corrected back
/// to physical units.
struct InputScaling {
  double x_lo = -1, x_hi = 1, t_lo = -1, t_hi = 1;

  static InputScaling identity() { return {}; }
  static InputScaling for_grid(const Grid& g) { return {g.x0, g.x1, g.t0, g.t1}; }

  double x_scale() const { return 2.0 / (x_hi - x_lo); }
  double t_scale() const { return 2.0 / (t_hi - t_lo); }
  double map_x(double x) const { return x_scale() * (x - 0.5 * (x_lo + x_hi)); }
  double map_t(double t) const { return t_scale() * (t - 0.5 * (t_lo + t_hi)); }

  bool operator==(const InputScaling&) const = default;
};

/// Flat parameter vector (per layer: row-major weights, then biases).
struct MlpParams {
  MlpShape shape;
  InputScaling scaling;
  std::vector<double> theta;
};

/// Density estimate with its exact first input derivatives and second
/// spatial derivative, all in physical units.
struct NetJet {
  double rho_hat = 0;
  double d_dx = 0;
  double d_dt = 0;
  double d2_dx2 = 0;
};

/// Glorot-uniform weights, zero biases, deterministic per seed.
MlpParams init_params(const MlpShape& shape, const InputScaling& scaling,
                      std::uint64_t seed);

double forward(const MlpParams& p, double x, double t);
NetJet jet(const MlpParams& p, double x, double t);

/// One squared loss term is built from a jet as
///   term = c_rho*rho + c_dx*rho_x + c_dt*rho_t + c_dxx*rho_xx
///        + c_rho_dx*(rho*rho_x) + c_const
/// which covers both data misfits (c_rho = 1, c_const = -observation) and
/// quasilinear conservation-law residuals (the rho*rho_x product).
struct JetTermCoeffs {
  double c_rho = 0, c_dx = 0, c_dt = 0, c_dxx = 0, c_rho_dx = 0, c_const = 0;

  double value(const NetJet& j) const {
    return c_rho * j.rho_hat + c_dx * j.d_dx + c_dt * j.d_dt + c_dxx * j.d2_dx2 +
           c_rho_dx * j.rho_hat * j.d_dx + c_const;
  }
};

struct LossPoint {
  double x = 0, t = 0;
  JetTermCoeffs term;
};

/// A group contributes weight * mean_k(term_k^2) to the total loss.
struct LossGroup {
  double weight = 1.0;
  std::vector<LossPoint> points;
};

struct LossSpec {
  std::vector<LossGroup> groups;
};

struct LossBreakdown {
  double total = 0;
  std::vector<double> group_means;  // mean squared term per group (0 if empty)
};

/// Loss value only.
LossBreakdown loss_value(const MlpParams& p, const LossSpec& spec, int jobs = 1);

/// Loss value plus the exact gradient with respect to theta, computed by
/// reverse-mode propagation through the jet recurrences. `grad` is resized
/// to param_count(). Point evaluations are independent; the cross-point
/// reduction runs over fixed-size blocks combined in index order, so results
/// are identical for every `jobs` value.
LossBreakdown loss_gradient(const MlpParams& p, const LossSpec& spec,
                            std::vector<double>& grad, int jobs = 1);

/// Parameter snapshot (versioned text format, see README).
void save_params(const MlpParams& p, const std::string& path);
MlpParams load_params(const std::string& path);

/// Reusable per-thread evaluation workspace. Points are processed in lanes
/// of kLanes; each lane's arithmetic is identical to a single-point
/// evaluation, bit for bit.
class Evaluator {
 public:
  static constexpr int kLanes = 16;

  explicit Evaluator(const MlpShape& shape);
  ~Evaluator();
  Evaluator(const Evaluator&) = delete;
  Evaluator& operator=(const Evaluator&) = delete;

  /// Jets for `count` (<= kLanes) points; trailing lanes are padded
  /// internally and ignored.
  void forward_batch(const MlpParams& p, const double* xs, const double* ts,
                     int count, NetJet* jets_out);

  /// Accumulates d(loss)/d(theta) into grad for the batch most recently run
  /// through forward_batch, given per-lane adjoint seeds on the jet fields.
  void backprop_batch(const MlpParams& p, const NetJet* seeds, int count,
                      double* grad);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tse::net

#endif  // TSE_NET_HPP
