#ifndef TSE_TRAIN_HPP
#define TSE_TRAIN_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tse/grid.hpp"
#include "tse/net.hpp"
#include "tse/sampling.hpp"

namespace tse::train {

enum class PdeForm { hyperbolic, parabolic };

/// Physics used in the residual penalty; parabolic adds -epsilon * rho_xx and
/// therefore requires epsilon > 0.
struct PhysicsSpec {
  FdParams fd;
  PdeForm form = PdeForm::hyperbolic;

  PhysicsSpec() = default;
  PhysicsSpec(const FdParams& fd_, PdeForm form_);
};

struct CostWeights {
  double mu1 = 1.0;  // data-misfit weight
  double mu2 = 1.0;  // physics-residual weight

  CostWeights() = default;
  CostWeights(double mu1_, double mu2_);
};

/// Conservation-law residual of a jet:
///   hyperbolic: v_f (1 - 2 rho/rho_m) rho_x + rho_t
///   parabolic:  the same minus epsilon * rho_xx
double physics_residual(const net::NetJet& jet, const PhysicsSpec& spec);

/// The residual above as squared-term coefficients for the loss engine.
net::JetTermCoeffs physics_term(const PhysicsSpec& spec);

struct CostParts {
  double j = 0, j_dl = 0, j_phy = 0;
};

/// J_DL = mean squared data misfit, J_PHY = mean squared residual over the
/// collocation points, J = mu1*J_DL + mu2*J_PHY. When grad is non-null it
/// receives dJ/dtheta. Both point sets empty is a configuration error.
CostParts total_cost(const net::MlpParams& params,
                     const std::vector<Observation>& observations,
                     const sampling::CollocationSet& collocation,
                     const PhysicsSpec& spec, const CostWeights& weights,
                     std::vector<double>* grad = nullptr, int jobs = 1);

struct TrainReport {
  struct TraceRow {
    double j = 0, j_dl = 0, j_phy = 0;
  };
  std::vector<TraceRow> trace;  // one row per iteration performed
  int iterations = 0;
  std::string termination;
  double wall_seconds = 0;
};

/// Cost callback: fills grad (resized by the callee) and returns the parts.
using CostFn = std::function<CostParts(const std::vector<double>& theta,
                                       std::vector<double>& grad)>;

struct AdamOptions {
  double lr = 1e-3;
  int iters = 8000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
};

/// Bias-corrected Adam:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
///   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps_hat)
TrainReport adam_minimize(std::vector<double>& theta, const CostFn& cost,
                          const AdamOptions& opt);

struct LbfgsOptions {
  int memory = 10;
  int max_iters = 20000;
  double ftol = 2.22e-16;  // relative cost-decrease stop
  double gtol = 1e-10;     // gradient max-norm stop
  int max_linesearch = 40;
  double c1 = 1e-4;  // sufficient decrease
  double c2 = 0.9;   // curvature
};

/// Limited-memory BFGS (two-loop recursion) with a strong-Wolfe line search.
/// A failed line search terminates with the reason recorded, never throws.
TrainReport lbfgs_minimize(std::vector<double>& theta, const CostFn& cost,
                           const LbfgsOptions& opt);

enum class OptimizerKind { adam, lbfgs };

struct TrainOptions {
  net::MlpShape shape = net::MlpShape::canonical();
  OptimizerKind optimizer = OptimizerKind::lbfgs;
  AdamOptions adam;
  LbfgsOptions lbfgs;
  int collocation_points = 10000;
  int jobs = 1;
};

struct TrainOutcome {
  TrainReport report;
  net::MlpParams params;
  DensityField reconstruction;
  std::vector<Observation> observations;  // the labeled points trained on
  int n_o1 = 0;  // initial/boundary observations used
  int n_o2 = 0;  // interior observations used
};

/// End-to-end run: builds the observation and collocation sets from the plan,
/// initializes the network, minimizes the weighted cost and evaluates the
/// trained network on every grid node. Fully determined by `seed`.
TrainOutcome train_pidl(const DensityField& dataset, const sampling::SamplingPlan& plan,
                        const PhysicsSpec& spec, const CostWeights& weights,
                        const TrainOptions& opt, std::uint64_t seed,
                        bool periodic_domain = true);

/// Evaluates a trained network at every node of `grid`.
DensityField evaluate_on_grid(const net::MlpParams& params, const Grid& grid);

/// Loss-trace file: "iter,J,J_DL,J_PHY" rows.
void write_trace_csv(const TrainReport& report, const std::string& path);

}  // namespace tse::train

#endif  // TSE_TRAIN_HPP
