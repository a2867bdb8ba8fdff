#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tse/metrics.hpp"
#include "tse/solver.hpp"
#include "tse/train.hpp"

using namespace tse;
using namespace tse::train;

namespace {

const FdParams unit_fd(1.0, 1.0);

// Network emitting a constant c regardless of input: zero weights, output
// bias c.
net::MlpParams constant_net(double c) {
  net::MlpParams p;
  p.shape.hidden = {4};
  p.scaling = net::InputScaling::identity();
  p.theta.assign(p.shape.param_count(), 0.0);
  p.theta[p.shape.bias_offset(p.shape.layer_count())] = c;
  return p;
}

}  // namespace

TEST_CASE("physics residual") {
  const PhysicsSpec hyper(unit_fd, PdeForm::hyperbolic);
  CHECK(physics_residual({0, 0, 0, 0}, hyper) == 0.0);

  net::NetJet sonic{0.5, 5.0, 0.3, 0.0};  // advective coefficient vanishes
  CHECK(physics_residual(sonic, hyper) == doctest::Approx(0.3));

  const PhysicsSpec para(FdParams(1.0, 1.0, 0.1), PdeForm::parabolic);
  net::NetJet j{0.5, 5.0, 0.3, 2.0};
  CHECK(physics_residual(j, para) == doctest::Approx(0.1));

  CHECK_THROWS_AS(PhysicsSpec(unit_fd, PdeForm::parabolic), std::invalid_argument);
}

TEST_CASE("cost weight validation") {
  CHECK_THROWS_AS(CostWeights(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(CostWeights(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("constant networks solve constant datasets exactly") {
  std::vector<Observation> obs{{0.1, 0.2, 0.4}, {0.8, 2.0, 0.4}};
  sampling::CollocationSet colloc;
  colloc.points = {{0.3, 1.0}, {0.6, 2.5}};
  const auto p = constant_net(0.4);

  for (const auto& spec :
       {PhysicsSpec(unit_fd, PdeForm::hyperbolic),
        PhysicsSpec(FdParams(1.0, 1.0, 0.05), PdeForm::parabolic)}) {
    const CostParts parts = total_cost(p, obs, colloc, spec, CostWeights(1, 1));
    CHECK(parts.j_dl == 0.0);
    CHECK(parts.j_phy == 0.0);
    CHECK(parts.j == 0.0);
  }
}

TEST_CASE("cost weights act linearly and mu1 = 0 drops the data term") {
  std::vector<Observation> obs{{0.1, 0.2, 0.7}, {0.9, 1.4, 0.2}};
  sampling::CollocationSet colloc;
  colloc.points = {{0.4, 0.8}, {0.2, 1.9}, {0.7, 0.3}};
  const PhysicsSpec spec(unit_fd, PdeForm::hyperbolic);
  const auto p = net::init_params({2, {5, 5}, 1}, net::InputScaling{0, 1, 0, 3}, 3);

  const CostParts unit = total_cost(p, obs, colloc, spec, CostWeights(1, 1));
  const CostParts mixed = total_cost(p, obs, colloc, spec, CostWeights(0.7, 1.9));
  // accumulate the expected total exactly the way the cost does
  double expected = 0.0;
  expected += 0.7 * unit.j_dl;
  expected += 1.9 * unit.j_phy;
  CHECK(mixed.j == expected);
  CHECK(mixed.j_dl == unit.j_dl);
  CHECK(mixed.j_phy == unit.j_phy);

  const CostParts no_data = total_cost(p, obs, colloc, spec, CostWeights(0, 2.0));
  CHECK(no_data.j == 2.0 * no_data.j_phy);

  CHECK_THROWS_AS(total_cost(p, {}, {}, spec, CostWeights(1, 1)),
                  std::invalid_argument);
}

TEST_CASE("tiny-net cost matches a hand evaluation") {
  // single hidden unit, hand-set weights, identity scaling
  net::MlpParams p;
  p.shape.hidden = {1};
  p.scaling = net::InputScaling::identity();
  p.theta = {0.7, -0.4, 0.2, 1.3, -0.1};  // w1, w2, b1, v, b2

  auto rho = [&](double x, double t) {
    return 1.3 * std::tanh(0.7 * x - 0.4 * t + 0.2) - 0.1;
  };
  auto rho_x = [&](double x, double t) {
    const double h = std::tanh(0.7 * x - 0.4 * t + 0.2);
    return 1.3 * (1 - h * h) * 0.7;
  };
  auto rho_t = [&](double x, double t) {
    const double h = std::tanh(0.7 * x - 0.4 * t + 0.2);
    return 1.3 * (1 - h * h) * (-0.4);
  };

  std::vector<Observation> obs{{0.2, 0.3, 0.5}, {-0.4, 0.6, 0.1}};
  sampling::CollocationSet colloc;
  colloc.points = {{0.1, 0.9}};
  const PhysicsSpec spec(unit_fd, PdeForm::hyperbolic);

  const double e1 = rho(0.2, 0.3) - 0.5;
  const double e2 = rho(-0.4, 0.6) - 0.1;
  const double expected_dl = (e1 * e1 + e2 * e2) / 2.0;
  const double r = (1 - 2 * rho(0.1, 0.9)) * rho_x(0.1, 0.9) + rho_t(0.1, 0.9);
  const double expected_phy = r * r;

  const CostParts parts = total_cost(p, obs, colloc, spec, CostWeights(1, 1));
  CHECK(std::fabs(parts.j_dl - expected_dl) <= 1e-12);
  CHECK(std::fabs(parts.j_phy - expected_phy) <= 1e-12);
  CHECK(std::fabs(parts.j - (expected_dl + expected_phy)) <= 1e-12);
}

TEST_CASE("total cost gradient passes the finite-difference check end to end") {
  std::vector<Observation> obs{{0.2, 0.5, 0.6}, {0.7, 1.1, 0.3}, {0.5, 2.0, 0.45}};
  sampling::CollocationSet colloc;
  colloc.points = {{0.15, 0.4}, {0.85, 2.2}};
  const PhysicsSpec spec(FdParams(1.0, 1.0, 0.02), PdeForm::parabolic);
  const CostWeights w(1.0, 1.0);
  const auto p = net::init_params({2, {3}, 1}, net::InputScaling{0, 1, 0, 3}, 17);

  std::vector<double> grad;
  total_cost(p, obs, colloc, spec, w, &grad);
  const auto fd = oracles::fd_gradient(
      [&](const std::vector<double>& th) {
        net::MlpParams q{p.shape, p.scaling, th};
        return total_cost(q, obs, colloc, spec, w).j;
      },
      p.theta);
  CHECK(oracles::max_rel_error(grad, fd) <= 1e-5);
}

TEST_CASE("adam first step matches the closed form") {
  std::vector<double> theta{0.0};
  AdamOptions opt;
  opt.iters = 1;
  const auto report = adam_minimize(
      theta,
      [](const std::vector<double>&, std::vector<double>& g) {
        g.assign(1, 1.0);
        return CostParts{1.0, 1.0, 0.0};
      },
      opt);
  // bias-corrected m_hat = v_hat = 1 exactly after one unit-gradient step
  const double expected = -opt.lr / (1.0 + opt.eps_hat);
  CHECK(std::fabs(theta[0] - expected) <= 1e-12);
  CHECK(std::fabs(theta[0] + opt.lr) <= 1e-10);
  CHECK(report.iterations == 1);
  CHECK(report.trace.size() == 1);
}

TEST_CASE("adam leaves parameters unchanged on zero gradients") {
  std::vector<double> theta{0.3, -0.7};
  AdamOptions opt;
  opt.iters = 50;
  adam_minimize(
      theta,
      [](const std::vector<double>&, std::vector<double>& g) {
        g.assign(2, 0.0);
        return CostParts{0.0, 0.0, 0.0};
      },
      opt);
  CHECK(theta[0] == 0.3);
  CHECK(theta[1] == -0.7);
}

TEST_CASE("adam converges on a quadratic bowl") {
  std::vector<double> theta{1.0};
  AdamOptions opt;
  opt.iters = 8000;
  adam_minimize(
      theta,
      [](const std::vector<double>& th, std::vector<double>& g) {
        g.assign(1, 2.0 * th[0]);
        return CostParts{th[0] * th[0], 0.0, 0.0};
      },
      opt);
  CHECK(std::fabs(theta[0]) <= 1e-3);
}

TEST_CASE("adam aborts on non-finite cost with a diagnostic report") {
  std::vector<double> theta{1.0};
  AdamOptions opt;
  opt.iters = 100;
  const auto report = adam_minimize(
      theta,
      [](const std::vector<double>&, std::vector<double>& g) {
        g.assign(1, 1.0);
        return CostParts{std::nan(""), 0.0, 0.0};
      },
      opt);
  CHECK(report.termination == "non-finite cost");
  CHECK(report.iterations == 0);
}

TEST_CASE("lbfgs solves a quadratic bowl in a handful of iterations") {
  const std::vector<double> target{0.4, -1.2, 3.0, 0.0, 2.2, -0.5};
  std::vector<double> theta(target.size(), 0.0);
  LbfgsOptions opt;
  opt.max_iters = static_cast<int>(target.size()) + 5;
  const auto report = lbfgs_minimize(
      theta,
      [&](const std::vector<double>& th, std::vector<double>& g) {
        g.resize(th.size());
        double j = 0;
        for (std::size_t k = 0; k < th.size(); ++k) {
          g[k] = th[k] - target[k];
          j += 0.5 * g[k] * g[k];
        }
        return CostParts{j, 0.0, 0.0};
      },
      opt);
  for (std::size_t k = 0; k < target.size(); ++k)
    CHECK(std::fabs(theta[k] - target[k]) <= 1e-10);
  CHECK(report.iterations <= static_cast<int>(target.size()) + 5);
}

TEST_CASE("lbfgs recognizes an already-optimal start") {
  std::vector<double> theta{1.0, 2.0};
  const auto report = lbfgs_minimize(
      theta,
      [](const std::vector<double>&, std::vector<double>& g) {
        g.assign(2, 0.0);
        return CostParts{0.0, 0.0, 0.0};
      },
      LbfgsOptions{});
  CHECK(report.iterations == 0);
  CHECK(report.termination == "gradient tolerance");
  CHECK(theta[0] == 1.0);
}

TEST_CASE("lbfgs reaches the Rosenbrock optimum") {
  std::vector<double> theta{-1.2, 1.0};
  LbfgsOptions opt;
  opt.max_iters = 500;
  lbfgs_minimize(
      theta,
      [](const std::vector<double>& th, std::vector<double>& g) {
        const double a = th[0], b = th[1];
        g.resize(2);
        g[0] = -2 * (1 - a) - 400 * a * (b - a * a);
        g[1] = 200 * (b - a * a);
        const double j = (1 - a) * (1 - a) + 100 * (b - a * a) * (b - a * a);
        return CostParts{j, 0.0, 0.0};
      },
      opt);
  const double dist =
      std::sqrt((theta[0] - 1) * (theta[0] - 1) + (theta[1] - 1) * (theta[1] - 1));
  CHECK(dist <= 1e-6);
}

TEST_CASE("lbfgs survives a hopeless line search") {
  // inconsistent gradient: the reported descent direction only increases J
  std::vector<double> theta{0.0};
  const auto report = lbfgs_minimize(
      theta,
      [](const std::vector<double>& th, std::vector<double>& g) {
        g.assign(1, -1.0);
        return CostParts{th[0] * th[0], 0.0, 0.0};
      },
      LbfgsOptions{});
  CHECK(report.termination == "line search failure");
  CHECK(theta[0] == 0.0);
}

TEST_CASE("train_pidl is deterministic per seed") {
  const auto& preset = solver::ring_road_preset(solver::RingKind::parabolic);
  sampling::SamplingPlan plan;
  plan.ic_bc_fraction = 0.1;
  plan.seed = 3;
  const PhysicsSpec spec(FdParams(1.0, 1.0, solver::kRingDiffusion), PdeForm::parabolic);

  TrainOptions opt;
  opt.shape.hidden = {8, 8};
  opt.collocation_points = 400;
  opt.lbfgs.max_iters = 20;
  opt.jobs = 2;

  const auto a = train_pidl(preset.field, plan, spec, CostWeights(1, 1), opt, 5);
  const auto b = train_pidl(preset.field, plan, spec, CostWeights(1, 1), opt, 5);
  REQUIRE(a.report.trace.size() == b.report.trace.size());
  for (std::size_t k = 0; k < a.report.trace.size(); ++k)
    CHECK(a.report.trace[k].j == b.report.trace[k].j);
  CHECK(a.reconstruction.values() == b.reconstruction.values());
  CHECK(a.n_o1 == 216);

  const auto c = train_pidl(preset.field, plan, spec, CostWeights(1, 1), opt, 6);
  CHECK(a.report.trace.back().j != c.report.trace.back().j);
}

TEST_CASE("pure regression drives the data cost to zero") {
  const auto& preset = solver::ring_road_preset(solver::RingKind::parabolic);
  sampling::SamplingPlan plan;
  plan.ic_bc_fraction = 0.9;
  plan.seed = 1;
  const PhysicsSpec spec(FdParams(1.0, 1.0, solver::kRingDiffusion), PdeForm::parabolic);

  TrainOptions opt;
  opt.shape.hidden = {20, 20, 20, 20};
  opt.collocation_points = 0;  // observations only
  opt.lbfgs.max_iters = 800;
  opt.jobs = 2;

  const auto outcome =
      train_pidl(preset.field, plan, spec, CostWeights(1, 0), opt, 2);
  CHECK(outcome.report.trace.back().j_dl < 1e-4);
}
