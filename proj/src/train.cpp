#include "tse/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <stdexcept>

#include "tse/rng.hpp"

namespace tse::train {

PhysicsSpec::PhysicsSpec(const FdParams& fd_, PdeForm form_) : fd(fd_), form(form_) {
  if (form == PdeForm::parabolic && !(fd.epsilon > 0.0))
    throw std::invalid_argument("PhysicsSpec: parabolic form requires epsilon > 0");
}

CostWeights::CostWeights(double mu1_, double mu2_) : mu1(mu1_), mu2(mu2_) {
  if (mu1 < 0 || mu2 < 0 || (mu1 == 0 && mu2 == 0))
    throw std::invalid_argument("CostWeights: weights must be >= 0 and not both zero");
}

net::JetTermCoeffs physics_term(const PhysicsSpec& spec) {
  net::JetTermCoeffs c;
  c.c_dx = spec.fd.v_f;
  c.c_rho_dx = -2.0 * spec.fd.v_f / spec.fd.rho_m;
  c.c_dt = 1.0;
  if (spec.form == PdeForm::parabolic) c.c_dxx = -spec.fd.epsilon;
  return c;
}

double physics_residual(const net::NetJet& jet, const PhysicsSpec& spec) {
  return physics_term(spec).value(jet);
}

CostParts total_cost(const net::MlpParams& params,
                     const std::vector<Observation>& observations,
                     const sampling::CollocationSet& collocation,
                     const PhysicsSpec& spec, const CostWeights& weights,
                     std::vector<double>* grad, int jobs) {
  if (observations.empty() && collocation.points.empty())
    throw std::invalid_argument("total_cost: no observations and no collocation points");

  net::LossSpec loss;
  loss.groups.resize(2);
  loss.groups[0].weight = weights.mu1;
  loss.groups[0].points.reserve(observations.size());
  for (const auto& o : observations) {
    net::JetTermCoeffs c;
    c.c_rho = 1.0;
    c.c_const = -o.rho;
    loss.groups[0].points.push_back({o.x, o.t, c});
  }
  loss.groups[1].weight = weights.mu2;
  loss.groups[1].points.reserve(collocation.points.size());
  const net::JetTermCoeffs resid = physics_term(spec);
  for (const auto& [x, t] : collocation.points)
    loss.groups[1].points.push_back({x, t, resid});

  const net::LossBreakdown b = grad ? net::loss_gradient(params, loss, *grad, jobs)
                                    : net::loss_value(params, loss, jobs);
  return {b.total, b.group_means[0], b.group_means[1]};
}

// ---------------------------------------------------------------------------
// Optimizers
// ---------------------------------------------------------------------------

namespace {

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

}  // namespace

TrainReport adam_minimize(std::vector<double>& theta, const CostFn& cost,
                          const AdamOptions& opt) {
  if (!(opt.lr > 0)) throw std::invalid_argument("adam_minimize: lr must be > 0");
  if (opt.iters < 1) throw std::invalid_argument("adam_minimize: iters must be >= 1");

  Timer timer;
  TrainReport report;
  const std::size_t n = theta.size();
  std::vector<double> g, m(n, 0.0), v(n, 0.0);
  double b1t = 1.0, b2t = 1.0;

  for (int it = 1; it <= opt.iters; ++it) {
    const CostParts parts = cost(theta, g);
    if (!std::isfinite(parts.j) || !all_finite(g)) {
      report.termination = "non-finite cost";
      break;
    }
    report.trace.push_back({parts.j, parts.j_dl, parts.j_phy});
    ++report.iterations;

    b1t *= opt.beta1;
    b2t *= opt.beta2;
    const double corr1 = 1.0 - b1t, corr2 = 1.0 - b2t;
    for (std::size_t k = 0; k < n; ++k) {
      m[k] = opt.beta1 * m[k] + (1.0 - opt.beta1) * g[k];
      v[k] = opt.beta2 * v[k] + (1.0 - opt.beta2) * g[k] * g[k];
      const double mhat = m[k] / corr1;
      const double vhat = v[k] / corr2;
      theta[k] -= opt.lr * mhat / (std::sqrt(vhat) + opt.eps_hat);
    }
  }
  if (report.termination.empty()) report.termination = "max iterations";
  report.wall_seconds = timer.seconds();
  return report;
}

namespace {

struct LinesearchResult {
  bool ok = false;
  double alpha = 0;
  CostParts parts;
};

// Strong-Wolfe line search: bracketing plus bisection-with-interpolation zoom.
// phi(a) = f(theta + a d). Non-finite trial values are treated as "too far".
class Linesearch {
 public:
  Linesearch(const CostFn& cost, const std::vector<double>& theta0,
             const std::vector<double>& dir, double f0, double dphi0,
             const LbfgsOptions& opt)
      : cost_(cost), theta0_(theta0), dir_(dir), f0_(f0), dphi0_(dphi0), opt_(opt),
        trial_(theta0.size()) {}

  LinesearchResult run(double alpha0, std::vector<double>& theta_out,
                       std::vector<double>& grad_out) {
    double alpha_prev = 0.0, phi_prev = f0_;
    double alpha = alpha0;
    for (int it = 0; it < opt_.max_linesearch; ++it) {
      const double phi = eval(alpha);
      if (!std::isfinite(phi) || phi > f0_ + opt_.c1 * alpha * dphi0_ ||
          (it > 0 && phi >= phi_prev))
        return zoom(alpha_prev, phi_prev, alpha, theta_out, grad_out);
      const double dphi = dot(grad_, dir_);
      if (std::fabs(dphi) <= -opt_.c2 * dphi0_) return accept(alpha, theta_out, grad_out);
      if (dphi >= 0) return zoom(alpha, phi, alpha_prev, theta_out, grad_out);
      alpha_prev = alpha;
      phi_prev = phi;
      alpha = std::min(2.0 * alpha, 1e10);
    }
    return {};
  }

 private:
  double eval(double alpha) {
    for (std::size_t k = 0; k < theta0_.size(); ++k)
      trial_[k] = theta0_[k] + alpha * dir_[k];
    parts_ = cost_(trial_, grad_);
    return parts_.j;
  }

  LinesearchResult accept(double alpha, std::vector<double>& theta_out,
                          std::vector<double>& grad_out) {
    theta_out = trial_;
    grad_out = grad_;
    return {true, alpha, parts_};
  }

  LinesearchResult zoom(double lo, double phi_lo, double hi,
                        std::vector<double>& theta_out, std::vector<double>& grad_out) {
    for (int it = 0; it < opt_.max_linesearch; ++it) {
      if (std::fabs(hi - lo) <= 1e-16 * std::max(1.0, std::fabs(lo))) return {};
      const double alpha = 0.5 * (lo + hi);
      const double phi = eval(alpha);
      if (!std::isfinite(phi) || phi > f0_ + opt_.c1 * alpha * dphi0_ || phi >= phi_lo) {
        hi = alpha;
        continue;
      }
      const double dphi = dot(grad_, dir_);
      if (std::fabs(dphi) <= -opt_.c2 * dphi0_) return accept(alpha, theta_out, grad_out);
      if (dphi * (hi - lo) >= 0) hi = lo;
      lo = alpha;
      phi_lo = phi;
    }
    return {};
  }

  const CostFn& cost_;
  const std::vector<double>& theta0_;
  const std::vector<double>& dir_;
  double f0_, dphi0_;
  const LbfgsOptions& opt_;
  std::vector<double> trial_, grad_;
  CostParts parts_;
};

}  // namespace

TrainReport lbfgs_minimize(std::vector<double>& theta, const CostFn& cost,
                           const LbfgsOptions& opt) {
  if (opt.memory < 1) throw std::invalid_argument("lbfgs_minimize: memory must be >= 1");

  Timer timer;
  TrainReport report;
  const std::size_t n = theta.size();

  std::vector<double> grad;
  CostParts parts = cost(theta, grad);
  if (!std::isfinite(parts.j) || !all_finite(grad)) {
    report.termination = "non-finite cost";
    report.wall_seconds = timer.seconds();
    return report;
  }
  if (max_abs(grad) <= opt.gtol) {
    report.termination = "gradient tolerance";
    report.wall_seconds = timer.seconds();
    return report;
  }

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> history;
  std::vector<double> dir(n), alpha_buf;

  for (int it = 0; it < opt.max_iters; ++it) {
    // Two-loop recursion for dir = -H grad.
    dir = grad;
    alpha_buf.assign(history.size(), 0.0);
    for (int h = static_cast<int>(history.size()) - 1; h >= 0; --h) {
      const Pair& pr = history[h];
      const double a = pr.rho * dot(pr.s, dir);
      alpha_buf[h] = a;
      for (std::size_t k = 0; k < n; ++k) dir[k] -= a * pr.y[k];
    }
    if (!history.empty()) {
      const Pair& last = history.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (auto& d : dir) d *= gamma;
    }
    for (std::size_t h = 0; h < history.size(); ++h) {
      const Pair& pr = history[h];
      const double b = pr.rho * dot(pr.y, dir);
      for (std::size_t k = 0; k < n; ++k) dir[k] += (alpha_buf[h] - b) * pr.s[k];
    }
    for (auto& d : dir) d = -d;

    double dphi0 = dot(grad, dir);
    if (dphi0 >= 0) {
      // Not a descent direction; fall back to steepest descent.
      history.clear();
      for (std::size_t k = 0; k < n; ++k) dir[k] = -grad[k];
      dphi0 = dot(grad, dir);
    }

    const double alpha0 =
        it == 0 ? std::min(1.0, 1.0 / std::max(1e-12, max_abs(grad))) : 1.0;
    Linesearch search(cost, theta, dir, parts.j, dphi0, opt);
    std::vector<double> theta_new, grad_new;
    const LinesearchResult ls = search.run(alpha0, theta_new, grad_new);
    if (!ls.ok) {
      report.termination = "line search failure";
      break;
    }
    if (!std::isfinite(ls.parts.j) || !all_finite(grad_new)) {
      report.termination = "non-finite cost";
      break;
    }

    Pair pr;
    pr.s.resize(n);
    pr.y.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      pr.s[k] = theta_new[k] - theta[k];
      pr.y[k] = grad_new[k] - grad[k];
    }
    const double sy = dot(pr.s, pr.y);

    const double f_prev = parts.j;
    theta = std::move(theta_new);
    grad = std::move(grad_new);
    parts = ls.parts;
    report.trace.push_back({parts.j, parts.j_dl, parts.j_phy});
    ++report.iterations;

    if (sy > 1e-10 * std::sqrt(dot(pr.s, pr.s)) * std::sqrt(dot(pr.y, pr.y))) {
      pr.rho = 1.0 / sy;
      history.push_back(std::move(pr));
      if (static_cast<int>(history.size()) > opt.memory) history.pop_front();
    }

    if (max_abs(grad) <= opt.gtol) {
      report.termination = "gradient tolerance";
      break;
    }
    if (f_prev - parts.j <= opt.ftol * std::max({std::fabs(f_prev), std::fabs(parts.j), 1.0})) {
      report.termination = "ftol";
      break;
    }
  }
  if (report.termination.empty()) report.termination = "max iterations";
  report.wall_seconds = timer.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// End-to-end training
// ---------------------------------------------------------------------------

DensityField evaluate_on_grid(const net::MlpParams& params, const Grid& grid) {
  DensityField out(grid);
  net::Evaluator ev(params.shape);
  constexpr int K = net::Evaluator::kLanes;
  double xs[K], ts[K];
  net::NetJet jets[K];

  std::vector<std::pair<int, int>> batch;
  batch.reserve(K);
  auto flush = [&] {
    if (batch.empty()) return;
    const int m = static_cast<int>(batch.size());
    for (int l = 0; l < m; ++l) {
      xs[l] = grid.x(batch[l].second);
      ts[l] = grid.t(batch[l].first);
    }
    ev.forward_batch(params, xs, ts, m, jets);
    for (int l = 0; l < m; ++l) out(batch[l].first, batch[l].second) = jets[l].rho_hat;
    batch.clear();
  };
  for (int nrow = 0; nrow <= grid.nt; ++nrow)
    for (int i = 0; i <= grid.nx; ++i) {
      batch.emplace_back(nrow, i);
      if (static_cast<int>(batch.size()) == K) flush();
    }
  flush();
  return out;
}

TrainOutcome train_pidl(const DensityField& dataset, const sampling::SamplingPlan& plan,
                        const PhysicsSpec& spec, const CostWeights& weights,
                        const TrainOptions& opt, std::uint64_t seed,
                        bool periodic_domain) {
  const Grid& grid = dataset.grid();

  // Independent deterministic sub-streams per consumer.
  const std::uint64_t seed_net = Rng::mix(seed, 1);
  const std::uint64_t seed_colloc = Rng::mix(seed, 2);
  const std::uint64_t seed_icbc = Rng::mix(seed, 3);
  const std::uint64_t seed_eul = Rng::mix(seed, 4);
  const std::uint64_t seed_lag = Rng::mix(seed, 5);

  std::vector<Observation> obs;
  int n_o1 = 0, n_o2 = 0;
  if (plan.ic_bc_fraction > 0.0) {
    auto icbc = sampling::sample_ic_bc(dataset, plan.ic_bc_fraction, seed_icbc);
    n_o1 = static_cast<int>(icbc.size());
    obs.insert(obs.end(), icbc.begin(), icbc.end());
  }
  if (!plan.eulerian_positions.empty()) {
    auto eul = sampling::sample_eulerian(dataset, plan.eulerian_positions,
                                         plan.eulerian_dropout, seed_eul);
    n_o2 += static_cast<int>(eul.size());
    obs.insert(obs.end(), eul.begin(), eul.end());
  }
  if (plan.cv_count > 0 && plan.cv_points > 0) {
    auto lag = sampling::sample_lagrangian(dataset, spec.fd, plan.cv_count,
                                           plan.cv_points, seed_lag, periodic_domain);
    n_o2 += static_cast<int>(lag.size());
    obs.insert(obs.end(), lag.begin(), lag.end());
  }

  sampling::CollocationSet colloc;
  if (opt.collocation_points > 0)
    colloc = sampling::latin_hypercube(opt.collocation_points,
                                       sampling::Rect::from_grid(grid), seed_colloc);

  net::MlpParams params =
      net::init_params(opt.shape, net::InputScaling::for_grid(grid), seed_net);

  const CostFn cost = [&](const std::vector<double>& theta, std::vector<double>& grad) {
    net::MlpParams p{params.shape, params.scaling, theta};
    return total_cost(p, obs, colloc, spec, weights, &grad, opt.jobs);
  };

  TrainReport report = opt.optimizer == OptimizerKind::adam
                           ? adam_minimize(params.theta, cost, opt.adam)
                           : lbfgs_minimize(params.theta, cost, opt.lbfgs);

  TrainOutcome outcome{std::move(report), params, evaluate_on_grid(params, grid),
                       std::move(obs), n_o1, n_o2};
  return outcome;
}

void write_trace_csv(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "iter,J,J_DL,J_PHY\n";
  char buf[128];
  for (std::size_t i = 0; i < report.trace.size(); ++i) {
    const auto& r = report.trace[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", i + 1, r.j, r.j_dl,
                  r.j_phy);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace tse::train
