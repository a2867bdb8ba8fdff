#include "tse/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tse/field_io.hpp"
#include "tse/metrics.hpp"
#include "tse/version.hpp"

namespace tse::cli {

namespace fs = std::filesystem;

namespace {

std::string form_name(train::PdeForm f) {
  return f == train::PdeForm::hyperbolic ? "hyperbolic" : "parabolic";
}

std::string opt_name(train::OptimizerKind k) {
  return k == train::OptimizerKind::adam ? "adam" : "lbfgs";
}

train::PdeForm parse_form(const Config& cfg, const std::string& s) {
  if (s == "hyperbolic") return train::PdeForm::hyperbolic;
  if (s == "parabolic") return train::PdeForm::parabolic;
  cfg.fail("physics", "forms", "unknown form '" + s + "'");
}

train::OptimizerKind parse_optimizer(const Config& cfg, const std::string& s) {
  if (s == "adam") return train::OptimizerKind::adam;
  if (s == "lbfgs") return train::OptimizerKind::lbfgs;
  cfg.fail("optimizer", "methods", "unknown optimizer '" + s + "'");
}

std::string fmt(double v) { return format_double(v); }

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  return from_config(Config::parse_file(path));
}

ExperimentConfig ExperimentConfig::from_config(const Config& cfg) {
  static const std::map<std::string, std::vector<std::string>> schema = {
      {"dataset", {"source", "v_f", "rho_m", "ring_epsilon"}},
      {"physics", {"forms", "epsilon"}},
      {"sampling",
       {"ic_bc_fractions", "cv_points", "cv_count", "eulerian_positions",
        "eulerian_dropout", "collocation"}},
      {"net", {"hidden"}},
      {"optimizer",
       {"methods", "adam_lr", "adam_iters", "lbfgs_memory", "lbfgs_max_iters",
        "lbfgs_ftol", "lbfgs_gtol"}},
      {"cost", {"mu1", "mu2"}},
      {"run", {"seeds", "out", "jobs"}},
      {"sweep", {"epsilons"}},
  };
  cfg.require_known_keys(schema);

  ExperimentConfig out;
  out.source = cfg.get_string("dataset", "source", out.source);
  const double v_f = cfg.get_double("dataset", "v_f", 1.0);
  const double rho_m = cfg.get_double("dataset", "rho_m", 1.0);
  if (!(v_f > 0)) cfg.fail("dataset", "v_f", "must be > 0");
  if (!(rho_m > 0)) cfg.fail("dataset", "rho_m", "must be > 0");
  out.fd = FdParams(v_f, rho_m, 0.0);
  out.ring_epsilon = cfg.get_double("dataset", "ring_epsilon", out.ring_epsilon);
  if (!(out.ring_epsilon > 0)) cfg.fail("dataset", "ring_epsilon", "must be > 0");

  out.forms.clear();
  for (const auto& s : cfg.get_string_list("physics", "forms", {"parabolic"}))
    out.forms.push_back(parse_form(cfg, s));
  if (out.forms.empty()) cfg.fail("physics", "forms", "list is empty");
  out.physics_epsilon = cfg.get_double("physics", "epsilon", out.ring_epsilon);
  if (!(out.physics_epsilon > 0)) cfg.fail("physics", "epsilon", "must be > 0");

  out.ic_bc_fractions = cfg.get_double_list("sampling", "ic_bc_fractions", {0.2});
  for (double f : out.ic_bc_fractions)
    if (!(f > 0) || f > 1) cfg.fail("sampling", "ic_bc_fractions", "fractions must be in (0, 1]");
  out.cv_points = cfg.get_int_list("sampling", "cv_points", {0});
  for (int c : out.cv_points)
    if (c < 0) cfg.fail("sampling", "cv_points", "counts must be >= 0");
  out.cv_count = cfg.get_int("sampling", "cv_count", out.cv_count);
  if (out.cv_count < 1) cfg.fail("sampling", "cv_count", "must be >= 1");
  out.eulerian_positions = cfg.get_double_list("sampling", "eulerian_positions", {});
  for (const auto& item : cfg.get_string_list("sampling", "eulerian_dropout", {})) {
    // sensor:t_lo:t_hi
    sampling::DropoutInterval d;
    if (std::sscanf(item.c_str(), "%d:%lf:%lf", &d.sensor, &d.t_lo, &d.t_hi) != 3)
      cfg.fail("sampling", "eulerian_dropout", "expected sensor:t_lo:t_hi, got '" + item + "'");
    out.eulerian_dropout.push_back(d);
  }
  out.collocation = cfg.get_int("sampling", "collocation", out.collocation);
  if (out.collocation < 0) cfg.fail("sampling", "collocation", "must be >= 0");

  out.hidden = cfg.get_int_list("net", "hidden", out.hidden);
  for (int w : out.hidden)
    if (w < 1) cfg.fail("net", "hidden", "widths must be >= 1");

  out.optimizers.clear();
  for (const auto& s : cfg.get_string_list("optimizer", "methods", {"lbfgs"}))
    out.optimizers.push_back(parse_optimizer(cfg, s));
  if (out.optimizers.empty()) cfg.fail("optimizer", "methods", "list is empty");
  out.adam.lr = cfg.get_double("optimizer", "adam_lr", out.adam.lr);
  out.adam.iters = cfg.get_int("optimizer", "adam_iters", out.adam.iters);
  out.lbfgs.memory = cfg.get_int("optimizer", "lbfgs_memory", out.lbfgs.memory);
  out.lbfgs.max_iters = cfg.get_int("optimizer", "lbfgs_max_iters", out.lbfgs.max_iters);
  out.lbfgs.ftol = cfg.get_double("optimizer", "lbfgs_ftol", out.lbfgs.ftol);
  out.lbfgs.gtol = cfg.get_double("optimizer", "lbfgs_gtol", out.lbfgs.gtol);

  const double mu1 = cfg.get_double("cost", "mu1", 1.0);
  const double mu2 = cfg.get_double("cost", "mu2", 1.0);
  try {
    out.weights = train::CostWeights(mu1, mu2);
  } catch (const std::exception& e) {
    cfg.fail("cost", "mu1", e.what());
  }

  out.seeds = cfg.get_u64_list("run", "seeds", {});
  if (out.seeds.empty()) cfg.fail("run", "seeds", "seed list must not be empty");
  out.out_dir = cfg.get_string("run", "out", out.out_dir);
  out.jobs = cfg.get_int("run", "jobs", out.jobs);
  if (out.jobs < 1) cfg.fail("run", "jobs", "must be >= 1");

  out.sweep_epsilons = cfg.get_double_list("sweep", "epsilons", {});
  for (double e : out.sweep_epsilons)
    if (!(e > 0)) cfg.fail("sweep", "epsilons", "diffusion coefficients must be > 0");

  return out;
}

std::string ExperimentConfig::echo() const {
  std::ostringstream o;
  o << "toolkit = tsebench " << kVersion << "\n";
  o << "[dataset]\nsource = " << source << "\nv_f = " << fmt(fd.v_f)
    << "\nrho_m = " << fmt(fd.rho_m) << "\nring_epsilon = " << fmt(ring_epsilon) << "\n";
  o << "[physics]\nforms =";
  for (auto f : forms) o << ' ' << form_name(f);
  o << "\nepsilon = " << fmt(physics_epsilon) << "\n";
  o << "[sampling]\nic_bc_fractions =";
  for (double f : ic_bc_fractions) o << ' ' << fmt(f);
  o << "\ncv_points =";
  for (int c : cv_points) o << ' ' << c;
  o << "\ncv_count = " << cv_count << "\neulerian_positions =";
  for (double p : eulerian_positions) o << ' ' << fmt(p);
  o << "\neulerian_dropout =";
  for (const auto& d : eulerian_dropout)
    o << ' ' << d.sensor << ':' << fmt(d.t_lo) << ':' << fmt(d.t_hi);
  o << "\ncollocation = " << collocation << "\n";
  o << "[net]\nhidden =";
  for (int w : hidden) o << ' ' << w;
  o << "\n[optimizer]\nmethods =";
  for (auto k : optimizers) o << ' ' << opt_name(k);
  o << "\nadam_lr = " << fmt(adam.lr) << "\nadam_iters = " << adam.iters
    << "\nlbfgs_memory = " << lbfgs.memory << "\nlbfgs_max_iters = " << lbfgs.max_iters
    << "\nlbfgs_ftol = " << fmt(lbfgs.ftol) << "\nlbfgs_gtol = " << fmt(lbfgs.gtol)
    << "\n";
  o << "[cost]\nmu1 = " << fmt(weights.mu1) << "\nmu2 = " << fmt(weights.mu2) << "\n";
  o << "[run]\nseeds =";
  for (auto s : seeds) o << ' ' << s;
  o << "\nout = " << out_dir << "\njobs = " << jobs << "\n";
  o << "[sweep]\nepsilons =";
  for (double e : sweep_epsilons) o << ' ' << fmt(e);
  o << "\n";
  return o.str();
}

std::string ExperimentConfig::digest() const {
  // The digest identifies the experiment content; where results land and how
  // many workers ran are not part of it.
  std::istringstream in(echo());
  std::ostringstream canonical;
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("out = ", 0) != 0 && line.rfind("jobs = ", 0) != 0)
      canonical << line << '\n';
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical.str())));
  return buf;
}

std::string ResultRow::csv() const {
  std::ostringstream o;
  o << digest << ',' << seed << ',' << optimizer << ',' << form << ',' << n_o1 << ','
    << n_o2 << ',' << fmt(rel_l2) << ',' << status << ',' << fmt(wall_s);
  return o.str();
}

DensityField ingest_grid(const std::string& path, const FdParams& fd,
                         std::ostream* warnings) {
  DensityField field = read_field_csv(path);
  std::size_t below = 0, above = 0, nonfinite = 0;
  for (double v : field.values()) {
    if (!std::isfinite(v)) {
      ++nonfinite;
      continue;
    }
    if (v < 0) ++below;
    if (v > fd.rho_m) ++above;
  }
  if (warnings) {
    if (nonfinite)
      *warnings << "warning: " << path << ": " << nonfinite << " non-finite cells\n";
    if (below) *warnings << "warning: " << path << ": " << below << " cells below 0\n";
    if (above)
      *warnings << "warning: " << path << ": " << above << " cells above rho_m = "
                << fmt(fd.rho_m) << "\n";
  }
  return field;
}

DensityField make_dataset(const ExperimentConfig& cfg, train::PdeForm form,
                          std::ostream* warnings) {
  if (cfg.source == "ring") {
    if (form == train::PdeForm::hyperbolic)
      return solver::ring_road_preset(solver::RingKind::hyperbolic).field;
    if (cfg.ring_epsilon == solver::kRingDiffusion)
      return solver::ring_road_preset(solver::RingKind::parabolic).field;
    return solver::ring_road_field(cfg.ring_epsilon);  // custom dataset diffusion
  }
  return ingest_grid(cfg.source, cfg.fd, warnings);
}

namespace {

struct Cell {
  std::uint64_t seed;
  train::PdeForm form;
  train::OptimizerKind optimizer;
  double fraction;
  int cv;
};

std::string cell_name(const Cell& c) {
  char frac[32];
  std::snprintf(frac, sizeof(frac), "%g", c.fraction * 100.0);
  std::ostringstream o;
  o << "icbc" << frac << "_cv" << c.cv << '_' << opt_name(c.optimizer) << '_'
    << form_name(c.form) << "_s" << c.seed;
  return o.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_run_manifest(const ExperimentConfig& cfg, const std::string& path,
                        const std::string& extra = {}) {
  std::ostringstream o;
  o << "# run manifest (re-running with this config and the same seeds "
       "reproduces every artifact byte for byte, wall times aside)\n";
  o << cfg.echo();
  if (!extra.empty()) o << extra;
  write_text(path, o.str());
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  fs::create_directories(cfg.out_dir);
  fs::create_directories(cfg.out_dir + "/cells");
  write_run_manifest(cfg, cfg.out_dir + "/manifest.txt");

  // Datasets are shared across cells; build each form's once.
  std::map<std::string, DensityField> datasets;
  for (auto form : cfg.forms)
    datasets.emplace(form_name(form), make_dataset(cfg, form, &log));

  std::vector<Cell> cells;
  for (auto seed : cfg.seeds)
    for (auto form : cfg.forms)
      for (auto optimizer : cfg.optimizers)
        for (double fraction : cfg.ic_bc_fractions)
          for (int cv : cfg.cv_points)
            cells.push_back({seed, form, optimizer, fraction, cv});

  std::ofstream results(cfg.out_dir + "/results.csv");
  if (!results) throw std::runtime_error("cannot open results.csv for writing");
  results << kResultHeader << "\n";
  results.flush();

  const std::string digest = cfg.digest();
  bool any_failed = false;
  for (const auto& cell : cells) {
    const std::string name = cell_name(cell);
    const std::string dir = cfg.out_dir + "/cells/" + name;
    fs::create_directories(dir);

    ResultRow row;
    row.digest = digest;
    row.seed = cell.seed;
    row.optimizer = opt_name(cell.optimizer);
    row.form = form_name(cell.form);

    const auto start = std::chrono::steady_clock::now();
    try {
      const DensityField& dataset = datasets.at(form_name(cell.form));

      sampling::SamplingPlan plan;
      plan.ic_bc_fraction = cell.fraction;
      plan.eulerian_positions = cfg.eulerian_positions;
      plan.eulerian_dropout = cfg.eulerian_dropout;
      plan.cv_count = cfg.cv_count;
      plan.cv_points = cell.cv;
      plan.seed = cell.seed;

      train::PhysicsSpec spec(
          FdParams(cfg.fd.v_f, cfg.fd.rho_m,
                   cell.form == train::PdeForm::parabolic ? cfg.physics_epsilon : 0.0),
          cell.form);

      train::TrainOptions topt;
      topt.shape.hidden = cfg.hidden;
      topt.optimizer = cell.optimizer;
      topt.adam = cfg.adam;
      topt.lbfgs = cfg.lbfgs;
      topt.collocation_points = cfg.collocation;
      topt.jobs = cfg.jobs;

      auto outcome = train::train_pidl(dataset, plan, spec, cfg.weights, topt,
                                       cell.seed, cfg.source == "ring");
      row.n_o1 = outcome.n_o1;
      row.n_o2 = outcome.n_o2;
      row.rel_l2 = relative_l2(dataset, outcome.reconstruction);

      write_field_csv(outcome.reconstruction, dir + "/field.csv");
      train::write_trace_csv(outcome.report, dir + "/trace.csv");
      net::save_params(outcome.params, dir + "/net.csv");
      {
        std::ofstream obs_out(dir + "/observations.csv");
        obs_out << "x,t,rho\n";
        for (const auto& o : outcome.observations)
          obs_out << fmt(o.x) << ',' << fmt(o.t) << ',' << fmt(o.rho) << "\n";
      }
      std::ostringstream extra;
      extra << "[cell]\nname = " << name << "\nn_o1 = " << row.n_o1
            << "\nn_o2 = " << row.n_o2 << "\ntermination = "
            << outcome.report.termination << "\niterations = "
            << outcome.report.iterations << "\n";
      write_run_manifest(cfg, dir + "/manifest.txt", extra.str());
    } catch (const std::exception& e) {
      row.status = "failed";
      row.rel_l2 = std::nan("");
      any_failed = true;
      log << "cell " << name << " failed: " << e.what() << "\n";
    }
    row.wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    results << row.csv() << "\n";
    results.flush();  // completed rows survive a later crash
    log << name << ": rel_l2 = " << fmt(row.rel_l2) << " (" << row.status << ", "
        << fmt(row.wall_s) << " s)\n";
  }
  return any_failed ? kExitPartialFailure : kExitOk;
}

int run_baseline(const ExperimentConfig& cfg, std::ostream& log) {
  fs::create_directories(cfg.out_dir);
  const train::PdeForm form = cfg.forms.front();
  const DensityField dataset = make_dataset(cfg, form, &log);
  const Grid& g = dataset.grid();

  // The scheme marches from complete data: every initial and boundary value
  // must be present (finite).
  const auto initial = dataset.row(0);
  const auto left = dataset.column(0);
  const auto right = dataset.column(g.nx);
  auto count_bad = [](const auto& v) {
    int bad = 0;
    for (double x : v)
      if (!std::isfinite(x)) ++bad;
    return bad;
  };
  if (const int bad = count_bad(initial))
    throw std::runtime_error("baseline: initial row (t = " + fmt(g.t0) + ") has " +
                             std::to_string(bad) + " non-finite entries");
  if (const int bad = count_bad(left))
    throw std::runtime_error("baseline: left boundary column (x = " + fmt(g.x0) +
                             ") has " + std::to_string(bad) + " non-finite entries");
  if (const int bad = count_bad(right))
    throw std::runtime_error("baseline: right boundary column (x = " + fmt(g.x1) +
                             ") has " + std::to_string(bad) + " non-finite entries");

  const auto start = std::chrono::steady_clock::now();
  DensityField recon = solver::reconstruct_lax_friedrichs(
      initial, left, right, g, FdParams(cfg.fd.v_f, cfg.fd.rho_m, 0.0));
  const double err = relative_l2(dataset, recon);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  write_field_csv(recon, cfg.out_dir + "/baseline_field.csv");
  ResultRow row;
  row.digest = cfg.digest();
  row.seed = cfg.seeds.front();
  row.optimizer = "lax_friedrichs";
  row.form = form_name(form);
  row.n_o1 = g.x_nodes() + 2 * g.nt;
  row.n_o2 = 0;
  row.rel_l2 = err;
  row.wall_s = wall;
  std::ofstream out(cfg.out_dir + "/baseline.csv");
  out << kResultHeader << "\n" << row.csv() << "\n";
  write_run_manifest(cfg, cfg.out_dir + "/baseline_manifest.txt");
  log << "baseline rel_l2 = " << fmt(err) << "\n";
  return kExitOk;
}

int diffusion_sweep(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.sweep_epsilons.empty())
    throw std::runtime_error("diffusion_sweep: [sweep] epsilons is empty");
  fs::create_directories(cfg.out_dir);

  std::vector<double> eps = cfg.sweep_epsilons;
  std::sort(eps.begin(), eps.end());
  const auto last = std::unique(eps.begin(), eps.end());
  if (last != eps.end()) {
    log << "warning: duplicate diffusion coefficients removed from sweep\n";
    eps.erase(last, eps.end());
  }

  const DensityField dataset = make_dataset(cfg, train::PdeForm::parabolic, &log);

  std::ofstream out(cfg.out_dir + "/sweep.csv");
  if (!out) throw std::runtime_error("cannot open sweep.csv for writing");
  out << "epsilon,rel_l2_median,seeds\n";

  bool any_failed = false;
  for (double e : eps) {
    std::vector<double> errs;
    for (auto seed : cfg.seeds) {
      try {
        sampling::SamplingPlan plan;
        plan.ic_bc_fraction = cfg.ic_bc_fractions.front();
        plan.cv_count = cfg.cv_count;
        plan.cv_points = cfg.cv_points.front();
        plan.seed = seed;

        train::PhysicsSpec spec(FdParams(cfg.fd.v_f, cfg.fd.rho_m, e),
                                train::PdeForm::parabolic);
        train::TrainOptions topt;
        topt.shape.hidden = cfg.hidden;
        topt.optimizer = cfg.optimizers.front();
        topt.adam = cfg.adam;
        topt.lbfgs = cfg.lbfgs;
        topt.collocation_points = cfg.collocation;
        topt.jobs = cfg.jobs;

        auto outcome = train::train_pidl(dataset, plan, spec, cfg.weights, topt, seed,
                                         cfg.source == "ring");
        errs.push_back(relative_l2(dataset, outcome.reconstruction));
      } catch (const std::exception& ex) {
        any_failed = true;
        log << "sweep epsilon " << fmt(e) << " seed " << seed << " failed: " << ex.what()
            << "\n";
      }
    }
    if (!errs.empty()) {
      out << fmt(e) << ',' << fmt(median(errs)) << ',' << errs.size() << "\n";
      out.flush();
      log << "epsilon " << fmt(e) << ": median rel_l2 = " << fmt(median(errs)) << "\n";
    }
  }
  write_run_manifest(cfg, cfg.out_dir + "/sweep_manifest.txt");
  return any_failed ? kExitPartialFailure : kExitOk;
}

void emit_heatmap_data(const DensityField& field, const std::string& out_path,
                       const std::vector<double>* snapshot_times) {
  const Grid& g = field.grid();
  {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
    out << "# x,t,rho\n";
    for (int n = 0; n <= g.nt; ++n)
      for (int i = 0; i <= g.nx; ++i)
        out << fmt(g.x(i)) << ',' << fmt(g.t(n)) << ',' << fmt(field(n, i)) << "\n";
    if (!out) throw std::runtime_error("write failed: " + out_path);
  }

  std::vector<double> times;
  if (snapshot_times) {
    times = *snapshot_times;
  } else {
    for (int k = 0; k < 6; ++k) times.push_back(g.t0 + k * (g.t1 - g.t0) / 6.0);
  }

  std::string stem = out_path;
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv")
    stem.resize(stem.size() - 4);
  for (std::size_t k = 0; k < times.size(); ++k) {
    int n = static_cast<int>(std::llround((times[k] - g.t0) / g.dt()));
    n = std::clamp(n, 0, g.nt);
    const std::string path = stem + "_snap" + std::to_string(k) + ".csv";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (int i = 0; i <= g.nx; ++i)
      out << fmt(g.x(i)) << ',' << fmt(field(n, i)) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
  }
}

int generate_datasets(const ExperimentConfig& cfg, std::ostream& log) {
  fs::create_directories(cfg.out_dir);
  const auto& hyp = solver::ring_road_preset(solver::RingKind::hyperbolic);
  const auto& par = solver::ring_road_preset(solver::RingKind::parabolic);
  write_field_csv(hyp.field, cfg.out_dir + "/ring_hyperbolic.csv");
  write_field_csv(par.field, cfg.out_dir + "/ring_parabolic.csv");

  const Grid& g = hyp.config.grid;
  std::ostringstream extra;
  extra << "[preset]\nx = [" << fmt(g.x0) << ", " << fmt(g.x1) << "], t = [" << fmt(g.t0)
        << ", " << fmt(g.t1) << "]\nnx = " << g.nx << "\nnt = " << g.nt
        << "\nv_f = 1\nrho_m = 1\nboundary = periodic\ninitial = 0.5 + 0.4*sin(2*pi*x)"
           "*exp(-(x-0.5)^2/0.1)\nparabolic_epsilon = "
        << fmt(solver::kRingDiffusion) << "\n";
  write_run_manifest(cfg, cfg.out_dir + "/manifest.txt", extra.str());
  log << "wrote ring datasets under " << cfg.out_dir << "\n";
  return kExitOk;
}

}  // namespace tse::cli
