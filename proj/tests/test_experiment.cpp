#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tse/experiment.hpp"
#include "tse/field_io.hpp"
#include "tse/metrics.hpp"
#include "tse/solver.hpp"

using namespace tse;
using namespace tse::cli;

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// A deliberately small training setup so the experiment paths stay fast.
ExperimentConfig tiny_config(const fs::path& out) {
  std::istringstream in(
      "[dataset]\nsource = ring\n"
      "[physics]\nforms = parabolic\n"
      "[sampling]\nic_bc_fractions = 0.1\ncollocation = 200\n"
      "[net]\nhidden = 8, 8\n"
      "[optimizer]\nmethods = lbfgs\nlbfgs_max_iters = 15\n"
      "[run]\nseeds = 3\n");
  auto cfg = ExperimentConfig::from_config(Config::parse(in, "tiny.ini"));
  cfg.out_dir = out.string();
  cfg.jobs = 2;
  return cfg;
}

// Strips the trailing wall-time column (timing is measurement metadata, the
// only non-reproducible field of a row).
std::string strip_wall(const std::string& results_csv) {
  std::istringstream in(results_csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.rfind(',');
    out << (pos == std::string::npos ? line : line.substr(0, pos)) << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("ingest round trips and validates shapes") {
  const auto dir = fresh_dir("tse_ingest");
  const auto& preset = solver::ring_road_preset(solver::RingKind::hyperbolic);
  const auto path = (dir / "ring.csv").string();
  write_field_csv(preset.field, path);

  std::ostringstream warnings;
  const DensityField back = ingest_grid(path, FdParams(1.0, 1.0), &warnings);
  CHECK(back.grid() == preset.field.grid());
  CHECK(back.values() == preset.field.values());
  CHECK(warnings.str().empty());

  // emit -> ingest -> emit is idempotent
  const auto path2 = (dir / "ring2.csv").string();
  write_field_csv(back, path2);
  CHECK(slurp(path) == slurp(path2));
  fs::remove_all(dir);
}

TEST_CASE("ingest accepts field-data-shaped grids and warns on range") {
  const auto dir = fresh_dir("tse_ingest_field");
  // 104 spatial nodes x 540 time rows, ft/s units
  Grid g(0, 2060, 0, 2695, 103, 539);
  DensityField f(g, 0.05);
  f(3, 7) = 0.125;  // above the nominal capacity 0.12
  const auto path = (dir / "field.csv").string();
  write_field_csv(f, path);

  std::ostringstream warnings;
  const DensityField back = ingest_grid(path, FdParams(80.0, 0.12), &warnings);
  CHECK(back.grid().x_nodes() == 104);
  CHECK(back.grid().t_nodes() == 540);
  CHECK(warnings.str().find("above rho_m") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("single-cell experiment writes rows and reruns byte-identically") {
  const auto dir1 = fresh_dir("tse_exp_run1");
  const auto dir2 = fresh_dir("tse_exp_run2");

  auto cfg1 = tiny_config(dir1);
  std::ostringstream log;
  CHECK(run_experiment(cfg1, log) == kExitOk);
  REQUIRE(fs::exists(dir1 / "results.csv"));
  REQUIRE(fs::exists(dir1 / "manifest.txt"));

  const std::string results1 = slurp(dir1 / "results.csv");
  CHECK(results1.find(",3,lbfgs,parabolic,") != std::string::npos);
  // one header + one row
  CHECK(std::count(results1.begin(), results1.end(), '\n') == 2);

  const fs::path cell1 = dir1 / "cells" / "icbc10_cv0_lbfgs_parabolic_s3";
  REQUIRE(fs::exists(cell1 / "field.csv"));
  REQUIRE(fs::exists(cell1 / "trace.csv"));
  REQUIRE(fs::exists(cell1 / "net.csv"));
  REQUIRE(fs::exists(cell1 / "manifest.txt"));
  REQUIRE(fs::exists(cell1 / "observations.csv"));
  // 10% of the 2161 initial+boundary nodes
  const std::string obs1 = slurp(cell1 / "observations.csv");
  CHECK(std::count(obs1.begin(), obs1.end(), '\n') == 217);  // header + 216

  auto cfg2 = tiny_config(dir2);
  CHECK(run_experiment(cfg2, log) == kExitOk);
  const fs::path cell2 = dir2 / "cells" / "icbc10_cv0_lbfgs_parabolic_s3";

  CHECK(strip_wall(results1) == strip_wall(slurp(dir2 / "results.csv")));
  CHECK(slurp(cell1 / "field.csv") == slurp(cell2 / "field.csv"));
  CHECK(slurp(cell1 / "trace.csv") == slurp(cell2 / "trace.csv"));
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("failing cells are recorded and the exit code reports them") {
  const auto dir = fresh_dir("tse_exp_fail");
  auto cfg = tiny_config(dir);
  cfg.ic_bc_fractions = {1e-6};  // keeps zero observations -> cell fails
  std::ostringstream log;
  CHECK(run_experiment(cfg, log) == kExitPartialFailure);
  const std::string results = slurp(dir / "results.csv");
  CHECK(results.find("failed") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("baseline reconstructs the ring preset and validates completeness") {
  const auto dir = fresh_dir("tse_baseline");
  auto cfg = tiny_config(dir);
  cfg.forms = {train::PdeForm::hyperbolic};
  std::ostringstream log;
  CHECK(run_baseline(cfg, log) == kExitOk);
  REQUIRE(fs::exists(dir / "baseline.csv"));
  const std::string row = slurp(dir / "baseline.csv");
  CHECK(row.find("lax_friedrichs") != std::string::npos);

  const auto& preset = solver::ring_road_preset(solver::RingKind::hyperbolic);
  const DensityField recon = read_field_csv((dir / "baseline_field.csv").string());
  CHECK(relative_l2(preset.field, recon) <= 0.08);

  // constant dataset reconstructs exactly
  Grid g(0, 1, 0, 0.5, 16, 16);
  const auto const_path = (dir / "const.csv").string();
  write_field_csv(DensityField(g, 0.3), const_path);
  auto cfg_const = tiny_config(dir);
  cfg_const.source = const_path;
  cfg_const.forms = {train::PdeForm::hyperbolic};
  CHECK(run_baseline(cfg_const, log) == kExitOk);
  const DensityField recon_const = read_field_csv((dir / "baseline_field.csv").string());
  CHECK(relative_l2(DensityField(g, 0.3), recon_const) == 0.0);
  fs::remove_all(dir);
}

TEST_CASE("baseline names the incomplete boundary column") {
  const auto dir = fresh_dir("tse_baseline_bad");
  Grid g(0, 1, 0, 0.5, 16, 16);
  DensityField f(g, 0.3);
  f(5, g.nx) = std::nan("");  // hole in the right boundary series
  const auto path = (dir / "holes.csv").string();
  write_field_csv(f, path);

  auto cfg = tiny_config(dir);
  cfg.source = path;
  cfg.forms = {train::PdeForm::hyperbolic};
  std::ostringstream log;
  try {
    run_baseline(cfg, log);
    FAIL("expected an error about the right boundary column");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("right boundary column") != std::string::npos);
    CHECK(msg.find("x = 1") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("diffusion sweep emits one sorted row per distinct epsilon") {
  const auto dir = fresh_dir("tse_sweep");
  auto cfg = tiny_config(dir);
  cfg.sweep_epsilons = {0.1, 0.05, 0.1};  // unsorted with a duplicate
  cfg.lbfgs.max_iters = 5;
  cfg.collocation = 100;
  std::ostringstream log;
  CHECK(diffusion_sweep(cfg, log) == kExitOk);
  CHECK(log.str().find("duplicate") != std::string::npos);

  std::ifstream in(dir / "sweep.csv");
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> eps;
  while (std::getline(in, line)) eps.push_back(std::stod(line.substr(0, line.find(','))));
  CHECK(eps == std::vector<double>{0.05, 0.1});
  fs::remove_all(dir);
}

TEST_CASE("heatmap emission: long format plus snapshots") {
  const auto dir = fresh_dir("tse_plotdata");

  // hand-checkable 2x2 value matrix is below the Grid minimum; use 3 columns
  Grid tiny(0, 1, 0, 3, 2, 1);
  DensityField small(tiny, 0.5);
  const auto small_path = (dir / "small.csv").string();
  emit_heatmap_data(small, small_path);
  std::istringstream in(slurp(small_path));
  std::string line;
  int data_rows = 0, header_rows = 0;
  while (std::getline(in, line)) (line.rfind('#', 0) == 0 ? header_rows : data_rows)++;
  CHECK(header_rows == 1);
  CHECK(data_rows == 6);  // (nt+1) * (nx+1)

  // snapshots: 6 files of nx+1 rows at t = k * t1/6
  Grid g(0, 1, 0, 3, 4, 6);
  DensityField f(g);
  for (int n = 0; n <= g.nt; ++n)
    for (int i = 0; i <= g.nx; ++i) f(n, i) = n + 0.1 * i;
  const auto path = (dir / "heat.csv").string();
  emit_heatmap_data(f, path);
  for (int k = 0; k < 6; ++k) {
    const fs::path snap = dir / ("heat_snap" + std::to_string(k) + ".csv");
    REQUIRE(fs::exists(snap));
    std::istringstream sin(slurp(snap));
    int rows = 0;
    double first_rho = -1;
    while (std::getline(sin, line)) {
      if (rows == 0) first_rho = std::stod(line.substr(line.find(',') + 1));
      ++rows;
    }
    CHECK(rows == g.x_nodes());
    CHECK(first_rho == doctest::Approx(k));  // row n = k at x = 0
  }
  fs::remove_all(dir);
}

TEST_CASE("dataset generation writes both ring fields and the manifest") {
  const auto dir = fresh_dir("tse_gen");
  auto cfg = tiny_config(dir);
  std::ostringstream log;
  CHECK(generate_datasets(cfg, log) == kExitOk);
  const auto hyp = read_field_csv((dir / "ring_hyperbolic.csv").string());
  const auto par = read_field_csv((dir / "ring_parabolic.csv").string());
  CHECK(relative_mse_diff(hyp, par) <= 0.01);
  CHECK(slurp(dir / "manifest.txt").find("parabolic_epsilon") != std::string::npos);
  fs::remove_all(dir);
}
