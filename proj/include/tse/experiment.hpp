#ifndef TSE_EXPERIMENT_HPP
#define TSE_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tse/config.hpp"
#include "tse/grid.hpp"
#include "tse/sampling.hpp"
#include "tse/solver.hpp"
#include "tse/train.hpp"

namespace tse::cli {

/// Exit codes shared by every verb.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitPartialFailure = 2;

/// Declarative description of one experiment run; the scenario lists expand
/// as a cross product (seeds x forms x optimizers x fractions x cv levels).
struct ExperimentConfig {
  // [dataset]
  std::string source = "ring";  // "ring" or a field-CSV path
  FdParams fd;                  // v_f, rho_m
  double ring_epsilon = solver::kRingDiffusion;  // parabolic dataset diffusion

  // [physics]
  std::vector<train::PdeForm> forms = {train::PdeForm::parabolic};
  double physics_epsilon = solver::kRingDiffusion;

  // [sampling]
  std::vector<double> ic_bc_fractions = {0.2};
  std::vector<int> cv_points = {0};
  int cv_count = 12;
  std::vector<double> eulerian_positions;
  std::vector<sampling::DropoutInterval> eulerian_dropout;
  int collocation = 10000;

  // [net]
  std::vector<int> hidden = net::MlpShape::canonical().hidden;

  // [optimizer]
  std::vector<train::OptimizerKind> optimizers = {train::OptimizerKind::lbfgs};
  train::AdamOptions adam;
  train::LbfgsOptions lbfgs;

  // [cost]
  train::CostWeights weights;

  // [run]
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "runs/out";
  int jobs = 1;

  // [sweep]
  std::vector<double> sweep_epsilons;

  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig from_config(const Config& cfg);

  /// Canonical text echo of every setting; written to manifests.
  std::string echo() const;
  /// Hash identifying the experiment content (everything except the output
  /// directory and worker count).
  std::string digest() const;
};

struct ResultRow {
  std::string digest;
  std::uint64_t seed = 0;
  std::string optimizer;
  std::string form;
  int n_o1 = 0;
  int n_o2 = 0;
  double rel_l2 = 0;
  std::string status = "ok";
  double wall_s = 0;

  /// CSV line; wall time is the last column so determinism checks can strip
  /// the single timing field.
  std::string csv() const;
};

inline constexpr char kResultHeader[] =
    "config,seed,optimizer,form,n_o1,n_o2,rel_l2,status,wall_s";

/// Reads a field CSV and validates it; densities outside [0, rho_m] and
/// non-finite cells warn (field data may exceed nominal capacity or carry
/// holes) instead of failing.
DensityField ingest_grid(const std::string& path, const FdParams& fd,
                         std::ostream* warnings = nullptr);

/// Runs the full scenario matrix; writes results.csv, per-cell artifacts and
/// manifests under cfg.out_dir. Returns an exit code.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

/// Lax-Friedrichs reconstruction from the dataset's complete initial and
/// boundary series, recorded alongside the PIDL rows for comparison.
int run_baseline(const ExperimentConfig& cfg, std::ostream& log);

/// Trains parabolic PIDL for every diffusion coefficient in
/// cfg.sweep_epsilons and emits a sorted (epsilon, error) table.
int diffusion_sweep(const ExperimentConfig& cfg, std::ostream& log);

/// Long-format "x,t,rho" CSV plus six snapshot CSVs at equal fractions of
/// the time horizon (matching rows land on the nearest grid row). Snapshot k
/// goes to <out minus .csv>_snap<k>.csv. Custom times may be supplied.
void emit_heatmap_data(const DensityField& field, const std::string& out_path,
                       const std::vector<double>* snapshot_times = nullptr);

/// Builds the dataset an experiment trains on: ring presets per form, or the
/// ingested external grid (shared by both forms).
DensityField make_dataset(const ExperimentConfig& cfg, train::PdeForm form,
                          std::ostream* warnings = nullptr);

/// Writes the ring presets (both kinds) plus a parameter manifest.
int generate_datasets(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace tse::cli

#endif  // TSE_EXPERIMENT_HPP
