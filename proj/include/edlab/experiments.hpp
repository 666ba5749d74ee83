#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "edlab/config.hpp"
#include "edlab/evalharness.hpp"
#include "edlab/runs.hpp"

namespace edlab {

// -- mixture weight study ----------------------------------------------------

struct MixtureExperimentConfig {
  double rho_true = 0.2;
  std::size_t n_fit = 10000;  // single fits and curves
  std::size_t n_mse = 2000;   // per repetition of the MSE table
  std::size_t runs = 50;
  std::size_t m = 32;
  double w = 1.0;
  double t_fit = 4.0;
  std::vector<double> ts{0.25, 1.0, 4.0, 16.0};
  std::uint64_t seed = 0;

  void apply(const KeyValues& kv);  // keys under "mixture."
};

struct MixtureMseRow {
  std::string objective;  // nll | ed
  double t = 0.0;         // NaN for nll
  double mse = 0.0;
};

struct MixtureExperimentResult {
  std::vector<double> rho_grid;
  std::vector<double> nll_curve;
  std::vector<double> sm_curve;
  std::vector<std::vector<double>> ed_curves;  // one per cfg.ts entry
  double nll_fit = 0.0;
  double ed_fit = 0.0;
  std::vector<MixtureMseRow> mse;
};

/// Writes curves.csv, metrics.csv (MSE table) and status.json when out is non-empty.
MixtureExperimentResult run_mixture_experiment(const MixtureExperimentConfig& cfg,
                                               const std::filesystem::path& out);

// -- w-stabilisation study ---------------------------------------------------

struct WStudyConfig {
  std::vector<double> ws{0.0, 0.05, 0.25, 2.0};
  std::size_t n = 4096;
  std::size_t batch = 128;
  std::size_t epochs = 50;
  double lr = 0.01;
  double t = 1.0;
  std::size_t m = 4;
  std::uint64_t seed = 0;

  void apply(const KeyValues& kv);  // keys under "wstudy."
};

struct WStudyRun {
  double w = 0.0;
  std::string status = "ok";
  std::size_t epochs_completed = 0;
  double final_loss = 0.0;
  std::size_t bound_violations = 0;
  std::size_t batches = 0;
  std::vector<double> epoch_loss;
  std::vector<double> energy;  // on the result's x grid
};

struct WStudyResult {
  std::vector<double> x_grid;
  std::vector<WStudyRun> runs;
};

/// Toy SiLU net 1 -> 2 -> 2 -> 1 trained with ED on N(0,1) data for each w.
/// Writes loss.csv, energy.csv and status.json when out is non-empty.
WStudyResult run_wstudy(const WStudyConfig& cfg, const std::filesystem::path& out);

// -- Ising recovery ----------------------------------------------------------

struct IsingExperimentConfig {
  std::size_t h = 8;
  std::size_t w_sites = 8;
  double strength = 0.25;
  std::size_t samples = 2000;
  std::size_t burn_in = 200;
  std::size_t thin = 10;
  double eps = 0.05;
  std::size_t m = 32;
  double w = 1.0;
  std::size_t batch = 256;
  std::size_t iters = 1000;
  double lr = 0.01;
  std::uint64_t seed = 0;

  void apply(const KeyValues& kv);  // keys under "ising."
};

struct IsingExperimentResult {
  Dense j_true;
  Dense j_hat;
  double edge_mean_abs = 0.0;
  double non_edge_mean_abs = 0.0;
  double ratio = 0.0;
  std::vector<double> loss;
  std::string status = "ok";
};

/// Gibbs data from the lattice model, then ED-discrete training of a bilinear
/// model from J = 0. Writes coupling.csv, metrics.csv, status.json.
IsingExperimentResult run_ising_experiment(const IsingExperimentConfig& cfg,
                                           const std::filesystem::path& out);

// -- ablation over (t, M) and (w, M) -----------------------------------------

struct AblationConfig {
  std::vector<double> ts{0.25, 1.0, 4.0};
  std::vector<double> ws{0.0, 0.25, 1.0, 2.0};
  std::vector<std::size_t> ms{4, 16, 32};
  std::size_t iters = 2000;
  std::size_t workers = 0;  // 0 = hardware concurrency

  void apply(const KeyValues& kv);  // keys under "ablation."
};

struct AblationRow {
  std::string sweep;  // tm | wm
  double t = 0.0;
  std::size_t m = 0;
  double w = 0.0;
  double density_mse = 0.0;
  std::string status;
};

std::vector<AblationRow> run_ablation(const RunConfig& base, const AblationConfig& cfg,
                                      const std::filesystem::path& out);

// -- dispatch ------------------------------------------------------------------

const std::vector<std::string>& experiment_names();

/// Runs a named experiment with "<name>.*" keys from `extra`; returns a JSON
/// summary. Graycode trains through cmd_train with the ed-discrete loss.
std::string run_named_experiment(const std::string& name, const RunConfig& base,
                                 const KeyValues& extra, const std::filesystem::path& out);

const std::vector<std::string>& verify_check_names();

/// One or more reports for a named check ("all" runs every check).
std::vector<TheoryReport> run_verify(const std::string& name, std::uint64_t seed);

std::string report_json(const TheoryReport& r);

}  // namespace edlab
