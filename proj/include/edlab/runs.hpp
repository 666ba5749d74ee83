#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edlab/config.hpp"
#include "edlab/datasets.hpp"
#include "edlab/energy_model.hpp"
#include "edlab/losses.hpp"
#include "edlab/samplers.hpp"

namespace edlab {

struct MetricRow {
  std::size_t iter = 0;
  double loss = 0.0;
  double density_mse = 0.0;  // NaN when the dataset has no exact density
  double log_z = 0.0;
};

struct TrainSummary {
  std::string status = "ok";  // ok | diverged
  std::size_t iters_completed = 0;
  std::optional<std::size_t> diverged_at;
  std::vector<MetricRow> metrics;
  std::optional<EnergyModel> model;
};

/// Width-list MLP spec for a config; ed-discrete models read 32 Gray-code bits.
MlpSpec model_spec(const RunConfig& cfg);
EnergyModel build_model(const RunConfig& cfg, RngStream& rng);

/// Loss and gradient of the configured kind on one batch of 2D points
/// (Gray-encoded first for ed-discrete).
LossResult run_loss(const EnergyModel& model, const Dense& points, const RunConfig& cfg,
                    RngStream& rng, bool with_grad);

/// Full training run writing config.toml, metrics.csv, energy_grid.csv,
/// samples.csv, model.ckpt and status.json under out_dir. Divergence is
/// recorded in status.json rather than raised.
TrainSummary cmd_train(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Langevin chains started uniformly over the bounding box; writes x1,x2 rows
/// unless out_csv is empty.
Dense cmd_sample(const std::filesystem::path& ckpt, std::size_t n, const LangevinConfig& lcfg,
                 std::uint64_t seed, const std::filesystem::path& out_csv);

struct DensityReport {
  double log_z = 0.0;
  double density_mse = 0.0;
};

/// log Z and grid density MSE of a checkpoint against a dataset with exact log-density.
DensityReport cmd_eval_density(const std::filesystem::path& ckpt, const std::string& dataset,
                               std::size_t grid, std::size_t logz_n, std::uint64_t seed);

/// Single-site Gibbs over bit inputs of an arbitrary energy (systematic scan,
/// chains started uniformly).
Dense gibbs_bits(const EnergyModel& model, std::size_t chains, std::size_t sweeps, RngStream& rng);

// CSV helpers shared with the experiments.
std::string csv_points(const Dense& points, const std::vector<std::string>& header);
std::string metrics_csv(const std::vector<MetricRow>& rows);

}  // namespace edlab
