#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "edlab/energy_model.hpp"
#include "edlab/ndcore.hpp"

namespace edlab {

struct LangevinConfig {
  std::size_t steps = 100;
  double step_size = 0.1;
};

struct ChainResult {
  Dense states;
  bool diverged = false;
  std::size_t diverged_step = 0;  // 1-based step at which a state went non-finite
};

/// Unadjusted Langevin: x <- x - (eps/2) grad E(x) + sqrt(eps) w. Each step
/// draws rows*cols normals in row-major order.
ChainResult langevin(const EnergyModel& model, Dense x0, const LangevinConfig& cfg,
                     RngStream& rng);

/// p(s_i = +1 | rest) under E(s) = -s^T J s, i.e. sigmoid(4 (J s)_i).
double ising_conditional_plus(const Dense& coupling, std::span<const double> spins, std::size_t i);

/// One systematic-scan sweep in site order; one uniform per site.
void gibbs_sweep(const Dense& coupling, std::span<double> spins, RngStream& rng);

/// Uniform random start followed by `sweeps` full sweeps.
Dense gibbs_ising(const Dense& coupling, std::size_t sweeps, RngStream& rng);

/// Single chain: burn-in sweeps, then one sample every `thin` sweeps. Rows are spins.
Dense gibbs_chain(const Dense& coupling, std::size_t samples, std::size_t burn_in,
                  std::size_t thin, RngStream& rng);

/// Full one-sweep transition matrix over all 2^d states (state bit i set <=> s_i = +1).
/// Row = from, column = to. Only for small d.
Dense gibbs_sweep_kernel(const Dense& coupling);

/// Boltzmann weights of -s^T J s over the same state indexing.
std::vector<double> ising_boltzmann(const Dense& coupling);

/// max_j |(pi K)_j - pi_j| with pi the Boltzmann vector.
double gibbs_stationarity_error(const Dense& coupling);

}  // namespace edlab
