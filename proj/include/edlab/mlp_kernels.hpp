#pragma once

#include <span>
#include <vector>

#include "edlab/energy_model.hpp"

namespace edlab::detail {

// Batched forward/backward over the fixed MLP topology. Points are rows.
std::vector<double> mlp_energies(const Mlp& net, const Dense& points);
void mlp_accumulate_grad_params(const Mlp& net, const Dense& points,
                                std::span<const double> weights, std::span<double> out);
Dense mlp_grad_inputs(const Mlp& net, const Dense& points);
/// One forward pass: energies, then weights from `weigh`, then the weighted
/// parameter gradient from the same tape.
std::vector<double> mlp_energies_and_accumulate(const Mlp& net, const Dense& points,
                                                const EnergyModel::WeightFn& weigh,
                                                std::span<double> out);

}  // namespace edlab::detail
