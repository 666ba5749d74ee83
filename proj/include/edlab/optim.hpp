#pragma once

#include <cstdint>
#include <span>

#include "edlab/ndcore.hpp"

namespace edlab {

/// Bias-corrected Adam. Moments are sized on the first step.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
  std::uint64_t step_count = 0;
  Dense m;
  Dense v;

  explicit AdamState(double learning_rate = 1e-3) : lr(learning_rate) {}
};

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad);

}  // namespace edlab
