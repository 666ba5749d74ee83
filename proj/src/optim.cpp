#include "edlab/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace edlab {

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad) {
  if (params.size() != grad.size()) throw std::invalid_argument("adam_step: shape mismatch");
  if (state.m.empty()) {
    state.m = Dense(params.size(), 1);
    state.v = Dense(params.size(), 1);
  } else if (state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: parameter count changed between steps");
  }
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * grad[k];
    state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * grad[k] * grad[k];
    const double m_hat = state.m[k] / c1;
    const double v_hat = state.v[k] / c2;
    params[k] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps_hat);
  }
}

}  // namespace edlab
