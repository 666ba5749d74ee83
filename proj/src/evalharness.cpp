#include "edlab/evalharness.hpp"

#include <cmath>
#include <stdexcept>

namespace edlab {

void TheoryReport::decide() {
  if (one_sided) {
    pass = lhs <= rhs;
  } else {
    pass = std::abs(lhs - rhs) <= tolerance;
  }
}

double estimate_log_z(const EnergyModel& model, const Dense& points, std::span<const double> logp) {
  if (points.rows() == 0) throw std::invalid_argument("estimate_log_z: no points");
  if (logp.size() != points.rows()) {
    throw std::invalid_argument("estimate_log_z: logp must have one entry per point");
  }
  std::vector<double> e = model.energies(points);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = -e[i] - logp[i];
  return logsumexp(e) - std::log(static_cast<double>(e.size()));
}

double density_mse(const EnergyModel& model, double log_z, const Dense& grid,
                   std::span<const double> true_logp) {
  if (grid.rows() == 0 || true_logp.size() != grid.rows()) {
    throw std::invalid_argument("density_mse: grid and truth must be aligned and non-empty");
  }
  const std::vector<double> e = model.energies(grid);
  double acc = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double r = -e[i] - log_z - true_logp[i];
    acc += r * r;
  }
  return acc / static_cast<double>(e.size());
}

Dense square_grid(std::size_t n, double bound) {
  if (n < 2) throw std::invalid_argument("square_grid: n must be >= 2");
  Dense g(n * n, 2);
  const double step = 2.0 * bound / static_cast<double>(n - 1);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      g(r * n + c, 0) = -bound + step * static_cast<double>(c);
      g(r * n + c, 1) = -bound + step * static_cast<double>(r);
    }
  }
  return g;
}

}  // namespace edlab
