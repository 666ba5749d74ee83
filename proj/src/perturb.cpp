#include "edlab/perturb.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace edlab {

Dense gaussian_perturb(std::span<const double> x, double t, RngStream& rng) {
  if (!(t > 0.0)) throw std::invalid_argument("gaussian_perturb: t must be > 0");
  Dense out = draw_normal(rng, x.size());
  const double s = std::sqrt(t);
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] + s * out[k];
  return out;
}

Dense bernoulli_mask(std::size_t d, double eps, RngStream& rng) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("bernoulli: eps must lie in (0, 1)");
  Dense mask(d, 1);
  for (std::size_t k = 0; k < d; ++k) mask[k] = rng.uniform() < eps ? 1.0 : 0.0;
  return mask;
}

Dense xor_bits(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("xor_bits: length mismatch");
  Dense out(a.size(), 1);
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = (a[k] != b[k]) ? 1.0 : 0.0;
  return out;
}

Dense bernoulli_perturb(std::span<const double> bits, double eps, RngStream& rng) {
  const Dense mask = bernoulli_mask(bits.size(), eps, rng);
  return xor_bits(bits, mask.span());
}

PotentialEstimate contrastive_potential_from_energies(std::span<const double> contrast_energies,
                                                      double w, double anchor_energy) {
  if (contrast_energies.empty()) throw std::invalid_argument("contrastive potential: M must be >= 1");
  if (!(w >= 0.0)) throw std::invalid_argument("contrastive potential: w must be >= 0");
  const double log_m = std::log(static_cast<double>(contrast_energies.size()));

  std::vector<double> terms;
  terms.reserve(contrast_energies.size() + 1);
  bool any_nan = false;
  for (double e : contrast_energies) {
    any_nan = any_nan || std::isnan(e);
    terms.push_back(-e);
  }
  if (w > 0.0) {
    any_nan = any_nan || !std::isfinite(anchor_energy);
    terms.push_back(std::log(w) - anchor_energy);
  }
  if (any_nan) return {std::numeric_limits<double>::infinity(), PotentialStatus::overflow, true};

  double top = -std::numeric_limits<double>::infinity();
  for (double v : terms) top = std::max(top, v);
  if (top == -std::numeric_limits<double>::infinity()) {
    return {std::numeric_limits<double>::infinity(), PotentialStatus::overflow, true};
  }
  const double value = -logsumexp(terms) + log_m;
  const double bound = -top + log_m;
  return {value, PotentialStatus::ok, value <= bound};
}

PotentialEstimate contrastive_potential_mc(const EnergyModel& model, double t,
                                           std::span<const double> y, std::size_t m, double w,
                                           double anchor_energy, RngStream& rng) {
  if (m == 0) throw std::invalid_argument("contrastive potential: M must be >= 1");
  if (!(t > 0.0)) throw std::invalid_argument("contrastive potential: t must be > 0");
  const std::size_t d = y.size();
  Dense points(m, d);
  rng.fill_normal(points.span());
  const double s = std::sqrt(t);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < d; ++k) points(j, k) = y[k] + s * points(j, k);
  }
  const std::vector<double> e = model.energies(points);
  return contrastive_potential_from_energies(e, w, anchor_energy);
}

double contrastive_potential_gaussian_exact(std::span<const double> mu, double sigma2, double t,
                                            std::span<const double> y) {
  if (!(sigma2 > 0.0) || !(t > 0.0)) {
    throw std::invalid_argument("contrastive potential: sigma2 and t must be > 0");
  }
  if (mu.size() != y.size()) throw std::invalid_argument("contrastive potential: dimension mismatch");
  double r2 = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) r2 += (y[k] - mu[k]) * (y[k] - mu[k]);
  const double d = static_cast<double>(y.size());
  return r2 / (2.0 * (sigma2 + t)) + 0.5 * d * std::log1p(t / sigma2);
}

}  // namespace edlab
