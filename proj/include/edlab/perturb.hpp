#pragma once

#include <cstddef>
#include <span>

#include "edlab/energy_model.hpp"
#include "edlab/ndcore.hpp"

namespace edlab {

struct GaussianKernel {
  double t = 1.0;
};

struct BernoulliKernel {
  double eps = 0.05;
  std::size_t d = 0;
};

/// x + sqrt(t) xi with xi ~ N(0, I) drawn from `rng`. Returns a column.
Dense gaussian_perturb(std::span<const double> x, double t, RngStream& rng);

/// One Bernoulli(eps) mask of length d; consumes exactly d uniforms.
Dense bernoulli_mask(std::size_t d, double eps, RngStream& rng);
/// Elementwise addition modulo 2 of two {0,1} vectors.
Dense xor_bits(std::span<const double> a, std::span<const double> b);
/// bits XOR a fresh Bernoulli(eps) mask.
Dense bernoulli_perturb(std::span<const double> bits, double eps, RngStream& rng);

enum class PotentialStatus { ok, overflow };

struct PotentialEstimate {
  double value = 0.0;
  PotentialStatus status = PotentialStatus::ok;
  /// value <= min(E_j, anchor - ln w) + ln M (only meaningful when w > 0).
  bool bound_holds = true;
};

/// -ln((w/M) exp(-anchor) + (1/M) sum_j exp(-E_j)) from precomputed contrast
/// energies. With w = 0 and every E_j non-finite the result is +inf with
/// status overflow.
PotentialEstimate contrastive_potential_from_energies(std::span<const double> contrast_energies,
                                                      double w, double anchor_energy);

/// Monte Carlo contrastive potential at y with M fresh draws y + sqrt(t) xi'_j.
PotentialEstimate contrastive_potential_mc(const EnergyModel& model, double t,
                                           std::span<const double> y, std::size_t m, double w,
                                           double anchor_energy, RngStream& rng);

/// Closed form for U(x) = |x - mu|^2 / (2 sigma2) under the Gaussian kernel:
/// |y - mu|^2 / (2 (sigma2 + t)) + (d/2) ln((sigma2 + t) / sigma2).
double contrastive_potential_gaussian_exact(std::span<const double> mu, double sigma2, double t,
                                            std::span<const double> y);

}  // namespace edlab
