#pragma once

#include <cstddef>
#include <vector>

#include "edlab/energy_model.hpp"
#include "edlab/ndcore.hpp"
#include "edlab/samplers.hpp"

namespace edlab {

/// Hyperparameters of the ED loss. `t` drives the Gaussian kernel, `eps` the
/// Bernoulli kernel of the discrete variant.
struct EdConfig {
  double t = 1.0;
  std::size_t m = 4;
  double w = 1.0;
  double eps = 0.05;
  void validate() const;
};

struct CdConfig {
  std::size_t mcmc_steps = 1;
  double step_size = 0.1;
};

struct SmConfig {
  double fd_step = 1e-3;
};

struct DsmConfig {
  double t = 1.0;
  double fd_step = 1e-3;
};

enum class LossStatus { ok, diverged };

struct LossResult {
  double loss = 0.0;
  Dense grad;  // empty when the gradient was not requested
  LossStatus status = LossStatus::ok;
  std::size_t bad_index = 0;  // offending batch index when diverged
  std::vector<double> terms;  // per-sample loss terms (ED only)
  /// Per-sample ED terms violating term >= max(ln w, max_j d_ij) - ln M.
  std::size_t bound_violations = 0;
};

/// Energy discrepancy loss
///   (1/N) sum_i ln( w/M + (1/M) sum_j exp(E(x_i) - E(x_i + sqrt(t) xi_i + sqrt(t) xi'_ij)) ).
/// Noise layout: xi for all N points first, then xi'_i (M*d normals) for each i.
LossResult ed_loss_grad(const EnergyModel& model, const Dense& batch, const EdConfig& cfg,
                        RngStream& rng, bool with_grad = true);

/// Contrast points x_i + sqrt(t) xi_i + sqrt(t) xi'_ij with the same noise
/// layout as ed_loss_grad; N*M rows in i-major order.
Dense ed_gaussian_contrast(const Dense& batch, double t, std::size_t m, RngStream& rng);

/// Same loss with the contrast points supplied: `contrast` has N*M rows in
/// i-major order (rows i*M .. i*M+M-1 belong to batch[i]).
LossResult ed_loss_from_contrast(const EnergyModel& model, const Dense& batch,
                                 const Dense& contrast, std::size_t m, double w,
                                 bool with_grad = true);

/// Discrete ED on {0,1}^d with contrast points x ^ xi_i ^ xi'_ij, Bernoulli(eps).
/// Noise layout: N*d uniforms for xi, then M*d uniforms per point for xi'.
LossResult ed_discrete_loss_grad(const EnergyModel& model, const Dense& bits, const EdConfig& cfg,
                                 RngStream& rng, bool with_grad = true);

/// Data-initialised Langevin negatives (cfg.mcmc_steps steps).
ChainResult cd_negatives(const EnergyModel& model, const Dense& batch, const CdConfig& cfg,
                         RngStream& rng);

/// mean E(pos) - mean E(neg); negatives are treated as constants.
LossResult cd_loss_from_points(const EnergyModel& model, const Dense& positives,
                               const Dense& negatives, bool with_grad = true);

LossResult cd_loss_grad(const EnergyModel& model, const Dense& batch, const CdConfig& cfg,
                        RngStream& rng, bool with_grad = true);

/// Explicit score matching -lap E + |grad E|^2 / 2 with central stencils in x.
LossResult sm_loss_grad(const EnergyModel& model, const Dense& batch, const SmConfig& cfg,
                        bool with_grad = true);

/// Denoising score matching 1/2 |grad E(y) - (y - x)/t|^2, y = x + sqrt(t) xi.
LossResult dsm_loss_grad(const EnergyModel& model, const Dense& batch, const DsmConfig& cfg,
                         RngStream& rng, bool with_grad = true);

}  // namespace edlab
