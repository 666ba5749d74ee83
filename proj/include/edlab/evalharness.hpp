#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "edlab/energy_model.hpp"
#include "edlab/losses.hpp"
#include "edlab/ndcore.hpp"

namespace edlab {

struct TheoryReport {
  TheoryReport() = default;
  explicit TheoryReport(std::string name) : check(std::move(name)) {}

  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  bool one_sided = false;  // pass <=> lhs <= rhs
  bool pass = false;
  double runtime_s = 0.0;
  std::vector<std::pair<std::string, double>> details;

  void decide();
};

// -- density evaluation ------------------------------------------------------

/// Importance-sampled log Z against the data density:
/// logsumexp(-E(x_i) - logp(x_i)) - ln N.
double estimate_log_z(const EnergyModel& model, const Dense& points, std::span<const double> logp);

/// mean over the grid of (-E(x) - logZ - logp_true(x))^2.
double density_mse(const EnergyModel& model, double log_z, const Dense& grid,
                   std::span<const double> true_logp);

/// n x n grid over [-bound, bound]^2; x1 varies fastest.
Dense square_grid(std::size_t n, double bound);

// -- mixture-weight study ----------------------------------------------------

enum class MixtureObjective { ed, nll, sm };

struct MixtureStudyConfig {
  double t = 4.0;
  std::size_t m = 32;
  double w = 1.0;
  double rho_true = 0.2;
};

/// Scalar objective of rho for fixed data. The ED variant freezes its noise at
/// construction, so repeated evaluations are deterministic in rho.
class MixtureObjectiveFn {
 public:
  MixtureObjectiveFn(MixtureObjective kind, Dense data, const MixtureStudyConfig& cfg,
                     RngStream& rng);
  double operator()(double rho) const;

 private:
  MixtureObjective kind_;
  Dense data_;
  Dense contrast_;
  MixtureStudyConfig cfg_;
};

std::vector<double> mixture_objective_curve(MixtureObjective kind, std::span<const double> rho_grid,
                                            const Dense& data, const MixtureStudyConfig& cfg,
                                            RngStream& rng);

/// Golden-section search on [lo, hi] down to bracket width tol.
double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                          double tol);

double fit_mixture_weight(MixtureObjective kind, const Dense& data, const MixtureStudyConfig& cfg,
                          RngStream& rng);

struct MixtureMseResult {
  double mse = 0.0;
  std::vector<double> estimates;
};

/// `runs` independent fits on fresh data of size n; repetition r uses rng.split(r).
MixtureMseResult mixture_weight_mse(MixtureObjective kind, std::size_t n, std::size_t runs,
                                    const MixtureStudyConfig& cfg, const RngStream& rng);

// -- theory checks -----------------------------------------------------------

/// ED between data N(0,1) and U(x) = (x - mu)^2 / (2 sigma2) under gamma_t.
double ed_gaussian_analytic(double mu, double sigma2, double t);

TheoryReport verify_thm2_gap(double mu, double t);
/// ed_loss_grad (w = 0) on N(0,1) data against the analytic ED; tolerance 3 SE.
TheoryReport verify_thm2_mc(double mu, double t, std::size_t n, std::size_t m, std::uint64_t seed);

/// sigma_alpha(t)^2 of the OU kernel dY = alpha Y dt + sqrt(beta) dW.
double ou_variance(double alpha, double beta, double t);
/// Effective Gaussian time of the equivalent Brownian kernel.
double ou_effective_time(double alpha, double beta, double t);
/// Analytic ED under the OU kernel for data N(0,1), U = (x - mu)^2 / 2.
double ed_ou_analytic(double mu, double alpha, double beta, double t);

TheoryReport verify_ou_equivalence(double alpha, double beta, double t, double mu = 1.0);
TheoryReport verify_ou_equivalence_mc(double alpha, double beta, double t, std::size_t n,
                                      std::size_t m, std::uint64_t seed, double mu = 1.0);
/// Effective time over increasing t is monotone and stays below beta / (2 alpha).
TheoryReport verify_ou_horizon(double alpha, double beta, std::span<const double> ts);

/// d/dt ED by central difference against E_{p_t}[-U_t'' + (U_t')^2 / 2].
TheoryReport verify_ed_sm_identity(double t, double mu = 1.0, double sigma2 = 1.0);
/// Small-t limit of the identity's right side against the Fisher-form SM value.
TheoryReport verify_sm_limit(double mu = 1.0, double sigma2 = 1.0);

/// Exact discrete ED by enumeration on {0,1}^k under the Bernoulli(eps) kernel.
/// States are indexed by their bit pattern; u and p have 2^k entries.
double ed_discrete_exact(std::span<const double> p, std::span<const double> u, unsigned k,
                         double eps);
double ed_discrete_first_variation(std::span<const double> p, std::span<const double> u,
                                   std::span<const double> h, unsigned k, double eps);
double ed_discrete_second_variation(std::span<const double> p, std::span<const double> u,
                                    std::span<const double> h, unsigned k, double eps);

TheoryReport verify_minimizer_discrete(std::span<const double> p, unsigned k, double eps,
                                       std::size_t n_directions, RngStream& rng,
                                       double step = 0.1);

/// |mean over seeds of L_{t,M,w} - analytic ED| for N(0,1) data, U = (x - mu)^2 / 2.
double estimator_consistency_error(std::size_t n, std::size_t m, double t, double w, double mu,
                                   std::size_t seeds = 10, std::uint64_t base_seed = 0);

// -- gradient checks ---------------------------------------------------------

struct GradCheck {
  std::string loss;
  double rel_error = 0.0;  // |g - g_fd| / max(|g|, |g_fd|), Euclidean norms
  double grad_norm = 0.0;
};

/// Analytic parameter gradient of one loss kind against central differences
/// with step h, on a random small MLP and batch drawn from `rng`. Stochastic
/// losses replay the same noise for every evaluation; CD keeps its negatives
/// fixed.
GradCheck check_loss_gradient(const std::string& kind, RngStream& rng, double h = 1e-4);

}  // namespace edlab
