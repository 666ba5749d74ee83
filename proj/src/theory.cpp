#include <bit>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "edlab/evalharness.hpp"

namespace edlab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double mean_of(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double standard_error(std::span<const double> v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  const double n = static_cast<double>(v.size());
  return std::sqrt(acc / (n - 1.0) / n);
}

// ED for N(0,1) data and U = (x - mu)^2 / 2 under gamma_t.
double ed_unit(double mu, double t) {
  return mu * mu * t / (2.0 * (1.0 + t)) - 0.5 * std::log1p(t);
}

// -- discrete enumeration helpers

double kernel(unsigned x, unsigned y, unsigned k, double eps) {
  const int h = std::popcount(x ^ y);
  return std::pow(eps, h) * std::pow(1.0 - eps, static_cast<int>(k) - h);
}

void check_discrete(std::span<const double> p, std::span<const double> u, unsigned k, double eps) {
  if (k == 0 || k > 10) throw std::invalid_argument("discrete ED: k must lie in [1, 10]");
  const std::size_t n = std::size_t{1} << k;
  if (p.size() != n || u.size() != n) throw std::invalid_argument("discrete ED: need 2^k entries");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("discrete ED: eps must lie in (0, 1)");
  for (double v : p) {
    if (!(v > 0.0)) throw std::invalid_argument("discrete ED: p must be strictly positive");
  }
}

// Posterior pi(z | y) proportional to q(y|z) exp(-U(z)), plus U_q(y).
struct Posterior {
  std::vector<double> weights;
  double potential = 0.0;
};

Posterior posterior(std::span<const double> u, unsigned y, unsigned k, double eps) {
  const unsigned n = 1u << k;
  std::vector<double> logs(n);
  for (unsigned z = 0; z < n; ++z) logs[z] = std::log(kernel(y, z, k, eps)) - u[z];
  const double lse = logsumexp(logs);
  Posterior out{std::vector<double>(n), -lse};
  for (unsigned z = 0; z < n; ++z) out.weights[z] = std::exp(logs[z] - lse);
  return out;
}

// Marginal of y under the data: sum_x p(x) q(y|x).
std::vector<double> perturbed_marginal(std::span<const double> p, unsigned k, double eps) {
  const unsigned n = 1u << k;
  std::vector<double> py(n, 0.0);
  for (unsigned y = 0; y < n; ++y) {
    for (unsigned x = 0; x < n; ++x) py[y] += p[x] * kernel(x, y, k, eps);
  }
  return py;
}

}  // namespace

double ed_gaussian_analytic(double mu, double sigma2, double t) {
  if (!(sigma2 > 0.0) || !(t > 0.0)) throw std::invalid_argument("analytic ED: sigma2, t must be > 0");
  const double s = sigma2 + t;
  return (1.0 + mu * mu) / (2.0 * sigma2) - (1.0 + t + mu * mu) / (2.0 * s) -
         0.5 * std::log(s / sigma2);
}

TheoryReport verify_thm2_gap(double mu, double t) {
  const auto t0 = Clock::now();
  TheoryReport r{"thm2_gap"};
  const double ed = ed_gaussian_analytic(mu, 1.0, t);
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  const double cross_entropy = 0.5 * log_2pi + 0.5 * (1.0 + mu * mu);
  const double c = -0.5 * (log_2pi + 1.0 + std::log1p(t));
  // |ED + E[log p_ebm] - c(t)|
  const double gap = std::abs(ed - cross_entropy - c);
  const double closed = mu * mu / (2.0 * (1.0 + t));
  const double bound = mu * mu / (2.0 * t);
  r.lhs = gap;
  r.rhs = closed;
  r.tolerance = 1e-9;
  r.decide();
  r.pass = r.pass && gap <= bound;
  r.details = {{"mu", mu},         {"t", t},   {"ed", ed},       {"ed_closed", ed_unit(mu, t)},
               {"cross_entropy", cross_entropy}, {"c_t", c}, {"bound", bound}};
  r.runtime_s = seconds_since(t0);
  return r;
}

TheoryReport verify_thm2_mc(double mu, double t, std::size_t n, std::size_t m, std::uint64_t seed) {
  const auto t0 = Clock::now();
  TheoryReport r{"thm2_mc"};
  RngStream rng = RngStream(seed).split("thm2_mc");
  const Dense data = draw_normal(rng, n);
  const EnergyModel model = EnergyModel::gauss_quad({mu}, 1.0);
  const EdConfig cfg{t, m, 0.0};
  const LossResult res = ed_loss_grad(model, data, cfg, rng, false);
  const double se = standard_error(res.terms);
  r.lhs = res.loss;
  r.rhs = ed_unit(mu, t);
  r.tolerance = 3.0 * se;
  r.decide();
  r.details = {{"mu", mu}, {"t", t}, {"n", double(n)}, {"m", double(m)}, {"se", se}};
  r.runtime_s = seconds_since(t0);
  return r;
}

double ou_variance(double alpha, double beta, double t) {
  if (alpha == 0.0) return beta * t;
  return beta / (2.0 * alpha) * std::expm1(2.0 * alpha * t);
}

double ou_effective_time(double alpha, double beta, double t) {
  if (alpha == 0.0) return beta * t;
  return -beta / (2.0 * alpha) * std::expm1(-2.0 * alpha * t);
}

double ed_ou_analytic(double mu, double alpha, double beta, double t) {
  // U_q(y) = (y - a mu)^2 / (2 (a^2 + s^2)) + ln(a^2 + s^2) / 2 with a = e^{alpha t};
  // y ~ N(0, a^2 + s^2) under the perturbed data.
  const double a2 = std::exp(2.0 * alpha * t);
  const double v = a2 + ou_variance(alpha, beta, t);
  const double eu = 0.5 * (1.0 + mu * mu);
  const double euq = (v + a2 * mu * mu) / (2.0 * v) + 0.5 * std::log(v);
  return eu - euq;
}

TheoryReport verify_ou_equivalence(double alpha, double beta, double t, double mu) {
  const auto t0 = Clock::now();
  TheoryReport r{"ou_equivalence"};
  const double tau = ou_effective_time(alpha, beta, t);
  r.lhs = ed_ou_analytic(mu, alpha, beta, t);
  r.rhs = ed_unit(mu, tau) - alpha * t;
  r.tolerance = 1e-9;
  r.decide();
  r.details = {{"alpha", alpha}, {"beta", beta}, {"t", t}, {"mu", mu}, {"tau", tau}};
  r.runtime_s = seconds_since(t0);
  return r;
}

TheoryReport verify_ou_equivalence_mc(double alpha, double beta, double t, std::size_t n,
                                      std::size_t m, std::uint64_t seed, double mu) {
  const auto t0 = Clock::now();
  TheoryReport r{"ou_equivalence_mc"};
  if (n < 2 || m == 0) throw std::invalid_argument("ou mc: need n >= 2 and m >= 1");
  RngStream rng = RngStream(seed).split("ou_mc");
  const double a = std::exp(alpha * t);
  const double s = std::sqrt(ou_variance(alpha, beta, t));
  const double log_m = std::log(static_cast<double>(m));
  const Dense x = draw_normal(rng, n);
  const Dense xi = draw_normal(rng, n);
  std::vector<double> terms(n);
  std::vector<double> noise(m);
  std::vector<double> logs(m);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = a * x[i] + s * xi[i];
    rng.fill_normal(noise);
    // x = (y - s xi') / a has density q(y|x) / a in x
    for (std::size_t j = 0; j < m; ++j) {
      const double z = (y - s * noise[j]) / a;
      logs[j] = -0.5 * (z - mu) * (z - mu);
    }
    const double uq = alpha * t - (logsumexp(logs) - log_m);
    terms[i] = 0.5 * (x[i] - mu) * (x[i] - mu) - uq;
  }
  const double se = standard_error(terms);
  r.lhs = mean_of(terms);
  r.rhs = ed_unit(mu, ou_effective_time(alpha, beta, t)) - alpha * t;
  r.tolerance = 3.0 * se;
  r.decide();
  r.details = {{"alpha", alpha}, {"beta", beta}, {"t", t},         {"mu", mu},
               {"n", double(n)}, {"m", double(m)}, {"se", se}};
  r.runtime_s = seconds_since(t0);
  return r;
}

TheoryReport verify_ou_horizon(double alpha, double beta, std::span<const double> ts) {
  const auto t0 = Clock::now();
  TheoryReport r{"ou_horizon"};
  if (!(alpha > 0.0) || ts.empty()) throw std::invalid_argument("ou horizon: need alpha > 0");
  bool monotone = true;
  double prev = -1.0;
  double top = 0.0;
  for (double t : ts) {
    const double tau = ou_effective_time(alpha, beta, t);
    monotone = monotone && tau > prev;
    prev = tau;
    top = std::max(top, tau);
    r.details.emplace_back("tau_at_" + std::to_string(t), tau);
  }
  r.lhs = top;
  r.rhs = beta / (2.0 * alpha);
  r.one_sided = true;
  r.decide();
  r.pass = r.pass && monotone;
  r.details.emplace_back("monotone", monotone ? 1.0 : 0.0);
  r.runtime_s = seconds_since(t0);
  return r;
}

TheoryReport verify_ed_sm_identity(double t, double mu, double sigma2) {
  const auto t0 = Clock::now();
  TheoryReport r{"ed_sm_identity"};
  const double h = 1e-4 * std::max(1.0, t);
  r.lhs = (ed_gaussian_analytic(mu, sigma2, t + h) - ed_gaussian_analytic(mu, sigma2, t - h)) /
          (2.0 * h);
  // y ~ N(0, 1 + t); U_t'' = 1 / (sigma2 + t), U_t' = (y - mu) / (sigma2 + t)
  const double s = sigma2 + t;
  r.rhs = -1.0 / s + (1.0 + t + mu * mu) / (2.0 * s * s);
  r.tolerance = 1e-4;
  r.decide();
  r.details = {{"t", t}, {"mu", mu}, {"sigma2", sigma2}, {"fd_step", h}};
  r.runtime_s = seconds_since(t0);
  return r;
}

TheoryReport verify_sm_limit(double mu, double sigma2) {
  const auto t0 = Clock::now();
  TheoryReport r{"sm_limit"};
  const double t = 1e-5;
  const double s = sigma2 + t;
  r.lhs = -1.0 / s + (1.0 + t + mu * mu) / (2.0 * s * s);
  // 1/2 E|grad log p - grad log p_U|^2 - 1/2 E|grad log p|^2
  const double a = 1.0 / sigma2 - 1.0;
  r.rhs = 0.5 * (a * a + mu * mu / (sigma2 * sigma2)) - 0.5;
  r.tolerance = 1e-3;
  r.decide();
  r.details = {{"t", t}, {"mu", mu}, {"sigma2", sigma2}};
  r.runtime_s = seconds_since(t0);
  return r;
}

double ed_discrete_exact(std::span<const double> p, std::span<const double> u, unsigned k,
                         double eps) {
  check_discrete(p, u, k, eps);
  const unsigned n = 1u << k;
  const std::vector<double> py = perturbed_marginal(p, k, eps);
  double eu = 0.0;
  double euq = 0.0;
  for (unsigned x = 0; x < n; ++x) eu += p[x] * u[x];
  for (unsigned y = 0; y < n; ++y) euq += py[y] * posterior(u, y, k, eps).potential;
  return eu - euq;
}

double ed_discrete_first_variation(std::span<const double> p, std::span<const double> u,
                                   std::span<const double> h, unsigned k, double eps) {
  check_discrete(p, u, k, eps);
  const unsigned n = 1u << k;
  if (h.size() != n) throw std::invalid_argument("discrete ED: direction needs 2^k entries");
  const std::vector<double> py = perturbed_marginal(p, k, eps);
  double out = 0.0;
  for (unsigned x = 0; x < n; ++x) out += p[x] * h[x];
  for (unsigned y = 0; y < n; ++y) {
    const Posterior post = posterior(u, y, k, eps);
    double eh = 0.0;
    for (unsigned z = 0; z < n; ++z) eh += post.weights[z] * h[z];
    out -= py[y] * eh;
  }
  return out;
}

double ed_discrete_second_variation(std::span<const double> p, std::span<const double> u,
                                    std::span<const double> h, unsigned k, double eps) {
  check_discrete(p, u, k, eps);
  const unsigned n = 1u << k;
  if (h.size() != n) throw std::invalid_argument("discrete ED: direction needs 2^k entries");
  const std::vector<double> py = perturbed_marginal(p, k, eps);
  double out = 0.0;
  for (unsigned y = 0; y < n; ++y) {
    const Posterior post = posterior(u, y, k, eps);
    double m1 = 0.0;
    for (unsigned z = 0; z < n; ++z) m1 += post.weights[z] * h[z];
    double var = 0.0;
    for (unsigned z = 0; z < n; ++z) var += post.weights[z] * (h[z] - m1) * (h[z] - m1);
    out += py[y] * var;
  }
  return out;
}

TheoryReport verify_minimizer_discrete(std::span<const double> p, unsigned k, double eps,
                                       std::size_t n_directions, RngStream& rng, double step) {
  const auto t0 = Clock::now();
  TheoryReport r{"minimizer_discrete"};
  const std::size_t n = std::size_t{1} << k;
  std::vector<double> ustar(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0)) throw std::invalid_argument("minimizer check: p must be strictly positive");
    ustar[i] = -std::log(p[i]);
  }
  const double base = ed_discrete_exact(p, ustar, k, eps);
  double worst_first = 0.0;
  double min_increase = std::numeric_limits<double>::infinity();
  double min_second = std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
  std::vector<double> h(n);
  std::vector<double> moved(n);
  for (std::size_t d = 0; d < n_directions; ++d) {
    rng.fill_normal(h);
    worst_first = std::max(worst_first, std::abs(ed_discrete_first_variation(p, ustar, h, k, eps)));
    for (std::size_t i = 0; i < n; ++i) moved[i] = ustar[i] + step * h[i];
    const double inc = ed_discrete_exact(p, moved, k, eps) - base;
    if (!(inc >= 0.0)) ++violations;
    min_increase = std::min(min_increase, inc);
    min_second = std::min(min_second, ed_discrete_second_variation(p, ustar, h, k, eps));
  }
  r.lhs = worst_first;
  r.rhs = 0.0;
  r.tolerance = 1e-10;
  r.decide();
  r.pass = r.pass && violations == 0 && min_second >= 0.0;
  r.details = {{"k", double(k)},
               {"eps", eps},
               {"directions", double(n_directions)},
               {"ed_at_minimizer", base},
               {"min_increase", min_increase},
               {"min_second_variation", min_second},
               {"violations", double(violations)}};
  r.runtime_s = seconds_since(t0);
  return r;
}

double estimator_consistency_error(std::size_t n, std::size_t m, double t, double w, double mu,
                                   std::size_t seeds, std::uint64_t base_seed) {
  if (seeds == 0) throw std::invalid_argument("consistency: seeds must be >= 1");
  const RngStream root = RngStream(base_seed).split("consistency");
  const EnergyModel model = EnergyModel::gauss_quad({mu}, 1.0);
  const EdConfig cfg{t, m, w};
  double acc = 0.0;
  for (std::size_t s = 0; s < seeds; ++s) {
    RngStream rng = root.split(static_cast<std::uint64_t>(s));
    const Dense data = draw_normal(rng, n);
    acc += ed_loss_grad(model, data, cfg, rng, false).loss;
  }
  return std::abs(acc / static_cast<double>(seeds) - ed_unit(mu, t));
}

}  // namespace edlab
