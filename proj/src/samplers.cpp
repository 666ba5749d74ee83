#include "edlab/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edlab {

ChainResult langevin(const EnergyModel& model, Dense x0, const LangevinConfig& cfg,
                     RngStream& rng) {
  if (cfg.steps == 0) throw std::invalid_argument("langevin: steps must be >= 1");
  if (!(cfg.step_size > 0.0)) throw std::invalid_argument("langevin: step size must be > 0");
  ChainResult out{std::move(x0)};
  Dense noise(out.states.rows(), out.states.cols());
  const double half = 0.5 * cfg.step_size;
  const double scale = std::sqrt(cfg.step_size);
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    const Dense g = model.grad_inputs(out.states);
    rng.fill_normal(noise.span());
    for (std::size_t k = 0; k < out.states.size(); ++k) {
      out.states[k] += -half * g[k] + scale * noise[k];
    }
    if (!out.states.all_finite()) {
      out.diverged = true;
      out.diverged_step = step;
      break;
    }
  }
  return out;
}

double ising_conditional_plus(const Dense& coupling, std::span<const double> spins, std::size_t i) {
  double field = 0.0;
  for (std::size_t j = 0; j < coupling.cols(); ++j) field += coupling(i, j) * spins[j];
  return sigmoid(4.0 * field);
}

void gibbs_sweep(const Dense& coupling, std::span<double> spins, RngStream& rng) {
  for (std::size_t i = 0; i < spins.size(); ++i) {
    const double p = ising_conditional_plus(coupling, spins, i);
    spins[i] = rng.uniform() < p ? 1.0 : -1.0;
  }
}

Dense gibbs_ising(const Dense& coupling, std::size_t sweeps, RngStream& rng) {
  if (coupling.rows() != coupling.cols()) throw std::invalid_argument("gibbs: J must be square");
  Dense s(coupling.rows(), 1);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = rng.uniform() < 0.5 ? 1.0 : -1.0;
  for (std::size_t k = 0; k < sweeps; ++k) gibbs_sweep(coupling, s.span(), rng);
  return s;
}

Dense gibbs_chain(const Dense& coupling, std::size_t samples, std::size_t burn_in,
                  std::size_t thin, RngStream& rng) {
  if (thin == 0) throw std::invalid_argument("gibbs_chain: thin must be >= 1");
  Dense s = gibbs_ising(coupling, burn_in, rng);
  Dense out(samples, s.size());
  for (std::size_t n = 0; n < samples; ++n) {
    for (std::size_t k = 0; k < thin; ++k) gibbs_sweep(coupling, s.span(), rng);
    std::copy(s.span().begin(), s.span().end(), out.row(n).begin());
  }
  return out;
}

namespace {

std::vector<double> spins_of(std::size_t state, std::size_t d) {
  std::vector<double> s(d);
  for (std::size_t i = 0; i < d; ++i) s[i] = (state >> i) & 1U ? 1.0 : -1.0;
  return s;
}

std::size_t check_small(const Dense& coupling) {
  const std::size_t d = coupling.rows();
  if (coupling.cols() != d || d == 0 || d > 16) {
    throw std::invalid_argument("gibbs kernel: J must be square with 1..16 sites");
  }
  return d;
}

}  // namespace

Dense gibbs_sweep_kernel(const Dense& coupling) {
  const std::size_t d = check_small(coupling);
  const std::size_t n = std::size_t{1} << d;
  Dense k(n, n);
  for (std::size_t from = 0; from < n; ++from) {
    for (std::size_t to = 0; to < n; ++to) {
      // sites before i already updated to `to`, the rest still at `from`
      std::vector<double> s = spins_of(from, d);
      const std::vector<double> target = spins_of(to, d);
      double p = 1.0;
      for (std::size_t i = 0; i < d && p > 0.0; ++i) {
        const double plus = ising_conditional_plus(coupling, s, i);
        p *= target[i] > 0.0 ? plus : 1.0 - plus;
        s[i] = target[i];
      }
      k(from, to) = p;
    }
  }
  return k;
}

std::vector<double> ising_boltzmann(const Dense& coupling) {
  const std::size_t d = check_small(coupling);
  const std::size_t n = std::size_t{1} << d;
  std::vector<double> logw(n);
  for (std::size_t st = 0; st < n; ++st) {
    const std::vector<double> s = spins_of(st, d);
    double q = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) q += s[i] * coupling(i, j) * s[j];
    }
    logw[st] = q;
  }
  const double lz = logsumexp(logw);
  for (double& v : logw) v = std::exp(v - lz);
  return logw;
}

double gibbs_stationarity_error(const Dense& coupling) {
  const Dense k = gibbs_sweep_kernel(coupling);
  const std::vector<double> pi = ising_boltzmann(coupling);
  double err = 0.0;
  for (std::size_t to = 0; to < pi.size(); ++to) {
    double mass = 0.0;
    for (std::size_t from = 0; from < pi.size(); ++from) mass += pi[from] * k(from, to);
    err = std::max(err, std::abs(mass - pi[to]));
  }
  return err;
}

}  // namespace edlab
