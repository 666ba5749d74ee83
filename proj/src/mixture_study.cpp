#include <cmath>
#include <stdexcept>

#include "edlab/datasets.hpp"
#include "edlab/evalharness.hpp"

namespace edlab {

MixtureObjectiveFn::MixtureObjectiveFn(MixtureObjective kind, Dense data,
                                       const MixtureStudyConfig& cfg, RngStream& rng)
    : kind_(kind), data_(std::move(data)), cfg_(cfg) {
  if (data_.rows() == 0 || data_.cols() != 1) {
    throw std::invalid_argument("mixture objective: data must be a non-empty column");
  }
  // contrast points do not depend on rho, so one draw serves every evaluation
  if (kind_ == MixtureObjective::ed) contrast_ = ed_gaussian_contrast(data_, cfg_.t, cfg_.m, rng);
}

double MixtureObjectiveFn::operator()(double rho) const {
  const std::size_t n = data_.rows();
  switch (kind_) {
    case MixtureObjective::ed: {
      const EnergyModel model = EnergyModel::mixture1d(rho);
      return ed_loss_from_contrast(model, data_, contrast_, cfg_.m, cfg_.w, false).loss;
    }
    case MixtureObjective::nll: {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc -= mixture1d_logp(rho, data_[i]);
      return acc / static_cast<double>(n);
    }
    case MixtureObjective::sm: {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = mixture1d_score(cfg_.rho_true, data_[i]) - mixture1d_score(rho, data_[i]);
        acc += 0.5 * r * r;
      }
      return acc / static_cast<double>(n);
    }
  }
  throw std::logic_error("mixture objective: unknown kind");
}

std::vector<double> mixture_objective_curve(MixtureObjective kind, std::span<const double> rho_grid,
                                            const Dense& data, const MixtureStudyConfig& cfg,
                                            RngStream& rng) {
  const MixtureObjectiveFn f(kind, data, cfg, rng);
  std::vector<double> out;
  out.reserve(rho_grid.size());
  for (double rho : rho_grid) {
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("mixture curve: rho must lie in (0, 1)");
    out.push_back(f(rho));
  }
  return out;
}

double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                          double tol) {
  if (!(hi > lo) || !(tol > 0.0)) throw std::invalid_argument("golden section: bad bracket");
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo;
  double b = hi;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double fit_mixture_weight(MixtureObjective kind, const Dense& data, const MixtureStudyConfig& cfg,
                          RngStream& rng) {
  if (kind == MixtureObjective::sm) {
    // flat objective; a fit would only report where the search happened to stop
    throw std::invalid_argument("fit_mixture_weight: kind must be ed or nll");
  }
  const MixtureObjectiveFn f(kind, data, cfg, rng);
  return golden_section_min([&](double rho) { return f(rho); }, 0.01, 0.99, 1e-4);
}

MixtureMseResult mixture_weight_mse(MixtureObjective kind, std::size_t n, std::size_t runs,
                                    const MixtureStudyConfig& cfg, const RngStream& rng) {
  if (runs == 0) throw std::invalid_argument("mixture mse: runs must be >= 1");
  MixtureMseResult out;
  out.estimates.reserve(runs);
  double acc = 0.0;
  for (std::size_t r = 0; r < runs; ++r) {
    RngStream s = rng.split(static_cast<std::uint64_t>(r));
    const Dense data = sample_mixture1d(cfg.rho_true, n, s);
    const double rho = fit_mixture_weight(kind, data, cfg, s);
    out.estimates.push_back(rho);
    acc += (rho - cfg.rho_true) * (rho - cfg.rho_true);
  }
  out.mse = acc / static_cast<double>(runs);
  return out;
}

}  // namespace edlab
