#include "edlab/energy_model.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>

#include "edlab/mlp_kernels.hpp"

namespace edlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

struct MixtureTerms {
  double energy;
  double log_left;   // log g1(x)
  double log_right;  // log g2(x)
};

MixtureTerms mixture_terms(const Mixture1D& m, double x) {
  const double dl = x - Mixture1D::kMeanLeft;
  const double dr = x - Mixture1D::kMeanRight;
  const double lg1 = -0.5 * dl * dl - kHalfLog2Pi;
  const double lg2 = -0.5 * dr * dr - kHalfLog2Pi;
  const double e = -logsumexp({std::log(m.rho) + lg1, std::log1p(-m.rho) + lg2});
  return {e, lg1, lg2};
}

double ising_bits_energy(const Dense& J, std::span<const double> bits) {
  const std::size_t d = J.rows();
  double e = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double si = 2.0 * bits[i] - 1.0;
    double js = 0.0;
    for (std::size_t j = 0; j < d; ++j) js += J(i, j) * (2.0 * bits[j] - 1.0);
    e -= si * js;
  }
  return e;
}

void validate_ising(const Dense& J) {
  if (J.rows() != J.cols()) throw std::invalid_argument("ising: coupling must be square");
  for (std::size_t i = 0; i < J.rows(); ++i) {
    if (J(i, i) != 0.0) throw std::invalid_argument("ising: coupling diagonal must be zero");
    for (std::size_t j = 0; j < i; ++j) {
      if (J(i, j) != J(j, i)) throw std::invalid_argument("ising: coupling must be symmetric");
    }
  }
}

}  // namespace

// -- MlpSpec / Params --------------------------------------------------------

std::vector<std::size_t> MlpSpec::widths() const {
  std::vector<std::size_t> w;
  w.push_back(input_dim);
  w.insert(w.end(), hidden_widths.begin(), hidden_widths.end());
  w.push_back(1);
  return w;
}

std::size_t MlpSpec::param_count() const {
  const auto w = widths();
  std::size_t n = 0;
  for (std::size_t l = 1; l < w.size(); ++l) n += w[l] * w[l - 1] + w[l];
  return n;
}

void MlpSpec::validate() const {
  if (input_dim == 0) throw std::invalid_argument("MlpSpec: input_dim must be >= 1");
  for (auto h : hidden_widths) {
    if (h == 0) throw std::invalid_argument("MlpSpec: hidden widths must be >= 1");
  }
}

Params Params::zeros(const MlpSpec& spec) {
  spec.validate();
  Params p;
  const auto w = spec.widths();
  std::size_t offset = 0;
  for (std::size_t l = 1; l < w.size(); ++l) {
    LayerSlot s{w[l - 1], w[l], offset, offset + w[l] * w[l - 1]};
    offset = s.bias_offset + w[l];
    p.table.push_back(s);
  }
  p.flat = Dense(offset, 1);
  return p;
}

Params init_xavier(const MlpSpec& spec, RngStream& rng) {
  Params p = Params::zeros(spec);
  for (const auto& s : p.table) {
    const double std_dev = std::sqrt(2.0 / static_cast<double>(s.in + s.out));
    std::span<double> w(p.flat.data() + s.weight_offset, s.in * s.out);
    rng.fill_normal(w);
    for (double& v : w) v *= std_dev;
  }
  return p;
}

// -- EnergyModel -------------------------------------------------------------

EnergyModel::EnergyModel(Variant v) : v_(std::move(v)) {
  std::visit(overloaded{
                 [](const Mlp& m) {
                   m.spec.validate();
                   if (m.params.size() != m.spec.param_count()) {
                     throw std::invalid_argument("mlp: parameter count does not match spec");
                   }
                 },
                 [](const Mixture1D& m) {
                   if (!(m.rho >= 0.0 && m.rho <= 1.0)) {
                     throw std::invalid_argument("mixture1d: rho must lie in [0, 1]");
                   }
                 },
                 [](const IsingBilinear& m) { validate_ising(m.coupling); },
                 [](const GaussQuad& m) {
                   if (m.mean.empty()) throw std::invalid_argument("gauss_quad: empty mean");
                   if (!(m.var > 0.0)) throw std::invalid_argument("gauss_quad: var must be > 0");
                 },
             },
             v_);
}

EnergyModel EnergyModel::mlp(MlpSpec spec, Params params) {
  return EnergyModel(Mlp{std::move(spec), std::move(params)});
}
EnergyModel EnergyModel::mixture1d(double rho) { return EnergyModel(Mixture1D{rho}); }
EnergyModel EnergyModel::ising(Dense coupling) {
  return EnergyModel(IsingBilinear{std::move(coupling)});
}
EnergyModel EnergyModel::gauss_quad(std::vector<double> mean, double var) {
  return EnergyModel(GaussQuad{std::move(mean), var});
}

std::string EnergyModel::kind() const {
  return std::visit(overloaded{
                        [](const Mlp&) { return std::string("mlp"); },
                        [](const Mixture1D&) { return std::string("mixture1d"); },
                        [](const IsingBilinear&) { return std::string("ising"); },
                        [](const GaussQuad&) { return std::string("gauss_quad"); },
                    },
                    v_);
}

std::size_t EnergyModel::input_dim() const {
  return std::visit(overloaded{
                        [](const Mlp& m) { return m.spec.input_dim; },
                        [](const Mixture1D&) { return std::size_t{1}; },
                        [](const IsingBilinear& m) { return m.coupling.rows(); },
                        [](const GaussQuad& m) { return m.mean.size(); },
                    },
                    v_);
}

std::size_t EnergyModel::param_count() const {
  return std::visit(overloaded{
                        [](const Mlp& m) { return m.params.size(); },
                        [](const Mixture1D&) { return std::size_t{1}; },
                        [](const IsingBilinear& m) {
                          const auto d = m.coupling.rows();
                          return d * (d - 1) / 2;
                        },
                        [](const GaussQuad& m) { return m.mean.size() + 1; },
                    },
                    v_);
}

bool EnergyModel::supports_grad_params() const { return !std::holds_alternative<GaussQuad>(v_); }
bool EnergyModel::supports_grad_input() const {
  return !std::holds_alternative<IsingBilinear>(v_);
}

Dense EnergyModel::params() const {
  return std::visit(overloaded{
                        [](const Mlp& m) { return m.params.flat; },
                        [](const Mixture1D& m) { return Dense::column({m.rho}); },
                        [](const IsingBilinear& m) {
                          const auto d = m.coupling.rows();
                          std::vector<double> v;
                          v.reserve(d * (d - 1) / 2);
                          for (std::size_t i = 0; i < d; ++i) {
                            for (std::size_t j = i + 1; j < d; ++j) v.push_back(m.coupling(i, j));
                          }
                          return Dense::column(std::move(v));
                        },
                        [](const GaussQuad& m) {
                          std::vector<double> v = m.mean;
                          v.push_back(m.var);
                          return Dense::column(std::move(v));
                        },
                    },
                    v_);
}

void EnergyModel::set_params(std::span<const double> flat) {
  if (flat.size() != param_count()) {
    throw std::invalid_argument("set_params: expected " + std::to_string(param_count()) +
                                " values, got " + std::to_string(flat.size()));
  }
  std::visit(overloaded{
                 [&](Mlp& m) { std::copy(flat.begin(), flat.end(), m.params.flat.data()); },
                 [&](Mixture1D& m) {
                   if (!(flat[0] >= 0.0 && flat[0] <= 1.0)) {
                     throw std::invalid_argument("mixture1d: rho must lie in [0, 1]");
                   }
                   m.rho = flat[0];
                 },
                 [&](IsingBilinear& m) {
                   const auto d = m.coupling.rows();
                   std::size_t k = 0;
                   for (std::size_t i = 0; i < d; ++i) {
                     for (std::size_t j = i + 1; j < d; ++j) {
                       m.coupling(i, j) = flat[k];
                       m.coupling(j, i) = flat[k];
                       ++k;
                     }
                   }
                 },
                 [&](GaussQuad& m) {
                   if (!(flat.back() > 0.0)) {
                     throw std::invalid_argument("gauss_quad: var must be > 0");
                   }
                   std::copy(flat.begin(), flat.end() - 1, m.mean.begin());
                   m.var = flat.back();
                 },
             },
             v_);
}

void EnergyModel::check_dim(std::size_t d) const {
  if (d != input_dim()) {
    throw std::invalid_argument("energy model expects input dimension " +
                                std::to_string(input_dim()) + ", got " + std::to_string(d));
  }
}

double EnergyModel::energy(std::span<const double> x) const {
  check_dim(x.size());
  Dense p(1, x.size(), std::vector<double>(x.begin(), x.end()));
  return energies(p)[0];
}

Dense EnergyModel::grad_params(std::span<const double> x) const {
  check_dim(x.size());
  Dense p(1, x.size(), std::vector<double>(x.begin(), x.end()));
  Dense g(param_count(), 1);
  const double one = 1.0;
  accumulate_grad_params(p, std::span<const double>(&one, 1), g.span());
  return g;
}

Dense EnergyModel::grad_input(std::span<const double> x) const {
  check_dim(x.size());
  Dense p(1, x.size(), std::vector<double>(x.begin(), x.end()));
  const Dense g = grad_inputs(p);
  return Dense::column(std::vector<double>(g.span().begin(), g.span().end()));
}

std::vector<double> EnergyModel::energies(const Dense& points) const {
  if (points.rows() > 0) check_dim(points.cols());
  return std::visit(
      overloaded{
          [&](const Mlp& m) { return detail::mlp_energies(m, points); },
          [&](const Mixture1D& m) {
            std::vector<double> e(points.rows());
            for (std::size_t n = 0; n < points.rows(); ++n) e[n] = mixture_terms(m, points[n]).energy;
            return e;
          },
          [&](const IsingBilinear& m) {
            std::vector<double> e(points.rows());
            for (std::size_t n = 0; n < points.rows(); ++n) {
              e[n] = ising_bits_energy(m.coupling, points.row(n));
            }
            return e;
          },
          [&](const GaussQuad& m) {
            std::vector<double> e(points.rows());
            for (std::size_t n = 0; n < points.rows(); ++n) {
              const auto x = points.row(n);
              double s = 0.0;
              for (std::size_t k = 0; k < x.size(); ++k) {
                const double d = x[k] - m.mean[k];
                s += d * d;
              }
              e[n] = s / (2.0 * m.var);
            }
            return e;
          },
      },
      v_);
}

std::vector<double> EnergyModel::energies_and_accumulate(const Dense& points, const WeightFn& weigh,
                                                         std::span<double> out) const {
  if (out.size() != param_count()) {
    throw std::invalid_argument("energies_and_accumulate: output length mismatch");
  }
  if (points.rows() > 0) check_dim(points.cols());
  if (const auto* m = std::get_if<Mlp>(&v_)) return detail::mlp_energies_and_accumulate(*m, points, weigh, out);
  std::vector<double> e = energies(points);
  std::vector<double> w(e.size(), 0.0);
  if (weigh(e, w)) accumulate_grad_params(points, w, out);
  return e;
}

void EnergyModel::accumulate_grad_params(const Dense& points, std::span<const double> weights,
                                         std::span<double> out) const {
  if (weights.size() != points.rows()) {
    throw std::invalid_argument("accumulate_grad_params: one weight per point required");
  }
  if (out.size() != param_count()) {
    throw std::invalid_argument("accumulate_grad_params: output length mismatch");
  }
  if (points.rows() > 0) check_dim(points.cols());
  std::visit(
      overloaded{
          [&](const Mlp& m) { detail::mlp_accumulate_grad_params(m, points, weights, out); },
          [&](const Mixture1D& m) {
            for (std::size_t n = 0; n < points.rows(); ++n) {
              const auto t = mixture_terms(m, points[n]);
              // dE/drho = -(g1 - g2) / mixture
              out[0] -= weights[n] * (std::exp(t.log_left + t.energy) -
                                      std::exp(t.log_right + t.energy));
            }
          },
          [&](const IsingBilinear& m) {
            const auto d = static_cast<Eigen::Index>(m.coupling.rows());
            const auto n = static_cast<Eigen::Index>(points.rows());
            Eigen::MatrixXd s(n, d);
            for (Eigen::Index r = 0; r < n; ++r) {
              for (Eigen::Index c = 0; c < d; ++c) s(r, c) = 2.0 * points(r, c) - 1.0;
            }
            const Eigen::Map<const Eigen::VectorXd> w(weights.data(), n);
            const Eigen::MatrixXd g = s.transpose() * w.asDiagonal() * s;
            std::size_t k = 0;
            for (Eigen::Index i = 0; i < d; ++i) {
              for (Eigen::Index j = i + 1; j < d; ++j) out[k++] -= 2.0 * g(i, j);
            }
          },
          [&](const GaussQuad&) {
            throw UnsupportedVariant("grad_params: gauss_quad is a diagnostic model");
          },
      },
      v_);
}

Dense EnergyModel::grad_inputs(const Dense& points) const {
  if (points.rows() > 0) check_dim(points.cols());
  return std::visit(
      overloaded{
          [&](const Mlp& m) { return detail::mlp_grad_inputs(m, points); },
          [&](const Mixture1D& m) {
            Dense g(points.rows(), 1);
            for (std::size_t n = 0; n < points.rows(); ++n) {
              const double x = points[n];
              const auto t = mixture_terms(m, x);
              const double w1 = std::log(m.rho) + t.log_left + t.energy;
              const double w2 = std::log1p(-m.rho) + t.log_right + t.energy;
              g[n] = std::exp(w1) * (x - Mixture1D::kMeanLeft) +
                     std::exp(w2) * (x - Mixture1D::kMeanRight);
            }
            return g;
          },
          [&](const IsingBilinear&) -> Dense {
            throw UnsupportedVariant("grad_input: ising model has discrete inputs");
          },
          [&](const GaussQuad& m) {
            Dense g(points.rows(), points.cols());
            for (std::size_t n = 0; n < points.rows(); ++n) {
              for (std::size_t k = 0; k < points.cols(); ++k) {
                g(n, k) = (points(n, k) - m.mean[k]) / m.var;
              }
            }
            return g;
          },
      },
      v_);
}

void EnergyModel::shift_energy(double c) {
  auto* m = std::get_if<Mlp>(&v_);
  if (m == nullptr) throw UnsupportedVariant("shift_energy: only mlp models carry an output bias");
  m->params.flat[m->params.table.back().bias_offset] += c;
}

double energy(const EnergyModel& model, std::span<const double> x) { return model.energy(x); }
Dense grad_params(const EnergyModel& model, std::span<const double> x) {
  return model.grad_params(x);
}
Dense grad_input(const EnergyModel& model, std::span<const double> x) {
  return model.grad_input(x);
}

double ising_spin_energy(const Dense& coupling, std::span<const double> spins) {
  double e = 0.0;
  for (std::size_t i = 0; i < coupling.rows(); ++i) {
    double js = 0.0;
    for (std::size_t j = 0; j < coupling.cols(); ++j) js += coupling(i, j) * spins[j];
    e -= spins[i] * js;
  }
  return e;
}

}  // namespace edlab
