#include <cmath>
#include <functional>
#include <stdexcept>

#include "edlab/evalharness.hpp"
#include "edlab/losses.hpp"

namespace edlab {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

GradCheck check_loss_gradient(const std::string& kind, RngStream& rng, double h) {
  const bool bits = kind == "ed-discrete";
  MlpSpec spec;
  spec.input_dim = bits ? 6 : 2;
  spec.hidden_widths = {8, 8};
  spec.activation = rng.uniform() < 0.5 ? Activation::softplus : Activation::silu;
  EnergyModel model = EnergyModel::mlp(spec, init_xavier(spec, rng));

  const std::size_t n = 8;
  Dense batch(n, spec.input_dim);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    batch[k] = bits ? (rng.uniform() < 0.5 ? 1.0 : 0.0) : 2.0 * rng.normal();
  }
  const double t = 0.25 + rng.uniform();
  const std::size_t m = 4;
  const double w = rng.uniform() < 0.5 ? 1.0 : 0.25;
  const RngStream noise = rng.split("noise");

  Dense negatives;
  if (kind == "cd") {
    RngStream r = noise;
    negatives = cd_negatives(model, batch, CdConfig{1, 0.1}, r).states;
  }

  std::function<LossResult(const EnergyModel&, bool)> loss;
  if (kind == "ed") {
    loss = [&](const EnergyModel& e, bool g) {
      RngStream r = noise;
      return ed_loss_grad(e, batch, EdConfig{t, m, w}, r, g);
    };
  } else if (bits) {
    loss = [&](const EnergyModel& e, bool g) {
      RngStream r = noise;
      return ed_discrete_loss_grad(e, batch, EdConfig{t, m, w, 0.2}, r, g);
    };
  } else if (kind == "cd") {
    loss = [&](const EnergyModel& e, bool g) { return cd_loss_from_points(e, batch, negatives, g); };
  } else if (kind == "sm") {
    // second differences at 1e-3 leave ~1e-10 of roundoff in the loss, which
    // a 1e-4 parameter difference blows up past the tolerance
    loss = [&](const EnergyModel& e, bool g) { return sm_loss_grad(e, batch, SmConfig{1e-2}, g); };
  } else if (kind == "dsm") {
    loss = [&](const EnergyModel& e, bool g) {
      RngStream r = noise;
      return dsm_loss_grad(e, batch, DsmConfig{t, 1e-3}, r, g);
    };
  } else {
    throw std::invalid_argument("gradient check: unknown loss '" + kind + "'");
  }

  const Dense g = loss(model, true).grad;
  Dense p = model.params();
  Dense fd(p.size(), 1);
  EnergyModel probe = model;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double keep = p[k];
    p[k] = keep + h;
    probe.set_params(p.span());
    const double up = loss(probe, false).loss;
    p[k] = keep - h;
    probe.set_params(p.span());
    const double down = loss(probe, false).loss;
    p[k] = keep;
    fd[k] = (up - down) / (2.0 * h);
  }

  Dense diff(p.size(), 1);
  for (std::size_t k = 0; k < p.size(); ++k) diff[k] = g[k] - fd[k];
  GradCheck out{kind};
  out.grad_norm = norm2(g.span());
  const double scale = std::max(out.grad_norm, norm2(fd.span()));
  out.rel_error = scale > 0.0 ? norm2(diff.span()) / scale : 0.0;
  return out;
}

}  // namespace edlab
