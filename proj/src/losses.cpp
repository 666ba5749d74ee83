#include "edlab/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "edlab/perturb.hpp"

namespace edlab {

namespace {

// Upper bound on contrast rows materialised at once.
constexpr std::size_t kContrastRowsPerChunk = 1 << 16;

Dense stack_rows(const Dense& a, const Dense& b) {
  Dense out(a.rows() + b.rows(), a.cols());
  std::copy(a.data(), a.data() + a.size(), out.data());
  std::copy(b.data(), b.data() + b.size(), out.data() + a.size());
  return out;
}

Dense take_rows(const Dense& src, std::size_t first, std::size_t count) {
  Dense out(count, src.cols());
  std::copy(src.data() + first * src.cols(), src.data() + (first + count) * src.cols(), out.data());
  return out;
}

/// Streams chunks of (data rows, contrast rows) through the ED reduction.
class EdAccumulator {
 public:
  EdAccumulator(const EnergyModel& model, std::size_t n, std::size_t m, double w, bool with_grad)
      : model_(model), n_(n), m_(m), with_grad_(with_grad),
        log_w_(w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity()),
        log_m_(std::log(static_cast<double>(m))) {
    result_.terms.reserve(n);
    if (with_grad_) result_.grad = Dense(model.param_count(), 1);
  }

  /// Returns false once a non-finite energy has been seen.
  bool add(std::size_t first_index, const Dense& data, const Dense& contrast) {
    const std::size_t rows = data.rows();
    if (!with_grad_) {
      const std::vector<double> e0 = model_.energies(data);
      const std::vector<double> e1 = model_.energies(contrast);
      return reduce(first_index, e0, e1, {}, {});
    }
    bool ok = true;
    model_.energies_and_accumulate(
        stack_rows(data, contrast),
        [&](std::span<const double> e, std::span<double> w) {
          ok = reduce(first_index, e.first(rows), e.subspan(rows), w.first(rows), w.subspan(rows));
          return ok;
        },
        result_.grad.span());
    return ok;
  }

  LossResult finish() {
    if (result_.status == LossStatus::ok) result_.loss = sum_ / static_cast<double>(n_);
    return std::move(result_);
  }

 private:
  bool reduce(std::size_t first_index, std::span<const double> e0, std::span<const double> e1,
              std::span<double> data_w, std::span<double> contrast_w) {
    const std::size_t rows = e0.size();
    std::vector<double> v(m_ + 1);
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (std::size_t r = 0; r < rows; ++r) {
      bool finite = std::isfinite(e0[r]);
      for (std::size_t j = 0; j < m_ && finite; ++j) finite = std::isfinite(e1[r * m_ + j]);
      if (!finite) {
        result_.status = LossStatus::diverged;
        result_.bad_index = first_index + r;
        result_.loss = std::numeric_limits<double>::infinity();
        return false;
      }
      v[0] = log_w_;
      for (std::size_t j = 0; j < m_; ++j) v[j + 1] = e0[r] - e1[r * m_ + j];
      const double lse = logsumexp(v);
      const double term = lse - log_m_;
      const double top = *std::max_element(v.begin(), v.end());
      if (!(term >= top - log_m_)) ++result_.bound_violations;
      result_.terms.push_back(term);
      sum_ += term;

      if (with_grad_) {
        double mass = 0.0;
        for (std::size_t j = 0; j < m_; ++j) {
          const double p = std::exp(v[j + 1] - lse);
          contrast_w[r * m_ + j] = -p * inv_n;
          mass += p;
        }
        data_w[r] = mass * inv_n;
      }
    }
    return true;
  }

  const EnergyModel& model_;
  std::size_t n_;
  std::size_t m_;
  bool with_grad_;
  double log_w_;
  double log_m_;
  double sum_ = 0.0;
  LossResult result_;
};

void check_batch(const EnergyModel& model, const Dense& batch, bool with_grad) {
  if (batch.rows() == 0) throw std::invalid_argument("loss: batch must be non-empty");
  if (batch.cols() != model.input_dim()) {
    throw std::invalid_argument("loss: batch dimension does not match the model");
  }
  if (with_grad && !model.supports_grad_params()) {
    throw UnsupportedVariant("loss: model '" + model.kind() + "' has no parameter gradient");
  }
}

// Flags the first non-finite stencil energy as a divergence of its sample.
bool finite_energies(std::span<const double> e, std::size_t per, LossResult& out) {
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (!std::isfinite(e[i])) {
      out.status = LossStatus::diverged;
      out.bad_index = i / per;
      out.loss = std::numeric_limits<double>::infinity();
      return false;
    }
  }
  return true;
}

template <class Reduce>
void run_stencil(const EnergyModel& model, const Dense& stencil, Reduce& reduce, bool with_grad,
                 LossResult& out) {
  if (!with_grad) {
    const std::vector<double> e = model.energies(stencil);
    reduce(e, std::span<double>());
    return;
  }
  Dense grad(model.param_count(), 1);
  model.energies_and_accumulate(stencil, reduce, grad.span());
  if (out.status == LossStatus::ok) out.grad = std::move(grad);
}

std::size_t points_per_chunk(std::size_t m) {
  return std::max<std::size_t>(1, kContrastRowsPerChunk / std::max<std::size_t>(m, 1));
}

}  // namespace

void EdConfig::validate() const {
  if (m == 0) throw std::invalid_argument("EdConfig: M must be >= 1");
  if (!(w >= 0.0)) throw std::invalid_argument("EdConfig: w must be >= 0");
  if (!(t > 0.0)) throw std::invalid_argument("EdConfig: t must be > 0");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("EdConfig: eps must lie in (0, 1)");
}

LossResult ed_loss_from_contrast(const EnergyModel& model, const Dense& batch,
                                 const Dense& contrast, std::size_t m, double w, bool with_grad) {
  check_batch(model, batch, with_grad);
  if (m == 0) throw std::invalid_argument("ed loss: M must be >= 1");
  if (contrast.rows() != batch.rows() * m || contrast.cols() != batch.cols()) {
    throw std::invalid_argument("ed loss: contrast must hold N*M rows of the batch dimension");
  }
  EdAccumulator acc(model, batch.rows(), m, w, with_grad);
  const std::size_t step = points_per_chunk(m);
  for (std::size_t first = 0; first < batch.rows(); first += step) {
    const std::size_t count = std::min(step, batch.rows() - first);
    if (!acc.add(first, take_rows(batch, first, count), take_rows(contrast, first * m, count * m))) {
      break;
    }
  }
  return acc.finish();
}

Dense ed_gaussian_contrast(const Dense& batch, double t, std::size_t m, RngStream& rng) {
  if (!(t > 0.0)) throw std::invalid_argument("ed contrast: t must be > 0");
  if (m == 0) throw std::invalid_argument("ed contrast: M must be >= 1");
  const std::size_t n = batch.rows();
  const std::size_t d = batch.cols();
  const double s = std::sqrt(t);
  Dense xi(n, d);
  rng.fill_normal(xi.span());
  Dense contrast(n * m, d);
  std::vector<double> xi_prime(m * d);
  for (std::size_t i = 0; i < n; ++i) {
    rng.fill_normal(xi_prime);
    for (std::size_t j = 0; j < m; ++j) {
      auto y = contrast.row(i * m + j);
      for (std::size_t k = 0; k < d; ++k) {
        y[k] = batch(i, k) + s * xi(i, k) + s * xi_prime[j * d + k];
      }
    }
  }
  return contrast;
}

LossResult ed_loss_grad(const EnergyModel& model, const Dense& batch, const EdConfig& cfg,
                        RngStream& rng, bool with_grad) {
  cfg.validate();
  check_batch(model, batch, with_grad);
  const std::size_t n = batch.rows();
  const std::size_t d = batch.cols();
  const double s = std::sqrt(cfg.t);

  Dense xi(n, d);
  rng.fill_normal(xi.span());

  EdAccumulator acc(model, n, cfg.m, cfg.w, with_grad);
  const std::size_t step = points_per_chunk(cfg.m);
  std::vector<double> xi_prime(cfg.m * d);
  for (std::size_t first = 0; first < n; first += step) {
    const std::size_t count = std::min(step, n - first);
    Dense contrast(count * cfg.m, d);
    for (std::size_t r = 0; r < count; ++r) {
      const auto x = batch.row(first + r);
      rng.fill_normal(xi_prime);
      for (std::size_t j = 0; j < cfg.m; ++j) {
        auto y = contrast.row(r * cfg.m + j);
        for (std::size_t k = 0; k < d; ++k) {
          y[k] = x[k] + s * xi(first + r, k) + s * xi_prime[j * d + k];
        }
      }
    }
    if (!acc.add(first, take_rows(batch, first, count), contrast)) break;
  }
  return acc.finish();
}

LossResult ed_discrete_loss_grad(const EnergyModel& model, const Dense& bits, const EdConfig& cfg,
                                 RngStream& rng, bool with_grad) {
  cfg.validate();
  check_batch(model, bits, with_grad);
  const std::size_t n = bits.rows();
  const std::size_t d = bits.cols();

  Dense xi(n, d);
  for (std::size_t k = 0; k < xi.size(); ++k) xi[k] = rng.uniform() < cfg.eps ? 1.0 : 0.0;

  EdAccumulator acc(model, n, cfg.m, cfg.w, with_grad);
  const std::size_t step = points_per_chunk(cfg.m);
  for (std::size_t first = 0; first < n; first += step) {
    const std::size_t count = std::min(step, n - first);
    Dense contrast(count * cfg.m, d);
    for (std::size_t r = 0; r < count; ++r) {
      const auto x = bits.row(first + r);
      for (std::size_t j = 0; j < cfg.m; ++j) {
        auto y = contrast.row(r * cfg.m + j);
        for (std::size_t k = 0; k < d; ++k) {
          const bool flip = rng.uniform() < cfg.eps;
          const bool bit = (x[k] != 0.0) != (xi(first + r, k) != 0.0);
          y[k] = (bit != flip) ? 1.0 : 0.0;
        }
      }
    }
    if (!acc.add(first, take_rows(bits, first, count), contrast)) break;
  }
  return acc.finish();
}

ChainResult cd_negatives(const EnergyModel& model, const Dense& batch, const CdConfig& cfg,
                         RngStream& rng) {
  return langevin(model, batch, LangevinConfig{cfg.mcmc_steps, cfg.step_size}, rng);
}

LossResult cd_loss_from_points(const EnergyModel& model, const Dense& positives,
                               const Dense& negatives, bool with_grad) {
  check_batch(model, positives, with_grad);
  if (negatives.rows() == 0 || negatives.cols() != positives.cols()) {
    throw std::invalid_argument("cd loss: negatives must match the batch dimension");
  }
  LossResult out;
  const std::size_t np = positives.rows();
  const std::size_t nn = negatives.rows();
  auto reduce = [&](std::span<const double> e, std::span<double> weights) {
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!std::isfinite(e[i])) {
        out.status = LossStatus::diverged;
        out.bad_index = i < np ? i : i - np;
        out.loss = std::numeric_limits<double>::infinity();
        return false;
      }
    }
    double sp = 0.0;
    double sn = 0.0;
    for (std::size_t i = 0; i < np; ++i) sp += e[i];
    for (std::size_t i = np; i < e.size(); ++i) sn += e[i];
    out.loss = sp / static_cast<double>(np) - sn / static_cast<double>(nn);
    if (!weights.empty()) {
      for (std::size_t i = 0; i < np; ++i) weights[i] = 1.0 / static_cast<double>(np);
      for (std::size_t i = np; i < e.size(); ++i) weights[i] = -1.0 / static_cast<double>(nn);
    }
    return true;
  };
  run_stencil(model, stack_rows(positives, negatives), reduce, with_grad, out);
  return out;
}

LossResult cd_loss_grad(const EnergyModel& model, const Dense& batch, const CdConfig& cfg,
                        RngStream& rng, bool with_grad) {
  check_batch(model, batch, with_grad);
  const ChainResult neg = cd_negatives(model, batch, cfg, rng);
  if (neg.diverged) {
    LossResult out;
    out.status = LossStatus::diverged;
    out.loss = std::numeric_limits<double>::infinity();
    return out;
  }
  return cd_loss_from_points(model, batch, neg.states, with_grad);
}

LossResult sm_loss_grad(const EnergyModel& model, const Dense& batch, const SmConfig& cfg,
                        bool with_grad) {
  check_batch(model, batch, with_grad);
  const double h = cfg.fd_step;
  if (!(h > 0.0)) throw std::invalid_argument("SmConfig: fd step must be > 0");
  const std::size_t n = batch.rows();
  const std::size_t d = batch.cols();
  const std::size_t per = 1 + 2 * d;  // centre, then +h e_k, -h e_k for each k

  Dense stencil(n * per, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < per; ++p) {
      auto row = stencil.row(i * per + p);
      std::copy(batch.row(i).begin(), batch.row(i).end(), row.begin());
    }
    for (std::size_t k = 0; k < d; ++k) {
      stencil(i * per + 1 + 2 * k, k) += h;
      stencil(i * per + 2 + 2 * k, k) -= h;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_h2 = 1.0 / (h * h);
  LossResult out;
  auto reduce = [&](std::span<const double> e, std::span<double> weights) {
    if (!finite_energies(e, per, out)) return false;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e0 = e[i * per];
      double term = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double ep = e[i * per + 1 + 2 * k];
        const double em = e[i * per + 2 + 2 * k];
        const double g = (ep - em) / (2.0 * h);
        term += -(ep - 2.0 * e0 + em) * inv_h2 + 0.5 * g * g;
        if (!weights.empty()) {
          weights[i * per + 1 + 2 * k] = (-inv_h2 + g / (2.0 * h)) * inv_n;
          weights[i * per + 2 + 2 * k] = (-inv_h2 - g / (2.0 * h)) * inv_n;
          weights[i * per] += 2.0 * inv_h2 * inv_n;
        }
      }
      total += term;
    }
    out.loss = total * inv_n;
    return true;
  };
  run_stencil(model, stencil, reduce, with_grad, out);
  return out;
}

LossResult dsm_loss_grad(const EnergyModel& model, const Dense& batch, const DsmConfig& cfg,
                         RngStream& rng, bool with_grad) {
  check_batch(model, batch, with_grad);
  if (!(cfg.t > 0.0)) throw std::invalid_argument("DsmConfig: t must be > 0");
  const double h = cfg.fd_step;
  const std::size_t n = batch.rows();
  const std::size_t d = batch.cols();
  const std::size_t per = 2 * d;

  Dense noise(n, d);
  rng.fill_normal(noise.span());
  const double s = std::sqrt(cfg.t);
  Dense y(n, d);
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = batch[k] + s * noise[k];

  Dense stencil(n * per, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < per; ++p) {
      std::copy(y.row(i).begin(), y.row(i).end(), stencil.row(i * per + p).begin());
    }
    for (std::size_t k = 0; k < d; ++k) {
      stencil(i * per + 2 * k, k) += h;
      stencil(i * per + 2 * k + 1, k) -= h;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  LossResult out;
  auto reduce = [&](std::span<const double> e, std::span<double> weights) {
    if (!finite_energies(e, per, out)) return false;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        const double score = (e[i * per + 2 * k] - e[i * per + 2 * k + 1]) / (2.0 * h);
        const double target = (y(i, k) - batch(i, k)) / cfg.t;
        const double r = score - target;
        total += 0.5 * r * r;
        if (!weights.empty()) {
          weights[i * per + 2 * k] = r / (2.0 * h) * inv_n;
          weights[i * per + 2 * k + 1] = -r / (2.0 * h) * inv_n;
        }
      }
    }
    out.loss = total * inv_n;
    return true;
  };
  run_stencil(model, stencil, reduce, with_grad, out);
  return out;
}

}  // namespace edlab
