#include "edlab/runs.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "edlab/evalharness.hpp"
#include "edlab/io.hpp"
#include "edlab/optim.hpp"

namespace edlab {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool discrete(const RunConfig& cfg) { return cfg.loss.kind == "ed-discrete"; }

Dense encode_rows(const Dense& points, const GrayCodec& codec) {
  const std::size_t bits = 2 * codec.bits_per_dim;
  Dense out(points.rows(), bits);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const GrayEncoded e = gray_encode(points.row(i), codec);
    std::copy(e.bits.span().begin(), e.bits.span().end(), out.row(i).begin());
  }
  return out;
}

Dense decode_rows(const Dense& bits, const GrayCodec& codec) {
  Dense out(bits.rows(), 2);
  for (std::size_t i = 0; i < bits.rows(); ++i) {
    const Dense p = gray_decode(bits.row(i), codec);
    out(i, 0) = p[0];
    out(i, 1) = p[1];
  }
  return out;
}

Dense uniform_box(std::size_t n, RngStream& rng) {
  Dense x(n, 2);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = kToyBound * (2.0 * rng.uniform() - 1.0);
  return x;
}

// Everything the periodic evaluation needs, fixed once per run.
struct EvalSet {
  Dense grid;
  Dense grid_inputs;
  std::vector<double> grid_logp;
  Dense logz_inputs;
  std::vector<double> logz_logp;
  bool has_logp = false;
};

EvalSet make_eval_set(const RunConfig& cfg, RngStream rng) {
  EvalSet ev;
  ev.grid = square_grid(cfg.eval.grid, kToyBound);
  const GrayCodec codec;
  ev.grid_inputs = discrete(cfg) ? encode_rows(ev.grid, codec) : ev.grid;
  ev.has_logp = toy2d_has_logp(cfg.data.name);
  if (!ev.has_logp) return ev;
  // a bit-input model is a mass function over lattice cells
  const double cell = discrete(cfg) ? 2.0 * std::log(codec.cell_width()) : 0.0;
  ev.grid_logp.resize(ev.grid.rows());
  for (std::size_t i = 0; i < ev.grid.rows(); ++i) {
    ev.grid_logp[i] = toy2d_logp(cfg.data.name, ev.grid.row(i)) + cell;
  }
  ToySample s = sample_toy2d(cfg.data.name, cfg.eval.logz_n, rng);
  ev.logz_inputs = discrete(cfg) ? encode_rows(s.points, codec) : s.points;
  ev.logz_logp = std::move(*s.logp);
  for (double& v : ev.logz_logp) v += cell;
  return ev;
}

MetricRow evaluate(const EnergyModel& model, const EvalSet& ev, std::size_t iter, double loss) {
  MetricRow row{iter, loss, kNaN, kNaN};
  if (ev.has_logp) {
    row.log_z = estimate_log_z(model, ev.logz_inputs, ev.logz_logp);
    row.density_mse = density_mse(model, row.log_z, ev.grid_inputs, ev.grid_logp);
  }
  return row;
}

std::string csv_value(double v) { return std::isnan(v) ? std::string("nan") : format_double(v); }

bool finite_grad(const LossResult& r) { return r.grad.empty() || r.grad.all_finite(); }

}  // namespace

std::string csv_points(const Dense& points, const std::vector<std::string>& header) {
  std::ostringstream o;
  for (std::size_t c = 0; c < header.size(); ++c) o << (c ? "," : "") << header[c];
  o << "\n";
  for (std::size_t r = 0; r < points.rows(); ++r) {
    for (std::size_t c = 0; c < points.cols(); ++c) o << (c ? "," : "") << csv_value(points(r, c));
    o << "\n";
  }
  return o.str();
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::ostringstream o;
  o << "iter,loss,density_mse,logz\n";
  for (const auto& r : rows) {
    o << r.iter << "," << csv_value(r.loss) << "," << csv_value(r.density_mse) << ","
      << csv_value(r.log_z) << "\n";
  }
  return o.str();
}

MlpSpec model_spec(const RunConfig& cfg) {
  MlpSpec spec;
  spec.input_dim = discrete(cfg) ? 2 * GrayCodec{}.bits_per_dim : 2;
  spec.hidden_widths.assign(cfg.model.layers - 1, cfg.model.hidden);
  spec.activation = activation_from_string(cfg.model.activation);
  spec.validate();
  return spec;
}

EnergyModel build_model(const RunConfig& cfg, RngStream& rng) {
  const MlpSpec spec = model_spec(cfg);
  Params p = cfg.model.init == "zero" ? Params::zeros(spec) : init_xavier(spec, rng);
  return EnergyModel::mlp(spec, std::move(p));
}

LossResult run_loss(const EnergyModel& model, const Dense& points, const RunConfig& cfg,
                    RngStream& rng, bool with_grad) {
  const auto& k = cfg.loss.kind;
  if (k == "ed") {
    return ed_loss_grad(model, points, EdConfig{cfg.loss.t, cfg.loss.m, cfg.loss.w}, rng, with_grad);
  }
  if (k == "ed-discrete") {
    EdConfig ec{cfg.loss.t, cfg.loss.m, cfg.loss.w, cfg.loss.eps};
    return ed_discrete_loss_grad(model, encode_rows(points, GrayCodec{}), ec, rng, with_grad);
  }
  if (k == "cd") {
    return cd_loss_grad(model, points, CdConfig{cfg.loss.mcmc_steps, cfg.loss.step_size}, rng,
                        with_grad);
  }
  if (k == "sm") return sm_loss_grad(model, points, SmConfig{cfg.loss.fd_step}, with_grad);
  if (k == "dsm") {
    return dsm_loss_grad(model, points, DsmConfig{cfg.loss.t, cfg.loss.fd_step}, rng, with_grad);
  }
  throw ConfigError("unknown loss kind '" + k + "'");
}

Dense gibbs_bits(const EnergyModel& model, std::size_t chains, std::size_t sweeps, RngStream& rng) {
  const std::size_t d = model.input_dim();
  Dense x(chains, d);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = rng.uniform() < 0.5 ? 1.0 : 0.0;
  Dense on = x;
  Dense off = x;
  for (std::size_t s = 0; s < sweeps; ++s) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t c = 0; c < chains; ++c) {
        on(c, i) = 1.0;
        off(c, i) = 0.0;
      }
      const std::vector<double> e1 = model.energies(on);
      const std::vector<double> e0 = model.energies(off);
      for (std::size_t c = 0; c < chains; ++c) {
        const double bit = rng.uniform() < sigmoid(e0[c] - e1[c]) ? 1.0 : 0.0;
        on(c, i) = bit;
        off(c, i) = bit;
        x(c, i) = bit;
      }
    }
  }
  return x;
}

TrainSummary cmd_train(const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  write_file_atomic(out_dir / "config.toml", cfg.to_toml());

  const RngStream root(cfg.train.seed);
  RngStream init_rng = root.split("init");
  RngStream data_rng = root.split("data");
  RngStream loss_rng = root.split("loss");
  RngStream sample_rng = root.split("sample");
  const EvalSet ev = make_eval_set(cfg, root.split("eval"));

  EnergyModel model = build_model(cfg, init_rng);
  AdamState adam(cfg.train.lr);
  Dense params = model.params();

  TrainSummary summary;
  for (std::size_t it = 0; it <= cfg.train.iters; ++it) {
    const bool last = it == cfg.train.iters;
    const Dense batch = sample_toy2d(cfg.data.name, cfg.data.batch, data_rng).points;
    const LossResult res = run_loss(model, batch, cfg, loss_rng, !last);
    if (res.status != LossStatus::ok || !std::isfinite(res.loss) || !finite_grad(res)) {
      summary.status = "diverged";
      summary.diverged_at = it;
      summary.metrics.push_back({it, res.loss, kNaN, kNaN});
      break;
    }
    if (it % cfg.eval.eval_every == 0 || last) summary.metrics.push_back(evaluate(model, ev, it, res.loss));
    if (last) break;
    adam_step(adam, params.span(), res.grad.span());
    model.set_params(params.span());
    summary.iters_completed = it + 1;
  }

  write_file_atomic(out_dir / "metrics.csv", metrics_csv(summary.metrics));

  const std::vector<double> e = model.energies(ev.grid_inputs);
  Dense grid(ev.grid.rows(), 3);
  for (std::size_t i = 0; i < ev.grid.rows(); ++i) {
    grid(i, 0) = ev.grid(i, 0);
    grid(i, 1) = ev.grid(i, 1);
    grid(i, 2) = e[i];
  }
  write_file_atomic(out_dir / "energy_grid.csv", csv_points(grid, {"x1", "x2", "energy"}));

  Dense samples;
  if (summary.status == "ok") {
    if (discrete(cfg)) {
      samples = decode_rows(gibbs_bits(model, cfg.sample.n, cfg.sample.langevin_steps, sample_rng),
                            GrayCodec{});
    } else {
      const LangevinConfig lc{cfg.sample.langevin_steps, cfg.sample.langevin_step_size};
      samples = langevin(model, uniform_box(cfg.sample.n, sample_rng), lc, sample_rng).states;
    }
  } else {
    samples = Dense(0, 2);
  }
  write_file_atomic(out_dir / "samples.csv", csv_points(samples, {"x1", "x2"}));
  save_checkpoint(model, out_dir / "model.ckpt");

  nlohmann::ordered_json st;
  st["status"] = summary.status;
  st["loss_kind"] = cfg.loss.kind;
  st["iters_completed"] = summary.iters_completed;
  st["diverged_at"] = summary.diverged_at ? nlohmann::json(*summary.diverged_at) : nlohmann::json();
  const MetricRow& tail = summary.metrics.back();
  st["final_loss"] = std::isfinite(tail.loss) ? nlohmann::json(tail.loss) : nlohmann::json();
  st["final_density_mse"] =
      std::isfinite(tail.density_mse) ? nlohmann::json(tail.density_mse) : nlohmann::json();
  write_file_atomic(out_dir / "status.json", st.dump(2) + "\n");

  summary.model = std::move(model);
  return summary;
}

Dense cmd_sample(const fs::path& ckpt, std::size_t n, const LangevinConfig& lcfg, std::uint64_t seed,
                 const fs::path& out_csv) {
  const EnergyModel model = load_checkpoint(ckpt);
  if (model.input_dim() != 2 || !model.supports_grad_input()) {
    throw std::invalid_argument("sample: checkpoint must hold a 2D continuous model");
  }
  RngStream rng = RngStream(seed).split("sample");
  Dense x = langevin(model, uniform_box(n, rng), lcfg, rng).states;
  if (!out_csv.empty()) write_file_atomic(out_csv, csv_points(x, {"x1", "x2"}));
  return x;
}

DensityReport cmd_eval_density(const fs::path& ckpt, const std::string& dataset, std::size_t grid,
                               std::size_t logz_n, std::uint64_t seed) {
  const EnergyModel model = load_checkpoint(ckpt);
  RunConfig cfg;
  cfg.data.name = dataset;
  cfg.eval.grid = grid;
  cfg.eval.logz_n = logz_n;
  if (model.input_dim() == 2 * GrayCodec{}.bits_per_dim) cfg.loss.kind = "ed-discrete";
  if (!toy2d_has_logp(dataset)) {
    throw std::invalid_argument("eval-density: dataset '" + dataset + "' has no exact density");
  }
  const EvalSet ev = make_eval_set(cfg, RngStream(seed).split("eval"));
  const MetricRow row = evaluate(model, ev, 0, 0.0);
  return {row.log_z, row.density_mse};
}

}  // namespace edlab
