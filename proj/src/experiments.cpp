#include "edlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "edlab/datasets.hpp"
#include "edlab/io.hpp"
#include "edlab/optim.hpp"
#include "edlab/samplers.hpp"

namespace edlab {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_num(const std::string& key, std::string_view v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("experiment option " + key + ": bad number '" + std::string(v) + "'");
  }
  return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const auto comma = v.find(',', pos);
    const auto end = comma == std::string::npos ? v.size() : comma;
    std::string_view item(v.data() + pos, end - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    out.push_back(parse_num(key, item));
    pos = end + 1;
  }
  return out;
}

using Setter = std::function<void(const std::string&, const std::string&)>;

Setter num(double& f) {
  return [&f](const std::string& k, const std::string& v) { f = parse_num(k, v); };
}
Setter count(std::size_t& f) {
  return [&f](const std::string& k, const std::string& v) {
    const double d = parse_num(k, v);
    if (!(d >= 0.0) || d != std::floor(d)) throw ConfigError("experiment option " + k + ": expects a count");
    f = static_cast<std::size_t>(d);
  };
}
Setter seed_of(std::uint64_t& f) {
  return [&f](const std::string& k, const std::string& v) {
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), f);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("experiment option " + k + ": bad seed");
  };
}
Setter list(std::vector<double>& f) {
  return [&f](const std::string& k, const std::string& v) { f = parse_list(k, v); };
}
Setter count_list(std::vector<std::size_t>& f) {
  return [&f](const std::string& k, const std::string& v) {
    f.clear();
    for (double d : parse_list(k, v)) {
      if (!(d >= 1.0) || d != std::floor(d)) throw ConfigError("experiment option " + k + ": expects counts");
      f.push_back(static_cast<std::size_t>(d));
    }
  };
}

void apply_prefixed(const KeyValues& kv, const std::string& prefix,
                    const std::map<std::string, Setter>& table) {
  for (const auto& [k, v] : kv) {
    if (k.rfind(prefix + ".", 0) != 0) continue;
    const auto it = table.find(k.substr(prefix.size() + 1));
    if (it == table.end()) throw ConfigError("unknown experiment option '" + k + "'");
    it->second(k, v);
  }
}

std::string fmt(double v) { return std::isnan(v) ? std::string("nan") : format_double(v); }

ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); }

void write_json(const fs::path& path, const ordered_json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

std::vector<std::size_t> permutation(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
  }
  return idx;
}

Dense gather(const Dense& src, std::span<const std::size_t> idx) {
  Dense out(idx.size(), src.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    std::copy(src.row(idx[r]).begin(), src.row(idx[r]).end(), out.row(r).begin());
  }
  return out;
}

}  // namespace

// -- mixture -------------------------------------------------------------------

void MixtureExperimentConfig::apply(const KeyValues& kv) {
  apply_prefixed(kv, "mixture",
                 {{"rho", num(rho_true)},
                  {"n_fit", count(n_fit)},
                  {"n_mse", count(n_mse)},
                  {"runs", count(runs)},
                  {"m", count(m)},
                  {"w", num(w)},
                  {"t_fit", num(t_fit)},
                  {"ts", list(ts)},
                  {"seed", seed_of(seed)}});
}

MixtureExperimentResult run_mixture_experiment(const MixtureExperimentConfig& cfg,
                                               const fs::path& out) {
  MixtureExperimentResult res;
  const RngStream root = RngStream(cfg.seed).split("mixture");
  RngStream data_rng = root.split("data");
  const Dense data = sample_mixture1d(cfg.rho_true, cfg.n_fit, data_rng);

  for (int k = 5; k <= 95; ++k) res.rho_grid.push_back(k / 100.0);
  MixtureStudyConfig sc{cfg.t_fit, cfg.m, cfg.w, cfg.rho_true};
  RngStream unused = root.split("unused");
  res.nll_curve = mixture_objective_curve(MixtureObjective::nll, res.rho_grid, data, sc, unused);
  res.sm_curve = mixture_objective_curve(MixtureObjective::sm, res.rho_grid, data, sc, unused);
  const RngStream curve_root = root.split("curve");
  for (std::size_t i = 0; i < cfg.ts.size(); ++i) {
    MixtureStudyConfig c = sc;
    c.t = cfg.ts[i];
    RngStream r = curve_root.split(static_cast<std::uint64_t>(i));
    res.ed_curves.push_back(mixture_objective_curve(MixtureObjective::ed, res.rho_grid, data, c, r));
  }

  RngStream fit_rng = root.split("fit");
  res.nll_fit = fit_mixture_weight(MixtureObjective::nll, data, sc, fit_rng);
  res.ed_fit = fit_mixture_weight(MixtureObjective::ed, data, sc, fit_rng);

  // every row of the table sees the same data sets (common random numbers)
  const RngStream mse_rng = root.split("mse");
  res.mse.push_back({"nll", kNaN, mixture_weight_mse(MixtureObjective::nll, cfg.n_mse, cfg.runs, sc, mse_rng).mse});
  for (double t : cfg.ts) {
    MixtureStudyConfig c = sc;
    c.t = t;
    res.mse.push_back({"ed", t, mixture_weight_mse(MixtureObjective::ed, cfg.n_mse, cfg.runs, c, mse_rng).mse});
  }

  if (!out.empty()) {
    fs::create_directories(out);
    std::ostringstream curves;
    curves << "rho,nll,sm";
    for (double t : cfg.ts) curves << ",ed_t" << fmt(t);
    curves << "\n";
    for (std::size_t i = 0; i < res.rho_grid.size(); ++i) {
      curves << fmt(res.rho_grid[i]) << "," << fmt(res.nll_curve[i]) << "," << fmt(res.sm_curve[i]);
      for (const auto& c : res.ed_curves) curves << "," << fmt(c[i]);
      curves << "\n";
    }
    write_file_atomic(out / "curves.csv", curves.str());
    std::ostringstream table;
    table << "objective,t,m,w,n,runs,mse\n";
    for (const auto& row : res.mse) {
      table << row.objective << "," << fmt(row.t) << "," << cfg.m << "," << fmt(cfg.w) << "," << cfg.n_mse
            << "," << cfg.runs << "," << fmt(row.mse) << "\n";
    }
    write_file_atomic(out / "metrics.csv", table.str());
    ordered_json st;
    st["status"] = "ok";
    st["rho_true"] = cfg.rho_true;
    st["nll_fit"] = res.nll_fit;
    st["ed_fit"] = res.ed_fit;
    st["ed_fit_t"] = cfg.t_fit;
    write_json(out / "status.json", st);
  }
  return res;
}

// -- w study -------------------------------------------------------------------

void WStudyConfig::apply(const KeyValues& kv) {
  apply_prefixed(kv, "wstudy",
                 {{"ws", list(ws)},
                  {"n", count(n)},
                  {"batch", count(batch)},
                  {"epochs", count(epochs)},
                  {"lr", num(lr)},
                  {"t", num(t)},
                  {"m", count(m)},
                  {"seed", seed_of(seed)}});
}

WStudyResult run_wstudy(const WStudyConfig& cfg, const fs::path& out) {
  WStudyResult res;
  const RngStream root = RngStream(cfg.seed).split("wstudy");
  RngStream data_rng = root.split("data");
  const Dense data = draw_normal(data_rng, cfg.n);
  Dense points(cfg.n, 1, std::vector<double>(data.values().begin(), data.values().end()));
  const MlpSpec spec{1, {2, 2}, Activation::silu};
  RngStream init_rng = root.split("init");
  const Params init = init_xavier(spec, init_rng);
  for (int k = -80; k <= 80; ++k) res.x_grid.push_back(k / 20.0);
  const Dense grid(res.x_grid.size(), 1, res.x_grid);

  for (std::size_t wi = 0; wi < cfg.ws.size(); ++wi) {
    WStudyRun run;
    run.w = cfg.ws[wi];
    EnergyModel model = EnergyModel::mlp(spec, init);
    Dense params = model.params();
    AdamState adam(cfg.lr);
    RngStream loss_rng = root.split("loss").split(static_cast<std::uint64_t>(wi));
    RngStream shuffle_rng = root.split("shuffle").split(static_cast<std::uint64_t>(wi));
    const EdConfig ec{cfg.t, cfg.m, run.w};
    for (std::size_t e = 0; e < cfg.epochs && run.status == "ok"; ++e) {
      const auto order = permutation(cfg.n, shuffle_rng);
      double acc = 0.0;
      std::size_t nb = 0;
      for (std::size_t first = 0; first < cfg.n; first += cfg.batch) {
        const std::size_t cnt = std::min(cfg.batch, cfg.n - first);
        const Dense batch = gather(points, std::span<const std::size_t>(order).subspan(first, cnt));
        const LossResult r = ed_loss_grad(model, batch, ec, loss_rng, true);
        ++run.batches;
        run.bound_violations += r.bound_violations;
        if (r.status != LossStatus::ok || !std::isfinite(r.loss) || !r.grad.all_finite()) {
          run.status = "diverged";
          break;
        }
        adam_step(adam, params.span(), r.grad.span());
        if (!params.all_finite()) {
          run.status = "diverged";
          break;
        }
        model.set_params(params.span());
        acc += r.loss;
        ++nb;
      }
      if (run.status == "ok") {
        run.epoch_loss.push_back(acc / static_cast<double>(nb));
        run.epochs_completed = e + 1;
      }
    }
    run.final_loss = run.epoch_loss.empty() ? kNaN : run.epoch_loss.back();
    run.energy = model.energies(grid);
    res.runs.push_back(std::move(run));
  }

  if (!out.empty()) {
    fs::create_directories(out);
    std::ostringstream loss;
    loss << "w,epoch,loss\n";
    std::ostringstream energy;
    energy << "w,x,energy\n";
    ordered_json st;
    st["status"] = "ok";
    st["runs"] = ordered_json::array();
    for (const auto& run : res.runs) {
      for (std::size_t e = 0; e < run.epoch_loss.size(); ++e) {
        loss << fmt(run.w) << "," << e + 1 << "," << fmt(run.epoch_loss[e]) << "\n";
      }
      for (std::size_t i = 0; i < res.x_grid.size(); ++i) {
        energy << fmt(run.w) << "," << fmt(res.x_grid[i]) << "," << fmt(run.energy[i]) << "\n";
      }
      ordered_json j;
      j["w"] = run.w;
      j["status"] = run.status;
      j["epochs_completed"] = run.epochs_completed;
      j["final_loss"] = finite_or_null(run.final_loss);
      j["bound_violations"] = run.bound_violations;
      j["batches"] = run.batches;
      st["runs"].push_back(j);
    }
    write_file_atomic(out / "loss.csv", loss.str());
    write_file_atomic(out / "energy.csv", energy.str());
    write_json(out / "status.json", st);
  }
  return res;
}

// -- Ising ---------------------------------------------------------------------

void IsingExperimentConfig::apply(const KeyValues& kv) {
  apply_prefixed(kv, "ising",
                 {{"h", count(h)},
                  {"w_sites", count(w_sites)},
                  {"strength", num(strength)},
                  {"samples", count(samples)},
                  {"burn_in", count(burn_in)},
                  {"thin", count(thin)},
                  {"eps", num(eps)},
                  {"m", count(m)},
                  {"w", num(w)},
                  {"batch", count(batch)},
                  {"iters", count(iters)},
                  {"lr", num(lr)},
                  {"seed", seed_of(seed)}});
}

IsingExperimentResult run_ising_experiment(const IsingExperimentConfig& cfg, const fs::path& out) {
  IsingExperimentResult res;
  const RngStream root = RngStream(cfg.seed).split("ising");
  res.j_true = ising_lattice_coupling(cfg.h, cfg.w_sites, cfg.strength);
  const std::size_t d = res.j_true.rows();
  RngStream gibbs_rng = root.split("gibbs");
  const Dense bits = spins_to_bits(gibbs_chain(res.j_true, cfg.samples, cfg.burn_in, cfg.thin, gibbs_rng));

  EnergyModel model = EnergyModel::ising(Dense(d, d));
  Dense params = model.params();
  AdamState adam(cfg.lr);
  RngStream batch_rng = root.split("batch");
  RngStream loss_rng = root.split("loss");
  const EdConfig ec{1.0, cfg.m, cfg.w, cfg.eps};
  std::vector<std::size_t> idx(std::min(cfg.batch, cfg.samples));
  for (std::size_t it = 0; it < cfg.iters; ++it) {
    for (auto& i : idx) {
      i = std::min(cfg.samples - 1, static_cast<std::size_t>(batch_rng.uniform() * double(cfg.samples)));
    }
    const LossResult r = ed_discrete_loss_grad(model, gather(bits, idx), ec, loss_rng, true);
    if (r.status != LossStatus::ok || !r.grad.all_finite()) {
      res.status = "diverged";
      break;
    }
    res.loss.push_back(r.loss);
    adam_step(adam, params.span(), r.grad.span());
    model.set_params(params.span());
  }

  res.j_hat = Dense(d, d);
  std::size_t k = 0;
  double se = 0.0, sn = 0.0;
  std::size_t ne = 0, nn = 0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j, ++k) {
      res.j_hat(i, j) = res.j_hat(j, i) = params[k];
      if (res.j_true(i, j) != 0.0) {
        se += std::abs(params[k]);
        ++ne;
      } else {
        sn += std::abs(params[k]);
        ++nn;
      }
    }
  }
  res.edge_mean_abs = se / static_cast<double>(std::max<std::size_t>(ne, 1));
  res.non_edge_mean_abs = sn / static_cast<double>(std::max<std::size_t>(nn, 1));
  res.ratio = res.edge_mean_abs / res.non_edge_mean_abs;

  if (!out.empty()) {
    fs::create_directories(out);
    std::ostringstream c;
    c << "i,j,true,estimate\n";
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        c << i << "," << j << "," << fmt(res.j_true(i, j)) << "," << fmt(res.j_hat(i, j)) << "\n";
      }
    }
    write_file_atomic(out / "coupling.csv", c.str());
    std::ostringstream m;
    m << "iter,loss\n";
    for (std::size_t i = 0; i < res.loss.size(); ++i) m << i << "," << fmt(res.loss[i]) << "\n";
    write_file_atomic(out / "metrics.csv", m.str());
    ordered_json st;
    st["status"] = res.status;
    st["edge_mean_abs"] = res.edge_mean_abs;
    st["non_edge_mean_abs"] = res.non_edge_mean_abs;
    st["ratio"] = finite_or_null(res.ratio);
    write_json(out / "status.json", st);
  }
  return res;
}

// -- ablation --------------------------------------------------------------------

void AblationConfig::apply(const KeyValues& kv) {
  apply_prefixed(kv, "ablation",
                 {{"ts", list(ts)}, {"ws", list(ws)}, {"ms", count_list(ms)}, {"iters", count(iters)},
                  {"workers", count(workers)}});
}

std::vector<AblationRow> run_ablation(const RunConfig& base, const AblationConfig& cfg,
                                      const fs::path& out) {
  std::vector<AblationRow> rows;
  for (double t : cfg.ts) {
    for (std::size_t m : cfg.ms) rows.push_back({"tm", t, m, 1.0, kNaN, ""});
  }
  for (double w : cfg.ws) {
    for (std::size_t m : cfg.ms) rows.push_back({"wm", 1.0, m, w, kNaN, ""});
  }
  auto run_dir = [&](const AblationRow& r) {
    return out / (r.sweep + "_t" + fmt(r.t) + "_m" + std::to_string(r.m) + "_w" + fmt(r.w));
  };
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      RunConfig c = base;
      c.loss.kind = "ed";
      c.loss.t = rows[i].t;
      c.loss.m = rows[i].m;
      c.loss.w = rows[i].w;
      c.train.iters = cfg.iters;
      const TrainSummary s = cmd_train(c, run_dir(rows[i]));
      rows[i].status = s.status;
      rows[i].density_mse = s.metrics.back().density_mse;
    }
  };
  std::size_t workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, rows.size());
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < workers; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  fs::create_directories(out);
  std::ostringstream o;
  o << "sweep,t,m,w,density_mse,status\n";
  for (const auto& r : rows) {
    o << r.sweep << "," << fmt(r.t) << "," << r.m << "," << fmt(r.w) << "," << fmt(r.density_mse) << ","
      << r.status << "\n";
  }
  write_file_atomic(out / "ablation.csv", o.str());
  return rows;
}

// -- dispatch --------------------------------------------------------------------

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> n{"mixture", "wstudy", "ising", "graycode", "ablation-tmw"};
  return n;
}

std::string run_named_experiment(const std::string& name, const RunConfig& base,
                                 const KeyValues& extra, const fs::path& out) {
  ordered_json j;
  j["experiment"] = name;
  if (name == "mixture") {
    MixtureExperimentConfig c;
    c.seed = base.train.seed;
    c.apply(extra);
    const auto r = run_mixture_experiment(c, out);
    j["nll_fit"] = r.nll_fit;
    j["ed_fit"] = r.ed_fit;
    for (const auto& row : r.mse) {
      j["mse"].push_back({{"objective", row.objective}, {"t", finite_or_null(row.t)}, {"mse", row.mse}});
    }
  } else if (name == "wstudy") {
    WStudyConfig c;
    c.seed = base.train.seed;
    c.apply(extra);
    const auto r = run_wstudy(c, out);
    for (const auto& run : r.runs) {
      j["runs"].push_back({{"w", run.w},
                           {"status", run.status},
                           {"final_loss", finite_or_null(run.final_loss)},
                           {"bound_violations", run.bound_violations}});
    }
  } else if (name == "ising") {
    IsingExperimentConfig c;
    c.seed = base.train.seed;
    c.apply(extra);
    const auto r = run_ising_experiment(c, out);
    j["status"] = r.status;
    j["ratio"] = finite_or_null(r.ratio);
  } else if (name == "graycode") {
    RunConfig c = base;
    c.loss.kind = "ed-discrete";
    apply_prefixed(extra, "graycode", {});
    const auto s = cmd_train(c, out);
    j["status"] = s.status;
    j["final_density_mse"] = finite_or_null(s.metrics.back().density_mse);
  } else if (name == "ablation-tmw") {
    AblationConfig c;
    c.apply(extra);
    for (const auto& r : run_ablation(base, c, out)) {
      j["runs"].push_back({{"sweep", r.sweep},
                           {"t", r.t},
                           {"m", r.m},
                           {"w", r.w},
                           {"density_mse", finite_or_null(r.density_mse)},
                           {"status", r.status}});
    }
  } else {
    throw ConfigError("unknown experiment '" + name + "'");
  }
  return j.dump(2);
}

const std::vector<std::string>& verify_check_names() {
  static const std::vector<std::string> n{
      "thm2_gap",       "thm2_mc",      "consistency", "minimizer_discrete", "ou_equivalence",
      "ou_equivalence_mc", "ou_horizon", "ed_sm_identity", "sm_limit",
      "gibbs_stationarity"};
  return n;
}

std::vector<TheoryReport> run_verify(const std::string& name, std::uint64_t seed) {
  std::vector<TheoryReport> out;
  if (name == "all") {
    for (const auto& n : verify_check_names()) {
      auto part = run_verify(n, seed);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  if (name == "thm2_gap") {
    for (double mu : {0.0, 1.0, 2.0}) {
      for (double t : {1.0, 3.0, 10.0}) out.push_back(verify_thm2_gap(mu, t));
    }
  } else if (name == "thm2_mc") {
    out.push_back(verify_thm2_mc(1.0, 1.0, 100000, 4096, seed));
  } else if (name == "consistency") {
    TheoryReport r{"consistency"};
    const auto t0 = std::chrono::steady_clock::now();
    r.lhs = estimator_consistency_error(100000, 1024, 1.0, 1.0, 1.0, 10, seed);
    r.rhs = 0.02;
    r.one_sided = true;
    r.decide();
    r.details = {{"n", 1e5}, {"m", 1024}, {"t", 1}, {"w", 1}, {"mu", 1}, {"seeds", 10}};
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(r);
  } else if (name == "minimizer_discrete") {
    RngStream rng = RngStream(seed).split("minimizer");
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<double> p(8);
      for (double& v : p) v = 0.05 + rng.uniform();
      out.push_back(verify_minimizer_discrete(p, 3, 0.1, 100, rng));
    }
    const std::vector<double> uniform(8, 0.125);
    out.push_back(verify_minimizer_discrete(uniform, 3, 0.1, 100, rng));
    std::vector<double> p(8);
    for (double& v : p) v = 0.05 + rng.uniform();
    out.push_back(verify_minimizer_discrete(p, 3, 0.5, 100, rng));
  } else if (name == "ou_equivalence") {
    out.push_back(verify_ou_equivalence(0.0, 1.0, 1.0));
    out.push_back(verify_ou_equivalence(-0.5, 1.0, 1.0));
  } else if (name == "ou_equivalence_mc") {
    out.push_back(verify_ou_equivalence_mc(-0.5, 1.0, 1.0, 100000, 4096, seed));
  } else if (name == "ou_horizon") {
    const std::vector<double> ts{1.0, 2.0, 4.0, 8.0};
    out.push_back(verify_ou_horizon(0.5, 1.0, ts));
  } else if (name == "ed_sm_identity") {
    for (double t : {0.5, 1.0, 2.0}) out.push_back(verify_ed_sm_identity(t, 1.0, 1.0));
    out.push_back(verify_ed_sm_identity(1.0, 0.0, 1.0));
  } else if (name == "sm_limit") {
    out.push_back(verify_sm_limit(1.0, 2.0));
  } else if (name == "gibbs_stationarity") {
    RngStream rng = RngStream(seed).split("gibbs");
    Dense random_j(4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = i + 1; j < 4; ++j) random_j(i, j) = random_j(j, i) = rng.uniform() - 0.5;
    }
    const std::vector<std::pair<std::string, Dense>> cases{
        {"lattice_0.25", ising_lattice_coupling(2, 2, 0.25)},
        {"lattice_1", ising_lattice_coupling(2, 2, 1.0)},
        {"random", random_j}};
    for (const auto& [label, j] : cases) {
      TheoryReport r{"gibbs_stationarity"};
      const auto t0 = std::chrono::steady_clock::now();
      r.lhs = gibbs_stationarity_error(j);
      r.rhs = 1e-10;
      r.one_sided = true;
      r.decide();
      r.details = {{"sites", 4}, {"strength", label == "lattice_1" ? 1.0 : label == "random" ? NAN : 0.25}};
      r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out.push_back(r);
    }
  } else {
    throw ConfigError("unknown check '" + name + "'");
  }
  return out;
}

std::string report_json(const TheoryReport& r) {
  ordered_json j;
  j["check"] = r.check;
  j["lhs"] = finite_or_null(r.lhs);
  j["rhs"] = finite_or_null(r.rhs);
  j["tolerance"] = r.tolerance;
  j["one_sided"] = r.one_sided;
  j["pass"] = r.pass;
  j["runtime_s"] = r.runtime_s;
  ordered_json d = ordered_json::object();
  for (const auto& [k, v] : r.details) d[k] = finite_or_null(v);
  j["details"] = d;
  return j.dump();
}

}  // namespace edlab
