// edlab command line: training, sampling, evaluation, experiments, checks.
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edlab/config.hpp"
#include "edlab/datasets.hpp"
#include "edlab/experiments.hpp"
#include "edlab/io.hpp"
#include "edlab/runs.hpp"

namespace fs = std::filesystem;
using namespace edlab;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

const std::vector<std::string> kExperimentSections{"mixture", "wstudy", "ising", "ablation", "graycode"};

struct CommonOpts {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
};

void add_common(CLI::App* app, CommonOpts& o) {
  app->add_option("--config", o.config, "TOML-style config file")->check(CLI::ExistingFile);
  app->add_option("--out", o.out, "output directory");
  app->add_option("--seed", o.seed, "seed (overrides train.seed)");
  app->add_option("--set", o.sets, "section.key=value override (repeatable)");
}

// Splits config entries into run settings and experiment options.
std::pair<RunConfig, KeyValues> resolve(const CommonOpts& o) {
  KeyValues kv;
  if (!o.config.empty()) kv = parse_config_file(o.config);
  for (const auto& s : o.sets) {
    auto [k, v] = parse_override(s);
    kv[k] = v;
  }
  KeyValues run_kv, extra;
  for (const auto& [k, v] : kv) {
    const auto section = k.substr(0, k.find('.'));
    bool exp = false;
    for (const auto& s : kExperimentSections) exp = exp || section == s;
    (exp ? extra : run_kv)[k] = v;
  }
  RunConfig cfg;
  cfg.apply(run_kv);
  if (o.seed) cfg.train.seed = *o.seed;
  cfg.validate();
  return {cfg, extra};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edlab: energy discrepancy training and verification"};
  app.require_subcommand(1);

  CommonOpts train_o;
  auto* train = app.add_subcommand("train", "train a 2D energy model");
  add_common(train, train_o);

  std::string ckpt;
  std::size_t n_samples = 1000;
  LangevinConfig lcfg;
  std::uint64_t sample_seed = 0;
  std::string sample_out = "samples.csv";
  auto* sample = app.add_subcommand("sample", "Langevin samples from a checkpoint");
  sample->add_option("--ckpt", ckpt, "checkpoint path")->required();
  sample->add_option("--n", n_samples, "number of chains");
  sample->add_option("--steps", lcfg.steps, "Langevin steps");
  sample->add_option("--step-size", lcfg.step_size, "Langevin step size");
  sample->add_option("--seed", sample_seed, "seed");
  sample->add_option("--out", sample_out, "output CSV");

  std::string eval_data = "gauss25";
  std::size_t eval_grid = 100, eval_logz_n = 5000;
  std::uint64_t eval_seed = 0;
  auto* evald = app.add_subcommand("eval-density", "log Z and density MSE of a checkpoint");
  evald->add_option("--ckpt", ckpt, "checkpoint path")->required();
  evald->add_option("--data", eval_data, "dataset with exact density");
  evald->add_option("--grid", eval_grid, "grid resolution per axis");
  evald->add_option("--logz-n", eval_logz_n, "importance samples for log Z");
  evald->add_option("--seed", eval_seed, "seed");

  CommonOpts exp_o;
  std::string exp_name;
  auto* experiment = app.add_subcommand("experiment", "run a named experiment");
  experiment->add_option("name", exp_name, "mixture | wstudy | ising | graycode | ablation-tmw")->required();
  add_common(experiment, exp_o);

  std::string check = "all";
  std::uint64_t verify_seed = 0;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "theory checks; one JSON report per line");
  verify->add_option("check", check, "check name or 'all'");
  verify->add_option("--seed", verify_seed, "seed");
  verify->add_option("--out", verify_out, "also write the reports to this file");

  auto* datasets = app.add_subcommand("datasets", "dataset utilities");
  datasets->require_subcommand(1);
  std::string ds_name = "gauss25", ds_out;
  std::size_t ds_n = 1000;
  std::uint64_t ds_seed = 0;
  auto* dump = datasets->add_subcommand("dump", "write samples as x1,x2[,logp] CSV");
  dump->add_option("--name", ds_name, "generator name");
  dump->add_option("--n", ds_n, "number of points");
  dump->add_option("--seed", ds_seed, "seed");
  dump->add_option("--out", ds_out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*train) {
      auto [cfg, extra] = resolve(train_o);
      if (!extra.empty()) throw ConfigError("train: unexpected key '" + extra.begin()->first + "'");
      const fs::path out = train_o.out.empty() ? fs::path("run") : fs::path(train_o.out);
      const TrainSummary s = cmd_train(cfg, out);
      std::cout << "status " << s.status << ", iterations " << s.iters_completed << ", run dir " << out.string()
                << "\n";
      return kOk;
    }
    if (*sample) {
      cmd_sample(ckpt, n_samples, lcfg, sample_seed, sample_out);
      std::cout << "wrote " << sample_out << "\n";
      return kOk;
    }
    if (*evald) {
      const DensityReport r = cmd_eval_density(ckpt, eval_data, eval_grid, eval_logz_n, eval_seed);
      std::cout << "{\"logz\": " << format_double(r.log_z) << ", \"density_mse\": " << format_double(r.density_mse)
                << "}\n";
      return kOk;
    }
    if (*experiment) {
      auto [cfg, extra] = resolve(exp_o);
      const fs::path out = exp_o.out.empty() ? fs::path("experiment-" + exp_name) : fs::path(exp_o.out);
      std::cout << run_named_experiment(exp_name, cfg, extra, out) << "\n";
      return kOk;
    }
    if (*verify) {
      const auto reports = run_verify(check, verify_seed);
      std::string text;
      bool ok = true;
      for (const auto& r : reports) {
        text += report_json(r) + "\n";
        ok = ok && r.pass;
      }
      std::cout << text;
      if (!verify_out.empty()) write_file_atomic(verify_out, text);
      return ok ? kOk : kFailed;
    }
    if (*dump) {
      RngStream rng = RngStream(ds_seed).split("dump");
      const ToySample s = sample_toy2d(ds_name, ds_n, rng);
      Dense rows(ds_n, s.logp ? 3 : 2);
      for (std::size_t i = 0; i < ds_n; ++i) {
        rows(i, 0) = s.points(i, 0);
        rows(i, 1) = s.points(i, 1);
        if (s.logp) rows(i, 2) = (*s.logp)[i];
      }
      std::vector<std::string> header{"x1", "x2"};
      if (s.logp) header.push_back("logp");
      write_file_atomic(ds_out, csv_points(rows, header));
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kUsage;
}
