#include <cmath>
#include <stdexcept>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "edlab/config.hpp"
#include "edlab/experiments.hpp"
#include "edlab/runs.hpp"
#include "support.hpp"

using namespace edlab;
using nlohmann::json;
using testing::first_line;
using testing::line_count;
using testing::slurp;

namespace {

RunConfig tiny_run(const std::string& kind) {
  RunConfig c;
  c.loss.kind = kind;
  c.model.hidden = 16;
  c.model.layers = 3;
  c.train.iters = 20;
  c.train.lr = 1e-2;
  c.eval.grid = 10;
  c.eval.logz_n = 200;
  c.eval.eval_every = 10;
  c.sample.n = 50;
  c.sample.langevin_steps = 5;
  c.data.batch = 32;
  return c;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  std::string cell;
  while (std::getline(s, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("parse sections, comments and quotes") {
    const KeyValues kv = parse_config_text(
        "# top\n[loss]\nkind = \"sm\"\nt = 0.5  # trailing\n\n[train]\niters=10\n");
    CHECK(kv.at("loss.kind") == "sm");
    CHECK(kv.at("loss.t") == "0.5");
    CHECK(kv.at("train.iters") == "10");
    CHECK_THROWS_AS(parse_config_text("[loss\nkind = ed\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[loss]\nnovalue\n"), ConfigError);
  }

  TEST_CASE("overrides and validation") {
    const auto [k, v] = parse_override("loss.m=16");
    CHECK(k == "loss.m");
    CHECK(v == "16");
    CHECK_THROWS_AS(parse_override("nokey"), ConfigError);
    RunConfig c;
    c.apply({{"loss.m", "16"}, {"data.name", "pinwheel"}});
    CHECK(c.loss.m == 16);
    CHECK(c.data.name == "pinwheel");
    CHECK_THROWS_AS(c.apply({{"loss.bogus", "1"}}), ConfigError);
    CHECK_THROWS_AS(c.apply({{"loss.m", "four"}}), ConfigError);
    RunConfig bad;
    bad.loss.kind = "mle";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = RunConfig{};
    bad.data.name = "nope";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = RunConfig{};
    bad.loss.t = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(loss_kinds().size() == 5);
  }

  TEST_CASE("echo round trip") {
    RunConfig c;
    c.apply({{"loss.kind", "dsm"}, {"loss.t", "0.3"}, {"train.seed", "77"}, {"model.activation", "silu"}});
    RunConfig back;
    back.apply(parse_config_text(c.to_toml()));
    CHECK(back.to_toml() == c.to_toml());
    CHECK(back.train.seed == 77);
  }
}

TEST_SUITE("runs") {
  TEST_CASE("train writes the documented files") {
    testing::ScratchDir dir("train");
    const RunConfig cfg = tiny_run("ed");
    const TrainSummary s = cmd_train(cfg, dir.path);
    CHECK(s.status == "ok");
    CHECK(s.iters_completed == 20);

    const std::string metrics = slurp(dir.path / "metrics.csv");
    CHECK(first_line(metrics) == "iter,loss,density_mse,logz");
    CHECK(line_count(metrics) == 4);  // header + iters 0, 10, 20
    std::stringstream ms(metrics);
    std::string line;
    std::getline(ms, line);
    std::vector<std::string> iters;
    while (std::getline(ms, line)) {
      const auto cells = split_csv(line);
      REQUIRE(cells.size() == 4);
      iters.push_back(cells[0]);
      for (const auto& c : cells) CHECK(std::isfinite(std::stod(c)));
    }
    CHECK(iters == std::vector<std::string>{"0", "10", "20"});

    const std::string grid = slurp(dir.path / "energy_grid.csv");
    CHECK(first_line(grid) == "x1,x2,energy");
    CHECK(line_count(grid) == 101);
    const std::string samples = slurp(dir.path / "samples.csv");
    CHECK(first_line(samples) == "x1,x2");
    CHECK(line_count(samples) == 51);

    const json st = json::parse(slurp(dir.path / "status.json"));
    CHECK(st.at("status") == "ok");
    CHECK(st.at("loss_kind") == "ed");
    CHECK(st.at("iters_completed") == 20);
    CHECK(st.at("diverged_at").is_null());
    CHECK(st.at("final_loss").is_number());
    CHECK(st.at("final_density_mse").is_number());

    RunConfig echoed;
    echoed.apply(parse_config_file((dir.path / "config.toml").string()));
    CHECK(echoed.to_toml() == cfg.to_toml());

    const EnergyModel m = load_checkpoint(dir.path / "model.ckpt");
    CHECK(m.params() == s.model->params());
  }

  TEST_CASE("replay is byte-identical") {
    testing::ScratchDir a("replay_a"), b("replay_b");
    for (const char* kind : {"ed", "cd", "sm", "dsm", "ed-discrete"}) {
      RunConfig cfg = tiny_run(kind);
      cfg.train.iters = 6;
      cfg.eval.eval_every = 3;
      cmd_train(cfg, a.path / kind);
      cmd_train(cfg, b.path / kind);
      for (const char* f : {"metrics.csv", "energy_grid.csv", "samples.csv", "status.json", "model.ckpt"}) {
        INFO(kind << " " << f);
        CHECK(slurp(a.path / kind / f) == slurp(b.path / kind / f));
      }
    }
  }

  TEST_CASE("zero-initialised ED starts near ln 1.25") {
    testing::ScratchDir dir("zero");
    RunConfig cfg = tiny_run("ed");
    cfg.model.init = "zero";
    cfg.train.iters = 1;
    const TrainSummary s = cmd_train(cfg, dir.path);
    CHECK(std::abs(s.metrics.front().loss - std::log(1.25)) < 0.05);
  }

  TEST_CASE("datasets without a density log nan") {
    testing::ScratchDir dir("pinwheel");
    RunConfig cfg = tiny_run("sm");
    cfg.data.name = "pinwheel";
    cfg.train.iters = 2;
    cmd_train(cfg, dir.path);
    const std::string metrics = slurp(dir.path / "metrics.csv");
    CHECK(metrics.find(",nan,nan") != std::string::npos);
    const json st = json::parse(slurp(dir.path / "status.json"));
    CHECK(st.at("final_density_mse").is_null());
  }

  TEST_CASE("divergence is recorded") {
    testing::ScratchDir dir("diverge");
    RunConfig cfg = tiny_run("cd");
    cfg.train.lr = 1e6;
    cfg.loss.step_size = 50.0;
    cfg.train.iters = 200;
    const TrainSummary s = cmd_train(cfg, dir.path);
    const json st = json::parse(slurp(dir.path / "status.json"));
    CHECK(st.at("status") == s.status);
    if (s.status == "diverged") {
      CHECK(st.at("diverged_at").is_number());
      CHECK(line_count(slurp(dir.path / "samples.csv")) == 1);
    }
  }

  TEST_CASE("sample and eval-density from a checkpoint") {
    testing::ScratchDir dir("sample");
    const RunConfig cfg = tiny_run("ed");
    cmd_train(cfg, dir.path);
    const Dense x = cmd_sample(dir.path / "model.ckpt", 20, LangevinConfig{3, 0.1}, 1, dir.path / "s.csv");
    CHECK(x.rows() == 20);
    CHECK(first_line(slurp(dir.path / "s.csv")) == "x1,x2");
    const DensityReport r = cmd_eval_density(dir.path / "model.ckpt", "gauss25", 10, 200, 0);
    CHECK(std::isfinite(r.log_z));
    CHECK(r.density_mse > 0.0);
    CHECK_THROWS_AS(cmd_eval_density(dir.path / "model.ckpt", "moons", 10, 200, 0), std::invalid_argument);
  }

  TEST_CASE("ED training lowers the density error") {
    testing::ScratchDir dir("ed2000");
    RunConfig cfg;
    cfg.train.iters = 2000;
    cfg.eval.eval_every = 2000;
    const TrainSummary s = cmd_train(cfg, dir.path);
    REQUIRE(s.metrics.size() == 2);
    CHECK(s.metrics.back().density_mse < s.metrics.front().density_mse);
  }
}

TEST_SUITE("experiments") {
  TEST_CASE("mixture files") {
    testing::ScratchDir dir("mixture");
    MixtureExperimentConfig c;
    c.n_fit = 2000;
    c.n_mse = 200;
    c.runs = 3;
    c.ts = {0.25, 4.0};
    const MixtureExperimentResult r = run_mixture_experiment(c, dir.path);
    CHECK(first_line(slurp(dir.path / "curves.csv")) == "rho,nll,sm,ed_t0.25,ed_t4");
    CHECK(line_count(slurp(dir.path / "curves.csv")) == r.rho_grid.size() + 1);
    const std::string table = slurp(dir.path / "metrics.csv");
    CHECK(first_line(table) == "objective,t,m,w,n,runs,mse");
    CHECK(table.find("\nnll,nan,") != std::string::npos);
    CHECK(line_count(table) == 1 + 1 + c.ts.size());
    const json st = json::parse(slurp(dir.path / "status.json"));
    CHECK(st.at("status") == "ok");
    CHECK(st.at("nll_fit").is_number());
  }

  TEST_CASE("w-study files") {
    testing::ScratchDir dir("wstudy");
    WStudyConfig c;
    c.n = 256;
    c.batch = 64;
    c.epochs = 2;
    const WStudyResult r = run_wstudy(c, dir.path);
    CHECK(r.runs.size() == 4);
    const std::string loss = slurp(dir.path / "loss.csv");
    CHECK(first_line(loss) == "w,epoch,loss");
    const std::string energy = slurp(dir.path / "energy.csv");
    CHECK(first_line(energy) == "w,x,energy");
    CHECK(line_count(energy) == 1 + 4 * r.x_grid.size());
    const json st = json::parse(slurp(dir.path / "status.json"));
    CHECK(st.at("runs").size() == 4);
    for (const auto& run : st.at("runs")) {
      CHECK(run.contains("bound_violations"));
      CHECK((run.at("status") == "ok" || run.at("status") == "diverged"));
    }
  }

  TEST_CASE("ising files") {
    testing::ScratchDir dir("ising");
    IsingExperimentConfig c;
    c.h = c.w_sites = 3;
    c.samples = 200;
    c.burn_in = 20;
    c.iters = 20;
    c.batch = 64;
    c.m = 8;
    run_ising_experiment(c, dir.path);
    const std::string coupling = slurp(dir.path / "coupling.csv");
    CHECK(first_line(coupling) == "i,j,true,estimate");
    CHECK(line_count(coupling) == 1 + 9 * 9);
    CHECK(first_line(slurp(dir.path / "metrics.csv")) == "iter,loss");
    const json st = json::parse(slurp(dir.path / "status.json"));
    CHECK(st.contains("ratio"));
  }

  TEST_CASE("ablation and dispatch") {
    testing::ScratchDir dir("ablation");
    RunConfig base = tiny_run("ed");
    base.train.iters = 2;
    AblationConfig c;
    c.ts = {1.0};
    c.ws = {0.5};
    c.ms = {2, 4};
    c.iters = 2;
    c.workers = 2;
    const auto rows = run_ablation(base, c, dir.path);
    CHECK(rows.size() == 4);
    const std::string table = slurp(dir.path / "ablation.csv");
    CHECK(first_line(table) == "sweep,t,m,w,density_mse,status");
    CHECK(line_count(table) == 5);

    CHECK_THROWS_AS(run_named_experiment("nope", base, {}, dir.path / "x"), ConfigError);
    CHECK_THROWS_AS(run_named_experiment("mixture", base, {{"mixture.bogus", "1"}}, dir.path / "y"), ConfigError);
    CHECK_THROWS_AS(run_verify("nope", 0), ConfigError);
    const auto reports = run_verify("thm2_gap", 0);
    CHECK(!reports.empty());
    const json j = json::parse(report_json(reports.front()));
    for (const char* k : {"check", "lhs", "rhs", "tolerance", "one_sided", "pass", "runtime_s", "details"}) {
      CHECK(j.contains(k));
    }
  }
}
