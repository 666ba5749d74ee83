// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// The heavy training criteria share their run directories with the
// determinism rerun, so the whole thing is roughly 25 min on one core.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edlab/datasets.hpp"
#include "edlab/evalharness.hpp"
#include "edlab/experiments.hpp"
#include "edlab/ndcore.hpp"
#include "edlab/runs.hpp"
#include "edlab/samplers.hpp"

namespace fs = std::filesystem;
using namespace edlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_s;  // stated runtime ceiling; 0 = none
  std::function<Outcome()> run;
};

std::string g(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// shared state between criteria 6/8 and the determinism rerun
fs::path g_work;
std::uint64_t g_seed = 0;
std::set<int> g_done;

MixtureExperimentConfig mixture_cfg() {
  MixtureExperimentConfig c;
  c.seed = g_seed;
  return c;
}

RunConfig density_cfg(const std::string& kind) {
  RunConfig c;
  c.loss.kind = kind;
  c.train.iters = 20000;
  c.data.batch = 256;
  c.train.seed = g_seed;
  return c;
}

double mse_at(const TrainSummary& s, std::size_t iter) {
  for (const auto& r : s.metrics)
    if (r.iter == iter) return r.density_mse;
  return std::numeric_limits<double>::quiet_NaN();
}

Outcome thm2_bound() {
  Outcome o{true, ""};
  double worst = 0.0;
  for (double mu : {1.0, 2.0}) {
    for (double t : {1.0, 3.0, 10.0}) {
      const TheoryReport r = verify_thm2_gap(mu, t);
      const double bound = mu * mu / (2.0 * t);
      worst = std::max(worst, std::abs(r.lhs - r.rhs));
      if (!r.pass || !(r.lhs <= bound)) o.pass = false;
    }
  }
  o.detail = "max |gap - mu^2/(2(1+t))| = " + g(worst);
  return o;
}

Outcome consistency() {
  const double err = estimator_consistency_error(100000, 1024, 1.0, 1.0, 1.0, 10, g_seed);
  return {err <= 0.02, "|mean L - analytic| = " + g(err) + " (<= 0.02)"};
}

Outcome discrete_minimizer() {
  RngStream rng = RngStream(g_seed).split("acceptance-minimizer");
  Outcome o{true, ""};
  double worst_first = 0.0, least_increase = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> p(8);
    for (double& v : p) v = 0.05 + rng.uniform();
    const TheoryReport r = verify_minimizer_discrete(p, 3, 0.1, 100, rng);
    o.pass = o.pass && r.pass;
    worst_first = std::max(worst_first, std::abs(r.lhs));
    for (const auto& [k, v] : r.details)
      if (k == "min_increase") least_increase = std::min(least_increase, v);
  }
  o.detail = "max |first variation| = " + g(worst_first) + ", min ED increase = " + g(least_increase);
  return o;
}

Outcome ou() {
  const TheoryReport a = verify_ou_equivalence(-0.5, 1.0, 1.0);
  const TheoryReport m = verify_ou_equivalence_mc(-0.5, 1.0, 1.0, 100000, 4096, g_seed);
  const double diff = std::abs(a.lhs - a.rhs);
  return {a.pass && diff < 1e-9 && m.pass,
          "analytic diff " + g(diff) + ", MC diff " + g(std::abs(m.lhs - m.rhs)) + " vs 3SE " +
              g(m.tolerance)};
}

Outcome ed_sm_identity() {
  Outcome o{true, ""};
  double worst = 0.0;
  for (double t : {0.5, 1.0, 2.0}) {
    const TheoryReport r = verify_ed_sm_identity(t, 1.0, 1.0);
    worst = std::max(worst, std::abs(r.lhs - r.rhs));
    o.pass = o.pass && worst < 1e-4;
  }
  o.detail = "max |dED/dt - SM integrand| = " + g(worst);
  return o;
}

Outcome mixture() {
  const MixtureExperimentConfig cfg = mixture_cfg();
  const MixtureExperimentResult r = run_mixture_experiment(cfg, g_work / "mixture");
  g_done.insert(6);

  double lo = r.sm_curve.front(), hi = lo, sum = 0.0;
  for (double v : r.sm_curve) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  const double mean = sum / static_cast<double>(r.sm_curve.size());
  const bool flat = (hi - lo) < 1e-3 * (1.0 + std::abs(mean));
  const bool nll_ok = std::abs(r.nll_fit - cfg.rho_true) <= 0.03;
  const bool ed_ok = std::abs(r.ed_fit - cfg.rho_true) <= 0.05;

  std::map<double, double> ed_mse;
  for (const auto& row : r.mse)
    if (row.objective == "ed") ed_mse[row.t] = row.mse;
  bool monotone = true;
  const std::vector<double> ts{0.25, 1.0, 4.0};
  std::string trail;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (!ed_mse.count(ts[k])) monotone = false;
    trail += (k ? " " : "") + g(ed_mse[ts[k]]);
    if (k > 0 && !(ed_mse[ts[k]] <= 1.2 * ed_mse[ts[k - 1]])) monotone = false;
  }
  return {flat && nll_ok && ed_ok && monotone,
          "SM spread " + g(hi - lo) + ", nll fit " + g(r.nll_fit) + ", ed fit " + g(r.ed_fit) +
              ", ed mse over t " + trail};
}

Outcome gradients() {
  Outcome o{true, ""};
  for (const char* kind : {"ed", "ed-discrete", "cd", "sm", "dsm"}) {
    const RngStream base = RngStream(g_seed).split("acceptance-grad").split(kind);
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
      RngStream rng = base.split(trial);
      worst = std::max(worst, check_loss_gradient(kind, rng, 1e-4).rel_error);
    }
    o.pass = o.pass && worst < 1e-4;
    o.detail += std::string(o.detail.empty() ? "" : ", ") + kind + " " + g(worst);
  }
  return o;
}

Outcome density() {
  std::map<std::string, TrainSummary> runs;
  for (const char* kind : {"ed", "sm", "cd"}) {
    runs[kind] = cmd_train(density_cfg(kind), g_work / "density" / kind);
  }
  g_done.insert(8);
  const double ed_final = runs["ed"].metrics.back().density_mse;
  const double sm_final = runs["sm"].metrics.back().density_mse;
  const double cd_final = runs["cd"].metrics.back().density_mse;
  const double ed_half = mse_at(runs["ed"], 10000);
  const bool pass = ed_final < sm_final && ed_final < cd_final && ed_half < sm_final &&
                    ed_half < cd_final;
  return {pass, "final mse ed " + g(ed_final) + " sm " + g(sm_final) + " cd " + g(cd_final) +
                    ", ed@10k " + g(ed_half) + " (status " + runs["ed"].status + "/" +
                    runs["sm"].status + "/" + runs["cd"].status + ")"};
}

Outcome wstudy() {
  WStudyConfig cfg;
  cfg.seed = g_seed;
  const WStudyResult r = run_wstudy(cfg, g_work / "wstudy");
  Outcome o{true, ""};
  for (const auto& run : r.runs) {
    if (run.bound_violations != 0) o.pass = false;
    const bool finished = run.status == "ok" && run.epochs_completed == cfg.epochs &&
                          std::isfinite(run.final_loss);
    if (run.w == 0.0) {
      if (!(finished || run.status == "diverged")) o.pass = false;
    } else if (!finished) {
      o.pass = false;
    }
    o.detail += std::string(o.detail.empty() ? "" : ", ") + "w=" + g(run.w) + " " + run.status +
                " " + g(run.final_loss);
  }
  return o;
}

Outcome discrete() {
  double worst = 0.0;
  for (double s : {0.25, 1.0}) worst = std::max(worst, gibbs_stationarity_error(ising_lattice_coupling(2, 2, s)));
  IsingExperimentConfig cfg;
  cfg.seed = g_seed;
  const IsingExperimentResult r = run_ising_experiment(cfg, g_work / "ising");
  return {worst < 1e-10 && r.status == "ok" && r.ratio >= 2.0,
          "gibbs error " + g(worst) + ", edge/non-edge ratio " + g(r.ratio)};
}

Outcome determinism() {
  // criteria 6 and 8 leave their outputs behind; rerun both into a second tree
  if (!g_done.count(6)) run_mixture_experiment(mixture_cfg(), g_work / "mixture");
  if (!g_done.count(8))
    for (const char* kind : {"ed", "sm", "cd"}) cmd_train(density_cfg(kind), g_work / "density" / kind);
  const fs::path again = g_work / "rerun";
  run_mixture_experiment(mixture_cfg(), again / "mixture");
  for (const char* kind : {"ed", "sm", "cd"}) cmd_train(density_cfg(kind), again / "density" / kind);

  Outcome o{true, ""};
  for (const fs::path& rel : {fs::path("mixture"), fs::path("density/ed"), fs::path("density/sm"),
                             fs::path("density/cd")}) {
    const std::string a = slurp(g_work / rel / "metrics.csv");
    const bool same = !a.empty() && a == slurp(again / rel / "metrics.csv");
    o.pass = o.pass && same;
    o.detail += std::string(o.detail.empty() ? "" : ", ") + rel.string() + (same ? " same" : " DIFFERS");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edlab acceptance criteria"};
  std::vector<int> only;
  std::string work = (fs::temp_directory_path() / "edlab_acceptance").string();
  app.add_option("--only", only, "criterion ids to run (default: all)");
  app.add_option("--work", work, "scratch directory for run outputs");
  app.add_option("--seed", g_seed, "seed");
  CLI11_PARSE(app, argc, argv);

  g_work = work;
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  const std::vector<Criterion> all{
      {1, "gap of the Gaussian shift example", 1, thm2_bound},
      {2, "estimator consistency", 60, consistency},
      {3, "discrete minimiser by enumeration", 10, discrete_minimizer},
      {4, "OU perturbation equivalence", 60, ou},
      {5, "ED derivative in t vs SM integrand", 1, ed_sm_identity},
      {6, "mixture weight study", 300, mixture},
      {7, "gradient suite", 60, gradients},
      {8, "gauss25 density: ED vs SM and CD", 3600, density},
      {9, "w stabilisation", 120, wstudy},
      {10, "discrete ED: Gibbs and Ising recovery", 600, discrete},
      {11, "determinism of criteria 6 and 8", 0, determinism},
  };

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass;
    std::string timing = g(secs) + "s";
    if (c.budget_s > 0) {
      timing += " of " + g(c.budget_s) + "s";
      if (secs > c.budget_s) {
        pass = false;
        timing += " OVER BUDGET";
      }
    }
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.title << " -- "
              << o.detail << " [" << timing << "]" << std::endl;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << "(" << failed << " failing)" << std::endl;
  return failed ? 1 : 0;
}
