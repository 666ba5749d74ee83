#include <chrono>
#include <cmath>
#include <stdexcept>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "edlab/datasets.hpp"
#include "edlab/evalharness.hpp"

using namespace edlab;

namespace {

double normal_logp(double x) { return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi); }

}  // namespace

TEST_SUITE("evalharness") {
  TEST_CASE("log Z: exact and shifted models") {
    const EnergyModel mix = EnergyModel::mixture1d(0.2);
    RngStream r(1);
    const Dense x = sample_mixture1d(0.2, 1000, r);
    std::vector<double> logp(1000), shifted(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
      logp[i] = mixture1d_logp(0.2, x[i]);
      shifted[i] = logp[i] - 2.5;  // as if E = -logp + 2.5
    }
    CHECK(std::abs(estimate_log_z(mix, x, logp)) < 1e-12);
    CHECK(estimate_log_z(mix, x, shifted) == doctest::Approx(2.5).epsilon(1e-12));
  }

  TEST_CASE("log Z: gaussian mismatch") {
    const double var = 1.5;
    const EnergyModel q = EnergyModel::gauss_quad({0.0}, var);
    RngStream r(2);
    const std::size_t n = 5000;
    Dense x(n, 1);
    r.fill_normal(x.span());
    std::vector<double> logp(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      logp[i] = normal_logp(x[i]);
      w[i] = std::exp(-x[i] * x[i] / (2 * var) - logp[i]);
    }
    double m = 0.0, v = 0.0;
    for (double a : w) m += a;
    m /= n;
    for (double a : w) v += (a - m) * (a - m);
    const double se = std::sqrt(v / (n - 1) / n) / m;
    const double exact = 0.5 * std::log(2.0 * std::numbers::pi * var);
    CHECK(std::abs(estimate_log_z(q, x, logp) - exact) < 3.0 * se);
  }

  TEST_CASE("density mse") {
    const EnergyModel q = EnergyModel::gauss_quad({0.0}, 2.0);
    Dense grid(13, 1);
    std::vector<double> truth(13);
    for (std::size_t i = 0; i < 13; ++i) {
      grid[i] = -3.0 + 0.5 * i;
      truth[i] = normal_logp(grid[i]);
    }
    const double log_z = 0.5 * std::log(4.0 * std::numbers::pi);
    CHECK(std::abs(density_mse(q, log_z, grid, truth) - 0.88079697048959821043) < 1e-6);

    const EnergyModel mix = EnergyModel::mixture1d(0.4);
    std::vector<double> mt(13);
    for (std::size_t i = 0; i < 13; ++i) mt[i] = mixture1d_logp(0.4, grid[i]);
    CHECK(density_mse(mix, 0.0, grid, mt) < 1e-24);
  }

  TEST_CASE("square grid ordering") {
    const Dense g = square_grid(3, 4.5);
    CHECK(g.rows() == 9);
    CHECK(g(0, 0) == -4.5);
    CHECK(g(1, 0) == 0.0);
    CHECK(g(1, 1) == -4.5);
    CHECK(g(8, 0) == 4.5);
    CHECK(g(8, 1) == 4.5);
  }

  TEST_CASE("golden section") {
    const double x = golden_section_min([](double v) { return (v - 0.37) * (v - 0.37); }, 0.0, 1.0, 1e-8);
    CHECK(std::abs(x - 0.37) < 1e-7);
  }

  TEST_CASE("mixture objective curves") {
    RngStream r(3);
    const Dense data = sample_mixture1d(0.2, 10000, r);
    std::vector<double> grid;
    for (double rho = 0.05; rho < 0.951; rho += 0.05) grid.push_back(rho);
    const MixtureStudyConfig cfg;
    RngStream c1(4), c2(4), c3(4);
    const auto sm = mixture_objective_curve(MixtureObjective::sm, grid, data, cfg, c1);
    const auto nll = mixture_objective_curve(MixtureObjective::nll, grid, data, cfg, c2);
    const auto ed = mixture_objective_curve(MixtureObjective::ed, grid, data, cfg, c3);
    double lo = sm[0], hi = sm[0], mean = 0.0;
    for (double v : sm) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      mean += v / sm.size();
    }
    CHECK(hi - lo < 1e-3 * (1.0 + std::abs(mean)));
    auto argmin = [&](const std::vector<double>& v) {
      std::size_t k = 0;
      for (std::size_t i = 1; i < v.size(); ++i) k = v[i] < v[k] ? i : k;
      return grid[k];
    };
    CHECK(std::abs(argmin(nll) - 0.2) < 0.026);
    CHECK(std::abs(argmin(ed) - 0.2) <= 0.05 + 1e-12);
    for (std::size_t i = 1; i + 1 < ed.size(); ++i) CHECK(ed[i - 1] - 2 * ed[i] + ed[i + 1] >= -1e-3);

    RngStream f1(5), f2(5);
    const double nll_hat = fit_mixture_weight(MixtureObjective::nll, data, cfg, f1);
    const double ed_hat = fit_mixture_weight(MixtureObjective::ed, data, cfg, f2);
    CHECK(std::abs(nll_hat - 0.2) < 0.03);
    CHECK(std::abs(ed_hat - 0.2) < 0.05);
    RngStream f3(5);
    CHECK_THROWS(fit_mixture_weight(MixtureObjective::sm, data, cfg, f3));
  }

  TEST_CASE("frozen ED objective is deterministic in rho") {
    RngStream r(6);
    const Dense data = sample_mixture1d(0.2, 500, r);
    RngStream c(7);
    const MixtureObjectiveFn f(MixtureObjective::ed, data, MixtureStudyConfig{}, c);
    CHECK(f(0.3) == f(0.3));
    CHECK(f(0.3) != f(0.31));
  }

  TEST_CASE("mse repetitions replay") {
    const RngStream r(8);
    const MixtureStudyConfig cfg;
    const MixtureMseResult a = mixture_weight_mse(MixtureObjective::nll, 500, 5, cfg, r);
    const MixtureMseResult b = mixture_weight_mse(MixtureObjective::nll, 500, 5, cfg, r);
    CHECK(a.estimates == b.estimates);
    CHECK(a.estimates.size() == 5);
    double mse = 0.0;
    for (double e : a.estimates) mse += (e - 0.2) * (e - 0.2) / 5.0;
    CHECK(a.mse == doctest::Approx(mse).epsilon(1e-14));
  }
}

TEST_SUITE("theory") {
  TEST_CASE("analytic ED values") {
    CHECK(ed_gaussian_analytic(1.0, 1.0, 1.0) == doctest::Approx(-0.09657359027997265471).epsilon(1e-14));
    for (double mu : {0.0, 1.0, 2.0}) {
      for (double t : {0.5, 1.0, 3.0}) {
        CHECK(ed_gaussian_analytic(mu, 1.0, t) ==
              doctest::Approx(mu * mu * t / (2 * (1 + t)) - 0.5 * std::log1p(t)).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("gap and bound") {
    const TheoryReport r = verify_thm2_gap(2.0, 3.0);
    CHECK(r.pass);
    CHECK(r.lhs == doctest::Approx(0.5).epsilon(1e-12));
    bool found = false;
    for (const auto& [k, v] : r.details) {
      if (k == "bound") {
        found = true;
        CHECK(v == doctest::Approx(4.0 / 6.0).epsilon(1e-14));
      }
    }
    CHECK(found);
    const TheoryReport z = verify_thm2_gap(0.0, 1.0);
    CHECK(z.pass);
    CHECK(std::abs(z.lhs) < 1e-12);
    for (double mu : {1.0, 2.0}) {
      for (double t : {1.0, 3.0, 10.0}) CHECK(verify_thm2_gap(mu, t).pass);
    }
  }

  TEST_CASE("ou kernel") {
    CHECK(ou_effective_time(-0.5, 1.0, 1.0) == doctest::Approx(1.718281828459045235).epsilon(1e-14));
    CHECK(ou_variance(0.0, 1.0, 2.0) == doctest::Approx(2.0));
    const TheoryReport a0 = verify_ou_equivalence(0.0, 1.0, 1.0);
    CHECK(std::abs(a0.lhs - a0.rhs) < 1e-12);
    const TheoryReport a = verify_ou_equivalence(-0.5, 1.0, 1.0);
    CHECK(a.pass);
    CHECK(std::abs(a.lhs - a.rhs) < 1e-9);
    const std::vector<double> ts{1.0, 2.0, 4.0, 8.0};
    CHECK(verify_ou_horizon(0.5, 1.0, ts).pass);
    const TheoryReport mc = verify_ou_equivalence_mc(-0.5, 1.0, 1.0, 20000, 256, 3);
    CHECK(mc.pass);
  }

  TEST_CASE("ED derivative and score matching") {
    for (double t : {0.5, 1.0, 2.0}) CHECK(verify_ed_sm_identity(t, 1.0, 1.0).pass);
    const TheoryReport matched = verify_ed_sm_identity(1.0, 0.0, 1.0);
    CHECK(std::abs(matched.lhs - matched.rhs) < 1e-6);
    const TheoryReport lim = verify_sm_limit(1.0, 2.0);
    CHECK(lim.pass);
    CHECK(lim.rhs == doctest::Approx(-0.25));
  }

  TEST_CASE("discrete enumeration") {
    RngStream r(9);
    std::vector<double> p(8);
    double total = 0.0;
    for (double& v : p) total += (v = 0.05 + r.uniform());
    for (double& v : p) v /= total;
    std::vector<double> u(8), h(8);
    for (std::size_t k = 0; k < 8; ++k) {
      u[k] = r.normal();
      h[k] = r.normal();
    }
    // first variation against a difference quotient of the exact ED
    const double step = 1e-5;
    std::vector<double> up = u, dn = u;
    for (std::size_t k = 0; k < 8; ++k) {
      up[k] += step * h[k];
      dn[k] -= step * h[k];
    }
    const double fd = (ed_discrete_exact(p, up, 3, 0.1) - ed_discrete_exact(p, dn, 3, 0.1)) / (2 * step);
    CHECK(ed_discrete_first_variation(p, u, h, 3, 0.1) == doctest::Approx(fd).epsilon(1e-7));
    CHECK(ed_discrete_second_variation(p, u, h, 3, 0.1) >= 0.0);

    RngStream dirs(10);
    CHECK(verify_minimizer_discrete(p, 3, 0.1, 100, dirs).pass);
    const std::vector<double> uniform(8, 0.125);
    CHECK(verify_minimizer_discrete(uniform, 3, 0.1, 100, dirs).pass);
    CHECK(verify_minimizer_discrete(p, 3, 0.5, 100, dirs).pass);
  }

  TEST_CASE("reports replay under a fixed seed") {
    const TheoryReport a = verify_thm2_mc(1.0, 1.0, 5000, 64, 11);
    const TheoryReport b = verify_thm2_mc(1.0, 1.0, 5000, 64, 11);
    CHECK(a.lhs == b.lhs);
    CHECK(a.tolerance == b.tolerance);
  }

  TEST_CASE("report decision") {
    TheoryReport r{"x"};
    r.lhs = 1.0;
    r.rhs = 1.0 + 1e-10;
    r.tolerance = 1e-9;
    r.decide();
    CHECK(r.pass);
    r.one_sided = true;
    r.rhs = 0.5;
    r.decide();
    CHECK_FALSE(r.pass);
  }
}
