#include <cmath>
#include <stdexcept>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "edlab/energy_model.hpp"
#include "edlab/perturb.hpp"

using namespace edlab;

TEST_SUITE("perturb") {
  TEST_CASE("gaussian kernel") {
    RngStream a(1), b(1);
    const std::vector<double> x{0.5, -2.0};
    CHECK(gaussian_perturb(x, 0.7, a) == gaussian_perturb(x, 0.7, b));
    const Dense tiny = gaussian_perturb(x, 1e-30, a);
    CHECK(std::abs(tiny[0] - 0.5) < 1e-12);
    CHECK(std::abs(tiny[1] + 2.0) < 1e-12);

    RngStream r(2);
    const std::size_t n = 100000;
    double s0 = 0.0, s1 = 0.0;
    const std::vector<double> zero{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const Dense y = gaussian_perturb(zero, 4.0, r);
      s0 += y[0] * y[0];
      s1 += y[1] * y[1];
    }
    CHECK(std::abs(s0 / n / 4.0 - 1.0) < 0.05);
    CHECK(std::abs(s1 / n / 4.0 - 1.0) < 0.05);
  }

  TEST_CASE("bernoulli kernel") {
    RngStream r(3);
    const Dense zeros(32, 1);
    std::size_t flips = 0;
    for (int i = 0; i < 1000; ++i) {
      const Dense y = bernoulli_perturb(zeros.span(), 1e-12, r);
      for (double v : y.span()) flips += v != 0.0;
    }
    CHECK(flips == 0);

    double mean = 0.0;
    const std::size_t n = 100000;
    const Dense one_bit(1, 1);
    for (std::size_t i = 0; i < n; ++i) mean += bernoulli_perturb(one_bit.span(), 0.5, r)[0];
    CHECK(std::abs(mean / n - 0.5) < 0.01);

    RngStream c(4);
    Dense bits(10, 1);
    for (std::size_t k = 0; k < 10; ++k) bits[k] = c.uniform() < 0.5 ? 1.0 : 0.0;
    const Dense mask = bernoulli_mask(10, 0.3, c);
    CHECK(xor_bits(xor_bits(bits.span(), mask.span()).span(), mask.span()) == bits);
    RngStream u1(9), u2(9);
    bernoulli_mask(10, 0.3, u1);
    for (int k = 0; k < 10; ++k) u2.uniform();
    CHECK(u1.counter() == u2.counter());
  }

  TEST_CASE("contrastive potential: constant energy") {
    const std::vector<double> e(8, 1.75);
    for (double w : {0.0, 0.5, 1.0, 3.0}) {
      const PotentialEstimate p = contrastive_potential_from_energies(e, w, 1.75);
      CHECK(p.value == doctest::Approx(1.75 - std::log((w + 8.0) / 8.0)).epsilon(1e-14));
      CHECK(p.status == PotentialStatus::ok);
    }
  }

  TEST_CASE("contrastive potential: overflow sentinel and bound") {
    const double inf = std::numeric_limits<double>::infinity();
    const std::vector<double> e{inf, inf};
    const PotentialEstimate p = contrastive_potential_from_energies(e, 0.0, 0.0);
    CHECK(p.status == PotentialStatus::overflow);
    CHECK(p.value == inf);
    const PotentialEstimate q = contrastive_potential_from_energies(e, 1.0, 2.0);
    CHECK(q.value == doctest::Approx(2.0 + std::log(2.0)));

    RngStream r(6);
    for (int rep = 0; rep < 1000; ++rep) {
      std::vector<double> en(5);
      for (double& v : en) v = 3.0 * r.normal();
      const double anchor = 3.0 * r.normal();
      const double w = 0.1 + r.uniform();
      const PotentialEstimate est = contrastive_potential_from_energies(en, w, anchor);
      double lo = anchor - std::log(w);
      for (double v : en) lo = std::min(lo, v);
      REQUIRE(est.value <= lo + std::log(5.0) + 1e-12);
      REQUIRE(est.bound_holds);
    }
  }

  TEST_CASE("contrastive potential: analytic convolution") {
    const std::vector<double> mu{0.0};
    CHECK(contrastive_potential_gaussian_exact(mu, 1.0, 1.0, std::vector<double>{0.0}) ==
          doctest::Approx(0.34657359027997265471).epsilon(1e-15));
    CHECK(contrastive_potential_gaussian_exact(mu, 1.0, 1.0, std::vector<double>{1.0}) ==
          doctest::Approx(0.59657359027997265471).epsilon(1e-15));
    CHECK(std::abs(contrastive_potential_gaussian_exact(mu, 1.0, 1e-12, std::vector<double>{1.3}) - 0.845) < 1e-9);

    const EnergyModel q = EnergyModel::gauss_quad({0.0}, 1.0);
    RngStream r(7);
    for (int k = 0; k < 10; ++k) {
      const double y = -2.0 + 0.45 * k;
      const PotentialEstimate est = contrastive_potential_mc(q, 1.0, std::vector<double>{y}, 1 << 16, 0.0, 0.0, r);
      const double exact = contrastive_potential_gaussian_exact(mu, 1.0, 1.0, std::vector<double>{y});
      CHECK(std::abs(est.value - exact) < 0.01);
    }
  }

  TEST_CASE("contrastive potential: shift covariance") {
    MlpSpec s;
    s.input_dim = 2;
    s.hidden_widths = {6};
    RngStream init(8);
    EnergyModel m = EnergyModel::mlp(s, init_xavier(s, init));
    const std::vector<double> y{0.3, -0.4};
    RngStream a(10), b(10);
    const double e0 = m.energy(y);
    const double v0 = contrastive_potential_mc(m, 0.5, y, 16, 1.0, e0, a).value;
    m.shift_energy(3.0);
    const double v1 = contrastive_potential_mc(m, 0.5, y, 16, 1.0, e0 + 3.0, b).value;
    CHECK(v1 - v0 == doctest::Approx(3.0).epsilon(1e-13));
  }

  TEST_CASE("contrastive potential: bias shrinks with M") {
    // U = x^2/2, t = 1, y = 0, w = 0: exact value ln(2)/2
    const double exact = 0.5 * std::log(2.0);
    auto bias = [&](std::size_t m) {
      RngStream r(12);
      const std::size_t reps = 400000;
      std::vector<double> e(m);
      double acc = 0.0;
      for (std::size_t k = 0; k < reps; ++k) {
        for (std::size_t j = 0; j < m; ++j) {
          const double z = r.normal();
          e[j] = 0.5 * z * z;
        }
        acc += contrastive_potential_from_energies(e, 0.0, 0.0).value;
      }
      return acc / reps - exact;
    };
    const double b16 = bias(16);
    const double b32 = bias(32);
    CHECK(b16 > 0.0);
    const double ratio = b32 / b16;
    CHECK(ratio > 0.25);
    CHECK(ratio < 0.75);
  }
}
