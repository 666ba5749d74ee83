#include "edlab/datasets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace edlab {

namespace {

using std::numbers::pi;

constexpr double kGauss25Std = 0.1;
constexpr double kEightRadius = 3.0;
constexpr double kEightStd = 0.15;
constexpr int kPinwheelBlades = 5;
constexpr double kPinwheelRadialStd = 0.3;
constexpr double kPinwheelTangentialStd = 0.05;
constexpr double kPinwheelRate = 0.25;
constexpr double kPinwheelScale = 2.0;
constexpr double kRingsNoise = 0.08;
constexpr std::array<double, 4> kRingRadii{0.75, 1.5, 2.25, 3.0};
constexpr double kSpiralNoise = 0.1;
constexpr double kMoonsNoise = 0.1;
constexpr double kSwissNoise = 1.0;
constexpr double kSwissScale = 0.3;

using Point = std::array<double, 2>;

std::size_t pick(RngStream& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
}

Point gauss25_mean(std::size_t k) {
  return {-4.0 + 2.0 * static_cast<double>(k % 5), -4.0 + 2.0 * static_cast<double>(k / 5)};
}

Point eight_mean(std::size_t k) {
  const double a = 2.0 * pi * static_cast<double>(k) / 8.0;
  return {kEightRadius * std::cos(a), kEightRadius * std::sin(a)};
}

Point draw_gauss25(RngStream& rng) {
  const Point mu = gauss25_mean(pick(rng, 25));
  const auto [a, b] = rng.normal_pair();
  return {mu[0] + kGauss25Std * a, mu[1] + kGauss25Std * b};
}

Point draw_eight(RngStream& rng) {
  const Point mu = eight_mean(pick(rng, 8));
  const auto [a, b] = rng.normal_pair();
  return {mu[0] + kEightStd * a, mu[1] + kEightStd * b};
}

Point draw_pinwheel(RngStream& rng) {
  const std::size_t blade = pick(rng, kPinwheelBlades);
  const auto [a, b] = rng.normal_pair();
  const double radial = 1.0 + kPinwheelRadialStd * a;
  const double tangential = kPinwheelTangentialStd * b;
  const double angle = 2.0 * pi * static_cast<double>(blade) / kPinwheelBlades +
                       kPinwheelRate * std::exp(radial);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {kPinwheelScale * (radial * c - tangential * s),
          kPinwheelScale * (radial * s + tangential * c)};
}

Point draw_checkerboard(RngStream& rng) {
  // 8 active cells: (col + row) even on the 4x4 grid of 2x2 cells.
  const std::size_t cell = pick(rng, 8);
  const std::size_t row = cell / 2;
  const std::size_t col = 2 * (cell % 2) + (row % 2);
  const double u = rng.uniform();
  const double v = rng.uniform();
  return {-4.0 + 2.0 * (static_cast<double>(col) + u), -4.0 + 2.0 * (static_cast<double>(row) + v)};
}

Point draw_twospirals(RngStream& rng) {
  const double n = std::sqrt(rng.uniform()) * 540.0 * (2.0 * pi) / 360.0;
  const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
  const double x = -std::cos(n) * n + rng.uniform() * 0.5;
  const double y = std::sin(n) * n + rng.uniform() * 0.5;
  const auto [a, b] = rng.normal_pair();
  return {sign * x / 3.0 + kSpiralNoise * a, sign * y / 3.0 + kSpiralNoise * b};
}

Point draw_rings(RngStream& rng) {
  const double r = kRingRadii[pick(rng, kRingRadii.size())];
  const double angle = 2.0 * pi * rng.uniform();
  const auto [a, b] = rng.normal_pair();
  return {r * std::cos(angle) + kRingsNoise * a, r * std::sin(angle) + kRingsNoise * b};
}

Point draw_moons(RngStream& rng) {
  const bool upper = rng.uniform() < 0.5;
  const double theta = pi * rng.uniform();
  double x = upper ? std::cos(theta) : 1.0 - std::cos(theta);
  double y = upper ? std::sin(theta) : 1.0 - std::sin(theta) - 0.5;
  const auto [a, b] = rng.normal_pair();
  x += kMoonsNoise * a;
  y += kMoonsNoise * b;
  return {2.0 * x - 1.0, 2.0 * y - 0.2};
}

Point draw_swissroll(RngStream& rng) {
  const double t = 1.5 * pi * (1.0 + 2.0 * rng.uniform());
  const auto [a, b] = rng.normal_pair();
  return {kSwissScale * (t * std::cos(t) + kSwissNoise * a),
          kSwissScale * (t * std::sin(t) + kSwissNoise * b)};
}

using Generator = Point (*)(RngStream&);

Generator generator_for(std::string_view name) {
  if (name == "gauss25") return draw_gauss25;
  if (name == "pinwheel") return draw_pinwheel;
  if (name == "checkerboard") return draw_checkerboard;
  if (name == "twospirals") return draw_twospirals;
  if (name == "rings") return draw_rings;
  if (name == "moons") return draw_moons;
  if (name == "swissroll") return draw_swissroll;
  if (name == "eightgauss") return draw_eight;
  throw std::invalid_argument("unknown toy dataset '" + std::string(name) + "'");
}

double isotropic_mixture_logp(std::span<const double> x, std::size_t k,
                              const std::function<Point(std::size_t)>& mean, double std_dev) {
  std::vector<double> terms(k);
  const double var = std_dev * std_dev;
  const double log_norm = -std::log(2.0 * pi * var) - std::log(static_cast<double>(k));
  for (std::size_t c = 0; c < k; ++c) {
    const Point mu = mean(c);
    const double dx = x[0] - mu[0];
    const double dy = x[1] - mu[1];
    terms[c] = log_norm - (dx * dx + dy * dy) / (2.0 * var);
  }
  return logsumexp(terms);
}

}  // namespace

const std::vector<std::string>& toy2d_names() {
  static const std::vector<std::string> names{"gauss25", "pinwheel", "checkerboard", "twospirals",
                                              "rings",   "moons",    "swissroll",    "eightgauss"};
  return names;
}

bool toy2d_has_logp(std::string_view name) {
  generator_for(name);
  return name == "gauss25" || name == "eightgauss";
}

double toy2d_logp(std::string_view name, std::span<const double> x) {
  if (x.size() != 2) throw std::invalid_argument("toy2d_logp: points are 2D");
  if (name == "gauss25") return isotropic_mixture_logp(x, 25, gauss25_mean, kGauss25Std);
  if (name == "eightgauss") return isotropic_mixture_logp(x, 8, eight_mean, kEightStd);
  generator_for(name);
  throw std::invalid_argument("toy dataset '" + std::string(name) + "' has no closed-form density");
}

ToySample sample_toy2d(std::string_view name, std::size_t n, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("sample_toy2d: n must be >= 1");
  const Generator gen = generator_for(name);
  ToySample out{Dense(n, 2), std::nullopt};
  for (std::size_t i = 0; i < n; ++i) {
    Point p = gen(rng);
    while (std::abs(p[0]) > kToyBound || std::abs(p[1]) > kToyBound) p = gen(rng);
    out.points(i, 0) = p[0];
    out.points(i, 1) = p[1];
  }
  if (toy2d_has_logp(name)) {
    std::vector<double> logp(n);
    for (std::size_t i = 0; i < n; ++i) logp[i] = toy2d_logp(name, out.points.row(i));
    out.logp = std::move(logp);
  }
  return out;
}

bool checkerboard_active(double x1, double x2) {
  if (x1 < -4.0 || x1 > 4.0 || x2 < -4.0 || x2 > 4.0) return false;
  const auto col = std::min(3, static_cast<int>(std::floor((x1 + 4.0) / 2.0)));
  const auto row = std::min(3, static_cast<int>(std::floor((x2 + 4.0) / 2.0)));
  return (col + row) % 2 == 0;
}

// -- Gray codes ----------------------------------------------------------------

std::uint32_t GrayCodec::quantise(double x, bool* clamped) const {
  const double pos = std::floor((x - low) / cell_width());
  const double top = static_cast<double>(cells() - 1);
  const bool out_of_range = !(x >= low && x <= high);
  if (clamped != nullptr) *clamped = out_of_range;
  if (!(pos >= 0.0)) return 0;
  if (pos > top) return cells() - 1;
  return static_cast<std::uint32_t>(pos);
}

double GrayCodec::cell_centre(std::uint32_t index) const {
  return low + (static_cast<double>(index) + 0.5) * cell_width();
}

std::uint32_t gray_from_index(std::uint32_t k) { return k ^ (k >> 1); }

std::uint32_t index_from_gray(std::uint32_t g) {
  for (std::uint32_t shift = 1; shift < 32; shift <<= 1) g ^= g >> shift;
  return g;
}

GrayEncoded gray_encode(std::span<const double> x, const GrayCodec& codec) {
  GrayEncoded out{Dense(x.size() * codec.bits_per_dim, 1), false};
  for (std::size_t dim = 0; dim < x.size(); ++dim) {
    bool clamped = false;
    const std::uint32_t g = gray_from_index(codec.quantise(x[dim], &clamped));
    out.clamped = out.clamped || clamped;
    for (unsigned b = 0; b < codec.bits_per_dim; ++b) {
      const unsigned shift = codec.bits_per_dim - 1 - b;
      out.bits[dim * codec.bits_per_dim + b] = ((g >> shift) & 1u) ? 1.0 : 0.0;
    }
  }
  return out;
}

Dense gray_decode(std::span<const double> bits, const GrayCodec& codec) {
  if (bits.size() % codec.bits_per_dim != 0) {
    throw std::invalid_argument("gray_decode: bit count is not a multiple of bits_per_dim");
  }
  const std::size_t dims = bits.size() / codec.bits_per_dim;
  Dense out(dims, 1);
  for (std::size_t dim = 0; dim < dims; ++dim) {
    std::uint32_t g = 0;
    for (unsigned b = 0; b < codec.bits_per_dim; ++b) {
      g = (g << 1) | (bits[dim * codec.bits_per_dim + b] != 0.0 ? 1u : 0u);
    }
    out[dim] = codec.cell_centre(index_from_gray(g));
  }
  return out;
}

// -- 1D mixture ---------------------------------------------------------------

Dense sample_mixture1d(double rho, std::size_t n, RngStream& rng) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("sample_mixture1d: rho must lie in [0, 1]");
  Dense out(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = rng.uniform() < rho;
    out[i] = (left ? -5.0 : 5.0) + rng.normal();
  }
  return out;
}

double mixture1d_logp(double rho, double x) {
  const double c = 0.5 * std::log(2.0 * pi);
  const double a = std::log(rho) - 0.5 * (x + 5.0) * (x + 5.0) - c;
  const double b = std::log1p(-rho) - 0.5 * (x - 5.0) * (x - 5.0) - c;
  return logsumexp({a, b});
}

double mixture1d_score(double rho, double x) {
  const double lp = mixture1d_logp(rho, x);
  const double c = 0.5 * std::log(2.0 * pi);
  const double pl = std::exp(std::log(rho) - 0.5 * (x + 5.0) * (x + 5.0) - c - lp);
  const double pr = std::exp(std::log1p(-rho) - 0.5 * (x - 5.0) * (x - 5.0) - c - lp);
  return -pl * (x + 5.0) - pr * (x - 5.0);
}

// -- Ising ---------------------------------------------------------------------

Dense ising_lattice_coupling(std::size_t h, std::size_t w, double strength) {
  if (h < 2 || w < 2) throw std::invalid_argument("ising lattice: h and w must be >= 2");
  const std::size_t d = h * w;
  Dense J(d, d);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t i = r * w + c;
      if (c + 1 < w) J(i, i + 1) = J(i + 1, i) = strength;
      if (r + 1 < h) J(i, i + w) = J(i + w, i) = strength;
    }
  }
  return J;
}

Dense spins_to_bits(const Dense& spins) {
  Dense out(spins.rows(), spins.cols());
  for (std::size_t k = 0; k < spins.size(); ++k) out[k] = spins[k] > 0.0 ? 1.0 : 0.0;
  return out;
}

}  // namespace edlab
