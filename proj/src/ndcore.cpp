#include "edlab/ndcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace edlab {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}
}  // namespace

Dense::Dense(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Dense::Dense(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(data.begin(), data.end()) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("Dense: data length " + std::to_string(data_.size()) +
                                " does not match shape " + std::to_string(rows_) + "x" +
                                std::to_string(cols_));
  }
}

Dense Dense::column(std::vector<double> values) {
  const auto n = values.size();
  return Dense(n, 1, std::move(values));
}

Dense Dense::column(std::initializer_list<double> values) {
  return column(std::vector<double>(values));
}

bool Dense::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return splitmix64_mix(seed_ + counter_ * kGolden);
}

double RngStream::uniform() {
  // (k + 0.5) / 2^53 is never 0 or 1, so log() downstream is always finite.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::pair<double, double> RngStream::normal_pair() {
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

double RngStream::normal() { return normal_pair().first; }

void RngStream::fill_normal(std::span<double> out) {
  std::size_t i = 0;
  for (; i + 1 < out.size(); i += 2) {
    auto [a, b] = normal_pair();
    out[i] = a;
    out[i + 1] = b;
  }
  if (i < out.size()) out[i] = normal_pair().first;
}

RngStream RngStream::split(std::string_view label) const {
  return RngStream(splitmix64_mix(seed_ ^ splitmix64_mix(fnv1a(label) + kGolden)));
}

RngStream RngStream::split(std::uint64_t index) const {
  return RngStream(splitmix64_mix(seed_ ^ splitmix64_mix((index + 1) * kGolden + 0x5bd1e995ULL)));
}

Dense draw_normal(RngStream& rng, std::size_t n) {
  Dense out(n, 1);
  rng.fill_normal(out.span());
  return out;
}

double logsumexp(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("logsumexp: empty input");
  const double m = *std::max_element(v.begin(), v.end());
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

ActValue act(Activation kind, double u) {
  switch (kind) {
    case Activation::softplus: {
      const double s = sigmoid(u);
      if (u > 30.0) return {u + std::log1p(std::exp(-u)), s};
      return {std::log1p(std::exp(u)), s};
    }
    case Activation::silu: {
      const double s = sigmoid(u);
      return {u * s, s + u * s * (1.0 - s)};
    }
  }
  throw std::invalid_argument("act: unknown activation");
}

std::string_view to_string(Activation kind) {
  return kind == Activation::softplus ? "softplus" : "silu";
}

Activation activation_from_string(std::string_view name) {
  if (name == "softplus") return Activation::softplus;
  if (name == "silu") return Activation::silu;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

}  // namespace edlab
