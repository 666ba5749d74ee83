#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edlab/ndcore.hpp"

namespace edlab {

/// Every 2D generator keeps its samples inside [-kToyBound, kToyBound]^2.
inline constexpr double kToyBound = 4.5;

struct ToySample {
  Dense points;                             // n x 2
  std::optional<std::vector<double>> logp;  // exact log-density when known
};

const std::vector<std::string>& toy2d_names();
bool toy2d_has_logp(std::string_view name);

ToySample sample_toy2d(std::string_view name, std::size_t n, RngStream& rng);

/// Exact log-density (gauss25, eightgauss); throws for generators without one.
double toy2d_logp(std::string_view name, std::span<const double> x);

/// Checkerboard cell membership on the 4x4 pattern over [-4, 4]^2.
bool checkerboard_active(double x1, double x2);

struct GrayCodec {
  unsigned bits_per_dim = 16;
  double low = -kToyBound;
  double high = kToyBound;

  std::uint32_t cells() const { return 1u << bits_per_dim; }
  double cell_width() const { return (high - low) / static_cast<double>(cells()); }
  /// Lattice index of x, clamped into range; sets *clamped when clamping occurred.
  std::uint32_t quantise(double x, bool* clamped = nullptr) const;
  double cell_centre(std::uint32_t index) const;
};

std::uint32_t gray_from_index(std::uint32_t k);
std::uint32_t index_from_gray(std::uint32_t g);

struct GrayEncoded {
  Dense bits;  // column of 0/1, dimension-major, most significant bit first
  bool clamped = false;
};

GrayEncoded gray_encode(std::span<const double> x, const GrayCodec& codec);
Dense gray_decode(std::span<const double> bits, const GrayCodec& codec);

/// i.i.d. draws from rho N(-5, 1) + (1 - rho) N(5, 1). One uniform for the
/// component, then one normal (a full Box-Muller pair) per draw.
Dense sample_mixture1d(double rho, std::size_t n, RngStream& rng);
double mixture1d_logp(double rho, double x);
double mixture1d_score(double rho, double x);

/// 4-neighbour lattice couplings without wraparound; site index r * w + c.
Dense ising_lattice_coupling(std::size_t h, std::size_t w, double strength);

/// Spins in {-1,1} to bits in {0,1} and back.
Dense spins_to_bits(const Dense& spins);

}  // namespace edlab
