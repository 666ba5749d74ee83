#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "edlab/ndcore.hpp"

namespace edlab {

struct MlpSpec {
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden_widths;
  Activation activation = Activation::softplus;

  /// Widths of every layer including the input and the scalar output.
  std::vector<std::size_t> widths() const;
  std::size_t param_count() const;
  void validate() const;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

struct LayerSlot {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;  // out x in, row-major
  std::size_t bias_offset = 0;
};

/// Flat parameter vector: for each layer, its weights then its biases.
struct Params {
  Dense flat;
  std::vector<LayerSlot> table;

  static Params zeros(const MlpSpec& spec);
  std::size_t size() const { return flat.size(); }
};

Params init_xavier(const MlpSpec& spec, RngStream& rng);

struct Mlp {
  MlpSpec spec;
  Params params;
};

/// Two-component 1D mixture rho N(-5, 1) + (1 - rho) N(5, 1); energy is the
/// normalised negative log-density.
struct Mixture1D {
  double rho = 0.5;
  static constexpr double kMeanLeft = -5.0;
  static constexpr double kMeanRight = 5.0;
  static constexpr double kStd = 1.0;
};

/// E(b) = -s^T J s with spins s = 2b - 1 for bit inputs b.
struct IsingBilinear {
  Dense coupling;  // symmetric, zero diagonal
};

/// E(x) = |x - mean|^2 / (2 var). Diagnostic only: no parameter gradient.
struct GaussQuad {
  std::vector<double> mean;
  double var = 1.0;
};

class UnsupportedVariant : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class EnergyModel {
 public:
  using Variant = std::variant<Mlp, Mixture1D, IsingBilinear, GaussQuad>;

  explicit EnergyModel(Variant v);

  static EnergyModel mlp(MlpSpec spec, Params params);
  static EnergyModel mixture1d(double rho);
  static EnergyModel ising(Dense coupling);
  static EnergyModel gauss_quad(std::vector<double> mean, double var);

  const Variant& variant() const { return v_; }
  std::string kind() const;

  std::size_t input_dim() const;
  std::size_t param_count() const;
  bool supports_grad_params() const;
  bool supports_grad_input() const;

  /// Flat parameter vector (MLP flat, {rho}, or upper triangle of J row by row).
  Dense params() const;
  void set_params(std::span<const double> flat);

  double energy(std::span<const double> x) const;
  Dense grad_params(std::span<const double> x) const;
  Dense grad_input(std::span<const double> x) const;

  /// Energies of every row of `points`.
  std::vector<double> energies(const Dense& points) const;
  /// out += sum_n weights[n] * dE(points[n])/dtheta.
  void accumulate_grad_params(const Dense& points, std::span<const double> weights,
                              std::span<double> out) const;
  /// Fills weights (one per point) from the energies; returning false skips
  /// the gradient.
  using WeightFn = std::function<bool(std::span<const double> energies, std::span<double> weights)>;
  /// Energies of every row, then out += sum_n w_n dE(points[n])/dtheta with
  /// w = weigh(energies). MLPs share a single forward pass between the two.
  std::vector<double> energies_and_accumulate(const Dense& points, const WeightFn& weigh,
                                              std::span<double> out) const;
  /// Row n holds dE/dx at points[n].
  Dense grad_inputs(const Dense& points) const;

  /// Adds c to the energy (output bias for MLPs).
  void shift_energy(double c);

 private:
  void check_dim(std::size_t d) const;
  Variant v_;
};

double energy(const EnergyModel& model, std::span<const double> x);
Dense grad_params(const EnergyModel& model, std::span<const double> x);
Dense grad_input(const EnergyModel& model, std::span<const double> x);

/// Energy of spins s in {-1, 1}^d under coupling J: -s^T J s.
double ising_spin_energy(const Dense& coupling, std::span<const double> spins);

// -- checkpoints -------------------------------------------------------------

enum class CheckpointErrorKind { io, bad_magic, bad_header, length_mismatch, spec_mismatch };

class CheckpointError : public std::runtime_error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  CheckpointErrorKind kind() const { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

inline constexpr std::string_view kCheckpointMagic = "EDCKPT1";

void save_checkpoint(const EnergyModel& model, const std::filesystem::path& path);
EnergyModel load_checkpoint(const std::filesystem::path& path);

}  // namespace edlab
