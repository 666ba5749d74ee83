#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edlab/ndcore.hpp"

namespace edlab {

/// Bad key, bad value or malformed config line. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat "section.key" -> raw value text. Accepts [section] headers,
/// key = value lines, # comments, and optionally quoted string values.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_config_text(std::string_view text);
KeyValues parse_config_file(const std::string& path);
/// "section.key=value" as given to --set.
std::pair<std::string, std::string> parse_override(std::string_view arg);

struct RunConfig {
  struct Loss {
    std::string kind = "ed";  // ed | ed-discrete | cd | sm | dsm
    double t = 1.0;
    std::size_t m = 4;
    double w = 1.0;
    double eps = 0.05;
    double step_size = 0.1;  // CD Langevin step
    std::size_t mcmc_steps = 1;
    double fd_step = 1e-3;
  } loss;
  struct Model {
    std::size_t hidden = 128;
    std::size_t layers = 4;  // linear layers, so layers - 1 hidden widths
    std::string activation = "softplus";
    std::string init = "xavier";  // xavier | zero
  } model;
  struct Data {
    std::string name = "gauss25";
    std::size_t batch = 256;
  } data;
  struct Train {
    std::size_t iters = 50000;
    double lr = 0.001;
    std::uint64_t seed = 0;
  } train;
  struct Eval {
    std::size_t grid = 100;
    std::size_t logz_n = 5000;
    std::size_t eval_every = 1000;
  } eval;
  struct Sample {
    std::size_t langevin_steps = 100;
    double langevin_step_size = 0.1;
    std::size_t n = 1000;
  } sample;

  /// Applies every entry; unknown keys and unparsable values throw ConfigError.
  void apply(const KeyValues& kv);
  void validate() const;
  /// Canonical TOML-style text holding every field.
  std::string to_toml() const;
};

const std::vector<std::string>& loss_kinds();

}  // namespace edlab
