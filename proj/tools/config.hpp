#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace wskde_cli {

/// Usage or configuration problem; mapped to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem problem; mapped to exit code 3.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoiseSpec {
  std::string type = "bernoulli";  // bernoulli | beta | mode_fraction
  double concentration = 5.0;
  std::vector<double> pose_probs;
  std::uint32_t parts = 10;

  std::string label() const;
};

/// Optional command-line overrides applied on top of the config file.
struct Overrides {
  std::string out_dir;
  bool has_seed = false;
  std::uint64_t seed = 0;
  bool has_replications = false;
  std::uint64_t replications = 0;
};

/// One fully validated experiment description. Defaults mirror the
/// experiments in the documentation: h = 0.02 on [0, 2*pi], z = 1.96,
/// 10000 iterations or samples, 100 replications, Bernoulli noise.
struct ExperimentConfig {
  std::string kind;  // coverage | bo | estimate | peak-table
  std::string estimator = "wskde";  // wskde | nakde | both
  NoiseSpec noise;
  std::vector<double> lo{0.0};
  std::vector<double> hi{6.283185307179586476925286766559};
  std::vector<double> bandwidth{0.02};
  std::vector<double> spacing;  // empty: use the bandwidth
  double z = 1.96;
  std::uint64_t budget = 10000;
  double stop_half_width = 0.0;  // <= 0: no early stop
  std::uint64_t samples = 10000;
  std::vector<std::uint64_t> checkpoints;
  std::uint64_t eval_points = 1001;
  std::uint64_t replications = 100;
  std::uint64_t seed = 1;
  double tf_a = 0.6;
  double tf_b = 0.03;
  std::string out_dir = "out";
  std::string data_path;            // estimate input
  std::vector<std::string> inputs;  // peak-table input directories

  std::size_t dim() const { return lo.size(); }

  /// Canonical JSON of every semantic field (output paths excluded) and its
  /// digest; every output file is stamped with the digest.
  nlohmann::json effective;
  std::string digest;
};

/// Parses, validates, and canonicalizes a config file. `kind` comes from the
/// CLI subcommand; a "kind" key in the file must agree with it. Throws
/// ConfigError with a field-naming message on any violation.
ExperimentConfig load_config(const std::string& path, const std::string& kind,
                             const Overrides& overrides);

/// FNV-1a 64-bit digest, 16 hex characters.
std::string digest_hex(const std::string& text);

}  // namespace wskde_cli
