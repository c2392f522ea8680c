#pragma once

// Experiment configuration: a flat JSON object with a `kind` discriminator.
// Unknown keys are rejected. The canonical form (sorted keys, two-space
// indent, trailing newline) is a fixed point of parse + dump.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specnoise/linalg.hpp"
#include "specnoise/models.hpp"

namespace specnoise {

enum class ExperimentKind { first_order, second_order, spike_1d, spike_2d, assumption_check };
enum class ModelKind { sbm, spike };
enum class SpikePattern { constant, sign_split };

std::string to_string(ExperimentKind kind);
std::string to_string(ModelKind kind);
std::string to_string(SpikePattern pattern);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::first_order;
  ModelKind model = ModelKind::sbm;

  // sbm
  Matrix b;
  Vector pi;
  double rho = 1.0;
  bool hollow_diagonal = false;

  // spike: lambda = lambda_factor * n
  SpikePattern spike_pattern = SpikePattern::constant;
  double lambda_factor = 1.0;
  NoiseKind noise = NoiseKind::gaussian;
  double noise_scale = 1.0;

  std::vector<Eigen::Index> n_grid;
  int replicates = 1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  int threads = 1;

  double xi = 1.1;             // assumption-check exponent
  std::optional<int> k_max;    // assumption-check powers; default k(n) + 1
  double max_failure_rate = 0.1;
  int histogram_bins = 40;     // spike-1d density
};

/// Throws ConfigError with the offending key.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);

/// Throws ConfigError on any violated constraint.
void validate(const ExperimentConfig& config);

/// Canonical JSON text of every field relevant to the config's model.
std::string canonical_json(const ExperimentConfig& config);

/// SHA-256 of the canonical JSON with the execution-only fields
/// (output_dir, threads) removed.
std::string config_hash(const ExperimentConfig& config);

std::string sha256_hex(std::string_view bytes);

SbmSpec sbm_spec(const ExperimentConfig& config, Eigen::Index n);
SpikeSpec spike_spec(const ExperimentConfig& config, Eigen::Index n);
NoiseSpec noise_spec(const ExperimentConfig& config);

}  // namespace specnoise
