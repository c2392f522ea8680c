#include "specnoise/config.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "specnoise/error.hpp"

namespace specnoise {

using nlohmann::json;

namespace {

const std::set<std::string> kCommonKeys = {
    "kind",   "model",   "n_grid",      "replicates", "seed",  "output_dir", "threads",
    "xi",     "k_max",   "max_failure_rate", "histogram_bins"};
const std::set<std::string> kSbmKeys = {"B", "pi", "rho", "hollow_diagonal"};
const std::set<std::string> kSpikeKeys = {"spike_pattern", "lambda_factor", "noise", "noise_scale"};

ExperimentKind kind_from_string(const std::string& s) {
  if (s == "first-order") return ExperimentKind::first_order;
  if (s == "second-order") return ExperimentKind::second_order;
  if (s == "spike-1d") return ExperimentKind::spike_1d;
  if (s == "spike-2d") return ExperimentKind::spike_2d;
  if (s == "assumption-check") return ExperimentKind::assumption_check;
  throw ConfigError("kind: unknown experiment kind '" + s + "'");
}

ModelKind model_from_string(const std::string& s) {
  if (s == "sbm") return ModelKind::sbm;
  if (s == "spike") return ModelKind::spike;
  throw ConfigError("model: expected 'sbm' or 'spike', got '" + s + "'");
}

SpikePattern pattern_from_string(const std::string& s) {
  if (s == "constant") return SpikePattern::constant;
  if (s == "sign-split") return SpikePattern::sign_split;
  throw ConfigError("spike_pattern: expected 'constant' or 'sign-split', got '" + s + "'");
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

json to_json(const ExperimentConfig& c, bool execution_fields) {
  json j;
  j["kind"] = to_string(c.kind);
  j["model"] = to_string(c.model);
  if (c.model == ModelKind::sbm) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < c.b.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < c.b.cols(); ++k) row.push_back(c.b(i, k));
      rows.push_back(row);
    }
    j["B"] = rows;
    j["pi"] = std::vector<double>(c.pi.data(), c.pi.data() + c.pi.size());
    j["rho"] = c.rho;
    j["hollow_diagonal"] = c.hollow_diagonal;
  } else {
    j["spike_pattern"] = to_string(c.spike_pattern);
    j["lambda_factor"] = c.lambda_factor;
    j["noise"] = to_string(c.noise);
    j["noise_scale"] = c.noise_scale;
  }
  j["n_grid"] = std::vector<std::int64_t>(c.n_grid.begin(), c.n_grid.end());
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["xi"] = c.xi;
  if (c.k_max) j["k_max"] = *c.k_max;
  j["max_failure_rate"] = c.max_failure_rate;
  j["histogram_bins"] = c.histogram_bins;
  if (execution_fields) {
    j["output_dir"] = c.output_dir;
    j["threads"] = c.threads;
  }
  return j;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::first_order: return "first-order";
    case ExperimentKind::second_order: return "second-order";
    case ExperimentKind::spike_1d: return "spike-1d";
    case ExperimentKind::spike_2d: return "spike-2d";
    case ExperimentKind::assumption_check: return "assumption-check";
  }
  return "?";
}

std::string to_string(ModelKind kind) { return kind == ModelKind::sbm ? "sbm" : "spike"; }

std::string to_string(SpikePattern pattern) {
  return pattern == SpikePattern::constant ? "constant" : "sign-split";
}

ExperimentConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig c;
  if (!j.contains("kind")) throw ConfigError("kind: missing");
  c.kind = kind_from_string(get<std::string>(j, "kind"));
  if (!j.contains("model")) throw ConfigError("model: missing");
  c.model = model_from_string(get<std::string>(j, "model"));

  const auto& model_keys = c.model == ModelKind::sbm ? kSbmKeys : kSpikeKeys;
  for (const auto& [key, value] : j.items()) {
    if (!kCommonKeys.contains(key) && !model_keys.contains(key)) {
      throw ConfigError(key + ": unknown field for model '" + to_string(c.model) + "'");
    }
  }

  if (c.model == ModelKind::sbm) {
    if (!j.contains("B") || !j.contains("pi")) throw ConfigError("B, pi: required for model 'sbm'");
    const auto rows = get<std::vector<std::vector<double>>>(j, "B");
    const auto k = static_cast<Eigen::Index>(rows.size());
    c.b.resize(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != k) throw ConfigError("B: must be square");
      for (Eigen::Index l = 0; l < k; ++l) c.b(i, l) = rows[i][l];
    }
    const auto pi = get<std::vector<double>>(j, "pi");
    c.pi = Eigen::Map<const Vector>(pi.data(), static_cast<Eigen::Index>(pi.size()));
    if (j.contains("rho")) c.rho = get<double>(j, "rho");
    if (j.contains("hollow_diagonal")) c.hollow_diagonal = get<bool>(j, "hollow_diagonal");
  } else {
    if (j.contains("spike_pattern")) c.spike_pattern = pattern_from_string(get<std::string>(j, "spike_pattern"));
    if (j.contains("lambda_factor")) c.lambda_factor = get<double>(j, "lambda_factor");
    if (j.contains("noise")) {
      try {
        c.noise = noise_kind_from_string(get<std::string>(j, "noise"));
      } catch (const InvalidInput& e) {
        throw ConfigError(std::string("noise: ") + e.what());
      }
    }
    if (j.contains("noise_scale")) c.noise_scale = get<double>(j, "noise_scale");
  }

  if (!j.contains("n_grid")) throw ConfigError("n_grid: missing");
  for (auto n : get<std::vector<std::int64_t>>(j, "n_grid")) c.n_grid.push_back(n);
  if (j.contains("replicates")) c.replicates = get<int>(j, "replicates");
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("output_dir")) c.output_dir = get<std::string>(j, "output_dir");
  if (j.contains("threads")) c.threads = get<int>(j, "threads");
  if (j.contains("xi")) c.xi = get<double>(j, "xi");
  if (j.contains("k_max")) c.k_max = get<int>(j, "k_max");
  if (j.contains("max_failure_rate")) c.max_failure_rate = get<double>(j, "max_failure_rate");
  if (j.contains("histogram_bins")) c.histogram_bins = get<int>(j, "histogram_bins");

  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
  if (c.n_grid.empty()) throw ConfigError("n_grid: must not be empty");
  for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
    if (c.n_grid[i] < 2) throw ConfigError("n_grid: vertex counts must be at least 2");
    if (i > 0 && c.n_grid[i] <= c.n_grid[i - 1]) throw ConfigError("n_grid: must be strictly increasing");
  }
  if (c.replicates < 1) throw ConfigError("replicates: must be at least 1");
  if (c.threads < 1) throw ConfigError("threads: must be at least 1");
  if (!(c.xi > 0.0)) throw ConfigError("xi: must be positive");
  if (c.k_max && *c.k_max < 1) throw ConfigError("k_max: must be at least 1");
  if (!(c.max_failure_rate >= 0.0 && c.max_failure_rate <= 1.0)) {
    throw ConfigError("max_failure_rate: must lie in [0, 1]");
  }
  if (c.histogram_bins < 2) throw ConfigError("histogram_bins: must be at least 2");

  switch (c.kind) {
    case ExperimentKind::second_order:
      if (c.model != ModelKind::sbm) throw ConfigError("kind: second-order needs model 'sbm'");
      break;
    case ExperimentKind::spike_1d:
      if (c.model != ModelKind::spike || c.spike_pattern != SpikePattern::constant) {
        throw ConfigError("kind: spike-1d needs model 'spike' with spike_pattern 'constant'");
      }
      break;
    case ExperimentKind::spike_2d:
      if (c.model != ModelKind::spike || c.spike_pattern != SpikePattern::sign_split) {
        throw ConfigError("kind: spike-2d needs model 'spike' with spike_pattern 'sign-split'");
      }
      break;
    default:
      break;
  }

  try {
    for (auto n : c.n_grid) {
      if (c.model == ModelKind::sbm) {
        const SbmSpec spec = sbm_spec(c, n);
        validate(spec);
        if (c.kind == ExperimentKind::second_order && spec.b.rows() != 2) {
          throw ConfigError("B: second-order figures are two-dimensional, need K = 2");
        }
      } else {
        if (!(c.lambda_factor > 0.0)) throw ConfigError("lambda_factor: must be positive");
        if (!(c.noise_scale >= 0.0)) throw ConfigError("noise_scale: must be nonnegative");
        if (c.noise_scale == 0.0 && c.noise != NoiseKind::gaussian) {
          throw ConfigError("noise_scale: zero is only allowed for gaussian noise");
        }
        if (c.noise == NoiseKind::centered_bernoulli && !(c.noise_scale < 1.0)) {
          throw ConfigError("noise_scale: Bernoulli p must lie in (0, 1)");
        }
        if (c.spike_pattern == SpikePattern::sign_split && n % 2 != 0) {
          throw ConfigError("n_grid: sign-split spikes need even n");
        }
      }
    }
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  if (c.kind == ExperimentKind::assumption_check && c.model == ModelKind::sbm) {
    for (auto n : c.n_grid) {
      if (!(static_cast<double>(n) * c.rho > 1.0)) throw ConfigError("rho: need n rho > 1 for k(n)");
    }
  }
}

std::string canonical_json(const ExperimentConfig& config) { return to_json(config, true).dump(2) + "\n"; }

std::string config_hash(const ExperimentConfig& config) { return sha256_hex(to_json(config, false).dump(2) + "\n"); }

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

SbmSpec sbm_spec(const ExperimentConfig& c, Eigen::Index n) {
  SbmSpec s;
  s.b = c.b;
  s.pi = c.pi;
  s.n = n;
  s.rho = c.rho;
  s.hollow_diagonal = c.hollow_diagonal;
  return s;
}

NoiseSpec noise_spec(const ExperimentConfig& c) {
  NoiseSpec noise;
  noise.kind = c.noise;
  noise.scale = c.noise_scale;
  return noise;
}

SpikeSpec spike_spec(const ExperimentConfig& c, Eigen::Index n) {
  const double lambda = c.lambda_factor * static_cast<double>(n);
  return c.spike_pattern == SpikePattern::constant ? constant_spike(n, lambda, noise_spec(c))
                                                   : sign_split_spike(n, lambda, noise_spec(c));
}

}  // namespace specnoise
