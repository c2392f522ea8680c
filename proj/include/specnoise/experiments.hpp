#pragma once

// Monte Carlo harness. Replicates are independent tasks with derived seeds;
// results are merged in replicate order, so every CSV is byte-identical for
// any thread count.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "specnoise/config.hpp"

namespace specnoise {

/// One scheduled replicate. `index` is the global ordinal over the whole
/// n-grid and determines the seed.
struct ReplicateTask {
  Eigen::Index n = 0;
  int replicate = 0;
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
};

std::vector<ReplicateTask> schedule(const ExperimentConfig& config);

struct ReplicateRecord {
  ReplicateTask task;
  bool ok = true;
  std::string error;
};

template <typename T>
struct ReplicateOutcome {
  std::optional<T> value;
  std::string error;
};

namespace detail {

template <typename T, typename Fn>
ReplicateOutcome<T> guarded(Fn& fn, std::size_t i) {
  ReplicateOutcome<T> out;
  try {
    out.value.emplace(fn(i));
  } catch (const std::exception& e) {
    out.error = e.what();
    if (out.error.empty()) out.error = "unknown failure";
  }
  return out;
}

}  // namespace detail

/// Reference runner: tasks 0..count-1 in order on the calling thread.
template <typename T, typename Fn>
std::vector<ReplicateOutcome<T>> run_replicates_serial(std::size_t count, Fn fn) {
  std::vector<ReplicateOutcome<T>> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = detail::guarded<T>(fn, i);
  return out;
}

/// OpenMP runner; each task writes only its own slot.
template <typename T, typename Fn>
std::vector<ReplicateOutcome<T>> run_replicates(std::size_t count, Fn fn, int threads) {
  if (threads <= 1) return run_replicates_serial<T>(count, fn);
  std::vector<ReplicateOutcome<T>> out(count);
  const auto total = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long long i = 0; i < total; ++i) {
    out[static_cast<std::size_t>(i)] = detail::guarded<T>(fn, static_cast<std::size_t>(i));
  }
  return out;
}

/// True when failed replicates exceed max_rate of the total.
bool over_budget(const std::vector<ReplicateRecord>& records, double max_rate);

struct Artifact {
  std::string name;  // file name inside the output directory
  std::string content;
};

struct ExperimentOutput {
  std::vector<Artifact> artifacts;
  std::vector<ReplicateRecord> replicates;

  std::size_t failures() const;
  const Artifact& artifact(const std::string& name) const;
};

/// Per-replicate CSV (n, replicate, seed, two_to_inf_error, spectral_error,
/// leading_two_to_inf, residual_two_to_inf), aggregate CSV (n, mean, lo95,
/// hi95, phi) and a curve SVG.
ExperimentOutput run_first_order(const ExperimentConfig& config, int threads);

/// For every n: scatter_n<N>.csv (vertex, block, v1, v2, replicate) with
/// centered fluctuations, covariance_n<N>.csv (empirical and theoretical
/// block covariances) and scatter_n<N>.svg drawn from replicate 0.
ExperimentOutput run_second_order(const ExperimentConfig& config, int threads);

/// Spike fluctuations n (u_hat_i W - u_i): samples, summary and density or
/// covariance CSV plus an SVG per n. A 1-d run without spread (zero noise)
/// writes only the samples.
ExperimentOutput run_spike(const ExperimentConfig& config, int threads);

/// One row per (n, replicate, k): n, replicate, seed, k, k_n, max_abs,
/// ratio, certified_c_e.
ExperimentOutput run_assumption_check(const ExperimentConfig& config, int threads);

ExperimentOutput run(const ExperimentConfig& config, int threads);

/// Type-7 (linear interpolation) empirical quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double p);

/// Aggregate CSV rebuilt from a per-replicate first-order CSV.
std::string aggregate_first_order(const std::string& replicate_csv, const ExperimentConfig& config);

/// Thread count: command line, then SPECNOISE_THREADS, then the config.
int resolve_threads(std::optional<int> cli, const ExperimentConfig& config);

struct RunSummary {
  std::filesystem::path directory;
  std::string manifest;
  std::size_t failures = 0;
};

/// Runs the experiment, writes every artifact and manifest.json into the
/// output directory. Throws RunAborted (after writing a manifest but no
/// artifacts) when the failure rate exceeds config.max_failure_rate.
RunSummary execute(const ExperimentConfig& config, int threads);

}  // namespace specnoise
