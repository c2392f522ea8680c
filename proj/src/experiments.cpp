#include "specnoise/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>

#include <json.hpp>

#include "specnoise/alignment.hpp"
#include "specnoise/csv.hpp"
#include "specnoise/error.hpp"
#include "specnoise/limit_theory.hpp"
#include "specnoise/perturbation.hpp"
#include "specnoise/rng.hpp"
#include "specnoise/svg.hpp"

extern "C" void openblas_set_num_threads(int num_threads);

namespace specnoise {

namespace {

// LAPACK calls run inside replicate workers; BLAS must not spawn its own.
void pin_blas_threads() { openblas_set_num_threads(1); }

// Signal side of one grid point, shared read-only by its replicates.
struct Setup {
  Eigen::Index n = 0;
  double rho = 1.0;
  SpectralPair pair;
  std::optional<SbmPopulation> population;
  std::optional<SbmSpec> sbm;
  std::optional<SpikeSpec> spike;
  std::optional<LatentRotation> rotation;
  Matrix x;  // latent positions, when requested
};

Eigen::Index sbm_rank(const Matrix& b) {
  const Vector ev = symmetric_eigenvalues(SymmetricMatrix::from_upper(b));
  const double top = ev.cwiseAbs().maxCoeff();
  Eigen::Index r = 0;
  for (double v : ev) r += std::abs(v) > 1e-10 * top ? 1 : 0;
  return r;
}

Setup prepare(const ExperimentConfig& config, Eigen::Index n, bool with_latent) {
  Setup s;
  s.n = n;
  if (config.model == ModelKind::sbm) {
    s.sbm = sbm_spec(config, n);
    s.rho = config.rho;
    s.population = sbm_population(*s.sbm, with_latent);
    const Eigen::Index r = with_latent ? s.population->latent->rank : sbm_rank(config.b);
    s.pair = top_r(s.population->p, r);
    if (with_latent) s.x = s.population->latent->x;
  } else {
    s.spike = spike_spec(config, n);
    s.rho = s.spike->rho;
    s.pair = spike_signal(*s.spike);
    if (with_latent) s.x = spike_latent(*s.spike);
  }
  if (with_latent) s.rotation = latent_rotation(s.x, s.pair, s.rho);
  return s;
}

ModelInstance sample(const Setup& s, std::uint64_t seed) {
  if (s.population) return sbm_sample(s.population->p, seed, s.sbm->hollow_diagonal);
  return spike_model(*s.spike, seed);
}

struct Pair2 {
  SpectralPair hat;
  ProcrustesResult procrustes;
};

Pair2 estimate(const Setup& s, const ModelInstance& inst) {
  Pair2 out;
  out.hat = top_r(inst.m_hat, s.pair.rank());
  out.procrustes = procrustes_align(out.hat.vectors, s.pair.vectors);
  return out;
}

std::vector<Setup> prepare_all(const ExperimentConfig& config, bool with_latent) {
  std::vector<Setup> setups;
  for (auto n : config.n_grid) setups.push_back(prepare(config, n, with_latent));
  return setups;
}

const Setup& setup_for(const std::vector<Setup>& setups, Eigen::Index n) {
  for (const auto& s : setups) {
    if (s.n == n) return s;
  }
  throw std::logic_error("no setup for n");
}

template <typename T>
std::vector<ReplicateRecord> records_of(const std::vector<ReplicateTask>& tasks,
                                        const std::vector<ReplicateOutcome<T>>& outcomes) {
  std::vector<ReplicateRecord> records;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    records.push_back({tasks[i], outcomes[i].value.has_value(), outcomes[i].error});
  }
  return records;
}

// Smallest nonzero |eigenvalue| of the signal, without forming it.
double signal_lambda_r(const ExperimentConfig& config, Eigen::Index n) {
  if (config.model == ModelKind::spike) return config.lambda_factor * static_cast<double>(n);
  // P = Z (rho B) Z^T shares its nonzero spectrum with rho D^{1/2} B D^{1/2}, D = Z^T Z.
  const auto sizes = block_sizes(sbm_spec(config, n));
  Vector d(static_cast<Eigen::Index>(sizes.size()));
  for (std::size_t k = 0; k < sizes.size(); ++k) d(static_cast<Eigen::Index>(k)) = std::sqrt(static_cast<double>(sizes[k]));
  const Matrix core = config.rho * d.asDiagonal() * config.b * d.asDiagonal();
  const Vector ev = symmetric_eigenvalues(SymmetricMatrix::from_upper(core));
  const double top = ev.cwiseAbs().maxCoeff();
  double smallest = top;
  for (double v : ev) {
    if (std::abs(v) > 1e-10 * top) smallest = std::min(smallest, std::abs(v));
  }
  return smallest;
}

std::string tag(Eigen::Index n) { return "_n" + std::to_string(n); }

Ellipse sample_ellipse(const std::vector<Vector>& rows) {
  CovarianceAccumulator acc(2);
  for (const auto& v : rows) acc.add(v);
  const auto g = acc.result();
  return ellipse_level_95(g.covariance, Eigen::Vector2d(g.mean(0), g.mean(1)));
}

void covariance_rows(CsvWriter& csv, int block, const GroupCovariance& emp, const Matrix& theo) {
  csv.row(block, emp.covariance(0, 0), emp.covariance(0, 1), emp.covariance(1, 0), emp.covariance(1, 1), theo(0, 0),
          theo(0, 1), theo(1, 0), theo(1, 1), static_cast<std::uint64_t>(emp.count));
}

const std::vector<std::string> kCovarianceHeader = {"block",   "emp_11",  "emp_12",  "emp_21",  "emp_22",
                                                    "theo_11", "theo_12", "theo_21", "theo_22", "count"};

}  // namespace

std::vector<ReplicateTask> schedule(const ExperimentConfig& config) {
  std::vector<ReplicateTask> tasks;
  std::uint64_t index = 0;
  for (auto n : config.n_grid) {
    for (int r = 0; r < config.replicates; ++r, ++index) {
      tasks.push_back({n, r, index, stream_seed(config.seed, index)});
    }
  }
  return tasks;
}

bool over_budget(const std::vector<ReplicateRecord>& records, double max_rate) {
  const auto failed = std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.ok; });
  return static_cast<double>(failed) > max_rate * static_cast<double>(records.size());
}

std::size_t ExperimentOutput::failures() const {
  return static_cast<std::size_t>(std::count_if(replicates.begin(), replicates.end(), [](const auto& r) { return !r.ok; }));
}

const Artifact& ExperimentOutput::artifact(const std::string& name) const {
  for (const auto& a : artifacts) {
    if (a.name == name) return a;
  }
  throw InvalidInput("no artifact named " + name);
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw InvalidInput("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string aggregate_first_order(const std::string& replicate_csv, const ExperimentConfig& config) {
  const CsvTable table = parse_csv(replicate_csv);
  const auto ns = table.numeric("n");
  const auto errs = table.numeric("two_to_inf_error");
  CsvWriter csv({"n", "mean", "lo95", "hi95", "phi"});
  for (auto n : config.n_grid) {
    std::vector<double> v;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      if (ns[i] == static_cast<double>(n)) v.push_back(errs[i]);
    }
    if (v.empty()) continue;
    double sum = 0.0;
    for (double e : v) sum += e;
    std::sort(v.begin(), v.end());
    csv.row(static_cast<std::int64_t>(n), sum / static_cast<double>(v.size()), quantile_sorted(v, 0.025),
            quantile_sorted(v, 0.975), phi_benchmark(n, signal_lambda_r(config, n)));
  }
  return csv.str();
}

ExperimentOutput run_first_order(const ExperimentConfig& config, int threads) {
  pin_blas_threads();
  struct Norms {
    double two_to_inf, spectral, leading, residual;
  };
  const auto setups = prepare_all(config, false);
  const auto tasks = schedule(config);
  const auto outcomes = run_replicates<Norms>(
      tasks.size(),
      [&](std::size_t i) {
        const auto& t = tasks[i];
        const Setup& s = setup_for(setups, t.n);
        const ModelInstance inst = sample(s, t.seed);
        const Pair2 est = estimate(s, inst);
        const Matrix dev = est.hat.vectors - s.pair.vectors * est.procrustes.w;
        const LeadingTerm lead = first_order_leading(inst, s.pair, est.hat.vectors, est.procrustes.w);
        return Norms{two_to_inf_norm(dev), spectral_norm(dev), lead.leading_two_to_inf,
                     two_to_inf_norm(dev - lead.leading)};
      },
      threads);

  ExperimentOutput out;
  out.replicates = records_of(tasks, outcomes);
  if (over_budget(out.replicates, config.max_failure_rate)) return out;

  CsvWriter per({"n", "replicate", "seed", "two_to_inf_error", "spectral_error", "leading_two_to_inf",
                 "residual_two_to_inf"});
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!outcomes[i].value) continue;
    const auto& v = *outcomes[i].value;
    per.row(static_cast<std::int64_t>(tasks[i].n), tasks[i].replicate, tasks[i].seed, v.two_to_inf, v.spectral,
            v.leading, v.residual);
  }
  const std::string aggregate = aggregate_first_order(per.str(), config);

  std::vector<CurvePoint> curve;
  const CsvTable agg = parse_csv(aggregate);
  const auto ns = agg.numeric("n"), mean = agg.numeric("mean"), lo = agg.numeric("lo95"), hi = agg.numeric("hi95"),
             phi = agg.numeric("phi");
  for (std::size_t i = 0; i < ns.size(); ++i) curve.push_back({ns[i], mean[i], lo[i], hi[i], phi[i]});

  out.artifacts.push_back({"first_order_replicates.csv", per.str()});
  out.artifacts.push_back({"first_order_aggregate.csv", aggregate});
  if (!curve.empty()) {
    out.artifacts.push_back({"first_order_curve.svg",
                             render_curve_svg(curve, {"Two-to-infinity error", "n", "||U_hat - U W||_2->inf"})});
  }
  return out;
}

ExperimentOutput run_second_order(const ExperimentConfig& config, int threads) {
  pin_blas_threads();
  const auto setups = prepare_all(config, true);
  const auto tasks = schedule(config);
  const auto outcomes = run_replicates<Matrix>(
      tasks.size(),
      [&](std::size_t i) {
        const auto& t = tasks[i];
        const Setup& s = setup_for(setups, t.n);
        const ModelInstance inst = sample(s, t.seed);
        const Pair2 est = estimate(s, inst);
        const AlignmentPair al = make_alignment(est.procrustes, *s.rotation);
        Matrix f = fluctuation_matrix(s.pair, est.hat, al, s.rho);
        if (!f.allFinite()) throw InvalidInput("non-finite fluctuation");
        return f;
      },
      threads);

  ExperimentOutput out;
  out.replicates = records_of(tasks, outcomes);
  if (over_budget(out.replicates, config.max_failure_rate)) return out;

  for (const Setup& s : setups) {
    const auto& blocks = s.population->memberships;
    const LimitCovariance limit = limit_covariance(*s.sbm, *s.population->latent);
    const Matrix centers = s.n * std::sqrt(s.rho) * s.pair.vectors * s.rotation->w_x;
    const int k_blocks = static_cast<int>(s.sbm->blocks());

    CsvWriter scatter({"vertex", "block", "v1", "v2", "replicate"});
    std::vector<CovarianceAccumulator> acc(static_cast<std::size_t>(k_blocks), CovarianceAccumulator(2));
    const Matrix* figure = nullptr;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].n != s.n || !outcomes[i].value) continue;
      const Matrix& f = *outcomes[i].value;
      if (!figure) figure = &f;
      for (Eigen::Index v = 0; v < s.n; ++v) {
        const int b = blocks[static_cast<std::size_t>(v)];
        scatter.row(static_cast<std::int64_t>(v), b + 1, f(v, 0), f(v, 1), tasks[i].replicate);
        acc[static_cast<std::size_t>(b)].add(f.row(v).transpose());
      }
    }
    if (!figure) continue;

    CsvWriter cov(kCovarianceHeader);
    for (int b = 0; b < k_blocks; ++b) covariance_rows(cov, b + 1, acc[static_cast<std::size_t>(b)].result(), limit.sigma[static_cast<std::size_t>(b)]);

    // Uncentered scatter of one replicate with per-block level curves.
    std::vector<PlotPoint> points;
    std::vector<std::vector<Vector>> by_block(static_cast<std::size_t>(k_blocks));
    for (Eigen::Index v = 0; v < s.n; ++v) {
      const int b = blocks[static_cast<std::size_t>(v)];
      const Vector p = figure->row(v).transpose() + centers.row(v).transpose();
      points.push_back({p(0), p(1), b});
      by_block[static_cast<std::size_t>(b)].push_back(p);
    }
    std::vector<PlotEllipse> ellipses;
    for (int b = 0; b < k_blocks; ++b) {
      const auto& rows = by_block[static_cast<std::size_t>(b)];
      if (rows.size() >= 2) ellipses.push_back({sample_ellipse(rows), true, b});
      const auto first = std::find(blocks.begin(), blocks.end(), b) - blocks.begin();
      const Eigen::Vector2d c(centers(first, 0), centers(first, 1));
      ellipses.push_back({ellipse_level_95(limit.sigma[static_cast<std::size_t>(b)], c), false, b});
    }

    out.artifacts.push_back({"scatter" + tag(s.n) + ".csv", scatter.str()});
    out.artifacts.push_back({"covariance" + tag(s.n) + ".csv", cov.str()});
    out.artifacts.push_back({"scatter" + tag(s.n) + ".svg",
                             render_svg(points, ellipses, {"Scaled eigenvector rows, n = " + std::to_string(s.n),
                                                           "coordinate 1", "coordinate 2"})});
  }
  return out;
}

ExperimentOutput run_spike(const ExperimentConfig& config, int threads) {
  pin_blas_threads();
  const auto setups = prepare_all(config, true);
  const auto tasks = schedule(config);
  const auto outcomes = run_replicates<Matrix>(
      tasks.size(),
      [&](std::size_t i) {
        const auto& t = tasks[i];
        const Setup& s = setup_for(setups, t.n);
        const ModelInstance inst = sample(s, t.seed);
        const Pair2 est = estimate(s, inst);
        const AlignmentPair al = make_alignment(est.procrustes, *s.rotation);
        Matrix f = fluctuation_matrix(s.pair, est.hat, al, s.rho);
        if (!f.allFinite()) throw InvalidInput("non-finite fluctuation");
        return f;
      },
      threads);

  ExperimentOutput out;
  out.replicates = records_of(tasks, outcomes);
  if (over_budget(out.replicates, config.max_failure_rate)) return out;

  const bool one_d = config.kind == ExperimentKind::spike_1d;
  for (const Setup& s : setups) {
    const Matrix sigma = limit_covariance(*s.spike).sigma.front();
    const Eigen::Index r = s.pair.rank();

    std::vector<std::string> header = {"vertex", "replicate"};
    for (Eigen::Index j = 0; j < r; ++j) header.push_back("v" + std::to_string(j + 1));
    CsvWriter samples(header);
    std::vector<double> pooled;
    CovarianceAccumulator acc(r);
    const Matrix* figure = nullptr;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].n != s.n || !outcomes[i].value) continue;
      const Matrix& f = *outcomes[i].value;
      if (!figure) figure = &f;
      for (Eigen::Index v = 0; v < s.n; ++v) {
        std::vector<std::string> cells = {csv_cell(static_cast<std::int64_t>(v)), csv_cell(tasks[i].replicate)};
        for (Eigen::Index j = 0; j < r; ++j) cells.push_back(csv_cell(f(v, j)));
        samples.add_row(std::move(cells));
        acc.add(f.row(v).transpose());
        pooled.push_back(f(v, 0));
      }
    }
    if (!figure) continue;
    out.artifacts.push_back({"spike_samples" + tag(s.n) + ".csv", samples.str()});

    if (one_d && sigma(0, 0) > 0.0 && acc.result().covariance(0, 0) > 0.0) {
      const double var = sigma(0, 0);
      const double sd = std::sqrt(var);
      const NormalityReport rep = normality_diagnostics(pooled, 0.0, var);
      CsvWriter summary({"n", "size", "mean", "variance", "theoretical_variance", "skewness", "excess_kurtosis",
                         "ks_statistic", "ks_critical_01"});
      summary.row(static_cast<std::int64_t>(s.n), static_cast<std::uint64_t>(rep.size), rep.mean, rep.variance, var,
                  rep.skewness, rep.excess_kurtosis, rep.ks_statistic, ks_critical_value(rep.size, 0.01));
      out.artifacts.push_back({"spike_summary" + tag(s.n) + ".csv", summary.str()});

      // Histogram over +-4 theoretical standard deviations.
      const int bins = config.histogram_bins;
      const double lo = -4.0 * sd, width = 8.0 * sd / bins;
      std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
      for (double x : pooled) {
        const double k = std::floor((x - lo) / width);
        if (k >= 0 && k < bins) ++counts[static_cast<std::size_t>(k)];
      }
      CsvWriter density({"x", "empirical_density", "normal_density"});
      DensityCurves curves;
      for (int k = 0; k < bins; ++k) {
        const double x = lo + (k + 0.5) * width;
        const double emp = static_cast<double>(counts[static_cast<std::size_t>(k)]) /
                           (static_cast<double>(pooled.size()) * width);
        const double th = std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
        density.row(x, emp, th);
        curves.x.push_back(x);
        curves.empirical.push_back(emp);
        curves.theoretical.push_back(th);
      }
      out.artifacts.push_back({"spike_density" + tag(s.n) + ".csv", density.str()});
      out.artifacts.push_back({"spike_density" + tag(s.n) + ".svg",
                               render_density_svg(curves, {"Entrywise fluctuations, n = " + std::to_string(s.n),
                                                           "n (u_hat_i - u_i)", "density"})});
    } else if (!one_d) {
      CsvWriter cov(kCovarianceHeader);
      const GroupCovariance g = acc.result();
      covariance_rows(cov, 1, g, sigma);
      out.artifacts.push_back({"spike_covariance" + tag(s.n) + ".csv", cov.str()});

      std::vector<PlotPoint> points;
      for (Eigen::Index v = 0; v < s.n; ++v) points.push_back({(*figure)(v, 0), (*figure)(v, 1), 0});
      std::vector<PlotEllipse> ellipses = {
          {ellipse_level_95(g.covariance, Eigen::Vector2d(g.mean(0), g.mean(1))), true, 0},
          {ellipse_level_95(sigma), false, 0}};
      out.artifacts.push_back({"spike_scatter" + tag(s.n) + ".svg",
                               render_svg(points, ellipses, {"Row fluctuations, n = " + std::to_string(s.n),
                                                             "coordinate 1", "coordinate 2"})});
    }
  }
  return out;
}

ExperimentOutput run_assumption_check(const ExperimentConfig& config, int threads) {
  pin_blas_threads();
  std::vector<Setup> setups;
  for (auto n : config.n_grid) setups.push_back(prepare(config, n, false));
  const auto tasks = schedule(config);
  const auto outcomes = run_replicates<ConcentrationReport>(
      tasks.size(),
      [&](std::size_t i) {
        const auto& t = tasks[i];
        const Setup& s = setup_for(setups, t.n);
        const ModelInstance inst = sample(s, t.seed);
        return check_assumption4(inst.e, s.pair.vectors, s.rho, config.xi, config.k_max, 1);
      },
      threads);

  ExperimentOutput out;
  out.replicates = records_of(tasks, outcomes);
  if (over_budget(out.replicates, config.max_failure_rate)) return out;

  CsvWriter csv({"n", "replicate", "seed", "k", "k_n", "max_abs", "ratio", "certified_c_e"});
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!outcomes[i].value) continue;
    const auto& rep = *outcomes[i].value;
    for (int k = 1; k <= rep.k_max; ++k) {
      csv.row(static_cast<std::int64_t>(tasks[i].n), tasks[i].replicate, tasks[i].seed, k, rep.k_n,
              rep.max_abs.row(k - 1).maxCoeff(), rep.ratios.row(k - 1).maxCoeff(), rep.certified_c_e);
    }
  }
  out.artifacts.push_back({"assumption_check.csv", csv.str()});
  return out;
}

ExperimentOutput run(const ExperimentConfig& config, int threads) {
  switch (config.kind) {
    case ExperimentKind::first_order: return run_first_order(config, threads);
    case ExperimentKind::second_order: return run_second_order(config, threads);
    case ExperimentKind::spike_1d:
    case ExperimentKind::spike_2d: return run_spike(config, threads);
    case ExperimentKind::assumption_check: return run_assumption_check(config, threads);
  }
  throw std::logic_error("unhandled experiment kind");
}

int resolve_threads(std::optional<int> cli, const ExperimentConfig& config) {
  if (cli) {
    if (*cli < 1) throw ConfigError("--threads: must be at least 1");
    return *cli;
  }
  if (const char* env = std::getenv("SPECNOISE_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 4096) throw ConfigError("SPECNOISE_THREADS: expected a positive integer");
    return static_cast<int>(v);
  }
  return config.threads;
}

RunSummary execute(const ExperimentConfig& config, int threads) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentOutput out = run(config, threads);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool aborted = over_budget(out.replicates, config.max_failure_rate);

  RunSummary summary;
  summary.directory = config.output_dir;
  summary.failures = out.failures();
  std::filesystem::create_directories(summary.directory);

  nlohmann::json manifest;
  manifest["config"] = nlohmann::json::parse(canonical_json(config));
  manifest["config_hash"] = config_hash(config);
  manifest["version"] = SPECNOISE_VERSION;
  manifest["threads"] = threads;
  manifest["wall_clock_seconds"] = seconds;
  manifest["status"] = aborted ? "aborted" : "ok";
  manifest["failures"] = summary.failures;
  manifest["conventions"] = {
      {"interval", "2.5 and 97.5 percent empirical percentiles (linear interpolation)"},
      {"seed", "base seed xor global replicate index"},
      {"blocks", "1-based; figure markers: block 1 circle, block 2 square"},
      {"latent_factor", "cholesky factor of B when B is positive definite"},
  };
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& r : out.replicates) {
    nlohmann::json e = {{"n", r.task.n}, {"replicate", r.task.replicate}, {"seed", r.task.seed},
                        {"status", r.ok ? "ok" : "failed"}};
    if (!r.ok) e["error"] = r.error;
    reps.push_back(e);
  }
  manifest["replicates"] = reps;

  nlohmann::json files = nlohmann::json::array();
  if (!aborted) {
    for (const auto& a : out.artifacts) {
      const auto path = summary.directory / a.name;
      std::ofstream f(path, std::ios::binary);
      f << a.content;
      if (!f) throw std::runtime_error("cannot write " + path.string());
      files.push_back({{"file", a.name}, {"sha256", sha256_hex(a.content)}, {"bytes", a.content.size()}});
    }
  }
  manifest["outputs"] = files;
  summary.manifest = manifest.dump(2) + "\n";
  std::ofstream mf(summary.directory / "manifest.json", std::ios::binary);
  mf << summary.manifest;
  if (!mf) throw std::runtime_error("cannot write manifest.json");

  if (aborted) {
    throw RunAborted(std::to_string(summary.failures) + " of " + std::to_string(out.replicates.size()) +
                     " replicates failed (limit " + std::to_string(config.max_failure_rate) + ")");
  }
  return summary;
}

}  // namespace specnoise
