// Acceptance checks. Usage: specnoise_acceptance [criterion ...]
// Prints one "criterion N: PASS|FAIL ..." line per criterion; exits 1 if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "specnoise/alignment.hpp"
#include "specnoise/config.hpp"
#include "specnoise/csv.hpp"
#include "specnoise/experiments.hpp"
#include "specnoise/limit_theory.hpp"
#include "specnoise/linalg.hpp"
#include "specnoise/models.hpp"
#include "specnoise/perturbation.hpp"

using namespace specnoise;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ExperimentConfig shipped(const std::string& name) {
  auto c = load_config(std::string(SPECNOISE_CONFIG_DIR) + "/" + name);
  c.output_dir = (fs::temp_directory_path() / ("specnoise_acceptance_" + name)).string();
  return c;
}

struct Fitted {
  ModelInstance inst;
  SpectralPair pair, hat;
  Matrix w;
};

Fitted fit(ModelInstance inst, Eigen::Index r) {
  Fitted f{std::move(inst), {}, {}, {}};
  f.pair = top_r(f.inst.m, r);
  f.hat = top_r(f.inst.m_hat, r);
  f.w = procrustes_align(f.hat.vectors, f.pair.vectors).w;
  return f;
}

// 0: two-block SBM, 1: constant Gaussian spike, 2: sign-split Laplace spike.
Fitted instance(int family, Eigen::Index n, std::uint64_t seed) {
  switch (family) {
    case 0: return fit(sbm_sample(sbm_population(two_block_spec(n), false).p, seed), 2);
    case 1: return fit(spike_model(constant_spike(n, static_cast<double>(n), {NoiseKind::gaussian, 1.0, {}}), seed), 1);
    default:
      return fit(spike_model(sign_split_spike(n, static_cast<double>(n), {NoiseKind::laplace, std::sqrt(0.5), {}}), seed),
                 2);
  }
}

Verdict identities() {
  const Eigen::Index ns[] = {50, 200, 500};
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Fitted f = instance(i % 3, ns[(i / 3) % 3], 1000 + i);
    const auto d = decompose(f.inst, f.pair, f.hat, f.w);
    worst = std::max({worst, d.first_identity_defect, d.second_identity_defect});
  }
  return {worst <= 1e-9, "50 instances, max defect " + fmt("%.3g", worst)};
}

Verdict procrustes() {
  std::mt19937_64 g(77);
  double worst_gap = -INFINITY, worst_bound = -INFINITY, worst_grid_slack = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index n = 30;
    const Matrix u = testutil::orthonormal(g, n, 2);
    const double eps = 0.05 + 0.5 * (t % 10) / 10.0;
    Eigen::HouseholderQR<Matrix> qr(u * testutil::rotation2(0.7 * t) + eps * testutil::gaussian(g, n, 2));
    const Matrix u_hat = qr.householderQ() * Matrix::Identity(n, 2);
    const Matrix w = procrustes_align(u_hat, u).w;
    const double attained = (u_hat - u * w).norm();

    // O(2) is rotations and reflections; sweep both at 1e-3 rad.
    double best = INFINITY;
    for (double th = 0.0; th < 2.0 * std::numbers::pi; th += 1e-3) {
      Matrix rot = testutil::rotation2(th);
      Matrix ref = rot;
      ref.col(1) *= -1.0;
      best = std::min({best, (u_hat - u * rot).norm(), (u_hat - u * ref).norm()});
    }
    worst_gap = std::max(worst_gap, attained - best);
    worst_grid_slack = std::max(worst_grid_slack, best - attained);

    Eigen::JacobiSVD<Matrix> svd(u.transpose() * u_hat);
    double sin_max = 0.0;
    for (Eigen::Index k = 0; k < 2; ++k) {
      const double c = std::min(1.0, svd.singularValues()(k));
      sin_max = std::max(sin_max, std::sqrt(std::max(0.0, 1.0 - c * c)));
    }
    const double lhs = (u.transpose() * u_hat - w).jacobiSvd().singularValues()(0);
    worst_bound = std::max(worst_bound, lhs - sin_max * sin_max);
  }
  return {worst_gap <= 1e-9 && worst_bound <= 1e-9,
          "100 pairs, attained minus grid minimum " + fmt("%.3g", worst_gap) + " (grid slack up to " +
              fmt("%.3g", worst_grid_slack) + "), sin^2 bound excess " + fmt("%.3g", worst_bound)};
}

Verdict table_reproduction() {
  const auto c = shipped("second_order_table.json");
  const auto out = run(c, 1);
  const double published[2][2][3] = {
      {{14.11, -36.08, 110.13}, {11.76, -30.09, 93.07}},
      {{14.94, -36.85, 108.55}, {12.91, -33.04, 101.64}},
  };
  const double limit[2][3] = {{15.14, -38.05, 112.34}, {13.12, -33.93, 103.94}};
  Verdict v;
  double worst_emp = 0.0, worst_theo = 0.0;
  std::size_t min_count = SIZE_MAX;
  for (int k = 0; k < 2; ++k) {
    const std::string name = "covariance_n" + std::to_string(c.n_grid[k]) + ".csv";
    const auto t = parse_csv(out.artifact(name).content);
    for (int b = 0; b < 2; ++b) {
      const double emp[3] = {t.numeric("emp_11")[b], t.numeric("emp_12")[b], t.numeric("emp_22")[b]};
      const double theo[3] = {t.numeric("theo_11")[b], t.numeric("theo_12")[b], t.numeric("theo_22")[b]};
      min_count = std::min(min_count, static_cast<std::size_t>(t.numeric("count")[b]));
      for (int e = 0; e < 3; ++e) {
        worst_emp = std::max(worst_emp, std::abs(emp[e] / published[k][b][e] - 1.0));
        worst_theo = std::max(worst_theo, std::abs(theo[e] / limit[b][e] - 1.0));
      }
    }
  }
  v.pass = min_count >= 100000 && worst_emp <= 0.15 && worst_theo <= 0.005;
  v.detail = "min pooled " + std::to_string(min_count) + ", empirical rel err " + fmt("%.4f", worst_emp) +
             ", theoretical rel err " + fmt("%.5f", worst_theo);
  return v;
}

Verdict first_order_trend() {
  const auto c = shipped("first_order_three_block.json");
  const auto out = run(c, 1);
  const auto agg = parse_csv(out.artifact("first_order_aggregate.csv").content);
  const auto n = agg.numeric("n"), mean = agg.numeric("mean"), phi = agg.numeric("phi");
  bool decreasing = n.size() == c.n_grid.size();
  for (std::size_t i = 1; i < mean.size(); ++i) decreasing = decreasing && mean[i] < mean[i - 1];

  // Least-squares slope of log mean on log n.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double x = std::log(n[i]), y = std::log(mean[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);

  double lo = INFINITY, hi = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    lo = std::min(lo, mean[i] / phi[i]);
    hi = std::max(hi, mean[i] / phi[i]);
  }
  const bool slope_ok = slope >= -0.62 && slope <= -0.38;
  const bool band_ok = hi / lo <= 3.0;
  std::string means;
  for (double x : mean) means += fmt(" %.4g", x);
  return {decreasing && slope_ok && band_ok,
          std::string("means") + means + (decreasing ? " (decreasing)" : " (NOT decreasing)") + ", slope " +
              fmt("%.3f", slope) + (slope_ok ? " in" : " outside") + " [-0.62, -0.38], mean/phi band " +
              fmt("%.3f", hi / lo)};
}

Verdict spike_clt() {
  const auto one = run(shipped("spike_1d.json"), 1);
  const auto s = parse_csv(one.artifact("spike_summary_n500.csv").content);
  const double var = s.numeric("variance")[0], ks = s.numeric("ks_statistic")[0],
               crit = s.numeric("ks_critical_01")[0];

  const auto two = run(shipped("spike_2d.json"), 1);
  const auto t = parse_csv(two.artifact("spike_covariance_n500.csv").content);
  // Off-diagonal targets are zero, so their relative scale is the diagonal 1/3.
  const double third = 1.0 / 3.0;
  const double cov_err = std::max({std::abs(t.numeric("emp_11")[0] - third), std::abs(t.numeric("emp_22")[0] - third),
                                   std::abs(t.numeric("emp_12")[0])}) /
                         third;
  return {std::abs(var - 1.0) <= 0.1 && ks < crit && cov_err <= 0.1,
          "1-d variance " + fmt("%.4f", var) + ", KS " + fmt("%.4f", ks) + " vs " + fmt("%.4f", crit) +
              "; 2-d max rel err " + fmt("%.4f", cov_err)};
}

Verdict properties() {
  std::mt19937_64 g(2024);
  std::uniform_int_distribution<int> dim(2, 40);
  std::size_t chain = 0, invariance = 0, sandwich = 0, scale = 0, neumann = 0;
  const int trials = 120;
  for (int t = 0; t < trials; ++t) {
    const Eigen::Index rows = dim(g), cols = std::max(1, dim(g) / 4);
    const Matrix a = testutil::gaussian(g, rows, cols);
    const auto nm = matrix_norms(a);
    const double tti = two_to_inf_norm(a);
    const double tol = 1e-12 * nm.frobenius;
    if (!(nm.max_entry <= tti + tol && tti <= nm.spectral + tol && nm.spectral <= nm.frobenius + tol)) ++chain;

    const Matrix q = testutil::orthonormal(g, cols, cols);
    if (std::abs(two_to_inf_norm(a * q) - tti) > 1e-12 * tti) ++invariance;

    const Eigen::Index n = 10 + dim(g), r = 1 + t % 3;
    const Matrix u = testutil::orthonormal(g, n, r);
    Eigen::HouseholderQR<Matrix> qr(u + 0.3 * testutil::gaussian(g, n, r));
    const Matrix u_hat = qr.householderQ() * Matrix::Identity(n, r);
    const double s = canonical_angles(u_hat, u).sin_spectral;
    const double dist = spectral_norm(Matrix(u_hat - u * procrustes_align(u_hat, u).w));
    if (!(s <= dist + 1e-12 && dist <= std::sqrt(2.0) * s + 1e-12)) ++sandwich;
  }
  for (int t = 0; t < trials; ++t) {
    const Fitted f = instance(t % 3, 40 + 10 * (t % 5), 500 + t);
    const double c = std::exp(std::uniform_real_distribution<double>(std::log(0.1), std::log(10.0))(g));
    const Fitted fc =
        fit(make_instance(c * f.inst.m, c * f.inst.e, f.inst.provenance), f.pair.rank());
    const auto d = decompose(f.inst, f.pair, f.hat, f.w);
    const auto dc = decompose(fc.inst, fc.pair, fc.hat, fc.w);
    // Eigenvectors, W and every piece of the expansion are invariant under M, E -> cM, cE.
    const double gap = std::max({(d.deviation - dc.deviation).cwiseAbs().maxCoeff(),
                                 (d.leading - dc.leading).cwiseAbs().maxCoeff(),
                                 (d.residual - dc.residual).cwiseAbs().maxCoeff()});
    if (gap > 1e-9) ++scale;

    const auto sp = constant_spike(30 + t, 30.0 + t, {NoiseKind::gaussian, 0.04 + 0.002 * (t % 50), {}});
    const Fitted ns = fit(spike_model(sp, 900 + t), 1);
    const auto rep = neumann_partial(ns.inst, ns.pair, ns.hat, 6);
    for (std::size_t k = 0; k < rep.error_norms.size(); ++k) {
      const bool geometric =
          rep.error_norms[k] <= std::pow(rep.contraction, static_cast<double>(k)) * rep.error_norms[0] + 1e-9;
      if (!geometric || rep.error_norms[k] > rep.tail_bounds[k] + 1e-9) {
        ++neumann;
        break;
      }
    }
  }
  const std::size_t total = chain + invariance + sandwich + scale + neumann;
  return {total == 0, std::to_string(trials) + " instances per suite; violations: chain " + std::to_string(chain) +
                          ", invariance " + std::to_string(invariance) + ", sandwich " + std::to_string(sandwich) +
                          ", scaling " + std::to_string(scale) + ", neumann " + std::to_string(neumann)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict reproducibility() {
  const char* names[] = {"first_order_three_block.json", "second_order_figure.json", "second_order_table.json",
                         "spike_1d.json", "spike_2d.json", "assumption_check.json"};
  std::size_t files = 0, mismatched = 0;
  for (const char* name : names) {
    auto c = shipped(name);
    // Shortened grids keep the check quick; seeds and models are unchanged.
    c.n_grid.resize(1);
    c.replicates = std::min(c.replicates, 8);
    const fs::path root = c.output_dir;
    fs::remove_all(root);
    for (int threads : {1, 8}) {
      c.output_dir = (root / std::to_string(threads)).string();
      execute(c, threads);
    }
    for (const auto& e : fs::directory_iterator(root / "1")) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      if (slurp(e.path()) != slurp(root / "8" / e.path().filename())) ++mismatched;
    }
    fs::remove_all(root);
  }
  return {files > 0 && mismatched == 0,
          std::to_string(files) + " CSV files compared at 1 and 8 threads, " + std::to_string(mismatched) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Verdict()>> criteria = {identities,  procrustes, table_reproduction,
                                                          first_order_trend, spike_clt, properties,
                                                          reproducibility};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);

  bool ok = true;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    Verdict v;
    try {
      v = criteria[id - 1]();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %d: %s (%s)\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    ok = ok && v.pass;
  }
  return ok ? 0 : 1;
}
