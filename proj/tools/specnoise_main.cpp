// specnoise: run Monte Carlo eigenvector-fluctuation experiments.
//
//   specnoise run <config.json> [--out DIR] [--seed N] [--threads N]
//   specnoise check-assumptions <config.json>
//   specnoise render <csv> --kind scatter|curve
//
// Exit codes: 0 success, 1 other error, 2 config error, 3 failure-rate abort.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "specnoise/config.hpp"
#include "specnoise/csv.hpp"
#include "specnoise/error.hpp"
#include "specnoise/experiments.hpp"
#include "specnoise/limit_theory.hpp"
#include "specnoise/svg.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAborted = 3;

int run_command(const std::string& path, const std::optional<std::string>& out, const std::optional<std::uint64_t>& seed,
                const std::optional<int>& threads) {
  auto config = specnoise::load_config(path);
  if (out) config.output_dir = *out;
  if (seed) config.seed = *seed;
  const int t = specnoise::resolve_threads(threads, config);
  config.threads = t;
  const auto summary = specnoise::execute(config, t);
  std::cout << "wrote " << (summary.directory / "manifest.json").string();
  if (summary.failures) std::cout << " (" << summary.failures << " failed replicates)";
  std::cout << '\n';
  return 0;
}

int check_command(const std::string& path) {
  auto config = specnoise::load_config(path);
  if (config.kind != specnoise::ExperimentKind::assumption_check) {
    config.kind = specnoise::ExperimentKind::assumption_check;
    specnoise::validate(config);
  }
  const int t = specnoise::resolve_threads(std::nullopt, config);
  const auto out = specnoise::run_assumption_check(config, t);
  if (out.artifacts.empty()) throw specnoise::RunAborted("too many failed replicates");
  std::cout << out.artifacts.front().content;
  return 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw specnoise::InvalidInput("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int render_command(const std::string& path, const std::string& kind) {
  const auto table = specnoise::parse_csv(read_file(path));
  std::string svg;
  if (kind == "scatter") {
    const auto v1 = table.numeric("v1");
    const auto v2 = table.numeric("v2");
    std::vector<double> block(v1.size(), 1.0);
    if (std::find(table.header.begin(), table.header.end(), "block") != table.header.end()) block = table.numeric("block");
    std::vector<specnoise::PlotPoint> points;
    for (std::size_t i = 0; i < v1.size(); ++i) points.push_back({v1[i], v2[i], static_cast<int>(block[i]) - 1});
    svg = specnoise::render_svg(points, {}, {std::filesystem::path(path).stem().string(), "v1", "v2"});
  } else {
    const auto n = table.numeric("n"), mean = table.numeric("mean"), lo = table.numeric("lo95"),
               hi = table.numeric("hi95"), phi = table.numeric("phi");
    std::vector<specnoise::CurvePoint> pts;
    for (std::size_t i = 0; i < n.size(); ++i) pts.push_back({n[i], mean[i], lo[i], hi[i], phi[i]});
    svg = specnoise::render_curve_svg(pts, {std::filesystem::path(path).stem().string(), "n", "mean"});
  }
  std::cout << svg;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenvector perturbation experiments under signal-plus-noise models", "specnoise"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPECNOISE_VERSION);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  auto* run = app.add_subcommand("run", "Run an experiment and write CSV, SVG and a manifest");
  run->add_option("config", config_path, "JSON experiment config")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_option("--seed", seed, "Base seed (overrides seed)");
  run->add_option("--threads", threads, "Worker threads (overrides SPECNOISE_THREADS and threads)");

  std::string check_path;
  auto* check = app.add_subcommand("check-assumptions", "Print the entrywise concentration diagnostic as CSV");
  check->add_option("config", check_path, "JSON experiment config")->required();

  std::string csv_path;
  std::string kind;
  auto* render = app.add_subcommand("render", "Render a scatter or aggregate CSV to SVG on stdout");
  render->add_option("csv", csv_path, "Input CSV")->required();
  render->add_option("--kind", kind, "scatter or curve")->required()->check(CLI::IsMember({"scatter", "curve"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return run_command(config_path, out_dir, seed, threads);
    if (*check) return check_command(check_path);
    return render_command(csv_path, kind);
  } catch (const specnoise::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const specnoise::RunAborted& e) {
    std::cerr << "aborted: " << e.what() << '\n';
    return kExitAborted;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
