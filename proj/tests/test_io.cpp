#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <regex>

#include "specnoise/config.hpp"
#include "specnoise/csv.hpp"
#include "specnoise/error.hpp"
#include "specnoise/svg.hpp"

using namespace specnoise;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

const char* kSbmConfig = R"({
  "kind": "first-order",
  "model": "sbm",
  "B": [[0.5, 0.3], [0.3, 0.3]],
  "pi": [0.4, 0.6],
  "n_grid": [100, 200],
  "replicates": 3,
  "seed": 9
})";

}  // namespace

TEST_CASE("csv cells round-trip doubles exactly") {
  std::mt19937_64 g(51);
  std::uniform_real_distribution<double> ud(-1e6, 1e6);
  CsvWriter w({"a", "b"});
  std::vector<double> vals;
  for (int i = 0; i < 200; ++i) {
    const double a = ud(g) * std::pow(10.0, i % 40 - 20), b = ud(g);
    vals.push_back(a);
    vals.push_back(b);
    w.row(a, b);
  }
  w.row(std::numeric_limits<double>::denorm_min(), -0.0);
  const auto t = parse_csv(w.str());
  REQUIRE(t.rows.size() == 201);
  const auto a = t.numeric("a"), b = t.numeric("b");
  for (std::size_t i = 0; i < 200; ++i) {
    CHECK(a[i] == vals[2 * i]);
    CHECK(b[i] == vals[2 * i + 1]);
  }
  CHECK(t.rows[200][1] == "0");
  CHECK(w.str().find('\r') == std::string::npos);
  CHECK(w.str().substr(0, 4) == "a,b\n");
}

TEST_CASE("csv rejects malformed input") {
  CsvWriter w({"a"});
  CHECK_THROWS_AS(w.add_row({"1", "2"}), InvalidInput);
  CHECK_THROWS_AS(w.add_row({"x,y"}), InvalidInput);
  CHECK_THROWS_AS(parse_csv(""), InvalidInput);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), InvalidInput);
  CHECK_THROWS_AS(parse_csv("a\nfoo\n").numeric("a"), InvalidInput);
  CHECK_THROWS_AS(parse_csv("a\n1\n").column("b"), InvalidInput);
}

TEST_CASE("config parse, canonical dump and hash") {
  const auto c = parse_config(kSbmConfig);
  CHECK(c.kind == ExperimentKind::first_order);
  CHECK(c.n_grid == std::vector<Eigen::Index>{100, 200});
  CHECK(c.b(0, 1) == 0.3);
  const std::string canon = canonical_json(c);
  CHECK(canonical_json(parse_config(canon)) == canon);
  CHECK(canon.find("\"B\"") < canon.find("\"kind\""));  // sorted keys

  CHECK(config_hash(c) == config_hash(parse_config(canon)));
  auto moved = c;
  moved.output_dir = "elsewhere";
  moved.threads = 8;
  CHECK(config_hash(moved) == config_hash(c));
  moved.seed = 10;
  CHECK(config_hash(moved) != config_hash(c));
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config validation errors") {
  auto with = [](const std::string& key, const std::string& value) {
    std::string s = kSbmConfig;
    s.insert(s.size() - 1, ", \"" + key + "\": " + value);
    return s;
  };
  CHECK_THROWS_WITH_AS(parse_config(with("replicats", "3")), doctest::Contains("replicats"), ConfigError);
  CHECK_THROWS_AS(parse_config(with("noise", "\"gaussian\"")), ConfigError);  // spike-only key on an sbm model
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config("[]"), ConfigError);

  std::string s = kSbmConfig;
  CHECK_THROWS_AS(parse_config(std::regex_replace(s, std::regex("\\[100, 200\\]"), "[200, 100]")), ConfigError);
  CHECK_THROWS_AS(parse_config(std::regex_replace(s, std::regex("\"replicates\": 3"), "\"replicates\": 0")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(std::regex_replace(s, std::regex("0.4, 0.6"), "0.4, 0.5")), ConfigError);
  CHECK_THROWS_AS(parse_config(std::regex_replace(s, std::regex("\"seed\": 9"), "\"seed\": \"nine\"")), ConfigError);
  CHECK_THROWS_AS(parse_config(std::regex_replace(s, std::regex("first-order"), "third-order")), ConfigError);
  CHECK_THROWS_AS(parse_config(std::regex_replace(s, std::regex("first-order"), "spike-1d")), ConfigError);

  const char* spike = R"({"kind": "spike-2d", "model": "spike", "spike_pattern": "sign-split",
    "noise": "uniform", "noise_scale": 1.0, "n_grid": [51], "replicates": 1})";
  CHECK_THROWS_WITH_AS(parse_config(spike), doctest::Contains("even"), ConfigError);
}

TEST_CASE("svg: one point and one ellipse") {
  const std::vector<PlotPoint> pts = {{0.0, 0.0, 0}};
  Ellipse unit;
  unit.semi_major = unit.semi_minor = 1.0;
  const std::vector<PlotEllipse> ells = {{unit, false, 0}};
  const std::string svg = render_svg(pts, ells, {"t", "x", "y"});
  CHECK(count(svg, "class=\"marker\"") == 1);
  CHECK(count(svg, "<ellipse") == 1);
  CHECK(svg.find("width=\"800\" height=\"600\"") != std::string::npos);
  CHECK(svg.find("version=\"1.1\"") != std::string::npos);
  CHECK(svg == render_svg(pts, ells, {"t", "x", "y"}));
  CHECK_THROWS_AS(render_svg({}, ells, {}), InvalidInput);
  const std::vector<PlotPoint> bad = {{std::nan(""), 0.0, 0}};
  CHECK_THROWS_AS(render_svg(bad, {}, {}), InvalidInput);
}

TEST_CASE("svg: marker shapes, dashing and element counts") {
  std::vector<PlotPoint> pts;
  for (int i = 0; i < 200; ++i) pts.push_back({std::cos(i * 0.1) * i, std::sin(i * 0.1), i < 80 ? 0 : 1});
  Ellipse e;
  e.semi_major = 3.0;
  e.semi_minor = 1.0;
  e.angle = 0.4;
  const std::vector<PlotEllipse> ells = {{e, true, 0}, {e, false, 0}, {e, true, 1}, {e, false, 1}};
  const std::string svg = render_svg(pts, ells, {"a < b & c", "x", "y"});
  CHECK(count(svg, "<circle class=\"marker\"") == 80);
  CHECK(count(svg, "<rect class=\"marker\"") == 120);
  CHECK(count(svg, "<ellipse") == 4);
  CHECK(count(svg, "stroke-dasharray") == 2);
  CHECK(svg.find("a &lt; b &amp; c") != std::string::npos);
  CHECK(svg.find("rotate(-22.92") != std::string::npos);  // y axis points down on screen
}

TEST_CASE("svg: curve and density plots") {
  const std::vector<CurvePoint> curve = {{300, 0.1, 0.08, 0.12, 0.09}, {600, 0.05, 0.04, 0.06, 0.05}};
  const std::string c = render_curve_svg(curve, {"c", "n", "e"});
  CHECK(count(c, "class=\"marker\"") == 2);
  CHECK(count(c, "class=\"reference\"") == 1);
  CHECK_THROWS_AS(render_curve_svg({}, {}), InvalidInput);

  DensityCurves d{{-1, 0, 1}, {0.2, 0.4, 0.2}, {0.24, 0.4, 0.24}};
  const std::string s = render_density_svg(d, {"d", "x", "p"});
  CHECK(count(s, "stroke-dasharray") == 1);
  d.empirical.pop_back();
  CHECK_THROWS_AS(render_density_svg(d, {}), InvalidInput);
}
