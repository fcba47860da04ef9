#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lightray/experiments.hpp"

using namespace lightray;
using nlohmann::ordered_json;

namespace {

ordered_json report_without_timestamp(const RunResult& r) {
  ordered_json copy = r.report;
  copy.erase("timestamp");
  return copy;
}

std::vector<std::string> csv_lines(const std::string& csv) {
  std::vector<std::string> lines;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

TEST_CASE("bundled registry is stable and complete") {
  const auto& registry = bundled_experiments();
  REQUIRE(registry.size() == 6);
  const char* expected[] = {"flrw-theorem",  "minkowski-doppler", "flrw-volume",
                            "lemma-pairing", "density-jacobian",  "exchange-flat"};
  for (size_t i = 0; i < 6; ++i) {
    CHECK(registry[i].name == expected[i]);
    const ExperimentConfig config = parse_config(registry[i].text, registry[i].name);
    CHECK(config.name == registry[i].name);
    CHECK_FALSE(registry[i].summary.empty());
  }
  // Same object (and order) on every call.
  CHECK(&bundled_experiments() == &registry);
}

TEST_CASE("every bundled experiment passes at its own defaults") {
  for (const BundledExperiment& b : bundled_experiments()) {
    CAPTURE(b.name);
    const ExperimentConfig config = parse_config(b.text, b.name);
    const RunResult result = run_experiment(config);
    CHECK(result.exit_code == 0);
    CHECK(result.report["status"] == "pass");

    // Report schema: every consumer-facing key is always present.
    for (const char* key : {"experiment", "kind", "metric", "seed", "samples", "value",
                            "std_error", "escape_fraction", "oracle", "residual",
                            "residual_sigma", "tolerance", "status", "details", "timestamp"}) {
      CHECK_MESSAGE(result.report.contains(key), b.name << " report misses " << key);
    }
    CHECK(result.report["experiment"] == b.name);
  }
}

TEST_CASE("reports are byte-identical for a fixed config and seed") {
  const ExperimentConfig config =
      parse_config(bundled_experiments()[1].text, "minkowski-doppler");
  const RunResult first = run_experiment(config);
  const RunResult second = run_experiment(config);
  CHECK(report_without_timestamp(first).dump() == report_without_timestamp(second).dump());
  CHECK(first.csv == second.csv);
}

TEST_CASE("reports do not depend on the worker count") {
  const ExperimentConfig config = parse_config(bundled_experiments()[2].text, "flrw-volume");
  setenv("LIGHTRAY_WORKERS", "1", 1);
  const RunResult serial = run_experiment(config);
  setenv("LIGHTRAY_WORKERS", "3", 1);
  const RunResult parallel = run_experiment(config);
  unsetenv("LIGHTRAY_WORKERS");
  CHECK(report_without_timestamp(serial).dump() == report_without_timestamp(parallel).dump());
}

TEST_CASE("different seeds move the Monte Carlo estimate") {
  ExperimentConfig config = parse_config(bundled_experiments()[2].text, "flrw-volume");
  config.samples = 500;
  const RunResult a = run_experiment(config);
  config.seed = 999;
  const RunResult b = run_experiment(config);
  CHECK(a.report["value"].get<double>() != b.report["value"].get<double>());
}

TEST_CASE("flat traces keep their tangent columns constant") {
  const std::string text = R"(experiment = trace
name = straight-line

[metric]
family = minkowski
dim = 3

[surface slice]
graph = 0
domain = torus
extent = 2, 2

[params]
samples = 17
lambda_min = -1.0
lambda_max = 1.0
event = 0, 0.5, 0.5
direction = 0.8, 0.6
)";
  const RunResult result = run_experiment(parse_config(text));
  CHECK(result.exit_code == 0);

  const auto lines = csv_lines(result.csv);
  REQUIRE(lines.size() == 18);  // header + one row per sample
  CHECK(lines[0] == "lambda,t,x,y,kt,kx,ky,null_residual");
  const auto first = split_csv(lines[1]);
  REQUIRE(first.size() == 8);
  for (size_t i = 2; i < lines.size(); ++i) {
    const auto row = split_csv(lines[i]);
    CHECK(row[4] == first[4]);
    CHECK(row[5] == first[5]);
    CHECK(row[6] == first[6]);
    CHECK(std::abs(std::stod(row[7])) < 1e-12);
  }
  CHECK(result.report["value"].get<double>() < 1e-12);
}

TEST_CASE("comoving frequency ratios match the scale-factor ratio") {
  const std::string text = R"(experiment = redshift
name = expansion-ratio

[metric]
family = flrw
dim = 3
scale = exp(t)

[surface emitter]
graph = 0
domain = torus
extent = 2, 2

[surface receiver]
graph = log(2)
domain = torus
extent = 2, 2

[params]
samples = 40
tol = 1e-8
lambda_min = -0.5
lambda_max = 1.6
emitter = emitter
receiver = receiver
)";
  const RunResult result = run_experiment(parse_config(text));
  CHECK(result.exit_code == 0);
  CHECK(result.report["oracle"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(result.report["value"].get<double>() < 1e-8);
  CHECK(result.report["escape_fraction"].get<double>() == 0.0);
}

TEST_CASE("tolerance violations exit with status two") {
  ExperimentConfig config =
      parse_config(bundled_experiments()[1].text, "minkowski-doppler");
  config.tol = 1e-30;  // nothing numerical survives that
  const RunResult result = run_experiment(config);
  CHECK(result.exit_code == 2);
  CHECK(result.report["status"] == "fail");
}

TEST_CASE("shipped config files mirror the bundled registry") {
  namespace fs = std::filesystem;
  const fs::path dir = LIGHTRAY_CONFIG_DIR;
  for (const BundledExperiment& b : bundled_experiments()) {
    CAPTURE(b.name);
    const fs::path file = dir / (b.name + ".cfg");
    REQUIRE_MESSAGE(fs::exists(file), file.string() << " is missing");
    std::ifstream in(file);
    std::ostringstream buf;
    buf << in.rdbuf();
    // Same canonical form, so the on-disk copy cannot drift.
    CHECK(serialize_config(parse_config(buf.str(), b.name)) ==
          serialize_config(parse_config(b.text, b.name)));
  }
  CHECK(fs::exists(dir / "minkowski-trace.cfg"));
}
