// Command-line front end: parse an experiment config, hand it to the
// orchestration layer, and write the report artifacts.
//
// Exit codes: 0 when every asserted residual is within tolerance, 2 on a
// tolerance violation, 1 on any error (bad config, bad usage, I/O).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lightray/errors.hpp"
#include "lightray/experiments.hpp"

namespace {

struct CliArgs {
  std::string config;
  std::string out_dir;
  std::string format = "json";
  // Optional overrides; negative means "keep the config's value".
  long long seed = -1;
  long long samples = -1;
  double tol = -1.0;
};

// Accept either a path or the name of a bundled experiment.
lightray::ExperimentConfig load_config(const std::string& ref) {
  for (const lightray::BundledExperiment& b : lightray::bundled_experiments())
    if (b.name == ref) return lightray::parse_config(b.text, b.name);
  return lightray::parse_config_file(ref);
}

int run_subcommand(const std::string& kind_name, const CliArgs& args) {
  lightray::ExperimentConfig config = load_config(args.config);
  if (lightray::to_string(config.kind) != kind_name)
    throw lightray::ConfigError(args.config + ": experiment kind '" +
                                lightray::to_string(config.kind) +
                                "' does not match subcommand '" + kind_name + "'");
  if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
  if (args.samples >= 0) {
    if (args.samples == 0) throw lightray::ConfigError("--samples must be positive");
    config.samples = args.samples;
  }
  if (args.tol >= 0.0) {
    if (args.tol == 0.0) throw lightray::ConfigError("--tol must be positive");
    config.tol = args.tol;
  }

  const lightray::RunResult result = lightray::run_experiment(config);

  if (args.out_dir.empty()) {
    if (args.format == "csv" && !result.csv.empty())
      std::cout << result.csv;
    else
      std::cout << result.report.dump(2) << "\n";
  } else {
    namespace fs = std::filesystem;
    fs::create_directories(args.out_dir);
    const fs::path base = fs::path(args.out_dir) / config.name;
    {
      std::ofstream json_out(base.string() + ".json");
      json_out << result.report.dump(2) << "\n";
      if (!json_out) throw lightray::ConfigError("cannot write " + base.string() + ".json");
    }
    if (args.format == "csv" && !result.csv.empty()) {
      std::ofstream csv_out(base.string() + ".csv");
      csv_out << result.csv;
      if (!csv_out) throw lightray::ConfigError("cannot write " + base.string() + ".csv");
    }
    std::cout << config.name << ": " << result.report["status"].get<std::string>() << " (value "
              << result.report["value"].dump() << ", report " << base.string() << ".json)\n";
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Null-ray experiments: tracing, frequency ratios, and ray-measure checks"};
  app.require_subcommand(1);

  CliArgs args;
  std::string selected;

  const char* kinds[] = {"trace",   "redshift", "verify-theorem", "verify-lemma",
                         "density", "volume",   "exchange"};
  for (const char* kind : kinds) {
    CLI::App* sub = app.add_subcommand(kind, std::string("run a ") + kind + " experiment");
    sub->add_option("--config", args.config, "config file path or bundled experiment name")
        ->required();
    sub->add_option("--seed", args.seed, "override the config's random seed");
    sub->add_option("--samples", args.samples, "override the config's sample count");
    sub->add_option("--tol", args.tol, "override the config's tolerance");
    sub->add_option("--out", args.out_dir, "directory for report artifacts");
    sub->add_option("--format", args.format, "json (default) or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->callback([kind, &selected] { selected = kind; });
  }

  CLI::App* list = app.add_subcommand("list", "list the bundled experiments");
  list->callback([&selected] { selected = "list"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the usage error
    return code == 0 ? 0 : 1;
  }

  try {
    if (selected == "list") {
      for (const lightray::BundledExperiment& b : lightray::bundled_experiments())
        std::cout << b.name << "  -  " << b.summary << "\n";
      return 0;
    }
    return run_subcommand(selected, args);
  } catch (const lightray::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
