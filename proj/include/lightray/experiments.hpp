#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "lightray/config.hpp"

namespace lightray {

// Orchestration layer: takes a validated ExperimentConfig, dispatches to
// the owning numerical routine, and packages the outcome as a JSON report
// plus optional CSV plot data.  Everything here is deterministic for a
// fixed config and seed -- reports are byte-identical across runs and
// worker counts except for their timestamp field.

struct RunResult {
  // 0: all asserted residuals within tolerance; 2: tolerance violated.
  // Errors are not encoded here -- they throw, and the CLI maps them to 1.
  int exit_code = 0;
  nlohmann::ordered_json report;
  std::string csv;  // empty when the experiment kind emits no plot data
};

RunResult run_experiment(const ExperimentConfig& config);

// Self-contained sample experiments, one per verification route.  The
// config text parses as-is and passes run_experiment at its own defaults.
struct BundledExperiment {
  std::string name;
  std::string summary;
  std::string text;
};
const std::vector<BundledExperiment>& bundled_experiments();  // stable order

}  // namespace lightray
