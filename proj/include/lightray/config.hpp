#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace lightray {

// Experiment descriptions live in small text files: global keys first, then
// [metric], one or more [surface <name>] sections, and [params].  '#' and
// ';' start comments.  Parsing is strict -- unknown keys, duplicate keys,
// dangling surface references, non-positive tolerances, and malformed
// expressions are all rejected up front with ConfigError carrying the
// offending line or field, so a config that parses is safe to run.

enum class ExperimentKind {
  kTrace,
  kRedshift,
  kVerifyTheorem,
  kVerifyLemma,
  kDensity,
  kVolume,
  kExchange,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from(const std::string& text);  // ConfigError on unknown names

struct MetricSpec {
  std::string family = "minkowski";  // minkowski | flrw | conformal
  int dim = 3;
  std::string scale;  // a(t) for flrw, the conformal factor otherwise; empty for minkowski
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
};

struct SurfaceSpec {
  std::string name = "surface";
  std::string graph = "0";     // t = f(x) over the domain
  std::string domain = "torus";  // torus | box
  std::vector<double> extent;  // torus: n periods; box: n lows then n highs
};

struct RegionSpec {
  bool whole = true;
  int axis = 0;
  double lo = 0.0;
  double hi = 0.0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ExperimentKind kind = ExperimentKind::kTrace;
  MetricSpec metric;
  std::vector<SurfaceSpec> surfaces;

  // Surface references; their roles depend on the kind (sampling side vs
  // target side).  Validation resolves them against `surfaces`.
  std::string emitter;
  std::string receiver;

  std::uint64_t seed = 1;
  long samples = 10000;
  long cases = 100;          // randomized repetitions for the verify-* kinds
  double tol = 0.0;          // 0 picks the kind's default
  double lambda_min = -5.0;
  double lambda_max = 5.0;

  std::vector<double> event;      // trace: anchor coordinates (n+1)
  std::vector<double> direction;  // trace: spatial direction (n)
  std::vector<double> boost;      // redshift: receiver velocity (n), optional

  RegionSpec region;     // volume target region / exchange region on the emitter
  RegionSpec region_to;  // exchange region on the receiver
  int resolution = 8;    // exchange: outer midpoint grid per axis
  long inner_samples = 64;

  double default_tol() const;
  double tolerance() const { return tol > 0.0 ? tol : default_tol(); }
  const SurfaceSpec& surface(const std::string& ref) const;  // resolved reference
};

// Strict parse of config text; `source` names the file for diagnostics.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "config");
ExperimentConfig parse_config_file(const std::string& path);

// Canonical text form: fixed section and key order, defaults materialized,
// comments dropped.  serialize(parse(text)) is a fixed point of
// parse/serialize, so it serves as the normal form of a config.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace lightray
