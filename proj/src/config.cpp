#include "lightray/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "lightray/errors.hpp"
#include "lightray/expr.hpp"
#include "lightray/surface.hpp"
#include "lightray/util.hpp"

namespace lightray {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_line(const std::string& source, int line, const std::string& msg) {
  throw ConfigError(source + ":" + std::to_string(line) + ": " + msg);
}

[[noreturn]] void fail_field(const std::string& source, const std::string& field,
                             const std::string& msg) {
  throw ConfigError(source + ": " + field + ": " + msg);
}

double parse_number(const std::string& source, int line, const std::string& text) {
  const std::string t = trim(text);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = begin + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) fail_line(source, line, "expected a number, got '" + t + "'");
  return value;
}

long parse_integer(const std::string& source, int line, const std::string& text) {
  const double v = parse_number(source, line, text);
  const long n = static_cast<long>(v);
  if (static_cast<double>(n) != v) fail_line(source, line, "expected an integer, got '" + trim(text) + "'");
  return n;
}

std::vector<double> parse_list(const std::string& source, int line, const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(parse_number(source, line, item));
  if (values.empty()) fail_line(source, line, "expected a comma-separated list");
  return values;
}

RegionSpec parse_region(const std::string& source, int line, const std::string& text) {
  const std::vector<double> v = parse_list(source, line, text);
  if (v.size() != 3) fail_line(source, line, "a region is 'axis, lo, hi'");
  RegionSpec r;
  r.whole = false;
  r.axis = static_cast<int>(v[0]);
  if (static_cast<double>(r.axis) != v[0] || r.axis < 0)
    fail_line(source, line, "region axis must be a non-negative integer");
  r.lo = v[1];
  r.hi = v[2];
  return r;
}

void check_expression(const std::string& source, const std::string& field,
                      const std::string& text) {
  try {
    parse_expression(text);
  } catch (const Error& err) {
    fail_field(source, field, err.what());
  }
}

std::string format_number(double v) {
  if (v == static_cast<long long>(v) && std::abs(v) < 1e15)
    return std::to_string(static_cast<long long>(v));
  return compact_double(v);
}

std::string format_list(const std::vector<double>& xs) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += format_number(xs[i]);
  }
  return out;
}

// Physical validation: build the metric and every surface once, so chart
// positivity and graph sanity are checked before any experiment runs.
void probe_geometry(const ExperimentConfig& c, const std::string& source) {
  MetricOptions mopts;
  mopts.t_min = c.metric.t_min;
  mopts.t_max = c.metric.t_max;
  SpacetimeMetric metric = [&] {
    if (c.metric.family == "minkowski") return SpacetimeMetric::minkowski(c.metric.dim, mopts);
    if (c.metric.family == "flrw")
      return SpacetimeMetric::flrw(c.metric.dim, parse_expression(c.metric.scale), mopts);
    return SpacetimeMetric::conformal(c.metric.dim, parse_expression(c.metric.scale), mopts);
  }();

  const int n = c.metric.dim - 1;
  for (const SurfaceSpec& s : c.surfaces) {
    const std::string field = "surface " + s.name;
    Domain domain;
    if (s.domain == "torus") {
      if (static_cast<int>(s.extent.size()) != n)
        fail_field(source, field, "torus extent needs " + std::to_string(n) + " periods");
      Vec periods(n);
      for (int i = 0; i < n; ++i) {
        if (s.extent[static_cast<size_t>(i)] <= 0.0)
          fail_field(source, field, "torus periods must be positive");
        periods[i] = s.extent[static_cast<size_t>(i)];
      }
      domain = Domain::torus(periods);
    } else {
      if (static_cast<int>(s.extent.size()) != 2 * n)
        fail_field(source, field, "box extent needs " + std::to_string(n) + " lows then " +
                                      std::to_string(n) + " highs");
      Vec lo(n), hi(n);
      for (int i = 0; i < n; ++i) {
        lo[i] = s.extent[static_cast<size_t>(i)];
        hi[i] = s.extent[static_cast<size_t>(i + n)];
        if (!(lo[i] < hi[i])) fail_field(source, field, "box lows must be below highs");
      }
      domain = Domain::box(lo, hi);
    }
    CauchySurface probe(metric, parse_expression(s.graph), domain, s.name);
  }
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kTrace: return "trace";
    case ExperimentKind::kRedshift: return "redshift";
    case ExperimentKind::kVerifyTheorem: return "verify-theorem";
    case ExperimentKind::kVerifyLemma: return "verify-lemma";
    case ExperimentKind::kDensity: return "density";
    case ExperimentKind::kVolume: return "volume";
    case ExperimentKind::kExchange: return "exchange";
  }
  throw DomainError("unknown experiment kind");
}

ExperimentKind experiment_kind_from(const std::string& text) {
  for (ExperimentKind k :
       {ExperimentKind::kTrace, ExperimentKind::kRedshift, ExperimentKind::kVerifyTheorem,
        ExperimentKind::kVerifyLemma, ExperimentKind::kDensity, ExperimentKind::kVolume,
        ExperimentKind::kExchange}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("unknown experiment kind '" + text + "'");
}

double ExperimentConfig::default_tol() const {
  switch (kind) {
    case ExperimentKind::kTrace: return 1e-10;       // null-residual budget
    case ExperimentKind::kRedshift: return 1e-8;     // worst oracle deviation
    case ExperimentKind::kVerifyTheorem: return 1e-6;
    case ExperimentKind::kVerifyLemma: return 1e-8;
    case ExperimentKind::kDensity: return 1e-4;
    case ExperimentKind::kVolume: return 3.0;        // standard-error multiples
    case ExperimentKind::kExchange: return 3.0;
  }
  return 1e-6;
}

const SurfaceSpec& ExperimentConfig::surface(const std::string& ref) const {
  for (const SurfaceSpec& s : surfaces)
    if (s.name == ref) return s;
  throw ConfigError("unresolved surface reference '" + ref + "'");
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  ExperimentConfig c;
  bool kind_set = false;

  // section == "" is the global scope; "metric", "params", or "surface:<i>".
  std::string section;
  int surface_index = -1;
  std::set<std::string> seen;  // "<section>/<key>" duplicate guard
  std::set<std::string> surface_names;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    size_t hash = raw.find_first_of("#;");
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') fail_line(source, line, "unterminated section header");
      const std::string header = trim(s.substr(1, s.size() - 2));
      std::istringstream hs(header);
      std::string kind_word, name_word;
      hs >> kind_word;
      std::getline(hs, name_word);
      name_word = trim(name_word);
      if (kind_word == "metric" || kind_word == "params") {
        if (!name_word.empty()) fail_line(source, line, "[" + kind_word + "] takes no name");
        if (!seen.insert("section/" + kind_word).second)
          fail_line(source, line, "duplicate [" + kind_word + "] section");
        section = kind_word;
      } else if (kind_word == "surface") {
        SurfaceSpec spec;
        spec.name = name_word.empty() ? "surface" : name_word;
        if (!surface_names.insert(spec.name).second)
          fail_line(source, line, "duplicate surface name '" + spec.name + "'");
        c.surfaces.push_back(spec);
        surface_index = static_cast<int>(c.surfaces.size()) - 1;
        section = "surface";
      } else {
        fail_line(source, line, "unknown section [" + header + "]");
      }
      continue;
    }

    const size_t eq = s.find('=');
    if (eq == std::string::npos) fail_line(source, line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail_line(source, line, "empty key");
    if (value.empty()) fail_line(source, line, "empty value for '" + key + "'");
    const std::string dedup = section == "surface"
                                  ? "surface" + std::to_string(surface_index) + "/" + key
                                  : section + "/" + key;
    if (!seen.insert(dedup).second) fail_line(source, line, "duplicate key '" + key + "'");

    if (section.empty()) {
      if (key == "experiment") {
        try {
          c.kind = experiment_kind_from(value);
        } catch (const ConfigError& err) {
          fail_line(source, line, err.what());
        }
        kind_set = true;
      } else if (key == "name") {
        c.name = value;
      } else {
        fail_line(source, line, "unknown key '" + key + "' before any section");
      }
    } else if (section == "metric") {
      if (key == "family") c.metric.family = value;
      else if (key == "dim") c.metric.dim = static_cast<int>(parse_integer(source, line, value));
      else if (key == "scale") c.metric.scale = value;
      else if (key == "t_min") c.metric.t_min = parse_number(source, line, value);
      else if (key == "t_max") c.metric.t_max = parse_number(source, line, value);
      else fail_line(source, line, "unknown metric key '" + key + "'");
    } else if (section == "surface") {
      SurfaceSpec& spec = c.surfaces[static_cast<size_t>(surface_index)];
      if (key == "graph") spec.graph = value;
      else if (key == "domain") spec.domain = value;
      else if (key == "extent") spec.extent = parse_list(source, line, value);
      else fail_line(source, line, "unknown surface key '" + key + "'");
    } else if (section == "params") {
      if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_integer(source, line, value));
      else if (key == "samples") c.samples = parse_integer(source, line, value);
      else if (key == "cases") c.cases = parse_integer(source, line, value);
      else if (key == "tol") c.tol = parse_number(source, line, value);
      else if (key == "lambda_min") c.lambda_min = parse_number(source, line, value);
      else if (key == "lambda_max") c.lambda_max = parse_number(source, line, value);
      else if (key == "emitter") c.emitter = value;
      else if (key == "receiver") c.receiver = value;
      else if (key == "event") c.event = parse_list(source, line, value);
      else if (key == "direction") c.direction = parse_list(source, line, value);
      else if (key == "boost") c.boost = parse_list(source, line, value);
      else if (key == "region") c.region = parse_region(source, line, value);
      else if (key == "region_to") c.region_to = parse_region(source, line, value);
      else if (key == "resolution") c.resolution = static_cast<int>(parse_integer(source, line, value));
      else if (key == "inner_samples") c.inner_samples = parse_integer(source, line, value);
      else fail_line(source, line, "unknown params key '" + key + "'");
    }
  }

  // Cross-field validation.  Everything below names the offending field.
  if (!kind_set) fail_field(source, "experiment", "missing (one of trace, redshift, verify-theorem, verify-lemma, density, volume, exchange)");

  if (c.metric.family != "minkowski" && c.metric.family != "flrw" && c.metric.family != "conformal")
    fail_field(source, "metric.family", "must be minkowski, flrw, or conformal");
  if (c.metric.dim != 3 && c.metric.dim != 4) fail_field(source, "metric.dim", "must be 3 or 4");
  if (c.metric.family == "minkowski") {
    if (!c.metric.scale.empty()) fail_field(source, "metric.scale", "flat charts take no scale factor");
  } else {
    if (c.metric.scale.empty()) fail_field(source, "metric.scale", "required for this chart family");
    check_expression(source, "metric.scale", c.metric.scale);
  }
  if (!(c.metric.t_min < c.metric.t_max)) fail_field(source, "metric.t_min", "must be below t_max");

  if (c.surfaces.empty()) fail_field(source, "surface", "at least one [surface <name>] section is required");
  for (const SurfaceSpec& s : c.surfaces) {
    const std::string field = "surface " + s.name;
    if (s.domain != "torus" && s.domain != "box") fail_field(source, field, "domain must be torus or box");
    if (s.extent.empty()) fail_field(source, field, "extent is required");
    check_expression(source, field, s.graph);
  }

  auto require_ref = [&](const std::string& ref, const char* field) {
    if (ref.empty()) fail_field(source, field, "required for this experiment kind");
    for (const SurfaceSpec& s : c.surfaces)
      if (s.name == ref) return;
    fail_field(source, field, "no [surface " + ref + "] section");
  };

  if (c.tol < 0.0 || (seen.count("params/tol") && c.tol == 0.0))
    fail_field(source, "params.tol", "must be positive");
  if (c.samples <= 0) fail_field(source, "params.samples", "must be positive");
  if (c.cases <= 0) fail_field(source, "params.cases", "must be positive");
  if (!(c.lambda_min < c.lambda_max)) fail_field(source, "params.lambda_min", "must be below lambda_max");
  if (c.resolution <= 0) fail_field(source, "params.resolution", "must be positive");
  if (c.inner_samples <= 0) fail_field(source, "params.inner_samples", "must be positive");

  const int n = c.metric.dim - 1;
  auto check_region = [&](const RegionSpec& r, const char* field) {
    if (r.whole) return;
    if (r.axis >= n) fail_field(source, field, "axis out of range");
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) fail_field(source, field, "bounds must be finite");
  };
  check_region(c.region, "params.region");
  check_region(c.region_to, "params.region_to");

  switch (c.kind) {
    case ExperimentKind::kTrace:
      if (static_cast<int>(c.event.size()) != c.metric.dim)
        fail_field(source, "params.event", "needs " + std::to_string(c.metric.dim) + " coordinates");
      if (static_cast<int>(c.direction.size()) != n)
        fail_field(source, "params.direction", "needs " + std::to_string(n) + " spatial components");
      break;
    case ExperimentKind::kRedshift: {
      require_ref(c.emitter, "params.emitter");
      require_ref(c.receiver, "params.receiver");
      if (!c.boost.empty()) {
        if (static_cast<int>(c.boost.size()) != n)
          fail_field(source, "params.boost", "needs " + std::to_string(n) + " spatial components");
        double b2 = 0.0;
        for (double b : c.boost) b2 += b * b;
        if (b2 >= 1.0) fail_field(source, "params.boost", "speed must be below 1");
      }
      break;
    }
    case ExperimentKind::kVerifyTheorem:
    case ExperimentKind::kDensity:
      require_ref(c.emitter, "params.emitter");
      require_ref(c.receiver, "params.receiver");
      break;
    case ExperimentKind::kVerifyLemma:
      require_ref(c.emitter, "params.emitter");
      break;
    case ExperimentKind::kVolume:
      require_ref(c.emitter, "params.emitter");
      require_ref(c.receiver, "params.receiver");
      break;
    case ExperimentKind::kExchange:
      require_ref(c.emitter, "params.emitter");
      require_ref(c.receiver, "params.receiver");
      break;
  }

  try {
    probe_geometry(c, source);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& err) {
    fail_field(source, "geometry", err.what());
  }
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "experiment = " << to_string(c.kind) << "\n";
  out << "name = " << c.name << "\n";

  out << "\n[metric]\n";
  out << "family = " << c.metric.family << "\n";
  out << "dim = " << c.metric.dim << "\n";
  if (!c.metric.scale.empty()) out << "scale = " << c.metric.scale << "\n";
  if (std::isfinite(c.metric.t_min)) out << "t_min = " << format_number(c.metric.t_min) << "\n";
  if (std::isfinite(c.metric.t_max)) out << "t_max = " << format_number(c.metric.t_max) << "\n";

  for (const SurfaceSpec& s : c.surfaces) {
    out << "\n[surface " << s.name << "]\n";
    out << "graph = " << s.graph << "\n";
    out << "domain = " << s.domain << "\n";
    out << "extent = " << format_list(s.extent) << "\n";
  }

  out << "\n[params]\n";
  out << "seed = " << c.seed << "\n";
  out << "samples = " << c.samples << "\n";
  out << "cases = " << c.cases << "\n";
  out << "tol = " << format_number(c.tolerance()) << "\n";
  out << "lambda_min = " << format_number(c.lambda_min) << "\n";
  out << "lambda_max = " << format_number(c.lambda_max) << "\n";
  if (!c.emitter.empty()) out << "emitter = " << c.emitter << "\n";
  if (!c.receiver.empty()) out << "receiver = " << c.receiver << "\n";
  if (!c.event.empty()) out << "event = " << format_list(c.event) << "\n";
  if (!c.direction.empty()) out << "direction = " << format_list(c.direction) << "\n";
  if (!c.boost.empty()) out << "boost = " << format_list(c.boost) << "\n";
  auto put_region = [&](const RegionSpec& r, const char* key) {
    if (r.whole) return;
    out << key << " = " << r.axis << ", " << format_number(r.lo) << ", " << format_number(r.hi)
        << "\n";
  };
  put_region(c.region, "region");
  put_region(c.region_to, "region_to");
  if (c.kind == ExperimentKind::kExchange) {
    out << "resolution = " << c.resolution << "\n";
    out << "inner_samples = " << c.inner_samples << "\n";
  }
  return out.str();
}

}  // namespace lightray
