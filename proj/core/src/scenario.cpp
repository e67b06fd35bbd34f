#include "krf/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "krf/cohomology.hpp"
#include "krf/geometry.hpp"
#include "krf/interp.hpp"
#include "krf/oracles.hpp"
#include "krf/scaling.hpp"

namespace krf {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

const char* model_kind_name(ModelKind m) {
  switch (m) {
    case ModelKind::torus: return "torus";
    case ModelKind::scaled: return "scaled";
    case ModelKind::comparison: return "comparison";
    case ModelKind::synthetic: return "synthetic";
    case ModelKind::toy_cone: return "toy_cone";
  }
  return "unknown";
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_u64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%llu", static_cast<unsigned long long>(v));
  return buf;
}

// --- seeded metric construction ---------------------------------------------

// Nonzero integer wave vectors with one representative per {k, -k} pair,
// ordered by |k|^2 then lexicographically.
std::vector<std::array<int, 4>> low_frequency_modes(int rdim, int count) {
  constexpr int kCap = 3;
  std::vector<std::array<int, 4>> all;
  std::array<int, 4> k{0, 0, 0, 0};
  const auto emit = [&](auto&& self, int d) -> void {
    if (d == rdim) {
      int first = 0;
      for (int e = 0; e < rdim; ++e)
        if (k[e] != 0) {
          first = k[e];
          break;
        }
      if (first > 0) all.push_back(k);
      return;
    }
    for (int v = -kCap; v <= kCap; ++v) {
      k[d] = v;
      self(self, d + 1);
    }
    k[d] = 0;
  };
  emit(emit, 0);
  const auto norm2 = [rdim](const std::array<int, 4>& a) {
    int s = 0;
    for (int d = 0; d < rdim; ++d) s += a[d] * a[d];
    return s;
  };
  std::sort(all.begin(), all.end(),
            [&](const std::array<int, 4>& a, const std::array<int, 4>& b) {
              const int na = norm2(a), nb = norm2(b);
              if (na != nb) return na < nb;
              return a < b;
            });
  if (count > static_cast<int>(all.size()))
    throw parameter_error("seeded_metric: more modes requested than available");
  all.resize(count);
  return all;
}

}  // namespace

MetricField seeded_metric(SpectralWorkspace& ws, const TorusGrid& grid,
                          const MetricSpec& spec) {
  if (spec.eps < 0.0) throw parameter_error("seeded_metric: eps must be nonnegative");
  if (spec.modes < 0) throw parameter_error("seeded_metric: modes must be nonnegative");
  if (spec.modes > 0 && spec.eps > 0.0 && !(spec.eps < 1.0 / (2.0 * spec.modes)))
    throw parameter_error("seeded_metric: eps must be < 1/(2*modes) to guarantee positivity");
  if (spec.modes == 0 || spec.eps == 0.0) return MetricField::flat(grid);

  const auto modes = low_frequency_modes(grid.rdim(), spec.modes);
  std::mt19937_64 rng(spec.seed);
  ScalarField phi(grid);
  const std::size_t nodes = grid.node_count();
  for (const auto& k : modes) {
    double ksq = 0.0;
    for (int d = 0; d < grid.rdim(); ++d) ksq += static_cast<double>(k[d]) * k[d];
    const double amp = spec.eps * (2.0 * uniform_unit(rng) - 1.0);
    const double phase = kTwoPi * uniform_unit(rng);
    // The complex Hessian of cos carries a factor -|k|^2 / 4, so this
    // potential amplitude caps the metric deviation of the mode at |amp|.
    const double a = 4.0 * amp / ksq;
    for (std::size_t p = 0; p < nodes; ++p) {
      double dot = phase;
      for (int d = 0; d < grid.rdim(); ++d) dot += k[d] * grid.coord(p, d);
      phi[p] += a * std::cos(dot);
    }
  }
  return metric_from_potential(ws, MetricField::flat(grid), phi);
}

// --- config parsing ----------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

struct RawConfig {
  std::map<std::string, std::string> kv;
  std::set<std::string> seen;  // keys consumed by the interpreter
  std::vector<std::string>* violations = nullptr;

  bool has(const std::string& key) const { return kv.count(key) != 0; }

  const std::string* take(const std::string& key) {
    seen.insert(key);
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  }
};

void parse_lines(const std::string& text, RawConfig& raw,
                 std::vector<std::string>& violations) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      violations.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      violations.push_back("line " + std::to_string(lineno) + ": empty key or value");
      continue;
    }
    if (raw.kv.count(key)) {
      violations.push_back(key + ": duplicate key");
      continue;
    }
    raw.kv[key] = value;
  }
}

bool parse_double_value(const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end && *end == '\0' && end != s.c_str();
}

bool parse_u64_value(const std::string& s, std::uint64_t& out) {
  if (s.empty() || s[0] == '-') return false;
  char* end = nullptr;
  out = std::strtoull(s.c_str(), &end, 10);
  return end && *end == '\0';
}

bool parse_int_value(const std::string& s, long long& out) {
  char* end = nullptr;
  out = std::strtoll(s.c_str(), &end, 10);
  return end && *end == '\0' && end != s.c_str();
}

struct ConfigReader {
  RawConfig& raw;
  std::vector<std::string>& violations;

  double number(const std::string& key, double fallback) {
    const std::string* s = raw.take(key);
    if (!s) return fallback;
    double v;
    if (!parse_double_value(*s, v)) {
      violations.push_back(key + ": not a number: '" + *s + "'");
      return fallback;
    }
    return v;
  }

  long long integer(const std::string& key, long long fallback) {
    const std::string* s = raw.take(key);
    if (!s) return fallback;
    long long v;
    if (!parse_int_value(*s, v)) {
      violations.push_back(key + ": not an integer: '" + *s + "'");
      return fallback;
    }
    return v;
  }

  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback, bool* set = nullptr) {
    const std::string* s = raw.take(key);
    if (set) *set = s != nullptr;
    if (!s) return fallback;
    std::uint64_t v;
    if (!parse_u64_value(*s, v)) {
      violations.push_back(key + ": not an unsigned integer: '" + *s + "'");
      return fallback;
    }
    return v;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const std::string* s = raw.take(key);
    return s ? *s : fallback;
  }

  // tri-state boolean: unset -> nullopt
  std::optional<bool> flag(const std::string& key) {
    const std::string* s = raw.take(key);
    if (!s) return std::nullopt;
    std::string v = *s;
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    violations.push_back(key + ": not a boolean (use on/off): '" + *s + "'");
    return std::nullopt;
  }
};

bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

struct CheckSpec {
  const char* key;
  bool CheckSettings::*flag;
  std::initializer_list<ModelKind> models;
  const char* description;
};

const CheckSpec kCheckTable[] = {
    {"potential_bounds", &CheckSettings::potential_bounds, {ModelKind::comparison},
     "fits the potential-difference constants and verifies v <= v_tol and u = v + psi"},
    {"trace_volume", &CheckSettings::trace_volume, {ModelKind::comparison},
     "trace and volume-ratio bounds plus the pointwise chain inequality"},
    {"equivalence", &CheckSettings::equivalence, {ModelKind::comparison},
     "two-sided metric equivalence constant C(t) and its final-half plateau"},
    {"probes", &CheckSettings::probes, {ModelKind::comparison},
     "maximum-principle probes: (d/dt - Lap) at the tracked spatial extremum"},
    {"classify", &CheckSettings::classify,
     {ModelKind::torus, ModelKind::comparison, ModelKind::synthetic},
     "tail log-slope classification of the curvature series"},
    {"class_identity", &CheckSettings::class_identity, {ModelKind::scaled},
     "cohomology-level rescaling identity residual"},
    {"u_ode", &CheckSettings::u_ode, {ModelKind::scaled},
     "extracted rescaling potential against its scalar ODE solution"},
    {"metric_identity", &CheckSettings::metric_identity, {ModelKind::scaled},
     "pointwise residual of the metric rescaling identity"},
    {"singular_time", &CheckSettings::singular_time, {ModelKind::toy_cone},
     "cone-boundary hitting time of the class line"},
};

bool check_applies(const CheckSpec& spec, ModelKind m) {
  for (ModelKind cand : spec.models)
    if (cand == m) return true;
  return false;
}

void validate_config(const ScenarioConfig& cfg, std::vector<std::string>& violations) {
  if (cfg.config_version != kConfigVersion)
    violations.push_back("config_version: expected " + std::to_string(kConfigVersion));
  if (!valid_id(cfg.id))
    violations.push_back("id: required, alphanumeric plus '_'/'-' only");
  if (cfg.n < 1 || cfg.n > 2) violations.push_back("grid.n: must be 1 or 2");
  if (cfg.N < 8 || cfg.N % 2 != 0) violations.push_back("grid.N: must be even and >= 8");
  try {
    cfg.flow.validate();
  } catch (const parameter_error& e) {
    violations.push_back(std::string("flow: ") + e.what());
  }

  const auto check_metric = [&](const MetricSpec& s, const char* who) {
    if (s.eps < 0.0) violations.push_back(std::string(who) + ".eps: must be nonnegative");
    if (s.modes < 0) violations.push_back(std::string(who) + ".modes: must be nonnegative");
    if (s.modes > 0 && s.eps > 0.0 && !(s.eps < 1.0 / (2.0 * s.modes)))
      violations.push_back(std::string(who) +
                           ".eps: must be < 1/(2*modes) to guarantee positivity");
  };
  check_metric(cfg.metric_a, "metric_a");
  check_metric(cfg.metric_b, "metric_b");

  if (!(cfg.lambda0 > 0.0)) violations.push_back("scaled.lambda0: must be positive");
  if (cfg.rm_cy_sq < 0.0) violations.push_back("synthetic.rm_cy_sq: must be nonnegative");
  if (cfg.rm_b_sq < 0.0) violations.push_back("synthetic.rm_b_sq: must be nonnegative");
  if (cfg.kappa < 0.0) violations.push_back("cone.kappa: must be nonnegative (0 = nef cone)");

  const CheckSettings& c = cfg.checks;
  if (!(c.eta > 0.0 && c.eta < 0.5)) violations.push_back("checks.eta: must lie in (0, 0.5)");
  if (!(c.v_tol > 0.0)) violations.push_back("checks.v_tol: must be positive");
  if (!(c.eps_iii > 0.0)) violations.push_back("checks.eps_iii: must be positive");
  if (!(c.eps_iib > c.eps_iii))
    violations.push_back("checks.eps_iib: must exceed checks.eps_iii");
  if (!(c.window_fraction > 0.0 && c.window_fraction <= 1.0))
    violations.push_back("checks.window_fraction: must lie in (0, 1]");
  if (!(c.ceiling > 0.0)) violations.push_back("checks.ceiling: must be positive");
  if (!(c.slack > 0.0 && c.slack < 1.0))
    violations.push_back("checks.slack: must lie in (0, 1)");
  if (c.expect != "any" && c.expect != "TypeIII" && c.expect != "TypeIIb")
    violations.push_back("checks.expect: must be TypeIII, TypeIIb, or any");
}

[[noreturn]] void throw_violations(const std::string& origin,
                                   const std::vector<std::string>& violations) {
  std::string msg = "invalid config " + origin + ":";
  for (const std::string& v : violations) msg += "\n  - " + v;
  throw parameter_error(msg);
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text, const std::string& origin) {
  std::vector<std::string> violations;
  RawConfig raw;
  parse_lines(text, raw, violations);
  ConfigReader rd{raw, violations};
  ScenarioConfig cfg;

  cfg.config_version = static_cast<int>(rd.integer("config_version", -1));
  if (cfg.config_version == -1) violations.push_back("config_version: required");
  cfg.id = rd.text("id", "");
  if (cfg.id.empty()) violations.push_back("id: required");

  const std::string model = rd.text("model", "");
  bool model_known = true;
  if (model == "torus")
    cfg.model = ModelKind::torus;
  else if (model == "scaled")
    cfg.model = ModelKind::scaled;
  else if (model == "comparison")
    cfg.model = ModelKind::comparison;
  else if (model == "synthetic")
    cfg.model = ModelKind::synthetic;
  else if (model == "toy_cone")
    cfg.model = ModelKind::toy_cone;
  else {
    violations.push_back(
        "model: required, one of torus/scaled/comparison/synthetic/toy_cone");
    model_known = false;
  }

  cfg.seed = rd.unsigned64("seed", 0);
  cfg.n = static_cast<int>(rd.integer("grid.n", cfg.n));
  cfg.N = static_cast<int>(rd.integer("grid.N", cfg.N));
  cfg.out_dir = rd.text("out_dir", cfg.out_dir);

  cfg.metric_a.eps = rd.number("metric_a.eps", 0.0);
  cfg.metric_a.modes = static_cast<int>(rd.integer("metric_a.modes", 0));
  bool seed_a_set = false, seed_b_set = false;
  cfg.metric_a.seed = rd.unsigned64("metric_a.seed", 0, &seed_a_set);
  cfg.metric_b.eps = rd.number("metric_b.eps", 0.0);
  cfg.metric_b.modes = static_cast<int>(rd.integer("metric_b.modes", 0));
  cfg.metric_b.seed = rd.unsigned64("metric_b.seed", 0, &seed_b_set);
  if (!seed_a_set) cfg.metric_a.seed = cfg.seed;
  if (!seed_b_set) cfg.metric_b.seed = cfg.seed + 1;

  cfg.lambda0 = rd.number("scaled.lambda0", cfg.lambda0);
  cfg.rm_cy_sq = rd.number("synthetic.rm_cy_sq", cfg.rm_cy_sq);
  cfg.rm_b_sq = rd.number("synthetic.rm_b_sq", cfg.rm_b_sq);
  cfg.kappa = rd.number("cone.kappa", cfg.kappa);
  cfg.cone_a0 = rd.number("cone.class_a", cfg.cone_a0);
  cfg.cone_b0 = rd.number("cone.class_b", cfg.cone_b0);

  cfg.flow.dt = rd.number("flow.dt", cfg.flow.dt);
  cfg.flow.horizon = rd.number("flow.horizon", cfg.flow.horizon);
  cfg.flow.sample_stride = static_cast<int>(rd.integer("flow.sample_stride",
                                                       cfg.flow.sample_stride));
  cfg.flow.positivity_floor = rd.number("flow.positivity_floor", cfg.flow.positivity_floor);
  cfg.flow.rm_ceiling = rd.number("flow.rm_ceiling", cfg.flow.rm_ceiling);
  if (const std::string* s = raw.take("flow.scheme")) {
    if (*s == "explicit_rk4")
      cfg.flow.scheme = Scheme::explicit_rk4;
    else if (*s == "semi_implicit")
      cfg.flow.scheme = Scheme::semi_implicit;
    else
      violations.push_back("flow.scheme: must be explicit_rk4 or semi_implicit");
  }

  CheckSettings& c = cfg.checks;
  c.eta = rd.number("checks.eta", c.eta);
  c.v_tol = rd.number("checks.v_tol", c.v_tol);
  c.eps_iii = rd.number("checks.eps_iii", c.eps_iii);
  c.eps_iib = rd.number("checks.eps_iib", c.eps_iib);
  c.window_fraction = rd.number("checks.window_fraction", c.window_fraction);
  c.ceiling = rd.number("checks.ceiling", c.ceiling);
  c.probe_a = rd.number("checks.probe_a", c.probe_a);
  c.slack = rd.number("checks.slack", c.slack);
  c.expect = rd.text("checks.expect", c.expect);

  // Check switches: applicable checks default on; enabling an inapplicable
  // one is a config error.
  for (const CheckSpec& spec : kCheckTable) {
    const std::optional<bool> v = rd.flag(std::string("checks.") + spec.key);
    const bool applies = model_known && check_applies(spec, cfg.model);
    if (v.has_value() && *v && !applies)
      violations.push_back(std::string("checks.") + spec.key +
                           ": not applicable to model " + model);
    c.*(spec.flag) = applies && v.value_or(true);
  }

  // Model-scoped keys set for another model.
  const auto scope = [&](const char* prefix, std::initializer_list<ModelKind> models) {
    bool ok = !model_known;
    for (ModelKind m : models) ok = ok || cfg.model == m;
    if (ok) return;
    for (const auto& [key, value] : raw.kv)
      if (key.rfind(prefix, 0) == 0)
        violations.push_back(key + ": only applies to models that use " + prefix + "*");
  };
  scope("grid.", {ModelKind::torus, ModelKind::scaled, ModelKind::comparison});
  scope("metric_a.", {ModelKind::torus, ModelKind::comparison});
  scope("metric_b.", {ModelKind::comparison});
  scope("scaled.", {ModelKind::scaled});
  scope("synthetic.", {ModelKind::synthetic});
  scope("cone.", {ModelKind::toy_cone});

  for (const auto& [key, value] : raw.kv)
    if (!raw.seen.count(key)) violations.push_back(key + ": unknown key");

  validate_config(cfg, violations);
  if (!violations.empty()) throw_violations(origin, violations);
  return cfg;
}

ScenarioConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parameter_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

// --- canonical form and hash --------------------------------------------------

std::string ScenarioConfig::canonical() const {
  std::ostringstream s;
  s << "config_version=" << config_version << '\n'
    << "id=" << id << '\n'
    << "model=" << model_kind_name(model) << '\n'
    << "grid.n=" << n << '\n'
    << "grid.N=" << N << '\n'
    << "seed=" << fmt_u64(seed) << '\n'
    << "metric_a.eps=" << fmt_double(metric_a.eps) << '\n'
    << "metric_a.modes=" << metric_a.modes << '\n'
    << "metric_a.seed=" << fmt_u64(metric_a.seed) << '\n'
    << "metric_b.eps=" << fmt_double(metric_b.eps) << '\n'
    << "metric_b.modes=" << metric_b.modes << '\n'
    << "metric_b.seed=" << fmt_u64(metric_b.seed) << '\n'
    << "scaled.lambda0=" << fmt_double(lambda0) << '\n'
    << "synthetic.rm_cy_sq=" << fmt_double(rm_cy_sq) << '\n'
    << "synthetic.rm_b_sq=" << fmt_double(rm_b_sq) << '\n'
    << "cone.kappa=" << fmt_double(kappa) << '\n'
    << "cone.class_a=" << fmt_double(cone_a0) << '\n'
    << "cone.class_b=" << fmt_double(cone_b0) << '\n'
    << "flow.dt=" << fmt_double(flow.dt) << '\n'
    << "flow.horizon=" << fmt_double(flow.horizon) << '\n'
    << "flow.scheme=" << (flow.scheme == Scheme::explicit_rk4 ? "explicit_rk4" : "semi_implicit")
    << '\n'
    << "flow.sample_stride=" << flow.sample_stride << '\n'
    << "flow.positivity_floor=" << fmt_double(flow.positivity_floor) << '\n'
    << "flow.rm_ceiling=" << fmt_double(flow.rm_ceiling) << '\n';
  for (const CheckSpec& spec : kCheckTable)
    s << "checks." << spec.key << '=' << (checks.*(spec.flag) ? "on" : "off") << '\n';
  s << "checks.eta=" << fmt_double(checks.eta) << '\n'
    << "checks.v_tol=" << fmt_double(checks.v_tol) << '\n'
    << "checks.eps_iii=" << fmt_double(checks.eps_iii) << '\n'
    << "checks.eps_iib=" << fmt_double(checks.eps_iib) << '\n'
    << "checks.window_fraction=" << fmt_double(checks.window_fraction) << '\n'
    << "checks.ceiling=" << fmt_double(checks.ceiling) << '\n'
    << "checks.probe_a=" << fmt_double(checks.probe_a) << '\n'
    << "checks.slack=" << fmt_double(checks.slack) << '\n'
    << "checks.expect=" << checks.expect << '\n';
  return s.str();
}

std::string ScenarioConfig::hash() const {
  const std::string c = canonical();
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  for (unsigned char b : c) {
    h ^= b;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --- summary serialization -----------------------------------------------------

namespace {

ordered_json json_of(const CheckResult& c) {
  ordered_json j;
  j["name"] = c.name;
  j["pass"] = c.pass;
  j["value"] = c.value;
  j["threshold"] = c.threshold;
  j["detail"] = c.detail;
  return j;
}

ordered_json json_of(const BoundReport& b) {
  ordered_json j;
  j["c_u_lower"] = b.c_u_lower;
  j["c_u_upper_decay"] = b.c_u_upper_decay;
  j["eta"] = b.eta;
  j["c_u_plain"] = b.c_u_plain;
  j["c_udot"] = b.c_udot;
  j["c_psi"] = b.c_psi;
  j["v_max"] = b.v_max;
  j["v_nonpositive"] = b.v_nonpositive;
  j["udot_final_half_increase"] = b.udot_final_half_increase;
  j["c_trace"] = b.c_trace;
  j["c_trace_rev"] = b.c_trace_rev;
  j["volratio_min"] = b.volratio_min;
  j["volratio_max"] = b.volratio_max;
  j["c_volume"] = b.c_volume;
  j["chain_violation_max"] = b.chain_violation_max;
  j["printed_chain_violation_max"] = b.printed_chain_violation_max;
  j["printed_chain_violated_fraction_max"] = b.printed_chain_violated_fraction_max;
  j["amgm_margin"] = b.amgm_margin;
  j["c_equiv"] = b.c_equiv;
  j["equiv_final_half_increase"] = b.equiv_final_half_increase;
  return j;
}

ordered_json json_of(const SingularityReport& r) {
  ordered_json j;
  j["type"] = singularity_type_name(r.classification);
  j["growth_exponent"] = r.growth_exponent;
  j["window_t_start"] = r.window_t_start;
  j["window_t_end"] = r.window_t_end;
  j["sup_value"] = r.sup_value;
  j["bounded"] = r.bounded;
  j["censored_fraction"] = r.censored_fraction;
  return j;
}

}  // namespace

std::string SummaryReport::to_json() const {
  ordered_json j;
  j["scenario_id"] = scenario_id;
  j["model"] = model;
  j["version"] = version;
  j["config_hash"] = config_hash;
  j["terminal"] = terminal;
  ordered_json arr = ordered_json::array();
  for (const CheckResult& c : checks) arr.push_back(json_of(c));
  j["checks"] = arr;
  if (bounds) j["constants"] = json_of(*bounds);
  if (equivalence) {
    ordered_json e;
    e["sup"] = equivalence->sup;
    e["final_half_increase"] = equivalence->final_half_increase;
    e["plateau_ok"] = equivalence->plateau_ok;
    j["equivalence"] = e;
  }
  if (classification) j["classification"] = json_of(*classification);
  if (classification_tilde) j["classification_tilde"] = json_of(*classification_tilde);
  if (!probes.empty()) {
    ordered_json parr = ordered_json::array();
    for (const ProbeSummary& p : probes) {
      ordered_json pj;
      pj["quantity"] = p.quantity;
      pj["a"] = p.a;
      pj["fitted_c"] = p.fitted_c;
      pj["max_lap_excess"] = p.max_lap_excess;
      pj["unusable_points"] = p.unusable_points;
      pj["spatially_constant"] = p.spatially_constant;
      parr.push_back(pj);
    }
    j["probes"] = parr;
  }
  if (scaling) {
    ordered_json s;
    s["class_identity_residual"] = scaling->class_identity_residual;
    s["u_ode_match"] = scaling->u_ode_match;
    s["metric_residual"] = scaling->metric_residual;
    s["u_spatial_spread"] = scaling->u_spatial_spread;
    j["scaling"] = s;
  }
  if (cone) {
    ordered_json s;
    s["singular_time"] =
        std::isfinite(cone->singular_time) ? ordered_json(cone->singular_time)
                                           : ordered_json("inf");
    s["finite"] = cone->finite;
    s["kahler_at_start"] = cone->kahler_at_start;
    j["cone"] = s;
  }
  ordered_json rt;
  rt["wall_ms"] = wall_ms;
  rt["timestamp"] = timestamp;
  j["runtime"] = rt;
  return j.dump(2) + "\n";
}

// --- CSV emission ---------------------------------------------------------------

namespace {

constexpr int kNumCols = 17;
enum Col {
  col_t = 0, col_sup_rm, col_eig_min, col_eig_max, col_u_min, col_u_max,
  col_udot_min, col_udot_max, col_psi_max_abs, col_v_max, col_tr_w_wminus,
  col_tr_wminus_w, col_volratio_min, col_volratio_max, col_s_max, col_class_a,
  col_class_b
};

using Row = std::array<std::optional<double>, kNumCols>;

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_csv(const fs::path& path, const std::string& id, const std::string& stamp,
               const std::vector<Row>& rows, std::vector<std::string>& artifacts) {
  std::ofstream out(path);
  if (!out) throw parameter_error("cannot write " + path.string());
  out << "# scenario " << id << " written " << stamp << "\n";
  out << kCsvHeader << "\n";
  for (const Row& r : rows) {
    for (int c = 0; c < kNumCols; ++c) {
      if (c) out << ',';
      if (r[c]) out << fmt_double(*r[c]);
    }
    out << "\n";
  }
  artifacts.push_back(path.string());
}

std::vector<Row> trajectory_rows(const Trajectory& tr) {
  std::vector<Row> rows(tr.samples.size());
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    const TrajectorySample& s = tr.samples[k];
    Row& r = rows[k];
    r[col_t] = s.t;
    r[col_sup_rm] = s.sup_rm;
    r[col_eig_min] = s.eig_min;
    r[col_eig_max] = s.eig_max;
    r[col_class_a] = s.class_a;
    r[col_class_b] = s.class_b;
  }
  return rows;
}

// --- model runners ----------------------------------------------------------------

struct RunContext {
  const ScenarioConfig& cfg;
  fs::path dir;
  std::string stamp;
  SummaryReport& rep;
  std::vector<std::string>& artifacts;
};

void add_check(RunContext& ctx, CheckResult r) { ctx.rep.checks.push_back(std::move(r)); }

// Summary keeps "none" for clean runs; terminal_reason_name says "completed".
void note_terminal(RunContext& ctx, TerminalReason r) {
  if (r != TerminalReason::none) ctx.rep.terminal = terminal_reason_name(r);
}

// Evaluate one check, folding any thrown error into a failed result.
template <typename Fn>
void guarded_check(RunContext& ctx, const std::string& name, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    CheckResult r;
    r.name = name;
    r.pass = false;
    r.detail = std::string("not evaluated: ") + e.what();
    add_check(ctx, std::move(r));
  }
}

std::string classify_detail(const SingularityReport& r) {
  std::string d = std::string(singularity_type_name(r.classification)) +
                  " exponent=" + fmt_double(r.growth_exponent) +
                  " censored=" + fmt_double(r.censored_fraction);
  if (!r.bounded) d += " unbounded";
  return d;
}

bool expect_matches(const std::string& expect, const SingularityReport& r) {
  if (expect == "any") return r.classification != SingularityType::inconclusive;
  return expect == singularity_type_name(r.classification);
}

void classify_check(RunContext& ctx, const std::vector<double>& t,
                    const std::vector<double>& values, const std::vector<double>& floors,
                    const SingularityReport* tilde_report) {
  const CheckSettings& c = ctx.cfg.checks;
  ClassifyOptions opts;
  opts.eps_iib = c.eps_iib;
  opts.ceiling = c.ceiling;
  opts.floors = floors;
  const SingularityReport rep =
      classify_singularity(t, values, c.window_fraction, c.eps_iii, opts);
  ctx.rep.classification = rep;
  CheckResult r;
  r.name = "classify";
  r.value = rep.growth_exponent;
  r.threshold = c.eps_iii;
  r.pass = expect_matches(c.expect, rep);
  r.detail = classify_detail(rep);
  if (tilde_report) {
    r.pass = r.pass && tilde_report->classification == rep.classification;
    r.detail += std::string("; tilde ") + classify_detail(*tilde_report);
  }
  add_check(ctx, std::move(r));
}

void run_torus(RunContext& ctx) {
  const ScenarioConfig& cfg = ctx.cfg;
  const TorusGrid grid(cfg.n, cfg.N);
  SpectralWorkspace ws(grid);
  const MetricField g0 = seeded_metric(ws, grid, cfg.metric_a);
  const Trajectory tr =
      run(init_flow(g0, nullptr, ScalarField(grid, 1.0), cfg.flow), cfg.flow);
  note_terminal(ctx, tr.terminal);
  write_csv(ctx.dir / (cfg.id + ".omega.csv"), cfg.id, ctx.stamp, trajectory_rows(tr),
            ctx.artifacts);
  if (cfg.checks.classify)
    guarded_check(ctx, "classify", [&] {
      std::vector<double> sup, floor;
      for (const TrajectorySample& s : tr.samples) {
        sup.push_back(s.sup_rm);
        floor.push_back(s.rm_floor);
      }
      classify_check(ctx, tr.times(), sup, floor, nullptr);
    });
}

void run_scaled(RunContext& ctx) {
  const ScenarioConfig& cfg = ctx.cfg;
  const TorusGrid grid(cfg.n, cfg.N);
  SpectralWorkspace ws(grid);
  const MetricField tilde0 = MetricField::flat(grid);
  const MetricField omega0 = tilde0.scaled_metric(cfg.lambda0);
  const ScalarField density(grid, 1.0);

  // The reference flow must cover tau(horizon), which exceeds the horizon
  // when lambda0 < 1.
  FlowConfig tilde_cfg = cfg.flow;
  tilde_cfg.horizon =
      std::max(cfg.flow.horizon, ScalingSchedule(cfg.lambda0).tau(cfg.flow.horizon));

  const Trajectory om = run(init_flow(omega0, nullptr, density, cfg.flow), cfg.flow);
  const Trajectory ti = run(init_flow(tilde0, nullptr, density, tilde_cfg), tilde_cfg);
  note_terminal(ctx, om.terminal != TerminalReason::none ? om.terminal : ti.terminal);

  ScalingSummary ss;
  ExtractedPotential ex;
  bool have_ex = false;
  guarded_check(ctx, "class_identity", [&] {
    ss.class_identity_residual = verify_class_identity(cfg.lambda0, KahlerClass{1.0, 0.0},
                                                       om.times());
    if (cfg.checks.class_identity) {
      CheckResult r;
      r.name = "class_identity";
      r.value = ss.class_identity_residual;
      r.threshold = 1e-12;
      r.pass = ss.class_identity_residual <= r.threshold;
      add_check(ctx, std::move(r));
    }
  });
  guarded_check(ctx, "u_ode", [&] {
    ex = extract_potential(om, ti, cfg.lambda0);
    have_ex = true;
    ss.u_spatial_spread = ex.u_spatial_spread;
    const ScaledPotential ode =
        scaled_potential_ode(cfg.lambda0, grid.n, cfg.flow.horizon, cfg.flow.dt);
    double match = 0.0;
    for (std::size_t k = 0; k < ex.ts.size(); ++k) {
      const double reference = [&] {
        const std::size_t i = locate_interval(ode.ts, ex.ts[k]);
        if (std::abs(ex.ts[k] - ode.ts[i]) <= 1e-9) return ode.u[i];
        if (std::abs(ex.ts[k] - ode.ts[i + 1]) <= 1e-9) return ode.u[i + 1];
        return pchip_local(ode.ts, [&](std::size_t j) { return ode.u[j]; }, ex.ts[k]);
      }();
      for (double u : ex.u[k]) match = std::max(match, std::abs(u - reference));
    }
    ss.u_ode_match = match;
    if (cfg.checks.u_ode) {
      CheckResult r;
      r.name = "u_ode";
      r.value = match;
      r.threshold = 1e-6;
      r.pass = match <= r.threshold;
      r.detail = "u_spatial_spread=" + fmt_double(ex.u_spatial_spread);
      add_check(ctx, std::move(r));
    }
  });
  guarded_check(ctx, "metric_identity", [&] {
    ss.metric_residual = metric_identity_residual(om, ti, cfg.lambda0);
    if (cfg.checks.metric_identity) {
      CheckResult r;
      r.name = "metric_identity";
      r.value = ss.metric_residual;
      r.threshold = 1e-6;
      r.pass = ss.metric_residual <= r.threshold;
      add_check(ctx, std::move(r));
    }
  });
  ctx.rep.scaling = ss;

  std::vector<Row> rows = trajectory_rows(om);
  if (have_ex)
    for (std::size_t k = 0; k < rows.size() && k < ex.u.size(); ++k) {
      const auto [ulo, uhi] = std::minmax_element(ex.u[k].begin(), ex.u[k].end());
      const auto [dlo, dhi] = std::minmax_element(ex.udot[k].begin(), ex.udot[k].end());
      rows[k][col_u_min] = *ulo;
      rows[k][col_u_max] = *uhi;
      rows[k][col_udot_min] = *dlo;
      rows[k][col_udot_max] = *dhi;
    }
  write_csv(ctx.dir / (cfg.id + ".omega.csv"), cfg.id, ctx.stamp, rows, ctx.artifacts);
  write_csv(ctx.dir / (cfg.id + ".tilde.csv"), cfg.id, ctx.stamp, trajectory_rows(ti),
            ctx.artifacts);
}

void run_comparison(RunContext& ctx) {
  const ScenarioConfig& cfg = ctx.cfg;
  const TorusGrid grid(cfg.n, cfg.N);
  SpectralWorkspace ws(grid);
  const MetricField ga = seeded_metric(ws, grid, cfg.metric_a);
  const MetricField gb = seeded_metric(ws, grid, cfg.metric_b);
  ComparisonOptions opts;
  opts.slack = cfg.checks.slack;
  const ComparisonState st = evolve_comparison(ga, gb, cfg.flow, opts);
  note_terminal(ctx, st.terminal);

  const ComparisonSeries& s = st.series;
  std::vector<Row> rows(s.t.size());
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    Row& r = rows[k];
    r[col_t] = s.t[k];
    r[col_sup_rm] = s.sup_rm[k];
    r[col_eig_min] = st.omega.samples[k].eig_min;
    r[col_eig_max] = st.omega.samples[k].eig_max;
    r[col_u_min] = s.u_min[k];
    r[col_u_max] = s.u_max[k];
    r[col_udot_min] = s.udot_min[k];
    r[col_udot_max] = s.udot_max[k];
    r[col_psi_max_abs] = s.psi_max_abs[k];
    r[col_v_max] = s.v_max[k];
    r[col_tr_w_wminus] = s.tr_w_wminus_max[k];
    r[col_tr_wminus_w] = s.tr_wminus_w_max[k];
    r[col_volratio_min] = s.volratio_min[k];
    r[col_volratio_max] = s.volratio_max[k];
    r[col_s_max] = s.s_max[k];
    r[col_class_a] = st.omega.samples[k].class_a;
    r[col_class_b] = st.omega.samples[k].class_b;
  }
  write_csv(ctx.dir / (cfg.id + ".comparison.csv"), cfg.id, ctx.stamp, rows,
            ctx.artifacts);

  BoundReport bounds;
  bool have_bounds = false;
  if (cfg.checks.potential_bounds)
    guarded_check(ctx, "potential_bounds", [&] {
      const BoundReport pb = check_potential_bounds(st, cfg.checks.eta, cfg.checks.v_tol);
      bounds.c_u_lower = pb.c_u_lower;
      bounds.c_u_upper_decay = pb.c_u_upper_decay;
      bounds.eta = pb.eta;
      bounds.c_u_plain = pb.c_u_plain;
      bounds.c_udot = pb.c_udot;
      bounds.c_psi = pb.c_psi;
      bounds.v_max = pb.v_max;
      bounds.v_nonpositive = pb.v_nonpositive;
      bounds.udot_final_half_increase = pb.udot_final_half_increase;
      have_bounds = true;
      double identity = 0.0;
      for (double v : s.identity_residual) identity = std::max(identity, v);
      const bool finite = std::isfinite(pb.c_u_lower) && std::isfinite(pb.c_u_upper_decay) &&
                          std::isfinite(pb.c_udot) && std::isfinite(pb.c_psi);
      CheckResult r;
      r.name = "potential_bounds";
      r.value = pb.v_max;
      r.threshold = cfg.checks.v_tol;
      r.pass = pb.v_nonpositive && identity <= 1e-10 && finite;
      r.detail = "c_u_lower=" + fmt_double(pb.c_u_lower) +
                 " c_u_upper_decay=" + fmt_double(pb.c_u_upper_decay) +
                 " c_udot=" + fmt_double(pb.c_udot) + " c_psi=" + fmt_double(pb.c_psi) +
                 " identity=" + fmt_double(identity);
      add_check(ctx, std::move(r));
    });
  if (cfg.checks.trace_volume)
    guarded_check(ctx, "trace_volume", [&] {
      const BoundReport tv = check_trace_volume_bounds(st);
      bounds.c_trace = tv.c_trace;
      bounds.c_trace_rev = tv.c_trace_rev;
      bounds.volratio_min = tv.volratio_min;
      bounds.volratio_max = tv.volratio_max;
      bounds.c_volume = tv.c_volume;
      bounds.chain_violation_max = tv.chain_violation_max;
      bounds.printed_chain_violation_max = tv.printed_chain_violation_max;
      bounds.printed_chain_violated_fraction_max = tv.printed_chain_violated_fraction_max;
      bounds.amgm_margin = tv.amgm_margin;
      have_bounds = true;
      CheckResult r;
      r.name = "trace_volume";
      r.value = tv.c_volume;
      r.threshold = 0.0;
      r.pass = std::isfinite(tv.c_volume) && tv.chain_violation_max <= 1e-12 &&
               tv.amgm_margin >= -1e-12;
      r.detail = "c_trace=" + fmt_double(tv.c_trace) +
                 " c_trace_rev=" + fmt_double(tv.c_trace_rev) +
                 " chain=" + fmt_double(tv.chain_violation_max) +
                 " printed_chain=" + fmt_double(tv.printed_chain_violation_max) +
                 " amgm_margin=" + fmt_double(tv.amgm_margin);
      add_check(ctx, std::move(r));
    });
  if (cfg.checks.equivalence)
    guarded_check(ctx, "equivalence", [&] {
      const EquivalenceReport eq = equivalence_constant(st);
      ctx.rep.equivalence = EquivSummary{eq.sup, eq.final_half_increase, eq.plateau_ok};
      bounds.c_equiv = eq.sup;
      bounds.equiv_final_half_increase = eq.final_half_increase;
      have_bounds = true;
      CheckResult r;
      r.name = "equivalence";
      r.value = eq.final_half_increase;
      r.threshold = 0.05;
      r.pass = eq.plateau_ok && std::isfinite(eq.sup);
      r.detail = "sup=" + fmt_double(eq.sup);
      add_check(ctx, std::move(r));
    });
  if (cfg.checks.probes)
    guarded_check(ctx, "probes", [&] {
      double c0 = 0.0;
      for (const TrajectorySample& sm : st.minus.samples) c0 = std::max(c0, sm.sup_rm);
      const double a = cfg.checks.probe_a > 0.0 ? cfg.checks.probe_a : 2.0 + c0;
      const ProbeQuantity quantities[] = {
          ProbeQuantity::s_plus_a_trace, ProbeQuantity::log_trace_minus_au,
          ProbeQuantity::udot_minus_au, ProbeQuantity::udot_plus_au};
      bool pass = true;
      double worst = 0.0;
      for (ProbeQuantity q : quantities) {
        const ProbeReport pr = mp_probe(st, q, a);
        ProbeSummary psum;
        psum.quantity = probe_quantity_name(q);
        psum.a = a;
        psum.fitted_c = pr.fitted_c;
        psum.max_lap_excess = pr.max_lap_excess;
        psum.unusable_points = static_cast<int>(pr.unusable_points);
        psum.spatially_constant = pr.spatially_constant;
        ctx.rep.probes.push_back(psum);
        worst = std::max(worst, pr.max_lap_excess);
        pass = pass && pr.max_lap_excess <= 1e-6 && std::isfinite(pr.fitted_c);
      }
      CheckResult r;
      r.name = "probes";
      r.value = worst;
      r.threshold = 1e-6;
      r.pass = pass;
      r.detail = "A=" + fmt_double(a);
      add_check(ctx, std::move(r));
    });
  if (cfg.checks.classify)
    guarded_check(ctx, "classify", [&] {
      ClassifyOptions topts;
      topts.eps_iib = cfg.checks.eps_iib;
      topts.ceiling = cfg.checks.ceiling;
      topts.floors = s.rm_floor_tilde;
      const SingularityReport tilde_rep = classify_singularity(
          s.t, s.sup_rm_tilde, cfg.checks.window_fraction, cfg.checks.eps_iii, topts);
      ctx.rep.classification_tilde = tilde_rep;
      classify_check(ctx, s.t, s.sup_rm, s.rm_floor, &tilde_rep);
    });
  if (have_bounds) ctx.rep.bounds = bounds;
}

void run_synthetic(RunContext& ctx) {
  const ScenarioConfig& cfg = ctx.cfg;
  const double step = cfg.flow.dt * cfg.flow.sample_stride;
  std::vector<double> ts;
  for (std::size_t k = 1; k * step <= cfg.flow.horizon + 1e-12; ++k) ts.push_back(k * step);
  const std::vector<double> series = product_rm_series(cfg.rm_cy_sq, cfg.rm_b_sq, ts);

  std::vector<Row> rows(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    rows[k][col_t] = ts[k];
    rows[k][col_sup_rm] = series[k];
  }
  write_csv(ctx.dir / (cfg.id + ".series.csv"), cfg.id, ctx.stamp, rows, ctx.artifacts);

  if (cfg.checks.classify)
    guarded_check(ctx, "classify", [&] { classify_check(ctx, ts, series, {}, nullptr); });
}

void run_toy_cone(RunContext& ctx) {
  const ScenarioConfig& cfg = ctx.cfg;
  const ConeModel model =
      cfg.kappa > 0.0 ? ConeModel::toy_fano(cfg.kappa) : ConeModel::nef_canonical_model();
  const KahlerClass c0{cfg.cone_a0, cfg.cone_b0};
  ConeSummary cs;
  cs.kahler_at_start = is_kahler(c0, model);

  const double step = cfg.flow.dt * cfg.flow.sample_stride;
  std::vector<Row> rows;
  for (std::size_t k = 0; k * step <= cfg.flow.horizon + 1e-12; ++k) {
    const double t = k * step;
    const KahlerClass c = evolve_class(c0, t);
    if (!is_kahler(c, model)) break;
    Row r;
    r[col_t] = t;
    r[col_class_a] = c.a;
    r[col_class_b] = c.b;
    rows.push_back(r);
  }
  write_csv(ctx.dir / (cfg.id + ".classes.csv"), cfg.id, ctx.stamp, rows, ctx.artifacts);

  guarded_check(ctx, "singular_time", [&] {
    const double T = singular_time(c0, model);
    cs.singular_time = T;
    cs.finite = std::isfinite(T);
    ctx.rep.cone = cs;
    if (!cfg.checks.singular_time) return;
    CheckResult r;
    r.name = "singular_time";
    r.value = T;
    if (cs.finite) {
      const bool before = is_kahler(evolve_class(c0, T * (1.0 - 1e-9)), model);
      const bool after = !is_kahler(evolve_class(c0, T * (1.0 + 1e-9)), model);
      r.pass = T > 0.0 && before && after;
      r.detail = "boundary bracketing " + std::string(before && after ? "holds" : "fails");
    } else {
      r.pass = model.kind == ConeModel::Kind::nef_canonical;
      r.detail = "class line never leaves the cone";
    }
    add_check(ctx, std::move(r));
  });
  if (!ctx.rep.cone) ctx.rep.cone = cs;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
  std::vector<std::string> violations;
  validate_config(config, violations);
  if (!violations.empty()) throw_violations("'" + config.id + "'", violations);

  const auto t0 = std::chrono::steady_clock::now();
  ScenarioResult result;
  SummaryReport& rep = result.summary;
  rep.scenario_id = config.id;
  rep.model = model_kind_name(config.model);
  rep.config_hash = config.hash();
  rep.timestamp = utc_timestamp();

  const char* env = std::getenv("KRFLAB_OUT_DIR");
  const fs::path dir = (env && *env) ? fs::path(env) : fs::path(config.out_dir);
  fs::create_directories(dir);

  RunContext ctx{config, dir, rep.timestamp, rep, result.artifacts};
  switch (config.model) {
    case ModelKind::torus: run_torus(ctx); break;
    case ModelKind::scaled: run_scaled(ctx); break;
    case ModelKind::comparison: run_comparison(ctx); break;
    case ModelKind::synthetic: run_synthetic(ctx); break;
    case ModelKind::toy_cone: run_toy_cone(ctx); break;
  }

  result.exit_code = 0;
  for (const CheckResult& c : rep.checks)
    if (!c.pass) result.exit_code = 1;
  if (rep.terminal != "none") result.exit_code = 2;

  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                          t0)
                    .count();
  const fs::path summary_path = dir / (config.id + ".summary.json");
  std::ofstream out(summary_path);
  if (!out) throw parameter_error("cannot write " + summary_path.string());
  out << rep.to_json();
  result.artifacts.push_back(summary_path.string());
  return result;
}

// --- report diffing -----------------------------------------------------------------

namespace {

void diff_json(const ordered_json& a, const ordered_json& b, const std::string& path,
               double rel_tol, std::vector<std::string>& out) {
  if (a.is_object() && b.is_object()) {
    std::set<std::string> keys;
    for (const auto& [k, v] : a.items()) keys.insert(k);
    for (const auto& [k, v] : b.items()) keys.insert(k);
    for (const std::string& k : keys) {
      const std::string sub = path.empty() ? k : path + "." + k;
      if (!a.contains(k)) {
        out.push_back(sub + ": missing on the left");
      } else if (!b.contains(k)) {
        out.push_back(sub + ": missing on the right");
      } else {
        diff_json(a.at(k), b.at(k), sub, rel_tol, out);
      }
    }
    return;
  }
  if (a.is_array() && b.is_array()) {
    if (a.size() != b.size()) {
      out.push_back(path + ": array size " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
      return;
    }
    for (std::size_t i = 0; i < a.size(); ++i)
      diff_json(a[i], b[i], path + "[" + std::to_string(i) + "]", rel_tol, out);
    return;
  }
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    const double scale = std::max(std::abs(x), std::abs(y));
    if (scale > 1e-12 && std::abs(x - y) > rel_tol * scale)
      out.push_back(path + ": " + fmt_double(x) + " -> " + fmt_double(y));
    return;
  }
  if (a != b) out.push_back(path + ": " + a.dump() + " -> " + b.dump());
}

}  // namespace

std::string report_diff(const std::string& json_a, const std::string& json_b,
                        double rel_tol) {
  ordered_json a, b;
  try {
    a = ordered_json::parse(json_a);
    b = ordered_json::parse(json_b);
  } catch (const std::exception& e) {
    throw parameter_error(std::string("report_diff: invalid JSON: ") + e.what());
  }
  if (!a.contains("scenario_id") || !b.contains("scenario_id") ||
      a["scenario_id"] != b["scenario_id"])
    throw parameter_error("report_diff: scenario ids differ");
  a.erase("runtime");
  b.erase("runtime");
  std::vector<std::string> out;
  diff_json(a, b, "", rel_tol, out);
  std::string joined;
  for (const std::string& line : out) {
    joined += line;
    joined += '\n';
  }
  return joined;
}

std::vector<CheckInfo> list_checks() {
  std::vector<CheckInfo> out;
  for (const CheckSpec& spec : kCheckTable) {
    CheckInfo info;
    info.name = spec.key;
    std::string models;
    for (ModelKind m : spec.models) {
      if (!models.empty()) models += ", ";
      models += model_kind_name(m);
    }
    info.models = models;
    info.description = spec.description;
    out.push_back(info);
  }
  return out;
}

}  // namespace krf
