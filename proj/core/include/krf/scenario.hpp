#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "krf/comparison.hpp"
#include "krf/flow.hpp"
#include "krf/grid.hpp"
#include "krf/spectral.hpp"

namespace krf {

// Scenario runner: experiment configurations from versioned key-value text
// files, orchestration of flows / comparisons / model solutions, and emission
// of a CSV time series per trajectory plus one JSON summary per scenario.

inline constexpr int kConfigVersion = 1;
inline constexpr const char* kProjectVersion = "0.1.0";

// Fixed CSV schema shared by every trajectory artifact.  Columns a scenario
// does not produce stay empty (never NaN).
inline constexpr const char* kCsvHeader =
    "t,sup_rm,eig_min,eig_max,u_min,u_max,udot_min,udot_max,psi_max_abs,v_max,"
    "tr_w_wminus_max,tr_wminus_w_max,volratio_min,volratio_max,S_max,class_a,class_b";

enum class ModelKind { torus, scaled, comparison, synthetic, toy_cone };

const char* model_kind_name(ModelKind m);

// Uniform [0, 1) from the generator's top 53 bits.  The mapping is pinned
// (instead of std::uniform_real_distribution) so seeded runs are byte-stable
// across standard libraries.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Randomized initial metric: flat + the complex Hessian of a low-frequency
// cosine potential.  Each of the `modes` lowest wave vectors contributes
// amplitude <= eps to the metric deviation in operator norm, so
// eps < 1 / (2 * modes) guarantees positivity by construction.
struct MetricSpec {
  double eps = 0.0;
  int modes = 0;
  std::uint64_t seed = 0;
};

MetricField seeded_metric(SpectralWorkspace& ws, const TorusGrid& grid,
                          const MetricSpec& spec);

// Check switches and thresholds.  Which checks apply depends on the model;
// enabling an inapplicable check is a config error.
struct CheckSettings {
  bool potential_bounds = false;
  bool trace_volume = false;
  bool equivalence = false;
  bool probes = false;
  bool classify = false;
  bool class_identity = false;  // scaled model
  bool u_ode = false;           // scaled model
  bool metric_identity = false; // scaled model
  bool singular_time = false;   // toy cone model

  double eta = 0.4;              // decay rate in (0, 1/2) for the u upper bound
  double v_tol = kVTolerance;    // v <= v_tol passes
  double eps_iii = 0.05;         // |log-slope| ceiling for TypeIII
  double eps_iib = 0.5;          // log-slope floor for TypeIIb
  double window_fraction = 0.5;  // trailing window for the slope fit
  double ceiling = 1e8;          // boundedness ceiling for classification
  double probe_a = 0.0;          // A in the probes; <= 0 selects 2 + sup|Rm(omega^-)|
  double slack = 0.1;            // bracket slack
  std::string expect = "any";    // TypeIII | TypeIIb | any
};

struct ScenarioConfig {
  int config_version = kConfigVersion;
  std::string id;
  ModelKind model = ModelKind::torus;

  int n = 1;
  int N = 32;
  MetricSpec metric_a;  // torus and comparison models
  MetricSpec metric_b;  // comparison model (second initial metric)
  double lambda0 = 2.0;                     // scaled model
  double rm_cy_sq = 0.0, rm_b_sq = 0.0;     // synthetic model
  double kappa = 1.0;                       // toy cone model; 0 selects the nef cone
  double cone_a0 = 1.0, cone_b0 = 0.0;      // toy cone initial class

  FlowConfig flow;
  std::uint64_t seed = 0;
  CheckSettings checks;
  std::string out_dir = ".";

  // Deterministic serialization of every field; hashing it identifies the
  // configuration independently of file formatting.
  std::string canonical() const;
  std::string hash() const;  // FNV-1a 64 over canonical(), hex
};

// Parses and validates a config file (or raw text).  All violations are
// collected and reported together in one parameter error.
ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text, const std::string& origin);

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;      // headline measured value
  double threshold = 0.0;  // pass threshold where applicable
  std::string detail;
};

struct EquivSummary {
  double sup = 1.0;
  double final_half_increase = 0.0;
  bool plateau_ok = false;
};

struct ProbeSummary {
  std::string quantity;
  double a = 0.0;
  double fitted_c = 0.0;
  double max_lap_excess = 0.0;
  int unusable_points = 0;
  bool spatially_constant = false;
};

struct ScalingSummary {
  double class_identity_residual = 0.0;
  double u_ode_match = 0.0;
  double metric_residual = 0.0;
  double u_spatial_spread = 0.0;
};

struct ConeSummary {
  double singular_time = 0.0;
  bool finite = false;
  bool kahler_at_start = false;
};

struct SummaryReport {
  std::string scenario_id;
  std::string model;
  std::string version = kProjectVersion;
  std::string config_hash;
  std::vector<CheckResult> checks;
  std::optional<BoundReport> bounds;
  std::optional<EquivSummary> equivalence;
  std::optional<SingularityReport> classification;
  std::optional<SingularityReport> classification_tilde;  // comparison model
  std::vector<ProbeSummary> probes;
  std::optional<ScalingSummary> scaling;
  std::optional<ConeSummary> cone;
  std::string terminal = "none";
  // Runtime block: excluded from report_diff and from reproducibility
  // comparisons.
  double wall_ms = 0.0;
  std::string timestamp;

  std::string to_json() const;
};

struct ScenarioResult {
  SummaryReport summary;
  int exit_code = 0;  // 0 pass, 1 check failed, 2 flow terminated, 3 config error
  std::vector<std::string> artifacts;  // files written (CSV + summary)
};

// Executes the scenario, writes artifacts under the config's out_dir (or the
// KRFLAB_OUT_DIR environment override), and returns the summary.  Output is
// deterministic for a fixed config + seed apart from the runtime block and
// '#' comment lines in the CSV.
ScenarioResult run_scenario(const ScenarioConfig& config);

// Field-wise comparison of two JSON summaries with a relative tolerance on
// numbers; the runtime block is ignored.  Returns one line per drifted field
// (empty string == no drift).  Mismatched scenario ids are a parameter error.
std::string report_diff(const std::string& json_a, const std::string& json_b,
                        double rel_tol = 0.05);

struct CheckInfo {
  std::string name;
  std::string models;  // models the check applies to
  std::string description;
};

std::vector<CheckInfo> list_checks();

}  // namespace krf
