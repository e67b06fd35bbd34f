#pragma once

#include <string>
#include <vector>

#include "krf/flow.hpp"
#include "krf/geometry.hpp"
#include "krf/grid.hpp"

namespace krf {

// Bracketing constants lambda_minus * tilde0 <= omega0 <= lambda_plus *
// tilde0, built from the extreme generalized eigenvalues with a relative
// slack so that omega_* = omega0 - lambda_minus * tilde0 keeps a definite
// margin:  min gen-eig(omega_*, tilde0) >= 0.99 * slack * min_ratio.
struct BracketPair {
  double lambda_minus = 1.0;
  double lambda_plus = 1.0;
  double slack = 0.0;
  double omega_star_margin = 0.0;  // min gen-eig of omega_* against tilde0
};

BracketPair bracket_initial(const MetricField& omega0, const MetricField& tilde0,
                            double slack);

// Per-sample scalar reductions of the comparison quantities.  u, psi, v are
// the potential differences u = phi - phi^-, psi = phi^+ - phi^-, v = phi -
// phi^+; traces and volume ratios compare omega with omega^-; S and the
// eigen-ratios compare omega with omegatilde.
struct ComparisonSeries {
  std::vector<double> t;
  std::vector<double> u_min, u_max;
  std::vector<double> udot_min, udot_max;
  std::vector<double> psi_max_abs;
  std::vector<double> v_max;
  std::vector<double> identity_residual;  // max |u - (v + psi)|
  std::vector<double> tr_w_wminus_max;    // sup tr_omega omega^-
  std::vector<double> tr_wminus_w_max;    // sup tr_{omega^-} omega
  std::vector<double> volratio_min, volratio_max;  // det omega / det omega^-
  std::vector<double> s_max;
  std::vector<double> eig_lo, eig_hi;  // generalized eigen range of omega vs omegatilde
  // Chain inequality tr_{omega^-} omega <= n * volratio * (tr_omega omega^-)^{n-1}:
  // worst relative violation per sample (0 when satisfied), and the same for
  // the exponent-1 variant together with the fraction of nodes violating it.
  std::vector<double> chain_violation;
  std::vector<double> printed_chain_violation;
  std::vector<double> printed_chain_violated_fraction;
  std::vector<double> sup_rm, rm_floor;              // omega flow measurement
  std::vector<double> sup_rm_tilde, rm_floor_tilde;  // omegatilde flow
};

struct ComparisonState {
  BracketPair bracket;
  Trajectory omega, tilde, plus, minus;
  ComparisonSeries series;
  bool truncated = false;           // some flow ended before the horizon
  TerminalReason terminal = TerminalReason::none;
};

struct ComparisonOptions {
  double slack = 0.1;
  std::vector<double> extra_sample_times;  // forwarded to every flow
};

// Runs the four coupled flows (omega from omega0; omegatilde, omega^+,
// omega^- from tilde0 and its bracket scalings) under one shared gauge and
// volume form, and reduces the comparison quantities at every shared sample.
ComparisonState evolve_comparison(const MetricField& omega0, const MetricField& tilde0,
                                  const FlowConfig& config,
                                  const ComparisonOptions& opts = {});

// Fitted constants for the potential estimates, the trace/volume estimates,
// and the equivalence constant.  Constants are the smallest values making the
// corresponding inequality hold over the sampled range.
struct BoundReport {
  // potential bounds
  double c_u_lower = 0.0;        // u >= -C e^{-t}
  double c_u_upper_decay = 0.0;  // u <= C e^{-eta t}
  double eta = 0.0;
  double c_u_plain = 0.0;  // |u| <= C (what the uniform argument yields)
  double c_udot = 0.0;     // |du/dt| <= C
  double c_psi = 0.0;      // |psi| <= C
  double v_max = 0.0;
  bool v_nonpositive = false;
  double udot_final_half_increase = 0.0;  // plateau metric for |du/dt|
  // trace / volume bounds
  double c_trace = 0.0;      // sup tr_omega omega^-
  double c_trace_rev = 0.0;  // sup tr_{omega^-} omega
  double volratio_min = 0.0;
  double volratio_max = 0.0;
  double c_volume = 0.0;  // max(volratio_max, 1/volratio_min)
  double chain_violation_max = 0.0;
  double printed_chain_violation_max = 0.0;
  double printed_chain_violated_fraction_max = 0.0;
  double amgm_margin = 0.0;  // volratio_min - (n / c_trace)^n, should be >= -tol
  // equivalence
  double c_equiv = 0.0;
  double equiv_final_half_increase = 0.0;
};

inline constexpr double kVTolerance = 1e-8;

// Potential-bound part; requires sampled t-range >= 5 and eta in (0, 1/2).
BoundReport check_potential_bounds(const ComparisonState& state, double eta,
                                   double v_tol = kVTolerance);

// Trace/volume part (fills only those fields).
BoundReport check_trace_volume_bounds(const ComparisonState& state);

struct EquivalenceReport {
  std::vector<double> t;
  std::vector<double> c;  // C(t) = max(max-ratio, 1/min-ratio)
  double sup = 0.0;
  double final_half_increase = 0.0;
  bool plateau_ok = false;  // final-half relative increase <= 5%
};

EquivalenceReport equivalence_constant(const ComparisonState& state);

// Maximum-principle probe quantities.
enum class ProbeQuantity {
  udot_minus_au,      // Q = du/dt - A u           (max principle, upper)
  udot_plus_au,       // Q = du/dt + A u           (min principle, lower)
  log_trace_minus_au, // Q = log tr_omega omega^- - A u
  s_plus_a_trace      // Q = S + A tr_omega omegatilde
};

const char* probe_quantity_name(ProbeQuantity q);

struct ProbePoint {
  double t = 0.0;
  double q_extreme = 0.0;   // spatial max (or min for the min-type probe)
  double dq_dt = 0.0;       // centered time difference at the tracked node
  double lap_q = 0.0;       // spectral Laplacian (w.r.t. omega) at that node
  double lhs = 0.0;         // dq_dt - lap_q
  double companion = 0.0;   // S, trace, or du/dt entering the declared bound
  bool usable = true;       // false when the fitted form degenerates here
};

struct ProbeReport {
  ProbeQuantity quantity = ProbeQuantity::s_plus_a_trace;
  double a = 0.0;
  std::vector<ProbePoint> points;
  double fitted_c = 0.0;        // smallest C validating the declared inequality
  double max_lap_excess = 0.0;  // max positive Laplacian at maxima, relative to |Q|_inf
  double max_lap_ratio = 0.0;   // max |Laplacian| / |Q|_inf at tracked nodes
  bool spatially_constant = false;
  std::size_t unusable_points = 0;
};

// Evaluates (d/dt - Lap_omega) Q at the running spatial extremum of Q by
// centered time differences and the spectral Laplacian, then fits the
// constant in the declared inequality:
//   s_plus_a_trace:      lhs <= -S + C
//   log_trace_minus_au:  lhs <= C - tr_omega omega^-
//   udot_minus_au:       lhs <= C (1 - du/dt)
//   udot_plus_au:        lhs >= -C (1 - du/dt)   (at the running minimum)
// Sample spacing must be fine enough for the centered differences
// (max gap <= 0.25), else a parameter error.
ProbeReport mp_probe(const ComparisonState& state, ProbeQuantity quantity, double a,
                     int probe_stride = 1);

// Singularity classification from a curvature-magnitude series.
enum class SingularityType { type_iii, type_iib, inconclusive };

const char* singularity_type_name(SingularityType s);

struct SingularityReport {
  SingularityType classification = SingularityType::inconclusive;
  double growth_exponent = 0.0;
  double window_t_start = 0.0;
  double window_t_end = 0.0;
  double sup_value = 0.0;
  bool bounded = true;              // sup over the whole series <= ceiling
  double censored_fraction = 0.0;   // window samples at/below the noise floor
};

struct ClassifyOptions {
  double eps_iib = 0.5;
  double ceiling = 1e8;
  // Optional per-sample measurement floors (parallel to the series); samples
  // not resolved above their floor are censored from the slope fit.  A window
  // dominated by censored samples reports exponent 0 (resolved decay to
  // measurement zero == bounded).
  std::vector<double> floors;
};

SingularityReport classify_singularity(const std::vector<double>& t,
                                       const std::vector<double>& values,
                                       double window_fraction, double eps_iii,
                                       const ClassifyOptions& opts = {});

}  // namespace krf
