#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "krf/cohomology.hpp"
#include "krf/geometry.hpp"
#include "krf/grid.hpp"
#include "krf/spectral.hpp"

namespace krf {

// Normalised Kahler-Ricci flow in potential form.  The evolving metric is
// kept in the reference decomposition
//   omega(t) = e^{-t} omega0 + (1 - e^{-t}) chi + i ddbar phi(t),
// and the potential satisfies
//   dphi/dt = log(det ghat / Omega) - phi,   ghat := e^t omega(t),
// which is the flow equation with normalization constant c(t) = n t folded
// in.  That gauge is shared by every flow in a comparison, so potential
// differences obey the relative Monge-Ampere equations with no extra terms,
// and flat-case potentials stay bounded.  Omega is a fixed positive density
// against the flat measure (default: uniform 1).
//
// Kahlerness and class evolution are exact by construction: the metric is
// always rebuilt from the potential, never stepped directly.

enum class Scheme { explicit_rk4, semi_implicit };

enum class TerminalReason { none, positivity_loss, curvature_ceiling, stability_violation };

struct FlowConfig {
  double dt = 1e-3;
  double horizon = 10.0;
  Scheme scheme = Scheme::explicit_rk4;
  double positivity_floor = kDefaultPositivityFloor;
  int sample_stride = 10;
  double rm_ceiling = 1e8;  // sup|Rm| above this terminates the run

  void validate() const;
};

// Immutable per-flow data shared by all states and samples of one run.
struct FlowSetup {
  TorusGrid grid;
  MetricField omega0;
  std::optional<HermitianField> chi;  // absent => zero
  ScalarField volume_form;            // positive density Omega
  KahlerClass class0{1.0, 0.0};
};

struct FlowState {
  std::shared_ptr<const FlowSetup> setup;
  double t = 0.0;
  ScalarField phi;
  MetricField metric;  // reconstructed omega(t)
  KahlerClass cls{1.0, 0.0};
  TerminalReason terminal = TerminalReason::none;
  std::size_t terminal_node = 0;  // earliest failing node on positivity loss
};

struct TrajectorySample {
  double t = 0.0;
  std::vector<double> phi;  // potential snapshot (metric is reproducible from it)
  double sup_rm = 0.0;
  double rm_floor = 0.0;  // measurement floor for sup_rm at this sample
  double eig_min = 0.0;
  double eig_max = 0.0;
  double class_a = 0.0;
  double class_b = 0.0;
};

struct Trajectory {
  std::shared_ptr<const FlowSetup> setup;
  FlowConfig config;
  std::vector<TrajectorySample> samples;
  TerminalReason terminal = TerminalReason::none;
  double terminal_t = 0.0;
  std::size_t terminal_node = 0;  // argmin node for positivity loss

  std::vector<double> times() const;
  const TrajectorySample& sample(std::size_t i) const { return samples.at(i); }

  // Rebuild the sampled state's potential / metric.
  ScalarField phi_at(std::size_t i) const;
  MetricField metric_at(std::size_t i, SpectralWorkspace& ws) const;
  FlowState state_at(std::size_t i, SpectralWorkspace& ws) const;
};

// Reconstruct omega(t) from the decomposition; shared by the integrator and
// everything downstream so all paths agree to the last bit.
MetricField reconstruct_metric(SpectralWorkspace& ws, const FlowSetup& setup, double t,
                               const ScalarField& phi, double positivity_floor);

FlowState init_flow(const MetricField& omega0, const HermitianField* chi,
                    const ScalarField& volume_form, const FlowConfig& config);

// Single time step of the configured one-step scheme (classical RK4 or the
// stabilized linearly-implicit Euler).  Explicit stepping checks the CFL
// bound dt <= 0.2 * min-eig(omega) * spacing^2 and throws
// stability_violation when exceeded.  Positivity loss marks the returned
// state terminal instead of throwing.
FlowState step(const FlowState& state, const FlowConfig& config);

// Integrate to the horizon (or a terminal event), sampling every
// sample_stride steps plus t=0, the final time, and any `extra_sample_times`
// (hit exactly with shortened sub-steps).  For scheme semi-implicit the
// production integrator is the stabilized linearly-implicit Euler method
// kept in Fourier space; it is unconditionally stable for this splitting.
Trajectory run(const FlowState& initial, const FlowConfig& config,
               const std::vector<double>& extra_sample_times = {});

const char* terminal_reason_name(TerminalReason r);

}  // namespace krf
