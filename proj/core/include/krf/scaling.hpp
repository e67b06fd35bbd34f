#pragma once

#include <vector>

#include "krf/cohomology.hpp"
#include "krf/flow.hpp"
#include "krf/grid.hpp"

namespace krf {

// Space-time rescaling connecting a flow started at lambda0 * omegatilde_0 to
// the flow started at omegatilde_0:
//   omega(t) = lambda(t) * omegatilde(tau(t)),
//   lambda(t) = e^{-t}(lambda0 - 1) + 1,
//   tau(t)    = t + log(lambda(t) / lambda0),
// satisfying lambda e^{-tau} = lambda0 e^{-t} and lambda (1 - e^{-tau}) =
// 1 - e^{-t}.  tau is strictly increasing with dtau/dt = 1 / lambda(t).
struct ScalingSchedule {
  double lambda0 = 1.0;

  explicit ScalingSchedule(double l0) : lambda0(l0) {
    if (!(l0 > 0.0)) throw parameter_error("ScalingSchedule: lambda0 must be positive");
  }
  double lambda(double t) const;
  double tau(double t) const;
};

double lambda_of_t(double lambda0, double t);
double tau_of_t(double lambda0, double t);

// Max over t_grid of the coefficient-wise residual between
// evolve_class(lambda0 * c0tilde, t) and lambda(t) * evolve_class(c0tilde, tau(t)).
double verify_class_identity(double lambda0, const KahlerClass& c0tilde,
                             const std::vector<double>& t_grid);

// Spatially constant potential of the rescaled flat flow: u solves
//   du/dt = n log(lambda(t)) - u,  u(0) = 0,
// so u(0) = 0 and udot(0) = n log(lambda0).
struct ScaledPotential {
  std::vector<double> ts;
  std::vector<double> u;
  std::vector<double> udot;
};

// Classical RK4 with fixed dt; a step whose embedded (step-doubling) local
// error estimate exceeds 1e-10 is recursively halved.
ScaledPotential scaled_potential_ode(double lambda0, int n, double horizon, double dt = 1e-3);

// Bracket monotonicity and empirical equivalence along a sampled
// omegatilde-trajectory:
//   e^{(C0+1)t} omegatilde(t)  nondecreasing,
//   e^{(1-C0)t} omegatilde(t)  nonincreasing (positive-definite order),
// and C = max over samples of the two-sided constant with
// C^{-1} omegatilde(t) <= omegatilde(tau(t)) <= C omegatilde(t).
// Metric values between samples come from shape-preserving cubic
// interpolation per entry; tau(t) falling outside the sampled range is a
// range error.
struct BracketCheckReport {
  bool monotone_up_ok = false;
  bool monotone_down_ok = false;
  double max_up_defect = 0.0;    // worst relative violation of nondecreasing
  double max_down_defect = 0.0;  // worst relative violation of nonincreasing
  double equivalence_c = 1.0;
};

BracketCheckReport bracket_check(const Trajectory& tilde, double lambda0, double c0,
                                 double tol = 1e-8);

// Rescaled-reference potential extracted from a trajectory pair: per node,
//   du/dt = log(det g(t) / det gtilde(tau(t))) - u,  u(0) = 0,
// solved exactly by the integrating factor u(t) = e^{-t} int_0^t e^s F ds
// (cumulative quadratic quadrature over the sample grid).  On flat scaled
// runs the forcing is n log(lambda(t)) and u matches scaled_potential_ode.
struct ExtractedPotential {
  std::vector<double> ts;
  std::vector<std::vector<double>> u;     // per sample, per node
  std::vector<std::vector<double>> udot;  // forcing - u
  double u_spatial_spread = 0.0;          // max over samples of (max - min) of u
};

ExtractedPotential extract_potential(const Trajectory& omega, const Trajectory& tilde,
                                     double lambda0);

// Max over omega-samples and nodes/entries of
// | g(t_k) - lambda(t_k) * gtilde(tau(t_k)) |, the metric identity behind the
// rescaling (exact on flat scaled runs up to solver tolerance).
double metric_identity_residual(const Trajectory& omega, const Trajectory& tilde,
                                double lambda0);

}  // namespace krf
