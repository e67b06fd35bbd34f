#pragma once

#include <optional>
#include <vector>

#include "krf/flow.hpp"
#include "krf/geometry.hpp"
#include "krf/grid.hpp"
#include "krf/scaling.hpp"
#include "krf/spectral.hpp"

namespace krf {

// Closed-form model solutions used as ground truth for the integrator, the
// comparison engine, and the singularity classifier.
//
//  * Calabi-Yau model: starting from a Ricci-flat metric the normalized flow
//    is the pure rescaling omega(t) = e^{-t} omega_cy, with curvature
//    magnitude sup|Rm|(t) = e^t sup|Rm(omega_cy)| (identically zero on the
//    flat torus).
//  * Product model: over a product of a Calabi-Yau fiber and a negatively
//    curved base the two factors scale independently and
//      |Rm|^2(t) = e^{2t} rm_cy_sq + rm_b_sq / (1 - e^{-t})^2.
//    Only the curvature magnitudes are representable on a flat grid, so the
//    product model is handled at the level of this scalar series, which is
//    exactly what the classifier consumes.
//  * Scaled family: the rescaling omega(t) = lambda(t) omegatilde(tau(t)) of
//    a stored base trajectory, evaluated by shape-preserving interpolation
//    in tau.

struct CySolutionResult {
  MetricField metric;       // e^{-t} omega_cy
  double sup_rm = 0.0;      // e^t * sup|Rm(omega_cy)|
  bool ricci_flat = false;  // g-relative Ricci eigenvalues at round-off level
};

// Evaluate the Calabi-Yau model solution at time t >= 0.  The curvature law
// holds as a flow statement only when omega_cy is Ricci-flat; for other
// inputs the returned metric/curvature pair still scales correctly but does
// not solve the flow, and `ricci_flat` reports which case applies.
CySolutionResult cy_solution(SpectralWorkspace& ws, const MetricField& omega_cy, double t);

// |Rm|^2 series of the product model on t_grid.  Requires t > 0 whenever
// rm_b_sq > 0 (the base factor degenerates as t -> 0+).
std::vector<double> product_rm_series(double rm_cy_sq, double rm_b_sq,
                                      const std::vector<double>& t_grid);

// The rescaled trajectory lambda(t) * base(tau(t)) as a synthetic Trajectory
// over the base's sample grid: potentials are lambda(t) * phi(tau(t)), so
// reconstructed metrics satisfy the rescaling identity exactly up to
// interpolation error, and sup|Rm| picks up the factor 1/lambda(t).
// horizon < 0 truncates automatically to the base's tau-coverage; an
// explicit horizon whose tau leaves the covered range is a range error.
Trajectory scaled_family(const Trajectory& base, double lambda0, double horizon = -1.0);

// Tagged union over the three model solutions with uniform evaluators.
class ExplicitSolution {
 public:
  enum class Kind { calabi_yau, product, scaled_family };

  static ExplicitSolution calabi_yau(SpectralWorkspace& ws, const MetricField& omega_cy);
  static ExplicitSolution product(double rm_cy_sq, double rm_b_sq);
  static ExplicitSolution scaled(Trajectory base, double lambda0);

  Kind kind() const { return kind_; }

  // The product model lives at curvature-magnitude level only.
  bool grid_representable() const { return kind_ != Kind::product; }

  // Meaningful for the Calabi-Yau kind (true whenever the input metric was
  // detected Ricci-flat); false otherwise.
  bool ricci_flat() const { return ricci_flat_; }

  // omega(t); parameter error for the product kind, range error when a
  // scaled family's tau(t) leaves the base coverage.
  MetricField metric_at(SpectralWorkspace& ws, double t) const;

  // sup|Rm(omega(t))| measured in omega(t).
  double sup_rm_at(double t) const;

 private:
  ExplicitSolution() = default;

  Kind kind_ = Kind::product;
  // calabi_yau
  std::optional<MetricField> omega_cy_;
  double sup_rm0_ = 0.0;
  bool ricci_flat_ = false;
  // product
  double rm_cy_sq_ = 0.0;
  double rm_b_sq_ = 0.0;
  // scaled_family
  std::optional<Trajectory> base_;
  double lambda0_ = 1.0;
};

}  // namespace krf
