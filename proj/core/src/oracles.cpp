#include "krf/oracles.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <memory>

#include "krf/interp.hpp"

namespace krf {

namespace {

constexpr double kSnapTol = 1e-9;

// Detect a Ricci-flat input: largest g-relative Ricci eigenvalue magnitude
// at the spectral round-off scale for second derivatives.
bool detect_ricci_flat(const MetricField& g, const CurvatureField& curv) {
  const int n = g.n();
  double sup = 0.0;
  for (std::size_t p = 0; p < g.nodes(); ++p) {
    const auto eb = herm_gen_eig_bounds(curv.ric_at(p), g.at(p), n);
    sup = std::max(sup, std::max(std::abs(eb[0]), std::abs(eb[1])));
  }
  const double half = g.grid().N / 2.0;
  return sup <= 1e3 * DBL_EPSILON * half * half * (g.max_eig() / g.min_eig());
}

double interp_series(const std::vector<double>& ts, const std::vector<double>& vs, double x) {
  const std::size_t i = locate_interval(ts, x);
  if (std::abs(x - ts[i]) <= kSnapTol) return vs[i];
  if (std::abs(x - ts[i + 1]) <= kSnapTol) return vs[i + 1];
  return pchip_local(ts, [&](std::size_t k) { return vs[k]; }, x);
}

std::vector<double> interp_phi(const Trajectory& base, const std::vector<double>& ts,
                               double tau) {
  const std::size_t i = locate_interval(ts, tau);
  if (std::abs(tau - ts[i]) <= kSnapTol) return base.samples[i].phi;
  if (std::abs(tau - ts[i + 1]) <= kSnapTol) return base.samples[i + 1].phi;
  const std::size_t nodes = base.samples[i].phi.size();
  std::vector<double> out(nodes);
  for (std::size_t p = 0; p < nodes; ++p)
    out[p] = pchip_local(ts, [&](std::size_t k) { return base.samples[k].phi[p]; }, tau);
  return out;
}

std::vector<double> series_of(const Trajectory& tr, double TrajectorySample::*field) {
  std::vector<double> out(tr.samples.size());
  for (std::size_t k = 0; k < tr.samples.size(); ++k) out[k] = tr.samples[k].*field;
  return out;
}

}  // namespace

CySolutionResult cy_solution(SpectralWorkspace& ws, const MetricField& omega_cy, double t) {
  if (t < 0.0) throw parameter_error("cy_solution: t must be nonnegative");
  const CurvatureField curv = curvature(ws, omega_cy);
  CySolutionResult r{omega_cy.scaled_metric(std::exp(-t)), std::exp(t) * curv.sup_rm_norm,
                     detect_ricci_flat(omega_cy, curv)};
  return r;
}

std::vector<double> product_rm_series(double rm_cy_sq, double rm_b_sq,
                                      const std::vector<double>& t_grid) {
  if (rm_cy_sq < 0.0 || rm_b_sq < 0.0)
    throw parameter_error("product_rm_series: curvature magnitudes must be nonnegative");
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    if (t <= 0.0 && rm_b_sq > 0.0)
      throw parameter_error("product_rm_series: t must be positive when rm_b_sq > 0");
    double v = rm_cy_sq * std::exp(2.0 * t);
    if (rm_b_sq > 0.0) {
      const double s = -std::expm1(-t);  // 1 - e^{-t}
      v += rm_b_sq / (s * s);
    }
    out.push_back(v);
  }
  return out;
}

Trajectory scaled_family(const Trajectory& base, double lambda0, double horizon) {
  if (!(lambda0 > 0.0)) throw parameter_error("scaled_family: lambda0 must be positive");
  if (base.samples.size() < 2) throw parameter_error("scaled_family: base has < 2 samples");
  const ScalingSchedule sched(lambda0);
  const std::vector<double> ts = base.times();
  const double cover = ts.back() + kSnapTol;

  Trajectory out;
  auto setup = std::make_shared<FlowSetup>(*base.setup);
  setup->omega0 = base.setup->omega0.scaled_metric(lambda0);
  setup->class0 = KahlerClass{lambda0 * base.setup->class0.a, lambda0 * base.setup->class0.b};
  out.setup = std::move(setup);
  out.config = base.config;
  if (horizon >= 0.0) out.config.horizon = horizon;

  const std::vector<double> sup_rm = series_of(base, &TrajectorySample::sup_rm);
  const std::vector<double> rm_floor = series_of(base, &TrajectorySample::rm_floor);
  const std::vector<double> eig_min = series_of(base, &TrajectorySample::eig_min);
  const std::vector<double> eig_max = series_of(base, &TrajectorySample::eig_max);

  for (double t : ts) {
    if (horizon >= 0.0 && t > horizon + kSnapTol) break;
    const double tau = sched.tau(t);
    if (tau > cover) {
      if (horizon >= 0.0)
        throw range_error("scaled_family: tau(t) leaves the base trajectory's coverage");
      break;
    }
    const double lam = sched.lambda(t);
    TrajectorySample s;
    s.t = t;
    s.phi = interp_phi(base, ts, tau);
    for (double& v : s.phi) v *= lam;
    s.sup_rm = interp_series(ts, sup_rm, tau) / lam;
    s.rm_floor = interp_series(ts, rm_floor, tau) / lam;
    s.eig_min = lam * interp_series(ts, eig_min, tau);
    s.eig_max = lam * interp_series(ts, eig_max, tau);
    const KahlerClass c = evolve_class(out.setup->class0, t);
    s.class_a = c.a;
    s.class_b = c.b;
    out.samples.push_back(std::move(s));
  }
  if (out.samples.size() < 2)
    throw range_error("scaled_family: base coverage too short for any rescaled range");
  return out;
}

ExplicitSolution ExplicitSolution::calabi_yau(SpectralWorkspace& ws,
                                              const MetricField& omega_cy) {
  ExplicitSolution s;
  s.kind_ = Kind::calabi_yau;
  const CurvatureField curv = curvature(ws, omega_cy);
  s.omega_cy_ = omega_cy;
  s.sup_rm0_ = curv.sup_rm_norm;
  s.ricci_flat_ = detect_ricci_flat(omega_cy, curv);
  return s;
}

ExplicitSolution ExplicitSolution::product(double rm_cy_sq, double rm_b_sq) {
  if (rm_cy_sq < 0.0 || rm_b_sq < 0.0)
    throw parameter_error("ExplicitSolution::product: magnitudes must be nonnegative");
  ExplicitSolution s;
  s.kind_ = Kind::product;
  s.rm_cy_sq_ = rm_cy_sq;
  s.rm_b_sq_ = rm_b_sq;
  return s;
}

ExplicitSolution ExplicitSolution::scaled(Trajectory base, double lambda0) {
  if (!(lambda0 > 0.0))
    throw parameter_error("ExplicitSolution::scaled: lambda0 must be positive");
  if (base.samples.size() < 2)
    throw parameter_error("ExplicitSolution::scaled: base has < 2 samples");
  ExplicitSolution s;
  s.kind_ = Kind::scaled_family;
  s.base_ = std::move(base);
  s.lambda0_ = lambda0;
  return s;
}

MetricField ExplicitSolution::metric_at(SpectralWorkspace& ws, double t) const {
  if (t < 0.0) throw parameter_error("ExplicitSolution::metric_at: t must be nonnegative");
  switch (kind_) {
    case Kind::calabi_yau:
      return omega_cy_->scaled_metric(std::exp(-t));
    case Kind::product:
      throw parameter_error(
          "ExplicitSolution::metric_at: product model has no grid metric (curvature "
          "magnitudes only)");
    case Kind::scaled_family: {
      const ScalingSchedule sched(lambda0_);
      const double tau = sched.tau(t);
      const std::vector<double> ts = base_->times();
      ScalarField phi(base_->setup->grid);
      phi.values = interp_phi(*base_, ts, tau);
      const MetricField at_tau =
          reconstruct_metric(ws, *base_->setup, tau, phi, base_->config.positivity_floor);
      return at_tau.scaled_metric(sched.lambda(t));
    }
  }
  throw parameter_error("ExplicitSolution::metric_at: unknown kind");
}

double ExplicitSolution::sup_rm_at(double t) const {
  switch (kind_) {
    case Kind::calabi_yau:
      if (t < 0.0) throw parameter_error("ExplicitSolution::sup_rm_at: t must be nonnegative");
      return std::exp(t) * sup_rm0_;
    case Kind::product: {
      const std::vector<double> one{t};
      return std::sqrt(product_rm_series(rm_cy_sq_, rm_b_sq_, one)[0]);
    }
    case Kind::scaled_family: {
      if (t < 0.0) throw parameter_error("ExplicitSolution::sup_rm_at: t must be nonnegative");
      const ScalingSchedule sched(lambda0_);
      const std::vector<double> ts = base_->times();
      const std::vector<double> sup_rm = series_of(*base_, &TrajectorySample::sup_rm);
      return interp_series(ts, sup_rm, sched.tau(t)) / sched.lambda(t);
    }
  }
  throw parameter_error("ExplicitSolution::sup_rm_at: unknown kind");
}

}  // namespace krf
