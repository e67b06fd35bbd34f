#include "krf/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <list>

#include "krf/interp.hpp"

namespace krf {

double ScalingSchedule::lambda(double t) const {
  if (t < 0.0) throw parameter_error("ScalingSchedule: t must be nonnegative");
  // Convex-combination form of e^{-t}(lambda0 - 1) + 1: evaluates to exactly
  // lambda0 at t = 0, so tau(0) = log(1) = 0 instead of a round-off negative
  // that downstream class evolution would reject.
  const double e = std::exp(-t);
  return lambda0 * e + (1.0 - e);
}

double ScalingSchedule::tau(double t) const {
  return t + std::log(lambda(t) / lambda0);
}

double lambda_of_t(double lambda0, double t) { return ScalingSchedule(lambda0).lambda(t); }
double tau_of_t(double lambda0, double t) { return ScalingSchedule(lambda0).tau(t); }

double verify_class_identity(double lambda0, const KahlerClass& c0tilde,
                             const std::vector<double>& t_grid) {
  if (!is_kahler(c0tilde, ConeModel::nef_canonical_model()))
    throw parameter_error("verify_class_identity: c0tilde not Kahler");
  const ScalingSchedule sched(lambda0);
  double res = 0.0;
  for (double t : t_grid) {
    const KahlerClass lhs = evolve_class({lambda0 * c0tilde.a, lambda0 * c0tilde.b}, t);
    const double l = sched.lambda(t);
    const KahlerClass r0 = evolve_class(c0tilde, sched.tau(t));
    res = std::max(res, std::abs(lhs.a - l * r0.a));
    res = std::max(res, std::abs(lhs.b - l * r0.b));
  }
  return res;
}

namespace {

double ode_rhs(const ScalingSchedule& sched, int n, double t, double u) {
  return n * std::log(sched.lambda(t)) - u;
}

double rk4_step(const ScalingSchedule& sched, int n, double t, double u, double dt) {
  const double k1 = ode_rhs(sched, n, t, u);
  const double k2 = ode_rhs(sched, n, t + 0.5 * dt, u + 0.5 * dt * k1);
  const double k3 = ode_rhs(sched, n, t + 0.5 * dt, u + 0.5 * dt * k2);
  const double k4 = ode_rhs(sched, n, t + dt, u + dt * k3);
  return u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Step with step-doubling error control: recursively halve while the
// |full - two halves| / 15 estimate exceeds 1e-10.
double controlled_step(const ScalingSchedule& sched, int n, double t, double u, double dt,
                       int depth = 0) {
  const double full = rk4_step(sched, n, t, u, dt);
  const double half = rk4_step(sched, n, t + 0.5 * dt,
                               rk4_step(sched, n, t, u, 0.5 * dt), 0.5 * dt);
  if (std::abs(full - half) / 15.0 <= 1e-10 || depth >= 25) return half;
  const double mid = controlled_step(sched, n, t, u, 0.5 * dt, depth + 1);
  return controlled_step(sched, n, t + 0.5 * dt, mid, 0.5 * dt, depth + 1);
}

}  // namespace

ScaledPotential scaled_potential_ode(double lambda0, int n, double horizon, double dt) {
  if (!(dt > 0.0)) throw parameter_error("scaled_potential_ode: dt must be positive");
  if (!(horizon > 0.0)) throw parameter_error("scaled_potential_ode: horizon must be positive");
  if (n < 1) throw parameter_error("scaled_potential_ode: n must be >= 1");
  const ScalingSchedule sched(lambda0);
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-12));
  ScaledPotential out;
  out.ts.reserve(steps + 1);
  out.u.reserve(steps + 1);
  out.udot.reserve(steps + 1);
  double u = 0.0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = std::min(k * dt, horizon);
    out.ts.push_back(t);
    out.u.push_back(u);
    out.udot.push_back(ode_rhs(sched, n, t, u));
    if (k < steps) u = controlled_step(sched, n, t, u, std::min(dt, horizon - t));
  }
  return out;
}

namespace {

// Metric of trajectory sample j, cached; access pattern is monotone in j so a
// small sliding window suffices.  Entries live in a list with LRU eviction:
// a hit is spliced to the back, so the handful of references alive during one
// interpolation stencil can never be evicted (and a list never relocates
// surviving elements).
class MetricCache {
 public:
  MetricCache(const Trajectory& traj, SpectralWorkspace& ws) : traj_(traj), ws_(ws) {}

  const MetricField& get(std::size_t j) {
    for (auto it = window_.begin(); it != window_.end(); ++it)
      if (it->first == j) {
        window_.splice(window_.end(), window_, it);
        return window_.back().second;
      }
    window_.emplace_back(j, traj_.metric_at(j, ws_));
    if (window_.size() > 6) window_.pop_front();
    return window_.back().second;
  }

 private:
  const Trajectory& traj_;
  SpectralWorkspace& ws_;
  std::list<std::pair<std::size_t, MetricField>> window_;
};

// Index with |ts[j] - x| below snapping tolerance, or npos.
std::size_t snap_index(const std::vector<double>& ts, double x) {
  const auto it = std::lower_bound(ts.begin(), ts.end(), x - 1e-9);
  if (it != ts.end() && std::abs(*it - x) <= 1e-9)
    return static_cast<std::size_t>(std::distance(ts.begin(), it));
  return static_cast<std::size_t>(-1);
}

// Entry values of gtilde at time x: snapped to a stored sample when possible,
// otherwise monotone-cubic interpolated per entry from neighbouring samples.
std::vector<cplx> interp_metric_entries(const std::vector<double>& ts, MetricCache& cache,
                                        int n, std::size_t node_count, double x) {
  const std::size_t entries = static_cast<std::size_t>(n) * n;
  std::vector<cplx> out(node_count * entries);
  const std::size_t snapped = snap_index(ts, x);
  if (snapped != static_cast<std::size_t>(-1)) {
    const MetricField& g = cache.get(snapped);
    std::copy(g.raw().begin(), g.raw().end(), out.begin());
    return out;
  }
  const std::size_t i = locate_interval(ts, x);
  const std::size_t lo = (i == 0) ? 0 : i - 1;
  const std::size_t hi = std::min(ts.size() - 1, i + 2);
  std::vector<const MetricField*> g(hi - lo + 1);
  for (std::size_t j = lo; j <= hi; ++j) g[j - lo] = &cache.get(j);
  std::vector<double> sub_ts(ts.begin() + lo, ts.begin() + hi + 1);
  for (std::size_t p = 0; p < node_count; ++p)
    for (std::size_t e = 0; e < entries; ++e) {
      const auto re = [&](std::size_t j) { return g[j]->raw()[p * entries + e].real(); };
      const auto im = [&](std::size_t j) { return g[j]->raw()[p * entries + e].imag(); };
      out[p * entries + e] = cplx(pchip_local(sub_ts, re, x), pchip_local(sub_ts, im, x));
    }
  return out;
}

// Integral over [a, b] of the quadratic through three neighbouring samples
// (k-1,k,k+1 when available, else k,k+1,k+2).
double quad_increment(const double* y0, const double* y1,
                      const double* y2, double a, double b, double x0, double x1, double x2,
                      std::size_t node) {
  const double ya = y0[node], yb = y1[node], yc = y2[node];
  // Lagrange basis integrals on [a, b].
  auto basis_integral = [a, b](double xi, double xj, double xk) {
    // integral of (x - xj)(x - xk) / ((xi - xj)(xi - xk))
    const double denom = (xi - xj) * (xi - xk);
    const double ib = ((b * b * b - a * a * a) / 3.0 - (xj + xk) * (b * b - a * a) / 2.0 +
                       xj * xk * (b - a));
    return ib / denom;
  };
  return ya * basis_integral(x0, x1, x2) + yb * basis_integral(x1, x0, x2) +
         yc * basis_integral(x2, x0, x1);
}

}  // namespace

BracketCheckReport bracket_check(const Trajectory& tilde, double lambda0, double c0,
                                 double tol) {
  if (tilde.samples.size() < 2) throw parameter_error("bracket_check: need >= 2 samples");
  if (c0 < 0.0) throw parameter_error("bracket_check: C0 must be nonnegative");
  const ScalingSchedule sched(lambda0);
  SpectralWorkspace ws(tilde.setup->grid);
  MetricCache cache(tilde, ws);
  const std::vector<double> ts = tilde.times();
  const int n = tilde.setup->grid.n;
  const std::size_t nodes = tilde.setup->grid.node_count();
  const std::size_t entries = static_cast<std::size_t>(n) * n;

  BracketCheckReport rep;

  // Monotonicity of e^{(C0+1)t} g (up) and e^{(1-C0)t} g (down) between
  // consecutive samples, as relative generalized-eigenvalue defects.
  std::vector<cplx> diff(entries);
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    const MetricField gk = tilde.metric_at(k, ws);
    const MetricField gk1 = tilde.metric_at(k + 1, ws);
    const double wu0 = std::exp((c0 + 1.0) * (ts[k] - ts[k + 1]));  // relative weight
    const double wd0 = std::exp((1.0 - c0) * (ts[k] - ts[k + 1]));
    for (std::size_t p = 0; p < nodes; ++p) {
      // up: e^{(C0+1)t_{k+1}} g_{k+1} - e^{(C0+1)t_k} g_k >= 0, scaled by
      // e^{-(C0+1)t_{k+1}} to keep numbers O(1):
      for (std::size_t e = 0; e < entries; ++e)
        diff[e] = gk1.at(p)[e] - wu0 * gk.at(p)[e];
      const auto up = herm_gen_eig_bounds(diff.data(), gk1.at(p), n);
      rep.max_up_defect = std::max(rep.max_up_defect, -up[0]);
      for (std::size_t e = 0; e < entries; ++e)
        diff[e] = gk1.at(p)[e] - wd0 * gk.at(p)[e];
      const auto down = herm_gen_eig_bounds(diff.data(), gk1.at(p), n);
      rep.max_down_defect = std::max(rep.max_down_defect, down[1]);
    }
  }
  rep.monotone_up_ok = rep.max_up_defect <= tol;
  rep.monotone_down_ok = rep.max_down_defect <= tol;

  // Empirical two-sided constant between omegatilde(tau(t)) and omegatilde(t).
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double tau = sched.tau(ts[k]);
    const std::vector<cplx> gt = interp_metric_entries(ts, cache, n, nodes, tau);
    const MetricField& gk = cache.get(k);
    for (std::size_t p = 0; p < nodes; ++p) {
      const auto eb = herm_gen_eig_bounds(gt.data() + p * entries, gk.at(p), n);
      rep.equivalence_c = std::max(rep.equivalence_c, eb[1]);
      if (eb[0] > 0.0) rep.equivalence_c = std::max(rep.equivalence_c, 1.0 / eb[0]);
    }
  }
  return rep;
}

ExtractedPotential extract_potential(const Trajectory& omega, const Trajectory& tilde,
                                     double lambda0) {
  if (omega.samples.empty() || tilde.samples.empty())
    throw parameter_error("extract_potential: empty trajectory");
  if (omega.setup->grid != tilde.setup->grid)
    throw parameter_error("extract_potential: grid mismatch");
  const ScalingSchedule sched(lambda0);
  const TorusGrid grid = omega.setup->grid;
  const std::size_t nodes = grid.node_count();
  const int n = grid.n;
  const std::size_t entries = static_cast<std::size_t>(n) * n;
  SpectralWorkspace ws(grid);
  MetricCache cache_o(omega, ws);
  MetricCache cache_t(tilde, ws);
  const std::vector<double> ts = omega.times();
  const std::vector<double> ts_tilde = tilde.times();

  ExtractedPotential out;
  out.ts = ts;
  out.u.resize(ts.size());
  out.udot.resize(ts.size());

  // Forcing F_k[node] = log det g(t_k) - log det gtilde(tau(t_k)); integrand
  // e^s F(s) accumulated by the quadratic rule for the integrating factor.
  std::vector<std::vector<double>> integrand(ts.size(), std::vector<double>(nodes));
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double tau = sched.tau(ts[k]);
    const MetricField& g = cache_o.get(k);
    const std::vector<cplx> gt = interp_metric_entries(ts_tilde, cache_t, n, nodes, tau);
    const double w = std::exp(ts[k]);
    out.udot[k].resize(nodes);
    for (std::size_t p = 0; p < nodes; ++p) {
      const double f =
          std::log(herm_det(g.at(p), n) / herm_det(gt.data() + p * entries, n));
      integrand[k][p] = w * f;
      out.udot[k][p] = f;  // u subtracted below
    }
  }

  std::vector<double> acc(nodes, 0.0);
  double spread = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (k > 0) {
      const std::size_t i0 = (k >= 2) ? k - 2 : 0;
      const std::size_t i1 = i0 + 1, i2 = i0 + 2;
      if (i2 >= ts.size()) {
        // two-sample trajectory: trapezoid
        for (std::size_t p = 0; p < nodes; ++p)
          acc[p] += 0.5 * (ts[k] - ts[k - 1]) * (integrand[k - 1][p] + integrand[k][p]);
      } else {
        for (std::size_t p = 0; p < nodes; ++p)
          acc[p] += quad_increment(integrand[i0].data(), integrand[i1].data(),
                                   integrand[i2].data(), ts[k - 1], ts[k], ts[i0], ts[i1],
                                   ts[i2], p);
      }
    }
    const double decay = std::exp(-ts[k]);
    out.u[k].resize(nodes);
    double lo = 0.0, hi = 0.0;
    for (std::size_t p = 0; p < nodes; ++p) {
      const double u = decay * acc[p];
      out.u[k][p] = u;
      out.udot[k][p] -= u;
      if (p == 0 || u < lo) lo = u;
      if (p == 0 || u > hi) hi = u;
    }
    spread = std::max(spread, hi - lo);
  }
  out.u_spatial_spread = spread;
  return out;
}

double metric_identity_residual(const Trajectory& omega, const Trajectory& tilde,
                                double lambda0) {
  if (omega.samples.empty() || tilde.samples.empty())
    throw parameter_error("metric_identity_residual: empty trajectory");
  if (omega.setup->grid != tilde.setup->grid)
    throw parameter_error("metric_identity_residual: grid mismatch");
  const ScalingSchedule sched(lambda0);
  const TorusGrid grid = omega.setup->grid;
  const std::size_t nodes = grid.node_count();
  const int n = grid.n;
  const std::size_t entries = static_cast<std::size_t>(n) * n;
  SpectralWorkspace ws(grid);
  MetricCache cache_o(omega, ws);
  MetricCache cache_t(tilde, ws);
  const std::vector<double> ts = omega.times();
  const std::vector<double> ts_tilde = tilde.times();

  double res = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double l = sched.lambda(ts[k]);
    const double tau = sched.tau(ts[k]);
    const MetricField& g = cache_o.get(k);
    const std::vector<cplx> gt = interp_metric_entries(ts_tilde, cache_t, n, nodes, tau);
    for (std::size_t p = 0; p < nodes; ++p)
      for (std::size_t e = 0; e < entries; ++e)
        res = std::max(res, std::abs(g.at(p)[e] - l * gt[p * entries + e]));
  }
  return res;
}

}  // namespace krf
