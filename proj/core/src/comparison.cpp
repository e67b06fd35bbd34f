#include "krf/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace krf {

BracketPair bracket_initial(const MetricField& omega0, const MetricField& tilde0,
                            double slack) {
  if (!(slack > 0.0 && slack < 1.0))
    throw parameter_error("bracket_initial: slack must lie in (0, 1)");
  const auto [lo, hi] = eigen_ratio(omega0, tilde0);
  BracketPair b;
  b.slack = slack;
  b.lambda_minus = (1.0 - slack) * lo;
  b.lambda_plus = (1.0 + slack) * hi;
  if (!(b.lambda_minus > 0.0))
    throw positivity_loss("bracket_initial: omega0 not positive against tilde0", 0, lo);

  // omega_* = omega0 - lambda_minus tilde0 must keep a definite margin.
  const std::size_t m = omega0.nodes();
  const int n = omega0.n();
  std::vector<cplx> diff(static_cast<std::size_t>(n) * n);
  double margin = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
  for (std::size_t p = 0; p < m; ++p) {
    for (int e = 0; e < n * n; ++e) diff[e] = omega0.at(p)[e] - b.lambda_minus * tilde0.at(p)[e];
    const auto eb = herm_gen_eig_bounds(diff.data(), tilde0.at(p), n);
    if (eb[0] < margin) {
      margin = eb[0];
      argmin = p;
    }
  }
  b.omega_star_margin = margin;
  if (!(margin >= 0.99 * slack * lo))
    throw positivity_loss("bracket_initial: omega_* margin below slack", argmin, margin);
  return b;
}

namespace {

ScalarField uniform_density(const TorusGrid& grid) { return ScalarField(grid, 1.0); }

struct NodeReduce {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
};

}  // namespace

ComparisonState evolve_comparison(const MetricField& omega0, const MetricField& tilde0,
                                  const FlowConfig& config, const ComparisonOptions& opts) {
  if (omega0.grid() != tilde0.grid())
    throw parameter_error("evolve_comparison: grid mismatch");
  ComparisonState st;
  st.bracket = bracket_initial(omega0, tilde0, opts.slack);

  const TorusGrid grid = omega0.grid();
  const ScalarField density = uniform_density(grid);
  const MetricField plus0 = tilde0.scaled_metric(st.bracket.lambda_plus);
  const MetricField minus0 = tilde0.scaled_metric(st.bracket.lambda_minus);

  st.omega = run(init_flow(omega0, nullptr, density, config), config, opts.extra_sample_times);
  st.tilde = run(init_flow(tilde0, nullptr, density, config), config, opts.extra_sample_times);
  st.plus = run(init_flow(plus0, nullptr, density, config), config, opts.extra_sample_times);
  st.minus = run(init_flow(minus0, nullptr, density, config), config, opts.extra_sample_times);

  for (const Trajectory* tr : {&st.omega, &st.tilde, &st.plus, &st.minus})
    if (tr->terminal != TerminalReason::none) {
      st.truncated = true;
      if (st.terminal == TerminalReason::none) st.terminal = tr->terminal;
    }

  const std::size_t count = std::min(std::min(st.omega.samples.size(), st.tilde.samples.size()),
                                     std::min(st.plus.samples.size(), st.minus.samples.size()));
  const std::size_t nodes = grid.node_count();
  const int n = grid.n;
  SpectralWorkspace ws(grid);
  ComparisonSeries& s = st.series;

  for (std::size_t k = 0; k < count; ++k) {
    const double t = st.omega.samples[k].t;
    if (std::abs(st.tilde.samples[k].t - t) > 1e-12 ||
        std::abs(st.plus.samples[k].t - t) > 1e-12 ||
        std::abs(st.minus.samples[k].t - t) > 1e-12)
      throw parameter_error("evolve_comparison: flows sampled at different times");

    const MetricField g = st.omega.metric_at(k, ws);
    const MetricField gt = st.tilde.metric_at(k, ws);
    const MetricField gp = st.plus.metric_at(k, ws);
    const MetricField gm = st.minus.metric_at(k, ws);
    const std::vector<double>& phi = st.omega.samples[k].phi;
    const std::vector<double>& phit = st.plus.samples[k].phi;
    const std::vector<double>& phim = st.minus.samples[k].phi;

    NodeReduce u, udot, vol;
    double psi_abs = 0.0, vmax = -std::numeric_limits<double>::infinity();
    double ident = 0.0, trwm = 0.0, trmw = 0.0;
    double chain = 0.0, chain_printed = 0.0;
    std::size_t printed_violations = 0;
    for (std::size_t p = 0; p < nodes; ++p) {
      const double up = phi[p] - phim[p];
      const double psip = phit[p] - phim[p];
      const double vp = phi[p] - phit[p];
      u.add(up);
      psi_abs = std::max(psi_abs, std::abs(psip));
      vmax = std::max(vmax, vp);
      ident = std::max(ident, std::abs(up - (vp + psip)));

      const double det_g = herm_det(g.at(p), n);
      const double det_m = herm_det(gm.at(p), n);
      const double ratio = det_g / det_m;
      vol.add(ratio);
      udot.add(std::log(ratio) - up);

      const double t_wm = herm_trace_ratio(gm.at(p), g.at(p), n);  // tr_omega omega^-
      const double t_mw = herm_trace_ratio(g.at(p), gm.at(p), n);  // tr_{omega^-} omega
      trwm = std::max(trwm, t_wm);
      trmw = std::max(trmw, t_mw);

      const double rhs_general = n * ratio * std::pow(t_wm, n - 1);
      const double rhs_printed = n * ratio * t_wm;
      chain = std::max(chain, (t_mw - rhs_general) / std::abs(rhs_general));
      const double pviol = (t_mw - rhs_printed) / std::abs(rhs_printed);
      chain_printed = std::max(chain_printed, pviol);
      if (pviol > 1e-12) ++printed_violations;
    }

    const ConnectionDeviation dev = psi_and_s(ws, g, gt);
    const auto [eig_lo, eig_hi] = eigen_ratio(g, gt);

    s.t.push_back(t);
    s.u_min.push_back(u.min);
    s.u_max.push_back(u.max);
    s.udot_min.push_back(udot.min);
    s.udot_max.push_back(udot.max);
    s.psi_max_abs.push_back(psi_abs);
    s.v_max.push_back(vmax);
    s.identity_residual.push_back(ident);
    s.tr_w_wminus_max.push_back(trwm);
    s.tr_wminus_w_max.push_back(trmw);
    s.volratio_min.push_back(vol.min);
    s.volratio_max.push_back(vol.max);
    s.s_max.push_back(dev.sup_s);
    s.eig_lo.push_back(eig_lo);
    s.eig_hi.push_back(eig_hi);
    s.chain_violation.push_back(std::max(0.0, chain));
    s.printed_chain_violation.push_back(std::max(0.0, chain_printed));
    s.printed_chain_violated_fraction.push_back(static_cast<double>(printed_violations) /
                                                static_cast<double>(nodes));
    s.sup_rm.push_back(st.omega.samples[k].sup_rm);
    s.rm_floor.push_back(st.omega.samples[k].rm_floor);
    s.sup_rm_tilde.push_back(st.tilde.samples[k].sup_rm);
    s.rm_floor_tilde.push_back(st.tilde.samples[k].rm_floor);
  }
  return st;
}

namespace {

// Relative increase of the series maximum over its final half, against the
// value at the half-way sample (0 when the series has settled).
double final_half_increase(const std::vector<double>& t, const std::vector<double>& v) {
  if (t.size() < 4) return 0.0;
  const double t_half = t.front() + 0.5 * (t.back() - t.front());
  std::size_t i_half = 0;
  while (i_half + 1 < t.size() && t[i_half] < t_half) ++i_half;
  const double base = std::abs(v[i_half]);
  double peak = 0.0;
  for (std::size_t i = i_half; i < v.size(); ++i) peak = std::max(peak, std::abs(v[i]));
  if (base < 1e-300) return peak > 1e-300 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::max(0.0, peak / base - 1.0);
}

void require_range(const ComparisonSeries& s, double min_range, const char* who) {
  if (s.t.size() < 2 || s.t.back() - s.t.front() < min_range)
    throw parameter_error(std::string(who) + ": sampled t-range too short");
}

}  // namespace

BoundReport check_potential_bounds(const ComparisonState& state, double eta, double v_tol) {
  if (!(eta > 0.0 && eta < 0.5))
    throw parameter_error("check_potential_bounds: eta must lie in (0, 1/2)");
  const ComparisonSeries& s = state.series;
  require_range(s, 5.0, "check_potential_bounds");

  BoundReport r;
  r.eta = eta;
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    const double t = s.t[k];
    r.c_u_lower = std::max(r.c_u_lower, std::max(0.0, -s.u_min[k]) * std::exp(t));
    r.c_u_upper_decay = std::max(r.c_u_upper_decay, std::max(0.0, s.u_max[k]) * std::exp(eta * t));
    r.c_u_plain = std::max(r.c_u_plain, std::max(std::abs(s.u_min[k]), std::abs(s.u_max[k])));
    r.c_udot = std::max(r.c_udot, std::max(std::abs(s.udot_min[k]), std::abs(s.udot_max[k])));
    r.c_psi = std::max(r.c_psi, s.psi_max_abs[k]);
    r.v_max = std::max(k == 0 ? -std::numeric_limits<double>::infinity() : r.v_max, s.v_max[k]);
  }
  r.v_nonpositive = r.v_max <= v_tol;

  std::vector<double> udot_abs(s.t.size());
  for (std::size_t k = 0; k < s.t.size(); ++k)
    udot_abs[k] = std::max(std::abs(s.udot_min[k]), std::abs(s.udot_max[k]));
  r.udot_final_half_increase = final_half_increase(s.t, udot_abs);
  return r;
}

BoundReport check_trace_volume_bounds(const ComparisonState& state) {
  const ComparisonSeries& s = state.series;
  if (s.t.empty()) throw parameter_error("check_trace_volume_bounds: empty state");
  const int n = state.omega.setup->grid.n;

  BoundReport r;
  r.volratio_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    r.c_trace = std::max(r.c_trace, s.tr_w_wminus_max[k]);
    r.c_trace_rev = std::max(r.c_trace_rev, s.tr_wminus_w_max[k]);
    r.volratio_min = std::min(r.volratio_min, s.volratio_min[k]);
    r.volratio_max = std::max(r.volratio_max, s.volratio_max[k]);
    r.chain_violation_max = std::max(r.chain_violation_max, s.chain_violation[k]);
    r.printed_chain_violation_max =
        std::max(r.printed_chain_violation_max, s.printed_chain_violation[k]);
    r.printed_chain_violated_fraction_max =
        std::max(r.printed_chain_violated_fraction_max, s.printed_chain_violated_fraction[k]);
  }
  r.c_volume = std::max(r.volratio_max, 1.0 / r.volratio_min);
  r.amgm_margin = r.volratio_min - std::pow(n / r.c_trace, n);
  return r;
}

EquivalenceReport equivalence_constant(const ComparisonState& state) {
  const ComparisonSeries& s = state.series;
  EquivalenceReport r;
  r.t = s.t;
  r.c.resize(s.t.size());
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    double c = s.eig_hi[k];
    if (s.eig_lo[k] > 0.0) c = std::max(c, 1.0 / s.eig_lo[k]);
    r.c[k] = c;
    r.sup = std::max(r.sup, c);
  }
  r.final_half_increase = final_half_increase(r.t, r.c);
  r.plateau_ok = r.final_half_increase <= 0.05;
  return r;
}

const char* probe_quantity_name(ProbeQuantity q) {
  switch (q) {
    case ProbeQuantity::udot_minus_au: return "udot_minus_au";
    case ProbeQuantity::udot_plus_au: return "udot_plus_au";
    case ProbeQuantity::log_trace_minus_au: return "log_trace_minus_au";
    case ProbeQuantity::s_plus_a_trace: return "s_plus_a_trace";
  }
  return "unknown";
}

namespace {

// Q field plus the companion scalar entering the declared inequality.
struct ProbeFields {
  ScalarField q;
  ScalarField companion;  // S, tr_omega omega^-, or du/dt depending on probe
};

ProbeFields probe_fields(const ComparisonState& st, std::size_t k, ProbeQuantity quantity,
                         double a, SpectralWorkspace& ws) {
  const TorusGrid grid = st.omega.setup->grid;
  const std::size_t nodes = grid.node_count();
  const int n = grid.n;
  ProbeFields out{ScalarField(grid), ScalarField(grid)};

  const MetricField g = st.omega.metric_at(k, ws);
  const MetricField gm = st.minus.metric_at(k, ws);
  const std::vector<double>& phi = st.omega.samples[k].phi;
  const std::vector<double>& phim = st.minus.samples[k].phi;

  switch (quantity) {
    case ProbeQuantity::udot_minus_au:
    case ProbeQuantity::udot_plus_au: {
      const double sign = (quantity == ProbeQuantity::udot_minus_au) ? -1.0 : 1.0;
      for (std::size_t p = 0; p < nodes; ++p) {
        const double up = phi[p] - phim[p];
        const double ud = std::log(herm_det(g.at(p), n) / herm_det(gm.at(p), n)) - up;
        out.q[p] = ud + sign * a * up;
        out.companion[p] = ud;
      }
      break;
    }
    case ProbeQuantity::log_trace_minus_au: {
      for (std::size_t p = 0; p < nodes; ++p) {
        const double tr = herm_trace_ratio(gm.at(p), g.at(p), n);
        out.q[p] = std::log(tr) - a * (phi[p] - phim[p]);
        out.companion[p] = tr;
      }
      break;
    }
    case ProbeQuantity::s_plus_a_trace: {
      const MetricField gt = st.tilde.metric_at(k, ws);
      const ConnectionDeviation dev = psi_and_s(ws, g, gt);
      for (std::size_t p = 0; p < nodes; ++p) {
        out.q[p] = dev.s_field[p] + a * herm_trace_ratio(gt.at(p), g.at(p), n);
        out.companion[p] = dev.s_field[p];
      }
      break;
    }
  }
  return out;
}

}  // namespace

ProbeReport mp_probe(const ComparisonState& state, ProbeQuantity quantity, double a,
                     int probe_stride) {
  const ComparisonSeries& s = state.series;
  if (s.t.size() < 3) throw parameter_error("mp_probe: need at least three samples");
  if (probe_stride < 1) throw parameter_error("mp_probe: probe_stride must be >= 1");
  for (std::size_t k = 0; k + 2 < s.t.size(); ++k)
    if (s.t[k + 2] - s.t[k] > 0.5)
      throw parameter_error("mp_probe: sampling too sparse for time differencing");

  const bool min_type = (quantity == ProbeQuantity::udot_plus_au);
  const TorusGrid grid = state.omega.setup->grid;
  const std::size_t nodes = grid.node_count();
  const int n = grid.n;
  SpectralWorkspace ws(grid);

  ProbeReport rep;
  rep.quantity = quantity;
  rep.a = a;

  // Sliding window of probe fields at consecutive samples.
  std::deque<std::pair<std::size_t, ProbeFields>> window;
  const auto fields_at = [&](std::size_t k) -> const ProbeFields& {
    for (auto& kv : window)
      if (kv.first == k) return kv.second;
    window.emplace_back(k, probe_fields(state, k, quantity, a, ws));
    while (window.size() > 3) window.pop_front();
    return window.back().second;
  };

  double q_scale = 0.0;
  for (std::size_t k = 1; k + 1 < s.t.size(); k += probe_stride) {
    const ProbeFields& prev = fields_at(k - 1);
    const ProbeFields& cur = fields_at(k);
    const ProbeFields& next = fields_at(k + 1);

    std::size_t star = 0;
    double q_ext = cur.q[0];
    double lo = cur.q[0], hi = cur.q[0];
    for (std::size_t p = 1; p < nodes; ++p) {
      const double v = cur.q[p];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      if ((min_type && v < q_ext) || (!min_type && v > q_ext)) {
        q_ext = v;
        star = p;
      }
    }
    q_scale = std::max(q_scale, std::max(std::abs(lo), std::abs(hi)));
    const bool flat_q = (hi - lo) <= 1e-12 * std::max(1.0, q_scale);

    ProbePoint pt;
    pt.t = s.t[k];
    pt.q_extreme = q_ext;
    pt.dq_dt = (next.q[star] - prev.q[star]) / (s.t[k + 1] - s.t[k - 1]);

    if (flat_q) {
      pt.lap_q = 0.0;
      rep.spatially_constant = true;
    } else {
      const HermitianField hq = ws.complex_hessian(cur.q);
      const MetricField g = state.omega.metric_at(k, ws);
      std::array<cplx, 4> ginv;
      herm_inverse(g.at(star), n, ginv.data());
      cplx lap(0.0, 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) lap += ginv[j * n + i] * hq.at(star)[i * n + j];
      pt.lap_q = lap.real();
    }
    pt.lhs = pt.dq_dt - pt.lap_q;
    pt.companion = cur.companion[star];
    rep.points.push_back(pt);
  }

  // Laplacian sign sanity at the tracked extremum (flip the sign for the
  // min-type probe so <= 0 is always the expected side).
  for (auto& pt : rep.points) {
    const double signed_lap = min_type ? -pt.lap_q : pt.lap_q;
    rep.max_lap_excess = std::max(rep.max_lap_excess, signed_lap / std::max(q_scale, 1e-300));
    rep.max_lap_ratio =
        std::max(rep.max_lap_ratio, std::abs(pt.lap_q) / std::max(q_scale, 1e-300));
  }

  // Fit the declared constant.
  double c = 0.0;
  for (auto& pt : rep.points) {
    switch (quantity) {
      case ProbeQuantity::s_plus_a_trace:
        c = std::max(c, pt.lhs + pt.companion);
        break;
      case ProbeQuantity::log_trace_minus_au:
        c = std::max(c, pt.lhs + pt.companion);
        break;
      case ProbeQuantity::udot_minus_au: {
        const double denom = 1.0 - pt.companion;
        if (denom < 0.1) {
          pt.usable = false;
          ++rep.unusable_points;
        } else {
          c = std::max(c, pt.lhs / denom);
        }
        break;
      }
      case ProbeQuantity::udot_plus_au: {
        const double denom = 1.0 - pt.companion;
        if (denom < 0.1) {
          pt.usable = false;
          ++rep.unusable_points;
        } else {
          c = std::max(c, -pt.lhs / denom);
        }
        break;
      }
    }
  }
  rep.fitted_c = std::max(0.0, c);
  return rep;
}

const char* singularity_type_name(SingularityType s) {
  switch (s) {
    case SingularityType::type_iii: return "TypeIII";
    case SingularityType::type_iib: return "TypeIIb";
    case SingularityType::inconclusive: return "Inconclusive";
  }
  return "unknown";
}

SingularityReport classify_singularity(const std::vector<double>& t,
                                       const std::vector<double>& values,
                                       double window_fraction, double eps_iii,
                                       const ClassifyOptions& opts) {
  if (t.size() != values.size()) throw parameter_error("classify_singularity: size mismatch");
  if (t.size() < 16) throw parameter_error("classify_singularity: need >= 16 samples");
  if (t.back() - t.front() < 5.0)
    throw parameter_error("classify_singularity: t-range must be >= 5");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw parameter_error("classify_singularity: window_fraction must lie in (0, 1]");
  if (!opts.floors.empty() && opts.floors.size() != values.size())
    throw parameter_error("classify_singularity: floors size mismatch");

  SingularityReport rep;
  rep.window_t_end = t.back();
  rep.window_t_start = t.back() - window_fraction * (t.back() - t.front());

  for (double v : values) rep.sup_value = std::max(rep.sup_value, v);
  rep.bounded = rep.sup_value <= opts.ceiling;

  // Collect resolved (above-floor) samples in the tail window.
  std::vector<double> xs, ys;
  std::size_t window_count = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < rep.window_t_start) continue;
    ++window_count;
    const double floor = opts.floors.empty() ? 0.0 : opts.floors[k];
    if (values[k] > floor && values[k] > 0.0) {
      xs.push_back(t[k]);
      ys.push_back(std::log(values[k]));
    }
  }
  rep.censored_fraction =
      window_count == 0 ? 1.0 : 1.0 - static_cast<double>(xs.size()) / window_count;

  const std::size_t min_resolved = std::max<std::size_t>(4, window_count / 4);
  if (xs.size() < min_resolved) {
    // Measurement resolved the series down to (numerical) zero across the
    // window: bounded with no fitted growth.
    rep.growth_exponent = 0.0;
  } else {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double denom = m * sxx - sx * sx;
    rep.growth_exponent = denom > 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
  }

  if (std::abs(rep.growth_exponent) <= eps_iii && rep.bounded)
    rep.classification = SingularityType::type_iii;
  else if (rep.growth_exponent >= opts.eps_iib)
    rep.classification = SingularityType::type_iib;
  else
    rep.classification = SingularityType::inconclusive;
  return rep;
}

}  // namespace krf
