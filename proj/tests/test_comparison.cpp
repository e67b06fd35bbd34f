#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "krf/comparison.hpp"

using namespace krf;

namespace {

FlowConfig comparison_config(double dt, double horizon, int stride = 10) {
  FlowConfig c;
  c.dt = dt;
  c.horizon = horizon;
  c.scheme = Scheme::semi_implicit;
  c.sample_stride = stride;
  return c;
}

// Diagonal metric with entry 2.5 + 1.5 cos(x): generalized eigenvalues
// against flat range over [1, 4] exactly on an even grid.
MetricField ramp_metric(const TorusGrid& grid) {
  std::vector<cplx> data(grid.node_count());
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    data[p] = cplx(2.5 + 1.5 * std::cos(grid.coord(p, 0)), 0.0);
  return MetricField(grid, 1, std::move(data));
}

MetricField cosine_metric(SpectralWorkspace& ws, const TorusGrid& grid, double eps) {
  ScalarField phi(grid);
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    phi[p] = eps * std::cos(grid.coord(p, 0));
  return metric_from_potential(ws, MetricField::flat(grid), phi);
}

std::vector<double> linspace(double a, double b, std::size_t m) {
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i)
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(m - 1);
  return out;
}

std::vector<double> map_series(const std::vector<double>& t, double (*f)(double)) {
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = f(t[i]);
  return out;
}

}  // namespace

TEST_CASE("initial brackets come from extreme generalized eigenvalues") {
  TorusGrid grid(1, 16);

  SUBCASE("identical metrics bracket themselves with the slack margin") {
    MetricField flat = MetricField::flat(grid);
    BracketPair b = bracket_initial(flat, flat, 0.1);
    CHECK(b.lambda_minus == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(b.lambda_plus == doctest::Approx(1.1).epsilon(1e-15));
    CHECK(b.slack == 0.1);
    CHECK(b.omega_star_margin == doctest::Approx(0.1).epsilon(1e-12));
  }

  SUBCASE("a spatially varying ratio widens the bracket") {
    BracketPair b = bracket_initial(ramp_metric(grid), MetricField::flat(grid), 0.1);
    CHECK(b.lambda_minus == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(b.lambda_plus == doctest::Approx(4.4).epsilon(1e-12));
    CHECK(b.omega_star_margin >= 0.99 * 0.1 * 1.0);
  }

  MetricField flat = MetricField::flat(grid);
  CHECK_THROWS_AS(bracket_initial(flat, flat, 0.0), parameter_error);
  CHECK_THROWS_AS(bracket_initial(flat, flat, 1.0), parameter_error);
  CHECK_THROWS_AS(bracket_initial(flat, flat, -0.2), parameter_error);
}

TEST_CASE("comparing a flat flow against itself has closed-form reductions") {
  TorusGrid grid(1, 8);
  MetricField flat = MetricField::flat(grid);
  FlowConfig cfg = comparison_config(1e-3, 6.0);
  ComparisonState st = evolve_comparison(flat, flat, cfg);

  CHECK_FALSE(st.truncated);
  CHECK(st.terminal == TerminalReason::none);
  REQUIRE(st.series.t.size() >= 16);

  // u = -log(0.9) (1 - e^{-t}), psi = log(11/9) (1 - e^{-t}),
  // v = -log(1.1) (1 - e^{-t}) <= 0, traces/volumes frozen at the bracket.
  const double cu = -std::log(0.9);
  const double cpsi = std::log(11.0 / 9.0);
  for (std::size_t k = 0; k < st.series.t.size(); ++k) {
    const double ramp = 1.0 - std::exp(-st.series.t[k]);
    CHECK(st.series.u_max[k] == doctest::Approx(cu * ramp).epsilon(2e-3));
    CHECK(st.series.u_min[k] == doctest::Approx(st.series.u_max[k]).epsilon(1e-10));
    CHECK(st.series.psi_max_abs[k] == doctest::Approx(cpsi * ramp).epsilon(2e-3));
    CHECK(st.series.v_max[k] <= 1e-12);
    CHECK(st.series.identity_residual[k] <= 1e-14);
    CHECK(st.series.tr_w_wminus_max[k] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(st.series.tr_wminus_w_max[k] == doctest::Approx(1.0 / 0.9).epsilon(1e-12));
    CHECK(st.series.volratio_min[k] == doctest::Approx(1.0 / 0.9).epsilon(1e-12));
    CHECK(st.series.volratio_max[k] == doctest::Approx(1.0 / 0.9).epsilon(1e-12));
    CHECK(st.series.s_max[k] <= 1e-20);
    CHECK(st.series.eig_lo[k] == 1.0);
    CHECK(st.series.eig_hi[k] == 1.0);
    CHECK(st.series.chain_violation[k] <= 1e-12);
    // With n = 1 the exponent-(n-1) chain bound holds with equality, while
    // the exponent-1 variant fails by exactly the volume ratio excess.
    CHECK(st.series.printed_chain_violation[k] ==
          doctest::Approx(1.0 / 0.9 - 1.0).epsilon(1e-10));
    CHECK(st.series.printed_chain_violated_fraction[k] == 1.0);
    CHECK(st.series.sup_rm[k] == 0.0);
    CHECK(st.series.sup_rm_tilde[k] == 0.0);
  }

  SUBCASE("potential bounds") {
    BoundReport r = check_potential_bounds(st, 0.25);
    CHECK(r.eta == 0.25);
    CHECK(r.c_u_lower <= 1e-6);
    CHECK(r.c_u_plain == doctest::Approx(cu * (1.0 - std::exp(-6.0))).epsilon(2e-3));
    CHECK(r.c_udot == doctest::Approx(cu).epsilon(2e-3));
    CHECK(r.c_psi == doctest::Approx(cpsi * (1.0 - std::exp(-6.0))).epsilon(2e-3));
    CHECK(r.v_max <= kVTolerance);
    CHECK(r.v_nonpositive);
    CHECK(r.udot_final_half_increase == 0.0);

    CHECK_THROWS_AS(check_potential_bounds(st, 0.5), parameter_error);
    CHECK_THROWS_AS(check_potential_bounds(st, 0.0), parameter_error);
  }

  SUBCASE("trace and volume bounds") {
    BoundReport r = check_trace_volume_bounds(st);
    CHECK(r.c_trace == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(r.c_trace_rev == doctest::Approx(1.0 / 0.9).epsilon(1e-12));
    CHECK(r.c_volume == doctest::Approx(1.0 / 0.9).epsilon(1e-12));
    CHECK(r.chain_violation_max <= 1e-12);
    CHECK(r.printed_chain_violation_max == doctest::Approx(1.0 / 0.9 - 1.0).epsilon(1e-10));
    CHECK(r.printed_chain_violated_fraction_max == 1.0);
    // Volume ratio meets the AM-GM consequence of the trace bound exactly here.
    CHECK(r.amgm_margin == doctest::Approx(0.0).epsilon(1e-12));

    CHECK_THROWS_AS(check_trace_volume_bounds(ComparisonState{}), parameter_error);
  }

  SUBCASE("equivalence constant is identically one") {
    EquivalenceReport r = equivalence_constant(st);
    CHECK(r.sup == 1.0);
    CHECK(r.final_half_increase == 0.0);
    CHECK(r.plateau_ok);
    for (double c : r.c) CHECK(c == 1.0);
  }

  SUBCASE("maximum-principle probes degenerate cleanly") {
    for (ProbeQuantity q : {ProbeQuantity::udot_minus_au, ProbeQuantity::udot_plus_au,
                            ProbeQuantity::s_plus_a_trace}) {
      ProbeReport r = mp_probe(st, q, 2.0);
      CHECK(r.unusable_points == 0);
      CHECK(r.fitted_c <= 1e-6);
      CHECK(r.max_lap_excess <= 1e-12);
      CHECK(r.spatially_constant);
    }
    ProbeReport tr = mp_probe(st, ProbeQuantity::log_trace_minus_au, 2.0);
    CHECK(tr.fitted_c == doctest::Approx(0.9).epsilon(0.01));
    CHECK(tr.max_lap_excess <= 1e-12);

    CHECK_THROWS_AS(mp_probe(st, ProbeQuantity::s_plus_a_trace, 2.0, 0), parameter_error);
  }

  SUBCASE("zero curvature series classify as bounded") {
    ClassifyOptions opts;
    opts.floors = st.series.rm_floor;
    SingularityReport rep =
        classify_singularity(st.series.t, st.series.sup_rm, 0.5, 0.1, opts);
    CHECK(rep.classification == SingularityType::type_iii);
    CHECK(rep.growth_exponent == 0.0);
    CHECK(rep.censored_fraction == 1.0);
    CHECK(rep.bounded);
    CHECK(rep.sup_value == 0.0);
  }
}

TEST_CASE("a curved flow stays comparable to the flat one it brackets") {
  TorusGrid grid(1, 16);
  SpectralWorkspace ws(grid);
  MetricField omega0 = cosine_metric(ws, grid, 0.2);
  MetricField tilde0 = MetricField::flat(grid);
  FlowConfig cfg = comparison_config(1e-3, 6.0);
  ComparisonState st = evolve_comparison(omega0, tilde0, cfg);

  CHECK_FALSE(st.truncated);
  REQUIRE(st.series.t.size() >= 16);

  BoundReport pot = check_potential_bounds(st, 0.25);
  CHECK(pot.v_max <= kVTolerance);
  CHECK(pot.v_nonpositive);
  CHECK(pot.c_u_plain > 0.0);
  CHECK(pot.c_udot > 0.0);
  CHECK(std::isfinite(pot.c_u_lower));
  CHECK(std::isfinite(pot.c_u_upper_decay));
  for (double ident : st.series.identity_residual) CHECK(ident <= 1e-10);

  BoundReport tv = check_trace_volume_bounds(st);
  CHECK(tv.c_trace > 0.0);
  CHECK(tv.c_trace_rev >= 1.0);
  CHECK(tv.volratio_min > 0.0);
  CHECK(tv.c_volume >= 1.0);
  CHECK(tv.chain_violation_max <= 1e-10);
  CHECK(tv.amgm_margin >= -1e-10);

  EquivalenceReport eq = equivalence_constant(st);
  CHECK(eq.sup >= 1.0);
  CHECK(std::isfinite(eq.sup));
  CHECK(eq.plateau_ok);

  for (ProbeQuantity q : {ProbeQuantity::udot_minus_au, ProbeQuantity::udot_plus_au,
                          ProbeQuantity::log_trace_minus_au, ProbeQuantity::s_plus_a_trace}) {
    ProbeReport r = mp_probe(st, q, 3.2);
    CHECK(r.unusable_points == 0);
    CHECK(r.max_lap_excess <= 1e-6);
    CHECK(std::isfinite(r.fitted_c));
    CHECK(r.fitted_c >= 0.0);
    REQUIRE(!r.points.empty());
  }

  ClassifyOptions copts;
  copts.eps_iib = 1.0;
  copts.floors = st.series.rm_floor;
  SingularityReport rep = classify_singularity(st.series.t, st.series.sup_rm, 0.5, 0.5, copts);
  CHECK(rep.classification == SingularityType::type_iii);
  CHECK(rep.bounded);
}

TEST_CASE("comparisons record early termination") {
  TorusGrid grid(1, 8);
  MetricField flat = MetricField::flat(grid);
  FlowConfig cfg = comparison_config(1e-3, 2.0);
  cfg.positivity_floor = 0.5;  // omega^- = 0.9 flat hits it at t = ln(0.9/0.5)
  ComparisonState st = evolve_comparison(flat, flat, cfg);

  CHECK(st.truncated);
  CHECK(st.terminal == TerminalReason::positivity_loss);
  REQUIRE(!st.series.t.empty());
  CHECK(st.series.t.back() < 1.0);
  CHECK(st.series.t.back() == doctest::Approx(std::log(0.9 / 0.5)).epsilon(0.05));

  CHECK_THROWS_AS(check_potential_bounds(st, 0.25), parameter_error);  // range < 5
}

TEST_CASE("extra sample times reach all four flows") {
  TorusGrid grid(1, 8);
  MetricField flat = MetricField::flat(grid);
  FlowConfig cfg = comparison_config(1e-3, 0.5, 100);
  ComparisonOptions opts;
  opts.extra_sample_times = {0.305};
  ComparisonState st = evolve_comparison(flat, flat, cfg, opts);

  bool found = false;
  for (double t : st.series.t) found = found || std::abs(t - 0.305) < 1e-12;
  CHECK(found);

  CHECK_THROWS_AS(evolve_comparison(flat, MetricField::flat(TorusGrid(1, 16)), cfg),
                  parameter_error);
}

TEST_CASE("probe time differencing requires dense sampling") {
  TorusGrid grid(1, 8);
  MetricField flat = MetricField::flat(grid);

  FlowConfig sparse = comparison_config(1e-2, 6.0, 30);  // samples 0.3 apart
  ComparisonState st = evolve_comparison(flat, flat, sparse);
  CHECK_THROWS_AS(mp_probe(st, ProbeQuantity::s_plus_a_trace, 1.0), parameter_error);

  FlowConfig tiny = comparison_config(1e-2, 0.01, 30);  // two samples only
  ComparisonState st2 = evolve_comparison(flat, flat, tiny);
  CHECK_THROWS_AS(mp_probe(st2, ProbeQuantity::s_plus_a_trace, 1.0), parameter_error);
}

TEST_CASE("probe quantities have stable names") {
  CHECK(std::string(probe_quantity_name(ProbeQuantity::udot_minus_au)) == "udot_minus_au");
  CHECK(std::string(probe_quantity_name(ProbeQuantity::udot_plus_au)) == "udot_plus_au");
  CHECK(std::string(probe_quantity_name(ProbeQuantity::log_trace_minus_au)) ==
        "log_trace_minus_au");
  CHECK(std::string(probe_quantity_name(ProbeQuantity::s_plus_a_trace)) == "s_plus_a_trace");
  CHECK(std::string(singularity_type_name(SingularityType::type_iii)) == "TypeIII");
  CHECK(std::string(singularity_type_name(SingularityType::type_iib)) == "TypeIIb");
  CHECK(std::string(singularity_type_name(SingularityType::inconclusive)) == "Inconclusive");
}

TEST_CASE("growth exponents separate bounded and exponential series") {
  const std::vector<double> t = linspace(0.0, 8.0, 81);

  SUBCASE("exponential growth is exponential-type") {
    SingularityReport rep = classify_singularity(
        t, map_series(t, [](double x) { return std::exp(2.0 * x); }), 0.5, 0.1);
    CHECK(rep.classification == SingularityType::type_iib);
    CHECK(rep.growth_exponent == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(rep.bounded);  // e^{16} is still below the default ceiling
    CHECK(rep.censored_fraction == 0.0);
    CHECK(rep.window_t_start == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(rep.window_t_end == 8.0);
  }

  SUBCASE("constant series are bounded-type") {
    SingularityReport rep =
        classify_singularity(t, std::vector<double>(t.size(), 3.7), 0.5, 0.1);
    CHECK(rep.classification == SingularityType::type_iii);
    CHECK(rep.growth_exponent == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(rep.sup_value == 3.7);
    CHECK(rep.censored_fraction == 0.0);
  }

  SUBCASE("slow growth between the thresholds is inconclusive") {
    SingularityReport rep = classify_singularity(
        t, map_series(t, [](double x) { return std::exp(0.2 * x); }), 0.5, 0.1);
    CHECK(rep.classification == SingularityType::inconclusive);
    CHECK(rep.growth_exponent == doctest::Approx(0.2).epsilon(1e-6));
  }

  SUBCASE("a ceiling breach disqualifies the bounded type") {
    ClassifyOptions opts;
    opts.ceiling = 1.0;
    SingularityReport rep =
        classify_singularity(t, std::vector<double>(t.size(), 3.7), 0.5, 0.1, opts);
    CHECK_FALSE(rep.bounded);
    CHECK(rep.classification == SingularityType::inconclusive);
  }

  SUBCASE("fully censored windows resolve to bounded decay") {
    ClassifyOptions opts;
    opts.floors.assign(t.size(), 1e-6);
    std::vector<double> vals(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) vals[k] = 1e-12 * (1.0 + 1e-3 * k);
    SingularityReport rep = classify_singularity(t, vals, 0.5, 0.1, opts);
    CHECK(rep.classification == SingularityType::type_iii);
    CHECK(rep.growth_exponent == 0.0);
    CHECK(rep.censored_fraction == 1.0);
  }

  SUBCASE("windows dominated by censored samples also fit no slope") {
    ClassifyOptions opts;
    opts.floors.assign(t.size(), 1e-6);
    SingularityReport rep = classify_singularity(
        t, map_series(t, [](double x) { return std::exp(-3.0 * x); }), 0.5, 0.1, opts);
    CHECK(rep.classification == SingularityType::type_iii);
    CHECK(rep.growth_exponent == 0.0);
    CHECK(rep.censored_fraction > 0.5);
    CHECK(rep.censored_fraction < 1.0);
  }

  SUBCASE("input validation") {
    std::vector<double> vals(t.size(), 1.0);
    std::vector<double> short_t = linspace(0.0, 8.0, 8);
    CHECK_THROWS_AS(classify_singularity(t, std::vector<double>(5, 1.0), 0.5, 0.1),
                    parameter_error);
    CHECK_THROWS_AS(
        classify_singularity(short_t, std::vector<double>(short_t.size(), 1.0), 0.5, 0.1),
        parameter_error);
    std::vector<double> narrow = linspace(0.0, 4.0, 81);
    CHECK_THROWS_AS(classify_singularity(narrow, vals, 0.5, 0.1), parameter_error);
    CHECK_THROWS_AS(classify_singularity(t, vals, 0.0, 0.1), parameter_error);
    CHECK_THROWS_AS(classify_singularity(t, vals, 1.5, 0.1), parameter_error);
    ClassifyOptions bad;
    bad.floors.assign(3, 0.0);
    CHECK_THROWS_AS(classify_singularity(t, vals, 0.5, 0.1, bad), parameter_error);
  }
}
