#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "krf/flow.hpp"
#include "krf/geometry.hpp"

using namespace krf;

namespace {

FlowConfig base_config(double dt, double horizon, Scheme scheme) {
  FlowConfig c;
  c.dt = dt;
  c.horizon = horizon;
  c.scheme = scheme;
  c.sample_stride = 10;
  return c;
}

// Flat metric plus the Hessian of eps cos(x): g = 1 - (eps/4) cos x.
MetricField cosine_metric(SpectralWorkspace& ws, const TorusGrid& grid, double eps) {
  ScalarField phi(grid);
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    phi[p] = eps * std::cos(grid.coord(p, 0));
  return metric_from_potential(ws, MetricField::flat(grid), phi);
}

double max_abs_phi_diff(const TrajectorySample& a, const TrajectorySample& b) {
  REQUIRE(a.phi.size() == b.phi.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.phi.size(); ++i) m = std::max(m, std::abs(a.phi[i] - b.phi[i]));
  return m;
}

}  // namespace

TEST_CASE("flow configuration is validated") {
  FlowConfig c = base_config(1e-3, 1.0, Scheme::explicit_rk4);
  CHECK_NOTHROW(c.validate());

  FlowConfig bad = c;
  bad.dt = 0.0;
  CHECK_THROWS_AS(bad.validate(), parameter_error);
  bad = c;
  bad.horizon = -1.0;
  CHECK_THROWS_AS(bad.validate(), parameter_error);
  bad = c;
  bad.sample_stride = 0;
  CHECK_THROWS_AS(bad.validate(), parameter_error);
  bad = c;
  bad.positivity_floor = 0.0;
  CHECK_THROWS_AS(bad.validate(), parameter_error);
  bad = c;
  bad.rm_ceiling = 0.0;
  CHECK_THROWS_AS(bad.validate(), parameter_error);
}

TEST_CASE("init_flow validates grids and the volume form") {
  TorusGrid grid(1, 8);
  MetricField omega0 = MetricField::flat(grid);
  FlowConfig c = base_config(1e-3, 1.0, Scheme::explicit_rk4);

  ScalarField wrong_grid(TorusGrid(1, 16), 1.0);
  CHECK_THROWS_AS(init_flow(omega0, nullptr, wrong_grid, c), parameter_error);

  ScalarField nonpositive(grid, 0.0);
  CHECK_THROWS_AS(init_flow(omega0, nullptr, nonpositive, c), parameter_error);

  HermitianField chi(TorusGrid(1, 16), 1);
  ScalarField volume(grid, 1.0);
  CHECK_THROWS_AS(init_flow(omega0, &chi, volume, c), parameter_error);

  CHECK_THROWS_AS(run(FlowState{}, c), parameter_error);
}

TEST_CASE("flat initial data is a fixed point of the potential flow") {
  TorusGrid grid(1, 8);
  MetricField omega0 = MetricField::flat(grid);
  ScalarField volume(grid, 1.0);

  for (Scheme scheme : {Scheme::explicit_rk4, Scheme::semi_implicit}) {
    FlowConfig c = base_config(1e-3, 2.0, scheme);
    Trajectory traj = run(init_flow(omega0, nullptr, volume, c), c);

    CHECK(traj.terminal == TerminalReason::none);
    for (const TrajectorySample& s : traj.samples) {
      for (double v : s.phi) CHECK(v == 0.0);
      CHECK(s.sup_rm == 0.0);
      CHECK(s.eig_min == doctest::Approx(std::exp(-s.t)).epsilon(1e-14));
      CHECK(s.eig_max == doctest::Approx(std::exp(-s.t)).epsilon(1e-14));
      CHECK(s.class_a == doctest::Approx(std::exp(-s.t)).epsilon(1e-14));
      CHECK(s.class_b == doctest::Approx(1.0 - std::exp(-s.t)).epsilon(1e-14));
    }
  }
}

TEST_CASE("gauge drift against a reference form has a closed form") {
  // omega0 = chi = flat: the metric never moves, while the potential follows
  // dphi/dt = n t - phi exactly, i.e. phi(t) = n (t - 1 + e^{-t}).
  TorusGrid grid(1, 8);
  MetricField omega0 = MetricField::flat(grid);
  HermitianField chi = MetricField::flat(grid);
  ScalarField volume(grid, 1.0);

  auto phi_exact = [](double t) { return t - 1.0 + std::exp(-t); };

  SUBCASE("explicit RK4 integrates it to scheme accuracy") {
    FlowConfig c = base_config(1e-3, 2.0, Scheme::explicit_rk4);
    Trajectory traj = run(init_flow(omega0, &chi, volume, c), c);
    double m = 0.0;
    for (const TrajectorySample& s : traj.samples)
      for (double v : s.phi) m = std::max(m, std::abs(v - phi_exact(s.t)));
    CHECK(m < 1e-9);
    // The metric itself stays flat.
    const TrajectorySample& last = traj.samples.back();
    CHECK(last.eig_min == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(last.eig_max == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("semi-implicit converges at first order") {
    double errs[2];
    const double dts[2] = {2e-3, 1e-3};
    for (int i = 0; i < 2; ++i) {
      FlowConfig c = base_config(dts[i], 2.0, Scheme::semi_implicit);
      Trajectory traj = run(init_flow(omega0, &chi, volume, c), c);
      double m = 0.0;
      for (const TrajectorySample& s : traj.samples)
        for (double v : s.phi) m = std::max(m, std::abs(v - phi_exact(s.t)));
      errs[i] = m;
    }
    CHECK(errs[0] < 2e-3);
    CHECK(errs[0] / errs[1] == doctest::Approx(2.0).epsilon(0.2));
  }
}

TEST_CASE("the two schemes agree and the semi-implicit error is first order") {
  TorusGrid grid(1, 16);
  SpectralWorkspace ws(grid);
  MetricField omega0 = cosine_metric(ws, grid, 0.2);
  ScalarField volume(grid, 1.0);
  const double horizon = 1.0;

  FlowConfig ref_cfg = base_config(1e-3, horizon, Scheme::explicit_rk4);
  Trajectory ref = run(init_flow(omega0, nullptr, volume, ref_cfg), ref_cfg);

  double errs[2];
  const double dts[2] = {2e-3, 1e-3};
  for (int i = 0; i < 2; ++i) {
    FlowConfig c = base_config(dts[i], horizon, Scheme::semi_implicit);
    Trajectory traj = run(init_flow(omega0, nullptr, volume, c), c);
    errs[i] = max_abs_phi_diff(traj.samples.back(), ref.samples.back());
  }
  CHECK(errs[1] < 1e-3);
  CHECK(errs[0] / errs[1] == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("sampling grid structure and extra sample times") {
  TorusGrid grid(1, 8);
  MetricField omega0 = MetricField::flat(grid);
  ScalarField volume(grid, 1.0);

  FlowConfig c = base_config(1e-3, 0.123, Scheme::semi_implicit);
  Trajectory traj = run(init_flow(omega0, nullptr, volume, c), c, {0.0355});

  const std::vector<double> ts = traj.times();
  REQUIRE(ts.size() >= 3);
  CHECK(ts.front() == 0.0);
  CHECK(ts.back() == doctest::Approx(0.123).epsilon(1e-14));
  for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] > ts[i - 1]);

  bool found_extra = false;
  for (double t : ts) found_extra = found_extra || std::abs(t - 0.0355) < 1e-12;
  CHECK(found_extra);

  // Stride samples at multiples of dt * stride.
  bool found_stride = false;
  for (double t : ts) found_stride = found_stride || std::abs(t - 0.05) < 1e-12;
  CHECK(found_stride);

  CHECK_THROWS_AS(run(init_flow(omega0, nullptr, volume, c), c, {0.5}), parameter_error);
  CHECK_THROWS_AS(run(init_flow(omega0, nullptr, volume, c), c, {-0.01}), parameter_error);
}

TEST_CASE("curvature ceiling terminates the run") {
  TorusGrid grid(1, 16);
  SpectralWorkspace ws(grid);
  MetricField omega0 = cosine_metric(ws, grid, 0.3);
  ScalarField volume(grid, 1.0);

  const double initial_rm = curvature(ws, omega0).sup_rm_norm;
  REQUIRE(initial_rm > 0.0);

  // A ceiling below the starting curvature trips at the first sample after
  // t = 0 (one stride block in), well before the horizon.
  FlowConfig capped = base_config(1e-3, 4.0, Scheme::semi_implicit);
  capped.rm_ceiling = 0.5 * initial_rm;
  Trajectory stopped = run(init_flow(omega0, nullptr, volume, capped), capped);
  CHECK(stopped.terminal == TerminalReason::curvature_ceiling);
  CHECK(stopped.terminal_t == doctest::Approx(capped.dt * capped.sample_stride));
  CHECK(stopped.samples.back().sup_rm > capped.rm_ceiling);
}

TEST_CASE("explicit stepping enforces its stability bound") {
  TorusGrid grid(1, 8);
  MetricField omega0 = MetricField::flat(grid);
  ScalarField volume(grid, 1.0);

  // CFL bound is 0.2 * min-eig * spacing^2 = 0.2 * (2 pi / 8)^2 ~ 0.123.
  FlowConfig c = base_config(0.2, 1.0, Scheme::explicit_rk4);
  FlowState s0 = init_flow(omega0, nullptr, volume, c);
  CHECK_THROWS_AS(step(s0, c), stability_violation);

  Trajectory traj = run(s0, c);
  CHECK(traj.terminal == TerminalReason::stability_violation);
  CHECK(traj.terminal_t == doctest::Approx(0.0));

  // The semi-implicit scheme has no such restriction.
  FlowConfig si = c;
  si.scheme = Scheme::semi_implicit;
  Trajectory ok = run(init_flow(omega0, nullptr, volume, si), si);
  CHECK(ok.terminal == TerminalReason::none);
}

TEST_CASE("positivity floor terminates a collapsing flow") {
  TorusGrid grid(1, 8);
  MetricField omega0 = MetricField::flat(grid);
  ScalarField volume(grid, 1.0);

  // omega(t) = e^{-t} flat crosses eigenvalue 0.5 at t = ln 2.
  FlowConfig c = base_config(1e-3, 3.0, Scheme::semi_implicit);
  c.positivity_floor = 0.5;
  Trajectory traj = run(init_flow(omega0, nullptr, volume, c), c);
  CHECK(traj.terminal == TerminalReason::positivity_loss);
  CHECK(traj.terminal_t == doctest::Approx(std::log(2.0)).epsilon(0.01));
  CHECK(traj.samples.back().t < 3.0);
}

TEST_CASE("stepping a terminal state is rejected") {
  TorusGrid grid(1, 8);
  MetricField omega0 = MetricField::flat(grid);
  ScalarField volume(grid, 1.0);
  FlowConfig c = base_config(1e-3, 1.0, Scheme::semi_implicit);
  FlowState s = init_flow(omega0, nullptr, volume, c);
  s.terminal = TerminalReason::curvature_ceiling;
  CHECK_THROWS_AS(step(s, c), parameter_error);
}

TEST_CASE("sampled trajectories reconstruct their states") {
  TorusGrid grid(1, 16);
  SpectralWorkspace ws(grid);
  MetricField omega0 = cosine_metric(ws, grid, 0.2);
  ScalarField volume(grid, 1.0);
  FlowConfig c = base_config(1e-3, 1.0, Scheme::semi_implicit);
  Trajectory traj = run(init_flow(omega0, nullptr, volume, c), c);

  const std::size_t i = traj.samples.size() / 2;
  ScalarField phi = traj.phi_at(i);
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    CHECK(phi[p] == traj.samples[i].phi[p]);

  MetricField direct =
      reconstruct_metric(ws, *traj.setup, traj.samples[i].t, phi, c.positivity_floor);
  MetricField via_traj = traj.metric_at(i, ws);
  double m = 0.0;
  for (std::size_t e = 0; e < direct.raw().size(); ++e)
    m = std::max(m, std::abs(direct.raw()[e] - via_traj.raw()[e]));
  CHECK(m == 0.0);

  FlowState st = traj.state_at(i, ws);
  CHECK(st.t == traj.samples[i].t);
  CHECK(st.cls.a == doctest::Approx(std::exp(-st.t)).epsilon(1e-14));

  // Sample metadata matches an independent curvature measurement.
  CurvatureField cf = curvature(ws, via_traj);
  CHECK(traj.samples[i].sup_rm == doctest::Approx(cf.sup_rm_norm).epsilon(1e-12));
}

TEST_CASE("reconstruction blends the reference form as the class slides") {
  TorusGrid grid(1, 8);
  SpectralWorkspace ws(grid);
  MetricField omega0 = MetricField::flat(grid, 2.0);
  HermitianField chi = MetricField::flat(grid, 1.0);
  FlowSetup setup;
  setup.grid = grid;
  setup.omega0 = omega0;
  setup.chi = chi;
  setup.volume_form = ScalarField(grid, 1.0);

  ScalarField zero(grid);
  const double t = 0.5;
  MetricField g = reconstruct_metric(ws, setup, t, zero, kDefaultPositivityFloor);
  const double expected = 2.0 * std::exp(-t) + (1.0 - std::exp(-t));
  CHECK(g.at(0)[0].real() == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("measurement floors accompany every sample") {
  TorusGrid grid(1, 16);
  SpectralWorkspace ws(grid);
  ScalarField volume(grid, 1.0);

  // Flat start: no integration bias, floors are the pure round-off floor.
  FlowConfig c = base_config(1e-3, 1.0, Scheme::semi_implicit);
  Trajectory flat = run(init_flow(MetricField::flat(grid), nullptr, volume, c), c);
  for (const TrajectorySample& s : flat.samples) {
    CHECK(s.rm_floor > 0.0);
    CHECK(s.sup_rm <= s.rm_floor);
  }

  // Perturbed start: the floor additionally covers the scheme's tracking
  // bias, which grows with e^t, so floors increase along the run.
  Trajectory pert = run(init_flow(cosine_metric(ws, grid, 0.2), nullptr, volume, c), c);
  CHECK(pert.samples.front().rm_floor > 0.0);
  CHECK(pert.samples.back().rm_floor > pert.samples.front().rm_floor);
}

TEST_CASE("a nonuniform volume form steers the flow without breaking it") {
  TorusGrid grid(1, 16);
  ScalarField volume(grid, 1.0);
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    volume[p] = 1.0 + 0.1 * std::cos(grid.coord(p, 0));

  FlowConfig c = base_config(1e-3, 1.0, Scheme::semi_implicit);
  Trajectory traj = run(init_flow(MetricField::flat(grid), nullptr, volume, c), c);
  CHECK(traj.terminal == TerminalReason::none);
  double m = 0.0;
  for (double v : traj.samples.back().phi) m = std::max(m, std::abs(v));
  CHECK(m > 1e-3);  // the density genuinely moves the potential
}

TEST_CASE("terminal reasons have stable names") {
  CHECK(std::string(terminal_reason_name(TerminalReason::none)) == "completed");
  CHECK(std::string(terminal_reason_name(TerminalReason::positivity_loss)) == "positivity_loss");
  CHECK(std::string(terminal_reason_name(TerminalReason::curvature_ceiling)) ==
        "curvature_ceiling");
  CHECK(std::string(terminal_reason_name(TerminalReason::stability_violation)) ==
        "stability_violation");
}
