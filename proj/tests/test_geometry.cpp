#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "krf/geometry.hpp"
#include "krf/grid.hpp"
#include "krf/spectral.hpp"
#include "reference.hpp"

using namespace krf;

namespace {

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ScalarField sampled(const TorusGrid& g, double (*f)(double, double)) {
  ScalarField out(g);
  for (std::size_t p = 0; p < g.node_count(); ++p) out[p] = f(g.coord(p, 0), g.coord(p, 1));
  return out;
}

// 1 + 0.3 cos x + 0.1 sin 2y on the n=1 grid: band-limited, non-constant in
// both real directions, comfortably positive definite.
MetricField curved_metric_1d(const TorusGrid& g) {
  std::vector<cplx> data(g.node_count());
  for (std::size_t p = 0; p < g.node_count(); ++p)
    data[p] = 1.0 + 0.3 * std::cos(g.coord(p, 0)) + 0.1 * std::sin(2.0 * g.coord(p, 1));
  return MetricField(g, 1, std::move(data));
}

MetricField curved_metric_2d(SpectralWorkspace& ws, const TorusGrid& g) {
  ScalarField phi(g);
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    const double x1 = g.coord(p, 0), y1 = g.coord(p, 1);
    const double x2 = g.coord(p, 2), y2 = g.coord(p, 3);
    phi[p] = 0.4 * std::cos(x1) + 0.3 * std::cos(x2 + y1) + 0.2 * std::sin(x1 + x2) +
             0.1 * std::cos(y2);
  }
  return metric_from_potential(ws, MetricField::flat(g), phi);
}

}  // namespace

TEST_CASE("spectral derivatives are exact on band-limited fields") {
  TorusGrid g(1, 16);
  SpectralWorkspace ws(g);

  ScalarField f = sampled(g, [](double x, double y) { return std::cos(3.0 * x) * std::sin(2.0 * y); });
  ScalarField fx = ws.derivative(f, 0);
  ScalarField fy = ws.derivative(f, 1);
  ScalarField fx_exact =
      sampled(g, [](double x, double y) { return -3.0 * std::sin(3.0 * x) * std::sin(2.0 * y); });
  ScalarField fy_exact =
      sampled(g, [](double x, double y) { return 2.0 * std::cos(3.0 * x) * std::cos(2.0 * y); });
  CHECK(max_abs_diff(fx, fx_exact) < 1e-12);
  CHECK(max_abs_diff(fy, fy_exact) < 1e-12);

  // d/dz of a function of x alone is f_x / 2.
  ScalarField h = sampled(g, [](double x, double) { return std::cos(x); });
  ComplexField hz = ws.deriv_z(h, 0);
  double m = 0.0;
  for (std::size_t p = 0; p < g.node_count(); ++p)
    m = std::max(m, std::abs(hz.values[p] - cplx(-0.5 * std::sin(g.coord(p, 0)), 0.0)));
  CHECK(m < 1e-13);
}

TEST_CASE("spectral derivative annihilates the Nyquist mode") {
  TorusGrid g(1, 16);
  SpectralWorkspace ws(g);
  ScalarField f = sampled(g, [](double x, double) { return std::cos(8.0 * x); });
  ScalarField fx = ws.derivative(f, 0);
  double m = 0.0;
  for (std::size_t p = 0; p < g.node_count(); ++p) m = std::max(m, std::abs(fx[p]));
  CHECK(m < 1e-13);
}

TEST_CASE("complex Hessian of a cosine potential") {
  TorusGrid g(1, 32);
  SpectralWorkspace ws(g);
  const double eps = 0.8;
  ScalarField phi = sampled(g, [](double x, double) { return std::cos(x); });
  for (auto& v : phi.values) v *= eps;

  HermitianField h = ws.complex_hessian(phi);
  double m = 0.0;
  for (std::size_t p = 0; p < g.node_count(); ++p)
    m = std::max(m, std::abs(h.at(p)[0] - cplx(-0.25 * eps * std::cos(g.coord(p, 0)), 0.0)));
  CHECK(m < 1e-14);

  // Same statement at metric level: flat + i ddbar(eps cos x) = 1 - (eps/4) cos x.
  MetricField gm = metric_from_potential(ws, MetricField::flat(g), phi);
  m = 0.0;
  for (std::size_t p = 0; p < g.node_count(); ++p)
    m = std::max(m, std::abs(gm.at(p)[0] - cplx(1.0 - 0.25 * eps * std::cos(g.coord(p, 0)), 0.0)));
  CHECK(m < 1e-14);
}

TEST_CASE("christoffel symbols of a conformal one-dimensional metric") {
  // g = e^{f(x)} has Gamma^0_00 = d_z f = f_x / 2; for f = 0.2 cos x that is
  // -0.1 sin x.  e^{0.2 cos x} is analytic, so the truncation error at N=64
  // sits at round-off.
  TorusGrid g(1, 64);
  SpectralWorkspace ws(g);
  std::vector<cplx> data(g.node_count());
  for (std::size_t p = 0; p < g.node_count(); ++p)
    data[p] = std::exp(0.2 * std::cos(g.coord(p, 0)));
  MetricField gm(g, 1, std::move(data));

  ChristoffelField ch = christoffel(ws, gm);
  double m = 0.0;
  for (std::size_t p = 0; p < g.node_count(); ++p)
    m = std::max(m, std::abs(ch.at(p, 0, 0, 0) - cplx(-0.1 * std::sin(g.coord(p, 0)), 0.0)));
  CHECK(m < 1e-12);
}

TEST_CASE("christoffel symbols match the finite-difference reference") {
  SUBCASE("n = 1") {
    TorusGrid g(1, 64);
    SpectralWorkspace ws(g);
    MetricField gm = curved_metric_1d(g);
    CHECK(max_abs_diff(christoffel(ws, gm).gamma, ref::christoffel(gm)) < 1e-8);
  }
  SUBCASE("n = 2") {
    TorusGrid g(2, 24);
    SpectralWorkspace ws(g);
    MetricField gm = curved_metric_2d(ws, g);
    CHECK(max_abs_diff(christoffel(ws, gm).gamma, ref::christoffel(gm)) < 1e-7);
  }
}

TEST_CASE("christoffel symbols are symmetric in the lower indices") {
  TorusGrid g(2, 16);
  SpectralWorkspace ws(g);
  MetricField gm = curved_metric_2d(ws, g);
  ChristoffelField ch = christoffel(ws, gm);
  double m = 0.0;
  for (std::size_t p = 0; p < g.node_count(); ++p)
    for (int k = 0; k < 2; ++k)
      m = std::max(m, std::abs(ch.at(p, 0, 1, k) - ch.at(p, 1, 0, k)));
  CHECK(m < 1e-12);
}

TEST_CASE("curvature matches the finite-difference reference (n = 1)") {
  TorusGrid g(1, 64);
  SpectralWorkspace ws(g);
  MetricField gm = curved_metric_1d(g);
  CurvatureField cf = curvature(ws, gm);
  ref::Curvature fd = ref::curvature(gm);

  CHECK(max_abs_diff(cf.rm, fd.rm) < 1e-8);
  CHECK(max_abs_diff(cf.ric, fd.ric) < 1e-8);
  CHECK(max_abs_diff(cf.scalar, fd.scalar) < 1e-8);
  CHECK(max_abs_diff(cf.rm_norm, fd.rm_norm) < 1e-8);
  CHECK(cf.sup_rm_norm == doctest::Approx(fd.sup_rm_norm).epsilon(1e-8));
}

TEST_CASE("curvature matches the finite-difference reference (n = 2)") {
  TorusGrid g(2, 24);
  SpectralWorkspace ws(g);
  MetricField gm = curved_metric_2d(ws, g);
  CurvatureField cf = curvature(ws, gm);
  ref::Curvature fd = ref::curvature(gm);

  CHECK(max_abs_diff(cf.rm, fd.rm) < 1e-7);
  CHECK(max_abs_diff(cf.ric, fd.ric) < 1e-7);
  CHECK(max_abs_diff(cf.scalar, fd.scalar) < 1e-7);
  CHECK(max_abs_diff(cf.rm_norm, fd.rm_norm) < 1e-7);
  CHECK(cf.sup_rm_norm == doctest::Approx(fd.sup_rm_norm).epsilon(1e-7));
}

TEST_CASE("Ricci equals minus the complex Hessian of log det g") {
  auto check_model = [](const TorusGrid& g, MetricField gm, double tol) {
    SpectralWorkspace ws(g);
    CurvatureField cf = curvature(ws, gm);
    ScalarField logdet(g);
    for (std::size_t p = 0; p < g.node_count(); ++p)
      logdet[p] = std::log(herm_det(gm.at(p), gm.n()));
    HermitianField h = ws.complex_hessian(logdet);
    double m = 0.0;
    for (std::size_t p = 0; p < g.node_count(); ++p)
      for (int e = 0; e < gm.n() * gm.n(); ++e)
        m = std::max(m, std::abs(cf.ric_at(p)[e] + h.at(p)[e]));
    CHECK(m < tol);
  };

  {
    TorusGrid g(1, 64);
    check_model(g, curved_metric_1d(g), 1e-8);
  }
  {
    TorusGrid g(2, 24);
    SpectralWorkspace ws(g);
    check_model(g, curved_metric_2d(ws, g), 1e-7);
  }
}

TEST_CASE("curvature transforms covariantly under constant scaling") {
  TorusGrid g(1, 32);
  SpectralWorkspace ws(g);
  MetricField gm = curved_metric_1d(g);
  const double c = 2.7;
  MetricField gs = gm.scaled_metric(c);

  CurvatureField cf = curvature(ws, gm);
  CurvatureField cs = curvature(ws, gs);

  double m_rm = 0.0, m_ric = 0.0, m_sc = 0.0, m_nrm = 0.0;
  for (std::size_t i = 0; i < cf.rm.size(); ++i)
    m_rm = std::max(m_rm, std::abs(cs.rm[i] - c * cf.rm[i]));
  for (std::size_t i = 0; i < cf.ric.size(); ++i)
    m_ric = std::max(m_ric, std::abs(cs.ric[i] - cf.ric[i]));
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    m_sc = std::max(m_sc, std::abs(cs.scalar[p] - cf.scalar[p] / c));
    m_nrm = std::max(m_nrm, std::abs(cs.rm_norm[p] - cf.rm_norm[p] / c));
  }
  CHECK(m_rm < 1e-12);
  CHECK(m_ric < 1e-12);
  CHECK(m_sc < 1e-12);
  CHECK(m_nrm < 1e-12);
}

TEST_CASE("flat metrics have exactly zero curvature") {
  TorusGrid g(2, 16);
  SpectralWorkspace ws(g);
  CurvatureField cf = curvature(ws, MetricField::flat(g, 0.37));
  CHECK(cf.sup_rm_norm == 0.0);
  for (const cplx& v : cf.ric) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("trace_field matches the closed form") {
  TorusGrid g(1, 16);
  MetricField base = MetricField::flat(g, 2.0);
  std::vector<cplx> data(g.node_count());
  for (std::size_t p = 0; p < g.node_count(); ++p)
    data[p] = 1.0 + 0.1 * std::cos(g.coord(p, 0));
  MetricField other(g, 1, std::move(data));

  ScalarField tr = trace_field(base, other);
  double m = 0.0;
  for (std::size_t p = 0; p < g.node_count(); ++p)
    m = std::max(m, std::abs(tr[p] - (1.0 + 0.1 * std::cos(g.coord(p, 0))) / 2.0));
  CHECK(m < 1e-15);

  TorusGrid g2(2, 8);
  MetricField b2 = MetricField::flat(g2, 1.0);
  MetricField o2 = MetricField::flat(g2, 3.0);
  ScalarField t2 = trace_field(b2, o2);
  CHECK(t2[0] == doctest::Approx(6.0));

  CHECK_THROWS_AS(trace_field(base, b2), parameter_error);
}

TEST_CASE("eigen_ratio brackets the generalized spectrum") {
  TorusGrid g(1, 32);
  std::vector<cplx> data(g.node_count());
  for (std::size_t p = 0; p < g.node_count(); ++p) data[p] = 2.0 + std::cos(g.coord(p, 0));
  MetricField a(g, 1, std::move(data));
  MetricField b = MetricField::flat(g);

  auto [lo, hi] = eigen_ratio(a, b);
  CHECK(lo == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(hi == doctest::Approx(3.0).epsilon(1e-13));

  // n = 2 block-diagonal: per-node eigenvalues are the two diagonal entries.
  TorusGrid g2(2, 8);
  std::vector<cplx> d2(g2.node_count() * 4);
  for (std::size_t p = 0; p < g2.node_count(); ++p) {
    d2[4 * p + 0] = 2.0 + std::cos(g2.coord(p, 0));
    d2[4 * p + 3] = 4.0;
  }
  MetricField a2(g2, 2, std::move(d2));
  auto [lo2, hi2] = eigen_ratio(a2, MetricField::flat(g2));
  CHECK(lo2 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(hi2 == doctest::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("psi_and_s matches the finite-difference reference") {
  TorusGrid g(1, 64);
  SpectralWorkspace ws(g);
  MetricField gm = curved_metric_1d(g);
  MetricField gr = MetricField::flat(g, 1.3);

  ConnectionDeviation dev = psi_and_s(ws, gm, gr);
  ScalarField fd = ref::s_field(gm, gr);
  CHECK(max_abs_diff(dev.s_field, fd) < 1e-8);
  CHECK(dev.sup_s > 0.0);

  TorusGrid g2(2, 24);
  SpectralWorkspace ws2(g2);
  MetricField gm2 = curved_metric_2d(ws2, g2);
  MetricField gr2 = MetricField::flat(g2, 0.8);
  ConnectionDeviation dev2 = psi_and_s(ws2, gm2, gr2);
  CHECK(max_abs_diff(dev2.s_field, ref::s_field(gm2, gr2)) < 1e-7);
}

TEST_CASE("connection deviation vanishes for equal and scaled metrics") {
  TorusGrid g(1, 32);
  SpectralWorkspace ws(g);
  MetricField gm = curved_metric_1d(g);

  ConnectionDeviation same = psi_and_s(ws, gm, gm);
  CHECK(same.sup_s == 0.0);

  // The Chern connection is scale invariant, so S(g, c g) = 0 too.
  ConnectionDeviation scaled = psi_and_s(ws, gm, gm.scaled_metric(3.5));
  CHECK(scaled.sup_s < 1e-26);
}

TEST_CASE("curvature noise floor censors sub-resolution amplitudes") {
  TorusGrid g(1, 16);
  SpectralWorkspace ws(g);

  // Amplitude far below round-off resolution: the measured curvature is FFT
  // noise and must sit at or below the advertised floor.
  std::vector<cplx> tiny(g.node_count());
  for (std::size_t p = 0; p < g.node_count(); ++p)
    tiny[p] = 1.0 + 1e-14 * std::cos(g.coord(p, 0));
  CurvatureField noise = curvature(ws, MetricField(g, 1, std::move(tiny)));
  CHECK(noise.sup_rm_norm <= noise.noise_floor);

  // A resolvable amplitude clears the floor by orders of magnitude.
  std::vector<cplx> vis(g.node_count());
  for (std::size_t p = 0; p < g.node_count(); ++p)
    vis[p] = 1.0 + 1e-3 * std::cos(g.coord(p, 0));
  CurvatureField signal = curvature(ws, MetricField(g, 1, std::move(vis)));
  CHECK(signal.sup_rm_norm > 100.0 * signal.noise_floor);

  // The floor itself grows with the condition number and resolution.
  CHECK(curvature_noise_floor(g, 1.0, 0.1) > curvature_noise_floor(g, 1.0, 1.0));
  CHECK(curvature_noise_floor(TorusGrid(1, 64), 1.0, 1.0) > curvature_noise_floor(g, 1.0, 1.0));
}

TEST_CASE("hermitian helpers on a reference 2x2 matrix") {
  const cplx m[4] = {cplx(2.0, 0.0), cplx(0.3, 0.1), cplx(0.3, -0.1), cplx(1.0, 0.0)};

  CHECK(herm_det(m, 2) == doctest::Approx(2.0 - 0.1).epsilon(1e-15));

  cplx inv[4];
  herm_inverse(m, 2, inv);
  // m * inv == identity
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      cplx s(0.0, 0.0);
      for (int k = 0; k < 2; ++k) s += m[i * 2 + k] * inv[k * 2 + j];
      CHECK(std::abs(s - (i == j ? cplx(1.0, 0.0) : cplx(0.0, 0.0))) < 1e-15);
    }

  const auto eb = herm_eig_bounds(m, 2);
  const double h = 1.5, r = std::sqrt(0.25 + 0.1);
  CHECK(eb[0] == doctest::Approx(h - r).epsilon(1e-15));
  CHECK(eb[1] == doctest::Approx(h + r).epsilon(1e-15));

  // Generalized eigenvalues against the identity reduce to plain ones.
  const cplx id[4] = {cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(1.0, 0.0)};
  const auto gb = herm_gen_eig_bounds(m, id, 2);
  CHECK(gb[0] == doctest::Approx(eb[0]).epsilon(1e-14));
  CHECK(gb[1] == doctest::Approx(eb[1]).epsilon(1e-14));

  CHECK(herm_trace_ratio(m, id, 2) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("metric_from_potential validates its inputs") {
  TorusGrid g(1, 16);
  SpectralWorkspace ws(g);
  MetricField flat = MetricField::flat(g);

  ScalarField wrong(TorusGrid(1, 32));
  CHECK_THROWS_AS(metric_from_potential(ws, flat, wrong), parameter_error);

  // Potential large enough to destroy positivity: 1 - (eps/4) cos x dips
  // below zero for eps > 4.
  ScalarField phi = sampled(g, [](double x, double) { return std::cos(x); });
  for (auto& v : phi.values) v *= 4.2;
  CHECK_THROWS_AS(metric_from_potential(ws, flat, phi), positivity_loss);

  HermitianField mismatched(TorusGrid(1, 32), 1);
  ScalarField ok(g);
  CHECK_THROWS_AS(metric_from_potential(ws, flat, ok, 1.0, 1.0, &mismatched), parameter_error);
}

TEST_CASE("grid and metric construction are validated") {
  CHECK_THROWS_AS(TorusGrid(3, 16), parameter_error);
  CHECK_THROWS_AS(TorusGrid(1, 7), parameter_error);
  CHECK_THROWS_AS(TorusGrid(1, 6), parameter_error);

  TorusGrid g(1, 8);
  std::vector<cplx> neg(g.node_count(), cplx(-1.0, 0.0));
  CHECK_THROWS_AS(MetricField(g, 1, std::move(neg)), positivity_loss);

  // A non-Hermitian input (large imaginary diagonal) must be rejected.
  TorusGrid g2(2, 8);
  std::vector<cplx> bad(g2.node_count() * 4, cplx(0.0, 0.0));
  for (std::size_t p = 0; p < g2.node_count(); ++p) {
    bad[4 * p + 0] = cplx(1.0, 0.5);
    bad[4 * p + 3] = cplx(1.0, 0.0);
  }
  CHECK_THROWS_AS(MetricField(g2, 2, std::move(bad)), parameter_error);
}
