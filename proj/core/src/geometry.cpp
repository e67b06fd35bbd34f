#include "krf/geometry.hpp"

#include <cfloat>
#include <cmath>
#include <stdexcept>

namespace krf {

namespace {

// Fourier coefficients of every metric entry, entry-major.
std::vector<std::vector<cplx>> entry_coeffs(SpectralWorkspace& ws, const MetricField& g) {
  const std::size_t m = g.nodes();
  const int n = g.n();
  std::vector<std::vector<cplx>> coeffs(static_cast<std::size_t>(n) * n);
  std::vector<cplx> scratch(m);
  for (int e = 0; e < n * n; ++e) {
    for (std::size_t p = 0; p < m; ++p) scratch[p] = g.at(p)[e];
    coeffs[e].resize(m);
    ws.forward(scratch.data(), coeffs[e].data());
  }
  return coeffs;
}

// dg[i][e][node] = d/dz_i of metric entry e.
std::vector<std::vector<std::vector<cplx>>> holomorphic_derivatives(
    SpectralWorkspace& ws, const MetricField& g,
    const std::vector<std::vector<cplx>>& coeffs) {
  const std::size_t m = g.nodes();
  const int n = g.n();
  std::vector<std::vector<std::vector<cplx>>> dg(n);
  std::vector<cplx> work(m);
  for (int i = 0; i < n; ++i) {
    dg[i].resize(static_cast<std::size_t>(n) * n);
    for (int e = 0; e < n * n; ++e) {
      for (std::size_t c = 0; c < m; ++c) work[c] = coeffs[e][c] * ws.z_symbol(c, i);
      dg[i][e].resize(m);
      ws.inverse(work.data(), dg[i][e].data());
    }
  }
  return dg;
}

// Christoffel data from precomputed holomorphic derivatives.
std::vector<cplx> christoffel_data(const MetricField& g,
                                   const std::vector<std::vector<std::vector<cplx>>>& dg) {
  const std::size_t m = g.nodes();
  const int n = g.n();
  std::vector<cplx> gamma(m * static_cast<std::size_t>(n) * n * n);
  std::array<cplx, 4> ginv;
  for (std::size_t p = 0; p < m; ++p) {
    herm_inverse(g.at(p), n, ginv.data());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          cplx s(0.0, 0.0);
          // Gamma^k_{ij} = g^{lbar k} d_i g_{j lbar}
          for (int l = 0; l < n; ++l) s += ginv[l * n + k] * dg[i][j * n + l][p];
          gamma[((p * n + i) * n + j) * n + k] = s;
        }
  }
  return gamma;
}

}  // namespace

MetricField metric_from_potential(SpectralWorkspace& ws, const MetricField& reference,
                                  const ScalarField& phi, double a, double b,
                                  const HermitianField* second_form, double positivity_floor) {
  if (phi.grid != reference.grid())
    throw parameter_error("metric_from_potential: grid mismatch");
  HermitianField h = ws.complex_hessian(phi);
  HermitianField sum = reference.axpy(a, 1.0, h);
  if (second_form != nullptr) {
    if (second_form->grid() != reference.grid())
      throw parameter_error("metric_from_potential: second_form grid mismatch");
    sum = sum.axpy(1.0, b, *second_form);
  }
  return MetricField(reference.grid(), reference.n(), std::move(sum.raw()), positivity_floor);
}

ChristoffelField christoffel(SpectralWorkspace& ws, const MetricField& g) {
  const auto coeffs = entry_coeffs(ws, g);
  const auto dg = holomorphic_derivatives(ws, g, coeffs);
  ChristoffelField out;
  out.grid = g.grid();
  out.n = g.n();
  out.gamma = christoffel_data(g, dg);
  return out;
}

double curvature_noise_floor(const TorusGrid& grid, double max_eig, double min_eig) {
  const double half_n = 0.5 * grid.N;
  return 64.0 * DBL_EPSILON * half_n * half_n * max_eig / (min_eig * min_eig);
}

CurvatureField curvature(SpectralWorkspace& ws, const MetricField& g) {
  const std::size_t m = g.nodes();
  const int n = g.n();
  const auto coeffs = entry_coeffs(ws, g);
  const auto dg = holomorphic_derivatives(ws, g, coeffs);

  // hess[i][j][e] = d_i d_jbar of entry e; only i <= j transformed, the rest
  // follows from d_i d_jbar g_{k lbar} = conj(d_j d_ibar g_{l kbar}).
  std::vector<std::vector<std::vector<std::vector<cplx>>>> hess(
      n, std::vector<std::vector<std::vector<cplx>>>(n));
  {
    std::vector<cplx> work(m), res(m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        hess[i][j].resize(static_cast<std::size_t>(n) * n);
        if (i > j) continue;
        for (int e = 0; e < n * n; ++e) {
          for (std::size_t c = 0; c < m; ++c)
            work[c] = -coeffs[e][c] * ws.z_symbol(c, i) * std::conj(ws.z_symbol(c, j));
          hess[i][j][e].resize(m);
          ws.inverse(work.data(), hess[i][j][e].data());
        }
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            auto& dst = hess[i][j][k * n + l];
            const auto& src = hess[j][i][l * n + k];
            dst.resize(m);
            for (std::size_t p = 0; p < m; ++p) dst[p] = std::conj(src[p]);
          }
  }

  CurvatureField out;
  out.grid = g.grid();
  out.n = n;
  out.rm.resize(m * static_cast<std::size_t>(n) * n * n * n);
  out.ric.resize(m * static_cast<std::size_t>(n) * n);
  out.scalar = ScalarField(g.grid());
  out.rm_norm = ScalarField(g.grid());

  std::array<cplx, 4> ginv;
  std::array<cplx, 16> rm_node;
  for (std::size_t p = 0; p < m; ++p) {
    herm_inverse(g.at(p), n, ginv.data());

    // R_{i jbar k lbar} = -d_i d_jbar g_{k lbar}
    //                     + g^{qbar q'} (d_i g_{k qbar}) conj(d_j g_{l q'bar})
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            cplx r = -hess[i][j][k * n + l][p];
            for (int q = 0; q < n; ++q)
              for (int qp = 0; qp < n; ++qp)
                r += ginv[q * n + qp] * dg[i][k * n + q][p] * std::conj(dg[j][l * n + qp][p]);
            rm_node[((i * n + j) * n + k) * n + l] = r;
          }

    cplx* rmp = out.rm.data() + p * static_cast<std::size_t>(n) * n * n * n;
    for (int e = 0; e < n * n * n * n; ++e) rmp[e] = rm_node[e];

    // Ricci: ric_{i jbar} = g^{lbar k} R_{i jbar k lbar}
    cplx* ricp = out.ric.data() + p * static_cast<std::size_t>(n) * n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        cplx s(0.0, 0.0);
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) s += ginv[l * n + k] * rm_node[((i * n + j) * n + k) * n + l];
        ricp[i * n + j] = s;
      }

    // Scalar curvature and |Rm|^2 with every index raised by g^{-1}.
    cplx sc(0.0, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) sc += ginv[j * n + i] * ricp[i * n + j];
    out.scalar[p] = sc.real();

    cplx nrm(0.0, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            const cplx rijkl = rm_node[((i * n + j) * n + k) * n + l];
            if (rijkl == cplx(0.0, 0.0)) continue;
            for (int pp = 0; pp < n; ++pp)
              for (int q = 0; q < n; ++q)
                for (int r = 0; r < n; ++r)
                  for (int s = 0; s < n; ++s) {
                    nrm += rijkl * std::conj(rm_node[((pp * n + q) * n + r) * n + s]) *
                           ginv[pp * n + i] * ginv[j * n + q] * ginv[r * n + k] * ginv[l * n + s];
                  }
          }
    out.rm_norm[p] = std::sqrt(std::max(0.0, nrm.real()));
    if (out.rm_norm[p] > out.sup_rm_norm) out.sup_rm_norm = out.rm_norm[p];
  }

  out.noise_floor = curvature_noise_floor(g.grid(), g.max_eig(), g.min_eig());
  return out;
}

ScalarField trace_field(const MetricField& base, const MetricField& other) {
  if (base.grid() != other.grid()) throw parameter_error("trace_field: grid mismatch");
  const std::size_t m = base.nodes();
  const int n = base.n();
  ScalarField out(base.grid());
  for (std::size_t p = 0; p < m; ++p) {
    const double tr = herm_trace_ratio(other.at(p), base.at(p), n);
    const double det_ratio = herm_det(other.at(p), n) / herm_det(base.at(p), n);
    const double amgm = n * std::pow(det_ratio, 1.0 / n);
    if (tr < amgm * (1.0 - 1e-9))
      throw std::logic_error("trace_field: arithmetic-geometric mean inequality violated");
    out[p] = tr;
  }
  return out;
}

std::pair<double, double> eigen_ratio(const MetricField& a, const MetricField& b) {
  if (a.grid() != b.grid()) throw parameter_error("eigen_ratio: grid mismatch");
  const std::size_t m = a.nodes();
  const int n = a.n();
  double lo = 0.0, hi = 0.0;
  for (std::size_t p = 0; p < m; ++p) {
    const auto eb = herm_gen_eig_bounds(a.at(p), b.at(p), n);
    if (p == 0 || eb[0] < lo) lo = eb[0];
    if (p == 0 || eb[1] > hi) hi = eb[1];
  }
  return {lo, hi};
}

ConnectionDeviation psi_and_s(SpectralWorkspace& ws, const MetricField& g,
                              const MetricField& g_ref) {
  if (g.grid() != g_ref.grid()) throw parameter_error("psi_and_s: grid mismatch");
  const std::size_t m = g.nodes();
  const int n = g.n();

  const auto coeffs_g = entry_coeffs(ws, g);
  const auto dg_g = holomorphic_derivatives(ws, g, coeffs_g);
  const auto gamma_g = christoffel_data(g, dg_g);
  const auto coeffs_r = entry_coeffs(ws, g_ref);
  const auto dg_r = holomorphic_derivatives(ws, g_ref, coeffs_r);
  const auto gamma_r = christoffel_data(g_ref, dg_r);

  ConnectionDeviation out;
  out.grid = g.grid();
  out.n = n;
  out.psi.resize(gamma_g.size());
  for (std::size_t i = 0; i < gamma_g.size(); ++i) out.psi[i] = gamma_g[i] - gamma_r[i];
  out.s_field = ScalarField(g.grid());

  // S = g^{jbar i} g^{lbar k} g_{d ebar} Psi^d_{ik} conj(Psi^e_{jl}); a
  // positive Hermitian form in Psi, so S >= 0 up to round-off (clamped).
  std::array<cplx, 4> ginv;
  for (std::size_t p = 0; p < m; ++p) {
    herm_inverse(g.at(p), n, ginv.data());
    const cplx* gp = g.at(p);
    const cplx* psi = out.psi.data() + p * static_cast<std::size_t>(n) * n * n;
    cplx s(0.0, 0.0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int d = 0; d < n; ++d) {
          const cplx v = psi[(i * n + k) * n + d];
          if (v == cplx(0.0, 0.0)) continue;
          for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l)
              for (int e = 0; e < n; ++e)
                s += v * std::conj(psi[(j * n + l) * n + e]) * ginv[j * n + i] *
                     ginv[l * n + k] * gp[d * n + e];
        }
    out.s_field[p] = std::max(0.0, s.real());
    if (out.s_field[p] > out.sup_s) out.sup_s = out.s_field[p];
  }
  return out;
}

}  // namespace krf
