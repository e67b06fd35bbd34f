#pragma once

#include <array>
#include <cstddef>
#include <utility>

#include "krf/grid.hpp"
#include "krf/spectral.hpp"

namespace krf {

// Christoffel symbols of the Chern connection, Gamma^k_{ij} = g^{k lbar}
// d_i g_{j lbar}, stored per node as gamma[(i*n + j)*n + k], symmetric in
// (i, j) for Kahler metrics.
struct ChristoffelField {
  TorusGrid grid;
  int n = 1;
  std::vector<cplx> gamma;

  cplx at(std::size_t node, int i, int j, int k) const {
    const std::size_t nn = static_cast<std::size_t>(n);
    return gamma[((node * nn + i) * nn + j) * nn + k];
  }
};

// Full curvature data of a Kahler metric:
//   rm[(((i*n+j)*n+k)*n+l)] = R_{i jbar k lbar}
//                           = -d_i d_jbar g_{k lbar} + g^{qbar p} (d_i g_{k qbar}) (d_jbar g_{p ... })
// (see curvature() for the exact discrete formula), the Ricci contraction
// ric_{i jbar} = g^{lbar k} R_{i jbar k lbar}, the scalar curvature, the
// pointwise tensor norm |Rm|_g, and its sup together with a measurement
// floor: collapsing metrics amplify FFT round-off by roughly
// eps * (N/2)^2 * sup(g) / min-eig(g)^2, so values at or below `noise_floor`
// are not resolved by the discretization and should be treated as zero.
struct CurvatureField {
  TorusGrid grid;
  int n = 1;
  std::vector<cplx> rm;       // n^4 per node
  std::vector<cplx> ric;      // n^2 per node, Hermitian
  ScalarField scalar;         // scalar curvature R
  ScalarField rm_norm;        // per-node |Rm|_g
  double sup_rm_norm = 0.0;
  double noise_floor = 0.0;

  cplx rm_at(std::size_t node, int i, int j, int k, int l) const {
    const std::size_t nn = static_cast<std::size_t>(n);
    return rm[(((node * nn + i) * nn + j) * nn + k) * nn + l];
  }
  const cplx* ric_at(std::size_t node) const {
    return ric.data() + node * static_cast<std::size_t>(n) * n;
  }
};

// Difference of Chern connections of two metrics over the same grid,
// Psi^k_{ij} = Gamma^k_{ij}(g) - Gamma^k_{ij}(g_ref), with the scalar
//   S = |Psi|^2 contracted with g on lower indices and g_ref... see psi_and_s.
struct ConnectionDeviation {
  TorusGrid grid;
  int n = 1;
  std::vector<cplx> psi;  // same layout as ChristoffelField::gamma
  ScalarField s_field;    // pointwise S >= 0
  double sup_s = 0.0;
};

// omega = a * reference + b * second_form + i ddbar(phi), validated Hermitian
// positive definite.  second_form may be null (treated as zero).  Under the
// conventions in spectral.hpp, phi = eps cos(x) on an n=1 flat reference
// yields g = 1 - (eps/4) cos(x).
MetricField metric_from_potential(SpectralWorkspace& ws, const MetricField& reference,
                                  const ScalarField& phi, double a = 1.0, double b = 0.0,
                                  const HermitianField* second_form = nullptr,
                                  double positivity_floor = kDefaultPositivityFloor);

ChristoffelField christoffel(SpectralWorkspace& ws, const MetricField& g);

CurvatureField curvature(SpectralWorkspace& ws, const MetricField& g);

// Pointwise trace of `other` with respect to `base`, tr_base(other) =
// base^{jbar i} other_{i jbar}.  For positive definite pairs this is >= n *
// (det other / det base)^{1/n} (arithmetic-geometric mean), asserted here.
ScalarField trace_field(const MetricField& base, const MetricField& other);

// Extremes over all nodes of the generalized eigenvalues of `a` against `b`:
// the tightest constants (c_min, c_max) with c_min * b <= a <= c_max * b.
std::pair<double, double> eigen_ratio(const MetricField& a, const MetricField& b);

ConnectionDeviation psi_and_s(SpectralWorkspace& ws, const MetricField& g,
                              const MetricField& g_ref);

// Discretization floor for curvature magnitudes measured on g (see
// CurvatureField::noise_floor).
double curvature_noise_floor(const TorusGrid& grid, double max_eig, double min_eig);

}  // namespace krf
