#pragma once

#include <memory>
#include <vector>

#include "krf/grid.hpp"

namespace krf {

// Trigonometric (Fourier) differentiation on a TorusGrid, backed by FFTW.
//
// Conventions, fixed once here and relied on everywhere:
//   * d/dz_j    = (d/dx_j - i d/dy_j) / 2
//   * d/dzbar_j = (d/dx_j + i d/dy_j) / 2
// so the complex Hessian of a potential phi has entries
//   H_{j kbar} = d^2 phi / dz_j dzbar_k,
// and for phi depending on one real variable x the (1,1) entry is
// phi_xx / 4.  Integer wavenumbers are mapped to [-N/2, N/2); the Nyquist
// mode k = N/2 is annihilated by every first-derivative symbol (it carries no
// usable sign information), which keeps derivatives of real fields real and
// Hessians exactly Hermitian.  On fields band-limited below N/2 all
// derivatives here are exact to round-off.
//
// A workspace owns FFTW plans and scratch buffers for one grid; methods are
// not reentrant on the same instance, but independent instances may be used
// from different threads (plan creation is serialized internally).
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(const TorusGrid& grid);
  ~SpectralWorkspace();
  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  const TorusGrid& grid() const { return grid_; }

  // Forward / inverse complex DFT between node space and coefficient space.
  // Coefficients are unnormalized on forward; inverse applies the 1/M factor.
  void forward(const cplx* in, cplx* out);
  void inverse(const cplx* in, cplx* out);

  std::vector<cplx> forward(const ScalarField& f);

  // Partial derivative along real dimension `direction` (0-based, < 2n).
  ScalarField derivative(const ScalarField& f, int direction);
  ComplexField derivative(const ComplexField& f, int direction);

  // Holomorphic / antiholomorphic derivatives, j in [0, n).
  ComplexField deriv_z(const ComplexField& f, int j);
  ComplexField deriv_zbar(const ComplexField& f, int j);
  ComplexField deriv_z(const ScalarField& f, int j);

  // Complex Hessian  H_{j kbar} = d^2 f / dz_j dzbar_k  of a real potential,
  // Hermitian by construction (upper triangle computed, mirror conjugated).
  HermitianField complex_hessian(const ScalarField& f);

  // Same, but from precomputed Fourier coefficients of the potential.
  HermitianField complex_hessian_from_coeffs(const std::vector<cplx>& fhat);

  // Signed integer wavenumber of lattice index k_idx (Nyquist => -N/2).
  int signed_wavenumber(int k_idx) const {
    return k_idx <= grid_.N / 2 ? k_idx : k_idx - grid_.N;
  }

  // First-derivative symbol along real dimension d at flattened coefficient
  // index `cidx` (i * k with Nyquist zeroed).
  cplx first_symbol(std::size_t cidx, int d) const;

  // Symbol of d/dz_j (Nyquist zeroed in both real directions).
  cplx z_symbol(std::size_t cidx, int j) const;

  // Flat Laplacian symbol sum_j |zeta_j|^2 = |k|^2 / 4 >= 0 (sign flipped):
  // multiplier such that hessian-trace of e^{ikx} is -flat_symbol * e^{ikx}.
  double flat_symbol(std::size_t cidx) const;

 private:
  void apply_symbol_inverse(const std::vector<cplx>& coeffs,
                            const std::vector<cplx>& symbol, cplx* out);

  TorusGrid grid_;
  void* plan_fwd_ = nullptr;  // fftw_plan, hidden to keep fftw3.h out of headers
  void* plan_inv_ = nullptr;
  std::vector<cplx> buf_a_;
  std::vector<cplx> buf_b_;
};

// Free-function form used throughout the geometry layer: derivative along a
// real coordinate direction, spectral accuracy, periodic boundary.
ScalarField spectral_derivative(SpectralWorkspace& ws, const ScalarField& f, int direction);

}  // namespace krf
