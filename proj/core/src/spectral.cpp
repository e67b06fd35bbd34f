#include "krf/spectral.hpp"

#include <fftw3.h>

#include <mutex>

namespace krf {

namespace {
// FFTW's planner mutates global state; serialize plan creation/destruction so
// independent workspaces can be built from different threads.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

SpectralWorkspace::SpectralWorkspace(const TorusGrid& grid) : grid_(grid) {
  const std::size_t m = grid_.node_count();
  buf_a_.assign(m, cplx(0.0, 0.0));
  buf_b_.assign(m, cplx(0.0, 0.0));

  int dims[4] = {grid_.N, grid_.N, grid_.N, grid_.N};
  auto* a = reinterpret_cast<fftw_complex*>(buf_a_.data());
  auto* b = reinterpret_cast<fftw_complex*>(buf_b_.data());

  std::lock_guard<std::mutex> lock(planner_mutex());
  // FFTW_ESTIMATE keeps planning deterministic (no timing-based algorithm
  // choice), which the byte-reproducibility guarantees depend on.
  plan_fwd_ = fftw_plan_dft(grid_.rdim(), dims, a, b, FFTW_FORWARD, FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft(grid_.rdim(), dims, a, b, FFTW_BACKWARD, FFTW_ESTIMATE);
}

SpectralWorkspace::~SpectralWorkspace() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_inv_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

// Both entry points stage through the planned buffers (buf_a_ -> buf_b_), so
// plans only ever execute on the arrays they were created with and caller
// buffers need no particular alignment.
void SpectralWorkspace::forward(const cplx* in, cplx* out) {
  const std::size_t m = grid_.node_count();
  if (in != buf_a_.data())
    for (std::size_t i = 0; i < m; ++i) buf_a_[i] = in[i];
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  if (out != buf_b_.data())
    for (std::size_t i = 0; i < m; ++i) out[i] = buf_b_[i];
}

void SpectralWorkspace::inverse(const cplx* in, cplx* out) {
  const std::size_t m = grid_.node_count();
  if (in != buf_a_.data())
    for (std::size_t i = 0; i < m; ++i) buf_a_[i] = in[i];
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = buf_b_[i] * inv_m;
}

std::vector<cplx> SpectralWorkspace::forward(const ScalarField& f) {
  if (f.grid != grid_) throw parameter_error("SpectralWorkspace: grid mismatch");
  const std::size_t m = grid_.node_count();
  for (std::size_t i = 0; i < m; ++i) buf_a_[i] = f[i];
  std::vector<cplx> out(m);
  forward(buf_a_.data(), out.data());
  return out;
}

cplx SpectralWorkspace::first_symbol(std::size_t cidx, int d) const {
  const auto k = grid_.unflatten(cidx);
  const int kk = signed_wavenumber(k[d]);
  if (kk == -grid_.N / 2) return cplx(0.0, 0.0);
  return cplx(0.0, static_cast<double>(kk));
}

cplx SpectralWorkspace::z_symbol(std::size_t cidx, int j) const {
  // d/dz = (d/dx - i d/dy)/2 acting on e^{i(kx x + ky y)}:
  //   (i kx - i * i ky)/2 = (i kx + ky)/2.
  const cplx sx = first_symbol(cidx, 2 * j);
  const cplx sy = first_symbol(cidx, 2 * j + 1);
  return 0.5 * (sx - cplx(0.0, 1.0) * sy);
}

double SpectralWorkspace::flat_symbol(std::size_t cidx) const {
  double s = 0.0;
  for (int j = 0; j < grid_.n; ++j) s += std::norm(z_symbol(cidx, j));
  return s;
}

void SpectralWorkspace::apply_symbol_inverse(const std::vector<cplx>& coeffs,
                                             const std::vector<cplx>& symbol, cplx* out) {
  const std::size_t m = grid_.node_count();
  for (std::size_t i = 0; i < m; ++i) buf_a_[i] = coeffs[i] * symbol[i];
  inverse(buf_a_.data(), out);
}

ComplexField SpectralWorkspace::derivative(const ComplexField& f, int direction) {
  if (f.grid != grid_) throw parameter_error("SpectralWorkspace: grid mismatch");
  if (direction < 0 || direction >= grid_.rdim())
    throw parameter_error("spectral_derivative: direction out of range");
  const std::size_t m = grid_.node_count();
  forward(f.values.data(), buf_b_.data());
  for (std::size_t i = 0; i < m; ++i) buf_a_[i] = buf_b_[i] * first_symbol(i, direction);
  ComplexField out(grid_);
  inverse(buf_a_.data(), out.values.data());
  return out;
}

ScalarField SpectralWorkspace::derivative(const ScalarField& f, int direction) {
  if (f.grid != grid_) throw parameter_error("SpectralWorkspace: grid mismatch");
  if (direction < 0 || direction >= grid_.rdim())
    throw parameter_error("spectral_derivative: direction out of range");
  const std::size_t m = grid_.node_count();
  for (std::size_t i = 0; i < m; ++i) buf_a_[i] = f[i];
  forward(buf_a_.data(), buf_b_.data());
  for (std::size_t i = 0; i < m; ++i) buf_a_[i] = buf_b_[i] * first_symbol(i, direction);
  inverse(buf_a_.data(), buf_b_.data());
  ScalarField out(grid_);
  for (std::size_t i = 0; i < m; ++i) out[i] = buf_b_[i].real();
  return out;
}

ComplexField SpectralWorkspace::deriv_z(const ComplexField& f, int j) {
  if (f.grid != grid_) throw parameter_error("SpectralWorkspace: grid mismatch");
  if (j < 0 || j >= grid_.n) throw parameter_error("deriv_z: index out of range");
  const std::size_t m = grid_.node_count();
  forward(f.values.data(), buf_b_.data());
  for (std::size_t i = 0; i < m; ++i) buf_a_[i] = buf_b_[i] * z_symbol(i, j);
  ComplexField out(grid_);
  inverse(buf_a_.data(), out.values.data());
  return out;
}

ComplexField SpectralWorkspace::deriv_zbar(const ComplexField& f, int j) {
  if (f.grid != grid_) throw parameter_error("SpectralWorkspace: grid mismatch");
  if (j < 0 || j >= grid_.n) throw parameter_error("deriv_zbar: index out of range");
  const std::size_t m = grid_.node_count();
  forward(f.values.data(), buf_b_.data());
  // zbar-symbol = -conj(z-symbol) entrywise on each mode.
  for (std::size_t i = 0; i < m; ++i) buf_a_[i] = buf_b_[i] * (-std::conj(z_symbol(i, j)));
  ComplexField out(grid_);
  inverse(buf_a_.data(), out.values.data());
  return out;
}

ComplexField SpectralWorkspace::deriv_z(const ScalarField& f, int j) {
  ComplexField c(f.grid);
  const std::size_t m = f.size();
  for (std::size_t i = 0; i < m; ++i) c[i] = f[i];
  return deriv_z(c, j);
}

HermitianField SpectralWorkspace::complex_hessian(const ScalarField& f) {
  return complex_hessian_from_coeffs(forward(f));
}

HermitianField SpectralWorkspace::complex_hessian_from_coeffs(const std::vector<cplx>& fhat) {
  if (fhat.size() != grid_.node_count())
    throw parameter_error("complex_hessian: coefficient size mismatch");
  const std::size_t m = grid_.node_count();
  const int n = grid_.n;
  std::vector<cplx> data(m * static_cast<std::size_t>(n) * n);
  std::vector<cplx> symbol(m);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      // d/dz_i d/dzbar_j symbol: zeta_i(k) * (-conj(zeta_j(k))).
      for (std::size_t c = 0; c < m; ++c)
        symbol[c] = -z_symbol(c, i) * std::conj(z_symbol(c, j));
      apply_symbol_inverse(fhat, symbol, buf_b_.data());
      if (i == j) {
        for (std::size_t p = 0; p < m; ++p)
          data[p * n * n + i * n + i] = cplx(buf_b_[p].real(), 0.0);
      } else {
        for (std::size_t p = 0; p < m; ++p) {
          data[p * n * n + i * n + j] = buf_b_[p];
          data[p * n * n + j * n + i] = std::conj(buf_b_[p]);
        }
      }
    }
  }
  return HermitianField(grid_, n, std::move(data));
}

ScalarField spectral_derivative(SpectralWorkspace& ws, const ScalarField& f, int direction) {
  return ws.derivative(f, direction);
}

}  // namespace krf
