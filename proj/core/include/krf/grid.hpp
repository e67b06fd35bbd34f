#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "krf/errors.hpp"

namespace krf {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Uniform periodic grid on [0, 2*pi)^{2n}, viewed as the real torus underlying
// C^n / (Z + iZ)^n.  Real coordinates are ordered (x_1, y_1[, x_2, y_2]) with
// z_j = x_j + i y_j.  Nodes are flattened row-major with the last real
// dimension fastest, matching the FFTW layout used by SpectralWorkspace.
struct TorusGrid {
  int n = 1;  // complex dimension, 1 or 2
  int N = 8;  // nodes per real direction, even, >= 8

  TorusGrid() = default;
  TorusGrid(int n_, int N_) : n(n_), N(N_) {
    if (n < 1 || n > 2) throw parameter_error("TorusGrid: complex dimension must be 1 or 2");
    if (N < 8 || N % 2 != 0) throw parameter_error("TorusGrid: N must be even and >= 8");
  }

  int rdim() const { return 2 * n; }
  double spacing() const { return kTwoPi / N; }

  std::size_t node_count() const {
    std::size_t m = 1;
    for (int d = 0; d < rdim(); ++d) m *= static_cast<std::size_t>(N);
    return m;
  }

  // Integer lattice coordinates of a flattened node index, slowest first.
  std::array<int, 4> unflatten(std::size_t idx) const {
    std::array<int, 4> k{0, 0, 0, 0};
    for (int d = rdim() - 1; d >= 0; --d) {
      k[d] = static_cast<int>(idx % N);
      idx /= N;
    }
    return k;
  }

  // Real coordinate of node idx along real dimension d.
  double coord(std::size_t idx, int d) const { return spacing() * unflatten(idx)[d]; }

  bool operator==(const TorusGrid& o) const { return n == o.n && N == o.N; }
  bool operator!=(const TorusGrid& o) const { return !(*this == o); }
};

// Real scalar samples over a grid.
struct ScalarField {
  TorusGrid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const TorusGrid& g, double fill = 0.0)
      : grid(g), values(g.node_count(), fill) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

// Complex scalar samples over a grid.
struct ComplexField {
  TorusGrid grid;
  std::vector<cplx> values;

  ComplexField() = default;
  explicit ComplexField(const TorusGrid& g, cplx fill = cplx(0.0, 0.0))
      : grid(g), values(g.node_count(), fill) {}

  std::size_t size() const { return values.size(); }
  cplx& operator[](std::size_t i) { return values[i]; }
  cplx operator[](std::size_t i) const { return values[i]; }
};

// --- tiny Hermitian linear algebra -----------------------------------------
//
// All metrics here are 1x1 or 2x2 Hermitian matrices per node, so every
// eigenvalue/determinant/inverse has an exact closed form.  Matrices are
// stored row-major, m[i*n + j] = g_{i jbar}; Hermitian means m[j*n+i] ==
// conj(m[i*n+j]) with real diagonal.

inline double herm_det(const cplx* m, int n) {
  if (n == 1) return m[0].real();
  return m[0].real() * m[3].real() - std::norm(m[1]);
}

inline void herm_inverse(const cplx* m, int n, cplx* out) {
  if (n == 1) {
    out[0] = 1.0 / m[0].real();
    return;
  }
  const double det = herm_det(m, 2);
  out[0] = m[3].real() / det;
  out[1] = -m[1] / det;
  out[2] = -m[2] / det;
  out[3] = m[0].real() / det;
}

// Smallest and largest eigenvalue.
inline std::array<double, 2> herm_eig_bounds(const cplx* m, int n) {
  if (n == 1) return {m[0].real(), m[0].real()};
  const double a = m[0].real(), c = m[3].real();
  const double h = 0.5 * (a + c);
  const double r = std::sqrt(0.25 * (a - c) * (a - c) + std::norm(m[1]));
  return {h - r, h + r};
}

// tr(b^{-1} a) for Hermitian a, b (b positive definite).  Real by symmetry.
inline double herm_trace_ratio(const cplx* a, const cplx* b, int n) {
  if (n == 1) return a[0].real() / b[0].real();
  const double det = herm_det(b, 2);
  return (b[3].real() * a[0].real() + b[0].real() * a[3].real() -
          2.0 * (b[1] * std::conj(a[1])).real()) /
         det;
}

// Generalized eigenvalue bounds of the pencil (a, b): the extremes of mu with
// det(a - mu b) = 0.  For n <= 2 these follow from trace and determinant of
// b^{-1} a, both real for Hermitian a and positive definite b.
inline std::array<double, 2> herm_gen_eig_bounds(const cplx* a, const cplx* b, int n) {
  if (n == 1) return {a[0].real() / b[0].real(), a[0].real() / b[0].real()};
  const double tr = herm_trace_ratio(a, b, 2);
  const double det = herm_det(a, 2) / herm_det(b, 2);
  double disc = 0.25 * tr * tr - det;
  if (disc < 0.0) disc = 0.0;  // round-off; the pencil spectrum is real
  const double r = std::sqrt(disc);
  return {0.5 * tr - r, 0.5 * tr + r};
}

// --- Hermitian matrix fields ------------------------------------------------

// Per-node Hermitian n x n matrix field.  Hermitian symmetry is enforced on
// construction (upper triangle wins) and preserved by the arithmetic helpers,
// so downstream code may rely on it exactly.
class HermitianField {
 public:
  HermitianField() = default;
  HermitianField(const TorusGrid& g, int n) : grid_(g), n_(n) {
    if (n != g.n) throw parameter_error("HermitianField: matrix dimension must equal grid.n");
    data_.assign(g.node_count() * static_cast<std::size_t>(n) * n, cplx(0.0, 0.0));
  }
  HermitianField(const TorusGrid& g, int n, std::vector<cplx> data)
      : grid_(g), n_(n), data_(std::move(data)) {
    if (n != g.n) throw parameter_error("HermitianField: matrix dimension must equal grid.n");
    if (data_.size() != g.node_count() * static_cast<std::size_t>(n) * n)
      throw parameter_error("HermitianField: data size mismatch");
    hermitize();
  }

  const TorusGrid& grid() const { return grid_; }
  int n() const { return n_; }
  std::size_t nodes() const { return grid_.node_count(); }
  int entries() const { return n_ * n_; }

  cplx* at(std::size_t node) { return data_.data() + node * entries(); }
  const cplx* at(std::size_t node) const { return data_.data() + node * entries(); }
  std::vector<cplx>& raw() { return data_; }
  const std::vector<cplx>& raw() const { return data_; }

  // Largest deviation |m - m^H| before hermitize() snapped symmetry; useful
  // as a build-quality diagnostic.
  double hermitian_defect() const { return defect_; }

  // Pointwise a*this + b*other (grids must match).
  HermitianField axpy(double a, double b, const HermitianField& other) const {
    if (grid_ != other.grid_) throw parameter_error("HermitianField: grid mismatch");
    HermitianField out(grid_, n_);
    for (std::size_t i = 0; i < data_.size(); ++i)
      out.data_[i] = a * data_[i] + b * other.data_[i];
    return out;
  }

  HermitianField scaled(double a) const {
    HermitianField out(grid_, n_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = a * data_[i];
    return out;
  }

  // Min/max eigenvalue over all nodes; also reports the node attaining the min.
  struct EigSummary {
    double min_eig;
    double max_eig;
    std::size_t argmin_node;
  };
  EigSummary eig_summary() const {
    EigSummary s{0.0, 0.0, 0};
    bool first = true;
    for (std::size_t p = 0; p < nodes(); ++p) {
      const auto eb = herm_eig_bounds(at(p), n_);
      if (first || eb[0] < s.min_eig) {
        s.min_eig = eb[0];
        s.argmin_node = p;
      }
      if (first || eb[1] > s.max_eig) s.max_eig = eb[1];
      first = false;
    }
    return s;
  }

  ScalarField det_field() const {
    ScalarField f(grid_);
    for (std::size_t p = 0; p < nodes(); ++p) f[p] = herm_det(at(p), n_);
    return f;
  }

 protected:
  void hermitize() {
    defect_ = 0.0;
    const std::size_t m = nodes();
    for (std::size_t p = 0; p < m; ++p) {
      cplx* g = at(p);
      for (int i = 0; i < n_; ++i) {
        defect_ = std::max(defect_, std::abs(g[i * n_ + i].imag()));
        g[i * n_ + i] = cplx(g[i * n_ + i].real(), 0.0);
        for (int j = i + 1; j < n_; ++j) {
          const cplx avg = 0.5 * (g[i * n_ + j] + std::conj(g[j * n_ + i]));
          defect_ = std::max(defect_, std::abs(g[i * n_ + j] - avg));
          g[i * n_ + j] = avg;
          g[j * n_ + i] = std::conj(avg);
        }
      }
    }
  }

  TorusGrid grid_;
  int n_ = 1;
  std::vector<cplx> data_;
  double defect_ = 0.0;
};

inline constexpr double kDefaultPositivityFloor = 1e-10;
inline constexpr double kHermitianTol = 1e-12;

// A Kahler metric sampled on the grid: Hermitian and positive definite
// (minimum eigenvalue above the floor) at every node.  Construction validates
// both; instances are immutable snapshots thereafter.
class MetricField : public HermitianField {
 public:
  MetricField() = default;
  MetricField(const TorusGrid& g, int n, std::vector<cplx> data,
              double positivity_floor = kDefaultPositivityFloor)
      : HermitianField(g, n, std::move(data)) {
    if (defect_ > kHermitianTol)
      throw parameter_error("MetricField: input exceeds Hermitian tolerance");
    const auto s = eig_summary();
    min_eig_ = s.min_eig;
    max_eig_ = s.max_eig;
    if (!(s.min_eig > positivity_floor))
      throw positivity_loss("MetricField: not positive definite", s.argmin_node, s.min_eig);
  }

  static MetricField flat(const TorusGrid& g, double scale = 1.0) {
    std::vector<cplx> d(g.node_count() * static_cast<std::size_t>(g.n) * g.n, cplx(0.0, 0.0));
    const int n = g.n;
    for (std::size_t p = 0; p < g.node_count(); ++p)
      for (int i = 0; i < n; ++i) d[p * n * n + i * n + i] = scale;
    return MetricField(g, n, std::move(d));
  }

  double min_eig() const { return min_eig_; }
  double max_eig() const { return max_eig_; }

  MetricField scaled_metric(double c) const {
    if (!(c > 0.0)) throw parameter_error("MetricField: scale must be positive");
    return MetricField(grid_, n_, scaled(c).raw());
  }

 private:
  double min_eig_ = 0.0;
  double max_eig_ = 0.0;
};

}  // namespace krf
