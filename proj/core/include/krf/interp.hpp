#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "krf/errors.hpp"

namespace krf {

// Monotone cubic (Fritsch-Carlson) interpolation.  Shape-preserving: never
// overshoots the data, which matters when interpolating metric entries that
// carry positivity constraints.  Slopes depend only on adjacent secants, so
// besides the precomputed-table class there is a local evaluator that works
// straight off a time grid without building tables (used for per-node metric
// interpolation where one table per node would be wasteful).

namespace detail {

// Interior slope from the two adjacent secants (weighted harmonic mean), zero
// at local extrema.
inline double fc_interior_slope(double h0, double h1, double s0, double s1) {
  if (s0 * s1 <= 0.0) return 0.0;
  const double w0 = 2.0 * h1 + h0;
  const double w1 = h1 + 2.0 * h0;
  return (w0 + w1) / (w0 / s0 + w1 / s1);
}

// One-sided endpoint slope (three-point formula, clamped for shape).
inline double fc_end_slope(double h0, double h1, double s0, double s1) {
  double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
  if (d * s0 <= 0.0) return 0.0;
  if (s0 * s1 <= 0.0 && std::abs(d) > 3.0 * std::abs(s0)) return 3.0 * s0;
  return d;
}

inline double hermite(double x0, double x1, double y0, double y1, double d0, double d1,
                      double x) {
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s, s3 = s2 * s;
  return y0 * (2.0 * s3 - 3.0 * s2 + 1.0) + h * d0 * (s3 - 2.0 * s2 + s) +
         y1 * (-2.0 * s3 + 3.0 * s2) + h * d1 * (s3 - s2);
}

}  // namespace detail

// Index of the interval [xs[i], xs[i+1]] containing x (strictly increasing
// xs); endpoints get a 1e-9 * span slack before a range error.
std::size_t locate_interval(const std::vector<double>& xs, double x);

class Pchip {
 public:
  Pchip() = default;
  Pchip(std::vector<double> xs, std::vector<double> ys);

  double operator()(double x) const;

  const std::vector<double>& xs() const { return xs_; }

 private:
  std::vector<double> xs_, ys_, ds_;
};

// Local evaluation: y(x) from the sampled series keyed by index getter, using
// only samples i-1..i+2 around the containing interval.
template <typename Getter>
double pchip_local(const std::vector<double>& ts, const Getter& y, double x) {
  const std::size_t i = locate_interval(ts, x);
  const double h1 = ts[i + 1] - ts[i];
  const double s1 = (y(i + 1) - y(i)) / h1;
  double d0, d1;
  if (i == 0) {
    if (ts.size() == 2) {
      d0 = d1 = s1;
    } else {
      const double h2 = ts[i + 2] - ts[i + 1];
      const double s2 = (y(i + 2) - y(i + 1)) / h2;
      d0 = detail::fc_end_slope(h1, h2, s1, s2);
      d1 = detail::fc_interior_slope(h1, h2, s1, s2);
    }
  } else if (i + 2 == ts.size()) {
    const double h0 = ts[i] - ts[i - 1];
    const double s0 = (y(i) - y(i - 1)) / h0;
    d0 = detail::fc_interior_slope(h0, h1, s0, s1);
    d1 = detail::fc_end_slope(h1, h0, s1, s0);
  } else {
    const double h0 = ts[i] - ts[i - 1];
    const double s0 = (y(i) - y(i - 1)) / h0;
    const double h2 = ts[i + 2] - ts[i + 1];
    const double s2 = (y(i + 2) - y(i + 1)) / h2;
    d0 = detail::fc_interior_slope(h0, h1, s0, s1);
    d1 = detail::fc_interior_slope(h1, h2, s1, s2);
  }
  return detail::hermite(ts[i], ts[i + 1], y(i), y(i + 1), d0, d1, x);
}

}  // namespace krf
