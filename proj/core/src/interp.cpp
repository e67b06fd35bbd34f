#include "krf/interp.hpp"

#include <algorithm>
#include <cmath>

namespace krf {

std::size_t locate_interval(const std::vector<double>& xs, double x) {
  if (xs.size() < 2) throw parameter_error("interp: need at least two samples");
  const double slack = 1e-9 * (xs.back() - xs.front());
  if (x < xs.front() - slack || x > xs.back() + slack)
    throw range_error("interp: evaluation point outside sampled range");
  x = std::min(std::max(x, xs.front()), xs.back());
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = static_cast<std::size_t>(std::distance(xs.begin(), it));
  if (i > 0) --i;
  if (i + 1 >= xs.size()) i = xs.size() - 2;
  return i;
}

Pchip::Pchip(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  const std::size_t m = xs_.size();
  if (m < 2 || ys_.size() != m) throw parameter_error("Pchip: need matching series, size >= 2");
  for (std::size_t i = 0; i + 1 < m; ++i)
    if (!(xs_[i] < xs_[i + 1])) throw parameter_error("Pchip: abscissae must strictly increase");
  ds_.resize(m);
  if (m == 2) {
    ds_[0] = ds_[1] = (ys_[1] - ys_[0]) / (xs_[1] - xs_[0]);
    return;
  }
  std::vector<double> h(m - 1), s(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    h[i] = xs_[i + 1] - xs_[i];
    s[i] = (ys_[i + 1] - ys_[i]) / h[i];
  }
  ds_[0] = detail::fc_end_slope(h[0], h[1], s[0], s[1]);
  for (std::size_t i = 1; i + 1 < m; ++i)
    ds_[i] = detail::fc_interior_slope(h[i - 1], h[i], s[i - 1], s[i]);
  ds_[m - 1] = detail::fc_end_slope(h[m - 2], h[m - 3], s[m - 2], s[m - 3]);
}

double Pchip::operator()(double x) const {
  const std::size_t i = locate_interval(xs_, x);
  return detail::hermite(xs_[i], xs_[i + 1], ys_[i], ys_[i + 1], ds_[i], ds_[i + 1], x);
}

}  // namespace krf
