#pragma once

#include <cmath>
#include <limits>

#include "krf/errors.hpp"

namespace krf {

// Cohomology bookkeeping for the normalised flow.  A class is stored as
// coefficients (a, b) in the basis { [omega_ref], -c1 }:
//   [omega] = a [omega_ref] + b (-c1),
// and the flow moves classes along
//   a(t) = e^{-t} a0,   b(t) = e^{-t} b0 + (1 - e^{-t}),
// i.e. an exponential slide from the initial class towards -c1.
struct KahlerClass {
  double a = 1.0;
  double b = 0.0;
};

// Two minimal cone models.
//   nef_canonical: -c1 is nef and independent of [omega_ref]; classes with
//     a > 0, b >= 0 are Kahler and the flow never leaves the cone.
//   toy_fano(kappa): c1 = kappa [omega_ref] with kappa > 0, so
//     [omega] = (a - kappa b) [omega_ref] and the slide hits the cone
//     boundary in finite time.
struct ConeModel {
  enum class Kind { nef_canonical, toy_fano };
  Kind kind = Kind::nef_canonical;
  double kappa = 1.0;

  static ConeModel nef_canonical_model() { return ConeModel{Kind::nef_canonical, 1.0}; }
  static ConeModel toy_fano(double kappa) {
    if (!(kappa > 0.0)) throw parameter_error("ConeModel: kappa must be positive");
    return ConeModel{Kind::toy_fano, kappa};
  }
};

inline KahlerClass evolve_class(const KahlerClass& c0, double t) {
  if (t < 0.0) throw parameter_error("evolve_class: t must be nonnegative");
  const double e = std::exp(-t);
  return {e * c0.a, e * c0.b + (1.0 - e)};
}

inline bool is_kahler(const KahlerClass& c, const ConeModel& model) {
  if (model.kind == ConeModel::Kind::nef_canonical) return c.a > 0.0 && c.b >= 0.0;
  return c.a - model.kappa * c.b > 0.0;
}

// First time the evolved class leaves the Kahler cone; +inf when it never
// does.  For toy_fano the coefficient of [omega_ref] is
//   e^{-t}(a0 - kappa b0 + kappa) - kappa,
// which vanishes at t = log((a0 - kappa b0 + kappa) / kappa).
inline double singular_time(const KahlerClass& c0, const ConeModel& model) {
  if (!is_kahler(c0, model)) throw parameter_error("singular_time: initial class not Kahler");
  if (model.kind == ConeModel::Kind::nef_canonical)
    return std::numeric_limits<double>::infinity();
  const double k = model.kappa;
  return std::log((c0.a - k * c0.b + k) / k);
}

}  // namespace krf
