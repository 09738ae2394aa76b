#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "isslyap/errors.hpp"

namespace isslyap::quadrature {

struct Result {
  double value = 0.0;
  double error = 0.0;  // quadrature estimate plus tail bound
};

struct DecayingOptions {
  double rel_tol = 1e-12;  // tighter values sit below the K31 rounding floor and never converge
  unsigned max_depth = 15;
  // e^{-2 rate_min T*} below this decides the truncation point T*.
  double tail_threshold = 1e-16;
  // Integrable t^{-s} singularity at 0 (s < 1): first panel uses tanh-sinh.
  bool singular_at_zero = false;
};

/// Integrates f over [0, inf) for integrands decaying like e^{-2 rate t} with
/// rates in [rate_min, rate_max].
///
/// [0, T*] is split into panels [0, 1/rate_max], then doubling lengths up to
/// T*, each handled by adaptive Gauss-Kronrod (G15/K31). Past T* the integrand
/// is bounded by f(T*) e^{-2 rate_min (t - T*)}, whose integral is folded into
/// the error estimate rather than the value.
inline Result integrate_decaying(const std::function<double(double)>& f, double rate_min, double rate_max,
                                 const DecayingOptions& opts = {}) {
  if (!(rate_min > 0.0) || !(rate_max >= rate_min)) {
    throw InvalidArgument("integrate_decaying: need 0 < rate_min <= rate_max");
  }
  const double t_end = -std::log(opts.tail_threshold) / (2.0 * rate_min);
  std::vector<double> breaks{0.0};
  double t = std::min(1.0 / rate_max, t_end);
  while (t < t_end) {
    breaks.push_back(t);
    t *= 2.0;
  }
  breaks.push_back(t_end);

  using boost::math::quadrature::gauss_kronrod;
  Result out;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i];
    const double b = breaks[i + 1];
    double err = 0.0;
    double piece = 0.0;
    if (i == 0 && opts.singular_at_zero) {
      boost::math::quadrature::tanh_sinh<double> ts;
      double l1 = 0.0;
      piece = ts.integrate(f, a, b, opts.rel_tol, &err, &l1);
    } else {
      piece = gauss_kronrod<double, 31>::integrate(f, a, b, opts.max_depth, opts.rel_tol, &err);
    }
    out.value += piece;
    out.error += err;
  }
  out.error += std::abs(f(t_end)) / (2.0 * rate_min);
  return out;
}

/// Plain adaptive Gauss-Kronrod on a finite interval.
inline Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-12,
                        unsigned max_depth = 15) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel_tol, &err);
  return {v, err};
}

}  // namespace isslyap::quadrature
