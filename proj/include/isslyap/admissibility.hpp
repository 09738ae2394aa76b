#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "isslyap/errors.hpp"
#include "isslyap/operator_core.hpp"

namespace isslyap {

enum class Verdict { bounded, diverging, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::bounded: return "bounded";
    case Verdict::diverging: return "diverging";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

// Thresholds turning an asymptotic statement into a finite-N verdict.
struct TrendThresholds {
  double slope = 0.05;  // log-log growth rate above which a sequence diverges
  double ratio = 1.02;  // final successive ratio below which it has settled
};

struct TrendFit {
  Verdict verdict = Verdict::inconclusive;
  double slope = 0.0;       // least-squares slope of log value against log N
  double tail_ratio = 1.0;  // value[last] / value[last-1]
};

/// Classifies a nondecreasing sequence value(N): bounded if the last step
/// changed it by at most the ratio threshold, diverging if the log-log
/// regression slope exceeds the slope threshold, inconclusive otherwise.
inline TrendFit classify_trend(std::span<const double> modes, std::span<const double> values,
                               const TrendThresholds& th = {}) {
  if (modes.size() != values.size()) throw InvalidArgument("classify_trend: length mismatch");
  if (modes.size() < 3) throw InvalidArgument("classify_trend: need at least 3 sweep points");
  TrendFit fit;
  const std::size_t n = values.size();
  if (values[n - 1] == 0.0) {
    fit.verdict = Verdict::bounded;
    return fit;
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i] > 0.0) {
      lx.push_back(std::log(modes[i]));
      ly.push_back(std::log(values[i]));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  }
  fit.tail_ratio = values[n - 2] > 0.0 ? values[n - 1] / values[n - 2] : std::numeric_limits<double>::infinity();
  if (fit.tail_ratio <= th.ratio && fit.tail_ratio >= 1.0 / th.ratio) {
    fit.verdict = Verdict::bounded;
  } else if (fit.slope > th.slope) {
    fit.verdict = Verdict::diverging;
  }
  return fit;
}

using SystemFamily = std::function<SpectralSystem(Index)>;

struct ScanPoint {
  Index modes = 0;
  double norm = 0.0;
};

/// Sweep of ||(-A)^{-gamma} B||_N: is B in L(U, X_{-gamma})?
struct OperatorClassReport {
  double gamma = 0.0;
  std::vector<ScanPoint> norms_by_modes;
  Verdict verdict = Verdict::inconclusive;
  double growth_exponent = 0.0;
  double tail_ratio = 1.0;
};

inline OperatorClassReport operator_class_scan(const SystemFamily& family, std::span<const Index> modes, double gamma,
                                               const TrendThresholds& th = {}) {
  if (!(gamma >= 0.0)) throw InvalidArgument("operator_class_scan: gamma must be >= 0");
  if (modes.size() < 3) throw InvalidArgument("operator_class_scan: need at least 3 sweep points");
  OperatorClassReport rep;
  rep.gamma = gamma;
  std::vector<double> xs, ys;
  for (Index n : modes) {
    const SpectralSystem sys = family(n);
    const double v = extrapolation_norm(sys, gamma, sys.input_coeffs());
    rep.norms_by_modes.push_back({n, v});
    xs.push_back(static_cast<double>(n));
    ys.push_back(v);
  }
  const TrendFit fit = classify_trend(xs, ys, th);
  rep.verdict = fit.verdict;
  rep.growth_exponent = fit.slope;
  rep.tail_ratio = fit.tail_ratio;
  return rep;
}

enum class InputExponent { one, two, infinity };

inline const char* to_string(InputExponent q) {
  switch (q) {
    case InputExponent::one: return "1";
    case InputExponent::two: return "2";
    case InputExponent::infinity: return "inf";
  }
  return "2";
}

inline InputExponent parse_input_exponent(std::string_view s) {
  if (s == "1") return InputExponent::one;
  if (s == "2") return InputExponent::two;
  if (s == "inf" || s == "infinity") return InputExponent::infinity;
  throw InvalidArgument("unsupported input exponent '" + std::string(s) + "' (supported: 1, 2, inf)");
}

struct MeshOptions {
  double grading_ratio = 1.189207115002721;  // 2^{1/4}
  double refine_scale = 1.0 / 16.0;          // finest lag = refine_scale / stiffness
};

/// Lags tau_0 = 0 < tau_1 < ... < tau_K = horizon, measured backwards from
/// the final time. Uniform with spacing horizon/steps, except that [0, h] is
/// graded geometrically down to refine_scale/stiffness so that fast modes,
/// which only see inputs at lags ~ 1/lambda_n, are resolved.
inline std::vector<double> input_lags(double horizon, int steps, double fastest_rate, const MeshOptions& opts = {}) {
  if (!(horizon > 0.0)) throw InvalidArgument("input mesh: horizon must be positive");
  if (steps < 8) throw InvalidArgument("input mesh: steps must be >= 8");
  const double h = horizon / steps;
  const double finest = opts.refine_scale / fastest_rate;
  std::vector<double> lags{0.0};
  std::vector<double> graded;
  for (double tau = h / opts.grading_ratio; tau > finest; tau /= opts.grading_ratio) graded.push_back(tau);
  lags.insert(lags.end(), graded.rbegin(), graded.rend());
  for (int j = 1; j <= steps; ++j) lags.push_back(j == steps ? horizon : h * j);
  return lags;
}

struct AdmissibilityPoint {
  double horizon = 0.0;
  Index modes = 0;
  double constant = 0.0;
};

/// Empirical q-admissibility constant
///   K(T, N) = sup { ||int_0^T T(T-s) B u(s) ds|| : ||u||_{L^q(0,T)} <= 1 }
/// over piecewise-constant inputs, and its trend table over (T, N).
struct AdmissibilityEstimate {
  InputExponent q = InputExponent::two;
  double horizon = 0.0;
  int steps = 0;
  Index segments = 0;
  double constant = 0.0;
  bool exact = true;  // false: q=inf lower bound from sign iteration
  std::vector<AdmissibilityPoint> trend;
  Verdict verdict = Verdict::inconclusive;  // trend in N at the largest horizon
  double growth_exponent = 0.0;
  double tail_ratio = 1.0;
};

template <LinearSystem S>
AdmissibilityEstimate admissibility_constant(const S& sys, InputExponent q, double horizon, int steps,
                                             const MeshOptions& mesh = {}) {
  const std::vector<double> lags = input_lags(horizon, steps, stiffness(sys), mesh);
  const Index k = static_cast<Index>(lags.size()) - 1;
  const Index n = sys.dimension();

  AdmissibilityEstimate est;
  est.q = q;
  est.horizon = horizon;
  est.steps = steps;
  est.segments = k;

  if (q == InputExponent::infinity) {
    if constexpr (std::same_as<S, SpectralSystem>) {
      // Each mode's segment responses share sign(b_n), so u = 1 is optimal
      // for all modes simultaneously.
      est.constant = segment_response(sys, 0.0, horizon).norm();
    } else {
      Matrix g(n, k);
      for (Index j = 0; j < k; ++j) g.col(j) = segment_response(sys, lags[j], lags[j + 1]);
      Vector u = Vector::Ones(k);
      double best = (g * u).norm();
      for (int it = 0; it < 100; ++it) {
        Vector next = (g.transpose() * (g * u)).unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
        const double val = (g * next).norm();
        if (val <= best * (1.0 + 1e-15)) break;
        best = val;
        u = next;
      }
      est.constant = best;
      est.exact = false;
    }
  } else {
    Matrix g(n, k);
    for (Index j = 0; j < k; ++j) {
      const double len = lags[j + 1] - lags[j];
      g.col(j) = segment_response(sys, lags[j], lags[j + 1]);
      if (q == InputExponent::two) {
        g.col(j) /= std::sqrt(len);
      } else {
        g.col(j) /= len;
      }
    }
    if (q == InputExponent::two) {
      const Matrix gram = n <= k ? Matrix(g * g.transpose()) : Matrix(g.transpose() * g);
      Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
      est.constant = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    } else {
      est.constant = g.colwise().norm().maxCoeff();
    }
  }
  est.trend.push_back({horizon, n, est.constant});
  return est;
}

/// Trend table of K over modes x horizons. The segment length is held fixed
/// across horizons (steps = horizon / h) so that meshes nest; h is
/// segment_length unless the shortest horizon needs a finer one.
inline AdmissibilityEstimate admissibility_trend(const SystemFamily& family, InputExponent q,
                                                 std::span<const Index> modes, std::span<const double> horizons,
                                                 double segment_length, const TrendThresholds& th = {},
                                                 const MeshOptions& mesh = {}) {
  if (modes.empty() || horizons.empty()) throw InvalidArgument("admissibility_trend: empty sweep");
  if (!(segment_length > 0.0)) throw InvalidArgument("admissibility_trend: segment length must be positive");
  AdmissibilityEstimate out;
  out.q = q;
  const double t_max = *std::max_element(horizons.begin(), horizons.end());
  const double t_min = *std::min_element(horizons.begin(), horizons.end());
  if (!(t_min > 0.0)) throw InvalidArgument("admissibility_trend: horizons must be positive");
  // One segment length for every horizon, short enough that the shortest still gets 8 steps.
  const double h = std::min(segment_length, t_min / 8.0);
  std::vector<double> xs, ys;
  for (Index n : modes) {
    const SpectralSystem sys = family(n);
    for (double t : horizons) {
      const int steps = std::max(8, static_cast<int>(std::lround(t / h)));
      const AdmissibilityEstimate e = admissibility_constant(sys, q, t, steps, mesh);
      out.trend.push_back(e.trend.front());
      out.exact = out.exact && e.exact;
      if (t == t_max) {
        xs.push_back(static_cast<double>(n));
        ys.push_back(e.constant);
        out.constant = e.constant;
        out.horizon = t;
        out.steps = steps;
        out.segments = e.segments;
      }
    }
  }
  if (xs.size() >= 3) {
    const TrendFit fit = classify_trend(xs, ys, th);
    out.verdict = fit.verdict;
    out.growth_exponent = fit.slope;
    out.tail_ratio = fit.tail_ratio;
  }
  return out;
}

enum class IssStatus { iss, not_iss, inconclusive };

inline const char* to_string(IssStatus s) {
  switch (s) {
    case IssStatus::iss: return "ISS";
    case IssStatus::not_iss: return "not-ISS";
    case IssStatus::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct IssVerdict {
  IssStatus status = IssStatus::inconclusive;
  std::vector<std::string> reasons;
};

/// L^q-ISS of a linear system holds iff the semigroup is exponentially
/// stable and B is q-admissible; admissibility is read off the K(T, N) trend.
template <LinearSystem S>
IssVerdict l2_iss_verdict(const S& sys, const AdmissibilityEstimate& est) {
  IssVerdict v;
  const std::string crit = "criterion: L^q-ISS <=> exponentially stable semigroup and q-admissible B (q=" +
                           std::string(to_string(est.q)) + ")";
  if (!(decay_floor(sys) > 0.0)) {
    v.status = IssStatus::not_iss;
    v.reasons.push_back(crit + "; semigroup is not exponentially stable");
    return v;
  }
  const bool all_zero = std::all_of(est.trend.begin(), est.trend.end(), [](const auto& p) { return p.constant == 0.0; });
  if (all_zero && !est.trend.empty()) {
    v.status = IssStatus::iss;
    v.reasons.push_back(crit + "; B = 0 is trivially admissible");
    return v;
  }
  switch (est.verdict) {
    case Verdict::bounded:
      v.status = IssStatus::iss;
      v.reasons.push_back(crit + "; admissibility constant bounded in N (tail ratio " +
                          std::to_string(est.tail_ratio) + ")");
      break;
    case Verdict::diverging:
      v.status = IssStatus::not_iss;
      v.reasons.push_back(crit + "; admissibility constant diverges in N (growth exponent " +
                          std::to_string(est.growth_exponent) + ")");
      break;
    case Verdict::inconclusive:
      v.reasons.push_back(crit + "; admissibility trend inconclusive at the probed truncations");
      break;
  }
  return v;
}

}  // namespace isslyap
