#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "isslyap/admissibility.hpp"
#include "isslyap/errors.hpp"
#include "isslyap/lyapunov.hpp"
#include "isslyap/operator_core.hpp"
#include "isslyap/quadrature.hpp"

namespace isslyap {

/// Scalar input u(t), right-continuous and piecewise constant: value i holds
/// on [breakpoint i, breakpoint i+1), the last value up to the horizon.
class InputSignal {
 public:
  enum class Kind { zero, constant, piecewise_constant, sampled_sinusoid };

  static InputSignal zero() { return InputSignal(Kind::zero, {0.0}, {0.0}, kForever); }
  static InputSignal constant(double v) { return InputSignal(Kind::constant, {0.0}, {v}, kForever); }
  static InputSignal piecewise_constant(std::vector<double> breakpoints, std::vector<double> values,
                                        double horizon = kForever) {
    return InputSignal(Kind::piecewise_constant, std::move(breakpoints), std::move(values), horizon);
  }
  // Zero-order hold of a sin(omega t + phase) sampled every `period`.
  static InputSignal sampled_sinusoid(double amplitude, double omega, double phase, double period, double horizon) {
    if (!(period > 0.0) || !(horizon > 0.0)) throw InvalidArgument("sampled_sinusoid: period and horizon must be positive");
    std::vector<double> bp, vals;
    for (std::size_t k = 0; k * period < horizon; ++k) {
      bp.push_back(static_cast<double>(k) * period);
      vals.push_back(amplitude * std::sin(omega * bp.back() + phase));
    }
    return InputSignal(Kind::sampled_sinusoid, std::move(bp), std::move(vals), horizon);
  }

  Kind kind() const noexcept { return kind_; }
  double horizon() const noexcept { return horizon_; }
  double initial() const noexcept { return values_.front(); }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& values() const noexcept { return values_; }

  double at(double t) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    if (it == breakpoints_.begin()) return values_.front();
    return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
  }

  InputSignal scaled(double c) const {
    InputSignal s = *this;
    for (double& v : s.values_) v *= c;
    if (c == 0.0) s.kind_ = Kind::zero;
    return s;
  }

  bool is_zero() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
  }

  // Breakpoints strictly inside (t0, t1).
  std::vector<double> breakpoints_between(double t0, double t1) const {
    std::vector<double> out;
    for (double b : breakpoints_) {
      if (b > t0 && b < t1) out.push_back(b);
    }
    return out;
  }

  double first_switch() const { return breakpoints_.size() > 1 ? breakpoints_[1] : kForever; }

  double l2_squared(double t0, double t1) const {
    double acc = 0.0;
    double t = t0;
    for (double b : breakpoints_between(t0, t1)) {
      acc += at(t) * at(t) * (b - t);
      t = b;
    }
    return acc + at(t) * at(t) * (t1 - t);
  }

  double sup_norm(double t0, double t1) const {
    double m = std::abs(at(t0));
    for (double b : breakpoints_between(t0, t1)) m = std::max(m, std::abs(at(b)));
    return m;
  }

  static constexpr double kForever = std::numeric_limits<double>::infinity();

 private:
  InputSignal(Kind k, std::vector<double> bp, std::vector<double> vals, double horizon)
      : kind_(k), breakpoints_(std::move(bp)), values_(std::move(vals)), horizon_(horizon) {
    if (breakpoints_.empty() || breakpoints_.size() != values_.size()) {
      throw InvalidArgument("InputSignal: breakpoints and values must be nonempty and of equal length");
    }
    if (breakpoints_.front() != 0.0) throw InvalidArgument("InputSignal: first breakpoint must be 0");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
      if (!(breakpoints_[i] > breakpoints_[i - 1])) throw InvalidArgument("InputSignal: breakpoints must increase");
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw InvalidArgument("InputSignal: values must be finite");
    }
    if (!(horizon_ > 0.0)) throw InvalidArgument("InputSignal: horizon must be positive");
  }

  Kind kind_;
  std::vector<double> breakpoints_;
  std::vector<double> values_;
  double horizon_;
};

/// Mild solution sampled on a time grid.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  InputSignal input = InputSignal::zero();
};

/// phi(t, x0, u): the exact mild solution at time t for piecewise-constant u.
template <LinearSystem S>
Vector flow(const S& sys, const Vector& x0, const InputSignal& input, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("flow: time must be >= 0");
  if (t > input.horizon()) throw InvalidArgument("flow: time exceeds the input's domain");
  Vector x = x0;
  double s = 0.0;
  for (double b : input.breakpoints_between(0.0, t)) {
    x = step(sys, x, input.at(s), b - s);
    s = b;
  }
  return step(sys, x, input.at(s), t - s);
}

template <LinearSystem S>
Trajectory simulate_mild(const S& sys, const Vector& x0, const InputSignal& input, std::span<const double> grid) {
  if (grid.empty() || grid.front() != 0.0) throw InvalidArgument("simulate_mild: grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw InvalidArgument("simulate_mild: grid must be strictly increasing");
  }
  if (grid.back() > input.horizon()) throw InvalidArgument("simulate_mild: grid extends beyond the input's domain");
  if (x0.size() != sys.dimension()) throw DimensionMismatch("simulate_mild: x0 length does not match system");
  Trajectory tr;
  tr.input = input;
  tr.times.assign(grid.begin(), grid.end());
  tr.states.reserve(grid.size());
  tr.states.push_back(x0);
  Vector x = x0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    double s = grid[i - 1];
    for (double b : input.breakpoints_between(grid[i - 1], grid[i])) {
      x = step(sys, x, input.at(s), b - s);
      s = b;
    }
    x = step(sys, x, input.at(s), grid[i] - s);
    tr.states.push_back(x);
  }
  return tr;
}

namespace detail {

// Neville extrapolation of samples (h_k, d_k) to h = 0. Returns the last
// two diagonal extrapolants and the Lebesgue weights |l_k(0)|.
struct Extrapolation {
  double value = 0.0;
  double previous = 0.0;
  std::vector<double> lebesgue;
};

inline Extrapolation neville_at_zero(std::span<const double> h, std::span<const double> d) {
  const std::size_t n = h.size();
  std::vector<double> p(d.begin(), d.end());
  Extrapolation out;
  std::vector<double> diag{p[0]};
  for (std::size_t m = 1; m < n; ++m) {
    for (std::size_t i = n - 1; i >= m; --i) {
      p[i] = (h[i - m] * p[i] - h[i] * p[i - 1]) / (h[i - m] - h[i]);
      if (i == m) break;
    }
    diag.push_back(p[m]);
  }
  out.value = diag.back();
  out.previous = diag[diag.size() - 2];
  out.lebesgue.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double l = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != k) l *= -h[j] / (h[k] - h[j]);
    }
    out.lebesgue[k] = std::abs(l);
  }
  return out;
}

inline void check_steps(std::span<const double> steps) {
  if (steps.size() < 4) throw InvalidArgument("step sequence needs at least 4 entries");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(steps[i] > 0.0)) throw InvalidArgument("step sequence must be positive");
    if (i > 0 && !(steps[i] < steps[i - 1])) throw InvalidArgument("step sequence must be strictly decreasing");
  }
}

// |P| |a| . |b| style bound on the rounding scale of <P a, b>.
inline double abs_bilinear(const QuadraticForm& form, const Vector& a, const Vector& b) {
  if (form.is_diagonal()) return (form.weights().array() * a.array().abs() * b.array().abs()).sum();
  return form.matrix().cwiseAbs().norm() * a.norm() * b.norm();
}

}  // namespace detail

/// Default Dini step sequence 1e-2 * 2^{-k}, k = 0..6, shrunk by the system's
/// stiffness and kept inside the input's first constant piece.
template <LinearSystem S>
std::vector<double> default_dini_steps(const S& sys, const InputSignal& input = InputSignal::zero()) {
  double h0 = 1e-2 / std::max(1.0, stiffness(sys));
  h0 = std::min(h0, 0.5 * input.first_switch());
  std::vector<double> steps;
  for (int k = 0; k <= 6; ++k) steps.push_back(h0 * std::ldexp(1.0, -k));
  return steps;
}

struct DiniEstimate {
  double value = 0.0;
  double error_bar = 0.0;
  std::vector<double> steps;
  std::vector<double> quotients;  // (V(phi(h)) - V(x)) / h
};

/// Right Dini derivative of V along the mild solution from x under `input`,
/// by Richardson (Neville) extrapolation of forward difference quotients.
/// The error bar is the gap between the last two extrapolants plus the
/// propagated rounding of the quotients.
template <LinearSystem S>
DiniEstimate dini_derivative(const QuadraticForm& form, const S& sys, const Vector& x, const InputSignal& input,
                             std::span<const double> steps) {
  detail::check_steps(steps);
  if (x.size() != sys.dimension() || form.dimension() != sys.dimension()) {
    throw DimensionMismatch("dini_derivative: form, system and state dimensions differ");
  }
  DiniEstimate est;
  est.steps.assign(steps.begin(), steps.end());
  std::vector<double> rounding;
  for (double h : steps) {
    Vector delta = h < input.first_switch() ? increment(sys, x, input.initial(), h) : Vector(flow(sys, x, input, h) - x);
    const Vector far = 2.0 * x + delta;
    est.quotients.push_back(form.bilinear(delta, far) / h);
    rounding.push_back(detail::abs_bilinear(form, delta, far) / h);
  }
  const auto ex = detail::neville_at_zero(est.steps, est.quotients);
  double floor = 0.0;
  for (std::size_t k = 0; k < rounding.size(); ++k) floor += ex.lebesgue[k] * rounding[k];
  floor *= 16.0 * std::numeric_limits<double>::epsilon();
  est.value = ex.value;
  est.error_bar = std::abs(ex.value - ex.previous) + floor;
  return est;
}

template <LinearSystem S>
DiniEstimate dini_derivative(const QuadraticForm& form, const S& sys, const Vector& x, const InputSignal& input) {
  const auto steps = default_dini_steps(sys, input);
  return dini_derivative(form, sys, x, input, steps);
}

/// 2 Re<P x, A x + B u0>: the derivative of V along classical solutions.
template <LinearSystem S>
double analytic_derivative(const QuadraticForm& form, const S& sys, const Vector& x, double u0) {
  const Vector drift = generator_apply(sys, x) + input_column(sys) * u0;
  return 2.0 * form.bilinear(x, drift);
}

struct SampleCloud {
  std::vector<Vector> states;
  std::vector<double> input_levels;
};

/// Gaussian states rescaled to unit norm, crossed with the given input levels.
inline SampleCloud default_cloud(Index dimension, std::uint64_t seed, int count = 200,
                                 std::vector<double> levels = {0.0, 0.5, -0.5, 1.0, -1.0}) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  SampleCloud c;
  c.input_levels = std::move(levels);
  for (int k = 0; k < count; ++k) {
    Vector x(dimension);
    for (Index i = 0; i < dimension; ++i) x(i) = gauss(rng);
    c.states.push_back(x / x.norm());
  }
  return c;
}

struct DissipationSample {
  double state_norm = 0.0;
  double input = 0.0;
  double vdot = 0.0;
  double dini_error = 0.0;
  double residual = 0.0;  // vdot + a3 |x|^2 - a4 u^2
  bool probe = false;     // analytic extremal probe rather than cloud sample
};

/// Certificate for  V' <= -a3 |x|^2 + a4 |u(0)|^2  over a sample cloud.
struct DissipationReport {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double a4 = 0.0;
  double a3_max = 0.0;  // largest a3 the unforced samples allow
  bool feasible = false;
  std::string infeasible_reason;
  double worst_residual = 0.0;
  std::vector<DissipationSample> samples;
  std::vector<std::size_t> violations;
  std::vector<double> dini_steps;
  std::string provenance;
};

struct FitOptions {
  bool extremal_probes = true;
  double tolerance = 1e-7;
};

namespace detail {
// Q = -(A^T P + P A) and c = P B, so that V' = -x^T Q x + 2 u x^T c.
template <LinearSystem S>
std::pair<Matrix, Vector> dissipation_pair(const QuadraticForm& form, const S& sys) {
  const Matrix a = generator_matrix(sys);
  const Matrix p = form.to_dense();
  Matrix q = -(a.transpose() * p + p * a);
  q = 0.5 * (q + q.transpose()).eval();
  return {q, p * input_column(sys)};
}
}  // namespace detail

/// Fits (a3, a4) on the cloud: a3_max is the smallest decay ratio -V'/|x|^2
/// among unforced samples; a3 = a3_max when no forced sample needs an input
/// term, otherwise a3 = a3_max / 2 (Young split) and a4 is the largest value
/// implied by the forced samples. With extremal probes the cloud also holds
/// the minimal-dissipation direction and the a4-maximizer (Q - a3 I)^{-1} P B,
/// which makes the certificate exact on the truncation.
template <LinearSystem S>
DissipationReport fit_dissipation(const QuadraticForm& form, const S& sys, const SampleCloud& cloud,
                                  const FitOptions& opts = {}) {
  if (cloud.states.empty()) throw InvalidArgument("fit_dissipation: empty sample cloud");
  if (std::none_of(cloud.input_levels.begin(), cloud.input_levels.end(), [](double u) { return u == 0.0; })) {
    throw InvalidArgument("fit_dissipation: cloud needs the unforced input level 0");
  }
  DissipationReport rep;
  rep.a1 = form.a1();
  rep.a2 = form.a2();
  rep.provenance = form.provenance();
  const std::vector<double> steps = default_dini_steps(sys);
  rep.dini_steps = steps;

  struct Raw {
    Vector x;
    double u;
    DiniEstimate d;
    bool probe;
  };
  std::vector<Raw> raw;
  auto add = [&](const Vector& x, double u, bool probe) {
    raw.push_back({x, u, dini_derivative(form, sys, x, InputSignal::constant(u), steps), probe});
  };
  for (const Vector& x : cloud.states) {
    if (x.size() != sys.dimension()) throw DimensionMismatch("fit_dissipation: sample state has wrong length");
    for (double u : cloud.input_levels) add(x, u, false);
  }

  const auto [q, c] = detail::dissipation_pair(form, sys);
  if (opts.extremal_probes) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(q);
    add(es.eigenvectors().col(0), 0.0, true);
  }

  rep.a3_max = std::numeric_limits<double>::infinity();
  double worst_unforced = -std::numeric_limits<double>::infinity();
  for (const Raw& r : raw) {
    const double nx2 = r.x.squaredNorm();
    if (r.u != 0.0 || nx2 == 0.0) continue;
    rep.a3_max = std::min(rep.a3_max, -r.d.value / nx2);
    worst_unforced = std::max(worst_unforced, r.d.value);
  }
  if (!(rep.a3_max > 0.0)) {
    rep.feasible = false;
    rep.infeasible_reason = "V' >= 0 on an unforced sample: no a3 > 0 exists";
    rep.worst_residual = worst_unforced;
    for (const Raw& r : raw) rep.samples.push_back({r.x.norm(), r.u, r.d.value, r.d.error_bar, r.d.value, r.probe});
    return rep;
  }

  auto scale_of = [](double vdot, double a3x, double a4u) { return std::abs(vdot) + a3x + a4u; };
  bool coupled = false;
  for (const Raw& r : raw) {
    if (r.u == 0.0) continue;
    const double a3x = rep.a3_max * r.x.squaredNorm();
    if (r.d.value + a3x > opts.tolerance * scale_of(r.d.value, a3x, 0.0)) coupled = true;
  }
  if (!coupled && c.norm() == 0.0) {
    rep.a3 = rep.a3_max;
    rep.a4 = 0.0;
  } else {
    rep.a3 = 0.5 * rep.a3_max;
    if (opts.extremal_probes) {
      Matrix shifted = q;
      shifted.diagonal().array() -= rep.a3;
      const Vector worst = shifted.ldlt().solve(c);
      if (worst.allFinite() && worst.norm() > 0.0) add(worst, 1.0, true);
    }
    rep.a4 = 0.0;
    for (const Raw& r : raw) {
      if (r.u == 0.0) continue;
      rep.a4 = std::max(rep.a4, (r.d.value + rep.a3 * r.x.squaredNorm()) / (r.u * r.u));
    }
  }

  rep.worst_residual = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Raw& r = raw[i];
    const double a3x = rep.a3 * r.x.squaredNorm();
    const double a4u = rep.a4 * r.u * r.u;
    const double res = r.d.value + a3x - a4u;
    rep.samples.push_back({r.x.norm(), r.u, r.d.value, r.d.error_bar, res, r.probe});
    rep.worst_residual = std::max(rep.worst_residual, res);
    if (res > opts.tolerance * scale_of(r.d.value, a3x, a4u)) rep.violations.push_back(i);
  }
  rep.feasible = rep.violations.empty();
  if (!rep.feasible) rep.infeasible_reason = "residual violations remain after fitting";
  return rep;
}

/// a4 needed for a given a3 over all states of the truncation:
/// sup_x (V' + a3|x|^2) / u^2 = c^T (Q - a3 I)^{-1} c. Infinite when
/// Q - a3 I is not positive definite.
template <LinearSystem S>
double required_input_coefficient(const QuadraticForm& form, const S& sys, double a3) {
  auto [q, c] = detail::dissipation_pair(form, sys);
  q.diagonal().array() -= a3;
  Eigen::LLT<Matrix> llt(q);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  return c.dot(llt.solve(c));
}

struct ScalingEntry {
  double c = 0.0;
  double scaled_value = 0.0;    // V(phi(h, 0, c u))
  double expected_value = 0.0;  // c^2 V(phi(h, 0, u))
  double rel_error = 0.0;
};

struct ScalingReport {
  double horizon = 0.0;
  std::vector<ScalingEntry> entries;
  double max_rel_error = 0.0;
  bool passed = false;
};

/// Checks V(phi(h, 0, c u)) = c^2 V(phi(h, 0, u)): a quadratic V only admits
/// a quadratic input term in its dissipation inequality.
template <LinearSystem S>
ScalingReport input_scaling_check(const QuadraticForm& form, const S& sys, const InputSignal& u,
                                  std::span<const double> cs, double h = 1e-2, double tol = 1e-10) {
  ScalingReport rep;
  rep.horizon = h;
  const Vector zero = Vector::Zero(sys.dimension());
  const double base = form(flow(sys, zero, u, h));
  for (double c : cs) {
    ScalingEntry e;
    e.c = c;
    e.scaled_value = form(flow(sys, zero, u.scaled(c), h));
    e.expected_value = c * c * base;
    const double denom = std::max(std::abs(e.expected_value), std::numeric_limits<double>::min());
    e.rel_error = e.scaled_value == e.expected_value ? 0.0 : std::abs(e.scaled_value - e.expected_value) / denom;
    rep.max_rel_error = std::max(rep.max_rel_error, e.rel_error);
    rep.entries.push_back(e);
  }
  rep.passed = rep.max_rel_error <= tol;
  return rep;
}

struct UpgradeReport {
  double limit = 0.0;     // lim_{h->0+} ||F int_0^h T(h-s) B u(s) ds|| / h
  double constant = 0.0;  // limit / |u(0)|, the C with limit <= C |u(0)|
  double error_bar = 0.0;
  bool anomaly = false;   // u(0) = 0 but the limit is not 0
  std::vector<double> steps;
  std::vector<double> quotients;
};

/// Estimates limsup_{h->0+} (1/h) ||F int_0^h T(h-s) B u(s) ds||, the bound
/// that upgrades a Lyapunov function for B = 0 to an L2-ISS one.
template <LinearSystem S>
UpgradeReport upgrade_check(const QuadraticForm& form, const S& sys, const InputSignal& input,
                            std::span<const double> steps) {
  detail::check_steps(steps);
  const FormFactor f = factorize(form);
  const Vector zero = Vector::Zero(sys.dimension());
  UpgradeReport rep;
  rep.steps.assign(steps.begin(), steps.end());
  for (double h : steps) {
    const Vector z = h < input.first_switch() ? increment(sys, zero, input.initial(), h) : flow(sys, zero, input, h);
    rep.quotients.push_back(f.apply(z).norm() / h);
  }
  const auto ex = detail::neville_at_zero(rep.steps, rep.quotients);
  rep.limit = std::max(0.0, ex.value);
  rep.error_bar = std::abs(ex.value - ex.previous);
  const double u0 = std::abs(input.initial());
  rep.constant = u0 > 0.0 ? rep.limit / u0 : 0.0;
  const double fb = f.apply(input_column(sys)).norm();
  rep.anomaly = u0 == 0.0 && rep.limit > 1e-8 * std::max(1.0, fb);
  return rep;
}

template <LinearSystem S>
UpgradeReport upgrade_check(const QuadraticForm& form, const S& sys, const InputSignal& input) {
  const auto steps = default_dini_steps(sys, input);
  return upgrade_check(form, sys, input, steps);
}

/// V(phi(h, x, u)) = I1 + 2 I2 + I3 with
///   I1 = int ||S T(t+h) x||^2,  I2 = int <S T(t+h) x, S T(t) z>,
///   I3 = int ||S T(t) z||^2,   z = int_0^h T(h-s) B u(s) ds,  S = (-A)^q.
/// I2 here is the signed cross term; bounds on it use its absolute value.
struct ProofDecomposition {
  double h = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
  double i3 = 0.0;
  double v_direct = 0.0;  // V(phi(h, x, u)) from the simulated state
  double v_free = 0.0;    // V(T(h) x)
  double reconstruction_error = 0.0;
  double free_error = 0.0;
  double quadrature_error = 0.0;
  double k2 = 0.0;              // a2 * K(h)^2 with K the empirical 2-admissibility constant
  double input_energy = 0.0;    // int_0^h |u|^2
  bool i3_bound_holds = false;  // I3 <= k2 * input_energy
};

template <LinearSystem S>
ProofDecomposition proof_decomposition(const QuadraticForm& form, const S& sys, const Vector& x,
                                       const InputSignal& input, double h, int admissibility_steps = 64) {
  const auto q = form.generator_power();
  if (!q) throw InvalidArgument("proof_decomposition: form must come from build_v_half or build_w_q");
  if (!(h > 0.0)) throw InvalidArgument("proof_decomposition: h must be positive");
  ProofDecomposition d;
  d.h = h;
  const Vector zero = Vector::Zero(sys.dimension());
  const Vector y = semigroup_apply(sys, h, x);
  const Vector z = flow(sys, zero, input, h);

  Vector sy, sz;
  std::function<Vector(double, const Vector&)> evolve;
  if constexpr (std::same_as<S, SpectralSystem>) {
    sy = fractional_power_apply(sys, *q, y);
    sz = fractional_power_apply(sys, *q, z);
  } else {
    sy = fractional_power_apply(sys, *q, y, PowerMethod::schur);
    sz = fractional_power_apply(sys, *q, z, PowerMethod::schur);
  }
  auto term = [&](const Vector& a, const Vector& b) {
    auto f = [&](double t) { return semigroup_apply(sys, t, a).dot(semigroup_apply(sys, t, b)); };
    return quadrature::integrate_decaying(f, decay_floor(sys), stiffness(sys));
  };
  const auto r1 = term(sy, sy);
  const auto r2 = term(sy, sz);
  const auto r3 = term(sz, sz);
  d.i1 = r1.value;
  d.i2 = r2.value;
  d.i3 = r3.value;
  d.quadrature_error = r1.error + 2.0 * r2.error + r3.error;
  d.v_direct = form(flow(sys, x, input, h));
  d.v_free = form(y);
  d.reconstruction_error = std::abs(d.i1 + 2.0 * d.i2 + d.i3 - d.v_direct);
  d.free_error = std::abs(d.i1 - d.v_free);

  const auto k = admissibility_constant(sys, InputExponent::two, h, admissibility_steps);
  d.k2 = form.a2() * k.constant * k.constant;
  d.input_energy = input.l2_squared(0.0, h);
  d.i3_bound_holds = d.i3 <= d.k2 * d.input_energy * (1.0 + 1e-9) + 1e-300;
  return d;
}

/// beta(r, t) = overshoot * e^{-rate t} r and mu(r) = gain * r.
struct GainEnvelope {
  double overshoot = 1.0;
  double rate = 0.0;
  double gain = 0.0;
  bool certified = false;
  bool not_iss = false;
  double worst_ratio = 0.0;  // max |x(t)| / envelope(t) over all nodes
};

/// Fits |x(t)| <= M e^{-omega t} |x0| + g ||u||_{L2(0,t)}: omega and log M by
/// least squares on homogeneous runs (M then raised to cover every node), g as
/// the largest |x(t)| / ||u||_{L2(0,t)} on forced runs from x0 = 0.
inline GainEnvelope iss_gain_fit(std::span<const Trajectory> ensemble, double slack = 0.01) {
  GainEnvelope g;
  std::vector<double> ts, ls;
  bool has_homogeneous = false;
  bool has_forced = false;
  for (const Trajectory& tr : ensemble) {
    const double x0 = tr.states.front().norm();
    if (tr.input.is_zero() && x0 > 0.0) {
      has_homogeneous = true;
      for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double nx = tr.states[i].norm();
        if (nx > std::numeric_limits<double>::min() * 1e10) {
          ts.push_back(tr.times[i]);
          ls.push_back(std::log(nx / x0));
        }
      }
    } else if (x0 == 0.0) {
      has_forced = true;
    }
  }
  if (!has_homogeneous && !has_forced) throw InvalidArgument("iss_gain_fit: ensemble has neither homogeneous nor forced runs");

  if (ts.size() >= 2) {
    double mt = 0, ml = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      mt += ts[i];
      ml += ls[i];
    }
    mt /= ts.size();
    ml /= ls.size();
    double stl = 0, stt = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      stl += (ts[i] - mt) * (ls[i] - ml);
      stt += (ts[i] - mt) * (ts[i] - mt);
    }
    const double slope = stt > 0 ? stl / stt : 0.0;
    g.rate = -slope;
    if (!(g.rate > 0.0)) {
      g.not_iss = true;
      return g;
    }
    double m = std::exp(ml - slope * mt);
    for (std::size_t i = 0; i < ts.size(); ++i) m = std::max(m, std::exp(ls[i] + g.rate * ts[i]));
    g.overshoot = std::max(1.0, m);
  }

  for (const Trajectory& tr : ensemble) {
    if (tr.states.front().norm() != 0.0) continue;
    for (std::size_t i = 1; i < tr.times.size(); ++i) {
      const double e = std::sqrt(tr.input.l2_squared(0.0, tr.times[i]));
      if (e > 0.0) g.gain = std::max(g.gain, tr.states[i].norm() / e);
    }
  }

  g.worst_ratio = 0.0;
  for (const Trajectory& tr : ensemble) {
    const double x0 = tr.states.front().norm();
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      const double t = tr.times[i];
      const double env = g.overshoot * std::exp(-g.rate * t) * x0 + g.gain * std::sqrt(tr.input.l2_squared(0.0, t));
      const double nx = tr.states[i].norm();
      if (nx == 0.0) continue;
      g.worst_ratio = std::max(g.worst_ratio, env > 0.0 ? nx / env : std::numeric_limits<double>::infinity());
    }
  }
  g.certified = g.worst_ratio <= 1.0 + slack;
  return g;
}

struct NormDecayCheck {
  double rate = 0.0;        // the a being certified
  double worst_margin = 0;  // max over nodes of W' + a W (<= 0 when holding)
  bool holds = false;
};

/// For B = 0 checks d/dt ||F x(t)|| <= -a ||F x(t)|| at the trajectory nodes,
/// with W' = V' / (2 W) and V' from the Dini estimate.
template <LinearSystem S>
NormDecayCheck norm_decay_check(const QuadraticForm& form, const S& sys, const Trajectory& tr, double a,
                                double tol = 1e-9) {
  NormDecayCheck c;
  c.rate = a;
  c.worst_margin = -std::numeric_limits<double>::infinity();
  const InputSignal none = InputSignal::zero();
  for (const Vector& x : tr.states) {
    const double v = form(x);
    if (!(v > 0.0)) continue;
    const double w = std::sqrt(v);
    const DiniEstimate d = dini_derivative(form, sys, x, none);
    const double wdot = d.value / (2.0 * w);
    c.worst_margin = std::max(c.worst_margin, (wdot + a * w) / w);
  }
  c.holds = c.worst_margin <= tol;
  return c;
}

}  // namespace isslyap
