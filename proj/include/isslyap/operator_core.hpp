#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isslyap/errors.hpp"
#include "isslyap/linalg.hpp"
#include "isslyap/quadrature.hpp"

namespace isslyap {

/// Diagonal generator A = -diag(lambda_n) with scalar input B u = (b_n u),
/// the N-mode truncation of a self-adjoint system on l^2.
class SpectralSystem {
 public:
  SpectralSystem(Vector eigenvalues, Vector input_coeffs, std::string label = "spectral")
      : eigenvalues_(std::move(eigenvalues)), input_coeffs_(std::move(input_coeffs)), label_(std::move(label)) {
    if (eigenvalues_.size() < 1) throw InvalidSystem("SpectralSystem: mode_count must be >= 1");
    if (eigenvalues_.size() != input_coeffs_.size()) {
      throw InvalidSystem("SpectralSystem: eigenvalues and input_coeffs differ in length");
    }
    for (Index i = 0; i < eigenvalues_.size(); ++i) {
      if (!std::isfinite(eigenvalues_(i)) || !(eigenvalues_(i) > 0.0)) {
        throw InvalidSystem("SpectralSystem: eigenvalue " + std::to_string(i + 1) + " is not a positive finite number");
      }
      if (!std::isfinite(input_coeffs_(i))) {
        throw InvalidSystem("SpectralSystem: input coefficient " + std::to_string(i + 1) + " is not finite");
      }
      if (i > 0 && eigenvalues_(i) < eigenvalues_(i - 1)) {
        throw InvalidSystem("SpectralSystem: eigenvalues must be sorted ascending");
      }
    }
  }

  const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  const Vector& input_coeffs() const noexcept { return input_coeffs_; }
  Index mode_count() const noexcept { return eigenvalues_.size(); }
  Index dimension() const noexcept { return eigenvalues_.size(); }
  const std::string& label() const noexcept { return label_; }

  SpectralSystem with_input(Vector coeffs) const { return {eigenvalues_, std::move(coeffs), label_}; }
  SpectralSystem scaled_input(double c) const { return {eigenvalues_, c * input_coeffs_, label_}; }

 private:
  Vector eigenvalues_;
  Vector input_coeffs_;
  std::string label_;
};

/// Dense finite-dimensional system x' = A x + B u with Hurwitz A.
class MatrixSystem {
 public:
  MatrixSystem(Matrix a, Matrix b, std::string label = "matrix")
      : a_(std::move(a)), b_(std::move(b)), label_(std::move(label)) {
    if (a_.rows() < 1 || a_.rows() != a_.cols()) throw InvalidSystem("MatrixSystem: A must be square and nonempty");
    if (b_.rows() != a_.rows()) throw InvalidSystem("MatrixSystem: B must have as many rows as A");
    if (!a_.allFinite() || !b_.allFinite()) throw InvalidSystem("MatrixSystem: non-finite entries");
    Eigen::EigenSolver<Matrix> es(a_, false);
    if (es.info() != Eigen::Success) throw InvalidSystem("MatrixSystem: eigenvalue computation failed");
    spectrum_ = es.eigenvalues();
    if (!(spectrum_.real().maxCoeff() < 0.0)) {
      throw InvalidSystem("MatrixSystem: A is not Hurwitz (spectral abscissa " +
                          std::to_string(spectrum_.real().maxCoeff()) + ")");
    }
  }

  const Matrix& a_matrix() const noexcept { return a_; }
  const Matrix& b_matrix() const noexcept { return b_; }
  Index dimension() const noexcept { return a_.rows(); }
  Index input_dim() const noexcept { return b_.cols(); }
  const ComplexVector& spectrum() const noexcept { return spectrum_; }
  const std::string& label() const noexcept { return label_; }

 private:
  Matrix a_;
  Matrix b_;
  ComplexVector spectrum_;
  std::string label_;
};

template <class S>
concept LinearSystem = std::same_as<S, SpectralSystem> || std::same_as<S, MatrixSystem>;

/// ||(-A)^r T(t)|| <= prefactor * t^{-power} * e^{-rate t}
struct DecayBound {
  double prefactor = 1.0;
  double rate = 1.0;
  double power = 0.0;

  double operator()(double t) const { return prefactor * std::pow(t, -power) * std::exp(-rate * t); }
};

enum class PowerMethod { spectral, schur };

inline MatrixSystem to_matrix_system(const SpectralSystem& s) {
  Matrix a = Matrix::Zero(s.dimension(), s.dimension());
  a.diagonal() = -s.eigenvalues();
  return {std::move(a), Matrix(s.input_coeffs()), s.label()};
}

namespace detail {
template <LinearSystem S>
void check_dim(const S& sys, const Vector& x, const char* what) {
  if (x.size() != sys.dimension()) {
    throw DimensionMismatch(std::string(what) + ": state has length " + std::to_string(x.size()) +
                            ", system dimension is " + std::to_string(sys.dimension()));
  }
}

inline void check_time(double t, const char* what) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument(std::string(what) + ": time must be finite and >= 0");
}
}  // namespace detail

// Smallest decay rate: lambda_1, or -spectral abscissa for matrices.
inline double decay_floor(const SpectralSystem& s) { return s.eigenvalues()(0); }
inline double decay_floor(const MatrixSystem& s) { return -s.spectrum().real().maxCoeff(); }

// Largest spectral magnitude; sets the fastest time scale.
inline double stiffness(const SpectralSystem& s) { return s.eigenvalues()(s.dimension() - 1); }
inline double stiffness(const MatrixSystem& s) { return s.spectrum().cwiseAbs().maxCoeff(); }

inline Vector generator_apply(const SpectralSystem& s, const Vector& x) {
  detail::check_dim(s, x, "generator_apply");
  return -(s.eigenvalues().array() * x.array()).matrix();
}
inline Vector generator_apply(const MatrixSystem& s, const Vector& x) {
  detail::check_dim(s, x, "generator_apply");
  return s.a_matrix() * x;
}

inline Vector input_column(const SpectralSystem& s) { return s.input_coeffs(); }
inline Vector input_column(const MatrixSystem& s) {
  if (s.input_dim() != 1) throw InvalidArgument("input_column: only scalar inputs are supported (B must be n x 1)");
  return s.b_matrix().col(0);
}

inline Matrix generator_matrix(const SpectralSystem& s) {
  Matrix a = Matrix::Zero(s.dimension(), s.dimension());
  a.diagonal() = -s.eigenvalues();
  return a;
}
inline const Matrix& generator_matrix(const MatrixSystem& s) { return s.a_matrix(); }

/// T(t) x.
inline Vector semigroup_apply(const SpectralSystem& s, double t, const Vector& x) {
  detail::check_time(t, "semigroup_apply");
  detail::check_dim(s, x, "semigroup_apply");
  if (t == 0.0) return x;
  return ((-s.eigenvalues().array() * t).exp() * x.array()).matrix();
}
inline Vector semigroup_apply(const MatrixSystem& s, double t, const Vector& x) {
  detail::check_time(t, "semigroup_apply");
  detail::check_dim(s, x, "semigroup_apply");
  if (t == 0.0) return x;
  return linalg::expm(s.a_matrix() * t) * x;
}

/// (-A)^alpha as a dense matrix.
inline Matrix fractional_power_matrix(const MatrixSystem& s, double alpha, PowerMethod method = PowerMethod::spectral,
                                      double max_condition = 1e8) {
  const Matrix neg = -s.a_matrix();
  return method == PowerMethod::spectral ? linalg::spectral_power(neg, alpha, max_condition)
                                         : linalg::schur_power(neg, alpha);
}

/// (-A)^alpha x.
inline Vector fractional_power_apply(const SpectralSystem& s, double alpha, const Vector& x) {
  detail::check_dim(s, x, "fractional_power_apply");
  if (alpha == 0.0) return x;
  return (s.eigenvalues().array().pow(alpha) * x.array()).matrix();
}
inline Vector fractional_power_apply(const MatrixSystem& s, double alpha, const Vector& x,
                                     PowerMethod method = PowerMethod::spectral) {
  detail::check_dim(s, x, "fractional_power_apply");
  if (alpha == 0.0) return x;
  return fractional_power_matrix(s, alpha, method) * x;
}

/// ||(-A)^{-gamma} v||, the norm of v in the extrapolation space X_{-gamma}.
template <LinearSystem S>
double extrapolation_norm(const S& s, double gamma, const Vector& v) {
  if (!(gamma >= 0.0)) throw InvalidArgument("extrapolation_norm: gamma must be >= 0");
  if (gamma == 0.0) {
    detail::check_dim(s, v, "extrapolation_norm");
    return v.norm();
  }
  return fractional_power_apply(s, -gamma, v).norm();
}

/// ||(-A)^r T(t)|| in the operator 2-norm.
inline double power_semigroup_norm(const SpectralSystem& s, double r, double t) {
  const auto& lam = s.eigenvalues();
  double best = 0.0;
  for (Index i = 0; i < lam.size(); ++i) best = std::max(best, std::exp(r * std::log(lam(i)) - lam(i) * t));
  return best;
}
inline double power_semigroup_norm(const MatrixSystem& s, double r, double t) {
  const Matrix e = linalg::expm(s.a_matrix() * t);
  if (r == 0.0) return linalg::spectral_norm(e);
  return linalg::spectral_norm(fractional_power_matrix(s, r, PowerMethod::schur) * e);
}

struct DecayOptions {
  std::optional<double> rate_override;  // default: decay_floor / 2
  int grid_points = 400;
  double t_min_scale = 1e-6;   // t_min = t_min_scale / stiffness
  double t_max_scale = 40.0;   // t_max = t_max_scale / decay_floor
};

/// Logarithmic sampling grid used by decay_bound_estimate.
template <LinearSystem S>
std::vector<double> decay_grid(const S& s, const DecayOptions& opts = {}) {
  if (opts.grid_points < 2) throw InvalidArgument("decay_grid: empty grid");
  const double lo = std::log(opts.t_min_scale / stiffness(s));
  const double hi = std::log(opts.t_max_scale / decay_floor(s));
  std::vector<double> grid(static_cast<std::size_t>(opts.grid_points));
  for (int i = 0; i < opts.grid_points; ++i) grid[i] = std::exp(lo + (hi - lo) * i / (opts.grid_points - 1));
  return grid;
}

/// Fits M in ||(-A)^r T(t)|| <= M t^{-r} e^{-delta t}.
///
/// delta defaults to half the spectral gap. M is the maximum of
/// ||(-A)^r T(t)|| t^r e^{delta t} over a log grid, polished by golden-section
/// search in log t around the best grid node.
template <LinearSystem S>
DecayBound decay_bound_estimate(const S& s, double r, const DecayOptions& opts = {}) {
  if (!(r >= 0.0)) throw InvalidArgument("decay_bound_estimate: r must be >= 0");
  const double delta = opts.rate_override.value_or(0.5 * decay_floor(s));
  if (!(delta > 0.0)) throw InvalidArgument("decay_bound_estimate: rate must be positive");
  const auto grid = decay_grid(s, opts);
  auto scaled = [&](double t) { return power_semigroup_norm(s, r, t) * std::pow(t, r) * std::exp(delta * t); };

  double best = r == 0.0 ? 1.0 : 0.0;  // ||T(0)|| = 1
  std::size_t arg = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = scaled(grid[i]);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  if (arg > 0 && arg + 1 < grid.size()) {
    double a = std::log(grid[arg - 1]);
    double b = std::log(grid[arg + 1]);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    for (int it = 0; it < 80; ++it) {
      if (scaled(std::exp(c)) > scaled(std::exp(d))) {
        b = d;
      } else {
        a = c;
      }
      c = b - g * (b - a);
      d = a + g * (b - a);
    }
    best = std::max(best, scaled(std::exp(0.5 * (a + b))));
  }
  if (!std::isfinite(best)) throw InvalidArgument("decay_bound_estimate: bound is not finite (rate too large?)");
  return {best, delta, r};
}

/// int_0^inf ||(-A)^r T(t)||^2 dt, finite for r < 1/2.
template <LinearSystem S>
quadrature::Result squared_decay_integral(const S& s, double r) {
  if (!(r >= 0.0 && r < 0.5)) throw InvalidArgument("squared_decay_integral: need 0 <= r < 1/2");
  auto f = [&](double t) {
    if (t <= 0.0) return r == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    const double v = power_semigroup_norm(s, r, t);
    return v * v;
  };
  quadrature::DecayingOptions opts;
  opts.singular_at_zero = r > 0.0;
  opts.rel_tol = 1e-10;
  return quadrature::integrate_decaying(f, decay_floor(s), stiffness(s), opts);
}

/// phi(h, x, u) - x for an input held at u on [0, h]; equals h phi1(hA)(Ax + Bu),
/// evaluated without forming phi(h) - x by subtraction.
inline Vector increment(const SpectralSystem& s, const Vector& x, double u, double h) {
  detail::check_dim(s, x, "increment");
  detail::check_time(h, "increment");
  const auto lam = s.eigenvalues().array();
  const auto c = -(-lam * h).unaryExpr([](double z) { return std::expm1(z); }) / lam;
  return (c * (-lam * x.array() + s.input_coeffs().array() * u)).matrix();
}
inline Vector increment(const MatrixSystem& s, const Vector& x, double u, double h) {
  detail::check_dim(s, x, "increment");
  detail::check_time(h, "increment");
  if (h == 0.0) return Vector::Zero(x.size());
  const Vector drift = s.a_matrix() * x + input_column(s) * u;
  return linalg::scaled_phi1(s.a_matrix(), h) * drift;
}

/// Exact state after holding input u for time h starting from x.
inline Vector step(const SpectralSystem& s, const Vector& x, double u, double h) {
  detail::check_dim(s, x, "step");
  detail::check_time(h, "step");
  const auto lam = s.eigenvalues().array();
  const auto gain = -(-lam * h).unaryExpr([](double z) { return std::expm1(z); }) / lam;
  return ((-lam * h).exp() * x.array() + s.input_coeffs().array() * u * gain).matrix();
}
inline Vector step(const MatrixSystem& s, const Vector& x, double u, double h) {
  return x + increment(s, x, u, h);
}

/// int_lo^hi T(tau) B dtau, the response of a unit input on a lag window.
inline Vector segment_response(const SpectralSystem& s, double lo, double hi) {
  const auto lam = s.eigenvalues().array();
  const double len = hi - lo;
  const auto c = (-lam * lo).exp() * (-(-lam * len).unaryExpr([](double z) { return std::expm1(z); })) / lam;
  return (s.input_coeffs().array() * c).matrix();
}
inline Vector segment_response(const MatrixSystem& s, double lo, double hi) {
  const Matrix& a = s.a_matrix();
  return linalg::expm(a * lo) * (linalg::scaled_phi1(a, hi - lo) * input_column(s));
}

}  // namespace isslyap
