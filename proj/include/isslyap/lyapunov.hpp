#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>

#include "isslyap/errors.hpp"
#include "isslyap/linalg.hpp"
#include "isslyap/operator_core.hpp"
#include "isslyap/quadrature.hpp"

namespace isslyap {

namespace provenance {
inline constexpr const char* kSquareFunction =
    "square-function Lyapunov function V(x)=int_0^inf ||(-A)^{1/2}T(t)x||^2 dt (coercive for analytic, "
    "contraction-similar semigroups)";
inline constexpr const char* kFractionalFamily =
    "fractional family W_q(x)=int_0^inf ||(-A)^q T(t)x||^2 dt (non-coercive L2-ISS for p+2q<1, B in L(U,X_{-p}))";
inline constexpr const char* kPlainIntegral =
    "plain integral W(x)=int_0^inf ||T(t)x||^2 dt (non-coercive L2-ISS when (-A)^{-p}B bounded, p<1)";
inline constexpr const char* kHalfNorm =
    "half norm squared V(x)=||x||^2/2 (coercive L2-ISS for self-adjoint A, B in L(U,X_{-1/2}))";
inline constexpr const char* kContraction =
    "equivalent scalar product <Px,y> with A^*P+PA=-eps I (dissipativity in a new scalar product)";
}  // namespace provenance

/// V(x) = <Px, x>, stored either as positive diagonal weights or as a dense
/// symmetric matrix. Coercivity bounds a1 <= V(x)/|x|^2 <= a2 are cached.
class QuadraticForm {
 public:
  static QuadraticForm diagonal(Vector weights, std::string provenance, std::optional<double> generator_power = {}) {
    if (weights.size() < 1) throw InvalidArgument("QuadraticForm: empty weight vector");
    for (Index i = 0; i < weights.size(); ++i) {
      if (!std::isfinite(weights(i)) || !(weights(i) > 0.0)) {
        throw InvalidArgument("QuadraticForm: weights must be positive and finite");
      }
    }
    QuadraticForm f;
    f.a1_ = weights.minCoeff();
    f.a2_ = weights.maxCoeff();
    f.rep_ = std::move(weights);
    f.provenance_ = std::move(provenance);
    f.generator_power_ = generator_power;
    return f;
  }

  // P need only be symmetric here; positivity is checked by factorize().
  static QuadraticForm dense(Matrix p, std::string provenance, std::optional<double> generator_power = {}) {
    if (p.rows() < 1 || p.rows() != p.cols()) throw InvalidArgument("QuadraticForm: P must be square and nonempty");
    if (!p.allFinite()) throw InvalidArgument("QuadraticForm: P has non-finite entries");
    const double asym = (p - p.transpose()).norm();
    if (asym > 1e-10 * std::max(1.0, p.norm())) throw InvalidArgument("QuadraticForm: P is not symmetric");
    p = 0.5 * (p + p.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(p, Eigen::EigenvaluesOnly);
    QuadraticForm f;
    f.a1_ = es.eigenvalues()(0);
    f.a2_ = es.eigenvalues()(p.rows() - 1);
    f.rep_ = std::move(p);
    f.provenance_ = std::move(provenance);
    f.generator_power_ = generator_power;
    return f;
  }

  bool is_diagonal() const noexcept { return std::holds_alternative<Vector>(rep_); }
  Index dimension() const noexcept {
    return is_diagonal() ? std::get<Vector>(rep_).size() : std::get<Matrix>(rep_).rows();
  }
  const Vector& weights() const { return std::get<Vector>(rep_); }
  const Matrix& matrix() const { return std::get<Matrix>(rep_); }
  Matrix to_dense() const {
    if (!is_diagonal()) return matrix();
    return weights().asDiagonal();
  }

  double a1() const noexcept { return a1_; }
  double a2() const noexcept { return a2_; }
  const std::string& provenance() const noexcept { return provenance_; }
  // q when the form is W_q of some generator; needed by proof_decomposition.
  std::optional<double> generator_power() const noexcept { return generator_power_; }

  Vector apply(const Vector& x) const {
    check(x);
    if (is_diagonal()) return (weights().array() * x.array()).matrix();
    return matrix() * x;
  }
  double operator()(const Vector& x) const {
    check(x);
    if (is_diagonal()) return (weights().array() * x.array().square()).sum();
    return x.dot(matrix() * x);
  }
  double bilinear(const Vector& x, const Vector& y) const { return apply(x).dot(y); }

 private:
  QuadraticForm() = default;
  void check(const Vector& x) const {
    if (x.size() != dimension()) throw DimensionMismatch("QuadraticForm: state length does not match form");
  }

  std::variant<Vector, Matrix> rep_;
  double a1_ = 0.0;
  double a2_ = 0.0;
  std::string provenance_;
  std::optional<double> generator_power_;
};

/// F with V(x) = ||F x||^2.
struct FormFactor {
  std::variant<Vector, Matrix> rep;

  Vector apply(const Vector& x) const {
    if (const auto* d = std::get_if<Vector>(&rep)) return (d->array() * x.array()).matrix();
    return std::get<Matrix>(rep) * x;
  }
  Matrix to_dense() const {
    if (const auto* d = std::get_if<Vector>(&rep)) return d->asDiagonal();
    return std::get<Matrix>(rep);
  }
};

inline std::pair<double, double> coercivity_bounds(const QuadraticForm& form) { return {form.a1(), form.a2()}; }

/// Symmetric square root F = P^{1/2}. Eigenvalues below -tol * a2 are
/// rejected; smaller negative rounding noise is clamped to zero.
inline FormFactor factorize(const QuadraticForm& form, double tol = 1e-10) {
  if (form.is_diagonal()) return {Vector(form.weights().array().sqrt())};
  Eigen::SelfAdjointEigenSolver<Matrix> es(form.matrix());
  Vector ev = es.eigenvalues();
  const double scale = std::max(std::abs(ev.maxCoeff()), std::abs(ev.minCoeff()));
  if (ev.minCoeff() < -tol * scale) {
    throw IndefiniteError("factorize: P is indefinite (smallest eigenvalue " + std::to_string(ev.minCoeff()) + ")");
  }
  ev = ev.cwiseMax(0.0).cwiseSqrt();
  Matrix f = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return {Matrix(0.5 * (f + f.transpose()))};
}

/// W_q(x) = int_0^inf ||(-A)^q T(t) x||^2 dt for 0 <= q <= 1/2.
/// Diagonal: weights lambda_n^{2q-1}/2. Dense: P solves A^T P + P A = -S^T S
/// with S = (-A)^q (Schur-Pade power, so defective A is fine).
inline QuadraticForm build_w_q(const SpectralSystem& sys, double q) {
  if (!(q >= 0.0 && q <= 0.5)) throw InvalidArgument("build_w_q: q must lie in [0, 1/2]");
  Vector w = 0.5 * sys.eigenvalues().array().pow(2.0 * q - 1.0).matrix();
  return QuadraticForm::diagonal(std::move(w), provenance::kFractionalFamily, q);
}
inline QuadraticForm build_w_q(const MatrixSystem& sys, double q) {
  if (!(q >= 0.0 && q <= 0.5)) throw InvalidArgument("build_w_q: q must lie in [0, 1/2]");
  const Matrix s = fractional_power_matrix(sys, q, PowerMethod::schur);
  const Matrix p = linalg::solve_continuous_lyapunov(sys.a_matrix(), s.transpose() * s);
  return QuadraticForm::dense(p, provenance::kFractionalFamily, q);
}

/// V(x) = int_0^inf ||(-A)^{1/2} T(t) x||^2 dt. For diagonal systems every
/// weight is lambda_n * 1/(2 lambda_n) = 1/2.
template <LinearSystem S>
QuadraticForm build_v_half(const S& sys) {
  const QuadraticForm w = build_w_q(sys, 0.5);
  if (w.is_diagonal()) return QuadraticForm::diagonal(w.weights(), provenance::kSquareFunction, 0.5);
  return QuadraticForm::dense(w.matrix(), provenance::kSquareFunction, 0.5);
}

template <LinearSystem S>
QuadraticForm build_w_plain(const S& sys) {
  const QuadraticForm w = build_w_q(sys, 0.0);
  if (w.is_diagonal()) return QuadraticForm::diagonal(w.weights(), provenance::kPlainIntegral, 0.0);
  return QuadraticForm::dense(w.matrix(), provenance::kPlainIntegral, 0.0);
}

inline QuadraticForm build_half_norm(const SpectralSystem& sys) {
  return QuadraticForm::diagonal(Vector::Constant(sys.dimension(), 0.5), provenance::kHalfNorm);
}
inline QuadraticForm build_half_norm(const MatrixSystem& sys) {
  return QuadraticForm::dense(0.5 * Matrix::Identity(sys.dimension(), sys.dimension()), provenance::kHalfNorm);
}

/// Quadrature of int_0^inf ||(-A)^q T(t) x||^2 dt straight from the
/// definition, independent of the closed forms above.
inline quadrature::Result defining_integral(const SpectralSystem& sys, double q, const Vector& x) {
  const Vector sx = fractional_power_apply(sys, q, x);
  const auto lam = sys.eigenvalues().array();
  auto f = [&](double t) { return ((-2.0 * lam * t).exp() * sx.array().square()).sum(); };
  return quadrature::integrate_decaying(f, decay_floor(sys), stiffness(sys));
}
inline quadrature::Result defining_integral(const MatrixSystem& sys, double q, const Vector& x) {
  const Vector sx = q == 0.0 ? x : Vector(fractional_power_matrix(sys, q, PowerMethod::schur) * x);
  const Matrix& a = sys.a_matrix();
  // (-A)^q commutes with T(t), so ||(-A)^q T(t)x|| = ||T(t)(-A)^q x||.
  auto f = [&](double t) { return (linalg::expm(a * t) * sx).squaredNorm(); };
  return quadrature::integrate_decaying(f, decay_floor(sys), stiffness(sys));
}

struct SimilarityReport {
  Matrix p;                       // A^T P + P A = -eps I
  double epsilon = 1.0;
  double condition = 1.0;         // cond(P) = cond(S)^2 for S = P^{1/2}
  double standard_abscissa = 0;   // max Re<Ax,x>/|x|^2 in the original product
  double new_margin = 0;          // max over samples Re<Ax,Px>/|x|^2
  bool dissipative_standard = false;
  bool dissipative_new = false;
  int samples = 0;
  double decay_rate = 0;          // a with d/dt ||P^{1/2}x|| <= -a ||P^{1/2}x|| for B=0
};

/// Equivalent scalar product <x,y>_P in which A is (strictly) dissipative,
/// the finite-dimensional form of "T is similar to a contraction semigroup".
inline SimilarityReport contraction_similarity(const MatrixSystem& sys, double epsilon = 1.0, int samples = 1000,
                                               std::uint64_t seed = 1, double tol = 1e-10) {
  if (!(epsilon > 0.0)) throw InvalidArgument("contraction_similarity: epsilon must be positive");
  const Matrix& a = sys.a_matrix();
  const Index n = sys.dimension();
  SimilarityReport r;
  r.epsilon = epsilon;
  r.p = linalg::solve_continuous_lyapunov(a, epsilon * Matrix::Identity(n, n));
  Eigen::SelfAdjointEigenSolver<Matrix> pe(r.p, Eigen::EigenvaluesOnly);
  if (!(pe.eigenvalues()(0) > 0.0)) throw SolverError("contraction_similarity: P is not positive definite");
  r.condition = pe.eigenvalues()(n - 1) / pe.eigenvalues()(0);
  r.decay_rate = epsilon / (2.0 * pe.eigenvalues()(n - 1));

  Eigen::SelfAdjointEigenSolver<Matrix> se(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  r.standard_abscissa = se.eigenvalues()(n - 1);
  r.dissipative_standard = r.standard_abscissa <= tol;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  r.new_margin = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    Vector x(n);
    for (Index i = 0; i < n; ++i) x(i) = gauss(rng);
    x.normalize();
    r.new_margin = std::max(r.new_margin, (a * x).dot(r.p * x));
  }
  r.samples = samples;
  r.dissipative_new = r.new_margin <= tol;
  return r;
}
// Diagonal case in closed form, P = diag(eps / (2 lambda_n)); the dense solver
// loses the small eigenvalues once lambda_max / lambda_min nears 1/epsilon_mach.
inline SimilarityReport contraction_similarity(const SpectralSystem& sys, double epsilon = 1.0, int samples = 1000,
                                               std::uint64_t seed = 1, double tol = 1e-10) {
  if (!(epsilon > 0.0)) throw InvalidArgument("contraction_similarity: epsilon must be positive");
  const Vector& lam = sys.eigenvalues();
  const Index n = sys.dimension();
  SimilarityReport r;
  r.epsilon = epsilon;
  const Vector pd = (epsilon / 2.0) * lam.cwiseInverse();
  r.p = pd.asDiagonal();
  r.condition = lam(n - 1) / lam(0);
  r.decay_rate = epsilon / (2.0 * pd(0));
  r.standard_abscissa = -lam(0);
  r.dissipative_standard = r.standard_abscissa <= tol;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  r.new_margin = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    Vector x(n);
    for (Index i = 0; i < n; ++i) x(i) = gauss(rng);
    x.normalize();
    // <Ax, Px> = -sum lambda_n (eps / (2 lambda_n)) x_n^2
    r.new_margin = std::max(r.new_margin, -(lam.array() * pd.array() * x.array().square()).sum());
  }
  r.samples = samples;
  r.dissipative_new = r.new_margin <= tol;
  return r;
}

}  // namespace isslyap
