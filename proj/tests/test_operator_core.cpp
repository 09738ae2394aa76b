#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "isslyap/operator_core.hpp"

using namespace isslyap;

namespace {

SpectralSystem diag(std::initializer_list<double> l, std::initializer_list<double> b) {
  Vector lv(static_cast<Index>(l.size())), bv(static_cast<Index>(b.size()));
  Index i = 0;
  for (double v : l) lv(i++) = v;
  i = 0;
  for (double v : b) bv(i++) = v;
  return SpectralSystem(lv, bv);
}

// Rotation by theta, used to build non-diagonal matrices with known spectra.
Matrix rotation(double theta) {
  Matrix q(2, 2);
  q << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return q;
}

}  // namespace

TEST(SpectralSystem, RejectsInvalidData) {
  EXPECT_THROW(SpectralSystem(Vector(0), Vector(0)), InvalidSystem);
  EXPECT_THROW(diag({1, 2}, {1}), InvalidSystem);
  EXPECT_THROW(diag({0, 2}, {1, 1}), InvalidSystem);
  EXPECT_THROW(diag({-1, 2}, {1, 1}), InvalidSystem);
  EXPECT_THROW(diag({2, 1}, {1, 1}), InvalidSystem);
  EXPECT_THROW(diag({1, NAN}, {1, 1}), InvalidSystem);
  EXPECT_THROW(diag({1, 2}, {1, INFINITY}), InvalidSystem);
  EXPECT_NO_THROW(diag({1, 1}, {0, 0}));
}

TEST(MatrixSystem, RejectsNonHurwitzAndMalformed) {
  EXPECT_THROW(MatrixSystem(Matrix{{0.0, 1.0}, {-1.0, 0.0}}, Matrix{{0.0}, {1.0}}), InvalidSystem);
  EXPECT_THROW(MatrixSystem(Matrix{{1.0}}, Matrix{{1.0}}), InvalidSystem);
  EXPECT_THROW(MatrixSystem(Matrix(2, 3), Matrix(2, 1)), InvalidSystem);
  EXPECT_THROW(MatrixSystem(Matrix{{-1.0}}, Matrix(2, 1)), InvalidSystem);
  EXPECT_THROW(MatrixSystem(Matrix{{-NAN}}, Matrix{{1.0}}), InvalidSystem);
  const MatrixSystem m(Matrix{{-1.0, 10.0}, {0.0, -1.0}}, Matrix{{0.0}, {1.0}});
  EXPECT_DOUBLE_EQ(decay_floor(m), 1.0);
}

TEST(Semigroup, DiagonalHalvesAtLn2) {
  const auto s = diag({1, 2}, {0, 0});
  const Vector y = semigroup_apply(s, std::numbers::ln2, Vector::Ones(2));
  EXPECT_NEAR(y(0), 0.5, 1e-15);
  EXPECT_NEAR(y(1), 0.25, 1e-15);
}

TEST(Semigroup, ZeroTimeIsIdentityAndNegativeTimeThrows) {
  const auto s = diag({1, 2}, {0, 0});
  const Vector x{{3.0, -4.0}};
  EXPECT_EQ(semigroup_apply(s, 0.0, x), x);
  EXPECT_THROW(semigroup_apply(s, -1.0, x), InvalidArgument);
  EXPECT_THROW(semigroup_apply(s, 1.0, Vector::Ones(3)), DimensionMismatch);
}

TEST(Semigroup, MatrixMatchesClosedFormForTriangularGenerator) {
  // A = [[-1, 1], [0, -2]]: e^{At} = [[e^-t, e^-t - e^-2t], [0, e^-2t]].
  const MatrixSystem m(Matrix{{-1.0, 1.0}, {0.0, -2.0}}, Matrix{{0.0}, {1.0}});
  for (double t : {0.1, 1.0, 3.7}) {
    const Vector x{{0.3, -1.2}};
    const Vector y = semigroup_apply(m, t, x);
    const double e1 = std::exp(-t), e2 = std::exp(-2 * t);
    EXPECT_NEAR(y(0), e1 * x(0) + (e1 - e2) * x(1), 1e-14);
    EXPECT_NEAR(y(1), e2 * x(1), 1e-14);
  }
}

TEST(Semigroup, MatrixFormOfDiagonalSystemAgrees) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 20.0);
  std::vector<double> l(6);
  for (double& v : l) v = u(rng);
  std::sort(l.begin(), l.end());
  Vector lv = Eigen::Map<Vector>(l.data(), 6);
  const SpectralSystem s(lv, Vector::Ones(6));
  const MatrixSystem m = to_matrix_system(s);
  const Vector x = Vector::LinSpaced(6, -1.0, 1.0);
  EXPECT_LT((semigroup_apply(s, 0.3, x) - semigroup_apply(m, 0.3, x)).norm(), 1e-14);
}

TEST(FractionalPower, DiagonalSquareRoot) {
  const auto s = diag({4, 9}, {0, 0});
  const Vector y = fractional_power_apply(s, 0.5, Vector::Ones(2));
  EXPECT_DOUBLE_EQ(y(0), 2.0);
  EXPECT_DOUBLE_EQ(y(1), 3.0);
}

TEST(FractionalPower, SpectralAndSchurRoutesAgreeOnNormalMatrix) {
  const Matrix q = rotation(0.4);
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 4.0, 9.0;
  const MatrixSystem m(-(q * d * q.transpose()), Matrix{{1.0}, {0.0}});
  Matrix expected = Matrix::Zero(2, 2);
  expected.diagonal() << 2.0, 3.0;
  expected = q * expected * q.transpose();
  EXPECT_LT((fractional_power_matrix(m, 0.5, PowerMethod::spectral) - expected).norm(), 1e-12);
  EXPECT_LT((fractional_power_matrix(m, 0.5, PowerMethod::schur) - expected).norm(), 1e-12);
}

TEST(FractionalPower, DefectiveMatrixNeedsSchurRoute) {
  // -A = I + N with N nilpotent, so (-A)^{1/2} = I + N/2.
  const MatrixSystem m(Matrix{{-1.0, 10.0}, {0.0, -1.0}}, Matrix{{0.0}, {1.0}});
  EXPECT_THROW(fractional_power_matrix(m, 0.5, PowerMethod::spectral), ConditioningError);
  const Matrix r = fractional_power_matrix(m, 0.5, PowerMethod::schur);
  EXPECT_LT((r - Matrix{{1.0, -5.0}, {0.0, 1.0}}).norm(), 1e-12);
}

TEST(ExtrapolationNorm, HalfPowerExample) {
  const auto s = diag({1, 4}, {0, 0});
  EXPECT_NEAR(extrapolation_norm(s, 0.5, Vector{{0.0, 2.0}}), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(extrapolation_norm(s, 0.0, Vector{{3.0, 4.0}}), 5.0);
  EXPECT_THROW(extrapolation_norm(s, -0.1, Vector{{0.0, 2.0}}), InvalidArgument);
}

TEST(ExtrapolationNorm, NonincreasingInGammaWhenSpectrumAboveOne) {
  const auto s = diag({1.5, 3, 8}, {1, 1, 1});
  double prev = INFINITY;
  for (double g = 0.0; g <= 2.0; g += 0.25) {
    const double v = extrapolation_norm(s, g, s.input_coeffs());
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(DecayBound, SquareRootSupremum) {
  // sup_t t^{1/2} e^{-t} e^{t/2} = sup t^{1/2} e^{-t/2} = e^{-1/2}, attained at t = 1.
  const auto s = diag({1}, {0});
  const DecayBound b = decay_bound_estimate(s, 0.5);
  EXPECT_DOUBLE_EQ(b.rate, 0.5);
  EXPECT_NEAR(b.prefactor, std::exp(-0.5), 1e-10);
}

TEST(DecayBound, ZeroPowerGivesUnitPrefactorForDiagonal) {
  const auto s = diag({2, 5, 40}, {0, 0, 0});
  const DecayBound b = decay_bound_estimate(s, 0.0);
  EXPECT_DOUBLE_EQ(b.prefactor, 1.0);
}

TEST(DecayBound, DominatesSampledNorms) {
  const MatrixSystem m(Matrix{{-1.0, 10.0}, {0.0, -1.0}}, Matrix{{0.0}, {1.0}});
  for (double r : {0.0, 0.25, 0.5}) {
    const DecayBound b = decay_bound_estimate(m, r);
    for (double t = 0.01; t < 30.0; t *= 1.3) {
      EXPECT_LE(power_semigroup_norm(m, r, t), b(t) * (1.0 + 1e-9)) << "r=" << r << " t=" << t;
    }
  }
}

TEST(DecayBound, RejectsNegativePowerAndRate) {
  const auto s = diag({1}, {0});
  EXPECT_THROW(decay_bound_estimate(s, -0.5), InvalidArgument);
  DecayOptions o;
  o.rate_override = -1.0;
  EXPECT_THROW(decay_bound_estimate(s, 0.5, o), InvalidArgument);
}

TEST(SquaredDecayIntegral, ClosedForms) {
  // r = 0: sup_n e^{-2 lambda_n t} = e^{-2t}, integral 1/2.
  EXPECT_NEAR(squared_decay_integral(diag({1, 2}, {0, 0}), 0.0).value, 0.5, 1e-10);
  // Single mode lambda = 4, r = 1/4: lambda^{1/2} / (2 lambda) = 1/4.
  EXPECT_NEAR(squared_decay_integral(diag({4}, {0}), 0.25).value, 0.25, 1e-9);
  EXPECT_THROW(squared_decay_integral(diag({4}, {0}), 0.5), InvalidArgument);
}

TEST(Increment, ScalarClosedForm) {
  const auto s = diag({2}, {1});
  const double h = 0.1, u = 3.0;
  const double next = std::exp(-2 * h) + u * (1 - std::exp(-2 * h)) / 2;
  EXPECT_NEAR(increment(s, Vector::Ones(1), u, h)(0), next - 1.0, 1e-16);
  EXPECT_NEAR(step(s, Vector::Ones(1), u, h)(0), next, 1e-15);
}

TEST(Increment, MatrixMatchesVariationOfConstants) {
  // Invertible A: x(h) = e^{Ah} x + A^{-1}(e^{Ah} - I) B u.
  const Matrix a{{-1.0, 2.0}, {-0.5, -3.0}};
  const Matrix b{{1.0}, {-2.0}};
  const MatrixSystem m(a, b);
  const Vector x{{0.4, 1.1}};
  const double u = -0.7, h = 0.25;
  const Matrix e = (a * h).exp();
  const Vector expected = e * x + a.inverse() * (e - Matrix::Identity(2, 2)) * b.col(0) * u;
  EXPECT_LT((step(m, x, u, h) - expected).norm(), 1e-14);
  EXPECT_LT((increment(m, x, u, h) - (expected - x)).norm(), 1e-14);
}

TEST(SegmentResponse, DiagonalMatchesSubtractionFormula) {
  const auto s = diag({0.5, 3.0}, {1.0, -2.0});
  const Vector r = segment_response(s, 0.2, 0.9);
  for (Index i = 0; i < 2; ++i) {
    const double l = s.eigenvalues()(i);
    EXPECT_NEAR(r(i), s.input_coeffs()(i) * (std::exp(-l * 0.2) - std::exp(-l * 0.9)) / l, 1e-15);
  }
  const Vector rm = segment_response(to_matrix_system(s), 0.2, 0.9);
  EXPECT_LT((r - rm).norm(), 1e-14);
}
