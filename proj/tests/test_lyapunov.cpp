#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "isslyap/lyapunov.hpp"

using namespace isslyap;

namespace {

SpectralSystem diag(const Vector& l) { return SpectralSystem(l, Vector::Ones(l.size())); }

MatrixSystem random_hurwitz(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = g(rng);
  Eigen::EigenSolver<Matrix> es(a, false);
  a.diagonal().array() -= es.eigenvalues().real().maxCoeff() + 0.3;
  return MatrixSystem(a, Matrix::Ones(n, 1));
}

}  // namespace

TEST(QuadraticForm, ValidatesInput) {
  EXPECT_THROW(QuadraticForm::diagonal(Vector{{1.0, -1.0}}, ""), InvalidArgument);
  EXPECT_THROW(QuadraticForm::diagonal(Vector{{1.0, NAN}}, ""), InvalidArgument);
  EXPECT_THROW(QuadraticForm::dense(Matrix{{1.0, 2.0}, {0.0, 1.0}}, ""), InvalidArgument);
  EXPECT_THROW(QuadraticForm::dense(Matrix(2, 3), ""), InvalidArgument);
  const auto f = QuadraticForm::diagonal(Vector{{1.0, 2.0}}, "");
  EXPECT_THROW(f(Vector::Ones(3)), DimensionMismatch);
}

TEST(BuildVHalf, DiagonalWeightsAreOneHalf) {
  const auto s = diag(Vector{{0.5, 3.0}});
  const auto v = build_v_half(s);
  EXPECT_DOUBLE_EQ(v(Vector{{3.0, 4.0}}), 12.5);
  EXPECT_EQ(v.weights(), Vector::Constant(2, 0.5));
  EXPECT_EQ(v.generator_power(), 0.5);
  EXPECT_EQ(v.provenance(), provenance::kSquareFunction);
}

TEST(BuildWq, QuarterPowerExample) {
  // weights lambda^{-1/2}/2: (1/2, 1/(2 sqrt 2)).
  const auto w = build_w_q(diag(Vector{{1.0, 2.0}}), 0.25);
  EXPECT_NEAR(w(Vector::Ones(2)), 0.5 * (1.0 + 1.0 / std::numbers::sqrt2), 1e-15);
}

TEST(BuildWq, PlainIntegralIsMinusHalfInverseGenerator) {
  const Vector l{{1.0, 4.0, 9.0, 16.0}};
  const auto w = build_w_q(diag(l), 0.0);
  EXPECT_DOUBLE_EQ(w.a1(), 1.0 / 32.0);
  EXPECT_DOUBLE_EQ(w.a2(), 0.5);
  const Vector x{{1.0, -2.0, 0.5, 3.0}};
  EXPECT_NEAR(w(x), -0.5 * x.dot(generator_matrix(diag(l)).inverse() * x), 1e-15);
}

TEST(BuildWq, RejectsOutOfRangeExponent) {
  EXPECT_THROW(build_w_q(diag(Vector{{1.0}}), -0.1), InvalidArgument);
  EXPECT_THROW(build_w_q(diag(Vector{{1.0}}), 0.6), InvalidArgument);
}

TEST(BuildWq, ClosedFormMatchesDefiningIntegral) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lu(std::log(0.1), std::log(1e3));
  std::normal_distribution<double> g;
  for (int k = 0; k < 10; ++k) {
    std::vector<double> l(8);
    for (double& v : l) v = std::exp(lu(rng));
    std::sort(l.begin(), l.end());
    const SpectralSystem s(Eigen::Map<Vector>(l.data(), 8), Vector::Ones(8));
    Vector x(8);
    for (Index i = 0; i < 8; ++i) x(i) = g(rng);
    for (double q : {0.0, 0.25, 0.5}) {
      const double closed = build_w_q(s, q)(x);
      EXPECT_NEAR(defining_integral(s, q, x).value, closed, 1e-8 * closed) << "q=" << q;
    }
  }
}

TEST(BuildWq, DenseMatchesDefiningIntegralForDefectiveGenerator) {
  const MatrixSystem m(Matrix{{-1.0, 10.0}, {0.0, -1.0}}, Matrix{{0.0}, {1.0}});
  const Vector x{{0.3, -0.8}};
  for (double q : {0.0, 0.25, 0.5}) {
    const auto w = build_w_q(m, q);
    const double quad = defining_integral(m, q, x).value;
    EXPECT_NEAR(w(x), quad, 1e-8 * quad) << "q=" << q;
  }
}

TEST(BuildWq, DenseRouteReproducesDiagonalWeights) {
  const auto s = diag(Vector{{0.5, 2.0, 7.0}});
  const auto m = to_matrix_system(s);
  for (double q : {0.0, 0.3, 0.5}) {
    const Matrix p = build_w_q(m, q).matrix();
    const Vector w = build_w_q(s, q).weights();
    EXPECT_LT((p - Matrix(w.asDiagonal())).norm(), 1e-12 * w.norm());
  }
}

TEST(CoercivityTransition, ExponentsOnSquaredIntegers) {
  // lambda_n = n^2: a1(W_q) = lambda_N^{2q-1}/2 = N^{2(2q-1)}/2.
  for (Index n : {8, 16, 32, 64}) {
    Vector l(n);
    for (Index i = 0; i < n; ++i) l(i) = static_cast<double>((i + 1) * (i + 1));
    const double nn = static_cast<double>(n);
    for (double q : {0.0, 0.25}) {
      EXPECT_NEAR(build_w_q(diag(l), q).a1(), 0.5 * std::pow(nn, 2 * (2 * q - 1)), 1e-15);
    }
    EXPECT_DOUBLE_EQ(build_w_q(diag(l), 0.5).a1(), 0.5);
  }
}

TEST(Factorize, RecoversFormValue) {
  const auto f = QuadraticForm::dense(Matrix{{2.0, 1.0}, {1.0, 2.0}}, "");
  const FormFactor fac = factorize(f);
  EXPECT_NEAR(fac.apply(Vector{{1.0, 0.0}}).squaredNorm(), 2.0, 1e-14);
  const Matrix fd = fac.to_dense();
  EXPECT_LT((fd * fd - f.matrix()).norm(), 1e-14);
}

TEST(Factorize, RejectsIndefinite) {
  EXPECT_THROW(factorize(QuadraticForm::dense(Matrix{{1.0, 2.0}, {2.0, 1.0}}, "")), IndefiniteError);
}

TEST(LyapunovSolver, ResidualOnRandomSystems) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 10; ++k) {
    const auto m = random_hurwitz(rng, 2 + k % 7);
    const Index n = m.dimension();
    const Matrix q = Matrix::Identity(n, n);
    const Matrix x = linalg::solve_continuous_lyapunov(m.a_matrix(), q);
    const Matrix res = m.a_matrix().transpose() * x + x * m.a_matrix() + q;
    EXPECT_LT(res.norm(), 1e-10 * std::max(1.0, x.norm()));
    EXPECT_LT((x - x.transpose()).norm(), 1e-14 * x.norm());
  }
}

TEST(ContractionSimilarity, DiagonalExample) {
  const MatrixSystem m(Matrix{{-1.0, 0.0}, {0.0, -2.0}}, Matrix{{1.0}, {1.0}});
  const auto r = contraction_similarity(m, 2.0);
  EXPECT_NEAR(r.p(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(r.p(1, 1), 0.5, 1e-14);
  EXPECT_NEAR(r.p(0, 1), 0.0, 1e-14);
  EXPECT_NEAR(r.condition, 2.0, 1e-12);
  EXPECT_NEAR(r.decay_rate, 1.0, 1e-14);
  EXPECT_TRUE(r.dissipative_standard);
  EXPECT_TRUE(r.dissipative_new);
}

TEST(ContractionSimilarity, NonDissipativeInStandardProduct) {
  const MatrixSystem m(Matrix{{-1.0, 10.0}, {0.0, -1.0}}, Matrix{{0.0}, {1.0}});
  const Vector x = Vector::Ones(2) / std::numbers::sqrt2;
  EXPECT_NEAR(x.dot(m.a_matrix() * x), 4.0, 1e-14);
  const auto r = contraction_similarity(m);
  EXPECT_FALSE(r.dissipative_standard);
  EXPECT_TRUE(r.dissipative_new);
  EXPECT_LE(r.new_margin, 1e-10);
  EXPECT_THROW(contraction_similarity(m, 0.0), InvalidArgument);
}

TEST(ContractionSimilarity, RandomHurwitzProperty) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const auto m = random_hurwitz(rng, 2 + k % 7);
    const auto r = contraction_similarity(m, 1.0, 500, k);
    Eigen::SelfAdjointEigenSolver<Matrix> es(r.p);
    EXPECT_GT(es.eigenvalues()(0), 0.0);
    EXPECT_TRUE(r.dissipative_new);
  }
}

TEST(ContractionSimilarity, DiagonalClosedFormMatchesDenseSolve) {
  const auto s = diag(Vector{{0.5, 2.0, 7.0}});
  const auto d = contraction_similarity(s, 1.5);
  const auto m = contraction_similarity(to_matrix_system(s), 1.5);
  EXPECT_LT((d.p - m.p).norm(), 1e-13);
  EXPECT_NEAR(d.condition, 14.0, 1e-12);
  EXPECT_NEAR(d.decay_rate, m.decay_rate, 1e-13);
  EXPECT_TRUE(d.dissipative_new);
  // lambda_n = 2^n up to n = 256: cond(P) = 2^255 stays representable.
  Vector big(256);
  for (Index i = 0; i < 256; ++i) big(i) = std::ldexp(1.0, static_cast<int>(i + 1));
  EXPECT_EQ(contraction_similarity(diag(big)).condition, std::ldexp(1.0, 255));
}
