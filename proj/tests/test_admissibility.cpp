#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "isslyap/admissibility.hpp"
#include "isslyap/model_zoo.hpp"

using namespace isslyap;

namespace {

SystemFamily zoo(const std::string& name) {
  return [name](Index n) { return make_model(name, n); };
}

SpectralSystem scalar(double lambda, double b) { return SpectralSystem(Vector::Constant(1, lambda), Vector::Constant(1, b)); }

}  // namespace

TEST(ClassifyTrend, Verdicts) {
  const std::vector<double> n{4, 16, 64};
  EXPECT_EQ(classify_trend(n, std::vector<double>{2, 4, 8}).verdict, Verdict::diverging);
  EXPECT_NEAR(classify_trend(n, std::vector<double>{2, 4, 8}).slope, 0.5, 1e-14);
  EXPECT_EQ(classify_trend(n, std::vector<double>{1.0, 1.2, 1.201}).verdict, Verdict::bounded);
  EXPECT_EQ(classify_trend(n, std::vector<double>{1.0, 1.03, 1.06}).verdict, Verdict::inconclusive);
  EXPECT_EQ(classify_trend(n, std::vector<double>{0, 0, 0}).verdict, Verdict::bounded);
  EXPECT_THROW(classify_trend(std::vector<double>{4, 16}, std::vector<double>{1, 2}), InvalidArgument);
}

TEST(OperatorClassScan, CounterexampleHalfDiverges) {
  const std::vector<Index> modes{4, 16, 64};
  const auto r = operator_class_scan(zoo("counterexample"), modes, 0.5);
  ASSERT_EQ(r.norms_by_modes.size(), 3u);
  EXPECT_NEAR(r.norms_by_modes[0].norm, 2.0, 1e-14);
  EXPECT_NEAR(r.norms_by_modes[1].norm, 4.0, 1e-14);
  EXPECT_NEAR(r.norms_by_modes[2].norm, 8.0, 1e-13);
  EXPECT_EQ(r.verdict, Verdict::diverging);
  EXPECT_NEAR(r.growth_exponent, 0.5, 1e-12);
}

TEST(OperatorClassScan, CounterexampleThreeQuartersBounded) {
  const std::vector<Index> modes{4, 16, 64};
  const auto r = operator_class_scan(zoo("counterexample"), modes, 0.75);
  EXPECT_EQ(r.verdict, Verdict::bounded);
  EXPECT_NEAR(r.norms_by_modes.back().norm, std::sqrt(1.0 / (std::numbers::sqrt2 - 1.0)), 1e-9);
}

TEST(OperatorClassScan, HeatModelsAtHalf) {
  const std::vector<Index> modes{16, 64, 256};
  EXPECT_EQ(operator_class_scan(zoo("heat-neumann"), modes, 0.5).verdict, Verdict::bounded);
  EXPECT_EQ(operator_class_scan(zoo("heat-dirichlet"), modes, 0.5).verdict, Verdict::diverging);
}

TEST(OperatorClassScan, DirichletThresholdAtThreeQuarters) {
  // sum (n pi)^{2-4 gamma} converges iff gamma > 3/4.
  const std::vector<Index> modes{16, 64, 256};
  EXPECT_EQ(operator_class_scan(zoo("heat-dirichlet"), modes, 0.75).verdict, Verdict::diverging);
  EXPECT_EQ(operator_class_scan(zoo("heat-dirichlet"), modes, 0.95).verdict, Verdict::bounded);
}

TEST(OperatorClassScan, NeumannBoundedBetweenQuarterAndHalf) {
  const std::vector<Index> modes{16, 64, 256};
  EXPECT_EQ(operator_class_scan(zoo("heat-neumann"), modes, 0.4).verdict, Verdict::bounded);
  EXPECT_EQ(operator_class_scan(zoo("heat-neumann"), modes, 0.25).verdict, Verdict::diverging);
}

TEST(OperatorClassScan, Preconditions) {
  EXPECT_THROW(operator_class_scan(zoo("heat-neumann"), std::vector<Index>{4, 8}, 0.5), InvalidArgument);
  EXPECT_THROW(operator_class_scan(zoo("heat-neumann"), std::vector<Index>{4, 8, 16}, -1.0), InvalidArgument);
}

TEST(InputLags, MeshShape) {
  const auto lags = input_lags(2.0, 10, 1e4);
  EXPECT_EQ(lags.front(), 0.0);
  EXPECT_EQ(lags.back(), 2.0);
  for (std::size_t i = 1; i < lags.size(); ++i) EXPECT_GT(lags[i], lags[i - 1]);
  EXPECT_LE(lags[1], 1.0 / (16.0 * 1e4) * 1.2);
  for (int j = 1; j <= 10; ++j) {
    EXPECT_TRUE(std::any_of(lags.begin(), lags.end(), [&](double t) { return std::abs(t - 0.2 * j) < 1e-14; }));
  }
  EXPECT_THROW(input_lags(2.0, 7, 1.0), InvalidArgument);
  EXPECT_THROW(input_lags(0.0, 10, 1.0), InvalidArgument);
}

TEST(AdmissibilityConstant, ScalarTwoAdmissibility) {
  // K^2 = int_0^T e^{-2s} ds -> 1/2.
  const auto e = admissibility_constant(scalar(1.0, 1.0), InputExponent::two, 20.0, 1000);
  EXPECT_NEAR(e.constant, std::sqrt(0.5), 1e-4);
  EXPECT_LE(e.constant, std::sqrt(0.5 * (1.0 - std::exp(-40.0))) * (1.0 + 1e-12));
}

TEST(AdmissibilityConstant, ScalarInfinityAndOne) {
  const auto s = scalar(1.0, 1.0);
  EXPECT_NEAR(admissibility_constant(s, InputExponent::infinity, 3.0, 10).constant, 1.0 - std::exp(-3.0), 1e-15);
  // sup_s |e^{-s}| = 1, approached by the finest segment (1 - e^{-l})/l.
  const double k1 = admissibility_constant(s, InputExponent::one, 3.0, 10).constant;
  EXPECT_LE(k1, 1.0);
  EXPECT_GT(k1, 1.0 - 1.0 / 16.0);
}

TEST(AdmissibilityConstant, ZeroInputOperator) {
  const SpectralSystem s(Vector{{1.0, 5.0}}, Vector::Zero(2));
  for (auto q : {InputExponent::one, InputExponent::two, InputExponent::infinity}) {
    EXPECT_EQ(admissibility_constant(s, q, 2.0, 16).constant, 0.0);
  }
}

TEST(AdmissibilityConstant, MatrixInfinityLowerBoundReachesDiagonalValue) {
  const auto s = make_model("heat-neumann", 6);
  const double exact = admissibility_constant(s, InputExponent::infinity, 2.0, 20).constant;
  const auto m = admissibility_constant(to_matrix_system(s), InputExponent::infinity, 2.0, 20);
  EXPECT_FALSE(m.exact);
  EXPECT_NEAR(m.constant, exact, 1e-12 * exact);
  const double two_s = admissibility_constant(s, InputExponent::two, 2.0, 20).constant;
  const double two_m = admissibility_constant(to_matrix_system(s), InputExponent::two, 2.0, 20).constant;
  EXPECT_NEAR(two_m, two_s, 1e-10 * two_s);
}

TEST(AdmissibilityTrend, MonotoneInHorizonAndModes) {
  const std::vector<Index> modes{4, 8, 16, 32};
  const std::vector<double> horizons{0.5, 1.0, 2.0, 4.0};
  for (const auto& name : model_names()) {
    for (auto q : {InputExponent::one, InputExponent::two, InputExponent::infinity}) {
      const auto est = admissibility_trend(zoo(name), q, modes, horizons, 0.1);
      for (const auto& p : est.trend) {
        for (const auto& r : est.trend) {
          if (r.modes >= p.modes && r.horizon >= p.horizon) {
            EXPECT_GE(r.constant, p.constant * (1.0 - 1e-12)) << name << " q=" << to_string(q);
          }
        }
      }
    }
  }
}

TEST(AdmissibilityTrend, ScalingCovariance) {
  const auto s = make_model("heat-dirichlet", 12);
  for (auto q : {InputExponent::one, InputExponent::two, InputExponent::infinity}) {
    const double k = admissibility_constant(s, q, 1.0, 10).constant;
    const double kc = admissibility_constant(s.scaled_input(-2.5), q, 1.0, 10).constant;
    EXPECT_NEAR(kc, 2.5 * k, 1e-12 * k);
  }
}

TEST(AdmissibilityTrend, CounterexampleBoundedDirichletDiverging) {
  const std::vector<Index> modes{16, 64, 256};
  const std::vector<double> horizons{10.0};
  const auto c = admissibility_trend(zoo("counterexample"), InputExponent::two, modes, horizons, 0.1);
  EXPECT_EQ(c.verdict, Verdict::bounded);
  const auto d = admissibility_trend(zoo("heat-dirichlet"), InputExponent::two, modes, horizons, 0.1);
  EXPECT_EQ(d.verdict, Verdict::diverging);
  const auto n = admissibility_trend(zoo("heat-neumann"), InputExponent::two, modes, horizons, 0.1);
  EXPECT_EQ(n.verdict, Verdict::bounded);
}

TEST(AdmissibilityTrend, SufficientConditionConsistency) {
  // A bounded gamma-scan for some gamma < 1/2 must come with a bounded q=2 trend.
  const std::vector<Index> modes{16, 64, 256};
  const std::vector<double> horizons{10.0};
  for (const auto& name : model_names()) {
    bool below_half = false;
    for (double g : {0.25, 0.4, 0.45}) {
      below_half = below_half || operator_class_scan(zoo(name), modes, g).verdict == Verdict::bounded;
    }
    if (below_half) {
      EXPECT_EQ(admissibility_trend(zoo(name), InputExponent::two, modes, horizons, 0.1).verdict, Verdict::bounded)
          << name;
    }
  }
}

TEST(IssVerdict, ZooModelsAndZeroInput) {
  const std::vector<Index> modes{16, 64, 256};
  const std::vector<double> horizons{10.0};
  auto verdict = [&](const std::string& name) {
    const auto est = admissibility_trend(zoo(name), InputExponent::two, modes, horizons, 0.1);
    return l2_iss_verdict(make_model(name, 256), est).status;
  };
  EXPECT_EQ(verdict("heat-neumann"), IssStatus::iss);
  EXPECT_EQ(verdict("heat-dirichlet"), IssStatus::not_iss);
  const SystemFamily zero = [](Index n) { return make_model("heat-dirichlet", n).scaled_input(0.0); };
  const auto est = admissibility_trend(zero, InputExponent::two, modes, horizons, 0.1);
  const auto v = l2_iss_verdict(zero(256), est);
  EXPECT_EQ(v.status, IssStatus::iss);
  EXPECT_FALSE(v.reasons.empty());
}

TEST(InputExponent, Parsing) {
  EXPECT_EQ(parse_input_exponent("1"), InputExponent::one);
  EXPECT_EQ(parse_input_exponent("2"), InputExponent::two);
  EXPECT_EQ(parse_input_exponent("inf"), InputExponent::infinity);
  EXPECT_THROW(parse_input_exponent("3"), InvalidArgument);
}
