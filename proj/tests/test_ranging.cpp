#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "uwbpos/ranging.hpp"
#include "test_support.hpp"

namespace uwbpos {
namespace {

using testing::code_of;

PerAnchorDistortion uniform(double a, double b) { return {LinearDistortion{a, b}, {a, b}, {a, b}}; }

TEST(Ranging, SimulateIdentityNoiseless) {
  const auto s = simulate_measurement({500, 1000}, AnchorSet::standard(), kIdentityDistortion, {0.0, 1});
  for (double d : s.measured) EXPECT_NEAR(d, 1118.033988749895, 1e-9);
}

TEST(Ranging, SimulateDistortedNoiseless) {
  const auto s = simulate_measurement({500, 1000}, AnchorSet::standard(), uniform(1.05, 50), {0.0, 1});
  EXPECT_NEAR(s.measured[0], 1223.9356881873896, 1e-9);
}

TEST(Ranging, SimulateAtAnchorLeavesOffset) {
  const auto s = simulate_measurement({0, 0}, AnchorSet::standard(), uniform(1.0, 20), {0.0, 1});
  EXPECT_DOUBLE_EQ(s.measured[0], 20.0);
}

TEST(Ranging, SimulateClampsAtZero) {
  const auto s = simulate_measurement({0, 0}, AnchorSet::standard(), uniform(1.0, -50), {0.0, 1});
  EXPECT_EQ(s.measured[0], 0.0);
}

TEST(Ranging, SimulateRejectsNonPositiveSlope) {
  EXPECT_EQ(code_of([] { simulate_measurement({1, 1}, AnchorSet::standard(), uniform(0.0, 0), {0.0, 1}); }),
            ErrorCode::InvalidSlope);
}

TEST(Ranging, FitExamples) {
  const std::vector<ReferenceObservation> identity{{1000, 1000}, {2000, 2000}};
  auto fit = fit_linear_model(identity);
  EXPECT_DOUBLE_EQ(fit.a, 1.0);
  EXPECT_DOUBLE_EQ(fit.b, 0.0);

  const std::vector<ReferenceObservation> distorted{{1000, 1100}, {2000, 2150}};
  fit = fit_linear_model(distorted);
  EXPECT_NEAR(fit.a, 1.05, 1e-12);
  EXPECT_NEAR(fit.b, 50.0, 1e-9);

  const std::vector<ReferenceObservation> degenerate{{500, 500}, {500, 600}};
  EXPECT_EQ(code_of([&] { fit_linear_model(degenerate); }), ErrorCode::DegenerateFit);
}

TEST(Ranging, FitErrors) {
  const std::vector<ReferenceObservation> one{{1000, 1000}};
  EXPECT_EQ(code_of([&] { fit_linear_model(one); }), ErrorCode::EmptyInput);
  const std::vector<ReferenceObservation> decreasing{{1000, 2000}, {2000, 1000}};
  EXPECT_EQ(code_of([&] { fit_linear_model(decreasing); }), ErrorCode::InvalidSlope);
}

TEST(Ranging, LeastSquaresFitMatchesNormalEquations) {
  // Oracle: closed-form normal equations solved by Cramer's rule.
  const std::vector<ReferenceObservation> obs{{100, 160}, {700, 790}, {1500, 1640}, {2100, 2240}};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& o : obs) {
    sx += o.real;
    sy += o.measured;
    sxx += o.real * o.real;
    sxy += o.real * o.measured;
  }
  const double n = static_cast<double>(obs.size());
  const double det = n * sxx - sx * sx;
  const double a = (n * sxy - sx * sy) / det;
  const double b = (sxx * sy - sx * sxy) / det;
  const auto fit = fit_linear_model(obs);
  EXPECT_NEAR(fit.a, a, 1e-12);
  EXPECT_NEAR(fit.b, b, 1e-9);
}

TEST(Ranging, AverageExamples) {
  const std::vector<RangingSample> one{{"p", {0, 0}, {100, 200, 300}}};
  EXPECT_EQ(average_measurements(one), (DistanceTriple{100, 200, 300}));
  const std::vector<RangingSample> two{{"p", {0, 0}, {100, 200, 300}}, {"p", {0, 0}, {300, 200, 100}}};
  EXPECT_EQ(average_measurements(two), (DistanceTriple{200, 200, 200}));
  EXPECT_EQ(code_of([] { average_measurements({}); }), ErrorCode::EmptyInput);
  const std::vector<RangingSample> mixed{{"p", {0, 0}, {1, 1, 1}}, {"q", {0, 0}, {1, 1, 1}}};
  EXPECT_EQ(code_of([&] { average_measurements(mixed); }), ErrorCode::InvalidArgument);
}

TEST(Ranging, AverageOfThreeHundredNoisyRepeats) {
  MeasurementSimulator sim({30.0, 2024});
  std::vector<RangingSample> samples;
  for (int r = 0; r < 300; ++r) samples.push_back(sim.measure("p", {900, 100}, AnchorSet::standard(), kIdentityDistortion));
  const auto mean = average_measurements(samples);
  EXPECT_NEAR(mean[0], 905.5385138137417, 6.0);
  EXPECT_NEAR(mean[1], 2102.379604162864, 6.0);
  EXPECT_NEAR(mean[2], 1902.6297590440447, 6.0);
}

TEST(Ranging, McScalingExamples) {
  EXPECT_DOUBLE_EQ(apply_mc_scaling(1200.0, 90.0), 1080.0);
  EXPECT_EQ(apply_mc_scaling(900.0, 90.0), 900.0);
  EXPECT_EQ(apply_mc_scaling(1000.0, 80.0), 1000.0);
  EXPECT_EQ(code_of([] { apply_mc_scaling(1200.0, 0.0); }), ErrorCode::InvalidK);
  EXPECT_EQ(code_of([] { apply_mc_scaling(1200.0, 100.5); }), ErrorCode::InvalidK);
  EXPECT_EQ(apply_mc_scaling(1234.5, 100.0), 1234.5);
}

TEST(RangingProperty, NoiselessTwoPointFitRecovers) {
  const auto anchors = AnchorSet::standard();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ua(0.8, 1.2), ub(-100.0, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = ua(rng), b = ub(rng);
    const Point2D p{100, 100}, q{900, 1900};
    std::vector<ReferenceObservation> obs;
    for (Point2D r : {p, q}) {
      const auto s = simulate_measurement(r, anchors, uniform(a, b), {0.0, 1});
      obs.push_back({euclidean_distance(r, anchors[0]), s.measured[0]});
    }
    const auto fit = fit_linear_model(obs);
    EXPECT_LE(std::abs(fit.a - a) / std::abs(a), 1e-9);
    EXPECT_LE(std::abs(fit.b - b) / std::abs(b), 1e-9);
  }
}

TEST(RangingProperty, NoisyAveragedFitRecovers) {
  const auto anchors = AnchorSet::standard();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ua(0.8, 1.2), ub(-100.0, 100.0);
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const double a = ua(rng), b = ub(rng);
    MeasurementSimulator sim({30.0, 1000 + trial});
    std::vector<ReferenceObservation> obs;
    for (Point2D r : {Point2D{100, 100}, Point2D{900, 1900}}) {
      std::vector<RangingSample> repeats;
      for (int k = 0; k < 300; ++k) repeats.push_back(sim.measure("r", r, anchors, uniform(a, b)));
      obs.push_back({euclidean_distance(r, anchors[0]), average_measurements(repeats)[0]});
    }
    const auto fit = fit_linear_model(obs);
    EXPECT_NEAR(fit.a, a, 0.02) << "trial " << trial;
    EXPECT_NEAR(fit.b, b, 20.0) << "trial " << trial;
  }
}

TEST(RangingProperty, McScalingIdentityBelowThresholdAndMonotone) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> small(0.0, 1000.0), any(0.0, 5000.0), uk(1.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double k = uk(rng);
    const double x = small(rng);
    EXPECT_EQ(apply_mc_scaling(x, k), x);
    // Ordering holds within each side of the threshold; K < 100 folds values
    // just above it below the ones just under it.
    double p = any(rng), q = any(rng);
    if ((p > kCalibrationThreshold) != (q > kCalibrationThreshold)) q = p > kCalibrationThreshold ? p + small(rng) : p * 0.5;
    if (p <= q) EXPECT_LE(apply_mc_scaling(p, k), apply_mc_scaling(q, k));
    else EXPECT_GE(apply_mc_scaling(p, k), apply_mc_scaling(q, k));
  }
}

TEST(RangingProperty, SeedDeterminism) {
  MeasurementSimulator first({30.0, 77}), second({30.0, 77}), other({30.0, 78});
  bool differs = false;
  for (int i = 0; i < 50; ++i) {
    const auto a = first.measure("p", {250, 500}, AnchorSet::standard(), uniform(1.05, 50));
    const auto b = second.measure("p", {250, 500}, AnchorSet::standard(), uniform(1.05, 50));
    const auto c = other.measure("p", {250, 500}, AnchorSet::standard(), uniform(1.05, 50));
    EXPECT_EQ(a.measured, b.measured);
    differs = differs || a.measured != c.measured;
  }
  EXPECT_TRUE(differs);
}

TEST(MeasurementCsv, RoundTripsExactly) {
  MeasurementSimulator sim({30.0, 3});
  std::vector<RangingSample> samples;
  for (int i = 0; i < 20; ++i) samples.push_back(sim.measure("T" + std::to_string(i % 3), {250.5, 1e3 / 3}, AnchorSet::standard(), uniform(1.05, 50)));
  const auto text = format_measurement_csv(samples);
  EXPECT_EQ(text.substr(0, text.find('\n')), "point_id,x_true_mm,y_true_mm,d0_mm,d1_mm,d2_mm");
  const auto parsed = parse_measurement_csv(text);
  ASSERT_EQ(parsed.size(), samples.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    EXPECT_EQ(parsed[i].point_id, samples[i].point_id);
    EXPECT_EQ(parsed[i].true_pos, samples[i].true_pos);
    EXPECT_EQ(parsed[i].measured, samples[i].measured);
  }
  EXPECT_EQ(format_measurement_csv(parsed), text);
}

TEST(MeasurementCsv, RejectsMalformedInput) {
  EXPECT_EQ(code_of([] { parse_measurement_csv("id,x,y,d0,d1,d2\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_measurement_csv("point_id,x_true_mm,y_true_mm,d0_mm,d1_mm,d2_mm\nT1,1,2,3,4\n"); }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_measurement_csv("point_id,x_true_mm,y_true_mm,d0_mm,d1_mm,d2_mm\nT1,1,2,3,x,5\n"); }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_measurement_csv("point_id,x_true_mm,y_true_mm,d0_mm,d1_mm,d2_mm\nT1,1,2,-3,4,5\n"); }),
            ErrorCode::ParseError);
}

}  // namespace
}  // namespace uwbpos
