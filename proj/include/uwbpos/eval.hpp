#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uwbpos/bpnet.hpp"
#include "uwbpos/fingerprint.hpp"
#include "uwbpos/geometry.hpp"
#include "uwbpos/ranging.hpp"
#include "uwbpos/seeding.hpp"

namespace uwbpos::eval {

/// Arithmetic mean; throws EmptyInput on an empty list.
double mean_error(std::span<const double> errors);

/// 100 * (baseline - candidate) / baseline; throws ZeroBaseline unless
/// baseline > 0.
double improvement_percent(double baseline, double candidate);

/// The simulated physical setup: anchors, true ranging distortion and noise.
struct World {
  AnchorSet anchors = AnchorSet::standard();
  PerAnchorDistortion distortion = kIdentityDistortion;
  double sigma = 0.0;  ///< mm
};

struct LabeledPoint {
  std::string id;
  Point2D position;
};

/// Test points of the six-point layout; ids T1..T6.
std::vector<LabeledPoint> default_test_points();

/// Whether a test point is one of the three positions reported from the
/// hardware experiment, (250,500), (750,500) and (750,1500).
bool is_reported_test_point(Point2D p);

/// `repeats` seeded draws per point, point j using its own generator derived
/// from (seed, stream, j). Output is grouped by point, in point order.
std::vector<RangingSample> simulate_points(const World& world, std::span<const LabeledPoint> points,
                                           std::size_t repeats, std::uint64_t seed, SeedStream stream);

/// Reference points of a group with ids R1..Rn.
std::vector<LabeledPoint> reference_points(const ReferenceGroup& group);

/// Simulates `repeats` measurements of every reference point, then fits.
StrategyCoefficients calibrate_by_simulation(const World& world, const ReferenceGroup& group, std::size_t repeats,
                                             std::uint64_t seed);

struct TestPointResult {
  std::string point_id;
  Point2D truth;
  Point2D trilat_estimate;  ///< mean over repeats
  double trilat_error = 0.0;  ///< mean per-repeat error, mm
  std::size_t nn_cell = 0;    ///< most frequent cell, lowest id on ties
  Point2D nn_estimate;        ///< mean over repeats
  double nn_error = 0.0;      ///< mean per-repeat error, mm
};

struct ReportEcho {
  std::string label = "baseline";
  std::string strategy = "none";
  std::optional<double> k_percent;
  std::uint64_t seed = 0;
  double cell_size = 0.0;
  std::size_t repeats = 0;
  std::vector<std::string> synthetic_points;  ///< ids of test points not reported from hardware
};

struct EvaluationReport {
  std::vector<TestPointResult> points;
  double mean_trilat_error = 0.0;
  double mean_nn_error = 0.0;
  std::optional<double> improvement_percent;  ///< empty when the trilateration mean is zero
  ReportEcho echo;
};

struct ExperimentOptions {
  std::vector<LabeledPoint> test_points = default_test_points();
  std::size_t repeats = 300;
  std::optional<double> k_percent;
  std::uint64_t seed = 42;
  std::string strategy_label = "none";
};

/// Localises every repeat of every test point by trilateration and by the
/// classifier, after optional measurement-calibration scaling, and averages
/// the errors per point.
///
/// Measurements are simulated from `world` unless `ingested` is given, in
/// which case the first `repeats` rows whose true position matches each test
/// point are used (InsufficientData if there are fewer).
EvaluationReport run_experiment(const World& world, const bpnet::Classifier& classifier,
                                const ExperimentOptions& options,
                                const std::vector<RangingSample>* ingested = nullptr);

/// A no-scaling baseline followed by one report per K, all over the same
/// measurements.
std::vector<EvaluationReport> mc_sweep(const World& world, const bpnet::Classifier& classifier,
                                       const ExperimentOptions& options, std::span<const double> k_values,
                                       const std::vector<RangingSample>* ingested = nullptr);

inline constexpr std::string_view kPerPointHeader = "point_id,x_mm,y_mm,trilat_err_mm,nn_err_mm";
inline constexpr std::string_view kSummaryHeader =
    "label,strategy,k_percent,seed,cell_size_mm,repeats,n_points,mean_trilat_err_mm,mean_nn_err_mm,"
    "improvement_percent,synthetic_points";
inline constexpr std::string_view kPlotHeader = "series,point_id,error_mm,cdf";

std::string format_per_point_csv(const EvaluationReport& report);
std::string format_summary_csv(std::span<const EvaluationReport> reports);
std::string format_plot_data_csv(const EvaluationReport& report);

/// Writes per_point.csv, summary.csv and plot_data.csv into `dir` and
/// returns the paths written.
std::vector<std::filesystem::path> emit_report(const EvaluationReport& report, const std::filesystem::path& dir);

/// Writes one summary.csv with a row per report, plus per_point_<label>.csv
/// and plot_data_<label>.csv for each.
std::vector<std::filesystem::path> emit_sweep(std::span<const EvaluationReport> reports,
                                              const std::filesystem::path& dir);

struct PerPointRow {
  std::string point_id;
  Point2D position;
  double trilat_error = 0.0;
  double nn_error = 0.0;
};

std::vector<PerPointRow> parse_per_point_csv(std::string_view text);

}  // namespace uwbpos::eval
