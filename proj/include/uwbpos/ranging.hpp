#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "uwbpos/geometry.hpp"

namespace uwbpos {

/// Linear model between a measured range and the true range:
/// measured = a * real + b.
struct LinearDistortion {
  double a = 1.0;  ///< slope, must be positive
  double b = 0.0;  ///< offset in mm

  double apply(double real_distance) const noexcept { return a * real_distance + b; }

  friend bool operator==(const LinearDistortion&, const LinearDistortion&) = default;
};

/// One LinearDistortion per anchor, indexed like AnchorSet.
using PerAnchorDistortion = std::array<LinearDistortion, 3>;

inline constexpr PerAnchorDistortion kIdentityDistortion{};

/// Throws InvalidSlope unless every slope is positive and all values are finite.
void validate(const PerAnchorDistortion& distortion);

struct RangingSample {
  std::string point_id;
  Point2D true_pos;
  DistanceTriple measured{};
};

/// Additive zero-mean Gaussian ranging noise.
struct NoiseSpec {
  double sigma = 30.0;  ///< mm
  std::uint64_t seed = 42;
};

/// Per-anchor fit result together with its quality measures.
struct CalibrationFit {
  PerAnchorDistortion per_anchor{};
  std::array<double, 3> residual_rms{};  ///< mm
  std::size_t n_repeats = 1;
};

/// Seeded forward model of distorted TOA ranging. One instance owns one
/// generator; use one instance per thread.
class MeasurementSimulator {
 public:
  explicit MeasurementSimulator(NoiseSpec noise);

  /// measured_i = a_i * d_i + b_i + noise, clamped at zero.
  RangingSample measure(std::string point_id, Point2D true_pos, const AnchorSet& anchors,
                        const PerAnchorDistortion& distortion);

  const NoiseSpec& noise() const noexcept { return noise_; }

 private:
  NoiseSpec noise_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

/// Single draw from a fresh simulator seeded by `noise.seed`.
RangingSample simulate_measurement(Point2D true_pos, const AnchorSet& anchors,
                                   const PerAnchorDistortion& distortion, const NoiseSpec& noise);

/// One (true distance, averaged measured distance) pair.
struct ReferenceObservation {
  double real = 0.0;
  double measured = 0.0;
};

/// Exact two-point solve for two observations, ordinary least squares for
/// more. Throws EmptyInput for fewer than two, DegenerateFit when every true
/// distance is equal, InvalidSlope when the fitted slope is not positive.
LinearDistortion fit_linear_model(std::span<const ReferenceObservation> observations);

/// Per-anchor arithmetic mean. Throws EmptyInput on an empty span and
/// InvalidArgument when samples come from different points.
DistanceTriple average_measurements(std::span<const RangingSample> samples);

/// Measurements strictly above this are scaled by measurement calibration.
inline constexpr double kCalibrationThreshold = 1000.0;

/// Scales a range above 1000 mm to `k_percent` of its value; smaller ranges
/// pass through. Throws InvalidK unless 0 < k_percent <= 100.
double apply_mc_scaling(double measured, double k_percent);
DistanceTriple apply_mc_scaling(const DistanceTriple& measured, double k_percent);

// Measurement CSV: point_id,x_true_mm,y_true_mm,d0_mm,d1_mm,d2_mm

inline constexpr std::string_view kMeasurementHeader = "point_id,x_true_mm,y_true_mm,d0_mm,d1_mm,d2_mm";

std::string format_measurement_csv(std::span<const RangingSample> samples);
std::vector<RangingSample> parse_measurement_csv(std::string_view text);

void write_measurement_csv(const std::filesystem::path& path, std::span<const RangingSample> samples);
std::vector<RangingSample> read_measurement_csv(const std::filesystem::path& path);

}  // namespace uwbpos
