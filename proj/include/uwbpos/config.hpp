#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uwbpos/bpnet.hpp"
#include "uwbpos/eval.hpp"
#include "uwbpos/fingerprint.hpp"
#include "uwbpos/geometry.hpp"
#include "uwbpos/ranging.hpp"

namespace uwbpos {

/// Everything one pipeline run needs. Defaults reproduce the standard
/// setup: 1000 x 2000 mm zone, 100 mm cells, CT strategy, a = 1.05 and
/// b = 50 mm on every anchor, 30 mm noise, 300 repeats.
struct PipelineConfig {
  AnchorSet anchors = AnchorSet::standard();
  Zone zone{};
  double cell_size = 100.0;
  PerAnchorDistortion distortion{LinearDistortion{1.05, 50.0}, LinearDistortion{1.05, 50.0},
                                 LinearDistortion{1.05, 50.0}};
  double sigma = 30.0;
  std::uint64_t seed = 42;
  std::string strategy = "ct";  ///< group label or "none"
  std::size_t calibration_repeats = 300;
  std::vector<double> k_values;  ///< empty: no measurement calibration sweep
  bpnet::TrainConfig nn{};
  std::size_t augment_replicas = 20;
  double augment_sigma = 30.0;
  std::size_t repeats = 300;
  std::vector<eval::LabeledPoint> test_points = eval::default_test_points();

  std::filesystem::path measurements_path = "measurements.csv";
  std::filesystem::path coefficients_path = "coefficients.json";
  std::filesystem::path database_path = "database.csv";
  std::filesystem::path model_path = "model.json";
  std::filesystem::path report_dir = "report";

  /// Throws InvalidConfig describing the first violated invariant.
  void validate() const;

  Grid grid() const;
  eval::World world() const;
  /// Empty for strategy "none".
  std::optional<ReferenceGroup> reference_group() const;
  std::optional<bpnet::Augmentation> augmentation() const;
  /// NN settings with the master seed applied.
  bpnet::TrainConfig train_config() const;
};

/// Parses sectioned key = value text; unknown sections or keys, malformed
/// values and invariant violations throw InvalidConfig.
PipelineConfig parse_config(std::string_view text);

/// Reads and parses a config file (IoError if unreadable).
PipelineConfig load_config(const std::filesystem::path& path);

/// One line per accepted key with its default.
std::string config_reference();

}  // namespace uwbpos
