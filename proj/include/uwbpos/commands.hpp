#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uwbpos/bpnet.hpp"
#include "uwbpos/config.hpp"
#include "uwbpos/eval.hpp"
#include "uwbpos/fingerprint.hpp"
#include "uwbpos/ranging.hpp"

namespace uwbpos::cli {

enum class PointSet { Reference, Test, All };

/// Simulated measurements of the strategy's reference points (calibration
/// stream) and/or the test points (evaluation stream).
std::vector<RangingSample> simulate(const PipelineConfig& config, PointSet points);

/// Averages the reference-point rows and fits the configured strategy.
/// Strategy "none" yields identity coefficients.
StrategyCoefficients calibrate(const PipelineConfig& config, const std::vector<RangingSample>& samples);

DistanceDatabase gendb(const PipelineConfig& config, const StrategyCoefficients& coefficients);

bpnet::Classifier train(const PipelineConfig& config, const DistanceDatabase& db);

/// A single report, or the baseline followed by one report per K when the
/// config lists K values. Throws GridMismatch if the classifier was trained
/// on a different grid.
std::vector<eval::EvaluationReport> evaluate(const PipelineConfig& config, const bpnet::Classifier& classifier,
                                             const std::vector<RangingSample>* ingested = nullptr);

struct PipelineResult {
  StrategyCoefficients coefficients;
  DistanceDatabase database;
  bpnet::Classifier classifier;
  std::vector<eval::EvaluationReport> reports;
};

/// In-memory equivalent of simulate -> calibrate -> gendb -> train -> evaluate.
PipelineResult run_pipeline(const PipelineConfig& config);

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace uwbpos::cli
