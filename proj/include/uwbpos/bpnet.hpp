#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "uwbpos/fingerprint.hpp"
#include "uwbpos/geometry.hpp"
#include "uwbpos/ranging.hpp"

namespace uwbpos::bpnet {

/// Per-feature min/max observed over a training set.
struct NormalizationParams {
  std::array<double, 3> min{};
  std::array<double, 3> max{};

  friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;
};

/// Throws EmptyInput on an empty span.
NormalizationParams fit_normalization(std::span<const DistanceTriple> features);

/// (x - min) / (max - min) per feature; constant features map to 0. Values
/// outside the training range extrapolate linearly.
std::array<double, 3> normalize(const DistanceTriple& x, const NormalizationParams& params);
DistanceTriple denormalize(const std::array<double, 3>& u, const NormalizationParams& params);

/// Fully connected network: logistic-sigmoid hidden layers, softmax output.
/// weights[l] has shape (layer_sizes[l+1], layer_sizes[l]).
struct MlpModel {
  std::vector<std::size_t> layer_sizes;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  /// All-zero parameters.
  static MlpModel zeros(std::vector<std::size_t> layer_sizes);
  /// Parameters drawn uniformly from [-init_range, init_range]: layer by
  /// layer, weights row-major then biases.
  static MlpModel random(std::vector<std::size_t> layer_sizes, double init_range, std::uint64_t seed);

  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }
  std::size_t parameter_count() const;
};

/// Throws ShapeMismatch unless the model has at least three layers and all
/// parameter shapes chain.
void validate(const MlpModel& model);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

/// Pre-softmax output for one input.
Eigen::VectorXd logits(const MlpModel& model, const Eigen::VectorXd& input);

/// Class probabilities; throws ShapeMismatch on an inconsistent model or input.
Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& input);

/// Cross-entropy -log p[label] for one input, computed via log-sum-exp.
double cross_entropy(const MlpModel& model, const Eigen::VectorXd& input, std::size_t label);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Backpropagation over a batch stored column-wise. Returns the summed
/// cross-entropy and writes the gradient of that sum into `grads`.
double backprop(const MlpModel& model, const Eigen::MatrixXd& inputs, std::span<const std::size_t> labels,
                Gradients& grads);

struct TrainConfig {
  std::vector<std::size_t> hidden_layers{64};
  double learning_rate = 0.05;
  std::size_t epochs = 500;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;
  double init_range = 0.5;

  /// Throws InvalidArgument on a non-positive rate, zero epochs or batch size,
  /// no hidden layers, or a non-positive init range.
  void validate() const;
};

/// Noisy copies of every database entry added to the training set.
struct Augmentation {
  NoiseSpec noise;
  std::size_t replicas = 20;
};

struct TrainingSample {
  DistanceTriple features{};
  std::size_t label = 0;
};

/// Database entries in cell order, each followed by its replicas.
std::vector<TrainingSample> build_training_set(const DistanceDatabase& db,
                                               const std::optional<Augmentation>& augmentation);

struct TrainingSummary {
  std::vector<double> epoch_loss;  ///< mean cross-entropy per sample, per epoch
  double accuracy = 0.0;           ///< final model over the training samples
};

/// A trained network with everything needed to localise a measurement.
struct Classifier {
  MlpModel model;
  NormalizationParams normalization;
  Grid grid;
  std::uint64_t seed = 0;
  TrainingSummary summary;
};

/// Mini-batch gradient descent on the summed batch cross-entropy. Samples are
/// reshuffled every epoch from a generator seeded by `config.seed`.
/// Throws EmptyDatabase, InvalidArgument on labels outside the grid, and
/// DivergedLoss (naming the epoch) on a non-finite loss.
Classifier train_on_samples(std::span<const TrainingSample> samples, const Grid& grid, const TrainConfig& config);

Classifier train(const DistanceDatabase& db, const TrainConfig& config,
                 const std::optional<Augmentation>& augmentation = std::nullopt);

struct Classification {
  std::size_t cell_id = 0;
  Point2D position;
};

/// Argmax cell (lowest id on ties) and its centroid.
Classification classify(const Classifier& classifier, const DistanceTriple& measured);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  /// Largest |analytic - numeric| among parameters whose gradients are both
  /// below the relative-mode floor.
  double max_absolute_error = 0.0;
  std::size_t absolute_mode_count = 0;
  std::size_t parameter_count = 0;
};

/// Gradients below this magnitude are compared absolutely.
inline constexpr double kGradientFloor = 1e-6;

/// Compares backprop gradients of the cross-entropy with central finite
/// differences over every parameter.
GradientCheckResult gradient_check(const MlpModel& model, const Eigen::VectorXd& input, std::size_t label,
                                   double step = 1e-5);

// Model file (JSON).
std::string format_model_json(const Classifier& classifier);
Classifier parse_model_json(std::string_view text);

}  // namespace uwbpos::bpnet
