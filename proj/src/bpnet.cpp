#include "uwbpos/bpnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "uwbpos/error.hpp"
#include "uwbpos/seeding.hpp"

namespace uwbpos::bpnet {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

Eigen::VectorXd to_vector(const std::array<double, 3>& a) { return Eigen::Vector3d(a[0], a[1], a[2]); }

double log_sum_exp(const Eigen::VectorXd& z) {
  const double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum());
}

void check_input(const MlpModel& model, Eigen::Index rows) {
  validate(model);
  if (static_cast<std::size_t>(rows) != model.input_size()) {
    throw Error(ErrorCode::ShapeMismatch, "input has " + std::to_string(rows) + " features, model expects " +
                                              std::to_string(model.input_size()));
  }
}

}  // namespace

NormalizationParams fit_normalization(std::span<const DistanceTriple> features) {
  if (features.empty()) throw Error(ErrorCode::EmptyInput, "cannot fit normalization on no data");
  NormalizationParams p{features.front(), features.front()};
  for (const auto& f : features) {
    for (std::size_t i = 0; i < 3; ++i) {
      p.min[i] = std::min(p.min[i], f[i]);
      p.max[i] = std::max(p.max[i], f[i]);
    }
  }
  return p;
}

std::array<double, 3> normalize(const DistanceTriple& x, const NormalizationParams& params) {
  std::array<double, 3> u{};
  for (std::size_t i = 0; i < 3; ++i) {
    const double span = params.max[i] - params.min[i];
    u[i] = span > 0.0 ? (x[i] - params.min[i]) / span : 0.0;
  }
  return u;
}

DistanceTriple denormalize(const std::array<double, 3>& u, const NormalizationParams& params) {
  DistanceTriple x{};
  for (std::size_t i = 0; i < 3; ++i) x[i] = params.min[i] + u[i] * (params.max[i] - params.min[i]);
  return x;
}

MlpModel MlpModel::zeros(std::vector<std::size_t> layer_sizes) {
  MlpModel m;
  m.layer_sizes = std::move(layer_sizes);
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    const auto out = static_cast<Eigen::Index>(m.layer_sizes[l + 1]);
    const auto in = static_cast<Eigen::Index>(m.layer_sizes[l]);
    m.weights.push_back(Eigen::MatrixXd::Zero(out, in));
    m.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  return m;
}

MlpModel MlpModel::random(std::vector<std::size_t> layer_sizes, double init_range, std::uint64_t seed) {
  MlpModel m = zeros(std::move(layer_sizes));
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> uniform(-init_range, init_range);
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    auto& w = m.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = uniform(engine);
    }
    for (Eigen::Index r = 0; r < m.biases[l].size(); ++r) m.biases[l](r) = uniform(engine);
  }
  return m;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

void validate(const MlpModel& model) {
  const auto& sizes = model.layer_sizes;
  if (sizes.size() < 3) throw Error(ErrorCode::ShapeMismatch, "a network needs input, hidden and output layers");
  if (std::find(sizes.begin(), sizes.end(), 0u) != sizes.end()) {
    throw Error(ErrorCode::ShapeMismatch, "layer sizes must be positive");
  }
  if (model.weights.size() != sizes.size() - 1 || model.biases.size() != sizes.size() - 1) {
    throw Error(ErrorCode::ShapeMismatch, "parameter count does not match layer count");
  }
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (static_cast<std::size_t>(model.weights[l].rows()) != sizes[l + 1] ||
        static_cast<std::size_t>(model.weights[l].cols()) != sizes[l] ||
        static_cast<std::size_t>(model.biases[l].size()) != sizes[l + 1]) {
      throw Error(ErrorCode::ShapeMismatch, "layer " + std::to_string(l) + " parameters do not chain");
    }
  }
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

Eigen::VectorXd logits(const MlpModel& model, const Eigen::VectorXd& input) {
  check_input(model, input.size());
  Eigen::VectorXd a = input;
  const std::size_t last = model.weights.size() - 1;
  for (std::size_t l = 0; l < last; ++l) a = sigmoid(model.weights[l] * a + model.biases[l]);
  return model.weights[last] * a + model.biases[last];
}

Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& input) { return softmax(logits(model, input)); }

double cross_entropy(const MlpModel& model, const Eigen::VectorXd& input, std::size_t label) {
  const Eigen::VectorXd z = logits(model, input);
  if (label >= static_cast<std::size_t>(z.size())) throw Error(ErrorCode::ShapeMismatch, "label out of range");
  return log_sum_exp(z) - z(static_cast<Eigen::Index>(label));
}

double backprop(const MlpModel& model, const Eigen::MatrixXd& inputs, std::span<const std::size_t> labels,
                Gradients& grads) {
  check_input(model, inputs.rows());
  const std::size_t n_layers = model.weights.size();
  const Eigen::Index batch = inputs.cols();
  if (static_cast<std::size_t>(batch) != labels.size()) {
    throw Error(ErrorCode::ShapeMismatch, "batch has " + std::to_string(batch) + " inputs but " +
                                              std::to_string(labels.size()) + " labels");
  }

  std::vector<Eigen::MatrixXd> activations;
  activations.reserve(n_layers + 1);
  activations.push_back(inputs);
  for (std::size_t l = 0; l + 1 < n_layers; ++l) {
    Eigen::MatrixXd z = model.weights[l] * activations.back();
    z.colwise() += model.biases[l];
    activations.push_back(sigmoid(z));
  }
  Eigen::MatrixXd delta = model.weights[n_layers - 1] * activations.back();
  delta.colwise() += model.biases[n_layers - 1];

  // Softmax cross-entropy: loss = lse(z) - z_y, dloss/dz = p - onehot(y).
  double loss = 0.0;
  for (Eigen::Index c = 0; c < batch; ++c) {
    const auto y = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(c)]);
    if (y >= delta.rows()) throw Error(ErrorCode::ShapeMismatch, "label out of range");
    const double m = delta.col(c).maxCoeff();
    Eigen::VectorXd e = (delta.col(c).array() - m).exp();
    const double sum = e.sum();
    loss += m + std::log(sum) - delta(y, c);
    delta.col(c) = e / sum;
    delta(y, c) -= 1.0;
  }

  grads.weights.resize(n_layers);
  grads.biases.resize(n_layers);
  for (std::size_t l = n_layers; l-- > 0;) {
    grads.weights[l].noalias() = delta * activations[l].transpose();
    grads.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      const auto& a = activations[l];
      Eigen::MatrixXd back = model.weights[l].transpose() * delta;
      delta = (back.array() * a.array() * (1.0 - a.array())).matrix();
    }
  }
  return loss;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::InvalidArgument, "learning rate must be positive");
  }
  if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be at least 1");
  if (batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch size must be at least 1");
  if (hidden_layers.empty()) throw Error(ErrorCode::InvalidArgument, "at least one hidden layer is required");
  if (std::find(hidden_layers.begin(), hidden_layers.end(), 0u) != hidden_layers.end()) {
    throw Error(ErrorCode::InvalidArgument, "hidden layer sizes must be positive");
  }
  if (!(init_range > 0.0) || !std::isfinite(init_range)) {
    throw Error(ErrorCode::InvalidArgument, "init range must be positive");
  }
}

std::vector<TrainingSample> build_training_set(const DistanceDatabase& db,
                                               const std::optional<Augmentation>& augmentation) {
  if (db.entries.empty()) throw Error(ErrorCode::EmptyDatabase, "database has no entries");
  const std::size_t replicas = augmentation ? augmentation->replicas : 0;
  std::vector<TrainingSample> samples;
  samples.reserve(db.entries.size() * (replicas + 1));

  std::mt19937_64 engine(augmentation ? augmentation->noise.seed : 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sigma = augmentation ? augmentation->noise.sigma : 0.0;
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "augmentation sigma must be non-negative");

  for (std::size_t id = 0; id < db.entries.size(); ++id) {
    samples.push_back({db.entries[id], id});
    for (std::size_t r = 0; r < replicas; ++r) {
      TrainingSample s{db.entries[id], id};
      if (sigma > 0.0) {
        for (double& f : s.features) f = std::max(f + sigma * gauss(engine), 0.0);
      }
      samples.push_back(s);
    }
  }
  return samples;
}

Classifier train_on_samples(std::span<const TrainingSample> samples, const Grid& grid, const TrainConfig& config) {
  config.validate();
  if (samples.empty()) throw Error(ErrorCode::EmptyDatabase, "no training samples");

  std::vector<DistanceTriple> features;
  features.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.label >= grid.cell_count()) throw Error(ErrorCode::InvalidArgument, "sample label outside the grid");
    features.push_back(s.features);
  }

  std::vector<std::size_t> sizes{3};
  sizes.insert(sizes.end(), config.hidden_layers.begin(), config.hidden_layers.end());
  sizes.push_back(grid.cell_count());

  Classifier out{MlpModel::random(sizes, config.init_range, derive_seed(config.seed, SeedStream::WeightInit)),
                 fit_normalization(features), grid, config.seed, {}};
  auto& model = out.model;

  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd inputs(3, n);
  for (Eigen::Index c = 0; c < n; ++c) inputs.col(c) = to_vector(normalize(features[static_cast<std::size_t>(c)], out.normalization));

  std::mt19937_64 shuffle_engine(derive_seed(config.seed, SeedStream::Shuffle));
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  Gradients grads;
  Eigen::MatrixXd batch_inputs;
  std::vector<std::size_t> batch_labels;
  out.summary.epoch_loss.reserve(config.epochs);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_engine);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      batch_inputs.resize(3, static_cast<Eigen::Index>(count));
      batch_labels.resize(count);
      for (std::size_t k = 0; k < count; ++k) {
        const auto idx = order[start + k];
        batch_inputs.col(static_cast<Eigen::Index>(k)) = inputs.col(static_cast<Eigen::Index>(idx));
        batch_labels[k] = samples[idx].label;
      }
      const double loss = backprop(model, batch_inputs, batch_labels, grads);
      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::DivergedLoss, "training loss became non-finite at epoch " + std::to_string(epoch));
      }
      epoch_loss += loss;
      for (std::size_t l = 0; l < model.weights.size(); ++l) {
        model.weights[l] -= config.learning_rate * grads.weights[l];
        model.biases[l] -= config.learning_rate * grads.biases[l];
      }
    }
    out.summary.epoch_loss.push_back(epoch_loss / static_cast<double>(samples.size()));
  }

  std::size_t correct = 0;
  for (const auto& s : samples) correct += classify(out, s.features).cell_id == s.label ? 1 : 0;
  out.summary.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  return out;
}

Classifier train(const DistanceDatabase& db, const TrainConfig& config, const std::optional<Augmentation>& augmentation) {
  if (db.entries.size() != db.grid.cell_count()) {
    throw Error(ErrorCode::EmptyDatabase, "database must hold one entry per grid cell");
  }
  const auto samples = build_training_set(db, augmentation);
  return train_on_samples(samples, db.grid, config);
}

Classification classify(const Classifier& classifier, const DistanceTriple& measured) {
  if (classifier.model.output_size() != classifier.grid.cell_count()) {
    throw Error(ErrorCode::ShapeMismatch, "model has " + std::to_string(classifier.model.output_size()) +
                                              " outputs but the grid has " +
                                              std::to_string(classifier.grid.cell_count()) + " cells");
  }
  const Eigen::VectorXd p = forward(classifier.model, to_vector(normalize(measured, classifier.normalization)));
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < p.size(); ++k) {
    if (p(k) > p(best)) best = k;
  }
  const auto id = static_cast<std::size_t>(best);
  return {id, classifier.grid.centroid(id)};
}

GradientCheckResult gradient_check(const MlpModel& model, const Eigen::VectorXd& input, std::size_t label,
                                   double step) {
  Gradients analytic;
  Eigen::MatrixXd batch = input;
  const std::array<std::size_t, 1> labels{label};
  backprop(model, batch, labels, analytic);

  GradientCheckResult result;
  MlpModel probe = model;
  auto compare = [&](double& param, double grad) {
    const double saved = param;
    param = saved + step;
    const double up = cross_entropy(probe, input, label);
    param = saved - step;
    const double down = cross_entropy(probe, input, label);
    param = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double diff = std::abs(grad - numeric);
    const double scale = std::max(std::abs(grad), std::abs(numeric));
    if (scale < kGradientFloor) {
      result.max_absolute_error = std::max(result.max_absolute_error, diff);
      ++result.absolute_mode_count;
    } else {
      result.max_relative_error = std::max(result.max_relative_error, diff / scale);
    }
    ++result.parameter_count;
  };

  for (std::size_t l = 0; l < probe.weights.size(); ++l) {
    for (Eigen::Index r = 0; r < probe.weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < probe.weights[l].cols(); ++c) compare(probe.weights[l](r, c), analytic.weights[l](r, c));
    }
    for (Eigen::Index r = 0; r < probe.biases[l].size(); ++r) compare(probe.biases[l](r), analytic.biases[l](r));
  }
  return result;
}

std::string format_model_json(const Classifier& classifier) {
  validate(classifier.model);
  const auto& model = classifier.model;
  const auto& grid = classifier.grid;
  nlohmann::ordered_json j;
  j["format"] = "uwbpos-model/1";
  j["seed"] = classifier.seed;
  j["grid"] = {{"origin_mm", {grid.zone().origin.x, grid.zone().origin.y}},
               {"width_mm", grid.zone().width},
               {"height_mm", grid.zone().height},
               {"cell_size_mm", grid.cell_size()}};
  j["normalization"] = {{"min_mm", classifier.normalization.min}, {"max_mm", classifier.normalization.max}};
  j["hidden_activation"] = "sigmoid";
  j["output_activation"] = "softmax";
  j["layer_sizes"] = model.layer_sizes;
  auto layers = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    auto rows = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < model.weights[l].rows(); ++r) {
      auto row = nlohmann::ordered_json::array();
      for (Eigen::Index c = 0; c < model.weights[l].cols(); ++c) row.push_back(model.weights[l](r, c));
      rows.push_back(std::move(row));
    }
    std::vector<double> bias(model.biases[l].data(), model.biases[l].data() + model.biases[l].size());
    layers.push_back({{"weights", std::move(rows)}, {"biases", bias}});
  }
  j["layers"] = std::move(layers);
  return j.dump(1) + "\n";
}

Classifier parse_model_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != "uwbpos-model/1") throw Error(ErrorCode::ParseError, "unsupported model format");
    if (j.at("hidden_activation") != "sigmoid" || j.at("output_activation") != "softmax") {
      throw Error(ErrorCode::ParseError, "unsupported activation");
    }
    const auto& g = j.at("grid");
    const auto origin = g.at("origin_mm").get<std::array<double, 2>>();
    Grid grid(Zone{{origin[0], origin[1]}, g.at("width_mm").get<double>(), g.at("height_mm").get<double>()},
              g.at("cell_size_mm").get<double>());

    MlpModel model = MlpModel::zeros(j.at("layer_sizes").get<std::vector<std::size_t>>());
    const auto& layers = j.at("layers");
    if (layers.size() != model.weights.size()) throw Error(ErrorCode::ShapeMismatch, "layer count mismatch");
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      const auto& rows = layers.at(l).at("weights");
      const auto& bias = layers.at(l).at("biases");
      auto& w = model.weights[l];
      if (rows.size() != static_cast<std::size_t>(w.rows()) || bias.size() != static_cast<std::size_t>(w.rows())) {
        throw Error(ErrorCode::ShapeMismatch, "layer " + std::to_string(l) + " shape mismatch");
      }
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        const auto& row = rows.at(static_cast<std::size_t>(r));
        if (row.size() != static_cast<std::size_t>(w.cols())) {
          throw Error(ErrorCode::ShapeMismatch, "layer " + std::to_string(l) + " row width mismatch");
        }
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        model.biases[l](r) = bias.at(static_cast<std::size_t>(r)).get<double>();
      }
    }
    validate(model);
    if (model.input_size() != 3) throw Error(ErrorCode::ShapeMismatch, "model must take three distances");

    Classifier c{std::move(model), {}, grid, j.at("seed").get<std::uint64_t>(), {}};
    c.normalization.min = j.at("normalization").at("min_mm").get<std::array<double, 3>>();
    c.normalization.max = j.at("normalization").at("max_mm").get<std::array<double, 3>>();
    if (c.model.output_size() != grid.cell_count()) {
      throw Error(ErrorCode::ShapeMismatch, "model output size does not match its grid");
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("model file: ") + e.what());
  }
}

}  // namespace uwbpos::bpnet
