#include "uwbpos/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "uwbpos/csv.hpp"
#include "uwbpos/error.hpp"

namespace uwbpos {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double number(std::string_view text, std::string_view key) {
  try {
    return csv::parse_number(trim(text), key);
  } catch (const Error&) {
    throw Error(ErrorCode::InvalidConfig, "key '" + std::string(key) + "': '" + std::string(text) + "' is not a number");
  }
}

std::size_t count(std::string_view text, std::string_view key) {
  const double v = number(text, key);
  if (v < 0.0 || v != std::floor(v) || v > 1e15) {
    throw Error(ErrorCode::InvalidConfig, "key '" + std::string(key) + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

std::vector<double> numbers(std::string_view text, std::string_view key) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (auto field : csv::split(text, ',')) out.push_back(number(field, key));
  return out;
}

Point2D point(std::string_view text, std::string_view key) {
  const auto v = numbers(text, key);
  if (v.size() != 2) throw Error(ErrorCode::InvalidConfig, "key '" + std::string(key) + "' must be 'x,y'");
  return {v[0], v[1]};
}

std::array<double, 3> per_anchor(std::string_view text, std::string_view key) {
  const auto v = numbers(text, key);
  if (v.size() == 1) return {v[0], v[0], v[0]};
  if (v.size() == 3) return {v[0], v[1], v[2]};
  throw Error(ErrorCode::InvalidConfig, "key '" + std::string(key) + "' needs one value or three comma-separated values");
}

/// Config plus anchor coordinates that are only assembled into an AnchorSet
/// once every key has been read.
struct Staging {
  PipelineConfig config;
  std::array<Point2D, 3> anchors{Point2D{0, 0}, Point2D{0, 2000}, Point2D{1000, 2000}};
};

struct KeySpec {
  std::string section;
  std::string key;
  std::string default_text;
  std::string description;
  std::function<void(Staging&, std::string_view, std::string_view)> apply;
};

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"anchors", "a0", "0,0", "anchor A0 position, mm", [](Staging& s, auto v, auto k) { s.anchors[0] = point(v, k); }},
      {"anchors", "a1", "0,2000", "anchor A1 position, mm", [](Staging& s, auto v, auto k) { s.anchors[1] = point(v, k); }},
      {"anchors", "a2", "1000,2000", "anchor A2 position, mm",
       [](Staging& s, auto v, auto k) { s.anchors[2] = point(v, k); }},
      {"zone", "origin", "0,0", "lower-left zone corner, mm",
       [](Staging& s, auto v, auto k) { s.config.zone.origin = point(v, k); }},
      {"zone", "width", "1000", "zone width (x extent), mm",
       [](Staging& s, auto v, auto k) { s.config.zone.width = number(v, k); }},
      {"zone", "height", "2000", "zone height (y extent), mm",
       [](Staging& s, auto v, auto k) { s.config.zone.height = number(v, k); }},
      {"grid", "cell_size", "100", "fingerprint cell edge, mm; must tile the zone",
       [](Staging& s, auto v, auto k) { s.config.cell_size = number(v, k); }},
      {"distortion", "a", "1.05", "simulated slope; one value or one per anchor",
       [](Staging& s, auto v, auto k) {
         const auto a = per_anchor(v, k);
         for (std::size_t i = 0; i < 3; ++i) s.config.distortion[i].a = a[i];
       }},
      {"distortion", "b", "50", "simulated offset, mm; one value or one per anchor",
       [](Staging& s, auto v, auto k) {
         const auto b = per_anchor(v, k);
         for (std::size_t i = 0; i < 3; ++i) s.config.distortion[i].b = b[i];
       }},
      {"noise", "sigma", "30", "Gaussian ranging noise standard deviation, mm",
       [](Staging& s, auto v, auto k) { s.config.sigma = number(v, k); }},
      {"noise", "seed", "42", "master seed for every random stream",
       [](Staging& s, auto v, auto k) { s.config.seed = count(v, k); }},
      {"strategy", "name", "ct", "tdt-g1 | tdt-g2 | tnt-g1 | tnt-g2 | ct | none",
       [](Staging& s, auto v, auto) { s.config.strategy = std::string(trim(v)); }},
      {"calibration", "repeats", "300", "simulated measurements per reference point",
       [](Staging& s, auto v, auto k) { s.config.calibration_repeats = count(v, k); }},
      {"mc", "k", "", "comma-separated K percentages for the calibration sweep; empty disables",
       [](Staging& s, auto v, auto k) { s.config.k_values = numbers(v, k); }},
      {"nn", "hidden", "64", "hidden layer sizes, comma-separated",
       [](Staging& s, auto v, auto k) {
         s.config.nn.hidden_layers.clear();
         for (double h : numbers(v, k)) s.config.nn.hidden_layers.push_back(count(csv::format_number(h), k));
       }},
      {"nn", "learning_rate", "0.05", "gradient descent step size",
       [](Staging& s, auto v, auto k) { s.config.nn.learning_rate = number(v, k); }},
      {"nn", "epochs", "500", "training epochs", [](Staging& s, auto v, auto k) { s.config.nn.epochs = count(v, k); }},
      {"nn", "batch_size", "32", "mini-batch size",
       [](Staging& s, auto v, auto k) { s.config.nn.batch_size = count(v, k); }},
      {"nn", "init_range", "0.5", "initial weights drawn from [-r, r]",
       [](Staging& s, auto v, auto k) { s.config.nn.init_range = number(v, k); }},
      {"nn", "augment_replicas", "20", "noisy copies of each database entry; 0 trains on clean entries only",
       [](Staging& s, auto v, auto k) { s.config.augment_replicas = count(v, k); }},
      {"nn", "augment_sigma", "30", "noise added to augmentation copies, mm",
       [](Staging& s, auto v, auto k) { s.config.augment_sigma = number(v, k); }},
      {"experiment", "repeats", "300", "measurements per test point",
       [](Staging& s, auto v, auto k) { s.config.repeats = count(v, k); }},
      {"experiment", "test_points", "250,500; 750,500; 250,1000; 750,1000; 250,1500; 750,1500",
       "semicolon-separated x,y test positions, ids T1..Tn",
       [](Staging& s, auto v, auto k) {
         s.config.test_points.clear();
         for (auto item : csv::split(v, ';')) {
           if (trim(item).empty()) continue;
           s.config.test_points.push_back(
               {"T" + std::to_string(s.config.test_points.size() + 1), point(item, k)});
         }
       }},
      {"paths", "measurements", "measurements.csv", "measurement CSV",
       [](Staging& s, auto v, auto) { s.config.measurements_path = std::string(trim(v)); }},
      {"paths", "coefficients", "coefficients.json", "fitted coefficients file",
       [](Staging& s, auto v, auto) { s.config.coefficients_path = std::string(trim(v)); }},
      {"paths", "database", "database.csv", "fingerprint database CSV",
       [](Staging& s, auto v, auto) { s.config.database_path = std::string(trim(v)); }},
      {"paths", "model", "model.json", "trained model file",
       [](Staging& s, auto v, auto) { s.config.model_path = std::string(trim(v)); }},
      {"paths", "report_dir", "report", "directory for report CSVs",
       [](Staging& s, auto v, auto) { s.config.report_dir = std::string(trim(v)); }},
  };
  return table;
}

void invalid(const std::string& message) { throw Error(ErrorCode::InvalidConfig, message); }

}  // namespace

void PipelineConfig::validate() const {
  try {
    zone.validate();
    (void)grid();
    uwbpos::validate(distortion);
    if (!std::isfinite(sigma) || sigma < 0.0) invalid("noise.sigma must be non-negative");
    if (strategy != "none") (void)find_reference_group(strategy);
    if (calibration_repeats < 1) invalid("calibration.repeats must be at least 1");
    for (double k : k_values) apply_mc_scaling(0.0, k);
    nn.validate();
    if (!std::isfinite(augment_sigma) || augment_sigma < 0.0) invalid("nn.augment_sigma must be non-negative");
    if (repeats < 1) invalid("experiment.repeats must be at least 1");
    if (test_points.empty()) invalid("experiment.test_points must not be empty");
    for (const auto& p : test_points) {
      if (!zone.contains(p.position)) invalid("test point " + p.id + " lies outside the zone");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw;
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
}

Grid PipelineConfig::grid() const { return make_grid(zone, cell_size); }

eval::World PipelineConfig::world() const { return {anchors, distortion, sigma}; }

std::optional<ReferenceGroup> PipelineConfig::reference_group() const {
  if (strategy == "none") return std::nullopt;
  return find_reference_group(strategy);
}

std::optional<bpnet::Augmentation> PipelineConfig::augmentation() const {
  if (augment_replicas == 0) return std::nullopt;
  return bpnet::Augmentation{NoiseSpec{augment_sigma, derive_seed(seed, SeedStream::Augmentation)}, augment_replicas};
}

bpnet::TrainConfig PipelineConfig::train_config() const {
  auto c = nn;
  c.seed = seed;
  return c;
}

PipelineConfig parse_config(std::string_view text) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed config: ") + e.message() + " (line " +
                                               std::to_string(e.line()) + ")");
  }

  Staging staging;
  for (const auto& [section, keys] : tree) {
    if (keys.empty() && !keys.data().empty()) invalid("key '" + section + "' must be inside a [section]");
    for (const auto& [key, value] : keys) {
      const std::string qualified = section + "." + key;
      const auto& table = key_table();
      const auto it = std::find_if(table.begin(), table.end(),
                                   [&](const KeySpec& k) { return k.section == section && k.key == key; });
      if (it == table.end()) invalid("unknown config key '" + qualified + "' (see --help for accepted keys)");
      it->apply(staging, value.data(), qualified);
    }
  }
  try {
    staging.config.anchors = AnchorSet(staging.anchors[0], staging.anchors[1], staging.anchors[2]);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  staging.config.validate();
  return staging.config;
}

PipelineConfig load_config(const std::filesystem::path& path) { return parse_config(csv::read_file(path)); }

std::string config_reference() {
  std::string out;
  std::string section;
  for (const auto& k : key_table()) {
    if (k.section != section) {
      section = k.section;
      out += "[" + section + "]\n";
    }
    out += "  " + k.key + " = " + k.default_text + "    ; " + k.description + "\n";
  }
  return out;
}

}  // namespace uwbpos
