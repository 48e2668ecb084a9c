// Acceptance runner. `uwbpos_acceptance [N]` checks criterion N (or all of
// them) and prints one "criterion N: PASS|FAIL ..." line per criterion. The
// exit code is nonzero if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "uwbpos/bpnet.hpp"
#include "uwbpos/commands.hpp"
#include "uwbpos/config.hpp"
#include "uwbpos/csv.hpp"
#include "uwbpos/eval.hpp"
#include "uwbpos/fingerprint.hpp"
#include "uwbpos/geometry.hpp"
#include "uwbpos/ranging.hpp"

namespace {

using namespace uwbpos;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

Verdict trilateration_exactness() {
  const auto anchors = AnchorSet::standard();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> ux(0.0, 1000.0), uy(0.0, 2000.0);
  std::vector<Point2D> points(200);
  for (auto& p : points) p = {ux(rng), uy(rng)};

  const auto start = Clock::now();
  double worst = 0.0;
  for (const auto& p : points) {
    worst = std::max(worst, error_distance(trilaterate(anchors, anchor_distances(anchors, p)), p));
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-6 && elapsed < 1.0,
          "200 points, max error " + fmt(worst) + " mm (<= 1e-6), " + fmt(elapsed) + " s (< 1)"};
}

Verdict calibration_recovery() {
  // Each trial distorts every anchor with the same random (a, b) and fits
  // each anchor from its two reference distances.
  const auto group = find_reference_group("tnt-g1");
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ua(0.8, 1.2), ub(-100.0, 100.0);

  double worst_rel = 0.0, worst_a = 0.0, worst_b = 0.0;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    const LinearDistortion truth{ua(rng), ub(rng)};
    const PerAnchorDistortion d{truth, truth, truth};

    const auto clean = eval::calibrate_by_simulation({AnchorSet::standard(), d, 0.0}, group, 1, trial);
    for (const auto& fit : clean.primary) {
      worst_rel = std::max(worst_rel, std::abs(fit.a - truth.a) / std::abs(truth.a));
      worst_rel = std::max(worst_rel, std::abs(fit.b - truth.b) / std::max(std::abs(truth.b), 1.0));
    }

    const auto noisy = eval::calibrate_by_simulation({AnchorSet::standard(), d, 30.0}, group, 300, 1000 + trial);
    for (const auto& fit : noisy.primary) {
      worst_a = std::max(worst_a, std::abs(fit.a - truth.a));
      worst_b = std::max(worst_b, std::abs(fit.b - truth.b));
    }
  }
  return {worst_rel <= 1e-9 && worst_a <= 0.02 && worst_b <= 20.0,
          "noiseless max relative error " + fmt(worst_rel) + " (<= 1e-9); sigma 30 x 300 repeats max |da| " +
              fmt(worst_a) + " (<= 0.02), max |db| " + fmt(worst_b) + " mm (<= 20)"};
}

Verdict gradient_check() {
  const auto start = Clock::now();
  const auto model = bpnet::MlpModel::random({3, 8, 4}, 0.5, 42);
  const auto result = bpnet::gradient_check(model, Eigen::Vector3d(0.2, 0.5, 0.8), 1);
  const double elapsed = seconds_since(start);
  return {result.max_relative_error < 1e-4 && elapsed < 5.0,
          "3-8-4 model, " + std::to_string(result.parameter_count) + " parameters, max relative error " +
              fmt(result.max_relative_error) + " (< 1e-4), " + fmt(elapsed) + " s (< 5)"};
}

Verdict reference_groups() {
  struct Expected {
    Strategy strategy;
    const char* label;
    std::vector<Point2D> points;
  };
  const std::vector<Expected> expected{
      {Strategy::TDT, "tdt-g1", {{750, 500}, {900, 100}}},
      {Strategy::TDT, "tdt-g2", {{100, 1900}, {900, 100}}},
      {Strategy::TNT, "tnt-g1", {{900, 1900}, {900, 100}}},
      {Strategy::TNT, "tnt-g2", {{750, 1500}, {750, 500}}},
      {Strategy::CT, "ct", {{100, 100}, {100, 1900}, {900, 100}, {900, 1900}}},
  };
  const auto groups = builtin_reference_groups();
  bool ok = groups.size() == expected.size();
  std::string mismatch;
  for (std::size_t i = 0; ok && i < expected.size(); ++i) {
    const auto& g = groups[i];
    if (g.strategy != expected[i].strategy || g.label != expected[i].label || g.points != expected[i].points) {
      ok = false;
      mismatch = " (mismatch at " + std::string(expected[i].label) + ")";
    }
  }
  return {ok, std::to_string(groups.size()) + " builtin groups compared point by point" + mismatch};
}

Verdict mc_behaviour() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> below(0.0, 1000.0), above(1000.0, 6000.0), uk(1.0, 100.0);
  bool scaling_ok = apply_mc_scaling(1000.0, 90.0) == 1000.0;
  for (int i = 0; i < 10000; ++i) {
    const double k = uk(rng), x = below(rng), y = above(rng);
    scaling_ok = scaling_ok && apply_mc_scaling(x, k) == x;
    if (y > 1000.0) scaling_ok = scaling_ok && std::abs(apply_mc_scaling(y, k) - y * k / 100.0) <= 1e-12 * y;
  }

  // Trilateration does not depend on the classifier; a coarse one keeps this quick.
  const auto db = generate_database(make_grid(Zone{}, 500), AnchorSet::standard(), StrategyCoefficients::identity());
  const auto classifier = bpnet::train(db, bpnet::TrainConfig{});
  const eval::World world{AnchorSet::standard(),
                          {LinearDistortion{1.05, 50}, LinearDistortion{1.05, 50}, LinearDistortion{1.05, 50}}, 30.0};
  eval::ExperimentOptions options;
  options.repeats = 300;
  options.seed = 42;
  const std::vector<double> ks{90};
  const auto reports = eval::mc_sweep(world, classifier, options, ks);
  const auto& base = reports[0];
  const auto& k90 = reports[1];
  std::size_t decreased = 0;
  for (std::size_t i = 0; i < base.points.size(); ++i) {
    if (k90.points[i].trilat_error < base.points[i].trilat_error) ++decreased;
  }
  const bool trend = k90.mean_trilat_error < base.mean_trilat_error;
  return {scaling_ok && trend,
          std::string("scaling identity <= 1000 mm and x K above: ") + (scaling_ok ? "yes" : "no") +
              "; mean trilateration error baseline " + fmt(base.mean_trilat_error) + " mm vs K=90 " +
              fmt(k90.mean_trilat_error) + " mm; " + std::to_string(decreased) + "/" +
              std::to_string(base.points.size()) + " points decrease"};
}

Verdict end_to_end() {
  const auto start = Clock::now();
  const auto result = cli::run_pipeline(PipelineConfig{});
  const double elapsed = seconds_since(start);
  const auto& r = result.reports.front();
  const double improvement = r.improvement_percent.value_or(-1e9);
  const bool below = r.mean_nn_error < r.mean_trilat_error;
  return {below && improvement >= 40.0 && elapsed < 180.0,
          "trilateration " + fmt(r.mean_trilat_error) + " mm, BP network " + fmt(r.mean_nn_error) +
              " mm, NN below trilateration: " + (below ? "yes" : "no") + ", improvement " + fmt(improvement) +
              " % (>= 40), " + fmt(elapsed) + " s (< 180)"};
}

Verdict quantization_floor() {
  // Clean training: noiseless identity database, no augmentation. The
  // default epoch budget leaves about half the 200 centroids misclassified,
  // so training runs until the centroids are learned.
  const auto grid = make_grid(Zone{}, 100);
  const auto anchors = AnchorSet::standard();
  const auto db = generate_database(grid, anchors, StrategyCoefficients::identity());
  bpnet::TrainConfig config;
  config.epochs = 5000;
  const auto classifier = bpnet::train(db, config);

  std::vector<eval::LabeledPoint> centroids;
  for (std::size_t id = 0; id < grid.cell_count(); ++id) centroids.push_back({"C" + std::to_string(id), grid.centroid(id)});
  eval::ExperimentOptions options;
  options.test_points = centroids;
  options.repeats = 1;
  const auto at_centroids = eval::run_experiment(eval::World{}, classifier, options);
  double centroid_worst = 0.0;
  for (const auto& p : at_centroids.points) centroid_worst = std::max(centroid_worst, p.nn_error);

  const double bound = 100.0 * std::sqrt(2.0) / 2.0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0.0, 1000.0), uy(0.0, 2000.0);
  std::vector<eval::LabeledPoint> inside;
  for (int i = 0; i < 2000; ++i) inside.push_back({"P" + std::to_string(i + 1), {ux(rng), uy(rng)}});
  options.test_points = inside;
  const auto in_cell = eval::run_experiment(eval::World{}, classifier, options);
  double in_cell_worst = 0.0;
  std::size_t over = 0;
  for (const auto& p : in_cell.points) {
    in_cell_worst = std::max(in_cell_worst, p.nn_error);
    if (p.nn_error > bound) ++over;
  }
  return {centroid_worst == 0.0 && in_cell_worst <= bound,
          "training accuracy " + fmt(100.0 * classifier.summary.accuracy) + " %; centroid max NN error " +
              fmt(centroid_worst) + " mm (= 0); 2000 in-cell points max NN error " + fmt(in_cell_worst) +
              " mm (<= " + fmt(bound) + "), " + std::to_string(over) + " over the bound"};
}

int run_cli(const fs::path& dir, const std::string& args) {
  const std::string command = "cd '" + dir.string() + "' && '" UWBPOS_CLI_PATH "' " + args + " > log.txt 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict determinism() {
  const std::vector<std::string> chain{
      "simulate --seed 42 --out measurements.csv",
      "calibrate --seed 42 --measurements measurements.csv --out coefficients.json",
      "gendb --seed 42 --coefficients coefficients.json --out database.csv",
      "train --seed 42 --database database.csv --out model.json",
      "evaluate --seed 42 --model model.json --k 90,85 --out report",
  };
  const auto root = fs::temp_directory_path() / "uwbpos_acceptance_determinism";
  fs::remove_all(root);
  std::vector<fs::path> runs{root / "run1", root / "run2"};
  for (const auto& dir : runs) {
    fs::create_directories(dir);
    for (const auto& step : chain) {
      if (run_cli(dir, step) != 0) return {false, "command failed in " + dir.string() + ": uwbpos " + step};
    }
  }

  std::size_t compared = 0;
  std::string differing;
  for (const auto& entry : fs::recursive_directory_iterator(runs[0])) {
    if (!entry.is_regular_file() || entry.path().filename() == "log.txt") continue;
    const auto rel = fs::relative(entry.path(), runs[0]);
    ++compared;
    if (!fs::exists(runs[1] / rel) || csv::read_file(entry.path()) != csv::read_file(runs[1] / rel)) {
      differing += " " + rel.string();
    }
  }
  return {differing.empty() && compared >= 10,
          "default chain run twice under seed 42, " + std::to_string(compared) + " files compared" +
              (differing.empty() ? ", all byte-identical" : ", differing:" + differing)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Verdict()>> criteria{trilateration_exactness, calibration_recovery, gradient_check,
                                                       reference_groups,        mc_behaviour,         end_to_end,
                                                       quantization_floor,      determinism};
  std::vector<std::size_t> selected;
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::cerr << "usage: uwbpos_acceptance [1-" << criteria.size() << "]\n";
      return 2;
    }
    selected.push_back(static_cast<std::size_t>(n));
  } else {
    for (std::size_t i = 1; i <= criteria.size(); ++i) selected.push_back(i);
  }

  bool all = true;
  for (const auto n : selected) {
    Verdict v;
    try {
      v = criteria[n - 1]();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    all = all && v.pass;
    std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << " - " << v.detail << std::endl;
  }
  return all ? 0 : 1;
}
