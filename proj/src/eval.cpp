#include "uwbpos/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "uwbpos/csv.hpp"
#include "uwbpos/error.hpp"

namespace uwbpos::eval {

namespace {

bool same_point(Point2D p, Point2D q) { return std::abs(p.x - q.x) <= 1e-6 && std::abs(p.y - q.y) <= 1e-6; }

std::string k_label(std::optional<double> k) { return k ? "k" + csv::format_number(*k) : "baseline"; }

}  // namespace

double mean_error(std::span<const double> errors) {
  if (errors.empty()) throw Error(ErrorCode::EmptyInput, "no errors to average");
  return std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
}

double improvement_percent(double baseline, double candidate) {
  if (!(baseline > 0.0)) throw Error(ErrorCode::ZeroBaseline, "baseline error must be positive");
  return 100.0 * (baseline - candidate) / baseline;
}

std::vector<LabeledPoint> default_test_points() {
  return {{"T1", {250, 500}},  {"T2", {750, 500}},  {"T3", {250, 1000}},
          {"T4", {750, 1000}}, {"T5", {250, 1500}}, {"T6", {750, 1500}}};
}

bool is_reported_test_point(Point2D p) {
  return same_point(p, {250, 500}) || same_point(p, {750, 500}) || same_point(p, {750, 1500});
}

std::vector<RangingSample> simulate_points(const World& world, std::span<const LabeledPoint> points,
                                           std::size_t repeats, std::uint64_t seed, SeedStream stream) {
  validate(world.distortion);
  std::vector<RangingSample> out;
  out.reserve(points.size() * repeats);
  for (std::size_t j = 0; j < points.size(); ++j) {
    MeasurementSimulator sim(NoiseSpec{world.sigma, derive_seed(seed, stream, j)});
    for (std::size_t r = 0; r < repeats; ++r) {
      out.push_back(sim.measure(points[j].id, points[j].position, world.anchors, world.distortion));
    }
  }
  return out;
}

std::vector<LabeledPoint> reference_points(const ReferenceGroup& group) {
  std::vector<LabeledPoint> out;
  for (std::size_t j = 0; j < group.points.size(); ++j) out.push_back({"R" + std::to_string(j + 1), group.points[j]});
  return out;
}

StrategyCoefficients calibrate_by_simulation(const World& world, const ReferenceGroup& group, std::size_t repeats,
                                             std::uint64_t seed) {
  if (repeats < 1) throw Error(ErrorCode::InvalidArgument, "calibration needs at least one repeat");
  const auto points = reference_points(group);
  const auto samples = simulate_points(world, points, repeats, seed, SeedStream::Calibration);
  return calibrate_from_samples(group, world.anchors, samples);
}

namespace {

std::vector<DistanceTriple> measurements_for(const LabeledPoint& point, std::size_t index, const World& world,
                                             const ExperimentOptions& options,
                                             const std::vector<RangingSample>* ingested) {
  std::vector<DistanceTriple> out;
  out.reserve(options.repeats);
  if (ingested) {
    for (const auto& s : *ingested) {
      if (out.size() == options.repeats) break;
      if (same_point(s.true_pos, point.position)) out.push_back(s.measured);
    }
    if (out.size() < options.repeats) {
      throw Error(ErrorCode::InsufficientData, "test point " + point.id + " has " + std::to_string(out.size()) +
                                                   " measurement rows, " + std::to_string(options.repeats) +
                                                   " repeats requested");
    }
    return out;
  }
  MeasurementSimulator sim(NoiseSpec{world.sigma, derive_seed(options.seed, SeedStream::Evaluation, index)});
  for (std::size_t r = 0; r < options.repeats; ++r) {
    out.push_back(sim.measure(point.id, point.position, world.anchors, world.distortion).measured);
  }
  return out;
}

}  // namespace

EvaluationReport run_experiment(const World& world, const bpnet::Classifier& classifier,
                                const ExperimentOptions& options, const std::vector<RangingSample>* ingested) {
  if (options.repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be at least 1");
  if (options.test_points.empty()) throw Error(ErrorCode::EmptyInput, "no test points");
  if (options.k_percent) apply_mc_scaling(0.0, *options.k_percent);  // validates K before any work
  validate(world.distortion);

  EvaluationReport report;
  report.echo.label = k_label(options.k_percent);
  report.echo.strategy = options.strategy_label;
  report.echo.k_percent = options.k_percent;
  report.echo.seed = options.seed;
  report.echo.cell_size = classifier.grid.cell_size();
  report.echo.repeats = options.repeats;

  const Zone& zone = classifier.grid.zone();
  for (std::size_t j = 0; j < options.test_points.size(); ++j) {
    const auto& point = options.test_points[j];
    if (!zone.contains(point.position)) {
      throw Error(ErrorCode::OutOfZone, "test point " + point.id + " lies outside the zone");
    }
    if (!is_reported_test_point(point.position)) report.echo.synthetic_points.push_back(point.id);

    const auto measured = measurements_for(point, j, world, options, ingested);
    std::vector<double> trilat_errors, nn_errors;
    std::map<std::size_t, std::size_t> cell_votes;
    Point2D trilat_sum, nn_sum;
    for (auto m : measured) {
      if (options.k_percent) m = apply_mc_scaling(m, *options.k_percent);
      const Point2D t = trilaterate(world.anchors, m);
      const auto c = bpnet::classify(classifier, m);
      trilat_errors.push_back(error_distance(t, point.position));
      nn_errors.push_back(error_distance(c.position, point.position));
      ++cell_votes[c.cell_id];
      trilat_sum = {trilat_sum.x + t.x, trilat_sum.y + t.y};
      nn_sum = {nn_sum.x + c.position.x, nn_sum.y + c.position.y};
    }
    const double n = static_cast<double>(measured.size());
    const auto modal = std::max_element(cell_votes.begin(), cell_votes.end(),
                                        [](const auto& a, const auto& b) { return a.second < b.second; });
    report.points.push_back({point.id, point.position, {trilat_sum.x / n, trilat_sum.y / n}, mean_error(trilat_errors),
                             modal->first, {nn_sum.x / n, nn_sum.y / n}, mean_error(nn_errors)});
  }

  std::vector<double> trilat, nn;
  for (const auto& p : report.points) {
    trilat.push_back(p.trilat_error);
    nn.push_back(p.nn_error);
  }
  report.mean_trilat_error = mean_error(trilat);
  report.mean_nn_error = mean_error(nn);
  if (report.mean_trilat_error > 0.0) {
    report.improvement_percent = improvement_percent(report.mean_trilat_error, report.mean_nn_error);
  }
  return report;
}

std::vector<EvaluationReport> mc_sweep(const World& world, const bpnet::Classifier& classifier,
                                       const ExperimentOptions& options, std::span<const double> k_values,
                                       const std::vector<RangingSample>* ingested) {
  for (double k : k_values) apply_mc_scaling(0.0, k);
  std::vector<EvaluationReport> reports;
  ExperimentOptions run = options;
  run.k_percent.reset();
  reports.push_back(run_experiment(world, classifier, run, ingested));
  for (double k : k_values) {
    run.k_percent = k;
    reports.push_back(run_experiment(world, classifier, run, ingested));
  }
  return reports;
}

std::string format_per_point_csv(const EvaluationReport& report) {
  std::string out(kPerPointHeader);
  out += '\n';
  for (const auto& p : report.points) {
    out += p.point_id;
    for (double v : {p.truth.x, p.truth.y, p.trilat_error, p.nn_error}) {
      out += ',';
      out += csv::format_number(v);
    }
    out += '\n';
  }
  return out;
}

std::string format_summary_csv(std::span<const EvaluationReport> reports) {
  std::string out(kSummaryHeader);
  out += '\n';
  for (const auto& r : reports) {
    std::string synthetic;
    for (const auto& id : r.echo.synthetic_points) synthetic += (synthetic.empty() ? "" : ";") + id;
    out += r.echo.label + ',' + r.echo.strategy + ',' + (r.echo.k_percent ? csv::format_number(*r.echo.k_percent) : "") +
           ',' + std::to_string(r.echo.seed) + ',' + csv::format_number(r.echo.cell_size) + ',' +
           std::to_string(r.echo.repeats) + ',' + std::to_string(r.points.size()) + ',' +
           csv::format_number(r.mean_trilat_error) + ',' + csv::format_number(r.mean_nn_error) + ',' +
           (r.improvement_percent ? csv::format_number(*r.improvement_percent) : "") + ',' + synthetic + '\n';
  }
  return out;
}

std::string format_plot_data_csv(const EvaluationReport& report) {
  std::string out(kPlotHeader);
  out += '\n';
  auto emit_series = [&](std::string_view series, auto error_of) {
    std::vector<const TestPointResult*> sorted;
    for (const auto& p : report.points) sorted.push_back(&p);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [&](const auto* a, const auto* b) { return error_of(*a) < error_of(*b); });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const double cdf = static_cast<double>(i + 1) / static_cast<double>(sorted.size());
      out += std::string(series) + ',' + sorted[i]->point_id + ',' + csv::format_number(error_of(*sorted[i])) + ',' +
             csv::format_number(cdf) + '\n';
    }
  };
  emit_series("trilateration", [](const TestPointResult& p) { return p.trilat_error; });
  emit_series("bp_nn", [](const TestPointResult& p) { return p.nn_error; });
  return out;
}

std::vector<std::filesystem::path> emit_report(const EvaluationReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create directory '" + dir.string() + "': " + ec.message());
  const std::vector<std::filesystem::path> paths{dir / "per_point.csv", dir / "summary.csv", dir / "plot_data.csv"};
  csv::write_file(paths[0], format_per_point_csv(report));
  csv::write_file(paths[1], format_summary_csv(std::span(&report, 1)));
  csv::write_file(paths[2], format_plot_data_csv(report));
  return paths;
}

std::vector<std::filesystem::path> emit_sweep(std::span<const EvaluationReport> reports,
                                              const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create directory '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> paths{dir / "summary.csv"};
  csv::write_file(paths[0], format_summary_csv(reports));
  for (const auto& r : reports) {
    paths.push_back(dir / ("per_point_" + r.echo.label + ".csv"));
    csv::write_file(paths.back(), format_per_point_csv(r));
    paths.push_back(dir / ("plot_data_" + r.echo.label + ".csv"));
    csv::write_file(paths.back(), format_plot_data_csv(r));
  }
  return paths;
}

std::vector<PerPointRow> parse_per_point_csv(std::string_view text) {
  const auto rows = csv::lines(text);
  if (rows.empty() || rows.front() != kPerPointHeader) {
    throw Error(ErrorCode::ParseError, "per-point CSV must start with header '" + std::string(kPerPointHeader) + "'");
  }
  std::vector<PerPointRow> out;
  for (std::size_t line = 1; line < rows.size(); ++line) {
    if (rows[line].empty()) continue;
    const auto f = csv::split(rows[line]);
    const std::string where = "per-point CSV line " + std::to_string(line + 1);
    if (f.size() != 5) throw Error(ErrorCode::ParseError, where + ": expected 5 fields");
    out.push_back({std::string(f[0]),
                   {csv::parse_number(f[1], where), csv::parse_number(f[2], where)},
                   csv::parse_number(f[3], where),
                   csv::parse_number(f[4], where)});
  }
  return out;
}

}  // namespace uwbpos::eval
