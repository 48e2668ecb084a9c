#include "uwbpos/commands.hpp"

#include <iomanip>
#include <ostream>

#include <CLI11.hpp>

#include "uwbpos/csv.hpp"
#include "uwbpos/error.hpp"
#include "uwbpos/seeding.hpp"

namespace uwbpos::cli {

std::vector<RangingSample> simulate(const PipelineConfig& config, PointSet points) {
  config.validate();
  const auto world = config.world();
  std::vector<RangingSample> out;
  if (points != PointSet::Test) {
    if (const auto group = config.reference_group()) {
      const auto refs = eval::reference_points(*group);
      out = eval::simulate_points(world, refs, config.calibration_repeats, config.seed, SeedStream::Calibration);
    }
  }
  if (points != PointSet::Reference) {
    auto tests = eval::simulate_points(world, config.test_points, config.repeats, config.seed, SeedStream::Evaluation);
    out.insert(out.end(), tests.begin(), tests.end());
  }
  return out;
}

StrategyCoefficients calibrate(const PipelineConfig& config, const std::vector<RangingSample>& samples) {
  const auto group = config.reference_group();
  if (!group) return StrategyCoefficients::identity();
  return calibrate_from_samples(*group, config.anchors, samples);
}

DistanceDatabase gendb(const PipelineConfig& config, const StrategyCoefficients& coefficients) {
  return generate_database(config.grid(), config.anchors, coefficients);
}

bpnet::Classifier train(const PipelineConfig& config, const DistanceDatabase& db) {
  return bpnet::train(db, config.train_config(), config.augmentation());
}

std::vector<eval::EvaluationReport> evaluate(const PipelineConfig& config, const bpnet::Classifier& classifier,
                                             const std::vector<RangingSample>* ingested) {
  if (!(classifier.grid == config.grid())) {
    throw Error(ErrorCode::GridMismatch, "model was trained on a " + std::to_string(classifier.grid.n_cols()) + "x" +
                                             std::to_string(classifier.grid.n_rows()) +
                                             " grid that differs from the configured grid");
  }
  eval::ExperimentOptions options;
  options.test_points = config.test_points;
  options.repeats = config.repeats;
  options.seed = config.seed;
  options.strategy_label = config.strategy;
  if (config.k_values.empty()) return {eval::run_experiment(config.world(), classifier, options, ingested)};
  return eval::mc_sweep(config.world(), classifier, options, config.k_values, ingested);
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  config.validate();
  auto coefficients = StrategyCoefficients::identity();
  if (const auto group = config.reference_group()) {
    coefficients = eval::calibrate_by_simulation(config.world(), *group, config.calibration_repeats, config.seed);
  }
  auto database = gendb(config, coefficients);
  auto classifier = train(config, database);
  auto reports = evaluate(config, classifier);
  return {std::move(coefficients), std::move(database), std::move(classifier), std::move(reports)};
}

namespace {

struct Flags {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string strategy;
  std::string k_list;
  std::string points = "all";
  std::string measurements;
  std::string coefficients;
  std::string database;
  std::string model;
  std::string per_point;
};

PipelineConfig resolve_config(const Flags& flags) {
  PipelineConfig config = flags.config_path.empty() ? PipelineConfig{} : load_config(flags.config_path);
  if (flags.seed) config.seed = *flags.seed;
  if (!flags.strategy.empty()) config.strategy = flags.strategy;
  if (!flags.k_list.empty()) {
    config.k_values.clear();
    for (auto field : csv::split(flags.k_list, ',')) {
      try {
        config.k_values.push_back(csv::parse_number(field, "--k"));
      } catch (const Error& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
      }
    }
  }
  config.validate();
  return config;
}

std::filesystem::path pick(const std::string& flag, const std::filesystem::path& fallback) {
  return flag.empty() ? fallback : std::filesystem::path(flag);
}

void print_reports(const std::vector<eval::EvaluationReport>& reports, std::ostream& out) {
  for (const auto& r : reports) {
    out << std::left << std::setw(10) << r.echo.label << " trilateration " << std::fixed << std::setprecision(2)
        << r.mean_trilat_error << " mm, BP network " << r.mean_nn_error << " mm, improvement ";
    if (r.improvement_percent) out << *r.improvement_percent << " %\n";
    else out << "n/a\n";
    out.unsetf(std::ios::fixed);
  }
}

int run_command(const std::string& name, const Flags& flags, std::ostream& out) {
  if (name == "report") {
    if (flags.per_point.empty()) throw Error(ErrorCode::InvalidArgument, "report needs --per-point <csv>");
    const auto rows = eval::parse_per_point_csv(csv::read_file(flags.per_point));
    eval::EvaluationReport report;
    std::vector<double> trilat, nn;
    for (const auto& row : rows) {
      report.points.push_back({row.point_id, row.position, {}, row.trilat_error, 0, {}, row.nn_error});
      trilat.push_back(row.trilat_error);
      nn.push_back(row.nn_error);
    }
    report.mean_trilat_error = eval::mean_error(trilat);
    report.mean_nn_error = eval::mean_error(nn);
    if (report.mean_trilat_error > 0.0) {
      report.improvement_percent = eval::improvement_percent(report.mean_trilat_error, report.mean_nn_error);
    }
    out << "point_id  trilat_err_mm  nn_err_mm\n";
    for (const auto& row : rows) {
      out << std::left << std::setw(10) << row.point_id << std::setw(15) << csv::format_number(row.trilat_error)
          << csv::format_number(row.nn_error) << "\n";
    }
    print_reports({report}, out);
    if (!flags.out.empty()) csv::write_file(flags.out, eval::format_plot_data_csv(report));
    return kExitOk;
  }

  const PipelineConfig config = resolve_config(flags);

  if (name == "simulate") {
    PointSet set = PointSet::All;
    if (flags.points == "reference") set = PointSet::Reference;
    else if (flags.points == "test") set = PointSet::Test;
    else if (flags.points != "all") throw Error(ErrorCode::InvalidArgument, "--points must be reference, test or all");
    const auto samples = simulate(config, set);
    const auto path = pick(flags.out, config.measurements_path);
    write_measurement_csv(path, samples);
    out << "wrote " << samples.size() << " measurement rows to " << path.string() << "\n";
  } else if (name == "calibrate") {
    const auto samples = read_measurement_csv(pick(flags.measurements, config.measurements_path));
    const auto coefficients = calibrate(config, samples);
    const auto path = pick(flags.out, config.coefficients_path);
    csv::write_file(path, format_coefficients_json(coefficients));
    out << "calibrated strategy " << coefficients.group_label << " from " << coefficients.n_repeats
        << " repeats; wrote " << path.string() << "\n";
  } else if (name == "gendb") {
    const auto coefficients = parse_coefficients_json(csv::read_file(pick(flags.coefficients, config.coefficients_path)));
    const auto db = gendb(config, coefficients);
    const auto path = pick(flags.out, config.database_path);
    csv::write_file(path, format_database_csv(db));
    out << "wrote " << db.entries.size() << " fingerprints to " << path.string() << "\n";
  } else if (name == "train") {
    const auto db = parse_database_csv(csv::read_file(pick(flags.database, config.database_path)), config.grid());
    const auto classifier = train(config, db);
    const auto path = pick(flags.out, config.model_path);
    csv::write_file(path, bpnet::format_model_json(classifier));
    out << "final training loss " << csv::format_number(classifier.summary.epoch_loss.back())
        << ", training accuracy " << csv::format_number(100.0 * classifier.summary.accuracy) << " %\n"
        << "wrote " << path.string() << "\n";
  } else if (name == "evaluate") {
    const auto classifier = bpnet::parse_model_json(csv::read_file(pick(flags.model, config.model_path)));
    std::optional<std::vector<RangingSample>> ingested;
    if (!flags.measurements.empty()) ingested = read_measurement_csv(flags.measurements);
    const auto reports = evaluate(config, classifier, ingested ? &*ingested : nullptr);
    const auto dir = pick(flags.out, config.report_dir);
    if (reports.size() == 1) eval::emit_report(reports.front(), dir);
    else eval::emit_sweep(reports, dir);
    print_reports(reports, out);
    out << "wrote reports to " << dir.string() << "\n";
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"UWB fingerprint positioning: simulate, calibrate, build databases, train and evaluate"};
  app.footer("Config file keys (sectioned key = value; unknown keys are rejected):\n" + config_reference());
  app.require_subcommand(1);
  Flags flags;

  auto common = [&](CLI::App* cmd, bool uses_config = true) {
    if (uses_config) {
      cmd->add_option("--config", flags.config_path, "pipeline config file");
      cmd->add_option("--seed", flags.seed, "master seed, overrides the config");
      cmd->add_option("--strategy", flags.strategy, "tdt-g1|tdt-g2|tnt-g1|tnt-g2|ct|none, overrides the config");
      cmd->add_option("--k", flags.k_list, "comma-separated K percentages, overrides the config");
    }
    cmd->add_option("--out", flags.out, "output path");
  };

  auto* simulate_cmd = app.add_subcommand("simulate", "simulate measurements into a measurement CSV");
  common(simulate_cmd);
  simulate_cmd->add_option("--points", flags.points, "reference | test | all")->capture_default_str();

  auto* calibrate_cmd = app.add_subcommand("calibrate", "fit strategy coefficients from a measurement CSV");
  common(calibrate_cmd);
  calibrate_cmd->add_option("--measurements", flags.measurements, "measurement CSV");

  auto* gendb_cmd = app.add_subcommand("gendb", "generate the fingerprint database CSV");
  common(gendb_cmd);
  gendb_cmd->add_option("--coefficients", flags.coefficients, "coefficients file");

  auto* train_cmd = app.add_subcommand("train", "train the BP network on a database CSV");
  common(train_cmd);
  train_cmd->add_option("--database", flags.database, "database CSV");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "compare trilateration and the BP network");
  common(evaluate_cmd);
  evaluate_cmd->add_option("--model", flags.model, "model file");
  evaluate_cmd->add_option("--measurements", flags.measurements, "measurement CSV to ingest instead of simulating");

  auto* report_cmd = app.add_subcommand("report", "summarise a per-point report CSV");
  common(report_cmd, false);
  report_cmd->add_option("--per-point", flags.per_point, "per-point CSV written by evaluate")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    return run_command(app.get_subcommands().front()->get_name(), flags, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::IoError ? kExitIo : kExitValidation;
  }
}

}  // namespace uwbpos::cli
