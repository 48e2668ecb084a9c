#include "uwbpos/ranging.hpp"

#include <algorithm>
#include <cmath>

#include "uwbpos/csv.hpp"
#include "uwbpos/error.hpp"

namespace uwbpos {

void validate(const PerAnchorDistortion& distortion) {
  for (const auto& d : distortion) {
    if (!std::isfinite(d.a) || !std::isfinite(d.b)) {
      throw Error(ErrorCode::InvalidArgument, "distortion coefficients must be finite");
    }
    if (d.a <= 0.0) throw Error(ErrorCode::InvalidSlope, "slope a must be positive, got " + csv::format_number(d.a));
  }
}

MeasurementSimulator::MeasurementSimulator(NoiseSpec noise) : noise_(noise), engine_(noise.seed) {
  if (!std::isfinite(noise.sigma) || noise.sigma < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "noise sigma must be finite and non-negative");
  }
}

RangingSample MeasurementSimulator::measure(std::string point_id, Point2D true_pos, const AnchorSet& anchors,
                                            const PerAnchorDistortion& distortion) {
  RangingSample sample{std::move(point_id), true_pos, {}};
  const auto real = anchor_distances(anchors, true_pos);
  for (std::size_t i = 0; i < 3; ++i) {
    double value = distortion[i].apply(real[i]);
    // A zero sigma leaves the generator untouched.
    if (noise_.sigma > 0.0) value += noise_.sigma * gauss_(engine_);
    sample.measured[i] = std::max(value, 0.0);
  }
  return sample;
}

RangingSample simulate_measurement(Point2D true_pos, const AnchorSet& anchors,
                                   const PerAnchorDistortion& distortion, const NoiseSpec& noise) {
  validate(distortion);
  MeasurementSimulator sim(noise);
  return sim.measure("", true_pos, anchors, distortion);
}

LinearDistortion fit_linear_model(std::span<const ReferenceObservation> observations) {
  if (observations.size() < 2) {
    throw Error(ErrorCode::EmptyInput, "at least two reference observations are required");
  }
  const bool all_equal = std::all_of(observations.begin(), observations.end(),
                                     [&](const auto& o) { return o.real == observations.front().real; });
  if (all_equal) throw Error(ErrorCode::DegenerateFit, "reference points share the same true distance");

  LinearDistortion fit;
  if (observations.size() == 2) {
    const auto& p = observations[0];
    const auto& q = observations[1];
    fit.a = (q.measured - p.measured) / (q.real - p.real);
    fit.b = p.measured - fit.a * p.real;
  } else {
    const double n = static_cast<double>(observations.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (const auto& o : observations) {
      mean_x += o.real;
      mean_y += o.measured;
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& o : observations) {
      sxx += (o.real - mean_x) * (o.real - mean_x);
      sxy += (o.real - mean_x) * (o.measured - mean_y);
    }
    fit.a = sxy / sxx;
    fit.b = mean_y - fit.a * mean_x;
  }
  if (!(fit.a > 0.0)) {
    throw Error(ErrorCode::InvalidSlope, "fitted slope " + csv::format_number(fit.a) + " is not positive");
  }
  return fit;
}

DistanceTriple average_measurements(std::span<const RangingSample> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "no samples to average");
  DistanceTriple sum{};
  for (const auto& s : samples) {
    if (s.point_id != samples.front().point_id) {
      throw Error(ErrorCode::InvalidArgument, "samples belong to different points ('" + samples.front().point_id +
                                                  "' and '" + s.point_id + "')");
    }
    for (std::size_t i = 0; i < 3; ++i) sum[i] += s.measured[i];
  }
  const double n = static_cast<double>(samples.size());
  return {sum[0] / n, sum[1] / n, sum[2] / n};
}

double apply_mc_scaling(double measured, double k_percent) {
  if (!(k_percent > 0.0 && k_percent <= 100.0)) {
    throw Error(ErrorCode::InvalidK, "K must lie in (0, 100], got " + csv::format_number(k_percent));
  }
  if (!(measured >= 0.0)) throw Error(ErrorCode::InvalidArgument, "measured distance must be non-negative");
  return measured > kCalibrationThreshold ? measured * (k_percent / 100.0) : measured;
}

DistanceTriple apply_mc_scaling(const DistanceTriple& measured, double k_percent) {
  return {apply_mc_scaling(measured[0], k_percent), apply_mc_scaling(measured[1], k_percent),
          apply_mc_scaling(measured[2], k_percent)};
}

std::string format_measurement_csv(std::span<const RangingSample> samples) {
  std::string out(kMeasurementHeader);
  out += '\n';
  for (const auto& s : samples) {
    out += s.point_id;
    for (double v : {s.true_pos.x, s.true_pos.y, s.measured[0], s.measured[1], s.measured[2]}) {
      out += ',';
      out += csv::format_number(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<RangingSample> parse_measurement_csv(std::string_view text) {
  const auto rows = csv::lines(text);
  if (rows.empty() || rows.front() != kMeasurementHeader) {
    throw Error(ErrorCode::ParseError, "measurement CSV must start with header '" + std::string(kMeasurementHeader) + "'");
  }
  std::vector<RangingSample> samples;
  for (std::size_t line = 1; line < rows.size(); ++line) {
    if (rows[line].empty()) continue;
    const auto fields = csv::split(rows[line]);
    const std::string where = "measurement CSV line " + std::to_string(line + 1);
    if (fields.size() != 6) throw Error(ErrorCode::ParseError, where + ": expected 6 fields");
    RangingSample s;
    s.point_id = std::string(fields[0]);
    s.true_pos = {csv::parse_number(fields[1], where), csv::parse_number(fields[2], where)};
    for (std::size_t i = 0; i < 3; ++i) {
      s.measured[i] = csv::parse_number(fields[3 + i], where);
      if (!std::isfinite(s.measured[i]) || s.measured[i] < 0.0) {
        throw Error(ErrorCode::ParseError, where + ": distances must be finite and non-negative");
      }
    }
    if (!is_finite(s.true_pos)) throw Error(ErrorCode::ParseError, where + ": coordinates must be finite");
    samples.push_back(std::move(s));
  }
  return samples;
}

void write_measurement_csv(const std::filesystem::path& path, std::span<const RangingSample> samples) {
  csv::write_file(path, format_measurement_csv(samples));
}

std::vector<RangingSample> read_measurement_csv(const std::filesystem::path& path) {
  return parse_measurement_csv(csv::read_file(path));
}

}  // namespace uwbpos
