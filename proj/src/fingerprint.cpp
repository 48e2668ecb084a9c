#include "uwbpos/fingerprint.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "uwbpos/csv.hpp"
#include "uwbpos/error.hpp"

namespace uwbpos {

namespace {

constexpr double kPointTolerance = 1e-6;

bool same_point(Point2D p, Point2D q) {
  return std::abs(p.x - q.x) <= kPointTolerance && std::abs(p.y - q.y) <= kPointTolerance;
}

std::string describe(Point2D p) { return "(" + csv::format_number(p.x) + ", " + csv::format_number(p.y) + ")"; }

std::size_t exact_count(double length, double cell_size) {
  const double ratio = length / cell_size;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(rounded * cell_size - length) > 1e-9 * length) {
    throw Error(ErrorCode::NonDividingCellSize,
                "cell size " + csv::format_number(cell_size) + " does not divide " + csv::format_number(length));
  }
  return static_cast<std::size_t>(rounded);
}

std::size_t index_of(const ReferenceGroup& group, Point2D p) {
  for (std::size_t j = 0; j < group.points.size(); ++j) {
    if (same_point(group.points[j], p)) return j;
  }
  throw Error(ErrorCode::MissingReferencePoint, "group " + group.label + " lacks reference point " + describe(p));
}

struct AnchorFit {
  LinearDistortion model;
  std::vector<ReferenceObservation> observations;
};

AnchorFit fit_against_anchor(const ReferenceGroup& group, const AnchorSet& anchors,
                             std::span<const DistanceTriple> means, std::initializer_list<Point2D> points,
                             std::size_t anchor) {
  AnchorFit fit;
  for (Point2D p : points) {
    const std::size_t j = index_of(group, p);
    fit.observations.push_back({euclidean_distance(p, anchors[anchor]), means[j][anchor]});
  }
  fit.model = fit_linear_model(fit.observations);
  return fit;
}

double residual_rms(const LinearDistortion& model, std::span<const ReferenceObservation> obs) {
  double sum = 0.0;
  for (const auto& o : obs) {
    const double r = model.apply(o.real) - o.measured;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(obs.size()));
}

PerAnchorDistortion uniform(LinearDistortion d) { return {d, d, d}; }

}  // namespace

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::TDT: return "TDT";
    case Strategy::TNT: return "TNT";
    case Strategy::CT: return "CT";
  }
  return "?";
}

std::vector<ReferenceGroup> builtin_reference_groups() {
  return {
      {Strategy::TDT, "tdt-g1", {{750, 500}, {900, 100}}},
      {Strategy::TDT, "tdt-g2", {{100, 1900}, {900, 100}}},
      {Strategy::TNT, "tnt-g1", {{900, 1900}, {900, 100}}},
      {Strategy::TNT, "tnt-g2", {{750, 1500}, {750, 500}}},
      {Strategy::CT, "ct", {{100, 100}, {100, 1900}, {900, 100}, {900, 1900}}},
  };
}

ReferenceGroup find_reference_group(std::string_view label) {
  for (auto& g : builtin_reference_groups()) {
    if (g.label == label) return g;
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown strategy '" + std::string(label) + "' (expected tdt-g1, tdt-g2, tnt-g1, tnt-g2 or ct)");
}

Grid::Grid(Zone zone, double cell_size) : zone_(zone), cell_size_(cell_size), n_cols_(0), n_rows_(0) {
  zone_.validate();
  if (!std::isfinite(cell_size) || cell_size <= 0.0) {
    throw Error(ErrorCode::NonDividingCellSize, "cell size must be positive");
  }
  n_cols_ = exact_count(zone_.width, cell_size);
  n_rows_ = exact_count(zone_.height, cell_size);
}

Point2D Grid::centroid(std::size_t cell_id) const {
  if (cell_id >= cell_count()) throw Error(ErrorCode::InvalidArgument, "cell id out of range");
  const auto row = cell_id / n_cols_;
  const auto col = cell_id % n_cols_;
  return {zone_.origin.x + (static_cast<double>(col) + 0.5) * cell_size_,
          zone_.origin.y + (static_cast<double>(row) + 0.5) * cell_size_};
}

std::vector<Point2D> Grid::centroids() const {
  std::vector<Point2D> out;
  out.reserve(cell_count());
  for (std::size_t id = 0; id < cell_count(); ++id) out.push_back(centroid(id));
  return out;
}

Grid make_grid(const Zone& zone, double cell_size) { return Grid(zone, cell_size); }

Subzone ct_subzone(Point2D point, const Zone& zone) {
  if (!zone.contains(point)) throw Error(ErrorCode::OutOfZone, "point " + describe(point) + " lies outside the zone");
  return point.x < zone.origin.x + zone.width / 2.0 ? Subzone::Left : Subzone::Right;
}

StrategyCoefficients StrategyCoefficients::identity() {
  StrategyCoefficients c;
  c.group_label = "none";
  return c;
}

const PerAnchorDistortion& StrategyCoefficients::governing(Point2D p, const Zone& zone) const {
  if (right && ct_subzone(p, zone) == Subzone::Right) return *right;
  return primary;
}

StrategyCoefficients fit_strategy_coefficients(const ReferenceGroup& group, const AnchorSet& anchors,
                                               std::span<const DistanceTriple> measured_means,
                                               std::size_t n_repeats) {
  if (measured_means.size() != group.points.size()) {
    throw Error(ErrorCode::InvalidArgument, "group " + group.label + " needs " + std::to_string(group.points.size()) +
                                                " measured means, got " + std::to_string(measured_means.size()));
  }
  if (n_repeats < 1) throw Error(ErrorCode::InvalidArgument, "n_repeats must be at least 1");

  StrategyCoefficients out;
  out.strategy = group.strategy;
  out.group_label = group.label;
  out.n_repeats = n_repeats;

  if (group.strategy != Strategy::CT) {
    if (group.points.size() != 2) throw Error(ErrorCode::InvalidArgument, "two-point groups need exactly 2 points");
    for (std::size_t i = 0; i < 3; ++i) {
      auto fit = fit_against_anchor(group, anchors, measured_means, {group.points[0], group.points[1]}, i);
      out.primary[i] = fit.model;
      out.residual_rms[i] = residual_rms(fit.model, fit.observations);
    }
    return out;
  }

  const auto l1 = fit_against_anchor(group, anchors, measured_means, {{100, 1900}, {900, 100}}, 1);
  const auto l2 = fit_against_anchor(group, anchors, measured_means, {{100, 100}, {900, 1900}}, 0);
  const auto r = fit_against_anchor(group, anchors, measured_means, {{900, 100}, {900, 1900}}, 2);
  const LinearDistortion left{(l1.model.a + l2.model.a) / 2.0, (l1.model.b + l2.model.b) / 2.0};
  out.primary = uniform(left);
  out.right = uniform(r.model);
  out.residual_rms = {residual_rms(left, l2.observations), residual_rms(left, l1.observations),
                      residual_rms(r.model, r.observations)};
  return out;
}

StrategyCoefficients calibrate_from_samples(const ReferenceGroup& group, const AnchorSet& anchors,
                                            std::span<const RangingSample> samples) {
  std::vector<DistanceTriple> means;
  std::size_t min_repeats = 0;
  for (Point2D p : group.points) {
    DistanceTriple sum{};
    std::size_t count = 0;
    for (const auto& s : samples) {
      if (!same_point(s.true_pos, p)) continue;
      for (std::size_t i = 0; i < 3; ++i) sum[i] += s.measured[i];
      ++count;
    }
    if (count == 0) {
      throw Error(ErrorCode::MissingReferencePoint,
                  "no measurements for reference point " + describe(p) + " of group " + group.label);
    }
    const double n = static_cast<double>(count);
    means.push_back({sum[0] / n, sum[1] / n, sum[2] / n});
    min_repeats = min_repeats == 0 ? count : std::min(min_repeats, count);
  }
  return fit_strategy_coefficients(group, anchors, means, min_repeats);
}

DistanceDatabase generate_database(const Grid& grid, const AnchorSet& anchors,
                                   const StrategyCoefficients& coefficients) {
  validate(coefficients.primary);
  if (coefficients.right) validate(*coefficients.right);
  DistanceDatabase db{grid, {}, coefficients};
  db.entries.reserve(grid.cell_count());
  for (std::size_t id = 0; id < grid.cell_count(); ++id) {
    const Point2D c = grid.centroid(id);
    const auto& coef = coefficients.governing(c, grid.zone());
    DistanceTriple entry{};
    for (std::size_t i = 0; i < 3; ++i) entry[i] = std::max(coef[i].apply(euclidean_distance(c, anchors[i])), 0.0);
    db.entries.push_back(entry);
  }
  return db;
}

namespace {

nlohmann::ordered_json to_json(const PerAnchorDistortion& d) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& x : d) arr.push_back({{"a", x.a}, {"b", x.b}});
  return arr;
}

PerAnchorDistortion distortion_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ParseError, "expected three per-anchor coefficients");
  PerAnchorDistortion d;
  for (std::size_t i = 0; i < 3; ++i) d[i] = {j.at(i).at("a").get<double>(), j.at(i).at("b").get<double>()};
  return d;
}

}  // namespace

std::string format_coefficients_json(const StrategyCoefficients& c) {
  nlohmann::ordered_json j;
  j["format"] = "uwbpos-coefficients/1";
  j["strategy"] = c.strategy ? std::string(to_string(*c.strategy)) : std::string("none");
  j["group"] = c.group_label;
  j["n_repeats"] = c.n_repeats;
  j["residual_rms_mm"] = c.residual_rms;
  j["primary"] = to_json(c.primary);
  if (c.right) j["right"] = to_json(*c.right);
  return j.dump(2) + "\n";
}

StrategyCoefficients parse_coefficients_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != "uwbpos-coefficients/1") throw Error(ErrorCode::ParseError, "unsupported coefficients format");
    StrategyCoefficients c;
    const auto strategy = j.at("strategy").get<std::string>();
    if (strategy == "TDT") c.strategy = Strategy::TDT;
    else if (strategy == "TNT") c.strategy = Strategy::TNT;
    else if (strategy == "CT") c.strategy = Strategy::CT;
    else if (strategy != "none") throw Error(ErrorCode::ParseError, "unknown strategy '" + strategy + "'");
    c.group_label = j.at("group").get<std::string>();
    c.n_repeats = j.at("n_repeats").get<std::size_t>();
    c.residual_rms = j.at("residual_rms_mm").get<std::array<double, 3>>();
    c.primary = distortion_from_json(j.at("primary"));
    if (j.contains("right")) c.right = distortion_from_json(j.at("right"));
    validate(c.primary);
    if (c.right) validate(*c.right);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("coefficients file: ") + e.what());
  }
}

std::string format_database_csv(const DistanceDatabase& db) {
  std::string out(kDatabaseHeader);
  out += '\n';
  for (std::size_t id = 0; id < db.entries.size(); ++id) {
    const Point2D c = db.grid.centroid(id);
    out += std::to_string(id);
    for (double v : {c.x, c.y, db.entries[id][0], db.entries[id][1], db.entries[id][2]}) {
      out += ',';
      out += csv::format_number(v);
    }
    out += '\n';
  }
  return out;
}

DistanceDatabase parse_database_csv(std::string_view text, const Grid& grid) {
  const auto rows = csv::lines(text);
  if (rows.empty()) throw Error(ErrorCode::EmptyDatabase, "database file is empty");
  if (rows.front() != kDatabaseHeader) {
    throw Error(ErrorCode::ParseError, "database CSV must start with header '" + std::string(kDatabaseHeader) + "'");
  }
  DistanceDatabase db{grid, {}, StrategyCoefficients::identity()};
  db.provenance.group_label = "unknown";
  for (std::size_t line = 1; line < rows.size(); ++line) {
    if (rows[line].empty()) continue;
    const auto fields = csv::split(rows[line]);
    const std::string where = "database CSV line " + std::to_string(line + 1);
    if (fields.size() != 6) throw Error(ErrorCode::ParseError, where + ": expected 6 fields");
    const double id = csv::parse_number(fields[0], where);
    if (id != static_cast<double>(db.entries.size())) {
      throw Error(ErrorCode::GridMismatch, where + ": expected cell_id " + std::to_string(db.entries.size()));
    }
    if (db.entries.size() >= grid.cell_count()) {
      throw Error(ErrorCode::GridMismatch, "database has more rows than the grid's " +
                                               std::to_string(grid.cell_count()) + " cells");
    }
    const Point2D c{csv::parse_number(fields[1], where), csv::parse_number(fields[2], where)};
    if (!same_point(c, grid.centroid(db.entries.size()))) {
      throw Error(ErrorCode::GridMismatch, where + ": centroid " + describe(c) + " does not match the grid");
    }
    DistanceTriple entry{};
    for (std::size_t i = 0; i < 3; ++i) {
      entry[i] = csv::parse_number(fields[3 + i], where);
      if (!std::isfinite(entry[i]) || entry[i] < 0.0) {
        throw Error(ErrorCode::ParseError, where + ": fingerprints must be finite and non-negative");
      }
    }
    db.entries.push_back(entry);
  }
  if (db.entries.empty()) throw Error(ErrorCode::EmptyDatabase, "database has no rows");
  if (db.entries.size() != grid.cell_count()) {
    throw Error(ErrorCode::GridMismatch, "database has " + std::to_string(db.entries.size()) + " rows, grid has " +
                                             std::to_string(grid.cell_count()) + " cells");
  }
  return db;
}

}  // namespace uwbpos
