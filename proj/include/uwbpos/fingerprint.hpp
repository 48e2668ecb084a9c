#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uwbpos/geometry.hpp"
#include "uwbpos/ranging.hpp"

namespace uwbpos {

/// Reference-point selection strategies: two-point diagonal, two-point
/// non-diagonal, and the coalescent per-subzone hybrid.
enum class Strategy { TDT, TNT, CT };

std::string_view to_string(Strategy s) noexcept;

struct ReferenceGroup {
  Strategy strategy;
  std::string label;  ///< "tdt-g1", "tdt-g2", "tnt-g1", "tnt-g2" or "ct"
  std::vector<Point2D> points;
};

/// The five built-in groups in the order TDT-G1, TDT-G2, TNT-G1, TNT-G2, CT.
std::vector<ReferenceGroup> builtin_reference_groups();

/// Looks a group up by label; throws InvalidArgument for unknown labels.
ReferenceGroup find_reference_group(std::string_view label);

/// Uniform square partition of a zone. Cells are numbered row-major from the
/// zone origin: cell_id = row * n_cols + col.
class Grid {
 public:
  Grid(Zone zone, double cell_size);

  const Zone& zone() const noexcept { return zone_; }
  double cell_size() const noexcept { return cell_size_; }
  std::size_t n_cols() const noexcept { return n_cols_; }
  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t cell_count() const noexcept { return n_cols_ * n_rows_; }

  Point2D centroid(std::size_t cell_id) const;
  std::vector<Point2D> centroids() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Zone zone_;
  double cell_size_;
  std::size_t n_cols_;
  std::size_t n_rows_;
};

/// Throws NonDividingCellSize unless `cell_size` tiles the zone exactly.
Grid make_grid(const Zone& zone, double cell_size);

enum class Subzone { Left, Right };

/// Vertical split at the zone midline; points on the midline belong to Right.
/// Throws OutOfZone for points outside the zone.
Subzone ct_subzone(Point2D point, const Zone& zone);

/// Coefficients a strategy produced, plus their provenance.
struct StrategyCoefficients {
  std::optional<Strategy> strategy;  ///< empty for uncalibrated identity coefficients
  std::string group_label;           ///< "none" for identity
  PerAnchorDistortion primary{};     ///< whole zone, or the left subzone under CT
  std::optional<PerAnchorDistortion> right;  ///< right subzone, CT only
  std::array<double, 3> residual_rms{};      ///< mm, over the group's reference points
  std::size_t n_repeats = 1;

  static StrategyCoefficients identity();

  /// Coefficients that govern `p`: the CT subzone dispatch, or `primary`.
  const PerAnchorDistortion& governing(Point2D p, const Zone& zone) const;

  friend bool operator==(const StrategyCoefficients&, const StrategyCoefficients&) = default;
};

/// Fits the strategy's coefficients from per-point averaged measurements,
/// `measured_means[j]` belonging to `group.points[j]`.
///
/// TDT/TNT fit one model per anchor over the two reference points. CT fits
/// (100,1900),(900,100) against a1 and (100,100),(900,1900) against a0, and
/// averages the two for the left subzone; (900,100),(900,1900) against a2
/// gives the right subzone. Each subzone result is applied to all anchors.
StrategyCoefficients fit_strategy_coefficients(const ReferenceGroup& group, const AnchorSet& anchors,
                                               std::span<const DistanceTriple> measured_means,
                                               std::size_t n_repeats = 1);

/// Same as above, grouping raw samples by true position. Throws
/// MissingReferencePoint naming the first reference point without samples.
StrategyCoefficients calibrate_from_samples(const ReferenceGroup& group, const AnchorSet& anchors,
                                            std::span<const RangingSample> samples);

/// Predicted measured-distance fingerprints, one triple per grid cell.
struct DistanceDatabase {
  Grid grid;
  std::vector<DistanceTriple> entries;
  StrategyCoefficients provenance;
};

/// entry_i = a_i * |centroid - anchor_i| + b_i, clamped at zero.
DistanceDatabase generate_database(const Grid& grid, const AnchorSet& anchors, const StrategyCoefficients& coefficients);

// Coefficients file (JSON).
std::string format_coefficients_json(const StrategyCoefficients& coefficients);
StrategyCoefficients parse_coefficients_json(std::string_view text);

// Database CSV: cell_id,cx_mm,cy_mm,f0_mm,f1_mm,f2_mm, ascending cell_id.
inline constexpr std::string_view kDatabaseHeader = "cell_id,cx_mm,cy_mm,f0_mm,f1_mm,f2_mm";

std::string format_database_csv(const DistanceDatabase& db);

/// Parses a database CSV against `grid`. Throws EmptyDatabase when there are
/// no rows and GridMismatch when rows do not match the grid's cells.
DistanceDatabase parse_database_csv(std::string_view text, const Grid& grid);

}  // namespace uwbpos
