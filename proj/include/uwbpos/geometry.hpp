#pragma once

#include <array>
#include <cstddef>

namespace uwbpos {

/// Planar coordinate in millimetres.
struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2D&, const Point2D&) = default;
};

bool is_finite(Point2D p) noexcept;

/// Three distances in millimetres, ordered as anchors a0, a1, a2.
using DistanceTriple = std::array<double, 3>;

/// Three fixed anchors. Construction rejects coincident or collinear anchors.
class AnchorSet {
 public:
  AnchorSet(Point2D a0, Point2D a1, Point2D a2);

  /// Anchors at (0,0), (0,2000), (1000,2000).
  static AnchorSet standard();

  const Point2D& operator[](std::size_t i) const { return points_[i]; }
  const std::array<Point2D, 3>& points() const noexcept { return points_; }

  friend bool operator==(const AnchorSet&, const AnchorSet&) = default;

 private:
  std::array<Point2D, 3> points_;
};

/// Axis-aligned rectangle; `origin` is the lower-left corner.
struct Zone {
  Point2D origin{};
  double width = 1000.0;
  double height = 2000.0;

  /// Throws InvalidArgument unless width and height are positive and finite.
  void validate() const;
  /// Inclusive on all edges.
  bool contains(Point2D p) const noexcept;

  friend bool operator==(const Zone&, const Zone&) = default;
};

double euclidean_distance(Point2D p, Point2D q) noexcept;

/// Position error of an estimate against ground truth.
inline double error_distance(Point2D estimate, Point2D truth) noexcept {
  return euclidean_distance(estimate, truth);
}

/// Exact distances from `p` to each anchor.
DistanceTriple anchor_distances(const AnchorSet& anchors, Point2D p) noexcept;

/// |det| of the linearised system below which anchors count as collinear (mm^2).
inline constexpr double kSingularDeterminant = 1e-9;

/// Determinant of the 2x2 system obtained by subtracting the a0 circle
/// equation from the a1 and a2 equations.
double linearized_determinant(Point2D a0, Point2D a1, Point2D a2) noexcept;

/// Closed-form least-squares trilateration. Estimates are not clamped to any
/// zone. Throws DegenerateGeometry on a singular system and InvalidArgument on
/// negative or non-finite distances.
Point2D trilaterate(const AnchorSet& anchors, const DistanceTriple& distances);

}  // namespace uwbpos
