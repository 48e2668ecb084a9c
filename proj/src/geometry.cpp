#include "uwbpos/geometry.hpp"

#include <cmath>
#include <string>

#include "uwbpos/error.hpp"

namespace uwbpos {

bool is_finite(Point2D p) noexcept { return std::isfinite(p.x) && std::isfinite(p.y); }

namespace {

std::string describe(Point2D p) {
  return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

}  // namespace

AnchorSet::AnchorSet(Point2D a0, Point2D a1, Point2D a2) : points_{a0, a1, a2} {
  for (const auto& p : points_) {
    if (!is_finite(p)) throw Error(ErrorCode::InvalidArgument, "anchor coordinates must be finite");
  }
  if (a0 == a1 || a0 == a2 || a1 == a2) {
    throw Error(ErrorCode::DegenerateGeometry, "anchors must be pairwise distinct");
  }
  if (std::abs(linearized_determinant(a0, a1, a2)) < kSingularDeterminant) {
    throw Error(ErrorCode::DegenerateGeometry,
                "anchors " + describe(a0) + ", " + describe(a1) + ", " + describe(a2) + " are collinear");
  }
}

AnchorSet AnchorSet::standard() { return AnchorSet({0.0, 0.0}, {0.0, 2000.0}, {1000.0, 2000.0}); }

void Zone::validate() const {
  if (!is_finite(origin) || !std::isfinite(width) || !std::isfinite(height) || width <= 0.0 ||
      height <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "zone width and height must be positive and finite");
  }
}

bool Zone::contains(Point2D p) const noexcept {
  return p.x >= origin.x && p.x <= origin.x + width && p.y >= origin.y && p.y <= origin.y + height;
}

double euclidean_distance(Point2D p, Point2D q) noexcept { return std::hypot(p.x - q.x, p.y - q.y); }

DistanceTriple anchor_distances(const AnchorSet& anchors, Point2D p) noexcept {
  return {euclidean_distance(p, anchors[0]), euclidean_distance(p, anchors[1]),
          euclidean_distance(p, anchors[2])};
}

double linearized_determinant(Point2D a0, Point2D a1, Point2D a2) noexcept {
  const double e1x = a1.x - a0.x, e1y = a1.y - a0.y;
  const double e2x = a2.x - a0.x, e2y = a2.y - a0.y;
  return 4.0 * (e1x * e2y - e1y * e2x);
}

Point2D trilaterate(const AnchorSet& anchors, const DistanceTriple& distances) {
  for (double d : distances) {
    if (!std::isfinite(d) || d < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "distances must be finite and non-negative");
    }
  }
  const Point2D a0 = anchors[0];
  const double det = linearized_determinant(a0, anchors[1], anchors[2]);
  if (std::abs(det) < kSingularDeterminant) {
    throw Error(ErrorCode::DegenerateGeometry, "trilateration system is singular");
  }

  // Work relative to a0: 2 e_i . u = d0^2 - di^2 + |e_i|^2 for i = 1, 2.
  const double e1x = anchors[1].x - a0.x, e1y = anchors[1].y - a0.y;
  const double e2x = anchors[2].x - a0.x, e2y = anchors[2].y - a0.y;
  const double d0sq = distances[0] * distances[0];
  const double r1 = d0sq - distances[1] * distances[1] + e1x * e1x + e1y * e1y;
  const double r2 = d0sq - distances[2] * distances[2] + e2x * e2x + e2y * e2y;

  // Cramer's rule on [2e1; 2e2] u = [r1; r2].
  const double ux = (r1 * 2.0 * e2y - r2 * 2.0 * e1y) / det;
  const double uy = (2.0 * e1x * r2 - 2.0 * e2x * r1) / det;
  return {a0.x + ux, a0.y + uy};
}

}  // namespace uwbpos
