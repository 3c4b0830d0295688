#pragma once

#include <Eigen/Core>

#include "catmppi/se3.hpp"

namespace catmppi {

struct Segment {
  Eigen::Vector3d a;
  Eigen::Vector3d b;

  Eigen::Vector3d at(double s) const { return a + s * (b - a); }
};

/// Swept sphere around the segment p0-p1. p0 == p1 gives a sphere.
struct Capsule {
  Eigen::Vector3d p0 = Eigen::Vector3d::Zero();
  Eigen::Vector3d p1 = Eigen::Vector3d::Zero();
  double radius = 0.0;

  Segment axis() const { return {p0, p1}; }
  Capsule transformed(const Pose& T) const { return {T * p0, T * p1, radius}; }
  void validate() const;
};

/// Oriented box centred at pose.translation().
struct Box {
  Eigen::Vector3d half_extents = Eigen::Vector3d::Ones();
  Pose pose = Pose::Identity();

  Box transformed(const Pose& T) const { return {half_extents, T * pose}; }
  void validate() const;
};

/// Signed clearance with positive = overlap (penetration depth) and
/// negative = free space (minus the separation distance). Witness points lie
/// on the surface of the first and second primitive respectively.
struct SignedClearance {
  double value = 0.0;
  Eigen::Vector3d witness_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d witness_b = Eigen::Vector3d::Zero();
};

struct SegmentDistance {
  double distance = 0.0;
  double u = 0.0;  // parameter on the first segment
  double v = 0.0;  // parameter on the second segment
  Eigen::Vector3d point_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d point_b = Eigen::Vector3d::Zero();
};

/// Closest points between two segments with clamped parameters.
///
/// When the segments are parallel the first parameter is fixed at 0 and the
/// second one is obtained by projection and clamping, after which the first
/// is recomputed. Degenerate (zero-length) segments are treated as points.
SegmentDistance segment_segment_distance(const Segment& s1, const Segment& s2);

/// Closest point of a segment to the origin-centred box [-h, h]. Exact; the
/// squared distance is piecewise quadratic in the segment parameter.
struct SegmentBoxDistance {
  double distance = 0.0;
  double u = 0.0;
  Eigen::Vector3d segment_point = Eigen::Vector3d::Zero();
  Eigen::Vector3d box_point = Eigen::Vector3d::Zero();
};
SegmentBoxDistance segment_aligned_box_distance(const Segment& s, const Eigen::Vector3d& half_extents);

/// Both capsules given in a common (world) frame.
SignedClearance capsule_capsule_clearance(const Capsule& a, const Capsule& b);
SignedClearance capsule_capsule_clearance(const Capsule& a, const Pose& pose_a, const Capsule& b,
                                          const Pose& pose_b);

/// Exact when disjoint. When the axis enters the box the penetration depth is
/// the radius plus the deepest face depth among a few candidate axis points
/// (endpoints, projection of the box centre, slab crossings).
SignedClearance capsule_box_clearance(const Capsule& a, const Box& b);
SignedClearance capsule_box_clearance(const Capsule& a, const Pose& pose_a, const Box& b);

/// Lower bound on the separation of two primitives from bounding spheres.
/// Cheap rejection test used before the exact kernels.
double bounding_sphere_gap(const Capsule& a, const Capsule& b);
double bounding_sphere_gap(const Capsule& a, const Box& b);

}  // namespace catmppi
