#include "catmppi/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "catmppi/error.hpp"

namespace catmppi {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Any unit vector orthogonal to d (or e_x when d vanishes).
Eigen::Vector3d orthogonal_unit(const Eigen::Vector3d& d) {
  if (d.squaredNorm() < 1e-24) return Eigen::Vector3d::UnitX();
  const Eigen::Vector3d n = d.unitOrthogonal();
  return n;
}

}  // namespace

void Capsule::validate() const {
  if (!p0.allFinite() || !p1.allFinite()) throw ValidationError("capsule: non-finite endpoint");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("capsule: radius must be > 0");
}

void Box::validate() const {
  if (!half_extents.allFinite() || (half_extents.array() <= 0.0).any()) {
    throw ValidationError("box: half_extents must all be > 0");
  }
}

SegmentDistance segment_segment_distance(const Segment& s1, const Segment& s2) {
  constexpr double kEps = 1e-24;
  const Eigen::Vector3d d1 = s1.b - s1.a;
  const Eigen::Vector3d d2 = s2.b - s2.a;
  const Eigen::Vector3d r = s1.a - s2.a;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);

  double u = 0.0;
  double v = 0.0;
  if (a <= kEps && e <= kEps) {
    // both points
  } else if (a <= kEps) {
    v = clamp01(f / e);
  } else {
    const double c = d1.dot(r);
    if (e <= kEps) {
      u = clamp01(-c / a);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      // Parallel axes: any u is optimal for some v, fix u = 0.
      if (denom > 1e-14 * a * e) u = clamp01((b * f - c * e) / denom);
      v = (b * u + f) / e;
      if (v < 0.0) {
        v = 0.0;
        u = clamp01(-c / a);
      } else if (v > 1.0) {
        v = 1.0;
        u = clamp01((b - c) / a);
      }
    }
  }

  SegmentDistance out;
  out.u = u;
  out.v = v;
  out.point_a = s1.a + u * d1;
  out.point_b = s2.a + v * d2;
  out.distance = (out.point_a - out.point_b).norm();
  return out;
}

SegmentBoxDistance segment_aligned_box_distance(const Segment& s, const Eigen::Vector3d& h) {
  const Eigen::Vector3d a = s.a;
  const Eigen::Vector3d d = s.b - s.a;

  // Parameters where the segment crosses one of the six slab planes.
  std::array<double, 8> cuts{};
  std::size_t n_cuts = 0;
  cuts[n_cuts++] = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) continue;
    for (double side : {-1.0, 1.0}) {
      const double u = (side * h[i] - a[i]) / d[i];
      if (u > 0.0 && u < 1.0) cuts[n_cuts++] = u;
    }
  }
  cuts[n_cuts++] = 1.0;
  std::sort(cuts.begin(), cuts.begin() + static_cast<std::ptrdiff_t>(n_cuts));

  double best_u = 0.0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < n_cuts; ++k) {
    const double lo = cuts[k];
    const double hi = cuts[k + 1];
    const Eigen::Vector3d mid = a + 0.5 * (lo + hi) * d;
    // Inside an interval each coordinate stays on one side of its slab, so the
    // squared distance is a single quadratic A u^2 + 2 B u + C.
    double A = 0.0, B = 0.0;
    for (int i = 0; i < 3; ++i) {
      double target;
      if (mid[i] > h[i]) {
        target = h[i];
      } else if (mid[i] < -h[i]) {
        target = -h[i];
      } else {
        continue;
      }
      A += d[i] * d[i];
      B += d[i] * (a[i] - target);
    }
    double u = lo;
    if (A > 0.0) u = std::clamp(-B / A, lo, hi);
    const Eigen::Vector3d p = a + u * d;
    const double sq = (p - p.cwiseMax(-h).cwiseMin(h)).squaredNorm();
    if (sq < best_sq) {
      best_sq = sq;
      best_u = u;
    }
  }

  SegmentBoxDistance out;
  out.u = best_u;
  out.segment_point = a + best_u * d;
  out.box_point = out.segment_point.cwiseMax(-h).cwiseMin(h);
  out.distance = std::sqrt(best_sq);
  return out;
}

SignedClearance capsule_capsule_clearance(const Capsule& a, const Capsule& b) {
  const SegmentDistance sd = segment_segment_distance(a.axis(), b.axis());
  Eigen::Vector3d n;
  if (sd.distance > 1e-12) {
    n = (sd.point_b - sd.point_a) / sd.distance;
  } else {
    n = orthogonal_unit(a.p1 - a.p0);
  }
  SignedClearance out;
  out.value = a.radius + b.radius - sd.distance;
  out.witness_a = sd.point_a + a.radius * n;
  out.witness_b = sd.point_b - b.radius * n;
  return out;
}

SignedClearance capsule_capsule_clearance(const Capsule& a, const Pose& pose_a, const Capsule& b,
                                          const Pose& pose_b) {
  return capsule_capsule_clearance(a.transformed(pose_a), b.transformed(pose_b));
}

SignedClearance capsule_box_clearance(const Capsule& a, const Box& b) {
  const Eigen::Matrix3d& R = b.pose.linear();
  const Eigen::Vector3d& c = b.pose.translation();
  const Eigen::Vector3d& h = b.half_extents;
  const Segment local{R.transpose() * (a.p0 - c), R.transpose() * (a.p1 - c)};
  const SegmentBoxDistance sb = segment_aligned_box_distance(local, h);

  SignedClearance out;
  // Rounding leaves a residue of a few ulps when the axis crosses the box.
  if (sb.distance > 1e-12) {
    const Eigen::Vector3d n = (sb.segment_point - sb.box_point) / sb.distance;
    out.value = a.radius - sb.distance;
    out.witness_a = b.pose * (sb.segment_point - a.radius * n);
    out.witness_b = b.pose * sb.box_point;
    return out;
  }

  // Axis meets the box. Face depth of a point p is min_i (h_i - |p_i|).
  const auto depth_of = [&h](const Eigen::Vector3d& p) { return (h - p.cwiseAbs()).minCoeff(); };
  std::array<double, 9> candidates{};
  std::size_t n_cand = 0;
  candidates[n_cand++] = 0.0;
  candidates[n_cand++] = 1.0;
  const Eigen::Vector3d d = local.b - local.a;
  if (d.squaredNorm() > 0.0) candidates[n_cand++] = clamp01(-local.a.dot(d) / d.squaredNorm());
  candidates[n_cand++] = sb.u;
  for (int i = 0; i < 3 && n_cand < candidates.size(); ++i) {
    if (d[i] == 0.0) continue;
    // Parameter where the coordinate crosses the box mid-plane.
    candidates[n_cand++] = clamp01(-local.a[i] / d[i]);
  }
  double best_depth = -std::numeric_limits<double>::infinity();
  Eigen::Vector3d best_p = sb.segment_point;
  for (std::size_t k = 0; k < n_cand; ++k) {
    const Eigen::Vector3d p = local.at(candidates[k]);
    const double dep = depth_of(p);
    if (dep > best_depth) {
      best_depth = dep;
      best_p = p;
    }
  }
  if (best_depth < 0.0) {
    best_depth = 0.0;
    best_p = sb.segment_point;
  }
  // Outward normal of the face nearest to the deepest point.
  int axis = 0;
  (h - best_p.cwiseAbs()).minCoeff(&axis);
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  n[axis] = best_p[axis] >= 0.0 ? 1.0 : -1.0;
  Eigen::Vector3d face_point = best_p;
  face_point[axis] = n[axis] * h[axis];

  out.value = a.radius + best_depth;
  out.witness_a = b.pose * (best_p - a.radius * n);
  out.witness_b = b.pose * face_point;
  return out;
}

SignedClearance capsule_box_clearance(const Capsule& a, const Pose& pose_a, const Box& b) {
  return capsule_box_clearance(a.transformed(pose_a), b);
}

double bounding_sphere_gap(const Capsule& a, const Capsule& b) {
  const Eigen::Vector3d ca = 0.5 * (a.p0 + a.p1);
  const Eigen::Vector3d cb = 0.5 * (b.p0 + b.p1);
  const double ra = 0.5 * (a.p1 - a.p0).norm() + a.radius;
  const double rb = 0.5 * (b.p1 - b.p0).norm() + b.radius;
  return (ca - cb).norm() - ra - rb;
}

double bounding_sphere_gap(const Capsule& a, const Box& b) {
  const Eigen::Vector3d ca = 0.5 * (a.p0 + a.p1);
  const double ra = 0.5 * (a.p1 - a.p0).norm() + a.radius;
  return (ca - b.pose.translation()).norm() - ra - b.half_extents.norm();
}

}  // namespace catmppi
