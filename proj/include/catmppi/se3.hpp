#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace catmppi {

/// Rigid transform. The linear part is always a proper rotation.
using Pose = Eigen::Isometry3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

Eigen::Matrix3d skew(const Eigen::Vector3d& w);

/// Rotation from roll-pitch-yaw (fixed-axis X, then Y, then Z).
Eigen::Matrix3d rpy_to_matrix(const Eigen::Vector3d& rpy);

Pose make_pose(const Eigen::Vector3d& xyz, const Eigen::Vector3d& rpy);

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& w);

/// Rotation vector of R. Computed through the unit quaternion, which stays
/// well conditioned for angles close to pi.
Eigen::Vector3d so3_log(const Eigen::Matrix3d& R);

/// Twist layout: (translational part, rotational part).
Pose se3_exp(const Vector6d& xi);
Vector6d se3_log(const Pose& T);

/// Spherical/linear interpolation between two poses, s in [0, 1].
Pose interpolate(const Pose& a, const Pose& b, double s);

}  // namespace catmppi
