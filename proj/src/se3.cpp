#include "catmppi/se3.hpp"

#include <cmath>

namespace catmppi {

namespace {

// Below kSmallAngle the quaternion log switches to its expansion. The V and
// V^-1 coefficients cancel badly well above that, so they switch to series
// below kSeriesAngle.
constexpr double kSmallAngle = 1e-6;
constexpr double kSeriesAngle = 1e-2;

// (1 - cos t) / t^2 without cancellation.
double one_minus_cos_over_t2(double theta, double theta2) {
  if (theta < kSmallAngle) return 0.5 - theta2 / 24.0;
  const double h = std::sin(0.5 * theta);
  return 2.0 * h * h / theta2;
}

}  // namespace

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d S;
  S << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return S;
}

Eigen::Matrix3d rpy_to_matrix(const Eigen::Vector3d& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Pose make_pose(const Eigen::Vector3d& xyz, const Eigen::Vector3d& rpy) {
  Pose T = Pose::Identity();
  T.linear() = rpy_to_matrix(rpy);
  T.translation() = xyz;
  return T;
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& w) {
  const double theta2 = w.squaredNorm();
  const double theta = std::sqrt(theta2);
  const double a = theta < kSmallAngle ? 1.0 - theta2 / 6.0 : std::sin(theta) / theta;
  const double b = one_minus_cos_over_t2(theta, theta2);
  const Eigen::Matrix3d W = skew(w);
  return Eigen::Matrix3d::Identity() + a * W + b * W * W;
}

Eigen::Vector3d so3_log(const Eigen::Matrix3d& R) {
  Eigen::Quaterniond q(R);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Eigen::Vector3d v = q.vec();
  const double n = v.norm();
  const double w = q.w();
  double scale;
  if (n < kSmallAngle) {
    // theta / n with theta = 2 atan2(n, w), expanded around n = 0.
    scale = 2.0 / w * (1.0 - n * n / (3.0 * w * w));
  } else {
    scale = 2.0 * std::atan2(n, w) / n;
  }
  return scale * v;
}

Pose se3_exp(const Vector6d& xi) {
  const Eigen::Vector3d rho = xi.head<3>();
  const Eigen::Vector3d w = xi.tail<3>();
  const double theta2 = w.squaredNorm();
  const double theta = std::sqrt(theta2);
  const double b = one_minus_cos_over_t2(theta, theta2);
  double c;
  if (theta < kSeriesAngle) {
    c = 1.0 / 6.0 - theta2 / 120.0 + theta2 * theta2 / 5040.0;
  } else {
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }
  const Eigen::Matrix3d W = skew(w);
  const Eigen::Matrix3d V = Eigen::Matrix3d::Identity() + b * W + c * W * W;
  Pose T = Pose::Identity();
  T.linear() = so3_exp(w);
  T.translation() = V * rho;
  return T;
}

Vector6d se3_log(const Pose& T) {
  const Eigen::Vector3d w = so3_log(T.linear());
  const double theta2 = w.squaredNorm();
  const double theta = std::sqrt(theta2);
  double d;
  if (theta < kSeriesAngle) {
    d = 1.0 / 12.0 + theta2 / 720.0 + theta2 * theta2 / 30240.0;
  } else {
    const double half = 0.5 * theta;
    d = (1.0 - half * std::cos(half) / std::sin(half)) / theta2;
  }
  const Eigen::Matrix3d W = skew(w);
  const Eigen::Matrix3d V_inv = Eigen::Matrix3d::Identity() - 0.5 * W + d * W * W;
  Vector6d xi;
  xi.head<3>() = V_inv * T.translation();
  xi.tail<3>() = w;
  return xi;
}

Pose interpolate(const Pose& a, const Pose& b, double s) {
  const Eigen::Quaterniond qa(a.linear());
  const Eigen::Quaterniond qb(b.linear());
  Pose out = Pose::Identity();
  out.linear() = qa.slerp(s, qb).toRotationMatrix();
  out.translation() = (1.0 - s) * a.translation() + s * b.translation();
  return out;
}

}  // namespace catmppi
