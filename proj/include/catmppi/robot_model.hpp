#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "catmppi/geometry.hpp"
#include "catmppi/se3.hpp"

namespace catmppi {

struct JointLimits {
  double lower = -3.14159;
  double upper = 3.14159;
  double velocity = 2.0;      // rad/s
  double acceleration = 10.0; // rad/s^2
  double torque = 100.0;      // N m
};

/// Mass properties of the link driven by a joint, in that link's frame.
/// `inertia` is taken about the centre of mass.
struct Inertial {
  double mass = 0.0;
  Eigen::Vector3d com = Eigen::Vector3d::Zero();
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();
};

/// Revolute joint. The child frame is origin * Rot(axis, q) in the parent frame.
struct JointSpec {
  std::string name;
  Pose origin = Pose::Identity();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  JointLimits limits;
  Inertial inertial;
};

/// Collision capsule rigidly attached to a frame. Frame 0 is the base, frame
/// i >= 1 is the link moved by joint i.
struct LinkCapsule {
  std::string name;
  std::size_t frame = 0;
  Capsule capsule;
};

struct State {
  Eigen::VectorXd q;
  Eigen::VectorXd v;

  static State zero(std::size_t n) { return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))}; }
  Eigen::VectorXd stacked() const;
};

/// Immutable serial chain. The constructor checks every invariant and throws
/// ValidationError naming the offending field.
class RobotModel {
 public:
  RobotModel(std::string name, std::vector<JointSpec> joints, std::vector<LinkCapsule> capsules,
             Pose ee_offset, Eigen::Vector3d gravity = Eigen::Vector3d(0.0, 0.0, -9.81));

  const std::string& name() const { return name_; }
  std::size_t dof() const { return joints_.size(); }
  const std::vector<JointSpec>& joints() const { return joints_; }
  const std::vector<LinkCapsule>& capsules() const { return capsules_; }
  const Pose& ee_offset() const { return ee_offset_; }
  const Eigen::Vector3d& gravity() const { return gravity_; }

  /// Index of the capsule with the given name; throws ValidationError if absent.
  std::size_t capsule_index(std::string_view name) const;

  Eigen::VectorXd lower_limits() const;
  Eigen::VectorXd upper_limits() const;
  Eigen::VectorXd velocity_limits() const;
  Eigen::VectorXd acceleration_limits() const;

  /// Same kinematics with a different gravity vector.
  RobotModel with_gravity(const Eigen::Vector3d& g) const;

 private:
  std::string name_;
  std::vector<JointSpec> joints_;
  std::vector<LinkCapsule> capsules_;
  Pose ee_offset_;
  Eigen::Vector3d gravity_;
};

struct Kinematics {
  std::vector<Pose> frames;  // dof() + 1 entries, frames[0] is the base
  Pose ee = Pose::Identity();
};

Kinematics forward_kinematics(const RobotModel& model, const Eigen::VectorXd& q);

/// Allocation-free variant for hot loops; `out` is resized on first use.
void forward_kinematics(const RobotModel& model, const Eigen::VectorXd& q, Kinematics& out);

/// World-frame capsules for every entry of model.capsules().
void world_capsules(const RobotModel& model, const Kinematics& kin, std::vector<Capsule>& out);

/// Recursive Newton-Euler inverse dynamics including gravity.
Eigen::VectorXd rnea(const RobotModel& model, const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                     const Eigen::VectorXd& a);

Eigen::VectorXd gravity_torque(const RobotModel& model, const Eigen::VectorXd& q);

/// Robot description file (JSON, see docs/robot_format.md).
RobotModel parse_robot_description(std::string_view text, std::string_view source = "<string>");
RobotModel load_robot_description(const std::string& path);

}  // namespace catmppi
