#include "catmppi/robot_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include <Eigen/Eigenvalues>

#include "catmppi/error.hpp"
#include "json_util.hpp"

namespace catmppi {

namespace detail {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

Eigen::VectorXd State::stacked() const {
  Eigen::VectorXd x(q.size() + v.size());
  x << q, v;
  return x;
}

RobotModel::RobotModel(std::string name, std::vector<JointSpec> joints,
                       std::vector<LinkCapsule> capsules, Pose ee_offset, Eigen::Vector3d gravity)
    : name_(std::move(name)),
      joints_(std::move(joints)),
      capsules_(std::move(capsules)),
      ee_offset_(ee_offset),
      gravity_(gravity) {
  if (joints_.empty()) throw ValidationError("joints: at least one joint required");
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const JointSpec& j = joints_[i];
    const std::string where = "joints[" + std::to_string(i) + "]";
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) {
      throw ValidationError(where + ".axis: must have unit norm (got " + std::to_string(j.axis.norm()) + ")");
    }
    const Eigen::Matrix3d Rerr = j.origin.linear() * j.origin.linear().transpose() - Eigen::Matrix3d::Identity();
    if (Rerr.cwiseAbs().maxCoeff() > 1e-9) throw ValidationError(where + ".origin: rotation not orthonormal");
    if (!(j.limits.lower < j.limits.upper)) throw ValidationError(where + ".limits.position: lower must be < upper");
    if (!(j.limits.velocity > 0.0)) throw ValidationError(where + ".limits.velocity: must be > 0");
    if (!(j.limits.acceleration > 0.0)) throw ValidationError(where + ".limits.acceleration: must be > 0");
    if (!(j.limits.torque > 0.0)) throw ValidationError(where + ".limits.torque: must be > 0");
    if (!(j.inertial.mass >= 0.0)) throw ValidationError(where + ".inertial.mass: must be >= 0");
    const Eigen::Matrix3d& I = j.inertial.inertia;
    if ((I - I.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw ValidationError(where + ".inertial.inertia: not symmetric");
    }
    const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(I).eigenvalues().minCoeff();
    if (min_eig < -1e-12) throw ValidationError(where + ".inertial.inertia: not positive semidefinite");
  }
  for (std::size_t c = 0; c < capsules_.size(); ++c) {
    const std::string where = "capsules[" + std::to_string(c) + "]";
    if (capsules_[c].frame > joints_.size()) throw ValidationError(where + ".frame: index out of range");
    try {
      capsules_[c].capsule.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
}

std::size_t RobotModel::capsule_index(std::string_view name) const {
  for (std::size_t i = 0; i < capsules_.size(); ++i) {
    if (capsules_[i].name == name) return i;
  }
  throw ValidationError("unknown robot capsule '" + std::string(name) + "'");
}

namespace {

template <typename F>
Eigen::VectorXd collect(const std::vector<JointSpec>& joints, F f) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(joints.size()));
  for (std::size_t i = 0; i < joints.size(); ++i) out[static_cast<Eigen::Index>(i)] = f(joints[i].limits);
  return out;
}

}  // namespace

Eigen::VectorXd RobotModel::lower_limits() const { return collect(joints_, [](const JointLimits& l) { return l.lower; }); }
Eigen::VectorXd RobotModel::upper_limits() const { return collect(joints_, [](const JointLimits& l) { return l.upper; }); }
Eigen::VectorXd RobotModel::velocity_limits() const { return collect(joints_, [](const JointLimits& l) { return l.velocity; }); }
Eigen::VectorXd RobotModel::acceleration_limits() const {
  return collect(joints_, [](const JointLimits& l) { return l.acceleration; });
}

RobotModel RobotModel::with_gravity(const Eigen::Vector3d& g) const {
  RobotModel copy = *this;
  copy.gravity_ = g;
  return copy;
}

void forward_kinematics(const RobotModel& model, const Eigen::VectorXd& q, Kinematics& out) {
  const std::size_t n = model.dof();
  require_dim(static_cast<std::size_t>(q.size()), n, "forward_kinematics: q");
  out.frames.resize(n + 1);
  out.frames[0] = Pose::Identity();
  const auto& joints = model.joints();
  for (std::size_t i = 0; i < n; ++i) {
    const JointSpec& j = joints[i];
    Pose local = j.origin;
    local.linear() = j.origin.linear() * Eigen::AngleAxisd(q[static_cast<Eigen::Index>(i)], j.axis).toRotationMatrix();
    out.frames[i + 1] = out.frames[i] * local;
  }
  out.ee = out.frames[n] * model.ee_offset();
}

Kinematics forward_kinematics(const RobotModel& model, const Eigen::VectorXd& q) {
  Kinematics kin;
  forward_kinematics(model, q, kin);
  return kin;
}

void world_capsules(const RobotModel& model, const Kinematics& kin, std::vector<Capsule>& out) {
  const auto& caps = model.capsules();
  out.resize(caps.size());
  for (std::size_t c = 0; c < caps.size(); ++c) {
    out[c] = caps[c].capsule.transformed(kin.frames[caps[c].frame]);
  }
}

Eigen::VectorXd rnea(const RobotModel& model, const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                     const Eigen::VectorXd& a) {
  const std::size_t n = model.dof();
  require_dim(static_cast<std::size_t>(q.size()), n, "rnea: q");
  require_dim(static_cast<std::size_t>(v.size()), n, "rnea: v");
  require_dim(static_cast<std::size_t>(a.size()), n, "rnea: a");
  const auto& joints = model.joints();

  // Quantities of link i expressed in frame i. Gravity enters as a fictitious
  // upward acceleration of the base.
  std::vector<Eigen::Matrix3d> R(n);  // rotation child -> parent
  std::vector<Eigen::Vector3d> force(n), moment(n);
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
  Eigen::Vector3d omega_dot = Eigen::Vector3d::Zero();
  Eigen::Vector3d lin_acc = -model.gravity();

  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const JointSpec& j = joints[i];
    R[i] = j.origin.linear() * Eigen::AngleAxisd(q[ii], j.axis).toRotationMatrix();
    const Eigen::Matrix3d Rt = R[i].transpose();
    const Eigen::Vector3d& p = j.origin.translation();

    const Eigen::Vector3d lin_acc_i = Rt * (lin_acc + omega_dot.cross(p) + omega.cross(omega.cross(p)));
    const Eigen::Vector3d omega_parent = Rt * omega;
    const Eigen::Vector3d omega_i = omega_parent + j.axis * v[ii];
    const Eigen::Vector3d omega_dot_i =
        Rt * omega_dot + j.axis * a[ii] + omega_parent.cross(j.axis * v[ii]);

    const Inertial& in = j.inertial;
    const Eigen::Vector3d com_acc =
        lin_acc_i + omega_dot_i.cross(in.com) + omega_i.cross(omega_i.cross(in.com));
    force[i] = in.mass * com_acc;
    moment[i] = in.inertia * omega_dot_i + omega_i.cross(in.inertia * omega_i);

    omega = omega_i;
    omega_dot = omega_dot_i;
    lin_acc = lin_acc_i;
  }

  Eigen::VectorXd tau(static_cast<Eigen::Index>(n));
  Eigen::Vector3d f_child = Eigen::Vector3d::Zero();
  Eigen::Vector3d n_child = Eigen::Vector3d::Zero();
  for (std::size_t k = n; k-- > 0;) {
    const JointSpec& j = joints[k];
    Eigen::Vector3d f = force[k];
    Eigen::Vector3d m = moment[k] + j.inertial.com.cross(force[k]);
    if (k + 1 < n) {
      const Eigen::Matrix3d& Rc = R[k + 1];
      const Eigen::Vector3d& pc = joints[k + 1].origin.translation();
      const Eigen::Vector3d f_c = Rc * f_child;
      f += f_c;
      m += Rc * n_child + pc.cross(f_c);
    }
    tau[static_cast<Eigen::Index>(k)] = m.dot(j.axis);
    f_child = f;
    n_child = m;
  }
  return tau;
}

Eigen::VectorXd gravity_torque(const RobotModel& model, const Eigen::VectorXd& q) {
  const auto n = static_cast<Eigen::Index>(model.dof());
  return rnea(model, q, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n));
}

RobotModel parse_robot_description(std::string_view text, std::string_view source) {
  using detail::json;
  const json doc = detail::parse_text(text, source);
  const std::string root = std::string(source);
  try {
    const json& jj = detail::field(doc, "joints", root);
    if (!jj.is_array()) throw ValidationError(root + ".joints: expected an array");
    std::vector<JointSpec> joints;
    for (std::size_t i = 0; i < jj.size(); ++i) {
      const json& e = jj[i];
      const std::string p = root + ".joints[" + std::to_string(i) + "]";
      JointSpec js;
      js.name = detail::string_or(e, "name", "joint" + std::to_string(i + 1), p);
      js.origin = e.contains("origin") ? detail::pose(e.at("origin"), p + ".origin") : Pose::Identity();
      js.axis = detail::vec3(e, "axis", p);
      if (e.contains("limits")) {
        const json& l = e.at("limits");
        const std::string lp = p + ".limits";
        if (l.contains("position")) {
          const Eigen::VectorXd pos = detail::vector(l.at("position"), lp + ".position", 2);
          js.limits.lower = pos[0];
          js.limits.upper = pos[1];
        }
        js.limits.velocity = detail::number_or(l, "velocity", js.limits.velocity, lp);
        js.limits.acceleration = detail::number_or(l, "acceleration", js.limits.acceleration, lp);
        js.limits.torque = detail::number_or(l, "torque", js.limits.torque, lp);
      }
      if (e.contains("inertial")) {
        const json& in = e.at("inertial");
        const std::string ip = p + ".inertial";
        js.inertial.mass = detail::number_or(in, "mass", 0.0, ip);
        js.inertial.com = detail::vec3_or(in, "com", Eigen::Vector3d::Zero(), ip);
        if (in.contains("inertia")) {
          // ixx, ixy, ixz, iyy, iyz, izz
          const Eigen::VectorXd c = detail::vector(in.at("inertia"), ip + ".inertia", 6);
          js.inertial.inertia << c[0], c[1], c[2], c[1], c[3], c[4], c[2], c[4], c[5];
        }
      }
      joints.push_back(std::move(js));
    }

    std::vector<LinkCapsule> capsules;
    if (doc.contains("capsules")) {
      const json& cj = doc.at("capsules");
      if (!cj.is_array()) throw ValidationError(root + ".capsules: expected an array");
      for (std::size_t i = 0; i < cj.size(); ++i) {
        const json& e = cj[i];
        const std::string p = root + ".capsules[" + std::to_string(i) + "]";
        LinkCapsule lc;
        lc.name = detail::string_or(e, "name", "capsule" + std::to_string(i), p);
        const double frame = detail::number(e, "frame", p);
        if (frame < 0 || frame != std::floor(frame)) throw ValidationError(p + ".frame: expected a non-negative integer");
        lc.frame = static_cast<std::size_t>(frame);
        lc.capsule.p0 = detail::vec3(e, "p0", p);
        lc.capsule.p1 = detail::vec3(e, "p1", p);
        lc.capsule.radius = detail::number(e, "radius", p);
        capsules.push_back(std::move(lc));
      }
    }

    const Pose ee = doc.contains("end_effector") ? detail::pose(doc.at("end_effector"), root + ".end_effector")
                                                 : Pose::Identity();
    const Eigen::Vector3d g = detail::vec3_or(doc, "gravity", Eigen::Vector3d(0.0, 0.0, -9.81), root);
    return RobotModel(detail::string_or(doc, "name", "robot", root), std::move(joints), std::move(capsules), ee, g);
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind(root, 0) == 0) throw;
    throw ValidationError(root + ": " + msg);
  }
}

RobotModel load_robot_description(const std::string& path) {
  return parse_robot_description(detail::read_file(path), path);
}

}  // namespace catmppi
