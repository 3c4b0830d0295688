#include "catmppi/costs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "catmppi/error.hpp"

namespace catmppi {

CostWeights CostWeights::defaults(std::size_t dof) {
  CostWeights w;
  const auto n = static_cast<Eigen::Index>(dof);
  w.q_ee.setZero();
  w.q_ee.diagonal() << 10.0, 10.0, 10.0, 1.0, 1.0, 1.0;
  w.q_x = Eigen::VectorXd::Zero(2 * n);
  w.q_u = Eigen::VectorXd::Zero(n);
  return w;
}

void CostWeights::validate(std::size_t dof) const {
  const auto n = static_cast<Eigen::Index>(dof);
  if (q_x.size() != 2 * n) throw DimensionError("weights.q_x: expected size 2n = " + std::to_string(2 * n));
  if (q_u.size() != n) throw DimensionError("weights.q_u: expected size n = " + std::to_string(n));
  if ((q_x.array() < 0.0).any()) throw ValidationError("weights.q_x: entries must be >= 0");
  if ((q_u.array() < 0.0).any()) throw ValidationError("weights.q_u: entries must be >= 0");
  if ((q_ee - q_ee.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw ValidationError("weights.q_ee: not symmetric");
  if (Eigen::SelfAdjointEigenSolver<Matrix6d>(q_ee).eigenvalues().minCoeff() < -1e-12) {
    throw ValidationError("weights.q_ee: not positive semidefinite");
  }
  if (!(d_th > 0.0)) throw ValidationError("weights.d_th: must be > 0");
  if (!(collision_weight >= 0.0)) throw ValidationError("weights.collision_weight: must be >= 0");
  if (!(discount >= 0.0 && discount <= 1.0)) throw ValidationError("weights.discount: must lie in [0, 1]");
}

double goal_cost(const Pose& ee, const Pose& goal, const CostWeights& w) {
  const Vector6d e = se3_log(goal.inverse() * ee);
  return e.dot(w.q_ee * e);
}

double goal_cost(const RobotModel& model, const Eigen::VectorXd& q, const Pose& goal, const CostWeights& w) {
  return goal_cost(forward_kinematics(model, q).ee, goal, w);
}

double state_reg_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& x_ref, const CostWeights& w) {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(w.q_x.size()), "state_reg_cost: x");
  require_dim(static_cast<std::size_t>(x_ref.size()), static_cast<std::size_t>(w.q_x.size()), "state_reg_cost: x_ref");
  return (w.q_x.array() * (x - x_ref).array().square()).sum();
}

double control_reg_cost(const RobotModel& model, const Eigen::VectorXd& q, const Eigen::VectorXd& u,
                        const CostWeights& w) {
  require_dim(static_cast<std::size_t>(u.size()), static_cast<std::size_t>(w.q_u.size()), "control_reg_cost: u");
  if (w.control_reference == ControlReference::kGravity) {
    const Eigen::VectorXd e = u - gravity_torque(model, q);
    return (w.q_u.array() * e.array().square()).sum();
  }
  return (w.q_u.array() * u.array().square()).sum();
}

double collision_cost(const Eigen::Ref<const Eigen::VectorXd>& clearances, double d_th) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < clearances.size(); ++i) sum += std::max(clearances[i] + d_th, 0.0);
  return sum;
}

namespace {

Eigen::VectorXd stack(const State& x) {
  Eigen::VectorXd s(x.q.size() + x.v.size());
  s << x.q, x.v;
  return s;
}

}  // namespace

StageCostBreakdown stage_cost(const State& x, const Eigen::VectorXd& u, const CostContext& ctx) {
  StageCostBreakdown out = terminal_cost(x, ctx);
  out.u = control_reg_cost(*ctx.model, x.q, u, ctx.weights);
  return out;
}

StageCostBreakdown terminal_cost(const State& x, const CostContext& ctx) {
  StageCostBreakdown out;
  const Kinematics kin = forward_kinematics(*ctx.model, x.q);
  out.ee = goal_cost(kin.ee, ctx.goal, ctx.weights);
  out.x = state_reg_cost(stack(x), ctx.x_ref, ctx.weights);
  std::vector<Capsule> world;
  world_capsules(*ctx.model, kin, world);
  Eigen::VectorXd d;
  min_clearances(world, *ctx.snapshot, *ctx.pairs, d);
  out.violation = collision_cost(d, ctx.weights.d_th);
  out.coll = ctx.weights.collision_weight * out.violation;
  return out;
}

StageEvaluator::StageEvaluator(const CostContext& ctx) : ctx_(ctx) {
  capsule_used_.assign(ctx.model->capsules().size(), false);
  for (const auto& p : ctx.pairs->pairs) capsule_used_[p.robot_capsule] = true;
  robot_world_.resize(ctx.model->capsules().size());
}

namespace {

double gap(const Capsule& c, const Shape& s) {
  if (const auto* cap = std::get_if<Capsule>(&s)) return bounding_sphere_gap(c, *cap);
  return bounding_sphere_gap(c, std::get<Box>(s));
}

}  // namespace

const SceneSnapshot& StageEvaluator::snapshot_for(std::size_t stage) const {
  if (ctx_.stage_snapshots.empty()) return *ctx_.snapshot;
  return *ctx_.stage_snapshots[std::min(stage, ctx_.stage_snapshots.size() - 1)];
}

StageCostBreakdown StageEvaluator::evaluate(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                                            const Eigen::VectorXd* u, std::size_t stage) {
  const RobotModel& model = *ctx_.model;
  const CostWeights& w = ctx_.weights;
  forward_kinematics(model, q, kin_);

  StageCostBreakdown out;
  out.ee = goal_cost(kin_.ee, ctx_.goal, w);
  const auto n = q.size();
  xbuf_.resize(2 * n);
  xbuf_ << q, v;
  out.x = (w.q_x.array() * (xbuf_ - ctx_.x_ref).array().square()).sum();
  if (u != nullptr) out.u = control_reg_cost(model, q, *u, w);

  const auto& caps = model.capsules();
  for (std::size_t c = 0; c < caps.size(); ++c) {
    if (capsule_used_[c]) robot_world_[c] = caps[c].capsule.transformed(kin_.frames[caps[c].frame]);
  }
  const SceneSnapshot& snap = snapshot_for(stage);
  double violation = 0.0;
  for (const auto& p : ctx_.pairs->pairs) {
    const Capsule& rc = robot_world_[p.robot_capsule];
    const Shape& shape = snap.shapes[p.environment];
    if (gap(rc, shape) > w.d_th) continue;
    violation += std::max(pair_clearance(rc, shape) + w.d_th, 0.0);
  }
  out.violation = violation;
  out.coll = w.collision_weight * violation;
  return out;
}

double StageEvaluator::max_clearance(const Eigen::VectorXd& q, std::size_t stage) {
  forward_kinematics(*ctx_.model, q, kin_);
  world_capsules(*ctx_.model, kin_, robot_world_);
  const SceneSnapshot& snap = snapshot_for(stage);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : ctx_.pairs->pairs) {
    worst = std::max(worst, pair_clearance(robot_world_[p.robot_capsule], snap.shapes[p.environment]));
  }
  return worst;
}

}  // namespace catmppi
