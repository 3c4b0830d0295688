#pragma once

#include <Eigen/Core>

#include "catmppi/robot_model.hpp"
#include "catmppi/scene.hpp"
#include "catmppi/se3.hpp"

namespace catmppi {

/// Reference of the control regularization term. Rollout controls are joint
/// accelerations, so the sampling controllers regularize towards zero; the
/// gravity-torque reference is kept for torque-valued controls.
enum class ControlReference { kZero, kGravity };

/// Reference state of the state regularization term: the measured state of the
/// current cycle, or the measured configuration at rest (zero velocity).
enum class StateReference { kInitial, kInitialAtRest };

struct CostWeights {
  Matrix6d q_ee = Matrix6d::Identity();  // (translation, rotation) blocks
  Eigen::VectorXd q_x;                    // diagonal, size 2n (q then v)
  Eigen::VectorXd q_u;                    // diagonal, size n
  double d_th = 0.02;
  double collision_weight = 1.0;
  double discount = 0.99;
  ControlReference control_reference = ControlReference::kZero;
  StateReference state_reference = StateReference::kInitialAtRest;

  /// Diagonal defaults: translation 10, rotation 1, zero regularization.
  static CostWeights defaults(std::size_t dof);
  void validate(std::size_t dof) const;
};

/// Stage cost terms. `coll` already carries the collision weight;
/// `violation` is the raw margin violation sum_r max(d_r + d_th, 0).
struct StageCostBreakdown {
  double ee = 0.0;
  double x = 0.0;
  double u = 0.0;
  double coll = 0.0;
  double violation = 0.0;

  double task() const { return ee + x + u; }
  double total() const { return ee + x + u + coll; }
};

double goal_cost(const Pose& ee, const Pose& goal, const CostWeights& w);
double goal_cost(const RobotModel& model, const Eigen::VectorXd& q, const Pose& goal, const CostWeights& w);

double state_reg_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& x_ref, const CostWeights& w);

double control_reg_cost(const RobotModel& model, const Eigen::VectorXd& q, const Eigen::VectorXd& u,
                        const CostWeights& w);

/// sum_r max(d_r + d_th, 0) over clearances in the overlap-positive convention.
double collision_cost(const Eigen::Ref<const Eigen::VectorXd>& clearances, double d_th);

/// Everything a stage evaluation needs besides the state and control.
struct CostContext {
  const RobotModel* model = nullptr;
  const SceneSnapshot* snapshot = nullptr;
  /// Optional per-stage snapshots (T + 1 entries) used instead of `snapshot`
  /// when obstacle motion is predicted along the horizon.
  std::vector<const SceneSnapshot*> stage_snapshots;
  const CollisionPairSet* pairs = nullptr;
  Pose goal = Pose::Identity();
  Eigen::VectorXd x_ref;  // stacked (q, v)
  CostWeights weights;
};

StageCostBreakdown stage_cost(const State& x, const Eigen::VectorXd& u, const CostContext& ctx);

/// Stage cost without the control term.
StageCostBreakdown terminal_cost(const State& x, const CostContext& ctx);

/// Hot-path evaluator used inside rollouts. Keeps FK and capsule buffers and
/// skips pairs whose bounding spheres are farther apart than d_th, which
/// contribute exactly zero to the collision term.
class StageEvaluator {
 public:
  explicit StageEvaluator(const CostContext& ctx);

  /// `u` is null for the terminal stage. `stage` selects the snapshot when
  /// per-stage snapshots are present.
  StageCostBreakdown evaluate(const Eigen::VectorXd& q, const Eigen::VectorXd& v, const Eigen::VectorXd* u,
                              std::size_t stage = 0);

  /// Largest pair clearance (overlap-positive) at q over all pairs.
  double max_clearance(const Eigen::VectorXd& q, std::size_t stage = 0);

 private:
  const SceneSnapshot& snapshot_for(std::size_t stage) const;

  const CostContext& ctx_;
  Kinematics kin_;
  std::vector<Capsule> robot_world_;
  std::vector<bool> capsule_used_;
  Eigen::VectorXd xbuf_;
};

}  // namespace catmppi
