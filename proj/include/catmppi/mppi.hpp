#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "catmppi/cat.hpp"
#include "catmppi/costs.hpp"
#include "catmppi/robot_model.hpp"
#include "catmppi/scene.hpp"

namespace catmppi {

enum class Mode { kVanilla, kCaT };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& s);

/// What fills the last stage after the horizon shift.
enum class TailPolicy { kHoldLast, kZero };

struct MPPIConfig {
  int rollouts = 1000;
  int horizon = 50;
  double dt = 0.02;           // s
  double temperature = 1.0;   // beta
  double step_size = 1.0;     // alpha_mu
  std::uint64_t seed = 0;
  int threads = 1;
  TailPolicy tail = TailPolicy::kHoldLast;
  bool clamp_controls = true;  // clamp samples to the acceleration limits

  void validate() const;
};

/// Product of per-stage Gaussians over joint-acceleration sequences.
class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  /// Zero mean, diagonal covariance diag(sigma^2) at every stage.
  GaussianPolicy(int horizon, const Eigen::VectorXd& sigma);

  int horizon() const { return static_cast<int>(mean_.size()); }
  Eigen::Index dim() const { return mean_.empty() ? 0 : mean_.front().size(); }

  const std::vector<Eigen::VectorXd>& mean() const { return mean_; }
  std::vector<Eigen::VectorXd>& mean() { return mean_; }
  const std::vector<Eigen::MatrixXd>& covariance() const { return cov_; }
  /// Symmetric square root of each covariance, refreshed by set_covariance.
  const std::vector<Eigen::MatrixXd>& covariance_sqrt() const { return cov_sqrt_; }

  /// Throws ValidationError if a matrix is not symmetric PSD.
  void set_covariance(int t, const Eigen::MatrixXd& cov);

 private:
  std::vector<Eigen::VectorXd> mean_;
  std::vector<Eigen::MatrixXd> cov_;
  std::vector<Eigen::MatrixXd> cov_sqrt_;
};

/// Independent generator for rollout k of control cycle `cycle`.
std::mt19937_64 rollout_rng(std::uint64_t seed, std::uint64_t cycle, std::uint64_t k);

/// One control sequence (n x T) drawn from the policy, clamped to +-accel_limit
/// when the limit vector is non-empty.
Eigen::MatrixXd sample_controls(const GaussianPolicy& policy, std::mt19937_64& rng,
                                const Eigen::VectorXd& accel_limit);

/// K sequences with per-rollout streams derived from (seed, cycle, k).
std::vector<Eigen::MatrixXd> sample_controls(const GaussianPolicy& policy, const MPPIConfig& cfg,
                                             std::uint64_t cycle, const Eigen::VectorXd& accel_limit);

/// Joint-space double integrator limits. Empty vectors disable a limit.
struct IntegratorLimits {
  Eigen::VectorXd lower, upper, velocity;

  static IntegratorLimits from_model(const RobotModel& model);
};

/// Semi-implicit Euler step: v += u dt (clamped to the velocity limit), then
/// q += v dt. A position that leaves its range is clamped and the velocity of
/// that joint is zeroed.
void integrate_step(Eigen::VectorXd& q, Eigen::VectorXd& v, const Eigen::VectorXd& u, double dt,
                    const IntegratorLimits& limits);

struct Trajectory {
  Eigen::MatrixXd q;  // n x (T + 1)
  Eigen::MatrixXd v;  // n x (T + 1)
};

Trajectory rollout(const State& x0, const Eigen::MatrixXd& controls, double dt, const IntegratorLimits& limits = {});

/// L_k = sum_t gamma^t stage(k, t) + gamma^T terminal(k).
Eigen::VectorXd score_rollouts(const Eigen::MatrixXd& stage_costs, const Eigen::VectorXd& terminal_costs,
                               double discount);

/// Soft-min weights exp(-(L - min L) / beta), normalized. Throws
/// NumericalError on non-finite costs, std::invalid_argument on beta <= 0.
Eigen::VectorXd compute_weights(const Eigen::VectorXd& costs, double temperature);

/// mu_t <- (1 - alpha) mu_t + alpha sum_k eta_k u_{t,k} for every stage.
void update_mean(GaussianPolicy& policy, const std::vector<Eigen::MatrixXd>& controls, const Eigen::VectorXd& weights,
                 double step_size);

void shift_horizon(GaussianPolicy& policy, TailPolicy tail = TailPolicy::kHoldLast);

/// Batch produced by one control cycle. Rows are rollouts.
struct RolloutBatch {
  std::vector<Eigen::MatrixXd> controls;  // K entries of n x T
  Eigen::MatrixXd stage_cost;             // K x T, vanilla stage totals
  Eigen::VectorXd terminal_cost;          // K
  Eigen::MatrixXd task_cost;              // K x T
  Eigen::VectorXd terminal_task_cost;     // K
  Eigen::MatrixXd violation;              // K x (T + 1)
  Eigen::MatrixXd survival;               // K x (T + 1), CaT only
  Eigen::VectorXd total_cost;             // K, L_k or L^CaT_k
  Eigen::VectorXd weights;                // K
};

struct StepDiagnostics {
  std::uint64_t cycle = 0;
  double cost_min = 0.0;
  double cost_mean = 0.0;
  double effective_samples = 0.0;    // 1 / sum eta^2
  double max_violation = 0.0;
  double predicted_max_clearance = 0.0;  // over the updated mean plan, overlap-positive
  double survival_terminal_mean = 1.0;
  double survival_terminal_min = 1.0;
  double c_max = 0.0;
  double b = 0.0;
  double b_terminal = 0.0;
  double wall_time_ms = 0.0;
  Eigen::VectorXd rollout_costs;
};

struct StepResult {
  Eigen::VectorXd control;  // u*_0, joint acceleration
  State reference;          // x1* = integrate(x0, u*_0)
  StepDiagnostics diagnostics;
};

/// Receding-horizon sampling controller. Holds the policy and CaT state
/// between cycles; the model, weights and configs are fixed at construction.
class Controller {
 public:
  Controller(const RobotModel& model, MPPIConfig cfg, CostWeights weights, CaTConfig cat_cfg, Mode mode,
             const Eigen::VectorXd& sigma);

  /// One full cycle against a frozen scene snapshot.
  StepResult control_step(const State& x0, const SceneSnapshot& snapshot, const CollisionPairSet& pairs,
                          const Pose& goal);

  /// Same, with one snapshot per horizon stage (T + 1 entries), for scenes
  /// whose obstacle tracks are predicted along the horizon.
  StepResult control_step(const State& x0, const std::vector<SceneSnapshot>& stage_snapshots,
                          const CollisionPairSet& pairs, const Pose& goal);

  const GaussianPolicy& policy() const { return policy_; }
  GaussianPolicy& policy() { return policy_; }
  const CaTState& cat_state() const { return cat_state_; }
  const RolloutBatch& last_batch() const { return batch_; }
  Mode mode() const { return mode_; }
  const MPPIConfig& config() const { return cfg_; }

 private:
  StepResult run_cycle(const State& x0, CostContext& ctx, const CollisionPairSet& pairs);
  void evaluate_range(std::size_t k_begin, std::size_t k_end, const State& x0, const CostContext& ctx);

  const RobotModel& model_;
  MPPIConfig cfg_;
  CostWeights weights_;
  CaTConfig cat_cfg_;
  Mode mode_;
  GaussianPolicy policy_;
  CaTState cat_state_;
  IntegratorLimits limits_;
  Eigen::VectorXd accel_limit_;
  std::uint64_t cycle_ = 0;
  RolloutBatch batch_;
};

/// Feed-forward inverse dynamics at the reference plus state feedback:
/// tau = rnea(q1*, v1*, u*) + K_fix (x1* - x). K_fix is n x 2n.
Eigen::VectorXd low_level_torque(const RobotModel& model, const State& measured, const State& reference,
                                 const Eigen::VectorXd& control, const Eigen::MatrixXd& k_fix);

/// Block gain [diag(kp) diag(kd)].
Eigen::MatrixXd pd_gain(const Eigen::VectorXd& kp, const Eigen::VectorXd& kd);

}  // namespace catmppi
