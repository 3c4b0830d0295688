#pragma once

// Constraints-as-terminations scoring: collision violations become per-stage
// termination hazards, and rollouts are ranked by survival-weighted shifted
// rewards instead of an additive penalty.

#include <Eigen/Core>

namespace catmppi {

struct CaTConfig {
  double p_max = 0.3;     // maximum termination probability per stage
  double tau_c = 0.95;    // EMA factor of the violation normalizer
  double tau_b = 0.95;    // EMA factor of the reward baselines
  double epsilon = 1e-6;  // normalizer floor and baseline offset

  void validate() const;
};

/// Persisted across control cycles.
struct CaTState {
  double c_max;
  double b = 0.0;
  double b_terminal = 0.0;

  static CaTState initial(const CaTConfig& cfg) { return {cfg.epsilon, 0.0, 0.0}; }
};

/// Stage violation: the raw collision-margin sum of that stage.
inline double violation(double collision_margin_sum) { return collision_margin_sum; }

/// p_max * clip(v / c_max, 0, 1). Throws std::invalid_argument if c_max <= 0.
double hazard(double v, double c_max, double p_max);

/// c_max <- tau_c c_max + (1 - tau_c) max_violation, floored at epsilon.
/// The max is taken over raw (unclipped) violations.
CaTState update_cmax(CaTState state, double batch_max_violation, const CaTConfig& cfg);

/// Cumulative products S_t = prod_{m<=t} (1 - delta_m) of one hazard row.
Eigen::VectorXd survival(const Eigen::Ref<const Eigen::VectorXd>& hazards);

/// Upper-envelope EMA of the largest running and terminal task costs of the
/// batch. Afterwards b - l >= epsilon for every task cost l of that batch.
CaTState update_baselines(CaTState state, double batch_max_task_cost, double batch_max_terminal_task_cost,
                          const CaTConfig& cfg);

/// Pseudo-cost -sum_t gamma^t S_t r_t - gamma^T S_T r_T.
/// survival has T + 1 entries (the last one belongs to the terminal state),
/// rewards has T entries.
double cat_score(const Eigen::Ref<const Eigen::VectorXd>& survival, const Eigen::Ref<const Eigen::VectorXd>& rewards,
                 double terminal_reward, double discount);

/// Batch form. Rows are rollouts. task: K x T, terminal_task: K,
/// violations: K x (T+1). Updates `state` (c_max first, then baselines) and
/// returns the K pseudo-costs. Optionally exposes the survival matrix.
Eigen::VectorXd cat_scores(const Eigen::MatrixXd& task, const Eigen::VectorXd& terminal_task,
                           const Eigen::MatrixXd& violations, double discount, const CaTConfig& cfg,
                           CaTState& state, Eigen::MatrixXd* survival_out = nullptr);

/// Soft-min weights of the pseudo-costs; identical to compute_weights.
Eigen::VectorXd cat_weights(const Eigen::VectorXd& pseudo_costs, double temperature);

}  // namespace catmppi
