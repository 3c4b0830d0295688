#include "catmppi/cat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "catmppi/error.hpp"
#include "catmppi/mppi.hpp"

namespace catmppi {

void CaTConfig::validate() const {
  // p_max = 0 is accepted: it switches terminations off entirely.
  if (!(p_max >= 0.0 && p_max <= 1.0)) throw ValidationError("cat.p_max: must lie in [0, 1]");
  if (!(tau_c >= 0.0 && tau_c < 1.0)) throw ValidationError("cat.tau_c: must lie in [0, 1)");
  if (!(tau_b >= 0.0 && tau_b < 1.0)) throw ValidationError("cat.tau_b: must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ValidationError("cat.epsilon: must be > 0");
}

double hazard(double v, double c_max, double p_max) {
  if (!(c_max > 0.0)) throw std::invalid_argument("hazard: c_max must be > 0");
  return p_max * std::clamp(v / c_max, 0.0, 1.0);
}

CaTState update_cmax(CaTState state, double batch_max_violation, const CaTConfig& cfg) {
  state.c_max = cfg.tau_c * state.c_max + (1.0 - cfg.tau_c) * batch_max_violation;
  state.c_max = std::max(state.c_max, cfg.epsilon);
  return state;
}

Eigen::VectorXd survival(const Eigen::Ref<const Eigen::VectorXd>& hazards) {
  Eigen::VectorXd s(hazards.size());
  double acc = 1.0;
  for (Eigen::Index t = 0; t < hazards.size(); ++t) {
    acc *= 1.0 - hazards[t];
    s[t] = acc;
  }
  return s;
}

CaTState update_baselines(CaTState state, double batch_max_task_cost, double batch_max_terminal_task_cost,
                          const CaTConfig& cfg) {
  const auto envelope = [&cfg](double b, double bar) {
    return std::max(cfg.tau_b * b + (1.0 - cfg.tau_b) * bar, bar) + cfg.epsilon;
  };
  state.b = envelope(state.b, batch_max_task_cost);
  state.b_terminal = envelope(state.b_terminal, batch_max_terminal_task_cost);
  return state;
}

double cat_score(const Eigen::Ref<const Eigen::VectorXd>& survival, const Eigen::Ref<const Eigen::VectorXd>& rewards,
                 double terminal_reward, double discount) {
  const Eigen::Index T = rewards.size();
  require_dim(static_cast<std::size_t>(survival.size()), static_cast<std::size_t>(T + 1), "cat_score: survival");
  double score = 0.0;
  double g = 1.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    score -= g * survival[t] * rewards[t];
    g *= discount;
  }
  score -= g * survival[T] * terminal_reward;
  return score;
}

Eigen::VectorXd cat_scores(const Eigen::MatrixXd& task, const Eigen::VectorXd& terminal_task,
                           const Eigen::MatrixXd& violations, double discount, const CaTConfig& cfg,
                           CaTState& state, Eigen::MatrixXd* survival_out) {
  const Eigen::Index K = task.rows();
  const Eigen::Index T = task.cols();
  require_dim(static_cast<std::size_t>(terminal_task.size()), static_cast<std::size_t>(K), "cat_scores: terminal_task");
  require_dim(static_cast<std::size_t>(violations.rows()), static_cast<std::size_t>(K), "cat_scores: violation rows");
  require_dim(static_cast<std::size_t>(violations.cols()), static_cast<std::size_t>(T + 1), "cat_scores: violation cols");

  // Normalizer and baselines are refreshed from this batch before it is
  // scored, so every reward of the batch is >= epsilon.
  state = update_cmax(state, violations.maxCoeff(), cfg);
  state = update_baselines(state, task.size() > 0 ? task.maxCoeff() : 0.0, terminal_task.maxCoeff(), cfg);

  Eigen::VectorXd scores(K);
  Eigen::VectorXd hz(T + 1);
  Eigen::VectorXd rewards(T);
  if (survival_out != nullptr) survival_out->resize(K, T + 1);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index t = 0; t <= T; ++t) hz[t] = hazard(violations(k, t), state.c_max, cfg.p_max);
    const Eigen::VectorXd s = survival(hz);
    rewards = (state.b - task.row(k).array()).matrix().transpose();
    scores[k] = cat_score(s, rewards, state.b_terminal - terminal_task[k], discount);
    if (survival_out != nullptr) survival_out->row(k) = s.transpose();
  }
  return scores;
}

Eigen::VectorXd cat_weights(const Eigen::VectorXd& pseudo_costs, double temperature) {
  return compute_weights(pseudo_costs, temperature);
}

}  // namespace catmppi
