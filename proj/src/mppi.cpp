#include "catmppi/mppi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <Eigen/Eigenvalues>

#include "catmppi/error.hpp"

namespace catmppi {

std::string to_string(Mode mode) { return mode == Mode::kVanilla ? "vanilla" : "cat"; }

Mode parse_mode(const std::string& s) {
  if (s == "vanilla") return Mode::kVanilla;
  if (s == "cat") return Mode::kCaT;
  throw ValidationError("mode: expected 'vanilla' or 'cat', got '" + s + "'");
}

void MPPIConfig::validate() const {
  if (rollouts < 1) throw ValidationError("controller.rollouts: must be >= 1");
  if (horizon < 1) throw ValidationError("controller.horizon: must be >= 1");
  if (!(dt > 0.0)) throw ValidationError("controller.dt: must be > 0");
  if (!(temperature > 0.0)) throw ValidationError("controller.temperature: must be > 0");
  if (!(step_size > 0.0 && step_size <= 1.0)) throw ValidationError("controller.step_size: must lie in (0, 1]");
  if (threads < 1) throw ValidationError("controller.threads: must be >= 1");
}

GaussianPolicy::GaussianPolicy(int horizon, const Eigen::VectorXd& sigma) {
  if (horizon < 1) throw ValidationError("policy: horizon must be >= 1");
  const Eigen::MatrixXd cov = sigma.array().square().matrix().asDiagonal();
  mean_.assign(static_cast<std::size_t>(horizon), Eigen::VectorXd::Zero(sigma.size()));
  cov_.assign(static_cast<std::size_t>(horizon), cov);
  cov_sqrt_.assign(static_cast<std::size_t>(horizon), sigma.cwiseAbs().asDiagonal());
}

void GaussianPolicy::set_covariance(int t, const Eigen::MatrixXd& cov) {
  const auto idx = static_cast<std::size_t>(t);
  if (idx >= cov_.size()) throw std::out_of_range("policy: stage index out of range");
  require_dim(static_cast<std::size_t>(cov.rows()), static_cast<std::size_t>(dim()), "policy covariance rows");
  require_dim(static_cast<std::size_t>(cov.cols()), static_cast<std::size_t>(dim()), "policy covariance cols");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw ValidationError("policy covariance: not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.eigenvalues().minCoeff() < -1e-12) throw ValidationError("policy covariance: not positive semidefinite");
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  cov_[idx] = cov;
  cov_sqrt_[idx] = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::mt19937_64 rollout_rng(std::uint64_t seed, std::uint64_t cycle, std::uint64_t k) {
  return std::mt19937_64(splitmix64(splitmix64(splitmix64(seed) ^ cycle) ^ k));
}

Eigen::MatrixXd sample_controls(const GaussianPolicy& policy, std::mt19937_64& rng, const Eigen::VectorXd& accel_limit) {
  const Eigen::Index n = policy.dim();
  const int T = policy.horizon();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd u(n, T);
  Eigen::VectorXd xi(n);
  for (int t = 0; t < T; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) xi[i] = normal(rng);
    u.col(t) = policy.mean()[static_cast<std::size_t>(t)] + policy.covariance_sqrt()[static_cast<std::size_t>(t)] * xi;
  }
  if (accel_limit.size() == n) {
    for (int t = 0; t < T; ++t) u.col(t) = u.col(t).cwiseMax(-accel_limit).cwiseMin(accel_limit);
  }
  return u;
}

std::vector<Eigen::MatrixXd> sample_controls(const GaussianPolicy& policy, const MPPIConfig& cfg, std::uint64_t cycle,
                                             const Eigen::VectorXd& accel_limit) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(cfg.rollouts));
  for (int k = 0; k < cfg.rollouts; ++k) {
    auto rng = rollout_rng(cfg.seed, cycle, static_cast<std::uint64_t>(k));
    out.push_back(sample_controls(policy, rng, accel_limit));
  }
  return out;
}

IntegratorLimits IntegratorLimits::from_model(const RobotModel& model) {
  return {model.lower_limits(), model.upper_limits(), model.velocity_limits()};
}

void integrate_step(Eigen::VectorXd& q, Eigen::VectorXd& v, const Eigen::VectorXd& u, double dt,
                    const IntegratorLimits& limits) {
  v += u * dt;
  if (limits.velocity.size() == v.size()) v = v.cwiseMax(-limits.velocity).cwiseMin(limits.velocity);
  q += v * dt;
  if (limits.lower.size() == q.size() && limits.upper.size() == q.size()) {
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      if (q[i] < limits.lower[i]) {
        q[i] = limits.lower[i];
        v[i] = 0.0;
      } else if (q[i] > limits.upper[i]) {
        q[i] = limits.upper[i];
        v[i] = 0.0;
      }
    }
  }
}

Trajectory rollout(const State& x0, const Eigen::MatrixXd& controls, double dt, const IntegratorLimits& limits) {
  require_dim(static_cast<std::size_t>(controls.rows()), static_cast<std::size_t>(x0.q.size()), "rollout: controls rows");
  require_dim(static_cast<std::size_t>(x0.v.size()), static_cast<std::size_t>(x0.q.size()), "rollout: v");
  const Eigen::Index T = controls.cols();
  Trajectory traj{Eigen::MatrixXd(x0.q.size(), T + 1), Eigen::MatrixXd(x0.q.size(), T + 1)};
  Eigen::VectorXd q = x0.q;
  Eigen::VectorXd v = x0.v;
  Eigen::VectorXd u(x0.q.size());
  traj.q.col(0) = q;
  traj.v.col(0) = v;
  for (Eigen::Index t = 0; t < T; ++t) {
    u = controls.col(t);
    integrate_step(q, v, u, dt, limits);
    traj.q.col(t + 1) = q;
    traj.v.col(t + 1) = v;
  }
  return traj;
}

Eigen::VectorXd score_rollouts(const Eigen::MatrixXd& stage_costs, const Eigen::VectorXd& terminal_costs,
                               double discount) {
  require_dim(static_cast<std::size_t>(terminal_costs.size()), static_cast<std::size_t>(stage_costs.rows()),
              "score_rollouts: terminal_costs");
  const Eigen::Index T = stage_costs.cols();
  Eigen::VectorXd L = Eigen::VectorXd::Zero(stage_costs.rows());
  double g = 1.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    L += g * stage_costs.col(t);
    g *= discount;
  }
  L += g * terminal_costs;
  return L;
}

Eigen::VectorXd compute_weights(const Eigen::VectorXd& costs, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("compute_weights: temperature must be > 0");
  if (costs.size() == 0) throw std::invalid_argument("compute_weights: empty cost vector");
  if (!costs.allFinite()) throw NumericalError("compute_weights: non-finite cost");
  const double lo = costs.minCoeff();
  Eigen::VectorXd w = (-(costs.array() - lo) / temperature).exp().matrix();
  return w / w.sum();
}

void update_mean(GaussianPolicy& policy, const std::vector<Eigen::MatrixXd>& controls, const Eigen::VectorXd& weights,
                 double step_size) {
  require_dim(controls.size(), static_cast<std::size_t>(weights.size()), "update_mean: weights");
  const int T = policy.horizon();
  Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(policy.dim(), T);
  for (std::size_t k = 0; k < controls.size(); ++k) avg.noalias() += weights[static_cast<Eigen::Index>(k)] * controls[k];
  for (int t = 0; t < T; ++t) {
    auto& mu = policy.mean()[static_cast<std::size_t>(t)];
    mu = (1.0 - step_size) * mu + step_size * avg.col(t);
  }
}

void shift_horizon(GaussianPolicy& policy, TailPolicy tail) {
  auto& mu = policy.mean();
  if (mu.empty()) return;
  std::rotate(mu.begin(), mu.begin() + 1, mu.end());
  if (tail == TailPolicy::kHoldLast) {
    if (mu.size() >= 2) mu.back() = mu[mu.size() - 2];
  } else {
    mu.back().setZero();
  }
}

Controller::Controller(const RobotModel& model, MPPIConfig cfg, CostWeights weights, CaTConfig cat_cfg, Mode mode,
                       const Eigen::VectorXd& sigma)
    : model_(model),
      cfg_(cfg),
      weights_(std::move(weights)),
      cat_cfg_(cat_cfg),
      mode_(mode),
      policy_(cfg.horizon, sigma),
      cat_state_(CaTState::initial(cat_cfg)),
      limits_(IntegratorLimits::from_model(model)),
      accel_limit_(cfg.clamp_controls ? model.acceleration_limits() : Eigen::VectorXd()) {
  cfg_.validate();
  cat_cfg_.validate();
  weights_.validate(model.dof());
  require_dim(static_cast<std::size_t>(sigma.size()), model.dof(), "controller: sigma");
}

void Controller::evaluate_range(std::size_t k_begin, std::size_t k_end, const State& x0, const CostContext& ctx) {
  StageEvaluator eval(ctx);
  const Eigen::Index T = cfg_.horizon;
  Eigen::VectorXd q(x0.q.size()), v(x0.v.size()), u(x0.q.size());
  for (std::size_t k = k_begin; k < k_end; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    auto rng = rollout_rng(cfg_.seed, cycle_, k);
    batch_.controls[k] = sample_controls(policy_, rng, accel_limit_);
    const Eigen::MatrixXd& uk = batch_.controls[k];
    q = x0.q;
    v = x0.v;
    for (Eigen::Index t = 0; t < T; ++t) {
      u = uk.col(t);
      const StageCostBreakdown c = eval.evaluate(q, v, &u, static_cast<std::size_t>(t));
      batch_.stage_cost(kk, t) = c.total();
      batch_.task_cost(kk, t) = c.task();
      batch_.violation(kk, t) = c.violation;
      integrate_step(q, v, u, cfg_.dt, limits_);
    }
    const StageCostBreakdown c = eval.evaluate(q, v, nullptr, static_cast<std::size_t>(T));
    batch_.terminal_cost[kk] = c.total();
    batch_.terminal_task_cost[kk] = c.task();
    batch_.violation(kk, T) = c.violation;
  }
}

StepResult Controller::control_step(const State& x0, const SceneSnapshot& snapshot, const CollisionPairSet& pairs,
                                    const Pose& goal) {
  CostContext ctx;
  ctx.snapshot = &snapshot;
  ctx.goal = goal;
  return run_cycle(x0, ctx, pairs);
}

StepResult Controller::control_step(const State& x0, const std::vector<SceneSnapshot>& stage_snapshots,
                                    const CollisionPairSet& pairs, const Pose& goal) {
  require_dim(stage_snapshots.size(), static_cast<std::size_t>(cfg_.horizon + 1), "control_step: stage snapshots");
  CostContext ctx;
  ctx.snapshot = &stage_snapshots.front();
  for (const auto& s : stage_snapshots) ctx.stage_snapshots.push_back(&s);
  ctx.goal = goal;
  return run_cycle(x0, ctx, pairs);
}

StepResult Controller::run_cycle(const State& x0, CostContext& ctx, const CollisionPairSet& pairs) {
  const auto t_start = std::chrono::steady_clock::now();
  const std::size_t n = model_.dof();
  require_dim(static_cast<std::size_t>(x0.q.size()), n, "control_step: q");
  require_dim(static_cast<std::size_t>(x0.v.size()), n, "control_step: v");
  const auto K = static_cast<std::size_t>(cfg_.rollouts);
  const Eigen::Index T = cfg_.horizon;

  ctx.model = &model_;
  ctx.pairs = &pairs;
  ctx.weights = weights_;
  ctx.x_ref = x0.stacked();
  if (weights_.state_reference == StateReference::kInitialAtRest) ctx.x_ref.tail(static_cast<Eigen::Index>(n)).setZero();

  batch_.controls.resize(K);
  batch_.stage_cost.resize(static_cast<Eigen::Index>(K), T);
  batch_.task_cost.resize(static_cast<Eigen::Index>(K), T);
  batch_.terminal_cost.resize(static_cast<Eigen::Index>(K));
  batch_.terminal_task_cost.resize(static_cast<Eigen::Index>(K));
  batch_.violation.resize(static_cast<Eigen::Index>(K), T + 1);

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg_.threads), K);
  if (workers <= 1) {
    evaluate_range(0, K, x0, ctx);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t lo = K * w / workers;
      const std::size_t hi = K * (w + 1) / workers;
      pool.emplace_back([this, lo, hi, &x0, &ctx] { evaluate_range(lo, hi, x0, ctx); });
    }
    for (auto& th : pool) th.join();
  }

  StepDiagnostics diag;
  diag.cycle = cycle_;
  diag.max_violation = batch_.violation.maxCoeff();
  if (mode_ == Mode::kVanilla) {
    batch_.total_cost = score_rollouts(batch_.stage_cost, batch_.terminal_cost, weights_.discount);
    batch_.survival.resize(0, 0);
  } else {
    batch_.total_cost = cat_scores(batch_.task_cost, batch_.terminal_task_cost, batch_.violation, weights_.discount,
                                   cat_cfg_, cat_state_, &batch_.survival);
    const Eigen::VectorXd last = batch_.survival.col(T);
    diag.survival_terminal_mean = last.mean();
    diag.survival_terminal_min = last.minCoeff();
  }
  batch_.weights = compute_weights(batch_.total_cost, cfg_.temperature);
  update_mean(policy_, batch_.controls, batch_.weights, cfg_.step_size);

  StepResult result;
  result.control = policy_.mean().front();
  result.reference = x0;
  integrate_step(result.reference.q, result.reference.v, result.control, cfg_.dt, limits_);

  // Clearance along the updated nominal plan, before the shift.
  {
    StageEvaluator eval(ctx);
    Eigen::VectorXd q = x0.q, v = x0.v;
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t stage = 0;
    for (const auto& mu : policy_.mean()) {
      integrate_step(q, v, mu, cfg_.dt, limits_);
      ++stage;
      if (!pairs.pairs.empty()) worst = std::max(worst, eval.max_clearance(q, stage));
    }
    diag.predicted_max_clearance = worst;
  }
  shift_horizon(policy_, cfg_.tail);

  diag.cost_min = batch_.total_cost.minCoeff();
  diag.cost_mean = batch_.total_cost.mean();
  diag.effective_samples = 1.0 / batch_.weights.squaredNorm();
  diag.c_max = cat_state_.c_max;
  diag.b = cat_state_.b;
  diag.b_terminal = cat_state_.b_terminal;
  diag.rollout_costs = batch_.total_cost;
  ++cycle_;
  diag.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
  result.diagnostics = std::move(diag);
  return result;
}

Eigen::VectorXd low_level_torque(const RobotModel& model, const State& measured, const State& reference,
                                 const Eigen::VectorXd& control, const Eigen::MatrixXd& k_fix) {
  const auto n = static_cast<Eigen::Index>(model.dof());
  require_dim(static_cast<std::size_t>(k_fix.rows()), static_cast<std::size_t>(n), "low_level_torque: K_fix rows");
  require_dim(static_cast<std::size_t>(k_fix.cols()), static_cast<std::size_t>(2 * n), "low_level_torque: K_fix cols");
  require_dim(static_cast<std::size_t>(measured.q.size()), static_cast<std::size_t>(n), "low_level_torque: measured q");
  require_dim(static_cast<std::size_t>(measured.v.size()), static_cast<std::size_t>(n), "low_level_torque: measured v");
  const Eigen::VectorXd ff = rnea(model, reference.q, reference.v, control);
  return ff + k_fix * (reference.stacked() - measured.stacked());
}

Eigen::MatrixXd pd_gain(const Eigen::VectorXd& kp, const Eigen::VectorXd& kd) {
  require_dim(static_cast<std::size_t>(kd.size()), static_cast<std::size_t>(kp.size()), "pd_gain: kd");
  const Eigen::Index n = kp.size();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, 2 * n);
  K.leftCols(n) = kp.asDiagonal();
  K.rightCols(n) = kd.asDiagonal();
  return K;
}

}  // namespace catmppi
