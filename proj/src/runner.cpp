#include "catmppi/runner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <random>

#include "catmppi/error.hpp"

namespace catmppi {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::kSuccess:
      return "success";
    case Outcome::kCollision:
      return "collision";
    case Outcome::kTimeout:
      return "timeout";
  }
  return "unknown";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ClearanceProbe {
  double all = std::numeric_limits<double>::infinity();
  double obstacles = kNaN;
};

// Report convention: positive = clear.
ClearanceProbe probe(const RobotModel& model, const Eigen::VectorXd& q, const SceneSnapshot& snap,
                     const CollisionPairSet& all, const CollisionPairSet& obstacles) {
  ClearanceProbe out;
  Kinematics kin;
  forward_kinematics(model, q, kin);
  std::vector<Capsule> world;
  world_capsules(model, kin, world);
  Eigen::VectorXd d;
  min_clearances(world, snap, all, d);
  if (d.size() > 0) out.all = -d.maxCoeff();
  if (!obstacles.pairs.empty()) {
    min_clearances(world, snap, obstacles, d);
    out.obstacles = -d.maxCoeff();
  }
  return out;
}

double ee_error(const RobotModel& model, const Eigen::VectorXd& q, const Pose& goal) {
  return (forward_kinematics(model, q).ee.translation() - goal.translation()).norm();
}

}  // namespace

TraceMetrics compute_metrics(const std::vector<CycleRecord>& trace, const CycleRecord& initial, double dt) {
  TraceMetrics m;
  const CycleRecord& last = trace.empty() ? initial : trace.back();
  m.dist_to_target_cm = 100.0 * last.ee_error;

  double min_all = initial.min_clearance;
  double min_obs = initial.min_obstacle_clearance;
  for (const auto& r : trace) {
    min_all = std::min(min_all, r.min_clearance);
    if (!std::isnan(min_obs)) min_obs = std::min(min_obs, r.min_obstacle_clearance);
  }
  m.min_clearance_cm = 100.0 * min_all;
  m.dist_to_obstacle_cm = std::isnan(min_obs) ? kNaN : 100.0 * min_obs;

  double smooth = 0.0;
  for (std::size_t c = 0; c + 1 < trace.size(); ++c) {
    smooth += (trace[c + 1].torque - trace[c].torque).squaredNorm() * dt;
  }
  m.smoothness = smooth;

  double comp = 0.0;
  for (const auto& r : trace) comp += r.compute_ms;
  m.comp_time_ms = trace.empty() ? 0.0 : comp / static_cast<double>(trace.size());
  return m;
}

TrialResult run_trial(const Scenario& scenario, Mode mode, std::uint64_t seed, const TrialOptions& opts) {
  const RobotModel& model = *scenario.robot;
  MPPIConfig cfg = scenario.mppi;
  cfg.seed = seed;
  if (opts.threads) cfg.threads = *opts.threads;
  Controller controller(model, cfg, scenario.weights, scenario.cat, mode, scenario.sigma);
  const Eigen::MatrixXd k_fix = pd_gain(scenario.gains.kp, scenario.gains.kd);
  const CollisionPairSet obstacle_pairs = scenario.obstacle_pairs();
  const IntegratorLimits limits = IntegratorLimits::from_model(model);
  const double dt = cfg.dt;
  const auto n = static_cast<Eigen::Index>(model.dof());

  // Plant noise uses its own stream so it never perturbs rollout sampling.
  std::mt19937_64 plant_rng = rollout_rng(seed, std::numeric_limits<std::uint64_t>::max(), 0);
  std::normal_distribution<double> noise(0.0, 1.0);

  TrialResult result;
  result.scenario = scenario.name;
  result.scenario_id = scenario.id;
  result.mode = mode;
  result.seed = seed;

  State x = scenario.start;
  double t = 0.0;
  CycleRecord initial;
  {
    const ClearanceProbe c = probe(model, x.q, snapshot_at(scenario.scene, t), scenario.pairs, obstacle_pairs);
    initial.time = 0.0;
    initial.q = x.q;
    initial.v = x.v;
    initial.ee_error = ee_error(model, x.q, scenario.goal);
    initial.min_clearance = c.all;
    initial.min_obstacle_clearance = c.obstacles;
  }

  std::vector<CycleRecord> trace;
  Outcome outcome = Outcome::kTimeout;
  if (initial.min_clearance < 0.0) {
    outcome = Outcome::kCollision;
  } else if (initial.ee_error < scenario.episode.success_threshold) {
    outcome = Outcome::kSuccess;
  } else {
    std::vector<SceneSnapshot> stage_snaps;
    while (t + dt <= scenario.episode.max_duration + 1e-9) {
      StepResult step;
      if (scenario.predict_obstacles) {
        stage_snaps.clear();
        for (int s = 0; s <= cfg.horizon; ++s) stage_snaps.push_back(snapshot_at(scenario.scene, t + s * dt));
        step = controller.control_step(x, stage_snaps, scenario.pairs, scenario.goal);
      } else {
        step = controller.control_step(x, snapshot_at(scenario.scene, t), scenario.pairs, scenario.goal);
      }

      CycleRecord rec;
      rec.control = step.control;
      rec.torque = low_level_torque(model, x, step.reference, step.control, k_fix);
      rec.compute_ms = step.diagnostics.wall_time_ms;
      rec.survival_terminal_mean = step.diagnostics.survival_terminal_mean;
      rec.max_violation = step.diagnostics.max_violation;

      State next = step.reference;
      if (scenario.episode.state_noise_std > 0.0) {
        for (Eigen::Index i = 0; i < n; ++i) next.q[i] += scenario.episode.state_noise_std * noise(plant_rng);
        for (Eigen::Index i = 0; i < n; ++i) next.v[i] += scenario.episode.state_noise_std * noise(plant_rng);
        next.q = next.q.cwiseMax(limits.lower).cwiseMin(limits.upper);
      }
      x = next;
      t += dt;

      const ClearanceProbe c = probe(model, x.q, snapshot_at(scenario.scene, t), scenario.pairs, obstacle_pairs);
      rec.time = t;
      rec.q = x.q;
      rec.v = x.v;
      rec.ee_error = ee_error(model, x.q, scenario.goal);
      rec.min_clearance = c.all;
      rec.min_obstacle_clearance = c.obstacles;
      trace.push_back(std::move(rec));

      if (trace.back().min_clearance < 0.0) {
        outcome = Outcome::kCollision;
        break;
      }
      if (trace.back().ee_error < scenario.episode.success_threshold) {
        outcome = Outcome::kSuccess;
        break;
      }
    }
  }

  const TraceMetrics m = compute_metrics(trace, initial, dt);
  result.outcome = outcome;
  result.success = outcome == Outcome::kSuccess;
  result.dist_to_target_cm = m.dist_to_target_cm;
  result.dist_to_obstacle_cm = m.dist_to_obstacle_cm;
  result.min_clearance_cm = m.min_clearance_cm;
  result.smoothness = m.smoothness;
  result.comp_time_ms = m.comp_time_ms;
  result.cycles = trace.size();
  result.sim_time = t;
  if (opts.keep_trace) result.trace = std::move(trace);
  return result;
}

void CampaignConfig::validate() const {
  if (scenarios.empty()) throw ValidationError("campaign.scenarios: at least one scenario required");
  if (modes.empty()) throw ValidationError("campaign.modes: at least one mode required");
  if (seeds < 1) throw ValidationError("campaign.seeds: must be >= 1");
  if (success_threshold && !(*success_threshold > 0.0)) throw ValidationError("campaign.success_threshold: must be > 0");
  if (max_duration && !(*max_duration >= 0.0)) throw ValidationError("campaign.max_duration: must be >= 0");
  if (threads && *threads < 1) throw ValidationError("campaign.threads: must be >= 1");
}

std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& trials) {
  std::vector<AggregateRow> rows;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::vector<std::size_t> obstacle_counts;
  for (const auto& t : trials) {
    const auto key = std::make_pair(t.scenario, to_string(t.mode));
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      AggregateRow row;
      row.scenario = t.scenario;
      row.scenario_id = t.scenario_id;
      row.mode = t.mode;
      rows.push_back(row);
      obstacle_counts.push_back(0);
    }
    AggregateRow& row = rows[it->second];
    row.trials += 1;
    row.success_rate += t.success ? 1.0 : 0.0;
    row.dist_to_target_cm += t.dist_to_target_cm;
    row.smoothness += t.smoothness;
    row.comp_time_ms += t.comp_time_ms;
    if (!std::isnan(t.dist_to_obstacle_cm)) {
      row.dist_to_obstacle_cm += t.dist_to_obstacle_cm;
      obstacle_counts[it->second] += 1;
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    const auto N = static_cast<double>(row.trials);
    row.success_rate /= N;
    row.dist_to_target_cm /= N;
    row.smoothness /= N;
    row.comp_time_ms /= N;
    row.dist_to_obstacle_cm =
        obstacle_counts[i] == 0 ? kNaN : row.dist_to_obstacle_cm / static_cast<double>(obstacle_counts[i]);
  }
  return rows;
}

nlohmann::json scenario_parameters(const Scenario& sc);

CampaignResult run_campaign(const CampaignConfig& cfg, std::ostream* progress) {
  cfg.validate();
  CampaignResult result;
  nlohmann::json scen_meta = nlohmann::json::array();
  std::vector<std::uint64_t> seeds;
  for (int s = 0; s < cfg.seeds; ++s) seeds.push_back(cfg.seed_base + static_cast<std::uint64_t>(s));

  for (const auto& name : cfg.scenarios) {
    Scenario sc = load_scenario(resolve_scenario_path(name), cfg.overrides);
    if (cfg.max_duration) sc.episode.max_duration = *cfg.max_duration;
    if (cfg.success_threshold) sc.episode.success_threshold = *cfg.success_threshold;
    scen_meta.push_back(scenario_parameters(sc));
    for (Mode mode : cfg.modes) {
      for (std::uint64_t seed : seeds) {
        TrialOptions opts;
        opts.threads = cfg.threads;
        TrialResult tr = run_trial(sc, mode, seed, opts);
        if (progress != nullptr) {
          *progress << sc.name << " " << to_string(mode) << " seed " << seed << ": " << to_string(tr.outcome)
                    << " target " << tr.dist_to_target_cm << " cm, clearance " << tr.min_clearance_cm << " cm, "
                    << tr.cycles << " cycles, " << tr.comp_time_ms << " ms/cycle\n";
        }
        result.trials.push_back(std::move(tr));
      }
    }
  }
  result.rows = aggregate(result.trials);
  result.metadata = {{"type", "metadata"},
                     {"version", version()},
                     {"campaign", cfg.to_json()},
                     {"seeds", seeds},
                     {"scenarios", scen_meta}};
  return result;
}

}  // namespace catmppi
