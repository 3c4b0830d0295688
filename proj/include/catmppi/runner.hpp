#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "catmppi/mppi.hpp"
#include "catmppi/scenario.hpp"

namespace catmppi {

enum class Outcome { kSuccess, kCollision, kTimeout };
std::string to_string(Outcome o);

/// State after one executed control cycle.
struct CycleRecord {
  double time = 0.0;  // simulated time after the cycle
  Eigen::VectorXd q, v;
  Eigen::VectorXd control;  // commanded acceleration
  Eigen::VectorXd torque;   // low-level torque
  double ee_error = 0.0;    // end-effector translation error, m
  double min_clearance = 0.0;           // report convention (positive = clear), all pairs
  double min_obstacle_clearance = 0.0;  // same, non-fixture pairs only (NaN if none)
  double compute_ms = 0.0;
  double survival_terminal_mean = 1.0;
  double max_violation = 0.0;
};

struct TrialResult {
  std::string scenario;
  std::string scenario_id;
  Mode mode = Mode::kVanilla;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::kTimeout;
  bool success = false;
  double dist_to_target_cm = 0.0;
  double dist_to_obstacle_cm = 0.0;  // NaN when the scene has no obstacles
  double min_clearance_cm = 0.0;     // including fixtures
  double smoothness = 0.0;
  double comp_time_ms = 0.0;
  std::size_t cycles = 0;
  double sim_time = 0.0;
  std::vector<CycleRecord> trace;  // filled when requested
};

/// Metric fields of a trial from its trace. `initial` holds the clearances and
/// end-effector error before the first cycle.
struct TraceMetrics {
  double dist_to_target_cm = 0.0;
  double dist_to_obstacle_cm = 0.0;
  double min_clearance_cm = 0.0;
  double smoothness = 0.0;
  double comp_time_ms = 0.0;
};
TraceMetrics compute_metrics(const std::vector<CycleRecord>& trace, const CycleRecord& initial, double dt);

struct TrialOptions {
  bool keep_trace = false;
  std::optional<int> threads;
};

TrialResult run_trial(const Scenario& scenario, Mode mode, std::uint64_t seed, const TrialOptions& opts = {});

struct CampaignConfig {
  std::vector<std::string> scenarios;
  std::vector<Mode> modes{Mode::kVanilla, Mode::kCaT};
  int seeds = 10;
  std::uint64_t seed_base = 0;
  std::optional<double> max_duration;
  std::optional<double> success_threshold;
  std::optional<int> threads;
  nlohmann::json overrides = nlohmann::json::object();  // merged into every scenario
  std::string out;

  void validate() const;
  nlohmann::json to_json() const;
};

CampaignConfig load_campaign_config(const std::string& path);
CampaignConfig parse_campaign_config(const nlohmann::json& doc, const std::string& source);

struct AggregateRow {
  std::string scenario;
  std::string scenario_id;
  Mode mode = Mode::kVanilla;
  std::size_t trials = 0;
  double success_rate = 0.0;
  double dist_to_target_cm = 0.0;
  double dist_to_obstacle_cm = 0.0;
  double smoothness = 0.0;
  double comp_time_ms = 0.0;
};

struct CampaignResult {
  nlohmann::json metadata;
  std::vector<TrialResult> trials;
  std::vector<AggregateRow> rows;
};

std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& trials);

CampaignResult run_campaign(const CampaignConfig& cfg, std::ostream* progress = nullptr);

/// Machine-readable results: one JSON object per line, metadata first, then
/// trials, then aggregate rows. Wall-clock fields are named comp_time_ms.
std::string results_to_jsonl(const CampaignResult& r);
CampaignResult results_from_jsonl(const std::string& text);
void write_results(const std::string& path, const CampaignResult& r);
CampaignResult read_results(const std::string& path);

nlohmann::json trial_to_json(const TrialResult& t);
nlohmann::json trace_to_json(const TrialResult& t);

/// Comparison table with the columns Success Rate, Dist. to Target (cm),
/// Dist. to Obst. (cm), Smoothness, Comp. Time (ms).
std::string render_table(const std::vector<AggregateRow>& rows);

std::string version();

}  // namespace catmppi
