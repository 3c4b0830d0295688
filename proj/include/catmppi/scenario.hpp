#pragma once

#include <memory>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "catmppi/cat.hpp"
#include "catmppi/costs.hpp"
#include "catmppi/mppi.hpp"
#include "catmppi/robot_model.hpp"
#include "catmppi/scene.hpp"

namespace catmppi {

struct LowLevelGains {
  Eigen::VectorXd kp;
  Eigen::VectorXd kd;
};

struct EpisodeConfig {
  double max_duration = 30.0;      // simulated seconds
  double success_threshold = 0.05; // end-effector translation error, m
  double state_noise_std = 0.0;    // plant noise added to (q, v) each cycle
};

/// A fully validated benchmark scenario: robot, environment, task and every
/// controller parameter needed to run a trial.
struct Scenario {
  std::string id;  // short label shown in result tables, e.g. "2"
  std::string name;
  std::string description;
  std::string source;
  std::string robot_path;
  std::shared_ptr<const RobotModel> robot;
  Scene scene;
  CollisionPairSet pairs;
  State start;
  Pose goal = Pose::Identity();
  MPPIConfig mppi;
  Eigen::VectorXd sigma;
  CostWeights weights;
  CaTConfig cat;
  LowLevelGains gains;
  EpisodeConfig episode;
  bool predict_obstacles = false;  // evaluate stage t against the scene at now + t dt

  /// Pairs whose environment primitive is not a fixture.
  CollisionPairSet obstacle_pairs() const;
};

/// `overrides` is merged into the scenario document (RFC 7386 merge patch)
/// before validation. Relative robot paths resolve against the scenario file.
Scenario load_scenario(const std::string& path, const nlohmann::json& overrides = nlohmann::json::object());
Scenario parse_scenario(const nlohmann::json& doc, const std::string& source, const std::string& base_dir);

/// Resolve "1".."6" to the bundled scenario files; other strings are paths.
std::string resolve_scenario_path(const std::string& name_or_path);

/// Directory holding the bundled robots/ and scenarios/ (CATMPPI_DATA_DIR
/// environment variable, or the source tree data directory).
std::string data_dir();

}  // namespace catmppi
