#include "catmppi/scenario.hpp"

#include <cstdlib>
#include <filesystem>

#include "catmppi/error.hpp"
#include "json_util.hpp"

#ifndef CATMPPI_DEFAULT_DATA_DIR
#define CATMPPI_DEFAULT_DATA_DIR "data"
#endif

namespace catmppi {

namespace fs = std::filesystem;
using detail::json;

namespace {

// Either one number broadcast to all entries or an array of `n` numbers.
Eigen::VectorXd broadcast(const json& j, long n, const std::string& path) {
  if (j.is_number()) return Eigen::VectorXd::Constant(n, j.get<double>());
  return detail::vector(j, path, n);
}

Shape parse_shape(const json& e, const std::string& p) {
  const std::string type = detail::string_or(e, "type", "", p);
  if (type == "capsule") {
    Capsule c;
    c.p0 = detail::vec3(e, "p0", p);
    c.p1 = detail::vec3(e, "p1", p);
    c.radius = detail::number(e, "radius", p);
    return c;
  }
  if (type == "box") {
    Box b;
    b.half_extents = detail::vec3(e, "half_extents", p);
    return b;
  }
  throw ValidationError(p + ".type: expected 'capsule' or 'box'");
}

ObstacleTrack parse_track(const json& e, const std::string& p, std::size_t index) {
  ObstacleTrack track;
  track.name = detail::string_or(e, "name", "primitive" + std::to_string(index), p);
  track.shape = parse_shape(e, p);
  track.fixture = e.value("fixture", false);
  if (e.contains("keyframes")) {
    const json& kj = e.at("keyframes");
    if (!kj.is_array()) throw ValidationError(p + ".keyframes: expected an array");
    for (std::size_t i = 0; i < kj.size(); ++i) {
      const std::string kp = p + ".keyframes[" + std::to_string(i) + "]";
      track.keyframes.push_back({detail::number(kj[i], "t", kp), detail::pose(kj[i], kp)});
    }
  } else {
    track.keyframes.push_back({0.0, e.contains("pose") ? detail::pose(e.at("pose"), p + ".pose") : Pose::Identity()});
  }
  return track;
}

}  // namespace

CollisionPairSet Scenario::obstacle_pairs() const {
  CollisionPairSet out;
  out.d_th = pairs.d_th;
  for (const auto& p : pairs.pairs) {
    if (!scene.tracks()[p.environment].fixture) out.pairs.push_back(p);
  }
  return out;
}

Scenario parse_scenario(const json& doc, const std::string& source, const std::string& base_dir) {
  Scenario sc;
  sc.source = source;
  const std::string& r = source;
  try {
    sc.name = detail::string_or(doc, "name", fs::path(source).stem().string(), r);
    sc.id = detail::string_or(doc, "id", sc.name, r);
    sc.description = detail::string_or(doc, "description", "", r);

    const json& robot_j = detail::field(doc, "robot", r);
    if (!robot_j.is_string()) throw ValidationError(r + ".robot: expected a path string");
    fs::path robot_path = robot_j.get<std::string>();
    if (robot_path.is_relative()) robot_path = fs::path(base_dir) / robot_path;
    sc.robot_path = robot_path.lexically_normal().string();
    sc.robot = std::make_shared<const RobotModel>(load_robot_description(sc.robot_path));
    const RobotModel& model = *sc.robot;
    const auto n = static_cast<long>(model.dof());

    const json& start = detail::field(doc, "start", r);
    sc.start.q = detail::vector(detail::field(start, "q", r + ".start"), r + ".start.q", n);
    sc.start.v = start.contains("v") ? detail::vector(start.at("v"), r + ".start.v", n) : Eigen::VectorXd::Zero(n);
    for (long i = 0; i < n; ++i) {
      const auto& lim = model.joints()[static_cast<std::size_t>(i)].limits;
      if (sc.start.q[i] < lim.lower || sc.start.q[i] > lim.upper) {
        throw ValidationError(r + ".start.q[" + std::to_string(i) + "]: outside joint limits");
      }
    }
    sc.goal = detail::pose(detail::field(doc, "goal", r), r + ".goal");

    std::vector<ObstacleTrack> tracks;
    if (doc.contains("primitives")) {
      const json& pj = doc.at("primitives");
      if (!pj.is_array()) throw ValidationError(r + ".primitives: expected an array");
      for (std::size_t i = 0; i < pj.size(); ++i) {
        tracks.push_back(parse_track(pj[i], r + ".primitives[" + std::to_string(i) + "]", i));
      }
    }
    sc.scene = Scene(std::move(tracks));

    if (doc.contains("pairs")) {
      const json& pr = doc.at("pairs");
      const std::string pp = r + ".pairs";
      sc.pairs.d_th = detail::number_or(pr, "d_th", sc.pairs.d_th, pp);
      if (pr.contains("list")) {
        const json& lj = pr.at("list");
        if (!lj.is_array()) throw ValidationError(pp + ".list: expected an array");
        for (std::size_t i = 0; i < lj.size(); ++i) {
          const std::string ep = pp + ".list[" + std::to_string(i) + "]";
          if (!lj[i].is_array() || lj[i].size() != 2 || !lj[i][0].is_string() || !lj[i][1].is_string()) {
            throw ValidationError(ep + ": expected [robot capsule name, primitive name]");
          }
          try {
            sc.pairs.pairs.push_back(
                {model.capsule_index(lj[i][0].get<std::string>()), sc.scene.index_of(lj[i][1].get<std::string>())});
          } catch (const ValidationError& e) {
            throw ValidationError(ep + ": " + e.what());
          }
        }
      }
    }
    sc.pairs.validate(model, sc.scene);

    const json ctrl = doc.value("controller", json::object());
    const std::string cp = r + ".controller";
    sc.mppi.rollouts = static_cast<int>(detail::number_or(ctrl, "rollouts", sc.mppi.rollouts, cp));
    sc.mppi.horizon = static_cast<int>(detail::number_or(ctrl, "horizon", sc.mppi.horizon, cp));
    sc.mppi.dt = detail::number_or(ctrl, "dt", sc.mppi.dt, cp);
    sc.mppi.temperature = detail::number_or(ctrl, "temperature", sc.mppi.temperature, cp);
    sc.mppi.step_size = detail::number_or(ctrl, "step_size", sc.mppi.step_size, cp);
    sc.mppi.threads = static_cast<int>(detail::number_or(ctrl, "threads", sc.mppi.threads, cp));
    sc.mppi.clamp_controls = ctrl.value("clamp_controls", true);
    const std::string tail = detail::string_or(ctrl, "tail", "hold_last", cp);
    if (tail == "hold_last") {
      sc.mppi.tail = TailPolicy::kHoldLast;
    } else if (tail == "zero") {
      sc.mppi.tail = TailPolicy::kZero;
    } else {
      throw ValidationError(cp + ".tail: expected 'hold_last' or 'zero'");
    }
    sc.sigma = ctrl.contains("sigma") ? broadcast(ctrl.at("sigma"), n, cp + ".sigma") : Eigen::VectorXd::Constant(n, 1.0);
    if ((sc.sigma.array() < 0.0).any()) throw ValidationError(cp + ".sigma: entries must be >= 0");
    sc.predict_obstacles = ctrl.value("predict_obstacles", false);
    sc.mppi.validate();

    const json costs = doc.value("costs", json::object());
    const std::string kp = r + ".costs";
    sc.weights = CostWeights::defaults(model.dof());
    if (costs.contains("q_ee")) {
      sc.weights.q_ee.setZero();
      sc.weights.q_ee.diagonal() = detail::vector(costs.at("q_ee"), kp + ".q_ee", 6);
    }
    if (costs.contains("q_x")) {
      const json& qx = costs.at("q_x");
      if (qx.is_object()) {
        sc.weights.q_x.head(n).setConstant(detail::number_or(qx, "position", 0.0, kp + ".q_x"));
        sc.weights.q_x.tail(n).setConstant(detail::number_or(qx, "velocity", 0.0, kp + ".q_x"));
      } else {
        sc.weights.q_x = detail::vector(qx, kp + ".q_x", 2 * n);
      }
    }
    if (costs.contains("q_u")) sc.weights.q_u = broadcast(costs.at("q_u"), n, kp + ".q_u");
    sc.weights.d_th = sc.pairs.d_th;
    sc.weights.collision_weight = detail::number_or(costs, "collision_weight", sc.weights.collision_weight, kp);
    sc.weights.discount = detail::number_or(costs, "discount", sc.weights.discount, kp);
    const std::string cref = detail::string_or(costs, "control_reference", "zero", kp);
    if (cref == "zero") {
      sc.weights.control_reference = ControlReference::kZero;
    } else if (cref == "gravity") {
      sc.weights.control_reference = ControlReference::kGravity;
    } else {
      throw ValidationError(kp + ".control_reference: expected 'zero' or 'gravity'");
    }
    const std::string sref = detail::string_or(costs, "state_reference", "initial_at_rest", kp);
    if (sref == "initial") {
      sc.weights.state_reference = StateReference::kInitial;
    } else if (sref == "initial_at_rest") {
      sc.weights.state_reference = StateReference::kInitialAtRest;
    } else {
      throw ValidationError(kp + ".state_reference: expected 'initial' or 'initial_at_rest'");
    }
    sc.weights.validate(model.dof());

    const json cat = doc.value("cat", json::object());
    sc.cat.p_max = detail::number_or(cat, "p_max", sc.cat.p_max, r + ".cat");
    sc.cat.tau_c = detail::number_or(cat, "tau_c", sc.cat.tau_c, r + ".cat");
    sc.cat.tau_b = detail::number_or(cat, "tau_b", sc.cat.tau_b, r + ".cat");
    sc.cat.epsilon = detail::number_or(cat, "epsilon", sc.cat.epsilon, r + ".cat");
    sc.cat.validate();

    const json ll = doc.value("low_level", json::object());
    sc.gains.kp = ll.contains("kp") ? broadcast(ll.at("kp"), n, r + ".low_level.kp") : Eigen::VectorXd::Constant(n, 100.0);
    sc.gains.kd = ll.contains("kd") ? broadcast(ll.at("kd"), n, r + ".low_level.kd") : Eigen::VectorXd::Constant(n, 10.0);

    const json ep = doc.value("episode", json::object());
    sc.episode.max_duration = detail::number_or(ep, "max_duration", sc.episode.max_duration, r + ".episode");
    sc.episode.success_threshold =
        detail::number_or(ep, "success_threshold", sc.episode.success_threshold, r + ".episode");
    sc.episode.state_noise_std = detail::number_or(ep, "state_noise_std", sc.episode.state_noise_std, r + ".episode");
    if (!(sc.episode.max_duration >= 0.0)) throw ValidationError(r + ".episode.max_duration: must be >= 0");
    if (!(sc.episode.success_threshold > 0.0)) throw ValidationError(r + ".episode.success_threshold: must be > 0");
    if (!(sc.episode.state_noise_std >= 0.0)) throw ValidationError(r + ".episode.state_noise_std: must be >= 0");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind(r, 0) == 0) throw;
    throw ValidationError(r + ": " + msg);
  }
  return sc;
}

Scenario load_scenario(const std::string& path, const json& overrides) {
  json doc = detail::parse_text(detail::read_file(path), path);
  if (!overrides.is_null() && !overrides.empty()) doc.merge_patch(overrides);
  return parse_scenario(doc, path, fs::path(path).parent_path().string());
}

std::string data_dir() {
  if (const char* env = std::getenv("CATMPPI_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return CATMPPI_DEFAULT_DATA_DIR;
}

std::string resolve_scenario_path(const std::string& name_or_path) {
  if (name_or_path.size() == 1 && name_or_path[0] >= '1' && name_or_path[0] <= '6') {
    return (fs::path(data_dir()) / "scenarios" / ("scenario" + name_or_path + ".json")).string();
  }
  return name_or_path;
}

}  // namespace catmppi
