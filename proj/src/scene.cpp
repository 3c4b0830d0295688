#include "catmppi/scene.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "catmppi/error.hpp"

namespace catmppi {

void ObstacleTrack::validate() const {
  const std::string where = "primitive '" + name + "'";
  if (keyframes.empty()) throw ValidationError(where + ": at least one keyframe required");
  for (std::size_t i = 1; i < keyframes.size(); ++i) {
    if (!(keyframes[i].time > keyframes[i - 1].time)) {
      throw ValidationError(where + ": keyframe times must be strictly increasing");
    }
  }
  try {
    std::visit([](const auto& s) { s.validate(); }, shape);
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

Scene::Scene(std::vector<ObstacleTrack> tracks) : tracks_(std::move(tracks)) {
  std::set<std::string> names;
  for (const auto& t : tracks_) {
    t.validate();
    if (!names.insert(t.name).second) throw ValidationError("primitive '" + t.name + "': duplicate name");
  }
}

std::size_t Scene::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    if (tracks_[i].name == name) return i;
  }
  throw ValidationError("unknown environment primitive '" + name + "'");
}

bool Scene::is_static() const {
  return std::all_of(tracks_.begin(), tracks_.end(), [](const auto& t) { return t.keyframes.size() == 1; });
}

namespace {

Pose pose_at(const std::vector<Keyframe>& keys, double t) {
  if (t <= keys.front().time) return keys.front().pose;
  if (t >= keys.back().time) return keys.back().pose;
  const auto it = std::upper_bound(keys.begin(), keys.end(), t,
                                   [](double value, const Keyframe& k) { return value < k.time; });
  const Keyframe& hi = *it;
  const Keyframe& lo = *(it - 1);
  return interpolate(lo.pose, hi.pose, (t - lo.time) / (hi.time - lo.time));
}

}  // namespace

SceneSnapshot snapshot_at(const Scene& scene, double t) {
  SceneSnapshot snap;
  snap.time = t;
  snap.poses.reserve(scene.size());
  snap.shapes.reserve(scene.size());
  for (const auto& track : scene.tracks()) {
    const Pose T = pose_at(track.keyframes, t);
    snap.poses.push_back(T);
    snap.shapes.push_back(std::visit([&T](const auto& s) -> Shape { return s.transformed(T); }, track.shape));
  }
  return snap;
}

void CollisionPairSet::validate(const RobotModel& model, const Scene& scene) const {
  if (!(d_th > 0.0)) throw ValidationError("pairs.d_th: must be > 0");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    const std::string where = "pairs[" + std::to_string(i) + "]";
    if (p.robot_capsule >= model.capsules().size()) throw ValidationError(where + ": robot capsule index out of range");
    if (p.environment >= scene.size()) throw ValidationError(where + ": environment index out of range");
    if (!seen.emplace(p.robot_capsule, p.environment).second) throw ValidationError(where + ": duplicate pair");
  }
}

SignedClearance pair_clearance_detail(const Capsule& robot_capsule, const Shape& shape) {
  if (const auto* c = std::get_if<Capsule>(&shape)) return capsule_capsule_clearance(robot_capsule, *c);
  return capsule_box_clearance(robot_capsule, std::get<Box>(shape));
}

double pair_clearance(const Capsule& robot_capsule, const Shape& shape) {
  if (const auto* c = std::get_if<Capsule>(&shape)) {
    return robot_capsule.radius + c->radius - segment_segment_distance(robot_capsule.axis(), c->axis()).distance;
  }
  return capsule_box_clearance(robot_capsule, std::get<Box>(shape)).value;
}

void min_clearances(const std::vector<Capsule>& robot_world, const SceneSnapshot& snapshot,
                    const CollisionPairSet& pairs, Eigen::VectorXd& out) {
  out.resize(static_cast<Eigen::Index>(pairs.pairs.size()));
  for (std::size_t i = 0; i < pairs.pairs.size(); ++i) {
    const auto& p = pairs.pairs[i];
    out[static_cast<Eigen::Index>(i)] = pair_clearance(robot_world[p.robot_capsule], snapshot.shapes[p.environment]);
  }
}

Eigen::VectorXd min_clearances(const RobotModel& model, const Eigen::VectorXd& q, const SceneSnapshot& snapshot,
                               const CollisionPairSet& pairs) {
  Kinematics kin;
  forward_kinematics(model, q, kin);
  std::vector<Capsule> world;
  world_capsules(model, kin, world);
  Eigen::VectorXd out;
  min_clearances(world, snapshot, pairs, out);
  return out;
}

}  // namespace catmppi
