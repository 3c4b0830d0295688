#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "catmppi/geometry.hpp"
#include "catmppi/robot_model.hpp"
#include "catmppi/se3.hpp"

namespace catmppi {

/// Environment primitive geometry, expressed in the primitive's own frame.
using Shape = std::variant<Capsule, Box>;

struct Keyframe {
  double time = 0.0;  // s
  Pose pose = Pose::Identity();
};

/// A primitive moved along scripted keyframes (a single keyframe = static).
/// Fixtures (table, shelves) take part in collision checks but are excluded
/// from the obstacle-distance metric.
struct ObstacleTrack {
  std::string name;
  Shape shape;
  std::vector<Keyframe> keyframes;
  bool fixture = false;

  void validate() const;
};

class Scene {
 public:
  Scene() = default;
  explicit Scene(std::vector<ObstacleTrack> tracks);

  const std::vector<ObstacleTrack>& tracks() const { return tracks_; }
  std::size_t size() const { return tracks_.size(); }
  std::size_t index_of(const std::string& name) const;
  bool is_static() const;

 private:
  std::vector<ObstacleTrack> tracks_;
};

/// Environment frozen at one instant. Shapes are in world coordinates.
struct SceneSnapshot {
  double time = 0.0;
  std::vector<Pose> poses;
  std::vector<Shape> shapes;
};

/// Piecewise-linear translation and slerp rotation between keyframes, held
/// constant outside the keyframe range.
SceneSnapshot snapshot_at(const Scene& scene, double t);

struct CollisionPair {
  std::size_t robot_capsule = 0;
  std::size_t environment = 0;

  bool operator==(const CollisionPair&) const = default;
};

struct CollisionPairSet {
  std::vector<CollisionPair> pairs;
  double d_th = 0.02;  // safety margin, m

  /// Indices valid, d_th > 0, no duplicate pairs.
  void validate(const RobotModel& model, const Scene& scene) const;
};

/// Signed clearance (positive = overlap) between a world-frame robot capsule
/// and an environment shape.
double pair_clearance(const Capsule& robot_capsule, const Shape& shape);
SignedClearance pair_clearance_detail(const Capsule& robot_capsule, const Shape& shape);

/// One signed clearance per pair, positive = overlap.
Eigen::VectorXd min_clearances(const RobotModel& model, const Eigen::VectorXd& q,
                               const SceneSnapshot& snapshot, const CollisionPairSet& pairs);

/// Same, from precomputed world-frame robot capsules.
void min_clearances(const std::vector<Capsule>& robot_world, const SceneSnapshot& snapshot,
                    const CollisionPairSet& pairs, Eigen::VectorXd& out);

}  // namespace catmppi
