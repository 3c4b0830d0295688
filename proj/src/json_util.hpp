#pragma once

// Field access helpers shared by the robot, scenario and campaign loaders.
// Every failure names the JSON path so diagnostics point at the bad entry.

#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "catmppi/error.hpp"
#include "catmppi/se3.hpp"

namespace catmppi::detail {

using nlohmann::json;

inline const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(path + "." + key + ": missing");
  return j.at(key);
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path + ": expected a number");
  return j.get<double>();
}

inline double number(const json& j, const std::string& key, const std::string& path) {
  return number(field(j, key, path), path + "." + key);
}

inline double number_or(const json& j, const std::string& key, double fallback, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return number(j.at(key), path + "." + key);
}

inline std::string string_or(const json& j, const std::string& key, const std::string& fallback,
                             const std::string& path) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ValidationError(path + "." + key + ": expected a string");
  return j.at(key).get<std::string>();
}

inline Eigen::VectorXd vector(const json& j, const std::string& path, long expected = -1) {
  if (!j.is_array()) throw ValidationError(path + ": expected an array");
  if (expected >= 0 && static_cast<long>(j.size()) != expected) {
    throw ValidationError(path + ": expected " + std::to_string(expected) + " entries, got " +
                          std::to_string(j.size()));
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

inline Eigen::Vector3d vec3(const json& j, const std::string& path) { return vector(j, path, 3); }

inline Eigen::Vector3d vec3(const json& j, const std::string& key, const std::string& path) {
  return vec3(field(j, key, path), path + "." + key);
}

inline Eigen::Vector3d vec3_or(const json& j, const std::string& key, const Eigen::Vector3d& fallback,
                               const std::string& path) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return vec3(j.at(key), path + "." + key);
}

/// {"xyz": [..], "rpy": [..]}, both optional.
inline Pose pose(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path + ": expected an object with xyz/rpy");
  return make_pose(vec3_or(j, "xyz", Eigen::Vector3d::Zero(), path),
                   vec3_or(j, "rpy", Eigen::Vector3d::Zero(), path));
}

inline json parse_text(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(source) + ": " + e.what());
  }
}

std::string read_file(const std::string& path);

}  // namespace catmppi::detail
