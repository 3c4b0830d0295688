#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "catmppi/error.hpp"
#include "catmppi/runner.hpp"
#include "json_util.hpp"

#ifndef CATMPPI_VERSION
#define CATMPPI_VERSION "unknown"
#endif

namespace catmppi {

using nlohmann::json;

std::string version() { return CATMPPI_VERSION; }

namespace {

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// nlohmann writes NaN as null.
double num_or_nan(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.at(key).get<double>();
}

Outcome parse_outcome(const std::string& s) {
  if (s == "success") return Outcome::kSuccess;
  if (s == "collision") return Outcome::kCollision;
  if (s == "timeout") return Outcome::kTimeout;
  throw ParseError("unknown outcome '" + s + "'");
}

}  // namespace

json scenario_parameters(const Scenario& sc) {
  const Eigen::VectorXd q_ee = sc.weights.q_ee.diagonal();
  return {
      {"id", sc.id},
      {"name", sc.name},
      {"source", sc.source},
      {"robot", sc.robot_path},
      {"pairs", sc.pairs.pairs.size()},
      {"d_th", sc.pairs.d_th},
      {"controller",
       {{"rollouts", sc.mppi.rollouts},
        {"horizon", sc.mppi.horizon},
        {"dt", sc.mppi.dt},
        {"temperature", sc.mppi.temperature},
        {"step_size", sc.mppi.step_size},
        {"sigma", vec(sc.sigma)},
        {"tail", sc.mppi.tail == TailPolicy::kHoldLast ? "hold_last" : "zero"},
        {"clamp_controls", sc.mppi.clamp_controls},
        {"predict_obstacles", sc.predict_obstacles}}},
      {"costs",
       {{"q_ee", vec(q_ee)},
        {"q_x", vec(sc.weights.q_x)},
        {"q_u", vec(sc.weights.q_u)},
        {"collision_weight", sc.weights.collision_weight},
        {"discount", sc.weights.discount},
        {"control_reference", sc.weights.control_reference == ControlReference::kZero ? "zero" : "gravity"},
        {"state_reference",
         sc.weights.state_reference == StateReference::kInitial ? "initial" : "initial_at_rest"}}},
      {"cat",
       {{"p_max", sc.cat.p_max},
        {"tau_c", sc.cat.tau_c},
        {"tau_b", sc.cat.tau_b},
        {"epsilon", sc.cat.epsilon},
        {"update_order", "c_max and baselines refreshed from the batch before scoring it"}}},
      {"low_level", {{"kp", vec(sc.gains.kp)}, {"kd", vec(sc.gains.kd)}}},
      {"episode",
       {{"max_duration", sc.episode.max_duration},
        {"success_threshold", sc.episode.success_threshold},
        {"state_noise_std", sc.episode.state_noise_std}}},
  };
}

json CampaignConfig::to_json() const {
  json modes_j = json::array();
  for (Mode m : modes) modes_j.push_back(to_string(m));
  json j = {{"scenarios", scenarios}, {"modes", modes_j}, {"seeds", seeds}, {"seed_base", seed_base},
            {"overrides", overrides}};
  if (max_duration) j["max_duration"] = *max_duration;
  if (success_threshold) j["success_threshold"] = *success_threshold;
  // threads and out do not change results and are left out so reruns with a
  // different worker count or destination stay byte-identical.
  return j;
}

CampaignConfig parse_campaign_config(const json& doc, const std::string& source) {
  CampaignConfig cfg;
  try {
    const json& sj = detail::field(doc, "scenarios", source);
    if (!sj.is_array()) throw ValidationError(source + ".scenarios: expected an array");
    for (const auto& s : sj) {
      if (s.is_string()) {
        cfg.scenarios.push_back(s.get<std::string>());
      } else if (s.is_number_integer()) {
        cfg.scenarios.push_back(std::to_string(s.get<int>()));
      } else {
        throw ValidationError(source + ".scenarios: entries must be paths or bundled indices 1-6");
      }
    }
    if (doc.contains("modes")) {
      cfg.modes.clear();
      for (const auto& m : doc.at("modes")) cfg.modes.push_back(parse_mode(m.get<std::string>()));
    }
    cfg.seeds = static_cast<int>(detail::number_or(doc, "seeds", cfg.seeds, source));
    cfg.seed_base = static_cast<std::uint64_t>(detail::number_or(doc, "seed_base", 0.0, source));
    if (doc.contains("max_duration")) cfg.max_duration = detail::number(doc.at("max_duration"), source + ".max_duration");
    if (doc.contains("success_threshold")) {
      cfg.success_threshold = detail::number(doc.at("success_threshold"), source + ".success_threshold");
    }
    if (doc.contains("threads")) cfg.threads = static_cast<int>(detail::number(doc.at("threads"), source + ".threads"));
    if (doc.contains("overrides")) cfg.overrides = doc.at("overrides");
    cfg.out = detail::string_or(doc, "out", "", source);
  } catch (const json::exception& e) {
    throw ValidationError(source + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

CampaignConfig load_campaign_config(const std::string& path) {
  return parse_campaign_config(detail::parse_text(detail::read_file(path), path), path);
}

json trial_to_json(const TrialResult& t) {
  return {{"type", "trial"},
          {"scenario", t.scenario},
          {"scenario_id", t.scenario_id},
          {"mode", to_string(t.mode)},
          {"seed", t.seed},
          {"outcome", to_string(t.outcome)},
          {"success", t.success},
          {"dist_to_target_cm", t.dist_to_target_cm},
          {"dist_to_obstacle_cm", t.dist_to_obstacle_cm},
          {"min_clearance_cm", t.min_clearance_cm},
          {"smoothness", t.smoothness},
          {"comp_time_ms", t.comp_time_ms},
          {"cycles", t.cycles},
          {"sim_time", t.sim_time}};
}

json trace_to_json(const TrialResult& t) {
  json cycles = json::array();
  for (const auto& r : t.trace) {
    cycles.push_back({{"time", r.time},
                      {"q", vec(r.q)},
                      {"v", vec(r.v)},
                      {"control", vec(r.control)},
                      {"torque", vec(r.torque)},
                      {"ee_error", r.ee_error},
                      {"min_clearance", r.min_clearance},
                      {"min_obstacle_clearance", r.min_obstacle_clearance},
                      {"survival_terminal_mean", r.survival_terminal_mean},
                      {"max_violation", r.max_violation},
                      {"comp_time_ms", r.compute_ms}});
  }
  json j = trial_to_json(t);
  j["trace"] = std::move(cycles);
  return j;
}

namespace {

json row_to_json(const AggregateRow& r) {
  return {{"type", "aggregate"},
          {"scenario", r.scenario},
          {"scenario_id", r.scenario_id},
          {"mode", to_string(r.mode)},
          {"trials", r.trials},
          {"success_rate", r.success_rate},
          {"dist_to_target_cm", r.dist_to_target_cm},
          {"dist_to_obstacle_cm", r.dist_to_obstacle_cm},
          {"smoothness", r.smoothness},
          {"comp_time_ms", r.comp_time_ms}};
}

}  // namespace

std::string results_to_jsonl(const CampaignResult& r) {
  std::ostringstream out;
  out << r.metadata.dump() << '\n';
  for (const auto& t : r.trials) out << trial_to_json(t).dump() << '\n';
  for (const auto& row : r.rows) out << row_to_json(row).dump() << '\n';
  return out.str();
}

CampaignResult results_from_jsonl(const std::string& text) {
  CampaignResult r;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("results line " + std::to_string(lineno) + ": " + e.what());
    }
    const std::string type = j.value("type", "");
    if (type == "metadata") {
      r.metadata = j;
    } else if (type == "trial") {
      TrialResult t;
      t.scenario = j.at("scenario").get<std::string>();
      t.scenario_id = j.value("scenario_id", t.scenario);
      t.mode = parse_mode(j.at("mode").get<std::string>());
      t.seed = j.at("seed").get<std::uint64_t>();
      t.outcome = parse_outcome(j.at("outcome").get<std::string>());
      t.success = j.at("success").get<bool>();
      t.dist_to_target_cm = num_or_nan(j, "dist_to_target_cm");
      t.dist_to_obstacle_cm = num_or_nan(j, "dist_to_obstacle_cm");
      t.min_clearance_cm = num_or_nan(j, "min_clearance_cm");
      t.smoothness = num_or_nan(j, "smoothness");
      t.comp_time_ms = num_or_nan(j, "comp_time_ms");
      t.cycles = j.at("cycles").get<std::size_t>();
      t.sim_time = num_or_nan(j, "sim_time");
      r.trials.push_back(std::move(t));
    } else if (type == "aggregate") {
      AggregateRow row;
      row.scenario = j.at("scenario").get<std::string>();
      row.scenario_id = j.value("scenario_id", row.scenario);
      row.mode = parse_mode(j.at("mode").get<std::string>());
      row.trials = j.at("trials").get<std::size_t>();
      row.success_rate = num_or_nan(j, "success_rate");
      row.dist_to_target_cm = num_or_nan(j, "dist_to_target_cm");
      row.dist_to_obstacle_cm = num_or_nan(j, "dist_to_obstacle_cm");
      row.smoothness = num_or_nan(j, "smoothness");
      row.comp_time_ms = num_or_nan(j, "comp_time_ms");
      r.rows.push_back(row);
    } else {
      throw ParseError("results line " + std::to_string(lineno) + ": unknown record type '" + type + "'");
    }
  }
  if (r.rows.empty() && !r.trials.empty()) r.rows = aggregate(r.trials);
  return r;
}

void write_results(const std::string& path, const CampaignResult& r) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << results_to_jsonl(r);
}

CampaignResult read_results(const std::string& path) { return results_from_jsonl(detail::read_file(path)); }

std::string render_table(const std::vector<AggregateRow>& rows) {
  const auto cell = [](double v, const char* fmt) {
    if (std::isnan(v)) return std::string("--");
    char buf[32];
    std::snprintf(buf, sizeof buf, fmt, v);
    return std::string(buf);
  };
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-4s %-14s %8s %12s %12s %11s %11s %4s\n", "Sc.", "Method", "Success",
                "Dist.Target", "Dist.Obst.", "Smoothness", "Comp.Time", "N");
  out << line;
  std::snprintf(line, sizeof line, "%-4s %-14s %8s %12s %12s %11s %11s %4s\n", "", "", "Rate", "(cm)", "(cm)", "",
                "(ms)", "");
  out << line;
  out << std::string(82, '-') << '\n';
  for (const auto& r : rows) {
    const std::string method = r.mode == Mode::kVanilla ? "Vanilla MPPI" : "CaT-MPPI";
    std::snprintf(line, sizeof line, "%-4s %-14s %8s %12s %12s %11s %11s %4zu\n", r.scenario_id.c_str(), method.c_str(),
                  cell(r.success_rate, "%.2f").c_str(), cell(r.dist_to_target_cm, "%.2f").c_str(),
                  cell(r.dist_to_obstacle_cm, "%.2f").c_str(), cell(r.smoothness, "%.2f").c_str(),
                  cell(r.comp_time_ms, "%.1f").c_str(), r.trials);
    out << line;
  }
  return out.str();
}

}  // namespace catmppi
