// Command-line front end: single trials, benchmark campaigns, file checks and
// result tables.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "catmppi/robot_model.hpp"
#include "catmppi/runner.hpp"
#include "catmppi/scenario.hpp"

using namespace catmppi;

namespace {

void print_trial(const TrialResult& t) {
  std::printf("scenario %s  mode %s  seed %llu\n", t.scenario_id.c_str(), to_string(t.mode).c_str(),
              static_cast<unsigned long long>(t.seed));
  std::printf("  outcome              %s after %zu cycles (%.2f s)\n", to_string(t.outcome).c_str(), t.cycles,
              t.sim_time);
  std::printf("  dist to target       %.2f cm\n", t.dist_to_target_cm);
  if (std::isnan(t.dist_to_obstacle_cm)) {
    std::printf("  dist to obstacle     --\n");
  } else {
    std::printf("  dist to obstacle     %.2f cm\n", t.dist_to_obstacle_cm);
  }
  std::printf("  min clearance        %.2f cm\n", t.min_clearance_cm);
  std::printf("  smoothness           %.3f\n", t.smoothness);
  std::printf("  comp time            %.2f ms/cycle\n", t.comp_time_ms);
}

std::string table_path_for(const std::string& jsonl) {
  const auto dot = jsonl.rfind('.');
  const auto slash = jsonl.find_last_of('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return jsonl.substr(0, dot) + ".txt";
  return jsonl + ".txt";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MPPI and CaT-MPPI reaching benchmark for torque-controlled arms"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a single trial");
  std::string scenario;
  std::string mode_name = "vanilla";
  std::uint64_t seed = 0;
  std::string trace_out;
  int run_threads = 0;
  std::string run_set;
  run->add_option("-s,--scenario", scenario, "Scenario file or bundled index 1-6")->required();
  run->add_option("-m,--mode", mode_name, "vanilla or cat")->check(CLI::IsMember({"vanilla", "cat"}));
  run->add_option("--seed", seed, "Trial seed");
  run->add_option("--trace-out", trace_out, "Write the per-cycle trace as JSON");
  run->add_option("-j,--threads", run_threads, "Rollout worker threads")->check(CLI::PositiveNumber);
  run->add_option("--set", run_set, "JSON merge patch applied to the scenario, e.g. '{\"costs\":{\"collision_weight\":20}}'");

  auto* bench = app.add_subcommand("bench", "Run a benchmark campaign");
  std::string config_path;
  std::string out_path;
  int bench_seeds = 0;
  int bench_threads = 0;
  bool quiet = false;
  bench->add_option("-c,--config", config_path, "Campaign JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("-o,--out", out_path, "Results JSONL (overrides the config)");
  bench->add_option("--seeds", bench_seeds, "Seeds per scenario and mode")->check(CLI::PositiveNumber);
  bench->add_option("-j,--threads", bench_threads, "Rollout worker threads")->check(CLI::PositiveNumber);
  bench->add_flag("-q,--quiet", quiet, "No progress output");

  auto* validate = app.add_subcommand("validate", "Check robot, scenario or campaign files");
  std::vector<std::string> files;
  std::string kind = "auto";
  validate->add_option("files", files, "Files to check")->required();
  validate->add_option("--kind", kind, "robot, scenario, campaign or auto")
      ->check(CLI::IsMember({"auto", "robot", "scenario", "campaign"}));

  auto* table = app.add_subcommand("table", "Print the comparison table of a results file");
  std::string in_path;
  table->add_option("-i,--in", in_path, "Results JSONL")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const nlohmann::json patch = run_set.empty() ? nlohmann::json::object() : nlohmann::json::parse(run_set);
      const Scenario sc = load_scenario(resolve_scenario_path(scenario), patch);
      TrialOptions opts;
      opts.keep_trace = !trace_out.empty();
      if (run_threads > 0) opts.threads = run_threads;
      const TrialResult t = run_trial(sc, parse_mode(mode_name), seed, opts);
      print_trial(t);
      if (!trace_out.empty()) {
        std::ofstream out(trace_out);
        if (!out) throw std::runtime_error(trace_out + ": cannot open for writing");
        out << trace_to_json(t).dump(1) << '\n';
      }
    } else if (*bench) {
      CampaignConfig cfg = load_campaign_config(config_path);
      if (!out_path.empty()) cfg.out = out_path;
      if (bench_seeds > 0) cfg.seeds = bench_seeds;
      if (bench_threads > 0) cfg.threads = bench_threads;
      if (cfg.out.empty()) cfg.out = "results.jsonl";
      const CampaignResult r = run_campaign(cfg, quiet ? nullptr : &std::cerr);
      write_results(cfg.out, r);
      const std::string text = render_table(r.rows);
      std::ofstream(table_path_for(cfg.out)) << text;
      std::cout << text;
    } else if (*validate) {
      int bad = 0;
      for (const auto& f : files) {
        try {
          std::string k = kind;
          if (k == "auto") {
            const auto doc = nlohmann::json::parse(std::ifstream(f), nullptr, true, true);
            k = doc.contains("joints") ? "robot" : doc.contains("modes") || doc.contains("seeds") ? "campaign" : "scenario";
          }
          if (k == "robot") {
            const RobotModel m = load_robot_description(f);
            std::printf("ok  %s  robot '%s', %d joints, %zu capsules\n", f.c_str(), m.name().c_str(), m.dof(),
                        m.capsules().size());
          } else if (k == "scenario") {
            const Scenario sc = load_scenario(f);
            std::printf("ok  %s  scenario %s, %zu primitives, %zu pairs\n", f.c_str(), sc.id.c_str(),
                        sc.scene.tracks().size(), sc.pairs.pairs.size());
          } else {
            const CampaignConfig c = load_campaign_config(f);
            std::printf("ok  %s  campaign, %zu scenarios x %zu modes x %d seeds\n", f.c_str(), c.scenarios.size(),
                        c.modes.size(), c.seeds);
          }
        } catch (const std::exception& e) {
          std::fprintf(stderr, "bad %s  %s\n", f.c_str(), e.what());
          ++bad;
        }
      }
      return bad == 0 ? 0 : 1;
    } else if (*table) {
      std::cout << render_table(read_results(in_path).rows);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
