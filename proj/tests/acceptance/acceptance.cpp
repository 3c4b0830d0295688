// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. All tolerances are fixed below.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "catmppi/cat.hpp"
#include "catmppi/mppi.hpp"
#include "catmppi/runner.hpp"
#include "catmppi/scenario.hpp"
#include "oracles.hpp"

using namespace catmppi;

namespace {

constexpr int kSeeds = 10;
constexpr double kCompTimeRatio = 2.0;
constexpr double kReductionTol = 1e-9;
constexpr double kSegmentTol = 1e-9;
constexpr double kCapsuleTol = 1e-3;
constexpr double kRneaTol = 1e-6;
constexpr double kSe3Tol = 1e-8;
constexpr double kWeightTol = 1e-12;
constexpr double kThreadTol = 1e-12;
constexpr double kSmoothnessRatio = 2.0;
constexpr int kSc6MinClear = 9;
// Vanilla reference weight: the collision term enters the cost unscaled, as
// the raw violation does in CaT mode.
constexpr double kUnitCollisionWeight = 1.0;

struct Line {
  int id;
  bool pass;
  std::string text;
};

std::vector<Line> g_lines;

void report(int id, bool pass, const std::string& text) {
  g_lines.push_back({id, pass, text});
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", text.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

using TrialKey = std::pair<std::string, Mode>;
std::map<TrialKey, std::vector<TrialResult>> g_trials;

void run_scenarios_1_to_5() {
  for (int s = 1; s <= 5; ++s) {
    const Scenario sc = load_scenario(resolve_scenario_path(std::to_string(s)));
    for (Mode mode : {Mode::kVanilla, Mode::kCaT}) {
      auto& out = g_trials[{sc.id, mode}];
      for (int seed = 0; seed < kSeeds; ++seed) {
        TrialOptions opts;
        opts.threads = 1;
        out.push_back(run_trial(sc, mode, static_cast<std::uint64_t>(seed), opts));
        const auto& t = out.back();
        std::cerr << "  sc" << s << " " << to_string(mode) << " seed " << seed << ": " << to_string(t.outcome)
                  << " target " << t.dist_to_target_cm << " cm, clearance " << t.min_clearance_cm << " cm, "
                  << t.comp_time_ms << " ms/cycle\n";
      }
    }
  }
}

void criterion1() {
  int successes = 0, total = 0, bad_clearance = 0;
  std::string failures;
  for (const auto& [key, trials] : g_trials) {
    for (const auto& t : trials) {
      ++total;
      if (t.success) ++successes;
      if (t.success && !(t.min_clearance_cm > 0.0)) ++bad_clearance;
      if (!t.success || !(t.min_clearance_cm > 0.0)) {
        failures += " sc" + key.first + "/" + to_string(key.second) + "/seed" + std::to_string(t.seed) + "=" +
                    to_string(t.outcome);
      }
    }
  }
  const bool pass = total == 100 && successes == total && bad_clearance == 0;
  report(1, pass,
         "scenarios 1-5, 10 seeds, both modes: " + std::to_string(successes) + "/" + std::to_string(total) +
             " successes, " + std::to_string(bad_clearance) + " successful trials with clearance <= 0" +
             (failures.empty() ? "" : " [" + failures + " ]"));
}

void criterion2() {
  const Scenario cat_sc = load_scenario(resolve_scenario_path("6"));
  const Scenario unit_sc = load_scenario(resolve_scenario_path("6"), {{"costs", {{"collision_weight", kUnitCollisionWeight}}}});
  int cat_reached = 0, cat_clear = 0, unit_collided = 0, bundled_collided = 0;
  double cat_min = 1e9, unit_min = 1e9, bundled_min = 1e9;
  for (int seed = 0; seed < kSeeds; ++seed) {
    TrialOptions opts;
    opts.threads = 1;
    const auto s = static_cast<std::uint64_t>(seed);
    const TrialResult c = run_trial(cat_sc, Mode::kCaT, s, opts);
    cat_reached += c.success ? 1 : 0;
    cat_clear += c.min_clearance_cm > 0.0 ? 1 : 0;
    cat_min = std::min(cat_min, c.min_clearance_cm);
    const TrialResult u = run_trial(unit_sc, Mode::kVanilla, s, opts);
    unit_collided += u.min_clearance_cm <= 0.0 ? 1 : 0;
    unit_min = std::min(unit_min, u.min_clearance_cm);
    const TrialResult b = run_trial(cat_sc, Mode::kVanilla, s, opts);
    bundled_collided += b.min_clearance_cm <= 0.0 ? 1 : 0;
    bundled_min = std::min(bundled_min, b.min_clearance_cm);
    std::cerr << "  sc6 seed " << seed << ": cat " << to_string(c.outcome) << " " << c.min_clearance_cm
              << " cm; vanilla(w=1) " << to_string(u.outcome) << " " << u.min_clearance_cm << " cm; vanilla(w="
              << cat_sc.weights.collision_weight << ") " << to_string(b.outcome) << " " << b.min_clearance_cm
              << " cm\n";
  }
  const double ratio = cat_sc.weights.collision_weight / kUnitCollisionWeight;
  const bool cat_ok = cat_reached == 0 && cat_clear >= kSc6MinClear;
  const bool vanilla_ok = unit_collided >= 1;
  std::ostringstream s;
  s << "scenario 6: cat reached goal " << cat_reached << "/10, clear " << cat_clear << "/10 (min "
    << fmt("%.2f", cat_min) << " cm); vanilla at unit weight collided " << unit_collided << "/10 (min "
    << fmt("%.2f", unit_min) << " cm); vanilla at bundled weight " << cat_sc.weights.collision_weight << " ("
    << ratio << "x) collided " << bundled_collided << "/10 (min " << fmt("%.2f", bundled_min) << " cm)";
  report(2, cat_ok && vanilla_ok, s.str());
}

void criterion3() {
  bool pass = true;
  std::ostringstream s;
  s << "mean ms/cycle sc1 vs sc5:";
  for (Mode mode : {Mode::kVanilla, Mode::kCaT}) {
    const auto mean_ct = [&](const std::string& id) {
      double sum = 0.0, cycles = 0.0;
      for (const auto& t : g_trials.at({id, mode})) {
        sum += t.comp_time_ms * static_cast<double>(t.cycles);
        cycles += static_cast<double>(t.cycles);
      }
      return sum / cycles;
    };
    const double a = mean_ct("1"), b = mean_ct("5");
    const double ratio = std::max(a, b) / std::min(a, b);
    pass = pass && ratio < kCompTimeRatio;
    s << " " << to_string(mode) << " " << fmt("%.2f", a) << " / " << fmt("%.2f", b) << " (ratio " << fmt("%.3f", ratio)
      << ")";
  }
  report(3, pass, s.str());
}

void criterion4() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> task(0.0, 4.0), viol(0.0, 0.2), beta_d(0.01, 2.0);
  CaTConfig cfg;
  cfg.p_max = 0.0;
  double worst = 0.0;
  for (int b = 0; b < 100; ++b) {
    const Eigen::Index K = 128, T = 25;
    Eigen::MatrixXd c(K, T), v(K, T + 1);
    Eigen::VectorXd term(K);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = task(rng);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = viol(rng) * (i % 3 == 0);
    for (Eigen::Index i = 0; i < K; ++i) term[i] = task(rng);
    CaTState state = CaTState::initial(cfg);
    const double beta = beta_d(rng);
    const Eigen::VectorXd wc = cat_weights(cat_scores(c, term, v, 0.99, cfg, state), beta);
    const Eigen::VectorXd wv = compute_weights(score_rollouts(c, term, 0.99), beta);
    worst = std::max(worst, (wc - wv).cwiseAbs().maxCoeff());
  }

  // Same property through the controller: p_max = 0 against vanilla with the
  // collision term switched off, over several receding-horizon cycles.
  const Scenario sc = load_scenario(resolve_scenario_path("4"), {{"controller", {{"rollouts", 64}, {"horizon", 15}}}});
  CaTConfig off = sc.cat;
  off.p_max = 0.0;
  CostWeights no_coll = sc.weights;
  no_coll.collision_weight = 0.0;
  Controller cat(*sc.robot, sc.mppi, sc.weights, off, Mode::kCaT, sc.sigma);
  Controller van(*sc.robot, sc.mppi, no_coll, sc.cat, Mode::kVanilla, sc.sigma);
  const SceneSnapshot snap = snapshot_at(sc.scene, 0.0);
  State x = sc.start;
  double worst_ctrl = 0.0;
  for (int cyc = 0; cyc < 20; ++cyc) {
    const StepResult rc = cat.control_step(x, snap, sc.pairs, sc.goal);
    van.control_step(x, snap, sc.pairs, sc.goal);
    worst_ctrl = std::max(worst_ctrl, (cat.last_batch().weights - van.last_batch().weights).cwiseAbs().maxCoeff());
    x = rc.reference;
  }
  const bool pass = worst <= kReductionTol && worst_ctrl <= kReductionTol;
  report(4, pass,
         "p_max = 0: max |w_cat - w_vanilla| " + fmt("%.3g", worst) + " over 100 random batches, " +
             fmt("%.3g", worst_ctrl) + " over 20 controller cycles (tol 1e-9)");
}

void criterion5() {
  std::mt19937_64 rng(77);
  std::ostringstream s;
  bool pass = true;

  double seg = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Segment a{oracle::random_point(rng, 1.0), oracle::random_point(rng, 1.0)};
    const Segment b{oracle::random_point(rng, 1.0), oracle::random_point(rng, 1.0)};
    seg = std::max(seg, std::abs(segment_segment_distance(a, b).distance - oracle::segment_distance_grid(a, b)));
  }
  pass = pass && seg <= kSegmentTol;
  s << "segment " << fmt("%.2g", seg);

  double cap = 0.0;
  std::uniform_real_distribution<double> rad(0.02, 0.3);
  for (int i = 0; i < 200; ++i) {
    const Capsule a{oracle::random_point(rng, 1.0), oracle::random_point(rng, 1.0), rad(rng)};
    const Capsule b{oracle::random_point(rng, 1.0), oracle::random_point(rng, 1.0), rad(rng)};
    cap = std::max(cap, std::abs(capsule_capsule_clearance(a, b).value -
                                 oracle::capsule_capsule_sampled(a, b, static_cast<std::uint64_t>(i))));
  }
  pass = pass && cap <= kCapsuleTol;
  s << ", capsule " << fmt("%.2g", cap);

  double rn = 0.0;
  std::uniform_real_distribution<double> uni(-3.0, 3.0), pos(0.2, 2.0);
  for (int i = 0; i < 1000; ++i) {
    oracle::TwoLink p{pos(rng), pos(rng), pos(rng), 0.5 * pos(rng), 0.5 * pos(rng), 0.1 * pos(rng), 0.1 * pos(rng), 9.81};
    const RobotModel m = oracle::make_two_link(p);
    const Eigen::Vector2d q(uni(rng), uni(rng)), v(uni(rng), uni(rng)), a(uni(rng), uni(rng));
    rn = std::max(rn, (rnea(m, q, v, a) - oracle::two_link_torque(p, q, v, a)).cwiseAbs().maxCoeff());
  }
  pass = pass && rn <= kRneaTol;
  s << ", rnea " << fmt("%.2g", rn);

  double se = 0.0;
  std::uniform_real_distribution<double> ang(0.0, M_PI - 0.1);
  for (int i = 0; i < 1000; ++i) {
    Vector6d xi;
    xi.head<3>() = oracle::random_point(rng, 2.0);
    xi.tail<3>() = oracle::random_unit(rng) * ang(rng);
    se = std::max(se, (se3_log(se3_exp(xi)) - xi).norm());
  }
  pass = pass && se <= kSe3Tol;
  s << ", se3 " << fmt("%.2g", se);

  // Costs and shifts sit on a 2^-20 grid so the shifted batch is exact.
  double wn = 0.0, ws = 0.0;
  std::uniform_real_distribution<double> cost(-100.0, 100.0), shift(-1e3, 1e3), lbeta(-3.0, 1.0);
  const auto grid = [](double x) { return std::ldexp(std::round(std::ldexp(x, 20)), -20); };
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd L(256);
    for (Eigen::Index k = 0; k < L.size(); ++k) L[k] = grid(cost(rng));
    const double beta = std::pow(10.0, lbeta(rng));
    const Eigen::VectorXd w = compute_weights(L, beta);
    wn = std::max(wn, std::abs(w.sum() - 1.0));
    const Eigen::VectorXd w2 = compute_weights((L.array() + grid(shift(rng))).matrix(), beta);
    ws = std::max(ws, (w - w2).cwiseAbs().maxCoeff());
  }
  pass = pass && wn <= kWeightTol && ws <= kWeightTol;
  s << ", weight sum " << fmt("%.2g", wn) << ", shift " << fmt("%.2g", ws);

  int surv_bad = 0;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double p_max = u01(rng);
    const double c_max = 0.01 + u01(rng);
    Eigen::VectorXd h(26);
    for (Eigen::Index t = 0; t < h.size(); ++t) h[t] = hazard(u01(rng) < 0.4 ? 0.0 : 2.0 * u01(rng), c_max, p_max);
    const Eigen::VectorXd sv = survival(h);
    bool ok = sv[0] <= 1.0 && sv[0] >= 1.0 - p_max - 1e-15;
    for (Eigen::Index t = 1; t < sv.size(); ++t) ok = ok && sv[t] <= sv[t - 1] && sv[t] >= 0.0;
    surv_bad += ok ? 0 : 1;
  }
  pass = pass && surv_bad == 0;
  s << ", survival violations " << surv_bad << "/10000";
  report(5, pass, "oracle suites: " + s.str());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json without_wall_time(const std::string& jsonl) {
  nlohmann::json lines = nlohmann::json::array();
  std::istringstream in(jsonl);
  std::string line;
  while (std::getline(in, line)) {
    nlohmann::json j = nlohmann::json::parse(line);
    j.erase("comp_time_ms");
    if (j.contains("campaign")) j["campaign"].erase("threads");
    lines.push_back(j);
  }
  return lines;
}

double max_numeric_diff(const nlohmann::json& a, const nlohmann::json& b, bool& shape_ok) {
  if (a.type() != b.type()) {
    if (a.is_number() && b.is_number()) return std::abs(a.get<double>() - b.get<double>());
    shape_ok = false;
    return 0.0;
  }
  if (a.is_number_float()) return std::abs(a.get<double>() - b.get<double>());
  if (a.is_array() || a.is_object()) {
    if (a.size() != b.size()) {
      shape_ok = false;
      return 0.0;
    }
    double m = 0.0;
    if (a.is_array()) {
      for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, max_numeric_diff(a[i], b[i], shape_ok));
    } else {
      for (auto it = a.begin(); it != a.end(); ++it) {
        if (!b.contains(it.key())) {
          shape_ok = false;
          continue;
        }
        m = std::max(m, max_numeric_diff(it.value(), b[it.key()], shape_ok));
      }
    }
    return m;
  }
  if (a != b) shape_ok = false;
  return 0.0;
}

void criterion6() {
  namespace fs = std::filesystem;
  const fs::path work = CATMPPI_ACCEPT_WORK;
  fs::create_directories(work);
  const fs::path cfg = work / "determinism.json";
  {
    std::ofstream out(cfg);
    out << R"({"scenarios": ["2", "4"], "modes": ["vanilla", "cat"], "seeds": 2, "max_duration": 1.0})" << "\n";
  }
  const auto bench = [&](const std::string& name, int threads) {
    const fs::path out = work / name;
    const std::string cmd = std::string("\"") + CATMPPI_CLI_PATH + "\" bench -q -c \"" + cfg.string() + "\" -o \"" +
                            out.string() + "\" -j " + std::to_string(threads) + " > /dev/null";
    const int rc = std::system(cmd.c_str());
    return std::make_pair(rc, read_file(out.string()));
  };
  const auto [rc1, a] = bench("run_a.jsonl", 1);
  const auto [rc2, b] = bench("run_b.jsonl", 1);
  const auto [rc3, p] = bench("run_par.jsonl", 2);
  const nlohmann::json ja = without_wall_time(a), jb = without_wall_time(b), jp = without_wall_time(p);
  const bool identical = ja.dump() == jb.dump();
  bool shape_ok = true;
  const double diff = max_numeric_diff(ja, jp, shape_ok);
  const bool pass = rc1 == 0 && rc2 == 0 && rc3 == 0 && !ja.empty() && identical && shape_ok && diff <= kThreadTol;
  report(6, pass,
         std::string("bench rerun ") + (identical ? "bitwise identical" : "DIFFERS") + " (" +
             std::to_string(ja.size()) + " records); 1 vs 2 threads max diff " + fmt("%.3g", diff) +
             (shape_ok ? "" : ", record structure differs"));
}

void criterion7() {
  bool pass = true;
  std::ostringstream s;
  s << "smoothness cat/vanilla on matched seeds:";
  for (int sc = 2; sc <= 5; ++sc) {
    const auto& van = g_trials.at({std::to_string(sc), Mode::kVanilla});
    const auto& cat = g_trials.at({std::to_string(sc), Mode::kCaT});
    double sv = 0.0, sc_sum = 0.0, lo = 1e9, hi = 0.0;
    for (std::size_t i = 0; i < van.size(); ++i) {
      sv += van[i].smoothness;
      sc_sum += cat[i].smoothness;
      const double r = cat[i].smoothness / van[i].smoothness;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    const double ratio = sc_sum / sv;
    pass = pass && ratio <= kSmoothnessRatio && ratio >= 1.0 / kSmoothnessRatio;
    s << " sc" << sc << " " << fmt("%.2f", ratio) << " (per seed " << fmt("%.2f", lo) << ".." << fmt("%.2f", hi) << ")";
  }
  report(7, pass, s.str());
}

}  // namespace

int main() {
  std::printf("catmppi %s acceptance\n", version().c_str());
  try {
    criterion4();
    criterion5();
    criterion6();
    std::cerr << "running scenarios 1-5\n";
    run_scenarios_1_to_5();
    criterion1();
    criterion3();
    criterion7();
    std::cerr << "running scenario 6\n";
    criterion2();
  } catch (const std::exception& e) {
    std::printf("error: %s\n", e.what());
    return 2;
  }
  std::sort(g_lines.begin(), g_lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  std::printf("\nsummary\n");
  int failed = 0;
  for (const auto& l : g_lines) {
    std::printf("criterion %d: %s\n", l.id, l.pass ? "PASS" : "FAIL");
    failed += l.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
