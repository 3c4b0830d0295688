#include <cmath>
#include <random>

#include <doctest.h>

#include "catmppi/cat.hpp"
#include "catmppi/error.hpp"
#include "catmppi/mppi.hpp"

using namespace catmppi;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
  std::uniform_real_distribution<double> uni(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uni(rng);
  return m;
}

}  // namespace

TEST_CASE("stage violation is the collision margin sum") {
  CHECK(violation(0.0) == 0.0);
  CHECK(violation(0.02) == 0.02);
}

TEST_CASE("hazard examples") {
  CHECK(hazard(0.0, 0.5, 0.3) == 0.0);
  CHECK(hazard(0.5, 0.5, 0.3) == doctest::Approx(0.3));
  CHECK(hazard(1.0, 0.5, 0.3) == doctest::Approx(0.3));
  CHECK(hazard(0.25, 0.5, 0.3) == doctest::Approx(0.15));
  CHECK_THROWS_AS(hazard(0.1, 0.0, 0.3), std::invalid_argument);
}

TEST_CASE("normalizer update") {
  CaTConfig cfg;
  cfg.tau_c = 0.0;
  CHECK(update_cmax(CaTState::initial(cfg), 4.0, cfg).c_max == 4.0);
  cfg.tau_c = 0.5;
  CaTState s{2.0, 0.0, 0.0};
  CHECK(update_cmax(s, 4.0, cfg).c_max == doctest::Approx(3.0));
}

TEST_CASE("normalizer decays geometrically to the floor") {
  CaTConfig cfg;
  cfg.tau_c = 0.9;
  cfg.epsilon = 1e-6;
  CaTState s{1.0, 0.0, 0.0};
  for (int k = 1; k <= 200; ++k) {
    s = update_cmax(s, 0.0, cfg);
    CHECK(s.c_max == doctest::Approx(std::max(std::pow(0.9, k), 1e-6)).epsilon(1e-9));
  }
  CHECK(s.c_max == cfg.epsilon);
}

TEST_CASE("survival examples") {
  CHECK((survival(Eigen::VectorXd::Zero(5)).array() == 1.0).all());
  Eigen::VectorXd h = Eigen::VectorXd::Zero(5);
  h[0] = 1.0;
  CHECK((survival(h).array() == 0.0).all());
  CHECK(survival(Eigen::VectorXd::Constant(5, 0.1))[2] == doctest::Approx(0.729));
}

TEST_CASE("survival is monotone and bounded") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double p_max = uni(rng);
    Eigen::VectorXd h(26);
    for (Eigen::Index t = 0; t < h.size(); ++t) h[t] = hazard(3.0 * uni(rng) * (uni(rng) < 0.5), 1.0, p_max);
    const Eigen::VectorXd s = survival(h);
    bool ok = s[0] <= 1.0 && s[0] >= 0.0;
    for (Eigen::Index t = 1; t < s.size(); ++t) ok = ok && s[t] <= s[t - 1] && s[t] >= 0.0;
    REQUIRE(ok);
  }
}

TEST_CASE("baselines: first batch") {
  CaTConfig cfg;
  cfg.tau_b = 0.9;
  const CaTState s = update_baselines(CaTState::initial(cfg), 5.0, 2.0, cfg);
  CHECK(s.b == doctest::Approx(5.0 + cfg.epsilon).epsilon(1e-15));
  CHECK(s.b_terminal == doctest::Approx(2.0 + cfg.epsilon).epsilon(1e-15));
}

TEST_CASE("baselines follow a decreasing maximum without dropping below it") {
  CaTConfig cfg;
  cfg.tau_b = 0.9;
  cfg.epsilon = 1e-3;
  CaTState s = CaTState::initial(cfg);
  double ref = 0.0;
  for (int k = 0; k < 300; ++k) {
    const double bar = 10.0 * std::exp(-0.02 * k);
    const double prev = s.b;
    s = update_baselines(s, bar, bar, cfg);
    ref = std::max(0.9 * ref + 0.1 * bar, bar) + 1e-3;
    CHECK(s.b == doctest::Approx(ref).epsilon(1e-12));
    CHECK(s.b >= bar + cfg.epsilon);
    if (k > 0) CHECK(s.b <= prev + cfg.epsilon);
  }
  CHECK(s.b < 0.5);
}

TEST_CASE("baselines under a constant maximum reach the EMA fixed point") {
  CaTConfig cfg;
  cfg.tau_b = 0.95;
  cfg.epsilon = 1e-6;
  CaTState s = CaTState::initial(cfg);
  for (int k = 0; k < 2000; ++k) s = update_baselines(s, 3.0, 1.0, cfg);
  CHECK(s.b == doctest::Approx(3.0 + cfg.epsilon / (1.0 - cfg.tau_b)).epsilon(1e-12));
  CHECK(s.b_terminal == doctest::Approx(1.0 + cfg.epsilon / (1.0 - cfg.tau_b)).epsilon(1e-12));
}

TEST_CASE("score examples") {
  const Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(4, 1.0, 2.5);
  const double gamma = 0.9;
  double ref = 0.0;
  for (int t = 0; t < 4; ++t) ref -= std::pow(gamma, t) * r[t];
  ref -= std::pow(gamma, 4) * 3.0;
  CHECK(cat_score(Eigen::VectorXd::Ones(5), r, 3.0, gamma) == doctest::Approx(ref).epsilon(1e-14));
  CHECK(cat_score(Eigen::VectorXd::Zero(5), r, 3.0, gamma) == 0.0);
  CHECK_THROWS_AS(cat_score(Eigen::VectorXd::Ones(4), r, 3.0, gamma), DimensionError);
}

TEST_CASE("batch scores match direct summation") {
  std::mt19937_64 rng(37);
  CaTConfig cfg;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index K = 16, T = 12;
    const Eigen::MatrixXd task = random_matrix(rng, K, T, 0.0, 5.0);
    const Eigen::VectorXd term = random_matrix(rng, K, 1, 0.0, 8.0);
    Eigen::MatrixXd viol = random_matrix(rng, K, T + 1, -0.05, 0.05).cwiseMax(0.0);
    CaTState state{0.01 * (trial + 1), 2.0 * trial, 1.0 * trial};
    const CaTState before = state;
    Eigen::MatrixXd surv;
    const Eigen::VectorXd scores = cat_scores(task, term, viol, 0.97, cfg, state, &surv);

    const double c_max = std::max(cfg.tau_c * before.c_max + (1 - cfg.tau_c) * viol.maxCoeff(), cfg.epsilon);
    const double b = std::max(cfg.tau_b * before.b + (1 - cfg.tau_b) * task.maxCoeff(), task.maxCoeff()) + cfg.epsilon;
    const double bt =
        std::max(cfg.tau_b * before.b_terminal + (1 - cfg.tau_b) * term.maxCoeff(), term.maxCoeff()) + cfg.epsilon;
    CHECK(state.c_max == doctest::Approx(c_max).epsilon(1e-14));
    CHECK(state.b == doctest::Approx(b).epsilon(1e-14));
    CHECK(state.b_terminal == doctest::Approx(bt).epsilon(1e-14));
    for (Eigen::Index k = 0; k < K; ++k) {
      double s = 1.0, g = 1.0, ref = 0.0;
      for (Eigen::Index t = 0; t <= T; ++t) {
        s *= 1.0 - cfg.p_max * std::min(viol(k, t) / c_max, 1.0);
        CHECK(surv(k, t) == doctest::Approx(s).epsilon(1e-13));
        ref -= g * s * (t < T ? b - task(k, t) : bt - term[k]);
        if (t < T) CHECK(b - task(k, t) >= cfg.epsilon * (1 - 1e-9));
        g *= 0.97;
      }
      CHECK(scores[k] == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("without terminations the weights equal the task-cost weights") {
  std::mt19937_64 rng(41);
  CaTConfig cfg;
  cfg.p_max = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index K = 64, T = 20;
    const Eigen::MatrixXd task = random_matrix(rng, K, T, 0.0, 3.0);
    const Eigen::VectorXd term = random_matrix(rng, K, 1, 0.0, 3.0);
    const Eigen::MatrixXd viol = random_matrix(rng, K, T + 1, 0.0, 0.1);
    CaTState state = CaTState::initial(cfg);
    const double beta = 0.5;
    const Eigen::VectorXd w_cat = cat_weights(cat_scores(task, term, viol, 0.99, cfg, state), beta);
    const Eigen::VectorXd w_van = compute_weights(score_rollouts(task, term, 0.99), beta);
    CHECK((w_cat - w_van).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("config validation") {
  CaTConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.p_max = 0.0;
  CHECK_NOTHROW(cfg.validate());
  cfg.p_max = 1.2;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = CaTConfig{};
  cfg.tau_c = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = CaTConfig{};
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
