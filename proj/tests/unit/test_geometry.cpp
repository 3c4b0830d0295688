#include <cmath>
#include <random>

#include <doctest.h>

#include "catmppi/error.hpp"
#include "catmppi/geometry.hpp"
#include "oracles.hpp"

using namespace catmppi;

TEST_CASE("crossing perpendicular segments touch") {
  const auto r = segment_segment_distance({{-1, 0, 0}, {1, 0, 0}}, {{0, -1, 0}, {0, 1, 0}});
  CHECK(r.distance == doctest::Approx(0.0));
  CHECK(r.u == doctest::Approx(0.5));
  CHECK(r.v == doctest::Approx(0.5));
}

TEST_CASE("parallel unit segments one apart") {
  const auto r = segment_segment_distance({{0, 0, 0}, {1, 0, 0}}, {{0, 1, 0}, {1, 1, 0}});
  CHECK(r.distance == doctest::Approx(1.0));
  CHECK(r.u == 0.0);
}

TEST_CASE("parallel segments that do not overlap along the axis") {
  const auto r = segment_segment_distance({{0, 0, 0}, {1, 0, 0}}, {{3, 1, 0}, {2, 1, 0}});
  CHECK(r.distance == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("degenerate segments act as points") {
  const auto r = segment_segment_distance({{0, 0, 0}, {0, 0, 0}}, {{1, -1, 2}, {1, 1, 2}});
  CHECK(r.distance == doctest::Approx(std::sqrt(5.0)));
  const auto p = segment_segment_distance({{0, 0, 0}, {0, 0, 0}}, {{0, 0, 1}, {0, 0, 1}});
  CHECK(p.distance == doctest::Approx(1.0));
}

TEST_CASE("segment distance agrees with the grid oracle") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 40; ++i) {
    const Segment s1{oracle::random_point(rng, 1.0), oracle::random_point(rng, 1.0)};
    const Segment s2{oracle::random_point(rng, 1.0), oracle::random_point(rng, 1.0)};
    const auto r = segment_segment_distance(s1, s2);
    CHECK(std::abs(r.distance - oracle::segment_distance_grid(s1, s2, 401)) < 1e-9);
    CHECK(std::abs((r.point_a - r.point_b).norm() - r.distance) < 1e-12);
    CHECK((r.point_a - s1.at(r.u)).norm() < 1e-12);
    CHECK((r.point_b - s2.at(r.v)).norm() < 1e-12);
  }
}

TEST_CASE("capsule clearance examples") {
  const Capsule a{{0, 0, 0}, {1, 0, 0}, 0.1};
  const Capsule b{{0, 0.5, 0}, {1, 0.5, 0}, 0.1};
  CHECK(capsule_capsule_clearance(a, b).value == doctest::Approx(-0.3));
  CHECK(capsule_capsule_clearance(a, a).value == doctest::Approx(0.2));
}

TEST_CASE("capsule witnesses lie on the surfaces") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Capsule a{oracle::random_point(rng, 1.0), oracle::random_point(rng, 1.0), 0.05 + 0.1 * (i % 3)};
    const Capsule b{oracle::random_point(rng, 1.0), oracle::random_point(rng, 1.0), 0.1};
    const auto c = capsule_capsule_clearance(a, b);
    CHECK(std::abs(oracle::point_segment_distance(c.witness_a, a.p0, a.p1) - a.radius) < 1e-9);
    CHECK(std::abs(oracle::point_segment_distance(c.witness_b, b.p0, b.p1) - b.radius) < 1e-9);
    if (c.value < 0.0) CHECK(std::abs((c.witness_a - c.witness_b).norm() + c.value) < 1e-9);
  }
}

TEST_CASE("capsule clearance agrees with the sampled oracle") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 50; ++i) {
    const Capsule a{oracle::random_point(rng, 1.0), oracle::random_point(rng, 1.0), 0.1};
    const Capsule b{oracle::random_point(rng, 1.0), oracle::random_point(rng, 1.0), 0.2};
    CHECK(std::abs(capsule_capsule_clearance(a, b).value - oracle::capsule_capsule_sampled(a, b, i, 20000)) < 1e-3);
  }
}

TEST_CASE("posed capsules equal their world-frame copies") {
  const Capsule a{{0, 0, -0.2}, {0, 0, 0.2}, 0.05};
  const Capsule b{{-0.3, 0, 0}, {0.3, 0, 0}, 0.07};
  const Pose pa = make_pose({0.1, 0.2, 0.3}, {0.4, 0.1, -0.2});
  const Pose pb = make_pose({0.4, -0.1, 0.2}, {-0.3, 0.6, 0.9});
  CHECK(capsule_capsule_clearance(a, pa, b, pb).value ==
        doctest::Approx(capsule_capsule_clearance(a.transformed(pa), b.transformed(pb)).value).epsilon(1e-12));
}

TEST_CASE("capsule above a box face") {
  const Box box{{0.5, 0.5, 0.5}, Pose::Identity()};
  const Capsule c{{-0.2, 0, 0.7}, {0.2, 0, 0.7}, 0.05};
  CHECK(capsule_box_clearance(c, box).value == doctest::Approx(-0.15));
}

TEST_CASE("capsule through the box centre overlaps") {
  const Box box{{0.3, 0.2, 0.1}, make_pose({1, 1, 1}, {0.2, 0.3, 0.4})};
  const Capsule c{box.pose * Eigen::Vector3d(-1, 0, 0), box.pose * Eigen::Vector3d(1, 0, 0), 0.02};
  const auto r = capsule_box_clearance(c, box);
  CHECK(r.value > 0.0);
  CHECK(r.value == doctest::Approx(0.12));
}

TEST_CASE("capsule-box clearance agrees with the sampled oracle when disjoint") {
  std::mt19937_64 rng(17);
  int checked = 0;
  for (int i = 0; i < 400 && checked < 60; ++i) {
    const Box box{Eigen::Vector3d(0.1, 0.2, 0.3), make_pose(oracle::random_point(rng, 0.2), oracle::random_point(rng, 3.0))};
    const Capsule c{oracle::random_point(rng, 1.0), oracle::random_point(rng, 1.0), 0.05};
    const double ref = oracle::capsule_box_sampled(c, box, i, 20000);
    if (ref > -1e-3) continue;
    ++checked;
    CHECK(std::abs(capsule_box_clearance(c, box).value - ref) < 1e-3);
  }
  CHECK(checked == 60);
}

TEST_CASE("segment-box distance is exact") {
  const Eigen::Vector3d h(0.5, 0.25, 0.1);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 200; ++i) {
    const Segment s{oracle::random_point(rng, 1.5), oracle::random_point(rng, 1.5)};
    const auto r = segment_aligned_box_distance(s, h);
    const Box box{h, Pose::Identity()};
    double ref = 1e9;
    for (int k = 0; k <= 20000; ++k) ref = std::min(ref, oracle::point_box_distance(s.at(k / 20000.0), box));
    CHECK(r.distance <= ref + 1e-12);
    CHECK(r.distance > ref - 1e-4);
    CHECK(std::abs(oracle::point_box_distance(r.segment_point, box) - r.distance) < 1e-9);
  }
}

TEST_CASE("bounding sphere gap never exceeds the true separation") {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 500; ++i) {
    const Capsule a{oracle::random_point(rng, 1.0), oracle::random_point(rng, 1.0), 0.05};
    const Capsule b{oracle::random_point(rng, 1.0), oracle::random_point(rng, 1.0), 0.08};
    CHECK(bounding_sphere_gap(a, b) <= -capsule_capsule_clearance(a, b).value + 1e-12);
    const Box box{Eigen::Vector3d(0.1, 0.3, 0.2), make_pose(oracle::random_point(rng, 1.0), oracle::random_point(rng, 3.0))};
    CHECK(bounding_sphere_gap(a, box) <= -capsule_box_clearance(a, box).value + 1e-12);
  }
}

TEST_CASE("invalid primitives are rejected") {
  CHECK_THROWS_AS((Capsule{{0, 0, 0}, {1, 0, 0}, 0.0}.validate()), ValidationError);
  CHECK_THROWS_AS((Capsule{{0, 0, 0}, {NAN, 0, 0}, 0.1}.validate()), ValidationError);
  CHECK_NOTHROW((Capsule{{0, 0, 0}, {0, 0, 0}, 0.1}.validate()));
  CHECK_THROWS_AS((Box{{0.1, -0.1, 0.1}, Pose::Identity()}.validate()), ValidationError);
}
