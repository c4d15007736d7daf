#include <cmath>
#include <set>

#include "doctest.h"
#include "lanecarto/geometry.hpp"
#include "lanecarto/rng.hpp"

using namespace lanecarto;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("vec2 algebra") {
  const Vec2 a{3.0, 4.0};
  CHECK(a.norm() == doctest::Approx(5.0));
  CHECK(a.squared_norm() == doctest::Approx(25.0));
  CHECK(a.dot({1.0, 2.0}) == doctest::Approx(11.0));
  CHECK(a.cross({1.0, 2.0}) == doctest::Approx(2.0));
  CHECK(a.normalized().norm() == doctest::Approx(1.0));
  CHECK(Vec2{0.0, 0.0}.normalized().norm() == 0.0);

  const Vec2 r = Vec2{1.0, 0.0}.rotated(kPi / 2.0);
  CHECK(r.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.y == doctest::Approx(1.0));

  const Vec2 n = Vec2{1.0, 0.0}.left_normal();
  CHECK(n.x == 0.0);
  CHECK(n.y == 1.0);
}

TEST_CASE("normalize_angle lands in (-pi, pi]") {
  CHECK(normalize_angle(0.0) == 0.0);
  CHECK(normalize_angle(kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(-kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(3.0 * kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(0.1 - 2.0 * kPi) == doctest::Approx(0.1));
  CHECK(normalize_angle(-7.5 * kPi) == doctest::Approx(0.5 * kPi));
  for (double a = -20.0; a <= 20.0; a += 0.37) {
    const double n = normalize_angle(a);
    CHECK(n > -kPi - 1e-15);
    CHECK(n <= kPi + 1e-15);
    CHECK(std::abs(std::remainder(n - a, 2.0 * kPi)) < 1e-9);
  }
}

TEST_CASE("polyline length, interpolation and tangent") {
  const Polyline pl{{0, 0}, {3, 0}, {3, 4}};
  CHECK(polyline_length(pl) == doctest::Approx(7.0));

  const Vec2 mid = polyline_point_at(pl, 3.0);
  CHECK(mid.x == doctest::Approx(3.0));
  CHECK(mid.y == doctest::Approx(0.0));

  const Vec2 past = polyline_point_at(pl, 100.0);  // clamped to the last vertex
  CHECK(past.x == doctest::Approx(3.0));
  CHECK(past.y == doctest::Approx(4.0));

  const Vec2 before = polyline_point_at(pl, -1.0);
  CHECK(before.x == doctest::Approx(0.0));
  CHECK(before.y == doctest::Approx(0.0));

  const Vec2 t0 = polyline_direction_at(pl, 1.0);
  CHECK(t0.x == doctest::Approx(1.0));
  CHECK(t0.y == doctest::Approx(0.0));
  const Vec2 t1 = polyline_direction_at(pl, 5.0);
  CHECK(t1.x == doctest::Approx(0.0));
  CHECK(t1.y == doctest::Approx(1.0));
}

TEST_CASE("project_onto_polyline") {
  const Polyline pl{{0, 0}, {10, 0}};

  auto p = project_onto_polyline(pl, {4.0, 1.0});
  CHECK(p.offset == doctest::Approx(4.0));
  CHECK(p.distance == doctest::Approx(1.0));
  CHECK(p.point.x == doctest::Approx(4.0));
  CHECK(p.point.y == doctest::Approx(0.0));

  auto beyond = project_onto_polyline(pl, {12.0, 2.0});
  CHECK(beyond.offset == doctest::Approx(10.0));
  CHECK(beyond.distance == doctest::Approx(std::sqrt(8.0)));

  CHECK(segment_distance({0, 0}, {0, 0}, {3, 4}) == doctest::Approx(5.0));
}

TEST_CASE("polygon area, centroid, containment") {
  const Polygon ccw{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  CHECK(polygon_area(ccw) == doctest::Approx(4.0));

  Polygon cw(ccw.rbegin(), ccw.rend());
  CHECK(polygon_area(cw) == doctest::Approx(-4.0));

  const Vec2 c = polygon_centroid(ccw);
  CHECK(c.x == doctest::Approx(1.0));
  CHECK(c.y == doctest::Approx(1.0));

  CHECK(point_in_polygon(ccw, {1.0, 1.0}));
  CHECK(point_in_polygon(ccw, {0.0, 1.0}));  // boundary counts as inside
  CHECK(point_in_polygon(ccw, {2.0, 2.0}));  // vertex counts as inside
  CHECK_FALSE(point_in_polygon(ccw, {2.5, 1.0}));
  CHECK(point_strictly_in_polygon(ccw, {1.0, 1.0}));
  CHECK_FALSE(point_strictly_in_polygon(ccw, {0.0, 1.0}));

  CHECK(polygon_is_simple(ccw));
  const Polygon bowtie{{0, 0}, {2, 2}, {2, 0}, {0, 2}};
  CHECK_FALSE(polygon_is_simple(bowtie));
}

TEST_CASE("directed hausdorff and resampling") {
  const Polyline a{{0, 0}, {5, 0}};
  const Polyline b{{0, 1}, {5, 1}};
  CHECK(directed_hausdorff(a, b) == doctest::Approx(1.0));

  const Polyline fine = resample_polyline(a, 0.5);
  CHECK(fine.size() >= 11);
  CHECK(fine.front().x == doctest::Approx(0.0));
  CHECK(fine.back().x == doctest::Approx(5.0));
  for (std::size_t i = 1; i < fine.size(); ++i) {
    CHECK((fine[i] - fine[i - 1]).norm() <= 0.5 + 1e-9);
  }
}

TEST_CASE("mat3 yaw-pitch-roll") {
  const Mat3 yaw90 = Mat3::from_ypr(kPi / 2.0, 0.0, 0.0);
  const Vec3 fwd = yaw90 * Vec3{1.0, 0.0, 0.0};
  CHECK(fwd.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fwd.y == doctest::Approx(1.0));
  CHECK(fwd.z == doctest::Approx(0.0));

  const Mat3 r = Mat3::from_ypr(0.4, -0.2, 0.1);
  CHECK(r.orthonormality_error() < 1e-12);

  // transpose is the inverse for rotations
  const Mat3 rt = r.transposed();
  const Mat3 id = r * rt;
  CHECK(id.orthonormality_error() < 1e-12);
  CHECK(id(0, 0) == doctest::Approx(1.0));
  CHECK(id(0, 1) == doctest::Approx(0.0).epsilon(1e-12));

  // pitch tips the forward axis downward in z for a +pitch convention check
  const Mat3 pitched = Mat3::from_ypr(0.0, 0.3, 0.0);
  const Vec3 f2 = pitched * Vec3{1.0, 0.0, 0.0};
  CHECK(f2.norm() == doctest::Approx(1.0));
}

TEST_CASE("rng streams are deterministic and splittable") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(c.below(7) < 7);
  }

  CHECK(fork_seed(1, 2) == fork_seed(1, 2));
  CHECK(fork_seed(1, 2) != fork_seed(1, 3));
  CHECK(fork_seed(1, 2) != fork_seed(2, 2));

  // distinct salts give streams that do not collide on their first draws
  std::set<std::uint64_t> firsts;
  for (std::uint64_t salt = 0; salt < 64; ++salt) {
    firsts.insert(Rng(fork_seed(7, salt)).next_u64());
  }
  CHECK(firsts.size() == 64);
}

TEST_CASE("fnv1a64 known vectors") {
  CHECK(fnv1a64("", 0) == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar", 6) == 0x85944171f73967e8ULL);
}

TEST_SUITE_END();
