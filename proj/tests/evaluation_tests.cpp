#include <algorithm>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "lanecarto/evaluation.hpp"
#include "lanecarto/rng.hpp"
#include "test_support.hpp"

using namespace lanecarto;
using lanecarto::test::make_straight_centerline;

namespace {

Vec2 rotate(const Vec2& p, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

Vec2 mean_of(const std::vector<Vec2>& pts) {
  Vec2 m{0, 0};
  for (const Vec2& p : pts) m = m + p;
  return m * (1.0 / pts.size());
}

double alignment_cost(const std::vector<Vec2>& est, const std::vector<Vec2>& gt,
                      double theta) {
  // closed-form optimal translation for a fixed rotation
  const Vec2 t = mean_of(gt) - rotate(mean_of(est), theta);
  double cost = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    cost += (rotate(est[i], theta) + t - gt[i]).squared_norm();
  }
  return cost;
}

double transform_cost(const RigidTransform2D& t, const std::vector<Vec2>& est,
                      const std::vector<Vec2>& gt) {
  double cost = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) cost += (t.apply(est[i]) - gt[i]).squared_norm();
  return cost;
}

Polygon unit_square_at(double x, double y) {
  return {{x, y}, {x + 1, y}, {x + 1, y + 1}, {x, y + 1}};
}

EvalLane box_lane(double x, double y, double w = 1.0, double h = 1.0) {
  EvalLane lane;
  lane.center = {{x, y + h / 2}, {x + w, y + h / 2}};
  lane.polygon = {{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}};
  return lane;
}

std::vector<RoadLanes> two_road_fixture() {
  std::vector<RoadLanes> roads(2);
  roads[0].edge_id = 1;
  roads[1].edge_id = 2;
  // road 1 along +x, road 2 along +y; 40 m lanes of width 3
  for (int lane = 0; lane < 2; ++lane) {
    const double d = lane == 0 ? 1.5 : -1.5;
    EvalLane ex, ey;
    for (double s = 0.0; s <= 40.0; s += 1.0) {
      ex.center.push_back({s, d});
      ey.center.push_back({d, -s - 5.0});
    }
    for (double s = 0.0; s <= 40.0; s += 2.0) ex.polygon.push_back({s, d - 1.5});
    for (double s = 40.0; s >= 0.0; s -= 2.0) ex.polygon.push_back({s, d + 1.5});
    for (double s = 0.0; s <= 40.0; s += 2.0) ey.polygon.push_back({d + 1.5, -s - 5.0});
    for (double s = 40.0; s >= 0.0; s -= 2.0) ey.polygon.push_back({d - 1.5, -s - 5.0});
    roads[0].lanes.push_back(ex);
    roads[1].lanes.push_back(ey);
  }
  return roads;
}

std::vector<RoadLanes> transformed(const std::vector<RoadLanes>& src,
                                   const RigidTransform2D& t) {
  std::vector<RoadLanes> out = src;
  for (RoadLanes& road : out) {
    for (EvalLane& lane : road.lanes) {
      for (Vec2& p : lane.center) p = t.apply(p);
      for (Vec2& p : lane.polygon) p = t.apply(p);
    }
  }
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("evaluation");

TEST_CASE("rigid_align recovers an exact rotation plus translation") {
  Rng rng(41);
  std::vector<Vec2> est, gt;
  const double theta = kPi / 6.0;
  const Vec2 t{1.0, 2.0};
  for (int i = 0; i < 25; ++i) {
    const Vec2 p{rng.uniform(-10, 10), rng.uniform(-10, 10)};
    est.push_back(p);
    gt.push_back(rotate(p, theta) + t);
  }

  const RigidTransform2D fit = rigid_align(est, gt);
  CHECK_FALSE(fit.degenerate);
  CHECK(std::abs(fit.theta - theta) < 1e-9);
  CHECK(std::abs(fit.translation.x - t.x) < 1e-9);
  CHECK(std::abs(fit.translation.y - t.y) < 1e-9);
  for (std::size_t i = 0; i < est.size(); ++i) {
    CHECK((fit.apply(est[i]) - gt[i]).norm() < 1e-9);
  }
}

TEST_CASE("rigid_align flags underdetermined inputs") {
  const RigidTransform2D none = rigid_align({}, {});
  CHECK(none.degenerate);
  CHECK(none.theta == 0.0);
  CHECK(none.apply({3, 4}).x == doctest::Approx(3.0));

  CHECK(rigid_align({{1, 1}}, {{2, 2}}).degenerate);
  CHECK(rigid_align({{1, 1}, {1, 1}, {1, 1}}, {{2, 2}, {2, 2}, {2, 2}}).degenerate);
}

TEST_CASE("rigid_align is optimal against a rotation-grid search") {
  Rng rng(1234);
  std::vector<Vec2> est, gt;
  const double theta = 0.7;
  const Vec2 t{3.0, -2.0};
  for (int i = 0; i < 40; ++i) {
    const Vec2 p{rng.uniform(-10, 10), rng.uniform(-10, 10)};
    est.push_back(p);
    gt.push_back(rotate(p, theta) + t + Vec2{rng.gaussian() * 0.01, rng.gaussian() * 0.01});
  }

  const RigidTransform2D fit = rigid_align(est, gt);
  double best = 1e18;
  for (double a = 0.0; a < 2.0 * kPi; a += 0.002) {
    best = std::min(best, alignment_cost(est, gt, a));
  }
  for (double a = fit.theta - 0.002; a <= fit.theta + 0.002; a += 1e-5) {
    best = std::min(best, alignment_cost(est, gt, a));
  }
  CHECK(transform_cost(fit, est, gt) <= best + 1e-9);
  CHECK(std::abs(fit.theta - theta) < 0.01);
}

TEST_CASE("trajectory_rms of identical and offset lines") {
  Polyline est, gt;
  for (double x = 0.0; x <= 50.0; x += 1.0) est.push_back({x, 0.0});
  for (double x = -5.0; x <= 55.0; x += 5.0) gt.push_back({x, 0.0});
  CHECK(trajectory_rms(est, gt) == doctest::Approx(0.0).epsilon(1e-12));

  Polyline shifted = est;
  for (Vec2& p : shifted) p.y = 0.2;
  CHECK(trajectory_rms(shifted, gt) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("trajectory_rms of a sine around its axis approaches a over sqrt(2)") {
  const double a = 0.3, wavelength = 20.0;
  Polyline est, gt;
  for (double x = 0.0; x <= 2.0 * wavelength + 1e-9; x += 0.01) {
    est.push_back({x, a * std::sin(2.0 * kPi * x / wavelength)});
  }
  gt = {{-10, 0}, {60, 0}};
  CHECK(trajectory_rms(est, gt) == doctest::Approx(a / std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("trajectory_rms is insensitive to the reference sampling density") {
  Rng rng(8);
  const double radius = 50.0;
  Polyline est, coarse, dense;
  for (double ang = 0.1; ang <= 1.2; ang += 0.02) {
    est.push_back({radius * std::cos(ang) + rng.gaussian() * 0.1,
                   radius * std::sin(ang) + rng.gaussian() * 0.1});
  }
  for (double ang = 0.0; ang <= 1.3; ang += 1.0 / radius) {
    coarse.push_back({radius * std::cos(ang), radius * std::sin(ang)});
  }
  for (double ang = 0.0; ang <= 1.3; ang += 0.05 / radius) {
    dense.push_back({radius * std::cos(ang), radius * std::sin(ang)});
  }

  const double rms_coarse = trajectory_rms(est, coarse);
  const double rms_dense = trajectory_rms(est, dense);
  CHECK(std::abs(rms_coarse - rms_dense) / rms_dense < 0.01);
}

TEST_CASE("the centerline overload measures its way points") {
  const CenterLine center = make_straight_centerline(0.0, 30.0, 0.25);
  const Polyline gt{{-5, 0}, {40, 0}};
  CHECK(trajectory_rms(center, gt) ==
        doctest::Approx(trajectory_rms(center.waypoints, gt)).epsilon(1e-12));
}

TEST_CASE("polygon_iou worked examples") {
  const Polygon a = unit_square_at(0, 0);
  CHECK(polygon_iou(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(polygon_iou(a, unit_square_at(5, 5)) == doctest::Approx(0.0));
  CHECK(polygon_iou(a, unit_square_at(0.5, 0)) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  const Polygon zero{{0, 0}, {1, 0}};  // no area
  CHECK(polygon_iou(zero, zero) == 0.0);
}

TEST_CASE("polygon_iou is symmetric") {
  Rng rng(2026);
  for (int trial = 0; trial < 20; ++trial) {
    // random convex quads: squares rotated and shifted
    Polygon a, b;
    const double ta = rng.uniform(0, kPi), tb = rng.uniform(0, kPi);
    const Vec2 ca{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const Vec2 cb{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    for (const Vec2& corner : unit_square_at(-0.5, -0.5)) {
      a.push_back(rotate(corner, ta) * rng.uniform(1.0, 2.0) + ca);
      b.push_back(rotate(corner, tb) * rng.uniform(1.0, 2.0) + cb);
    }
    CHECK(std::abs(polygon_iou(a, b) - polygon_iou(b, a)) < 1e-12);
  }
}

TEST_CASE("lane_polygon walks left forward and right backward") {
  LaneBoundarySamples b;
  b.left_polyline = {{0, 1}, {5, 1}, {10, 1}};
  b.right_polyline = {{0, -1}, {5, -1}, {10, -1}};
  const Polygon poly = lane_polygon(b);
  REQUIRE(poly.size() == 6);
  CHECK(poly.front().x == doctest::Approx(0.0));
  CHECK(poly.front().y == doctest::Approx(1.0));
  CHECK(poly[2].x == doctest::Approx(10.0));
  CHECK(poly[3].x == doctest::Approx(10.0));
  CHECK(poly[3].y == doctest::Approx(-1.0));
  CHECK(poly.back().x == doctest::Approx(0.0));
  CHECK(std::abs(polygon_area(poly)) == doctest::Approx(20.0));
  CHECK(polygon_iou(poly, poly) == doctest::Approx(1.0));
}

TEST_CASE("perfect matches give precision and recall one") {
  const std::vector<EvalLane> est{box_lane(0, 0), box_lane(0, 5)};
  const LaneMatchResult r = match_lanes(est, est, GateConfig{});
  CHECK(r.pairs.size() == 2);
  for (const LaneMatch& m : r.pairs) {
    CHECK(m.iou == doctest::Approx(1.0));
    CHECK(m.rms == doctest::Approx(0.0));
    CHECK(m.passed);
  }
  const auto [precision, recall] = precision_recall(r);
  CHECK(precision == 1.0);
  CHECK(recall == 1.0);
}

TEST_CASE("partial matching yields fractional precision and recall") {
  const std::vector<EvalLane> gt{box_lane(0, 0), box_lane(0, 5), box_lane(20, 0),
                                 box_lane(20, 5)};
  const std::vector<EvalLane> est{box_lane(0, 0), box_lane(0, 5), box_lane(40, 40)};

  const LaneMatchResult r = match_lanes(est, gt, GateConfig{});
  int passing = 0;
  for (const LaneMatch& m : r.pairs) passing += m.passed ? 1 : 0;
  CHECK(passing == 2);

  const auto [precision, recall] = precision_recall(r);
  CHECK(precision == doctest::Approx(2.0 / 3.0));
  CHECK(recall == doctest::Approx(0.5));
}

TEST_CASE("gate comparisons are strict") {
  // nudge one lane so the pair has iou < 1 and rms > 0
  std::vector<EvalLane> est{box_lane(0.2, 0.1, 4.0, 2.0)};
  const std::vector<EvalLane> gt{box_lane(0, 0, 4.0, 2.0)};
  for (Vec2& p : est[0].center) p.y += 0.1;

  const LaneMatchResult probe = match_lanes(est, gt, GateConfig{});
  REQUIRE(probe.pairs.size() == 1);
  const double iou = probe.pairs[0].iou;
  const double rms = probe.pairs[0].rms;
  CHECK(iou > 0.0);
  CHECK(iou < 1.0);
  CHECK(rms > 0.0);

  // with the gate pinned to the achieved values, strict comparisons must fail
  const LaneMatchResult at_gate = match_lanes(est, gt, GateConfig{iou, rms});
  REQUIRE(at_gate.pairs.size() == 1);
  CHECK_FALSE(at_gate.pairs[0].passed);

  const LaneMatchResult below_gate =
      match_lanes(est, gt, GateConfig{iou - 1e-9, rms});
  REQUIRE(below_gate.pairs.size() == 1);
  CHECK(below_gate.pairs[0].passed);
}

TEST_CASE("vacuous precision and recall conventions") {
  const LaneMatchResult both = match_lanes({}, {}, GateConfig{});
  CHECK(precision_recall(both) == std::pair<double, double>{1.0, 1.0});

  const LaneMatchResult no_est = match_lanes({}, {box_lane(0, 0)}, GateConfig{});
  const auto [p1, r1] = precision_recall(no_est);
  CHECK(p1 == 1.0);
  CHECK(r1 == 0.0);

  const LaneMatchResult no_gt = match_lanes({box_lane(0, 0)}, {}, GateConfig{});
  const auto [p2, r2] = precision_recall(no_gt);
  CHECK(p2 == 0.0);
  CHECK(r2 == 1.0);
}

TEST_CASE("tightening the gate never increases recall") {
  Rng rng(555);
  std::vector<EvalLane> est, gt;
  for (int i = 0; i < 6; ++i) {
    gt.push_back(box_lane(i * 4.0, 0.0, 3.0, 2.0));
    est.push_back(box_lane(i * 4.0 + rng.uniform(0.0, 1.2), rng.uniform(0.0, 0.6), 3.0, 2.0));
  }
  double prev_recall = 1.0;
  for (double min_iou : {0.0, 0.2, 0.4, 0.6, 0.8, 0.95}) {
    const auto [p, r] = precision_recall(match_lanes(est, gt, GateConfig{min_iou, 1e-12}));
    CHECK(r <= prev_recall + 1e-12);
    prev_recall = r;
  }
}

TEST_CASE("global_rectification recovers a small map-wide offset") {
  const std::vector<RoadLanes> gt = two_road_fixture();
  RigidTransform2D disturb;
  disturb.theta = 0.05;
  disturb.translation = {0.4, -0.3};
  const std::vector<RoadLanes> est = transformed(gt, disturb);

  const RigidTransform2D fix = global_rectification(est, gt);
  CHECK_FALSE(fix.degenerate);

  double worst = 0.0;
  for (std::size_t r = 0; r < gt.size(); ++r) {
    for (std::size_t l = 0; l < gt[r].lanes.size(); ++l) {
      for (std::size_t i = 0; i < gt[r].lanes[l].center.size(); ++i) {
        worst = std::max(
            worst, (fix.apply(est[r].lanes[l].center[i]) - gt[r].lanes[l].center[i]).norm());
      }
    }
  }
  CHECK(worst < 0.05);
}

TEST_CASE("global_rectification of an already aligned map is the identity") {
  const std::vector<RoadLanes> gt = two_road_fixture();
  const RigidTransform2D fix = global_rectification(gt, gt);
  CHECK(std::abs(fix.theta) < 1e-9);
  CHECK(fix.translation.norm() < 1e-9);
}

TEST_CASE("self evaluation is perfect") {
  const std::vector<RoadLanes> gt = two_road_fixture();
  const EvaluationReport report = evaluate(gt, gt, GateConfig{});
  CHECK(report.precision == doctest::Approx(1.0));
  CHECK(report.recall == doctest::Approx(1.0));
  CHECK(report.rms_mean == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(report.miou_per_lane == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(report.true_positives == 4);
  CHECK(report.false_positives == 0);
  CHECK(report.false_negatives == 0);
  CHECK(report.roads.size() == 2);
  CHECK(report.passes(0.7, 0.2));
}

TEST_CASE("evaluate_topology compares tuple sets") {
  const std::vector<ConnectionTuple> est{{1, 0, 2, 0}, {1, 0, 3, 0}, {4, 1, 2, 1}};
  const std::vector<ConnectionTuple> gt{{1, 0, 3, 0}, {4, 1, 2, 1}, {5, 0, 2, 0},
                                        {6, 0, 2, 0}};
  const TopologyEval t = evaluate_topology(est, gt);
  CHECK(t.tp == 2);
  CHECK(t.fp == 1);
  CHECK(t.fn == 2);
  CHECK(t.precision == doctest::Approx(2.0 / 3.0));
  CHECK(t.recall == doctest::Approx(0.5));

  const TopologyEval empty = evaluate_topology({}, {});
  CHECK(empty.precision == 1.0);
  CHECK(empty.recall == 1.0);
}

TEST_CASE("connection_reference_arc for parallel tangents is the segment") {
  const Polyline arc = connection_reference_arc({0, 0}, {1, 0}, {10, 0}, {1, 0});
  REQUIRE(arc.size() >= 2);
  CHECK((arc.front() - Vec2{0, 0}).norm() < 1e-12);
  CHECK((arc.back() - Vec2{10, 0}).norm() < 1e-12);
  for (const Vec2& q : arc) CHECK(std::abs(q.y) < 1e-12);
  for (std::size_t i = 1; i < arc.size(); ++i) CHECK(arc[i].x >= arc[i - 1].x);
}

TEST_CASE("a symmetric right-angle connection is a pure quarter arc") {
  const Polyline arc = connection_reference_arc({0, 0}, {1, 0}, {10, 10}, {0, 1});
  REQUIRE(arc.size() >= 10);
  CHECK((arc.front() - Vec2{0, 0}).norm() < 1e-9);
  CHECK((arc.back() - Vec2{10, 10}).norm() < 1e-9);
  const Vec2 center{0, 10};
  for (const Vec2& q : arc) CHECK((q - center).norm() == doctest::Approx(10.0).epsilon(1e-9));

  const Vec2 first_dir = (arc[1] - arc[0]).normalized();
  const Vec2 last_dir = (arc.back() - arc[arc.size() - 2]).normalized();
  CHECK(std::abs(std::atan2(first_dir.y, first_dir.x)) < 0.1);
  CHECK(std::abs(std::atan2(last_dir.y, last_dir.x) - kPi / 2.0) < 0.1);
}

TEST_CASE("an asymmetric corner gets a straight run plus a tangent arc") {
  const Polyline arc = connection_reference_arc({0, 0}, {1, 0}, {20, 10}, {0, 1});
  CHECK((arc.front() - Vec2{0, 0}).norm() < 1e-9);
  CHECK((arc.back() - Vec2{20, 10}).norm() < 1e-9);
  const Vec2 center{10, 10};
  for (const Vec2& q : arc) {
    if (q.x <= 10.0 + 1e-9 && std::abs(q.y) < 1e-9) continue;        // entry run
    CHECK((q - center).norm() == doctest::Approx(10.0).epsilon(1e-9));  // arc part
  }
}

TEST_CASE("a corner behind the entry falls back to the straight segment") {
  const Polyline arc =
      connection_reference_arc({0, 0}, {1, 0}, {0, 10}, Vec2{1, 1}.normalized());
  REQUIRE(arc.size() >= 2);
  CHECK((arc.front() - Vec2{0, 0}).norm() < 1e-12);
  CHECK((arc.back() - Vec2{0, 10}).norm() < 1e-12);
  for (const Vec2& q : arc) CHECK(std::abs(q.x) < 1e-9);
}

TEST_CASE("evaluation reports serialize to parseable json") {
  const std::vector<RoadLanes> gt = two_road_fixture();
  const EvaluationReport report = evaluate(gt, gt, GateConfig{});
  const nlohmann::json j = nlohmann::json::parse(evaluation_report_to_json(report));

  const nlohmann::json& agg = j.at("aggregate");
  CHECK(agg.at("precision").get<double>() == doctest::Approx(1.0));
  CHECK(agg.at("recall").get<double>() == doctest::Approx(1.0));
  CHECK(agg.at("rms_mean").get<double>() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(agg.at("miou_per_lane").get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(j.at("gate").at("min_iou").get<double>() == doctest::Approx(0.7));
  CHECK(j.contains("roads"));
  CHECK(j.at("roads").is_array());
  CHECK(j.at("roads").size() == 2);
}

TEST_SUITE_END();
