#include "lanecarto/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <nlohmann/json.hpp>

#include "lanecarto/errors.hpp"

namespace bg = boost::geometry;

namespace lanecarto {
namespace {

using BoostPoint = bg::model::d2::point_xy<double>;
using BoostPolygon = bg::model::polygon<BoostPoint>;
using BoostMultiPolygon = bg::model::multi_polygon<BoostPolygon>;

BoostPolygon to_boost(const Polygon& poly) {
  BoostPolygon out;
  for (const Vec2& p : poly) {
    if (!out.outer().empty()) {
      const BoostPoint& last = out.outer().back();
      if (std::abs(last.x() - p.x) < 1e-12 && std::abs(last.y() - p.y) < 1e-12) continue;
    }
    bg::append(out.outer(), BoostPoint(p.x, p.y));
  }
  bg::correct(out);  // closes the ring and fixes orientation
  return out;
}

// Composition: apply `first`, then `second`.
RigidTransform2D compose(const RigidTransform2D& second, const RigidTransform2D& first) {
  RigidTransform2D out;
  out.theta = normalize_angle(second.theta + first.theta);
  out.translation = second.apply(first.translation);
  out.degenerate = first.degenerate && second.degenerate;
  return out;
}

EvalLane transformed(const EvalLane& lane, const RigidTransform2D& t) {
  EvalLane out;
  out.center.reserve(lane.center.size());
  for (const Vec2& p : lane.center) out.center.push_back(t.apply(p));
  out.polygon.reserve(lane.polygon.size());
  for (const Vec2& p : lane.polygon) out.polygon.push_back(t.apply(p));
  return out;
}

}  // namespace

RigidTransform2D rigid_align(const std::vector<Vec2>& est, const std::vector<Vec2>& gt) {
  RigidTransform2D out;
  if (est.size() != gt.size()) {
    throw ValidationError("rigid_align needs paired point lists of equal length");
  }
  const std::size_t n = est.size();
  if (n < 2) {
    out.degenerate = true;
    return out;
  }
  Vec2 ce{0, 0}, cg{0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    ce += est[i];
    cg += gt[i];
  }
  ce = ce / static_cast<double>(n);
  cg = cg / static_cast<double>(n);

  double sum_dot = 0.0, sum_cross = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = est[i] - ce, g = gt[i] - cg;
    sum_dot += e.dot(g);
    sum_cross += e.cross(g);
  }
  if (std::abs(sum_dot) < 1e-15 && std::abs(sum_cross) < 1e-15) {
    out.degenerate = true;  // all points coincident
    return out;
  }
  out.theta = std::atan2(sum_cross, sum_dot);
  const double c = std::cos(out.theta), s = std::sin(out.theta);
  out.translation = {cg.x - (c * ce.x - s * ce.y), cg.y - (s * ce.x + c * ce.y)};
  return out;
}

double trajectory_rms(const Polyline& est, const Polyline& gt) {
  if (est.empty() || gt.empty()) {
    throw DegenerateInputError("trajectory_rms needs non-empty polylines");
  }
  double sq = 0.0;
  for (const Vec2& p : est) {
    const double d = project_onto_polyline(gt, p).distance;
    sq += d * d;
  }
  return std::sqrt(sq / est.size());
}

double trajectory_rms(const CenterLine& est, const Polyline& gt) {
  return trajectory_rms(est.waypoints, gt);
}

double polygon_iou(const Polygon& a, const Polygon& b) {
  if (a.size() < 3 || b.size() < 3) return 0.0;
  const BoostPolygon pa = to_boost(a), pb = to_boost(b);
  BoostMultiPolygon inter, uni;
  bg::intersection(pa, pb, inter);
  bg::union_(pa, pb, uni);
  const double area_u = bg::area(uni);
  if (!(area_u > 0.0)) return 0.0;
  return bg::area(inter) / area_u;
}

Polygon lane_polygon(const LaneBoundarySamples& boundaries) {
  Polygon out = boundaries.left_polyline;
  out.insert(out.end(), boundaries.right_polyline.rbegin(),
             boundaries.right_polyline.rend());
  return out;
}

LaneMatchResult match_lanes(const std::vector<EvalLane>& est,
                            const std::vector<EvalLane>& gt, const GateConfig& gate) {
  LaneMatchResult result;
  result.est_count = static_cast<int>(est.size());
  result.gt_count = static_cast<int>(gt.size());

  struct Candidate {
    int e, g;
    double iou, rms;
  };
  std::vector<Candidate> candidates;
  for (int e = 0; e < result.est_count; ++e) {
    for (int g = 0; g < result.gt_count; ++g) {
      Candidate c{e, g, polygon_iou(est[e].polygon, gt[g].polygon), 0.0};
      c.rms = (est[e].center.empty() || gt[g].center.empty())
                  ? std::numeric_limits<double>::infinity()
                  : trajectory_rms(est[e].center, gt[g].center);
      candidates.push_back(c);
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.rms != b.rms) return a.rms < b.rms;
    if (a.e != b.e) return a.e < b.e;
    return a.g < b.g;
  });

  std::vector<char> est_used(est.size(), 0), gt_used(gt.size(), 0);
  for (const Candidate& c : candidates) {
    if (est_used[c.e] || gt_used[c.g]) continue;
    est_used[c.e] = gt_used[c.g] = 1;
    LaneMatch m;
    m.est_index = c.e;
    m.gt_index = c.g;
    m.iou = c.iou;
    m.rms = c.rms;
    m.passed = c.iou > gate.min_iou || c.rms < gate.max_rms;
    result.pairs.push_back(m);
  }
  for (int e = 0; e < result.est_count; ++e) {
    if (!est_used[e]) result.unmatched_est.push_back(e);
  }
  for (int g = 0; g < result.gt_count; ++g) {
    if (!gt_used[g]) result.unmatched_gt.push_back(g);
  }
  return result;
}

std::pair<double, double> precision_recall(const LaneMatchResult& result) {
  int tp = 0;
  for (const LaneMatch& m : result.pairs) tp += m.passed ? 1 : 0;
  const double p = result.est_count == 0 ? 1.0 : static_cast<double>(tp) / result.est_count;
  const double r = result.gt_count == 0 ? 1.0 : static_cast<double>(tp) / result.gt_count;
  return {p, r};
}

RigidTransform2D global_rectification(const std::vector<RoadLanes>& est,
                                      const std::vector<RoadLanes>& gt, int iterations) {
  std::vector<Polyline> gt_centers;
  for (const RoadLanes& road : gt) {
    for (const EvalLane& lane : road.lanes) {
      if (lane.center.size() >= 2) gt_centers.push_back(lane.center);
    }
  }
  std::vector<Vec2> est_points;
  for (const RoadLanes& road : est) {
    for (const EvalLane& lane : road.lanes) {
      est_points.insert(est_points.end(), lane.center.begin(), lane.center.end());
    }
  }

  RigidTransform2D total;
  if (gt_centers.empty() || est_points.size() < 2) {
    total.degenerate = true;
    return total;
  }

  const auto cost = [&gt_centers](const std::vector<Vec2>& points) {
    double sum = 0.0;
    for (const Vec2& p : points) {
      double best = std::numeric_limits<double>::max();
      for (const Polyline& center : gt_centers)
        best = std::min(best, project_onto_polyline(center, p).distance);
      sum += best * best;
    }
    return sum;
  };
  const double identity_cost = cost(est_points);

  std::vector<Vec2> moved = est_points;
  for (int it = 0; it < iterations; ++it) {
    std::vector<Vec2> targets;
    targets.reserve(moved.size());
    for (const Vec2& p : moved) {
      double best = std::numeric_limits<double>::max();
      Vec2 proj = p;
      for (const Polyline& center : gt_centers) {
        const PolylineProjection pr = project_onto_polyline(center, p);
        if (pr.distance < best) {
          best = pr.distance;
          proj = pr.point;
        }
      }
      targets.push_back(proj);
    }
    const RigidTransform2D step = rigid_align(moved, targets);
    if (step.degenerate) break;
    for (Vec2& p : moved) p = step.apply(p);
    total = compose(step, total);
    if (std::abs(step.theta) < 1e-12 && step.translation.norm() < 1e-12) break;
  }
  total.degenerate = false;
  // Nearest-neighbor pairing can slide into a wrong-lane minimum on symmetric
  // layouts; never return a transform that worsens the objective.
  if (cost(moved) >= identity_cost) return RigidTransform2D{};
  return total;
}

TopologyEval evaluate_topology(const std::vector<ConnectionTuple>& est,
                               const std::vector<ConnectionTuple>& gt) {
  std::set<ConnectionTuple> es(est.begin(), est.end());
  std::set<ConnectionTuple> gs(gt.begin(), gt.end());
  TopologyEval out;
  for (const ConnectionTuple& t : es) out.tp += gs.count(t) ? 1 : 0;
  out.fp = static_cast<int>(es.size()) - out.tp;
  out.fn = static_cast<int>(gs.size()) - out.tp;
  out.precision = es.empty() ? 1.0 : static_cast<double>(out.tp) / es.size();
  out.recall = gs.empty() ? 1.0 : static_cast<double>(out.tp) / gs.size();
  return out;
}

EvaluationReport evaluate(const std::vector<RoadLanes>& est,
                          const std::vector<RoadLanes>& gt, const GateConfig& gate,
                          bool rectify) {
  EvaluationReport report;
  report.gate = gate;

  std::vector<RoadLanes> aligned = est;
  if (rectify) {
    report.rectification = global_rectification(est, gt);
    report.rectified = !report.rectification.degenerate;
    if (report.rectified) {
      for (RoadLanes& road : aligned) {
        for (EvalLane& lane : road.lanes) lane = transformed(lane, report.rectification);
      }
    }
  }

  std::map<EdgeId, const RoadLanes*> est_by_edge, gt_by_edge;
  for (const RoadLanes& r : aligned) est_by_edge[r.edge_id] = &r;
  for (const RoadLanes& r : gt) gt_by_edge[r.edge_id] = &r;
  std::set<EdgeId> edges;
  for (const auto& [id, _] : est_by_edge) edges.insert(id);
  for (const auto& [id, _] : gt_by_edge) edges.insert(id);

  static const std::vector<EvalLane> kNoLanes;
  int tp = 0, total_est = 0, total_gt = 0;
  double rms_sum = 0.0;
  int rms_count = 0;
  double iou_sum = 0.0, iou_weighted_sum = 0.0, weight_sum = 0.0;
  int gt_lane_total = 0;

  for (EdgeId edge : edges) {
    const auto eit = est_by_edge.find(edge);
    const auto git = gt_by_edge.find(edge);
    const std::vector<EvalLane>& e_lanes = eit == est_by_edge.end() ? kNoLanes : eit->second->lanes;
    const std::vector<EvalLane>& g_lanes = git == gt_by_edge.end() ? kNoLanes : git->second->lanes;

    RoadEvaluation road;
    road.edge_id = edge;
    road.matches = match_lanes(e_lanes, g_lanes, gate);

    double road_rms = 0.0, road_iou = 0.0, road_iou_w = 0.0, road_w = 0.0;
    for (const LaneMatch& m : road.matches.pairs) {
      tp += m.passed ? 1 : 0;
      if (std::isfinite(m.rms)) {
        rms_sum += m.rms;
        road_rms += m.rms;
        ++rms_count;
      }
      const double w = std::abs(polygon_area(g_lanes[m.gt_index].polygon));
      road_iou += m.iou;
      road_iou_w += m.iou * w;
      road_w += w;
      iou_sum += m.iou;
      iou_weighted_sum += m.iou * w;
    }
    for (int g : road.matches.unmatched_gt) {
      const double w = std::abs(polygon_area(g_lanes[g].polygon));
      road_w += w;
    }
    weight_sum += road_w;
    gt_lane_total += road.matches.gt_count;
    total_est += road.matches.est_count;
    total_gt += road.matches.gt_count;

    road.rms_mean = road.matches.pairs.empty()
                        ? 0.0
                        : road_rms / static_cast<double>(road.matches.pairs.size());
    road.miou_per_lane =
        road.matches.gt_count == 0 ? 0.0 : road_iou / road.matches.gt_count;
    road.miou_area_weighted = road_w > 0.0 ? road_iou_w / road_w : 0.0;
    report.roads.push_back(std::move(road));
  }

  report.true_positives = tp;
  report.false_positives = total_est - tp;
  report.false_negatives = total_gt - tp;
  report.precision = total_est == 0 ? 1.0 : static_cast<double>(tp) / total_est;
  report.recall = total_gt == 0 ? 1.0 : static_cast<double>(tp) / total_gt;
  report.rms_mean = rms_count == 0 ? 0.0 : rms_sum / rms_count;
  report.miou_per_lane = gt_lane_total == 0 ? 0.0 : iou_sum / gt_lane_total;
  report.miou_area_weighted = weight_sum > 0.0 ? iou_weighted_sum / weight_sum : 0.0;
  return report;
}

Polyline connection_reference_arc(const Vec2& p0, const Vec2& t0, const Vec2& p2,
                                  const Vec2& t2, int arc_samples) {
  const Vec2 u0 = t0.normalized();
  const Vec2 u2 = t2.normalized();
  const double cross = u0.cross(u2);
  if (std::abs(cross) < 1e-9) return {p0, p2};

  // Corner X solves p0 + a*u0 == p2 - b*u2, i.e. a*u0 + b*u2 = p2 - p0.
  const Vec2 rhs = p2 - p0;
  const double a = (rhs.x * u2.y - u2.x * rhs.y) / cross;
  const double b = (u0.x * rhs.y - rhs.x * u0.y) / cross;
  if (a <= 1e-9 || b <= 1e-9) return {p0, p2};
  const Vec2 corner = p0 + u0 * a;

  const double d = std::min(a, b);
  const Vec2 tangent_in = corner - u0 * d;  // where the arc leaves the entry leg

  // Interior half-angle between the two legs seen from the corner.
  const double cos_turn = std::clamp(u0.dot(u2), -1.0, 1.0);
  const double turn = std::acos(cos_turn);  // heading change in (0, pi)
  const double half_interior = (kPi - turn) / 2.0;
  if (std::tan(half_interior) < 1e-9) return {p0, p2};
  const double radius = d * std::tan(half_interior);

  const double side = cross > 0.0 ? 1.0 : -1.0;  // left turn -> center on the left
  const Vec2 center = tangent_in + u0.left_normal() * (side * radius);

  // Emit entry run + arc + exit run, without duplicating the tangency points
  // when a run collapses to zero length (d == a and/or d == b).
  Polyline out;
  out.push_back(p0);
  const double alpha0 = std::atan2(tangent_in.y - center.y, tangent_in.x - center.x);
  double sweep = side * turn;  // signed arc angle from tangent_in to tangent_out
  const int n = std::max(2, arc_samples);
  for (int i = 0; i <= n; ++i) {
    const double alpha = alpha0 + sweep * i / n;
    const Vec2 q{center.x + radius * std::cos(alpha), center.y + radius * std::sin(alpha)};
    if ((q - out.back()).norm() > 1e-9) out.push_back(q);
  }
  if ((p2 - out.back()).norm() > 1e-9) {
    out.push_back(p2);
  } else {
    out.back() = p2;  // pin the exact endpoint against trig rounding
  }
  return out;
}

std::string evaluation_report_to_json(const EvaluationReport& report) {
  nlohmann::json doc;
  doc["gate"] = {{"min_iou", report.gate.min_iou}, {"max_rms", report.gate.max_rms}};
  doc["rectified"] = report.rectified;
  doc["rectification"] = {{"theta", report.rectification.theta},
                          {"tx", report.rectification.translation.x},
                          {"ty", report.rectification.translation.y},
                          {"degenerate", report.rectification.degenerate}};
  doc["aggregate"] = {{"precision", report.precision},
                      {"recall", report.recall},
                      {"true_positives", report.true_positives},
                      {"false_positives", report.false_positives},
                      {"false_negatives", report.false_negatives},
                      {"rms_mean", report.rms_mean},
                      {"miou_per_lane", report.miou_per_lane},
                      {"miou_area_weighted", report.miou_area_weighted}};
  if (report.has_topology) {
    doc["topology"] = {{"precision", report.topology.precision},
                       {"recall", report.topology.recall},
                       {"tp", report.topology.tp},
                       {"fp", report.topology.fp},
                       {"fn", report.topology.fn}};
  }
  if (report.has_connection_curves) {
    nlohmann::json curves = nlohmann::json::array();
    for (const ConnectionCurveEval& c : report.connection_curves) {
      curves.push_back({{"in_edge", c.tuple.in_edge},
                        {"in_lane", c.tuple.in_lane},
                        {"out_edge", c.tuple.out_edge},
                        {"out_lane", c.tuple.out_lane},
                        {"rms", c.rms}});
    }
    doc["connections"] = {{"curve_rms_mean", report.connection_rms_mean},
                          {"curves", std::move(curves)}};
  }
  nlohmann::json roads = nlohmann::json::array();
  for (const RoadEvaluation& road : report.roads) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const LaneMatch& m : road.matches.pairs) {
      pairs.push_back({{"est", m.est_index},
                       {"gt", m.gt_index},
                       {"iou", m.iou},
                       {"rms", std::isfinite(m.rms) ? m.rms : -1.0},
                       {"passed", m.passed}});
    }
    roads.push_back({{"edge_id", road.edge_id},
                     {"est_lanes", road.matches.est_count},
                     {"gt_lanes", road.matches.gt_count},
                     {"pairs", std::move(pairs)},
                     {"unmatched_est", road.matches.unmatched_est},
                     {"unmatched_gt", road.matches.unmatched_gt},
                     {"rms_mean", road.rms_mean},
                     {"miou_per_lane", road.miou_per_lane},
                     {"miou_area_weighted", road.miou_area_weighted}});
  }
  doc["roads"] = std::move(roads);
  return doc.dump(2) + "\n";
}

}  // namespace lanecarto
