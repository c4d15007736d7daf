#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "doctest.h"
#include "lanecarto/errors.hpp"
#include "lanecarto/skeleton.hpp"

using namespace lanecarto;

namespace {

std::string osm_header() {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\">\n";
}

// Independent great-circle distance for the projection oracle.
double haversine_m(double lat1, double lon1, double lat2, double lon2,
                   double radius = 6371000.0) {
  const double d = 3.14159265358979323846 / 180.0;
  const double p1 = lat1 * d, p2 = lat2 * d;
  const double dp = (lat2 - lat1) * d, dl = (lon2 - lon1) * d;
  const double a = std::sin(dp / 2) * std::sin(dp / 2) +
                   std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
  return 2.0 * radius * std::asin(std::min(1.0, std::sqrt(a)));
}

// n arms radiating from a central node, each a two-way residential way.
RawRoadNetwork star_network(int arms, double arm_length = 40.0) {
  RawRoadNetwork net;
  net.nodes.push_back({1, {0.0, 0.0}});
  for (int k = 0; k < arms; ++k) {
    const double a = 2.0 * 3.14159265358979323846 * k / arms;
    net.nodes.push_back({static_cast<NodeId>(10 + k),
                         {arm_length * std::cos(a), arm_length * std::sin(a)}});
    RawRoadNetwork::Way way;
    way.id = 100 + k;
    way.nodes = {1, static_cast<NodeId>(10 + k)};
    way.oneway = false;
    way.highway_class = "residential";
    net.ways.push_back(way);
  }
  return net;
}

}  // namespace

TEST_SUITE_BEGIN("skeleton");

TEST_CASE("parse_osm minimal document") {
  const std::string xml = osm_header() +
                          "<node id=\"1\" lat=\"0.0\" lon=\"0.0\"/>\n"
                          "<node id=\"2\" lat=\"0.0\" lon=\"0.001\"/>\n"
                          "<way id=\"10\">\n"
                          "  <nd ref=\"1\"/><nd ref=\"2\"/>\n"
                          "  <tag k=\"highway\" v=\"residential\"/>\n"
                          "  <tag k=\"oneway\" v=\"yes\"/>\n"
                          "</way>\n</osm>\n";
  const RawRoadNetwork net = parse_osm(xml);
  REQUIRE(net.nodes.size() == 2);
  REQUIRE(net.ways.size() == 1);
  CHECK(net.ways[0].oneway);
  CHECK(net.ways[0].highway_class == "residential");
  CHECK(net.find_node(1) != nullptr);
  CHECK(net.find_node(99) == nullptr);
}

TEST_CASE("parse_osm rejects ways referencing missing nodes") {
  const std::string xml = osm_header() +
                          "<node id=\"1\" lat=\"0\" lon=\"0\"/>\n"
                          "<way id=\"77\">\n"
                          "  <nd ref=\"1\"/><nd ref=\"99\"/>\n"
                          "  <tag k=\"highway\" v=\"residential\"/>\n"
                          "</way>\n</osm>\n";
  CHECK_THROWS_AS(parse_osm(xml), ValidationError);
  try {
    parse_osm(xml);
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("77") != std::string::npos);
  }
}

TEST_CASE("parse_osm reports the line of malformed XML") {
  const std::string xml = osm_header() + "<node id=\"1\" lat=\"0\"\n";
  CHECK_THROWS_AS(parse_osm(xml), ParseError);
  try {
    parse_osm(xml);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("parse_osm drops non-drivable ways") {
  const std::string xml = osm_header() +
                          "<node id=\"1\" lat=\"0\" lon=\"0\"/>\n"
                          "<node id=\"2\" lat=\"0\" lon=\"0.001\"/>\n"
                          "<way id=\"10\">\n"
                          "  <nd ref=\"1\"/><nd ref=\"2\"/>\n"
                          "  <tag k=\"highway\" v=\"footway\"/>\n"
                          "</way>\n</osm>\n";
  CHECK(parse_osm(xml).ways.empty());
}

TEST_CASE("equirectangular projection tracks haversine within 0.1 percent") {
  std::string xml = osm_header();
  const double lons[] = {0.0, 0.0003, 0.0006, 0.0009};
  for (int i = 0; i < 4; ++i) {
    xml += "<node id=\"" + std::to_string(i + 1) + "\" lat=\"0.0\" lon=\"" +
           std::to_string(lons[i]) + "\"/>\n";
  }
  xml +=
      "<way id=\"1\"><nd ref=\"1\"/><nd ref=\"2\"/><nd ref=\"3\"/><nd ref=\"4\"/>"
      "<tag k=\"highway\" v=\"residential\"/></way>\n</osm>\n";
  const RawRoadNetwork net = parse_osm(xml);
  REQUIRE(net.nodes.size() == 4);
  for (int i = 1; i < 4; ++i) {
    const double projected = std::abs(net.nodes[i].position.x - net.nodes[0].position.x);
    const double reference = haversine_m(0.0, lons[0], 0.0, lons[i]);
    CHECK(projected == doctest::Approx(reference).epsilon(0.001));
    CHECK(std::abs(net.nodes[i].position.y - net.nodes[0].position.y) < 0.01);
  }
}

TEST_CASE("build_skeleton splits two crossing two-way ways") {
  RawRoadNetwork net;
  net.nodes = {{1, {-50, 0}}, {2, {50, 0}}, {3, {0, -50}}, {4, {0, 50}}, {5, {0, 0}}};
  RawRoadNetwork::Way ew{10, {1, 5, 2}, false, "residential"};
  RawRoadNetwork::Way ns{11, {3, 5, 4}, false, "residential"};
  net.ways = {ew, ns};

  const SkeletonMap map = build_skeleton(net);
  CHECK(map.edges.size() == 8);

  int real = 0, pseudo = 0;
  for (const IntersectionStub& s : map.intersections) {
    if (s.pseudo) {
      ++pseudo;
    } else {
      ++real;
      CHECK(s.id == 5);
      CHECK(s.incoming.size() == 4);
      CHECK(s.outgoing.size() == 4);
    }
  }
  CHECK(real == 1);
  CHECK(pseudo == 4);
}

TEST_CASE("build_skeleton on a lone one-way way") {
  RawRoadNetwork net;
  net.nodes = {{1, {0, 0}}, {2, {100, 0}}};
  net.ways = {{20, {1, 2}, true, "residential"}};
  const SkeletonMap map = build_skeleton(net);
  REQUIRE(map.edges.size() == 1);
  CHECK(map.intersections.size() == 2);
  CHECK(map.intersections[0].pseudo);
  CHECK(map.intersections[1].pseudo);
  CHECK_FALSE(map.edges[0].reverse_twin.has_value());
  CHECK(map.edges[0].polyline.front().x == doctest::Approx(0.0));
  CHECK(map.edges[0].polyline.back().x == doctest::Approx(100.0));
}

TEST_CASE("build_skeleton of a plus of four one-way ways") {
  RawRoadNetwork net;
  net.nodes = {{1, {0, 0}}, {2, {30, 0}}, {3, {0, 30}}, {4, {-30, 0}}, {5, {0, -30}}};
  net.ways = {{21, {2, 1}, true, "residential"},
              {22, {3, 1}, true, "residential"},
              {23, {1, 4}, true, "residential"},
              {24, {1, 5}, true, "residential"}};
  const SkeletonMap map = build_skeleton(net);
  CHECK(map.edges.size() == 4);
  int real = 0;
  for (const IntersectionStub& s : map.intersections) {
    if (!s.pseudo) {
      ++real;
      CHECK(s.id == 1);
      CHECK(s.incoming.size() == 2);
      CHECK(s.outgoing.size() == 2);
    }
  }
  CHECK(real == 1);
}

TEST_CASE("two-way ways yield mutually reversed twin edges") {
  RawRoadNetwork net;
  net.nodes = {{1, {0, 0}}, {2, {40, 5}}, {3, {80, 0}}};
  net.ways = {{30, {1, 2, 3}, false, "residential"}};
  const SkeletonMap map = build_skeleton(net);
  REQUIRE(map.edges.size() == 2);

  const AtomicRoadStub& a = map.edges[0];
  REQUIRE(a.reverse_twin.has_value());
  const AtomicRoadStub& b = map.edge_at(*a.reverse_twin);
  REQUIRE(b.reverse_twin.has_value());
  CHECK(*b.reverse_twin == a.id);
  CHECK(a.source == b.target);
  CHECK(a.target == b.source);
  REQUIRE(a.polyline.size() == b.polyline.size());
  for (std::size_t i = 0; i < a.polyline.size(); ++i) {
    const Vec2 fwd = a.polyline[i];
    const Vec2 rev = b.polyline[b.polyline.size() - 1 - i];
    CHECK(fwd.x == rev.x);
    CHECK(fwd.y == rev.y);
  }
}

TEST_CASE("build_skeleton of an empty network is empty") {
  const SkeletonMap map = build_skeleton(RawRoadNetwork{});
  CHECK(map.edges.empty());
  CHECK(map.intersections.empty());
}

TEST_CASE("every edge endpoint resolves to an intersection") {
  const SkeletonMap map = build_skeleton(star_network(5));
  for (const AtomicRoadStub& e : map.edges) {
    CHECK(map.find_intersection(e.source) != nullptr);
    CHECK(map.find_intersection(e.target) != nullptr);
  }
}

TEST_CASE("intersection_roi vertex set at a four-way crossing") {
  // adjacent polyline nodes sit exactly 10 m out along each axis
  RawRoadNetwork net;
  net.nodes = {{1, {0, 0}},   {2, {10, 0}},  {3, {50, 0}},  {4, {0, 10}},
               {5, {0, 50}},  {6, {-10, 0}}, {7, {-50, 0}}, {8, {0, -10}},
               {9, {0, -50}}};
  net.ways = {{40, {3, 2, 1, 6, 7}, false, "residential"},
              {41, {5, 4, 1, 8, 9}, false, "residential"}};
  const SkeletonMap map = build_skeleton(net);
  const IntersectionROI roi = intersection_roi(map, 1);

  REQUIRE(roi.polygon.size() == 4);
  CHECK(polygon_area(roi.polygon) > 0.0);  // counter-clockwise
  CHECK(point_strictly_in_polygon(roi.polygon, {0.0, 0.0}));
  std::set<std::pair<int, int>> got;
  for (const Vec2& v : roi.polygon) {
    got.insert({static_cast<int>(std::lround(v.x)), static_cast<int>(std::lround(v.y))});
  }
  const std::set<std::pair<int, int>> want{{10, 0}, {0, 10}, {-10, 0}, {0, -10}};
  CHECK(got == want);
}

TEST_CASE("intersection_roi falls back to a square for degree <= 2") {
  RawRoadNetwork net;
  net.nodes = {{1, {5, 7}}, {2, {105, 7}}};
  net.ways = {{50, {1, 2}, true, "residential"}};
  const SkeletonMap map = build_skeleton(net);

  const IntersectionROI roi = intersection_roi(map, 1);
  REQUIRE(roi.polygon.size() == 4);
  double min_x = 1e9, max_x = -1e9, min_y = 1e9, max_y = -1e9;
  for (const Vec2& v : roi.polygon) {
    min_x = std::min(min_x, v.x);
    max_x = std::max(max_x, v.x);
    min_y = std::min(min_y, v.y);
    max_y = std::max(max_y, v.y);
  }
  CHECK(max_x - min_x == doctest::Approx(10.0));  // 2 * default min_radius
  CHECK(max_y - min_y == doctest::Approx(10.0));
  CHECK(min_x == doctest::Approx(0.0));
  CHECK(min_y == doctest::Approx(2.0));
}

TEST_CASE("intersection_roi of a six-way star is a ccw hexagon") {
  const SkeletonMap map = build_skeleton(star_network(6));
  const IntersectionROI roi = intersection_roi(map, 1);
  REQUIRE(roi.polygon.size() == 6);
  CHECK(polygon_area(roi.polygon) > 0.0);
  CHECK(polygon_is_simple(roi.polygon));
  CHECK(point_strictly_in_polygon(roi.polygon, {0.0, 0.0}));

  // vertices must be sorted by bearing around the center
  for (std::size_t i = 1; i < roi.polygon.size(); ++i) {
    double prev = std::atan2(roi.polygon[i - 1].y, roi.polygon[i - 1].x);
    double cur = std::atan2(roi.polygon[i].y, roi.polygon[i].x);
    if (cur < prev) cur += 2.0 * kPi;
    CHECK(cur >= prev);
  }
}

TEST_CASE("intersection_roi clamps far-away adjacent nodes") {
  const SkeletonMap map = build_skeleton(star_network(3, 200.0));
  const IntersectionROI roi = intersection_roi(map, 1);
  for (const Vec2& v : roi.polygon) {
    CHECK(v.norm() <= 25.0 + 1e-6);  // default max_vertex_dist_m
  }
}

TEST_CASE("intersection_roi rejects unknown ids") {
  const SkeletonMap map = build_skeleton(star_network(4));
  CHECK_THROWS_AS(intersection_roi(map, 999), LookupError);
  CHECK_THROWS_AS(map.intersection_at(999), LookupError);
  CHECK_THROWS_AS(map.edge_at(999), LookupError);
}

TEST_CASE("locate classifies poses") {
  const SkeletonMap map = build_skeleton(star_network(4));

  const LocationRef at_center = locate(map, {{0.0, 0.0}, 0.0});
  CHECK(at_center.kind == LocationRef::Kind::InIntersection);
  CHECK(at_center.element_id == 1);

  // 1 m laterally off the +x arm, 30 m out (clear of the 25 m ROI diamond),
  // heading outward
  const LocationRef on_edge = locate(map, {{30.0, 1.0}, 0.0});
  CHECK(on_edge.kind == LocationRef::Kind::OnEdge);
  const AtomicRoadStub& e = map.edge_at(static_cast<EdgeId>(on_edge.element_id));
  const double along = (e.polyline.back() - e.polyline.front()).normalized().x;
  CHECK(along == doctest::Approx(1.0));  // the outward-heading twin wins the tie
  CHECK(on_edge.offset_m == doctest::Approx(30.0).epsilon(0.01));

  // same spot, heading inward -> the reverse twin
  const LocationRef rev = locate(map, {{30.0, 1.0}, kPi});
  CHECK(rev.kind == LocationRef::Kind::OnEdge);
  const AtomicRoadStub& r = map.edge_at(static_cast<EdgeId>(rev.element_id));
  CHECK((r.polyline.back() - r.polyline.front()).normalized().x == doctest::Approx(-1.0));
}

TEST_CASE("locate rejects an empty map") {
  CHECK_THROWS_AS(locate(SkeletonMap{}, {{0, 0}, 0.0}), LookupError);
}

TEST_CASE("network json round trip preserves the graph") {
  const RawRoadNetwork net = star_network(5);
  const std::string json = serialize_network_json(net);
  const RawRoadNetwork back = parse_network_json(json);

  CHECK(back.nodes.size() == net.nodes.size());
  CHECK(back.ways.size() == net.ways.size());

  const SkeletonMap a = build_skeleton(net);
  const SkeletonMap b = build_skeleton(back);
  CHECK(a.edges.size() == b.edges.size());
  CHECK(a.intersections.size() == b.intersections.size());
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    CHECK(a.edges[i].source == b.edges[i].source);
    CHECK(a.edges[i].target == b.edges[i].target);
    CHECK(polyline_length(a.edges[i].polyline) ==
          doctest::Approx(polyline_length(b.edges[i].polyline)));
  }
}

TEST_CASE("parse_network_json rejects malformed documents") {
  CHECK_THROWS_AS(parse_network_json("definitely not json"), ParseError);
  CHECK_THROWS_AS(parse_network_json(R"({"nodes":[],"ways":[{"id":1,"nodes":[1,2]}]})"),
                  ValidationError);
}

TEST_SUITE_END();
