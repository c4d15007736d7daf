#include "lanecarto/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lanecarto/errors.hpp"

namespace lanecarto {
namespace {

using nlohmann::json;

json coordinates(const Polyline& pl) {
  json a = json::array();
  for (const Vec2& p : pl) a.push_back(json::array({p.x, p.y}));
  return a;
}

Polyline coordinates_back(const json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + ": expected an array of points");
  Polyline pl;
  pl.reserve(j.size());
  for (const json& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw ParseError(what + ": points must be [x, y] pairs");
    pl.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return pl;
}

// Closed GeoJSON ring: left bound forward, right bound reversed, reclosed.
Polyline lane_ring(const HDMapDocument::DocLane& lane) {
  Polyline ring = lane.left;
  ring.insert(ring.end(), lane.right.rbegin(), lane.right.rend());
  if (!ring.empty()) ring.push_back(ring.front());
  return ring;
}

struct SvgBounds {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void include(const Polyline& pl) {
    for (const Vec2& p : pl) {
      min_x = std::min(min_x, p.x);
      min_y = std::min(min_y, p.y);
      max_x = std::max(max_x, p.x);
      max_y = std::max(max_y, p.y);
    }
  }
  bool valid() const { return min_x <= max_x && min_y <= max_y; }
};

void svg_points(std::ostringstream& out, const Polyline& pl, const SvgBounds& b) {
  char buf[64];
  for (std::size_t i = 0; i < pl.size(); ++i) {
    // SVG y grows downward; flip against the top of the view box.
    std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", i ? " " : "", pl[i].x - b.min_x,
                  b.max_y - pl[i].y);
    out << buf;
  }
}

void svg_polyline(std::ostringstream& out, const Polyline& pl, const SvgBounds& b,
                  const char* stroke, double width, bool dotted) {
  if (pl.size() < 2) return;
  out << "  <polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
      << width << "\"";
  if (dotted) out << " stroke-dasharray=\"0.6 0.6\"";
  out << " points=\"";
  svg_points(out, pl, b);
  out << "\"/>\n";
}

}  // namespace

ExportFormat parse_export_format(const std::string& name) {
  if (name == "geojson") return ExportFormat::GeoJson;
  if (name == "lanelet-json") return ExportFormat::LaneletJson;
  if (name == "svg") return ExportFormat::Svg;
  throw ValidationError("unknown export format '" + name +
                        "' (expected geojson, lanelet-json or svg)");
}

std::string export_geojson(const HDMapDocument& doc) {
  json features = json::array();
  for (const HDMapDocument::DocRoad& road : doc.roads) {
    for (std::size_t i = 0; i < road.lanes.size(); ++i) {
      const HDMapDocument::DocLane& lane = road.lanes[i];
      if (lane.center.size() >= 2)
        features.push_back(
            {{"geometry",
              {{"coordinates", coordinates(lane.center)}, {"type", "LineString"}}},
             {"properties",
              {{"edge_id", road.edge_id},
               {"lane_index", static_cast<int>(i)},
               {"role", "centerline"}}},
             {"type", "Feature"}});
      const Polyline ring = lane_ring(lane);
      if (ring.size() >= 4)
        features.push_back(
            {{"geometry",
              {{"coordinates", json::array({coordinates(ring)})}, {"type", "Polygon"}}},
             {"properties",
              {{"edge_id", road.edge_id},
               {"lane_index", static_cast<int>(i)},
               {"role", "lane-surface"}}},
             {"type", "Feature"}});
    }
  }
  for (const Intersection& inter : doc.intersections) {
    for (const LaneConnection& c : inter.connections) {
      if (c.samples.size() < 2) continue;
      features.push_back(
          {{"geometry",
            {{"coordinates", coordinates(c.samples)}, {"type", "LineString"}}},
           {"properties",
            {{"in_edge", c.tuple.in_edge},
             {"in_lane", c.tuple.in_lane},
             {"intersection_id", inter.id},
             {"out_edge", c.tuple.out_edge},
             {"out_lane", c.tuple.out_lane},
             {"role", "connection"}}},
           {"type", "Feature"}});
    }
  }
  const json collection = {{"features", features}, {"type", "FeatureCollection"}};
  return collection.dump(2) + "\n";
}

std::string export_lanelet_json(const HDMapDocument& doc) {
  // Lanelet ids are assigned in document order, starting at 1.
  std::map<std::pair<EdgeId, int>, int> ids;
  int next_id = 1;
  for (const HDMapDocument::DocRoad& road : doc.roads)
    for (std::size_t i = 0; i < road.lanes.size(); ++i)
      ids[{road.edge_id, static_cast<int>(i)}] = next_id++;

  std::map<int, std::vector<int>> successors;
  for (const Intersection& inter : doc.intersections) {
    for (const LaneConnection& c : inter.connections) {
      const auto from = ids.find({c.tuple.in_edge, c.tuple.in_lane});
      const auto to = ids.find({c.tuple.out_edge, c.tuple.out_lane});
      if (from != ids.end() && to != ids.end())
        successors[from->second].push_back(to->second);
    }
  }
  for (auto& [id, list] : successors) std::sort(list.begin(), list.end());

  json lanelets = json::array();
  for (const HDMapDocument::DocRoad& road : doc.roads) {
    for (std::size_t i = 0; i < road.lanes.size(); ++i) {
      const HDMapDocument::DocLane& lane = road.lanes[i];
      const int id = ids[{road.edge_id, static_cast<int>(i)}];
      const auto succ = successors.find(id);
      lanelets.push_back(
          {{"breakpoints", lane.breakpoints},
           {"centerline", coordinates(lane.center)},
           {"edge_id", road.edge_id},
           {"id", id},
           {"lane_index", static_cast<int>(i)},
           {"left", coordinates(lane.left)},
           {"right", coordinates(lane.right)},
           {"start_offset", lane.start_offset},
           {"successors",
            succ == successors.end() ? json::array() : json(succ->second)}});
    }
  }
  const json out = {{"lanelets", lanelets}};
  return out.dump(2) + "\n";
}

HDMapDocument import_lanelet_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("lanelet document: ") + e.what());
  }
  try {
    struct Entry {
      int lane_index;
      HDMapDocument::DocLane lane;
    };
    std::map<EdgeId, std::vector<Entry>> roads;  // grouped, then sorted per road
    for (const json& l : j.at("lanelets")) {
      Entry entry;
      entry.lane_index = l.at("lane_index").get<int>();
      entry.lane.center = coordinates_back(l.at("centerline"), "lanelet centerline");
      entry.lane.left = coordinates_back(l.at("left"), "lanelet left bound");
      entry.lane.right = coordinates_back(l.at("right"), "lanelet right bound");
      entry.lane.start_offset = l.at("start_offset").get<double>();
      entry.lane.breakpoints = l.at("breakpoints").get<std::vector<double>>();
      roads[l.at("edge_id").get<EdgeId>()].push_back(std::move(entry));
    }
    HDMapDocument doc;
    doc.has_provenance = false;
    for (auto& [edge_id, entries] : roads) {
      std::sort(entries.begin(), entries.end(),
                [](const Entry& a, const Entry& b) { return a.lane_index < b.lane_index; });
      HDMapDocument::DocRoad road;
      road.edge_id = edge_id;
      for (Entry& entry : entries) road.lanes.push_back(std::move(entry.lane));
      doc.roads.push_back(std::move(road));
    }
    return doc;
  } catch (const json::exception& e) {
    throw ParseError(std::string("lanelet document: ") + e.what());
  }
}

std::string export_svg(const HDMapDocument& doc) {
  SvgBounds bounds;
  for (const HDMapDocument::DocRoad& road : doc.roads) {
    for (const HDMapDocument::DocLane& lane : road.lanes) {
      bounds.include(lane.center);
      bounds.include(lane.left);
      bounds.include(lane.right);
    }
  }
  for (const Intersection& inter : doc.intersections)
    for (const LaneConnection& c : inter.connections) bounds.include(c.samples);

  std::ostringstream out;
  if (!bounds.valid()) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 1\"/>\n";
    return out.str();
  }
  const double margin = 5.0;
  bounds.min_x -= margin;
  bounds.min_y -= margin;
  bounds.max_x += margin;
  bounds.max_y += margin;
  const double width = bounds.max_x - bounds.min_x;
  const double height = bounds.max_y - bounds.min_y;

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << " "
      << height << "\">\n"
      << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#fafafa\"/>\n";

  for (const HDMapDocument::DocRoad& road : doc.roads) {
    for (const HDMapDocument::DocLane& lane : road.lanes) {
      const Polyline ring = lane_ring(lane);
      if (ring.size() >= 4) {
        out << "  <polygon fill=\"#cfe0f5\" stroke=\"none\" points=\"";
        svg_points(out, ring, bounds);
        out << "\"/>\n";
      }
    }
  }
  for (const HDMapDocument::DocRoad& road : doc.roads) {
    for (const HDMapDocument::DocLane& lane : road.lanes) {
      svg_polyline(out, lane.left, bounds, "#445566", 0.12, true);
      svg_polyline(out, lane.right, bounds, "#445566", 0.12, true);
      svg_polyline(out, lane.center, bounds, "#1f7a4d", 0.15, false);
    }
  }
  for (const Intersection& inter : doc.intersections)
    for (const LaneConnection& c : inter.connections)
      svg_polyline(out, c.samples, bounds, "#b03030", 0.15, true);

  out << "</svg>\n";
  return out.str();
}

std::string export_document(const HDMapDocument& doc, ExportFormat format) {
  switch (format) {
    case ExportFormat::GeoJson: return export_geojson(doc);
    case ExportFormat::LaneletJson: return export_lanelet_json(doc);
    case ExportFormat::Svg: return export_svg(doc);
  }
  throw ValidationError("unknown export format");
}

}  // namespace lanecarto
