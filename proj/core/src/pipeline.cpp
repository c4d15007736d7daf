#include "lanecarto/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "lanecarto/errors.hpp"
#include "lanecarto/io.hpp"
#include "lanecarto/mesh.hpp"
#include "lanecarto/rng.hpp"
#include "lanecarto/semantics.hpp"

namespace fs = std::filesystem;

namespace lanecarto {
namespace {

using nlohmann::json;

// ---------------------------------------------------------------- config --

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Cuts a trailing # comment, honoring double quotes around path values.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    else if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

[[noreturn]] void bad_value(const std::string& section, const std::string& key,
                            const std::string& value, const char* expected) {
  throw ValidationError("config [" + section + "] " + key + " = \"" + value +
                        "\": expected " + expected);
}

double config_double(const std::string& section, const std::string& key,
                     const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad_value(section, key, value, "a number");
    return v;
  } catch (const std::logic_error&) {
    bad_value(section, key, value, "a number");
  }
}

long long config_int(const std::string& section, const std::string& key,
                     const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) bad_value(section, key, value, "an integer");
    return v;
  } catch (const std::logic_error&) {
    bad_value(section, key, value, "an integer");
  }
}

std::uint64_t config_u64(const std::string& section, const std::string& key,
                         const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) bad_value(section, key, value, "a non-negative integer");
    return v;
  } catch (const std::logic_error&) {
    bad_value(section, key, value, "a non-negative integer");
  }
}

std::string config_string(const std::string& value) {
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
    return value.substr(1, value.size() - 2);
  return value;
}

void apply_config_key(PipelineConfig& cfg, const std::string& section,
                      const std::string& key, const std::string& value) {
  if (section == "paths") {
    const std::string path = config_string(value);
    if (key == "skeleton") cfg.paths.skeleton = path;
    else if (key == "bev") cfg.paths.bev = path;
    else if (key == "frames") cfg.paths.frames = path;
    else if (key == "poses") cfg.paths.poses = path;
    else if (key == "clouds") cfg.paths.clouds = path;
    else if (key == "camera") cfg.paths.camera = path;
    else if (key == "output") cfg.paths.output = path;
    else throw ValidationError("config [paths] has no key '" + key + "'");
    return;
  }
  if (section == "exploration") {
    ExplorationConfig& e = cfg.exploration;
    if (key == "particles") e.particle_count = static_cast<int>(config_int(section, key, value));
    else if (key == "v_min") e.v_min = config_double(section, key, value);
    else if (key == "v_max") e.v_max = config_double(section, key, value);
    else if (key == "omega_min") e.omega_min = config_double(section, key, value);
    else if (key == "omega_max") e.omega_max = config_double(section, key, value);
    else if (key == "dt") e.dt = config_double(section, key, value);
    else if (key == "footprint_length") e.footprint_length = config_double(section, key, value);
    else if (key == "footprint_width") e.footprint_width = config_double(section, key, value);
    else if (key == "boundary_kill_fraction") e.boundary_kill_fraction = config_double(section, key, value);
    else if (key == "stop_fraction") e.stop_fraction = config_double(section, key, value);
    else if (key == "max_steps") e.max_steps = static_cast<int>(config_int(section, key, value));
    else if (key == "seed") cfg.seed = config_u64(section, key, value);
    else throw ValidationError("config [exploration] has no key '" + key + "'");
    return;
  }
  if (section == "regression") {
    RegressorConfig& r = cfg.regression;
    if (key == "eps") r.dbscan_eps = config_double(section, key, value);
    else if (key == "min_pts") r.dbscan_min_pts = static_cast<int>(config_int(section, key, value));
    else if (key == "max_breaks") r.max_breaks = static_cast<int>(config_int(section, key, value));
    else if (key == "lambda") r.lambda = config_double(section, key, value);
    else if (key == "spacing") r.waypoint_spacing = config_double(section, key, value);
    else if (key == "probe_max") r.probe_max = config_double(section, key, value);
    else if (key == "da_run_length") r.da_run_length = static_cast<int>(config_int(section, key, value));
    else if (key == "min_cluster_span") r.min_cluster_span = config_double(section, key, value);
    else if (key == "max_fit_points") r.max_fit_points = static_cast<std::size_t>(config_u64(section, key, value));
    else throw ValidationError("config [regression] has no key '" + key + "'");
    return;
  }
  if (section == "projection") {
    ProjectionConfig& p = cfg.projection;
    if (key == "mode") {
      const std::string mode = config_string(value);
      if (mode == "flat") cfg.projection_mode = ProjectionMode::Flat;
      else if (mode == "mesh") cfg.projection_mode = ProjectionMode::Mesh;
      else bad_value(section, key, value, "'flat' or 'mesh'");
    } else if (key == "forward_min") p.forward_min = config_double(section, key, value);
    else if (key == "forward_max") p.forward_max = config_double(section, key, value);
    else if (key == "lateral_half") p.lateral_half = config_double(section, key, value);
    else if (key == "cell_size") p.cell_size = config_double(section, key, value);
    else if (key == "sync_tolerance") p.sync_tolerance = config_double(section, key, value);
    else if (key == "min_depth") p.min_depth = config_double(section, key, value);
    else throw ValidationError("config [projection] has no key '" + key + "'");
    return;
  }
  if (section == "gate") {
    if (key == "iou") cfg.gate.min_iou = config_double(section, key, value);
    else if (key == "rms") cfg.gate.max_rms = config_double(section, key, value);
    else throw ValidationError("config [gate] has no key '" + key + "'");
    return;
  }
  throw ValidationError("config has no section [" + section + "]");
}

void require_file(const std::string& what, const std::string& path) {
  if (path.empty()) throw ValidationError("config paths." + what + " is required");
  if (!fs::exists(path))
    throw ValidationError("config paths." + what + ": no such file: " + path);
}

void require_dir(const std::string& what, const std::string& path) {
  require_file(what, path);
  if (!fs::is_directory(path))
    throw ValidationError("config paths." + what + ": not a directory: " + path);
}

// ------------------------------------------------------------------ JSON --

json polyline_to_json(const Polyline& pl) {
  json a = json::array();
  for (const Vec2& p : pl) a.push_back(json::array({p.x, p.y}));
  return a;
}

Polyline polyline_from_json(const json& j, const std::string& what) {
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

Vec2 vec2_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError(what + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::string hash_to_hex(std::uint64_t value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::uint64_t hash_from_hex(const std::string& text) {
  if (text.size() != 18 || text[0] != '0' || text[1] != 'x')
    throw ParseError("provenance config_hash must be a 0x-prefixed 16-digit hex string");
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str() + 2, &end, 16);
  if (end != text.c_str() + text.size())
    throw ParseError("provenance config_hash must be a 0x-prefixed 16-digit hex string");
  return v;
}

// ------------------------------------------------------------- build ------

bool looks_like_osm(const std::string& text) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '<';
  }
  return false;
}

// Lexicographically sorted regular files under dir with the given suffix.
std::vector<std::string> list_files(const std::string& dir, const std::string& suffix) {
  std::vector<std::string> out;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() >= suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      out.push_back(entry.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Lateral free-space probe at the road entry: march in cell steps to each
// side until a marking/curb cell or a run of three unobserved cells. Near a
// junction the markings are interrupted, letting a single ray leak into the
// oncoming lane group; probing at a few anchors along the first meters of
// the edge and keeping the narrowest marking-bounded answer rejects that.
double probe_entry_width(const BEVMap& bev, const PlanarPose& start,
                         const ExplorationConfig& cfg) {
  const double step = bev.cell_size();
  const Vec2 forward{std::cos(start.yaw), std::sin(start.yaw)};
  const Vec2 normal{-forward.y, forward.x};
  const int limit = static_cast<int>(std::lround(8.0 / step));

  struct Reach {
    double extent = 8.0;
    bool bounded = false;
  };
  const auto reach = [&](const Vec2& anchor, double side) {
    int miss_run = 0;
    for (int k = 1; k <= limit; ++k) {
      const Vec2 p = anchor + normal * (side * k * step);
      const SemanticClass label = bev.label_at_world(p);
      if (is_probe_stop(label)) return Reach{(k - 1) * step, true};
      if (!is_traversable(label)) {
        if (++miss_run >= 3) return Reach{(k - miss_run) * step, true};
      } else {
        miss_run = 0;
      }
    }
    return Reach{8.0, false};
  };

  double fallback = 0.0;
  double best = std::numeric_limits<double>::max();
  for (int a = 0; a <= 8; ++a) {
    const Vec2 anchor = start.position + forward * static_cast<double>(a);
    const Reach left = reach(anchor, +1.0);
    const Reach right = reach(anchor, -1.0);
    if (a == 0) fallback = left.extent + right.extent;
    if (left.bounded && right.bounded)
      best = std::min(best, left.extent + right.extent);
  }
  const double width = best < std::numeric_limits<double>::max() ? best : fallback;
  return std::clamp(width, cfg.footprint_width, 12.0);
}

HDMapDocument::DocRoad road_to_doc(const AtomicRoad& road) {
  HDMapDocument::DocRoad out;
  out.edge_id = road.edge_id;
  for (const Lane& lane : road.lanes) {
    HDMapDocument::DocLane dl;
    dl.center = lane.center.waypoints;
    dl.left = lane.boundaries.left_polyline;
    dl.right = lane.boundaries.right_polyline;
    dl.start_offset = lane.start_offset;
    dl.breakpoints = lane.center.breakpoints;
    out.lanes.push_back(std::move(dl));
  }
  return out;
}

EvalLane doc_lane_to_eval(const Polyline& center, const Polyline& left,
                          const Polyline& right) {
  EvalLane lane;
  lane.center = center;
  lane.polygon = left;
  lane.polygon.insert(lane.polygon.end(), right.rbegin(), right.rend());
  return lane;
}

}  // namespace

void PipelineConfig::validate() const {
  exploration.validate();

  require_file("skeleton", paths.skeleton);
  require_file("poses", paths.poses);

  const bool has_bev = !paths.bev.empty();
  const bool has_frames = !paths.frames.empty();
  if (has_bev == has_frames)
    throw ValidationError(
        "config needs exactly one of paths.bev (a prebuilt raster) or "
        "paths.frames (a frame directory)");
  if (has_bev) {
    if (projection_mode == ProjectionMode::Mesh)
      throw ValidationError("mesh projection needs frames and clouds, not a prebuilt bev");
    require_file("bev", paths.bev);
  } else {
    require_dir("frames", paths.frames);
    require_file("camera", paths.camera);
  }
  if (projection_mode == ProjectionMode::Mesh) require_dir("clouds", paths.clouds);

  if (regression.dbscan_eps <= 0.0) throw ValidationError("regression.eps must be positive");
  if (regression.dbscan_min_pts < 1) throw ValidationError("regression.min_pts must be at least 1");
  if (regression.max_breaks < 0) throw ValidationError("regression.max_breaks must be non-negative");
  if (regression.waypoint_spacing <= 0.0) throw ValidationError("regression.spacing must be positive");
  if (regression.probe_max <= 0.0) throw ValidationError("regression.probe_max must be positive");
  if (regression.da_run_length < 1) throw ValidationError("regression.da_run_length must be at least 1");
  if (regression.max_fit_points < 2) throw ValidationError("regression.max_fit_points must be at least 2");
  if (regression.min_cluster_span < 0.0) throw ValidationError("regression.min_cluster_span must be non-negative");

  if (projection.cell_size <= 0.0) throw ValidationError("projection.cell_size must be positive");
  if (projection.forward_max <= projection.forward_min)
    throw ValidationError("projection.forward_max must exceed projection.forward_min");
  if (projection.lateral_half <= 0.0) throw ValidationError("projection.lateral_half must be positive");
  if (projection.sync_tolerance < 0.0) throw ValidationError("projection.sync_tolerance must be non-negative");
  if (projection.min_depth <= 0.0) throw ValidationError("projection.min_depth must be positive");

  if (gate.min_iou < 0.0 || gate.min_iou > 1.0)
    throw ValidationError("gate.iou must be in [0, 1]");
  if (gate.max_rms < 0.0) throw ValidationError("gate.rms must be non-negative");
}

PipelineConfig parse_pipeline_config(const std::string& text) {
  PipelineConfig cfg;
  cfg.config_hash = fnv1a64(text.data(), text.size());

  std::istringstream stream(text);
  std::string raw, section;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ValidationError("config line " + std::to_string(line_no) +
                              ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "paths" && section != "exploration" && section != "regression" &&
          section != "projection" && section != "gate")
        throw ValidationError("config has no section [" + section + "]");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": expected key = value");
    if (section.empty())
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": key outside any section");
    apply_config_key(cfg, section, key, value);
  }
  return cfg;
}

std::string map_document_to_json(const HDMapDocument& doc) {
  json j;
  if (doc.has_provenance) {
    j["provenance"] = {{"config_hash", hash_to_hex(doc.config_hash)},
                       {"seed", doc.seed},
                       {"version", doc.version}};
  }

  json edges = json::array();
  for (const HDMapDocument::SkeletonEdge& e : doc.skeleton_edges)
    edges.push_back({{"id", e.id},
                     {"polyline", polyline_to_json(e.polyline)},
                     {"source", e.source},
                     {"target", e.target}});
  json nodes = json::array();
  for (const HDMapDocument::SkeletonNode& n : doc.skeleton_nodes)
    nodes.push_back({{"center", json::array({n.center.x, n.center.y})},
                     {"id", n.id},
                     {"pseudo", n.pseudo}});
  j["skeleton"] = {{"edges", edges}, {"intersections", nodes}};

  json roads = json::array();
  for (const HDMapDocument::DocRoad& road : doc.roads) {
    json lanes = json::array();
    for (const HDMapDocument::DocLane& lane : road.lanes)
      lanes.push_back({{"breakpoints", lane.breakpoints},
                       {"center", polyline_to_json(lane.center)},
                       {"left", polyline_to_json(lane.left)},
                       {"right", polyline_to_json(lane.right)},
                       {"start_offset", lane.start_offset}});
    roads.push_back({{"edge_id", road.edge_id}, {"lanes", lanes}});
  }
  j["roads"] = roads;

  json inters = json::array();
  for (const Intersection& inter : doc.intersections) {
    json conns = json::array();
    for (const LaneConnection& c : inter.connections)
      conns.push_back({{"control", json::array({c.control.x, c.control.y})},
                       {"in_edge", c.tuple.in_edge},
                       {"in_lane", c.tuple.in_lane},
                       {"out_edge", c.tuple.out_edge},
                       {"out_lane", c.tuple.out_lane},
                       {"p0", json::array({c.p0.x, c.p0.y})},
                       {"p2", json::array({c.p2.x, c.p2.y})},
                       {"samples", polyline_to_json(c.samples)}});
    inters.push_back({{"connections", conns}, {"id", inter.id}});
  }
  j["intersections"] = inters;
  j["warnings"] = doc.warnings;

  return j.dump(2) + "\n";
}

HDMapDocument map_document_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("map document: ") + e.what());
  }
  try {
    HDMapDocument doc;
    doc.has_provenance = j.contains("provenance");
    if (doc.has_provenance) {
      const json& p = j.at("provenance");
      doc.version = p.at("version").get<std::string>();
      doc.config_hash = hash_from_hex(p.at("config_hash").get<std::string>());
      doc.seed = p.at("seed").get<std::uint64_t>();
    }

    const json& skeleton = j.at("skeleton");
    for (const json& e : skeleton.at("edges")) {
      HDMapDocument::SkeletonEdge edge;
      edge.id = e.at("id").get<EdgeId>();
      edge.source = e.at("source").get<NodeId>();
      edge.target = e.at("target").get<NodeId>();
      edge.polyline = polyline_from_json(e.at("polyline"), "skeleton edge polyline");
      doc.skeleton_edges.push_back(std::move(edge));
    }
    for (const json& n : skeleton.at("intersections")) {
      HDMapDocument::SkeletonNode node;
      node.id = n.at("id").get<NodeId>();
      node.center = vec2_from_json(n.at("center"), "skeleton intersection center");
      node.pseudo = n.at("pseudo").get<bool>();
      doc.skeleton_nodes.push_back(node);
    }

    for (const json& r : j.at("roads")) {
      HDMapDocument::DocRoad road;
      road.edge_id = r.at("edge_id").get<EdgeId>();
      for (const json& l : r.at("lanes")) {
        HDMapDocument::DocLane lane;
        lane.center = polyline_from_json(l.at("center"), "lane center");
        lane.left = polyline_from_json(l.at("left"), "lane left boundary");
        lane.right = polyline_from_json(l.at("right"), "lane right boundary");
        lane.start_offset = l.at("start_offset").get<double>();
        lane.breakpoints = l.at("breakpoints").get<std::vector<double>>();
        road.lanes.push_back(std::move(lane));
      }
      doc.roads.push_back(std::move(road));
    }

    for (const json& i : j.at("intersections")) {
      Intersection inter;
      inter.id = i.at("id").get<NodeId>();
      for (const json& c : i.at("connections")) {
        LaneConnection conn;
        conn.tuple.in_edge = c.at("in_edge").get<EdgeId>();
        conn.tuple.in_lane = c.at("in_lane").get<int>();
        conn.tuple.out_edge = c.at("out_edge").get<EdgeId>();
        conn.tuple.out_lane = c.at("out_lane").get<int>();
        conn.p0 = vec2_from_json(c.at("p0"), "connection p0");
        conn.control = vec2_from_json(c.at("control"), "connection control");
        conn.p2 = vec2_from_json(c.at("p2"), "connection p2");
        conn.samples = polyline_from_json(c.at("samples"), "connection samples");
        inter.connections.push_back(std::move(conn));
      }
      doc.intersections.push_back(std::move(inter));
    }

    doc.warnings = j.at("warnings").get<std::vector<std::string>>();
    return doc;
  } catch (const json::exception& e) {
    throw ParseError(std::string("map document: ") + e.what());
  }
}

HDMapDocument cmd_build(const PipelineConfig& config) {
  config.validate();

  const std::string network_text = read_text_file(config.paths.skeleton);
  const RawRoadNetwork network = looks_like_osm(network_text)
                                     ? parse_osm(network_text)
                                     : parse_network_json(network_text);
  const SkeletonMap skeleton = build_skeleton(network);
  const std::vector<Pose> poses = read_poses_csv(config.paths.poses);

  HDMapDocument doc;
  doc.version = "lanecarto 0.1.0";
  doc.config_hash = config.config_hash;
  doc.seed = config.seed;
  for (const AtomicRoadStub& e : skeleton.edges)
    doc.skeleton_edges.push_back({e.id, e.source, e.target, e.polyline});
  for (const IntersectionStub& n : skeleton.intersections)
    doc.skeleton_nodes.push_back({n.id, n.center, n.pseudo});

  // Accumulate every projected frame (or the prebuilt raster) into one
  // global map; votes are keyed by absolute cell, so this is equivalent to
  // accumulating per road.
  BEVMap bev(config.projection.cell_size);
  if (!config.paths.bev.empty()) {
    bev = BEVMap::from_raster(read_bev_png(config.paths.bev));
  } else {
    const CameraModel camera = read_camera_txt(config.paths.camera);
    const std::vector<std::string> frame_files = list_files(config.paths.frames, ".png");
    if (frame_files.size() != poses.size())
      throw ValidationError("frame/pose count mismatch: " +
                            std::to_string(frame_files.size()) + " frames vs " +
                            std::to_string(poses.size()) + " poses");
    const bool mesh_mode = config.projection_mode == ProjectionMode::Mesh;
    std::vector<std::string> cloud_files;
    if (mesh_mode) {
      cloud_files = list_files(config.paths.clouds, ".bin");
      if (cloud_files.size() != poses.size())
        throw ValidationError("cloud/pose count mismatch: " +
                              std::to_string(cloud_files.size()) + " clouds vs " +
                              std::to_string(poses.size()) + " poses");
    }
    for (std::size_t i = 0; i < frame_files.size(); ++i) {
      SemanticFrame frame = read_frame_png(frame_files[i]);
      frame.timestamp = poses[i].timestamp;  // frames are paired by index
      BEVPatch patch;
      if (mesh_mode) {
        GroundFilter filter;
        filter.camera_height = camera.translation.z;
        const GroundMesh mesh =
            build_ground_mesh(read_point_cloud(cloud_files[i]), filter);
        patch = project_mesh(frame, poses[i], camera, mesh, config.projection);
      } else {
        patch = project_flat(frame, poses[i], camera, config.projection);
      }
      bev.accumulate(patch);
    }
  }

  // The first pose located on each edge seeds that edge's exploration.
  std::map<EdgeId, PlanarPose> entry;
  for (const Pose& pose : poses) {
    const PlanarPose planar = pose.planar();
    const LocationRef loc = locate(skeleton, planar);
    if (loc.kind == LocationRef::Kind::OnEdge)
      entry.emplace(loc.element_id, planar);  // keeps the first occurrence
  }

  std::unordered_map<EdgeId, AtomicRoad> built;
  for (const AtomicRoadStub& stub : skeleton.edges) {
    const auto it = entry.find(stub.id);
    if (it == entry.end()) continue;  // edge never traversed

    ExplorationConfig ec = config.exploration;
    ec.rng_seed = fork_seed(config.seed, static_cast<std::uint64_t>(stub.id));
    if (ec.max_steps <= 0) {
      const double v_mid = 0.5 * (ec.v_min + ec.v_max);
      ec.max_steps = std::max(
          8, static_cast<int>(std::ceil(4.0 * polyline_length(stub.polyline) /
                                        (v_mid * ec.dt))));
    }
    const double entry_width = probe_entry_width(bev, it->second, ec);
    const IntersectionROI roi = intersection_roi(skeleton, stub.target);

    AtomicRoad road;
    road.edge_id = stub.id;
    try {
      const ParticleHistory history = explore(bev, it->second, roi, ec, entry_width);
      road = build_atomic_road(history, bev, road_frame_from_edge(stub),
                               config.regression);
      road.edge_id = stub.id;
    } catch (const ExtinctionError& e) {
      doc.warnings.push_back("edge " + std::to_string(stub.id) +
                             ": exploration extinction: " + e.what());
    }
    doc.roads.push_back(road_to_doc(road));
    built.emplace(stub.id, std::move(road));
  }

  // Every intersection touched by at least one built road, pseudo nodes
  // (road endpoints) included so the document records where roads begin/end.
  for (const IntersectionStub& node : skeleton.intersections) {
    std::vector<AtomicRoad> incoming, outgoing;
    for (EdgeId eid : node.incoming) {
      const auto b = built.find(eid);
      if (b != built.end()) incoming.push_back(b->second);
    }
    for (EdgeId eid : node.outgoing) {
      const auto b = built.find(eid);
      if (b != built.end()) outgoing.push_back(b->second);
    }
    if (incoming.empty() && outgoing.empty()) continue;
    doc.intersections.push_back(build_intersection(node.id, incoming, outgoing, skeleton));
  }

  return doc;
}

TruthDocument parse_truth_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("truth document: ") + e.what());
  }
  try {
    TruthDocument truth;
    for (const json& e : j.at("edges")) {
      TruthEdge edge;
      edge.edge_id = e.at("edge_id").get<EdgeId>();
      for (const json& l : e.at("lanes")) {
        TruthLane lane;
        lane.center = polyline_from_json(l.at("center"), "truth lane center");
        lane.left = polyline_from_json(l.at("left"), "truth lane left");
        lane.right = polyline_from_json(l.at("right"), "truth lane right");
        edge.lanes.push_back(std::move(lane));
      }
      truth.edges.push_back(std::move(edge));
    }
    if (j.contains("connections")) {
      for (const json& c : j.at("connections")) {
        if (!c.is_array() || c.size() != 4)
          throw ParseError("truth connections must be [in_edge, in_lane, out_edge, out_lane]");
        ConnectionTuple tuple;
        tuple.in_edge = c[0].get<EdgeId>();
        tuple.in_lane = c[1].get<int>();
        tuple.out_edge = c[2].get<EdgeId>();
        tuple.out_lane = c[3].get<int>();
        truth.connections.push_back(tuple);
      }
    }
    return truth;
  } catch (const json::exception& e) {
    throw ParseError(std::string("truth document: ") + e.what());
  }
}

EvaluationReport cmd_eval(const HDMapDocument& doc, const TruthDocument& truth,
                          const EvalOptions& options) {
  if (!doc.has_provenance && !options.force)
    throw ValidationError(
        "map document carries no provenance block; use force to evaluate anyway");

  std::set<EdgeId> truth_ids;
  for (const TruthEdge& e : truth.edges) truth_ids.insert(e.edge_id);
  std::string extras;
  for (const HDMapDocument::DocRoad& road : doc.roads)
    if (!truth_ids.count(road.edge_id))
      extras += (extras.empty() ? "" : ", ") + std::to_string(road.edge_id);
  if (!extras.empty())
    throw ValidationError("map document references edge ids the truth lacks: " + extras);

  std::vector<RoadLanes> est, gt;
  for (const HDMapDocument::DocRoad& road : doc.roads) {
    RoadLanes rl;
    rl.edge_id = road.edge_id;
    for (const HDMapDocument::DocLane& lane : road.lanes)
      rl.lanes.push_back(doc_lane_to_eval(lane.center, lane.left, lane.right));
    est.push_back(std::move(rl));
  }
  for (const TruthEdge& edge : truth.edges) {
    RoadLanes rl;
    rl.edge_id = edge.edge_id;
    for (const TruthLane& lane : edge.lanes)
      rl.lanes.push_back(doc_lane_to_eval(lane.center, lane.left, lane.right));
    gt.push_back(std::move(rl));
  }

  EvaluationReport report = evaluate(est, gt, options.gate, options.rectify);

  std::vector<ConnectionTuple> est_tuples;
  for (const Intersection& inter : doc.intersections)
    for (const LaneConnection& c : inter.connections) est_tuples.push_back(c.tuple);
  report.topology = evaluate_topology(est_tuples, truth.connections);
  report.has_topology = true;

  // Curve quality of matched connections: RMS against the analytic
  // straight+arc reference through the connection's own endpoints and
  // tangents. Rigid rectification cannot change these distances, so the raw
  // samples are scored directly.
  const std::set<ConnectionTuple> truth_tuples(truth.connections.begin(),
                                               truth.connections.end());
  double rms_sum = 0.0;
  for (const Intersection& inter : doc.intersections) {
    for (const LaneConnection& c : inter.connections) {
      if (!truth_tuples.count(c.tuple) || c.samples.size() < 2) continue;
      const Vec2 t0 = c.control - c.p0;
      const Vec2 t2 = c.p2 - c.control;
      if (t0.norm() < 1e-12 || t2.norm() < 1e-12) continue;
      const Polyline reference =
          connection_reference_arc(c.p0, t0.normalized(), c.p2, t2.normalized());
      ConnectionCurveEval curve;
      curve.tuple = c.tuple;
      curve.rms = trajectory_rms(c.samples, reference);
      rms_sum += curve.rms;
      report.connection_curves.push_back(curve);
    }
  }
  if (!report.connection_curves.empty()) {
    report.has_connection_curves = true;
    report.connection_rms_mean = rms_sum / report.connection_curves.size();
  }
  return report;
}

}  // namespace lanecarto
