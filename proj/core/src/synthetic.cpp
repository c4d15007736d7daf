#include "lanecarto/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <utility>

#include <nlohmann/json.hpp>

#include "lanecarto/errors.hpp"
#include "lanecarto/io.hpp"
#include "lanecarto/rng.hpp"

namespace lanecarto {

namespace {
constexpr double kCell = 0.1;
constexpr double kMarkWidth = kCell;  // markings are one cell wide
constexpr double kGoreGap = 1.0;      // clearance between fork branch lanes
}  // namespace

double Topography::height(double x) const {
  if (kind == Kind::Flat) return 0.0;
  return amplitude * std::sin(2.0 * kPi * x / wavelength);
}

double Topography::slope(double x) const {
  if (kind == Kind::Flat) return 0.0;
  const double k = 2.0 * kPi / wavelength;
  return amplitude * k * std::cos(k * x);
}

double ScenarioSpec::effective_lane_width() const {
  return layout == ScenarioLayout::Narrow ? narrow_width : lane_width;
}

void ScenarioSpec::validate() const {
  const double w = effective_lane_width();
  if (!(w >= 2.0 && w <= 5.0)) throw ValidationError("lane width must lie in [2, 5] m");
  if (!(dropout >= 0.0 && dropout <= 1.0)) {
    throw ValidationError("dropout must lie in [0, 1]");
  }
  if (lanes_per_direction < 1 || lanes_per_direction > 4) {
    throw ValidationError("lanes_per_direction must lie in [1, 4]");
  }
  switch (layout) {
    case ScenarioLayout::Straight:
    case ScenarioLayout::Narrow:
      if (!(length >= 30.0)) throw ValidationError("length must be at least 30 m");
      break;
    case ScenarioLayout::Curved:
      if (!(radius >= 15.0 && radius <= 200.0)) {
        throw ValidationError("radius must lie in [15, 200] m");
      }
      break;
    case ScenarioLayout::Fork:
    case ScenarioLayout::Merge:
      if (!(length >= 40.0)) throw ValidationError("length must be at least 40 m");
      if (!(fork_angle >= 0.05 && fork_angle <= 0.8)) {
        throw ValidationError("fork_angle must lie in [0.05, 0.8] rad");
      }
      if (!(fork_position >= 15.0 && fork_position <= length - 25.0)) {
        throw ValidationError("fork_position must lie in [15, length-25]");
      }
      break;
    case ScenarioLayout::Grid4:
    case ScenarioLayout::Star6:
      if (!(block >= 30.0 && block <= 200.0)) {
        throw ValidationError("block must lie in [30, 200] m");
      }
      break;
  }
  if (topography.kind == Topography::Kind::Sine) {
    if (!(topography.amplitude >= 0.0 && topography.amplitude <= 1.0)) {
      throw ValidationError("sine amplitude must lie in [0, 1] m");
    }
    if (!(topography.wavelength >= 10.0)) {
      throw ValidationError("sine wavelength must be at least 10 m");
    }
  }
}

namespace {

ScenarioLayout parse_layout(const std::string& name) {
  if (name == "straight") return ScenarioLayout::Straight;
  if (name == "curved") return ScenarioLayout::Curved;
  if (name == "fork") return ScenarioLayout::Fork;
  if (name == "merge") return ScenarioLayout::Merge;
  if (name == "narrow") return ScenarioLayout::Narrow;
  if (name == "grid4") return ScenarioLayout::Grid4;
  if (name == "star6") return ScenarioLayout::Star6;
  throw ValidationError("unknown layout '" + name + "'");
}

MarkingStyle parse_marking(const std::string& name) {
  if (name == "solid") return MarkingStyle::Solid;
  if (name == "dashed") return MarkingStyle::Dashed;
  if (name == "none") return MarkingStyle::None;
  throw ValidationError("unknown marking style '" + name + "'");
}

bool layout_uses_length(ScenarioLayout l) {
  return l == ScenarioLayout::Straight || l == ScenarioLayout::Narrow ||
         l == ScenarioLayout::Fork || l == ScenarioLayout::Merge;
}

}  // namespace

ScenarioSpec parse_scenario_spec(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario spec is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("scenario spec must be a JSON object");
  if (!doc.contains("layout") || !doc["layout"].is_string()) {
    throw ValidationError("scenario spec needs a string 'layout'");
  }

  ScenarioSpec spec;
  spec.layout = parse_layout(doc["layout"].get<std::string>());

  auto require_layout = [&](const std::string& key, bool ok) {
    if (!ok) {
      throw ValidationError("key '" + key + "' does not apply to layout '" +
                            doc["layout"].get<std::string>() + "'");
    }
  };
  auto number = [&](const nlohmann::json& v, const std::string& key) -> double {
    if (!v.is_number()) throw ValidationError("key '" + key + "' must be a number");
    return v.get<double>();
  };

  for (const auto& [key, value] : doc.items()) {
    if (key == "layout") continue;
    if (key == "length") {
      require_layout(key, layout_uses_length(spec.layout));
      spec.length = number(value, key);
    } else if (key == "radius") {
      require_layout(key, spec.layout == ScenarioLayout::Curved);
      spec.radius = number(value, key);
    } else if (key == "fork_angle") {
      require_layout(key, spec.layout == ScenarioLayout::Fork ||
                              spec.layout == ScenarioLayout::Merge);
      spec.fork_angle = number(value, key);
    } else if (key == "fork_position") {
      require_layout(key, spec.layout == ScenarioLayout::Fork ||
                              spec.layout == ScenarioLayout::Merge);
      spec.fork_position = number(value, key);
    } else if (key == "block") {
      require_layout(key, spec.layout == ScenarioLayout::Grid4 ||
                              spec.layout == ScenarioLayout::Star6);
      spec.block = number(value, key);
    } else if (key == "width") {
      require_layout(key, spec.layout == ScenarioLayout::Narrow);
      spec.narrow_width = number(value, key);
    } else if (key == "lanes_per_direction") {
      if (!value.is_number_integer()) {
        throw ValidationError("lanes_per_direction must be an integer");
      }
      spec.lanes_per_direction = value.get<int>();
    } else if (key == "lane_width") {
      spec.lane_width = number(value, key);
    } else if (key == "marking_left") {
      spec.marking_left = parse_marking(value.get<std::string>());
    } else if (key == "marking_right") {
      spec.marking_right = parse_marking(value.get<std::string>());
    } else if (key == "marking_center") {
      spec.marking_center = parse_marking(value.get<std::string>());
    } else if (key == "dropout") {
      spec.dropout = number(value, key);
    } else if (key == "topography") {
      if (!value.is_object() || !value.contains("type")) {
        throw ValidationError("topography must be an object with a 'type'");
      }
      const std::string type = value["type"].get<std::string>();
      if (type == "flat") {
        spec.topography.kind = Topography::Kind::Flat;
      } else if (type == "sine") {
        spec.topography.kind = Topography::Kind::Sine;
        if (value.contains("amplitude")) {
          spec.topography.amplitude = number(value["amplitude"], "amplitude");
        }
        if (value.contains("wavelength")) {
          spec.topography.wavelength = number(value["wavelength"], "wavelength");
        }
      } else {
        throw ValidationError("unknown topography type '" + type + "'");
      }
      for (const auto& [tkey, tval] : value.items()) {
        (void)tval;
        if (tkey != "type" && tkey != "amplitude" && tkey != "wavelength") {
          throw ValidationError("unknown topography key '" + tkey + "'");
        }
      }
    } else if (key == "emit_frames") {
      if (!value.is_boolean()) throw ValidationError("emit_frames must be a boolean");
      spec.emit_frames = value.get<bool>();
    } else if (key == "seed") {
      if (!value.is_number_unsigned() && !value.is_number_integer()) {
        throw ValidationError("seed must be an integer");
      }
      spec.seed = value.get<std::uint64_t>();
    } else {
      throw ValidationError("unknown scenario key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

namespace {

double smooth01(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// Offset a polyline to the right of its travel direction (negative = left).
// Vertex normals average the adjacent segment directions; our scenes only
// bend gently, so no miter correction is needed.
Polyline offset_polyline(const Polyline& pl, double right) {
  Polyline out(pl.size());
  const std::size_t n = pl.size();
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 dir{1.0, 0.0};
    if (n >= 2) {
      if (i == 0) {
        dir = (pl[1] - pl[0]).normalized();
      } else if (i + 1 == n) {
        dir = (pl[n - 1] - pl[n - 2]).normalized();
      } else {
        dir = ((pl[i + 1] - pl[i]).normalized() + (pl[i] - pl[i - 1]).normalized())
                  .normalized();
      }
    }
    out[i] = pl[i] + Vec2{dir.y, -dir.x} * right;
  }
  return out;
}

Polyline sample_segment(const Vec2& a, const Vec2& b, double step) {
  const double len = (b - a).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  Polyline out;
  out.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    out.push_back({a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t});
  }
  return out;
}

// Sub-polyline between arclengths [s0, s1] (clamped).
Polyline polyline_slice(const Polyline& pl, double s0, double s1) {
  const double total = polyline_length(pl);
  s0 = std::clamp(s0, 0.0, total);
  s1 = std::clamp(s1, 0.0, total);
  Polyline out;
  if (s1 - s0 <= 1e-12) return out;
  out.push_back(polyline_point_at(pl, s0));
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
    const double seg = (pl[i + 1] - pl[i]).norm();
    const double v_s = acc + seg;  // arclength of vertex i+1
    if (v_s > s0 + 1e-12 && v_s < s1 - 1e-12) out.push_back(pl[i + 1]);
    acc = v_s;
  }
  out.push_back(polyline_point_at(pl, s1));
  return out;
}

struct Stroke {
  Polyline line;
  MarkingStyle style = MarkingStyle::Solid;
};

struct DirLaneSet {
  WayId way = 0;
  bool forward = true;
  std::vector<Polyline> centers;  // left-to-right
};

struct Scene {
  RawRoadNetwork network;
  std::vector<DirLaneSet> lanes;
  std::vector<Stroke> strokes;
};

NodeId add_node(Scene& scene, NodeId id, const Vec2& p) {
  scene.network.nodes.push_back({id, p});
  return id;
}

void add_stroke(Scene& scene, Polyline line, MarkingStyle style) {
  if (style == MarkingStyle::None || line.size() < 2) return;
  scene.strokes.push_back({std::move(line), style});
}

// Strokes shared by every one-way road: group edges plus dashed separators.
void oneway_strokes(Scene& scene, const Polyline& dense, int n, double w,
                    const ScenarioSpec& spec) {
  const double half_group = n * w / 2.0;
  add_stroke(scene, offset_polyline(dense, -(half_group + kMarkWidth / 2.0)),
             spec.marking_left);
  add_stroke(scene, offset_polyline(dense, half_group + kMarkWidth / 2.0),
             spec.marking_right);
  for (int i = 1; i < n; ++i) {
    add_stroke(scene, offset_polyline(dense, -half_group + i * w), MarkingStyle::Dashed);
  }
}

// A one-way road whose lane group is centered on the way line.
void add_oneway_road(Scene& scene, WayId way_id, const std::vector<NodeId>& node_ids,
                     const Polyline& dense, const ScenarioSpec& spec) {
  scene.network.ways.push_back({way_id, node_ids, true, "residential"});
  const int n = spec.lanes_per_direction;
  const double w = spec.effective_lane_width();
  DirLaneSet set{way_id, true, {}};
  for (int i = 0; i < n; ++i) {
    set.centers.push_back(offset_polyline(dense, (i - (n - 1) / 2.0) * w));
  }
  scene.lanes.push_back(std::move(set));
  oneway_strokes(scene, dense, n, w, spec);
}

// A two-way road: each direction keeps right of the way line.
void add_twoway_road(Scene& scene, WayId way_id, const std::vector<NodeId>& node_ids,
                     const Polyline& dense, const ScenarioSpec& spec) {
  scene.network.ways.push_back({way_id, node_ids, false, "residential"});
  const int n = spec.lanes_per_direction;
  const double w = spec.effective_lane_width();

  DirLaneSet fwd{way_id, true, {}};
  for (int i = 0; i < n; ++i) fwd.centers.push_back(offset_polyline(dense, w / 2.0 + i * w));
  scene.lanes.push_back(std::move(fwd));

  Polyline reversed(dense.rbegin(), dense.rend());
  DirLaneSet rev{way_id, false, {}};
  for (int i = 0; i < n; ++i) {
    rev.centers.push_back(offset_polyline(reversed, w / 2.0 + i * w));
  }
  scene.lanes.push_back(std::move(rev));

  add_stroke(scene, dense, spec.marking_center);
  add_stroke(scene, offset_polyline(dense, n * w + kMarkWidth / 2.0), spec.marking_right);
  add_stroke(scene, offset_polyline(dense, -(n * w + kMarkWidth / 2.0)), spec.marking_right);
  for (int i = 1; i < n; ++i) {
    add_stroke(scene, offset_polyline(dense, i * w), MarkingStyle::Dashed);
    add_stroke(scene, offset_polyline(dense, -i * w), MarkingStyle::Dashed);
  }
}

Scene build_straight_scene(const ScenarioSpec& spec) {
  Scene scene;
  add_node(scene, 1, {0.0, 0.0});
  add_node(scene, 2, {spec.length, 0.0});
  add_oneway_road(scene, 1, {1, 2}, sample_segment({0, 0}, {spec.length, 0}, 2.0), spec);
  return scene;
}

Scene build_curved_scene(const ScenarioSpec& spec) {
  Scene scene;
  const double r = spec.radius;
  auto arc_point = [&](double theta) -> Vec2 {
    // Quarter circle turning left: starts at the origin heading +x.
    return {r * std::sin(theta), r * (1.0 - std::cos(theta))};
  };
  const double arc_len = r * kPi / 2.0;
  const int node_count = std::max(3, static_cast<int>(std::ceil(arc_len / 5.0)) + 1);
  std::vector<NodeId> ids;
  for (int i = 0; i < node_count; ++i) {
    const double theta = kPi / 2.0 * i / (node_count - 1);
    ids.push_back(add_node(scene, i + 1, arc_point(theta)));
  }
  Polyline dense;
  const int dense_count = std::max(node_count, static_cast<int>(std::ceil(arc_len / 1.5)) + 1);
  for (int i = 0; i < dense_count; ++i) {
    dense.push_back(arc_point(kPi / 2.0 * i / (dense_count - 1)));
  }
  add_oneway_road(scene, 1, ids, dense, spec);
  return scene;
}

// Shared by fork and merge: two single-lane branches that coincide on the
// trunk and separate to +/- (w + gore)/2 over a smoothstep ramp.
Scene build_fork_scene(const ScenarioSpec& spec, bool merge) {
  Scene scene;
  const double w = spec.effective_lane_width();
  const double sep = w + kGoreGap;
  // Ramp length from the divergence angle at the steepest point.
  const double ramp = std::max(5.0, 1.5 * (sep / 2.0) / std::tan(spec.fork_angle));
  const double pos = merge ? std::max(spec.fork_position, ramp + 5.0) : spec.fork_position;
  if (!merge && pos + ramp > spec.length - 5.0) {
    throw ValidationError("fork ramp does not fit before the road end");
  }

  add_node(scene, 1, {0.0, 0.0});
  add_node(scene, 2, {spec.length, 0.0});
  scene.network.ways.push_back({1, {1, 2}, true, "residential"});

  auto branch_y = [&](double x, double sign) {
    if (merge) return sign * (sep / 2.0) * (1.0 - smooth01((x - (pos - ramp)) / ramp));
    return sign * (sep / 2.0) * smooth01((x - pos) / ramp);
  };
  auto branch_center = [&](double sign) {
    Polyline line;
    for (double x = 0.0;; x += 1.0) {
      const double cx = std::min(x, spec.length);
      line.push_back({cx, branch_y(cx, sign)});
      if (cx >= spec.length) break;
    }
    return line;
  };

  const Polyline upper = branch_center(+1.0);  // the left branch
  const Polyline lower = branch_center(-1.0);
  DirLaneSet set{1, true, {upper, lower}};
  scene.lanes.push_back(std::move(set));

  add_stroke(scene, offset_polyline(upper, -(w / 2.0 + kMarkWidth / 2.0)),
             spec.marking_left);
  add_stroke(scene, offset_polyline(lower, w / 2.0 + kMarkWidth / 2.0),
             spec.marking_right);

  // Inner gore edges exist only where the branches have separated enough to
  // leave a gap between the two lane bands.
  const double y_inner = (w + 2.0 * kMarkWidth + 0.1) / 2.0;
  std::size_t first = upper.size(), last = 0;
  for (std::size_t i = 0; i < upper.size(); ++i) {
    if (upper[i].y >= y_inner) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first < upper.size() && last > first) {
    const Polyline inner_u(upper.begin() + first, upper.begin() + last + 1);
    const Polyline inner_l(lower.begin() + first, lower.begin() + last + 1);
    add_stroke(scene, offset_polyline(inner_u, w / 2.0 + kMarkWidth / 2.0),
               MarkingStyle::Solid);
    add_stroke(scene, offset_polyline(inner_l, -(w / 2.0 + kMarkWidth / 2.0)),
               MarkingStyle::Solid);
  }
  return scene;
}

Scene build_radial_scene(const ScenarioSpec& spec, int arm_count) {
  Scene scene;
  add_node(scene, 1, {0.0, 0.0});
  for (int a = 0; a < arm_count; ++a) {
    const double angle = 2.0 * kPi * a / arm_count;
    const Vec2 dir{std::cos(angle), std::sin(angle)};
    std::vector<NodeId> ids{1};
    // Intermediate nodes every ~10 m keep the intersection ROI compact.
    const int segs = std::max(1, static_cast<int>(std::round(spec.block / 10.0)));
    for (int i = 1; i <= segs; ++i) {
      const NodeId id = 100 + a * 100 + i;
      ids.push_back(add_node(scene, id, dir * (spec.block * i / segs)));
    }
    Polyline dense = sample_segment({0, 0}, dir * spec.block, 2.0);
    add_twoway_road(scene, a + 1, ids, dense, spec);
  }
  return scene;
}

Scene build_scene(const ScenarioSpec& spec) {
  switch (spec.layout) {
    case ScenarioLayout::Straight:
    case ScenarioLayout::Narrow:
      return build_straight_scene(spec);
    case ScenarioLayout::Curved:
      return build_curved_scene(spec);
    case ScenarioLayout::Fork:
      return build_fork_scene(spec, false);
    case ScenarioLayout::Merge:
      return build_fork_scene(spec, true);
    case ScenarioLayout::Grid4:
      return build_radial_scene(spec, 4);
    case ScenarioLayout::Star6:
      return build_radial_scene(spec, 6);
  }
  throw ValidationError("unhandled layout");
}

// ---------------------------------------------------------------------------
// Rasterization

struct Canvas {
  std::int64_t i0 = 0, j0 = 0;  // world cell of the local (0, 0) cell
  int width = 0, height = 0;
  std::vector<std::uint8_t> labels;

  void init(const Vec2& lo, const Vec2& hi, double margin) {
    i0 = static_cast<std::int64_t>(std::floor((lo.x - margin) / kCell));
    j0 = static_cast<std::int64_t>(std::floor((lo.y - margin) / kCell));
    const std::int64_t i1 = static_cast<std::int64_t>(std::floor((hi.x + margin) / kCell));
    const std::int64_t j1 = static_cast<std::int64_t>(std::floor((hi.y + margin) / kCell));
    width = static_cast<int>(i1 - i0 + 1);
    height = static_cast<int>(j1 - j0 + 1);
    labels.assign(static_cast<std::size_t>(width) * height, 0);
  }
  Vec2 center(int ci, int cj) const {
    return {(i0 + ci + 0.5) * kCell, (j0 + cj + 0.5) * kCell};
  }
  std::uint8_t& at(int ci, int cj) {
    return labels[static_cast<std::size_t>(cj) * width + ci];
  }
  std::uint8_t label_at_world(double x, double y) const {
    const auto ci = static_cast<std::int64_t>(std::floor(x / kCell)) - i0;
    const auto cj = static_cast<std::int64_t>(std::floor(y / kCell)) - j0;
    if (ci < 0 || cj < 0 || ci >= width || cj >= height) return 0;
    return labels[static_cast<std::size_t>(cj) * width + ci];
  }
};

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  if (len2 <= 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

bool inside_any(const std::vector<Polygon>& polys, const Vec2& p) {
  for (const Polygon& poly : polys) {
    if (point_in_polygon(poly, p)) return true;
  }
  return false;
}

void paint_capsule(Canvas& canvas, const Vec2& a, const Vec2& b, double radius,
                   SemanticClass cls, const std::vector<Polygon>* skip) {
  const double lo_x = std::min(a.x, b.x) - radius, hi_x = std::max(a.x, b.x) + radius;
  const double lo_y = std::min(a.y, b.y) - radius, hi_y = std::max(a.y, b.y) + radius;
  const int ci0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(lo_x / kCell)) - canvas.i0);
  const int ci1 = std::min<std::int64_t>(canvas.width - 1,
                                         static_cast<std::int64_t>(std::floor(hi_x / kCell)) - canvas.i0);
  const int cj0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(lo_y / kCell)) - canvas.j0);
  const int cj1 = std::min<std::int64_t>(canvas.height - 1,
                                         static_cast<std::int64_t>(std::floor(hi_y / kCell)) - canvas.j0);
  for (int cj = cj0; cj <= cj1; ++cj) {
    for (int ci = ci0; ci <= ci1; ++ci) {
      const Vec2 c = canvas.center(ci, cj);
      if (point_segment_distance(c, a, b) >= radius - 1e-9) continue;
      if (skip && inside_any(*skip, c)) continue;
      canvas.at(ci, cj) = static_cast<std::uint8_t>(cls);
    }
  }
}

void paint_band(Canvas& canvas, const Polyline& center, double half_width,
                SemanticClass cls) {
  for (std::size_t i = 0; i + 1 < center.size(); ++i) {
    paint_capsule(canvas, center[i], center[i + 1], half_width, cls, nullptr);
  }
}

void paint_polygon(Canvas& canvas, const Polygon& poly, SemanticClass cls) {
  Vec2 lo = poly.front(), hi = poly.front();
  for (const Vec2& p : poly) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  const int ci0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(lo.x / kCell)) - canvas.i0);
  const int ci1 = std::min<std::int64_t>(canvas.width - 1,
                                         static_cast<std::int64_t>(std::floor(hi.x / kCell)) - canvas.i0);
  const int cj0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(lo.y / kCell)) - canvas.j0);
  const int cj1 = std::min<std::int64_t>(canvas.height - 1,
                                         static_cast<std::int64_t>(std::floor(hi.y / kCell)) - canvas.j0);
  for (int cj = cj0; cj <= cj1; ++cj) {
    for (int ci = ci0; ci <= ci1; ++ci) {
      if (point_in_polygon(poly, canvas.center(ci, cj))) {
        canvas.at(ci, cj) = static_cast<std::uint8_t>(cls);
      }
    }
  }
}

// Paint a marking stroke: chunked by the dropout model, then split by the
// dash pattern (1.5 m on / 1.5 m off) when the style is dashed.
void paint_stroke(Canvas& canvas, const Stroke& stroke, double dropout, Rng& rng,
                  const std::vector<Polygon>& skip) {
  const double total = polyline_length(stroke.line);
  std::vector<std::pair<double, double>> chunks;
  if (dropout > 0.0) {
    double s = 0.0;
    while (s < total) {
      const double len = rng.uniform(1.0, 3.0);
      const bool keep = rng.uniform01() >= dropout;
      if (keep) chunks.emplace_back(s, std::min(s + len, total));
      s += len;
    }
  } else {
    chunks.emplace_back(0.0, total);
  }

  std::vector<std::pair<double, double>> runs;
  if (stroke.style == MarkingStyle::Dashed) {
    constexpr double kPeriod = 3.0, kOn = 1.5;
    for (const auto& [a, b] : chunks) {
      for (double t = std::floor(a / kPeriod) * kPeriod; t < b; t += kPeriod) {
        const double s0 = std::max(a, t), s1 = std::min(b, t + kOn);
        if (s1 - s0 > 1e-6) runs.emplace_back(s0, s1);
      }
    }
  } else {
    runs = chunks;
  }

  const SemanticClass cls = stroke.style == MarkingStyle::Dashed ? SemanticClass::LmDashed
                                                                 : SemanticClass::LmSolid;
  for (const auto& [a, b] : runs) {
    const Polyline sub = polyline_slice(stroke.line, a, b);
    for (std::size_t i = 0; i + 1 < sub.size(); ++i) {
      paint_capsule(canvas, sub[i], sub[i + 1], kMarkWidth / 2.0 + 1e-4, cls, &skip);
    }
  }
}

// ---------------------------------------------------------------------------
// Camera-frame rendering: perspective resampling of the truth raster.

SemanticFrame render_frame(const Canvas& canvas, const Topography& topo,
                           const Pose& pose, const CameraModel& cam, int width,
                           int height) {
  SemanticFrame frame;
  frame.timestamp = pose.timestamp;
  frame.width = width;
  frame.height = height;
  frame.classes.assign(static_cast<std::size_t>(width) * height, 0);

  const Mat3 rot = pose.rotation();
  const Vec3 origin = pose.to_map(cam.translation);
  const double max_range = 60.0;
  const double max_slope =
      topo.kind == Topography::Kind::Flat
          ? 0.0
          : topo.amplitude * 2.0 * kPi / topo.wavelength;

  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      Vec3 dir = rot * (cam.rotation * Vec3{(u - cam.cx) / cam.fx,
                                            (v - cam.cy) / cam.fy, 1.0});
      const double n = dir.norm();
      dir = dir * (1.0 / n);
      if (dir.z > -1e-3) continue;  // at or above the horizon

      double t_hit = -1.0;
      if (topo.kind == Topography::Kind::Flat) {
        t_hit = -origin.z / dir.z;
      } else {
        // Conservative forward march: the clearance above ground shrinks at
        // most at rate `descent`, so stepping clearance/descent never skips
        // the first crossing.
        const double descent = -dir.z + max_slope * std::abs(dir.x) + 1e-9;
        double t = 0.0;
        for (int iter = 0; iter < 250; ++iter) {
          const double clearance =
              origin.z + t * dir.z - topo.height(origin.x + t * dir.x);
          if (clearance < 1e-4) {
            t_hit = t;
            break;
          }
          t += std::max(0.02, clearance / descent);
          if (t > max_range) break;
        }
      }
      if (t_hit < 0.3 || t_hit > max_range) continue;
      frame.classes[static_cast<std::size_t>(v) * width + u] = canvas.label_at_world(
          origin.x + t_hit * dir.x, origin.y + t_hit * dir.y);
    }
  }
  return frame;
}

std::vector<Vec3> make_cloud(const Pose& pose, const Topography& topo, Rng& rng) {
  std::vector<Vec3> out;
  const double c = std::cos(pose.yaw), s = std::sin(pose.yaw);
  for (double gx = 2.0; gx <= 40.0 + 1e-9; gx += 1.5) {
    for (double gy = -15.0; gy <= 15.0 + 1e-9; gy += 1.5) {
      const double jx = gx + rng.uniform(-0.3, 0.3);
      const double jy = gy + rng.uniform(-0.3, 0.3);
      const double mx = pose.position.x + c * jx - s * jy;
      const double my = pose.position.y + s * jx + c * jy;
      out.push_back(pose.to_vehicle({mx, my, topo.height(mx)}));
    }
  }
  return out;
}

}  // namespace

GroundTruthBundle generate(const ScenarioSpec& spec) {
  spec.validate();
  const double w = spec.effective_lane_width();

  GroundTruthBundle bundle;
  bundle.spec = spec;

  Scene scene = build_scene(spec);
  bundle.network = scene.network;
  bundle.skeleton = build_skeleton(scene.network);

  // Ground-truth lanes per directed edge.
  for (const AtomicRoadStub& stub : bundle.skeleton.edges) {
    const RawRoadNetwork::Way* way = nullptr;
    for (const auto& candidate : scene.network.ways) {
      if (candidate.id == stub.way) way = &candidate;
    }
    if (!way) throw ValidationError("skeleton references an unknown way");
    const Vec2 way_start = scene.network.find_node(way->nodes.front())->position;
    const bool forward = (stub.polyline.front() - way_start).norm() < 1e-9;

    const DirLaneSet* lane_set = nullptr;
    for (const auto& candidate : scene.lanes) {
      if (candidate.way == stub.way && candidate.forward == forward) lane_set = &candidate;
    }
    if (!lane_set) throw ValidationError("no lane definition for a skeleton edge");

    GroundTruthEdge edge;
    edge.edge_id = stub.id;
    edge.source = stub.source;
    edge.target = stub.target;
    for (const Polyline& center : lane_set->centers) {
      GroundTruthLane lane;
      lane.center = center;
      lane.left = offset_polyline(center, -w / 2.0);
      lane.right = offset_polyline(center, w / 2.0);
      edge.lanes.push_back(std::move(lane));
    }
    bundle.edges.push_back(std::move(edge));
  }

  // Ground-truth connections at real intersections: all in/out pairs except
  // U-turns, pairing lanes left-to-right.
  for (const IntersectionStub& node : bundle.skeleton.intersections) {
    if (node.pseudo) continue;
    std::vector<EdgeId> incoming = node.incoming, outgoing = node.outgoing;
    std::sort(incoming.begin(), incoming.end());
    std::sort(outgoing.begin(), outgoing.end());
    for (EdgeId in_e : incoming) {
      const AtomicRoadStub& in_stub = bundle.skeleton.edge_at(in_e);
      for (EdgeId out_e : outgoing) {
        if (in_stub.reverse_twin && *in_stub.reverse_twin == out_e) continue;
        for (int k = 0; k < spec.lanes_per_direction; ++k) {
          bundle.connections.push_back({in_e, k, out_e, k});
        }
      }
    }
  }
  std::sort(bundle.connections.begin(), bundle.connections.end());

  // Rasterize: drivable bands, then intersection interiors, then markings
  // (skipping marking cells inside intersection polygons).
  Vec2 lo{0, 0}, hi{0, 0};
  bool first_point = true;
  auto grow = [&](const Polyline& pl) {
    for (const Vec2& p : pl) {
      if (first_point) {
        lo = hi = p;
        first_point = false;
      } else {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
      }
    }
  };
  for (const auto& lane_set : scene.lanes) {
    for (const auto& center : lane_set.centers) grow(center);
  }
  for (const auto& stroke : scene.strokes) grow(stroke.line);

  Canvas canvas;
  canvas.init(lo, hi, 8.0);

  for (const auto& lane_set : scene.lanes) {
    for (const auto& center : lane_set.centers) {
      paint_band(canvas, center, w / 2.0, SemanticClass::DaCenter);
    }
  }

  std::vector<Polygon> roi_polys;
  for (const IntersectionStub& node : bundle.skeleton.intersections) {
    if (node.pseudo) continue;
    roi_polys.push_back(intersection_roi(bundle.skeleton, node.id).polygon);
  }
  for (const Polygon& poly : roi_polys) paint_polygon(canvas, poly, SemanticClass::DaCenter);

  Rng marking_rng(fork_seed(spec.seed, 11));
  for (const Stroke& stroke : scene.strokes) {
    paint_stroke(canvas, stroke, spec.dropout, marking_rng, roi_polys);
  }

  bundle.bev = BEVMap(kCell);
  for (int cj = 0; cj < canvas.height; ++cj) {
    for (int ci = 0; ci < canvas.width; ++ci) {
      const std::uint8_t label = canvas.at(ci, cj);
      if (label == 0) continue;
      bundle.bev.add_vote({static_cast<std::int32_t>(canvas.i0 + ci),
                           static_cast<std::int32_t>(canvas.j0 + cj)},
                          static_cast<SemanticClass>(label));
    }
  }

  // One drive per directed edge along its leftmost lane, 1 m/s at 1 m spacing.
  double clock = 0.0;
  for (const GroundTruthEdge& edge : bundle.edges) {
    const Polyline& drive = edge.lanes.front().center;
    const double total = polyline_length(drive);
    for (double s = 0.0; s <= total + 1e-9; s += 1.0) {
      const double sc = std::min(s, total);
      const Vec2 p = polyline_point_at(drive, sc);
      const Vec2 dir = polyline_direction_at(drive, sc);
      Pose pose;
      pose.timestamp = clock;
      clock += 1.0;
      pose.position = {p.x, p.y, spec.topography.height(p.x)};
      pose.yaw = std::atan2(dir.y, dir.x);
      bundle.poses.push_back(pose);
      if (sc >= total) break;
    }
  }

  bundle.camera = CameraModel::forward_facing(
      180.0, 180.0, bundle.frame_width / 2.0, bundle.frame_height / 2.0, {0.0, 0.0, 1.5});

  if (spec.emit_frames) {
    bundle.frames.reserve(bundle.poses.size());
    bundle.clouds.reserve(bundle.poses.size());
    for (std::size_t i = 0; i < bundle.poses.size(); ++i) {
      bundle.frames.push_back(render_frame(canvas, spec.topography, bundle.poses[i],
                                           bundle.camera, bundle.frame_width,
                                           bundle.frame_height));
      Rng cloud_rng(fork_seed(spec.seed, 0x1000 + i));
      bundle.clouds.push_back(make_cloud(bundle.poses[i], spec.topography, cloud_rng));
    }
  }
  return bundle;
}

std::string truth_to_json(const GroundTruthBundle& bundle) {
  nlohmann::json doc;
  auto polyline_json = [](const Polyline& pl) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Vec2& p : pl) arr.push_back({p.x, p.y});
    return arr;
  };

  nlohmann::json edges = nlohmann::json::array();
  for (const GroundTruthEdge& edge : bundle.edges) {
    nlohmann::json lanes = nlohmann::json::array();
    for (const GroundTruthLane& lane : edge.lanes) {
      lanes.push_back({{"center", polyline_json(lane.center)},
                       {"left", polyline_json(lane.left)},
                       {"right", polyline_json(lane.right)}});
    }
    edges.push_back({{"edge_id", edge.edge_id},
                     {"source", edge.source},
                     {"target", edge.target},
                     {"lanes", std::move(lanes)}});
  }
  doc["edges"] = std::move(edges);

  nlohmann::json connections = nlohmann::json::array();
  for (const ConnectionTuple& t : bundle.connections) {
    connections.push_back({t.in_edge, t.in_lane, t.out_edge, t.out_lane});
  }
  doc["connections"] = std::move(connections);

  nlohmann::json intersections = nlohmann::json::array();
  for (const IntersectionStub& node : bundle.skeleton.intersections) {
    intersections.push_back({{"id", node.id},
                             {"center", {node.center.x, node.center.y}},
                             {"pseudo", node.pseudo}});
  }
  doc["intersections"] = std::move(intersections);
  return doc.dump(2) + "\n";
}

void write_bundle(const GroundTruthBundle& bundle, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_text_file(dir + "/skeleton.json", serialize_network_json(bundle.network));
  write_bev_png(dir + "/bev.png", bundle.bev.to_raster());
  write_text_file(dir + "/truth.json", truth_to_json(bundle));
  write_poses_csv(dir + "/poses.csv", bundle.poses);
  write_camera_txt(dir + "/camera.txt", bundle.camera);

  if (!bundle.frames.empty()) {
    fs::create_directories(dir + "/frames");
    char name[32];
    for (std::size_t i = 0; i < bundle.frames.size(); ++i) {
      std::snprintf(name, sizeof(name), "/frames/%04zu.png", i);
      write_frame_png(dir + name, bundle.frames[i]);
    }
    for (std::size_t i = 0; i < bundle.clouds.size(); ++i) {
      std::snprintf(name, sizeof(name), "/cloud_%04zu.bin", i);
      write_point_cloud(dir + name, bundle.clouds[i]);
    }
  }
}

BEVMap corrupt(const BEVMap& bev, double flip_rate, std::uint64_t seed) {
  if (!(flip_rate >= 0.0 && flip_rate <= 0.2)) {
    throw ValidationError("flip_rate must lie in [0, 0.2]");
  }
  BEVRaster raster = bev.to_raster();
  Rng rng(seed);
  for (std::uint8_t& label : raster.labels) {
    if (label == 0) continue;
    if (rng.uniform01() >= flip_rate) continue;
    // Uniform over the other real classes (1..10 minus the current one).
    std::uint8_t pick = static_cast<std::uint8_t>(1 + rng.below(kSemanticClassCount - 2));
    if (pick >= label) ++pick;
    label = pick;
  }
  BEVMap out = BEVMap::from_raster(raster);
  return out;
}

}  // namespace lanecarto
