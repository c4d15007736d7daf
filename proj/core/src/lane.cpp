#include "lanecarto/lane.hpp"

#include <algorithm>
#include <cmath>

#include "lanecarto/dbscan.hpp"
#include "lanecarto/piecewise.hpp"

namespace lanecarto {

Vec2 RoadFrame::to_frame(const Vec2& map_point) const {
  const Vec2 d = map_point - origin;
  const double c = std::cos(bearing), s = std::sin(bearing);
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

Vec2 RoadFrame::to_map(const Vec2& sd) const {
  const double c = std::cos(bearing), s = std::sin(bearing);
  return {origin.x + c * sd.x - s * sd.y, origin.y + s * sd.x + c * sd.y};
}

RoadFrame road_frame_from_edge(const AtomicRoadStub& stub) {
  RoadFrame frame;
  frame.origin = stub.polyline.front();
  const Vec2 d = stub.polyline.back() - stub.polyline.front();
  frame.bearing = std::atan2(d.y, d.x);
  return frame;
}

Vec2 CenterLine::map_tangent(double s) const {
  const double slope = profile.derivative(s);
  const double c = std::cos(frame.bearing), sn = std::sin(frame.bearing);
  const Vec2 t{c * 1.0 - sn * slope, sn * 1.0 + c * slope};
  return t.normalized();
}

std::vector<double> CenterLine::sample_abscissae(double spacing) const {
  std::vector<double> out;
  for (double s = s_begin; s < s_end - 1e-9; s += spacing) out.push_back(s);
  out.push_back(s_end);
  return out;
}

LaneBoundarySamples probe_width(const CenterLine& center, const BEVMap& bev,
                                double spacing, double probe_max, int da_run_length) {
  LaneBoundarySamples out;
  const double step = bev.cell_size();

  for (double s : center.sample_abscissae(spacing)) {
    const Vec2 w = center.map_point(s);
    const Vec2 normal = center.map_tangent(s).left_normal();

    BoundarySample sample;
    const SemanticClass here = bev.label_at_world(w);
    const SemanticClass own_da = is_drivable_area(here) ? here : SemanticClass::Unknown;

    auto march = [&](const Vec2& dir, double& offset, bool& clamped,
                     SemanticClass& stop_class) {
      SemanticClass base = own_da;
      int run = 0;
      offset = probe_max;
      clamped = true;
      stop_class = SemanticClass::Unknown;
      for (int k = 1; k * step <= probe_max + 1e-9; ++k) {
        const SemanticClass label = bev.label_at_world(w + dir * (k * step));
        if (label == SemanticClass::LmSolid || label == SemanticClass::LmDashed ||
            label == SemanticClass::Curb) {
          offset = k * step;
          clamped = false;
          stop_class = label;
          return;
        }
        if (is_drivable_area(label)) {
          if (base == SemanticClass::Unknown) {
            base = label;  // centerline over a non-DA cell: adopt the first DA seen
            run = 0;
          } else if (label != base) {
            if (++run >= da_run_length) {
              offset = (k - da_run_length + 1) * step;
              clamped = false;
              stop_class = label;
              return;
            }
          } else {
            run = 0;
          }
        } else {
          run = 0;
        }
      }
    };

    march(normal, sample.left, sample.left_clamped, sample.left_stop);
    march(normal * -1.0, sample.right, sample.right_clamped, sample.right_stop);
    sample.left = std::clamp(sample.left, 0.5, probe_max);
    sample.right = std::clamp(sample.right, 0.5, probe_max);

    out.left_polyline.push_back(w + normal * sample.left);
    out.right_polyline.push_back(w - normal * sample.right);
    out.samples.push_back(sample);
  }
  return out;
}

AtomicRoad build_atomic_road(const ParticleHistory& history, const BEVMap& bev,
                             const RoadFrame& frame, const RegressorConfig& cfg) {
  AtomicRoad road;
  if (history.steps.empty() || history.terminal_slots.empty()) return road;

  const std::vector<Particle> terminal = history.terminal_particles();
  std::vector<Vec2> positions;
  positions.reserve(terminal.size());
  for (const Particle& p : terminal) positions.push_back(p.position);
  const std::vector<int> labels = dbscan(positions, cfg.dbscan_eps, cfg.dbscan_min_pts);
  const int k_clusters = cluster_count(labels);

  const int steps = history.step_count();
  const int n = history.particle_count();
  for (int k = 0; k < k_clusters; ++k) {
    // Pool each ancestor state once: chains merge under resampling, and once
    // a (step, slot) is visited its whole ancestry already is too.
    std::vector<char> visited(static_cast<std::size_t>(steps) * n, 0);
    std::vector<Vec2> pooled;
    for (std::size_t i = 0; i < history.terminal_slots.size(); ++i) {
      if (labels[i] != k) continue;
      std::int32_t idx = history.terminal_slots[i];
      for (int t = steps - 1; t >= 0; --t) {
        char& seen = visited[static_cast<std::size_t>(t) * n + idx];
        if (seen) break;
        seen = 1;
        const ParticleRecord& rec = history.steps[t][idx];
        // Slots frozen at the intersection repeat their state verbatim each
        // step; pool that terminal position once, not once per step.
        const bool frozen_repeat =
            t > 0 && rec.parent == idx &&
            history.steps[t - 1][idx].particle.position.x == rec.particle.position.x &&
            history.steps[t - 1][idx].particle.position.y == rec.particle.position.y;
        if (!frozen_repeat) pooled.push_back(rec.particle.position);
        if (rec.parent >= 0) idx = rec.parent;
      }
    }

    std::vector<Vec2> sd;
    sd.reserve(pooled.size());
    double s_lo = 0.0, s_hi = 0.0;
    for (std::size_t i = 0; i < pooled.size(); ++i) {
      const Vec2 p = frame.to_frame(pooled[i]);
      if (i == 0) {
        s_lo = s_hi = p.x;
      } else {
        s_lo = std::min(s_lo, p.x);
        s_hi = std::max(s_hi, p.x);
      }
      sd.push_back(p);
    }
    if (sd.size() < 8 || s_hi - s_lo < cfg.min_cluster_span) continue;

    if (sd.size() > cfg.max_fit_points) {
      const std::size_t stride = (sd.size() + cfg.max_fit_points - 1) / cfg.max_fit_points;
      std::vector<Vec2> thinned;
      thinned.reserve(cfg.max_fit_points + 1);
      for (std::size_t i = 0; i < sd.size(); i += stride) thinned.push_back(sd[i]);
      sd = std::move(thinned);
    }

    const PiecewiseLinear fit = fit_piecewise_auto(sd, cfg.max_breaks, cfg.lambda);

    // Spline knots: the fit's breakpoints, minus any sitting within one
    // way-point spacing of the data ends or of the previous knot. A
    // near-duplicate knot makes the natural-spline system ill-conditioned
    // and the interpolant oscillates wildly between the remaining knots.
    std::vector<double> knots{fit.s_min};
    for (double b : fit.breaks) {
      if (b - knots.back() >= cfg.waypoint_spacing &&
          fit.s_max - b >= cfg.waypoint_spacing) {
        knots.push_back(b);
      }
    }
    knots.push_back(fit.s_max);
    std::vector<double> values;
    values.reserve(knots.size());
    for (double s : knots) values.push_back(fit.evaluate(s));

    Lane lane;
    lane.center.frame = frame;
    lane.center.breakpoints.assign(knots.begin() + 1, knots.end() - 1);
    lane.center.profile = NaturalSpline(knots, values);
    lane.center.s_begin = fit.s_min;
    lane.center.s_end = fit.s_max;
    lane.center.waypoint_spacing = cfg.waypoint_spacing;
    for (double s : lane.center.sample_abscissae(cfg.waypoint_spacing)) {
      lane.center.waypoints.push_back(lane.center.map_point(s));
    }
    lane.boundaries = probe_width(lane.center, bev, cfg.waypoint_spacing,
                                  cfg.probe_max, cfg.da_run_length);
    lane.start_offset = lane.center.profile.values().front();
    road.lanes.push_back(std::move(lane));
  }

  // Left-to-right: descending signed lateral offset (d grows to the left).
  std::stable_sort(road.lanes.begin(), road.lanes.end(),
                   [](const Lane& a, const Lane& b) { return a.start_offset > b.start_offset; });
  return road;
}

}  // namespace lanecarto
