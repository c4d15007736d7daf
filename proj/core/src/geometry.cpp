#include "lanecarto/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

namespace lanecarto {

Mat3 Mat3::from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
  Mat3 r;
  r.m[0] = r0.x; r.m[1] = r0.y; r.m[2] = r0.z;
  r.m[3] = r1.x; r.m[4] = r1.y; r.m[5] = r1.z;
  r.m[6] = r2.x; r.m[7] = r2.y; r.m[8] = r2.z;
  return r;
}

Mat3 Mat3::from_ypr(double yaw, double pitch, double roll) {
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cr = std::cos(roll), sr = std::sin(roll);
  Mat3 r;
  r.m[0] = cy * cp; r.m[1] = cy * sp * sr - sy * cr; r.m[2] = cy * sp * cr + sy * sr;
  r.m[3] = sy * cp; r.m[4] = sy * sp * sr + cy * cr; r.m[5] = sy * sp * cr - cy * sr;
  r.m[6] = -sp;     r.m[7] = cp * sr;                r.m[8] = cp * cr;
  return r;
}

Vec3 Mat3::operator*(const Vec3& v) const {
  return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
          m[3] * v.x + m[4] * v.y + m[5] * v.z,
          m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += m[i * 3 + k] * o.m[k * 3 + j];
      r.m[i * 3 + j] = s;
    }
  return r;
}

Mat3 Mat3::transposed() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[j * 3 + i] = m[i * 3 + j];
  return r;
}

double Mat3::orthonormality_error() const {
  Mat3 rrt = (*this) * transposed();
  double err = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      err = std::max(err, std::abs(rrt.m[i * 3 + j] - (i == j ? 1.0 : 0.0)));
  return err;
}

double normalize_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

double polyline_length(const Polyline& pl) {
  double len = 0.0;
  for (std::size_t i = 1; i < pl.size(); ++i) len += (pl[i] - pl[i - 1]).norm();
  return len;
}

Vec2 polyline_point_at(const Polyline& pl, double s) {
  if (pl.empty()) return {};
  if (s <= 0.0) return pl.front();
  for (std::size_t i = 1; i < pl.size(); ++i) {
    double seg = (pl[i] - pl[i - 1]).norm();
    if (s <= seg) {
      double t = seg > 0.0 ? s / seg : 0.0;
      return pl[i - 1] + (pl[i] - pl[i - 1]) * t;
    }
    s -= seg;
  }
  return pl.back();
}

Vec2 polyline_direction_at(const Polyline& pl, double s) {
  if (pl.size() < 2) return {1.0, 0.0};
  for (std::size_t i = 1; i < pl.size(); ++i) {
    double seg = (pl[i] - pl[i - 1]).norm();
    if (s <= seg || i + 1 == pl.size()) return (pl[i] - pl[i - 1]).normalized();
    s -= seg;
  }
  return (pl.back() - pl[pl.size() - 2]).normalized();
}

double segment_distance(const Vec2& a, const Vec2& b, const Vec2& p) {
  Vec2 ab = b - a;
  double len2 = ab.squared_norm();
  if (len2 == 0.0) return (p - a).norm();
  double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

PolylineProjection project_onto_polyline(const Polyline& pl, const Vec2& p) {
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  if (pl.empty()) return best;
  if (pl.size() == 1) return {0.0, (p - pl[0]).norm(), pl[0], 0};

  double s_base = 0.0;
  for (std::size_t i = 1; i < pl.size(); ++i) {
    Vec2 a = pl[i - 1], b = pl[i];
    Vec2 ab = b - a;
    double len2 = ab.squared_norm();
    double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    Vec2 q = a + ab * t;
    double d = (p - q).norm();
    if (d < best.distance) {
      best.distance = d;
      best.point = q;
      best.offset = s_base + t * std::sqrt(len2);
      best.segment = i - 1;
    }
    s_base += std::sqrt(len2);
  }
  return best;
}

double polygon_area(const Polygon& poly) {
  double a = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    a += p.cross(q);
  }
  return 0.5 * a;
}

Vec2 polygon_centroid(const Polygon& poly) {
  const std::size_t n = poly.size();
  double a = polygon_area(poly);
  if (std::abs(a) < 1e-12) {
    Vec2 c;
    for (const Vec2& p : poly) c += p;
    return n ? c / static_cast<double>(n) : c;
  }
  Vec2 c;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    double w = p.cross(q);
    c += (p + q) * w;
  }
  return c / (6.0 * a);
}

namespace {
bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p, double eps) {
  return segment_distance(a, b, p) <= eps;
}
}  // namespace

bool point_in_polygon(const Polygon& poly, const Vec2& p, double eps) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (on_segment(poly[i], poly[(i + 1) % n], p, eps)) return true;

  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      double xi = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < xi) inside = !inside;
    }
  }
  return inside;
}

bool point_strictly_in_polygon(const Polygon& poly, const Vec2& p, double eps) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (on_segment(poly[i], poly[(i + 1) % n], p, eps)) return false;
  return point_in_polygon(poly, p, 0.0);
}

namespace {
// Proper segment intersection test (shared endpoints excluded by caller).
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d,
                        double eps) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return (q - p).cross(r - p);
  };
  double o1 = orient(a, b, c), o2 = orient(a, b, d);
  double o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (((o1 > eps && o2 < -eps) || (o1 < -eps && o2 > eps)) &&
      ((o3 > eps && o4 < -eps) || (o3 < -eps && o4 > eps)))
    return true;
  return false;
}
}  // namespace

bool polygon_is_simple(const Polygon& poly, double eps) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // skip adjacent edges (share a vertex)
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n], eps))
        return false;
    }
  }
  return true;
}

double directed_hausdorff(const Polyline& a, const Polyline& b) {
  double worst = 0.0;
  for (const Vec2& p : a) {
    double best = std::numeric_limits<double>::infinity();
    if (b.size() == 1) best = (p - b[0]).norm();
    for (std::size_t i = 1; i < b.size(); ++i)
      best = std::min(best, segment_distance(b[i - 1], b[i], p));
    worst = std::max(worst, best);
  }
  return worst;
}

Polyline resample_polyline(const Polyline& pl, double spacing) {
  Polyline out;
  if (pl.empty() || spacing <= 0.0) return pl;
  double len = polyline_length(pl);
  if (len == 0.0) return {pl.front()};
  std::size_t n = std::max<std::size_t>(2, static_cast<std::size_t>(std::round(len / spacing)) + 1);
  double step = len / static_cast<double>(n - 1);
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(polyline_point_at(pl, step * static_cast<double>(i)));
  return out;
}

}  // namespace lanecarto
