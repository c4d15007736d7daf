#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace lanecarto {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
  Vec2 normalized() const {
    double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
  }
  // Counter-clockwise rotation by angle (radians).
  Vec2 rotated(double angle) const {
    double c = std::cos(angle), s = std::sin(angle);
    return {c * x - s * y, s * x + c * y};
  }
  // Left-hand normal (90 degrees CCW).
  Vec2 left_normal() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Vec2 xy() const { return {x, y}; }
};

// Row-major 3x3 rotation / linear map.
struct Mat3 {
  double m[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return Mat3{}; }
  static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2);
  // Yaw-pitch-roll (Z-Y-X intrinsic): R = Rz(yaw) * Ry(pitch) * Rx(roll).
  static Mat3 from_ypr(double yaw, double pitch, double roll);

  Vec3 operator*(const Vec3& v) const;
  Mat3 operator*(const Mat3& o) const;
  Mat3 transposed() const;
  double operator()(int r, int c) const { return m[r * 3 + c]; }
  double& operator()(int r, int c) { return m[r * 3 + c]; }
  // Max |R*R^T - I| entry; 0 for exact rotations.
  double orthonormality_error() const;
};

// Normalize angle to (-pi, pi].
double normalize_angle(double a);

// 2D pose: position plus heading.
struct PlanarPose {
  Vec2 position;
  double yaw = 0.0;
};

using Polyline = std::vector<Vec2>;
using Polygon = std::vector<Vec2>;  // implicit closure last->first

double polyline_length(const Polyline& pl);
Vec2 polyline_point_at(const Polyline& pl, double s);     // clamped arclength
Vec2 polyline_direction_at(const Polyline& pl, double s); // unit tangent

struct PolylineProjection {
  double offset = 0.0;    // arclength of the closest point
  double distance = 0.0;  // perpendicular (closest) distance
  Vec2 point;             // the closest point itself
  std::size_t segment = 0;
};
PolylineProjection project_onto_polyline(const Polyline& pl, const Vec2& p);

double segment_distance(const Vec2& a, const Vec2& b, const Vec2& p);

// Signed area (positive for CCW).
double polygon_area(const Polygon& poly);
Vec2 polygon_centroid(const Polygon& poly);
// Ray-cast containment; points on the boundary count as inside.
bool point_in_polygon(const Polygon& poly, const Vec2& p, double eps = 1e-9);
bool point_strictly_in_polygon(const Polygon& poly, const Vec2& p, double eps = 1e-9);
// True if no two non-adjacent edges intersect.
bool polygon_is_simple(const Polygon& poly, double eps = 1e-12);

// Directed Hausdorff distance from points of `a` to polyline `b`.
double directed_hausdorff(const Polyline& a, const Polyline& b);

// Resample a polyline at (roughly) fixed arclength spacing, endpoints kept.
Polyline resample_polyline(const Polyline& pl, double spacing);

}  // namespace lanecarto
