#include "lanecarto/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <unordered_map>

namespace lanecarto {
namespace {

constexpr int kUnvisited = -2;

std::uint64_t grid_key(std::int32_t gx, std::int32_t gy) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(gx)) << 32) |
         static_cast<std::uint32_t>(gy);
}

}  // namespace

std::vector<int> dbscan(const std::vector<Vec2>& points, double eps, int min_pts) {
  const int n = static_cast<int>(points.size());
  std::vector<int> labels(n, kUnvisited);
  if (n == 0) return labels;

  // Bucket points into an eps-sized grid so a neighborhood query only
  // touches the 3x3 surrounding cells.
  const double cell = eps > 0.0 ? eps : 1.0;
  std::unordered_map<std::uint64_t, std::vector<int>> grid;
  auto cell_of = [&](const Vec2& p) {
    return std::pair<std::int32_t, std::int32_t>{
        static_cast<std::int32_t>(std::floor(p.x / cell)),
        static_cast<std::int32_t>(std::floor(p.y / cell))};
  };
  for (int i = 0; i < n; ++i) {
    auto [gx, gy] = cell_of(points[i]);
    grid[grid_key(gx, gy)].push_back(i);
  }

  const double eps2 = eps * eps;
  std::vector<int> nbrs;
  auto region_query = [&](int i) {
    nbrs.clear();
    auto [gx, gy] = cell_of(points[i]);
    for (std::int32_t dy = -1; dy <= 1; ++dy) {
      for (std::int32_t dx = -1; dx <= 1; ++dx) {
        auto it = grid.find(grid_key(gx + dx, gy + dy));
        if (it == grid.end()) continue;
        for (int j : it->second) {
          const Vec2 d = points[j] - points[i];
          if (d.dot(d) <= eps2) nbrs.push_back(j);
        }
      }
    }
    std::sort(nbrs.begin(), nbrs.end());
  };

  int next_cluster = 0;
  std::deque<int> seeds;
  for (int i = 0; i < n; ++i) {
    if (labels[i] != kUnvisited) continue;
    region_query(i);
    if (static_cast<int>(nbrs.size()) < min_pts) {
      labels[i] = kDbscanNoise;
      continue;
    }
    const int c = next_cluster++;
    labels[i] = c;
    seeds.assign(nbrs.begin(), nbrs.end());
    while (!seeds.empty()) {
      const int q = seeds.front();
      seeds.pop_front();
      if (labels[q] == kDbscanNoise) labels[q] = c;  // border point adoption
      if (labels[q] != kUnvisited) continue;
      labels[q] = c;
      region_query(q);
      if (static_cast<int>(nbrs.size()) >= min_pts) {
        seeds.insert(seeds.end(), nbrs.begin(), nbrs.end());
      }
    }
  }
  return labels;
}

int cluster_count(const std::vector<int>& labels) {
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  return max_label + 1;
}

}  // namespace lanecarto
