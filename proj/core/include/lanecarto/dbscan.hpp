#pragma once

#include <vector>

#include "lanecarto/geometry.hpp"

namespace lanecarto {

constexpr int kDbscanNoise = -1;

// Density-based clustering. Returns one label per input point: cluster ids
// 0..K-1 in order of discovery, kDbscanNoise for noise. Points are scanned
// and expanded in index order, so the labeling is deterministic for a given
// input order. Neighborhoods are closed balls (distance <= eps) and include
// the query point itself. Empty input yields an empty label vector.
std::vector<int> dbscan(const std::vector<Vec2>& points, double eps, int min_pts);

// Number of clusters in a dbscan label vector.
int cluster_count(const std::vector<int>& labels);

}  // namespace lanecarto
