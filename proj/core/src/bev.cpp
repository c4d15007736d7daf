#include "lanecarto/bev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lanecarto {
namespace {

std::int32_t floor_div(std::int32_t a, std::int32_t b) {
  std::int32_t q = a / b;
  if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

SemanticClass resolve_votes(const std::uint16_t* row) {
  int best = 0;
  std::uint16_t best_count = 0;
  for (int cls = 1; cls < kSemanticClassCount; ++cls) {
    if (row[cls] >= best_count && row[cls] > 0) {
      best_count = row[cls];
      best = cls;
    }
  }
  return static_cast<SemanticClass>(best);
}

}  // namespace

CellIndex BEVMap::world_to_cell(const Vec2& p) const {
  return {static_cast<std::int32_t>(std::floor(p.x / cell_size_)),
          static_cast<std::int32_t>(std::floor(p.y / cell_size_))};
}

Vec2 BEVMap::cell_center(const CellIndex& c) const {
  return {(c.i + 0.5) * cell_size_, (c.j + 0.5) * cell_size_};
}

std::uint64_t BEVMap::tile_key(std::int32_t tx, std::int32_t ty) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(tx)) << 32) |
         static_cast<std::uint32_t>(ty);
}

std::uint16_t* BEVMap::cell_votes(const CellIndex& c, bool create) {
  const std::int32_t tx = floor_div(c.i, kTileSize), ty = floor_div(c.j, kTileSize);
  auto it = tiles_.find(tile_key(tx, ty));
  if (it == tiles_.end()) {
    if (!create) return nullptr;
    it = tiles_.emplace(tile_key(tx, ty), Tile{}).first;
    it->second.votes.assign(
        static_cast<std::size_t>(kTileSize) * kTileSize * kSemanticClassCount, 0);
  }
  const std::int32_t lx = c.i - tx * kTileSize, ly = c.j - ty * kTileSize;
  return &it->second.votes[(static_cast<std::size_t>(ly) * kTileSize + lx) *
                           kSemanticClassCount];
}

const std::uint16_t* BEVMap::cell_votes(const CellIndex& c) const {
  return const_cast<BEVMap*>(this)->cell_votes(c, false);
}

void BEVMap::add_vote(const CellIndex& c, SemanticClass cls, std::uint16_t count) {
  if (cls == SemanticClass::Unknown || count == 0) return;
  std::uint16_t* row = cell_votes(c, true);
  std::uint32_t next = static_cast<std::uint32_t>(row[static_cast<int>(cls)]) + count;
  row[static_cast<int>(cls)] =
      static_cast<std::uint16_t>(std::min<std::uint32_t>(next, 0xffffu));
}

void BEVMap::accumulate(const BEVPatch& patch) {
  for (std::int32_t r = 0; r < patch.height; ++r) {
    for (std::int32_t c = 0; c < patch.width; ++c) {
      const std::uint8_t label = patch.at(c, r);
      if (label == 0 || label >= kSemanticClassCount) continue;
      add_vote({patch.origin.i + c, patch.origin.j + r},
               static_cast<SemanticClass>(label));
    }
  }
}

BEVMap::VoteRow BEVMap::votes_at(const CellIndex& c) const {
  VoteRow out{};
  if (const std::uint16_t* row = cell_votes(c)) {
    std::copy(row, row + kSemanticClassCount, out.begin());
  }
  return out;
}

SemanticClass BEVMap::label_at(const CellIndex& c) const {
  const std::uint16_t* row = cell_votes(c);
  return row ? resolve_votes(row) : SemanticClass::Unknown;
}

SemanticClass BEVMap::label_at_world(const Vec2& p) const {
  return label_at(world_to_cell(p));
}

void BEVMap::for_each_voted_cell(
    const std::function<void(const CellIndex&, const VoteRow&)>& fn) const {
  for (const auto& [key, tile] : tiles_) {
    const std::int32_t tx = static_cast<std::int32_t>(key >> 32);
    const std::int32_t ty = static_cast<std::int32_t>(key & 0xffffffffu);
    for (std::int32_t ly = 0; ly < kTileSize; ++ly) {
      for (std::int32_t lx = 0; lx < kTileSize; ++lx) {
        const std::uint16_t* row =
            &tile.votes[(static_cast<std::size_t>(ly) * kTileSize + lx) *
                        kSemanticClassCount];
        bool any = false;
        for (int cls = 1; cls < kSemanticClassCount && !any; ++cls) any = row[cls] > 0;
        if (!any) continue;
        VoteRow out{};
        std::copy(row, row + kSemanticClassCount, out.begin());
        fn({tx * kTileSize + lx, ty * kTileSize + ly}, out);
      }
    }
  }
}

std::optional<BEVMap::Bounds> BEVMap::bounds() const {
  std::optional<Bounds> out;
  for_each_voted_cell([&](const CellIndex& c, const VoteRow&) {
    if (!out) {
      out = Bounds{c, c};
      return;
    }
    out->min.i = std::min(out->min.i, c.i);
    out->min.j = std::min(out->min.j, c.j);
    out->max.i = std::max(out->max.i, c.i);
    out->max.j = std::max(out->max.j, c.j);
  });
  return out;
}

std::size_t BEVMap::voted_cell_count() const {
  std::size_t n = 0;
  for_each_voted_cell([&](const CellIndex&, const VoteRow&) { ++n; });
  return n;
}

BEVRaster BEVMap::to_raster() const {
  BEVRaster raster;
  raster.cell_size = cell_size_;
  const auto box = bounds();
  if (!box) return raster;
  raster.origin = box->min;
  raster.width = box->max.i - box->min.i + 1;
  raster.height = box->max.j - box->min.j + 1;
  raster.labels.assign(static_cast<std::size_t>(raster.width) * raster.height, 0);
  for_each_voted_cell([&](const CellIndex& c, const VoteRow& row) {
    raster.labels[static_cast<std::size_t>(c.j - raster.origin.j) * raster.width +
                  (c.i - raster.origin.i)] =
        static_cast<std::uint8_t>(resolve_votes(row.data()));
  });
  return raster;
}

BEVMap BEVMap::from_raster(const BEVRaster& raster) {
  BEVMap map(raster.cell_size);
  for (std::int32_t r = 0; r < raster.height; ++r) {
    for (std::int32_t c = 0; c < raster.width; ++c) {
      const std::uint8_t label = raster.at(c, r);
      if (label == 0 || label >= kSemanticClassCount) continue;
      map.add_vote({raster.origin.i + c, raster.origin.j + r},
                   static_cast<SemanticClass>(label));
    }
  }
  return map;
}

}  // namespace lanecarto
