#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "lanecarto/geometry.hpp"
#include "lanecarto/semantics.hpp"

namespace lanecarto {

// Integer cell coordinates in the map frame. Cell (i, j) covers the square
// [i*cell, (i+1)*cell) x [j*cell, (j+1)*cell); i grows with +x, j with +y.
struct CellIndex {
  std::int32_t i = 0;
  std::int32_t j = 0;

  bool operator==(const CellIndex& o) const { return i == o.i && j == o.j; }
};

// Dense label patch in map-frame cells, the output of projecting one frame.
// labels[r * width + c] belongs to cell (origin.i + c, origin.j + r);
// Unknown marks cells the frame did not observe.
struct BEVPatch {
  CellIndex origin;
  std::int32_t width = 0;
  std::int32_t height = 0;
  std::vector<std::uint8_t> labels;

  std::uint8_t at(std::int32_t c, std::int32_t r) const {
    return labels[static_cast<std::size_t>(r) * width + c];
  }
  void set(std::int32_t c, std::int32_t r, SemanticClass cls) {
    labels[static_cast<std::size_t>(r) * width + c] = static_cast<std::uint8_t>(cls);
  }
};

// Dense resolved-label snapshot of a map region (for raster I/O).
struct BEVRaster {
  CellIndex origin;
  std::int32_t width = 0;
  std::int32_t height = 0;
  double cell_size = 0.1;
  std::vector<std::uint8_t> labels;

  std::uint8_t at(std::int32_t c, std::int32_t r) const {
    return labels[static_cast<std::size_t>(r) * width + c];
  }
};

// Accumulated bird's-eye-view semantic grid. Sparse tiles of per-class vote
// counters; the resolved label of a cell is the argmax vote (ties go to the
// higher class code, no votes resolves to Unknown).
class BEVMap {
 public:
  using VoteRow = std::array<std::uint16_t, kSemanticClassCount>;

  explicit BEVMap(double cell_size = 0.1) : cell_size_(cell_size) {}

  double cell_size() const { return cell_size_; }

  CellIndex world_to_cell(const Vec2& p) const;
  Vec2 cell_center(const CellIndex& c) const;

  // Saturating add; votes for Unknown are ignored (Unknown = not observed).
  void add_vote(const CellIndex& c, SemanticClass cls, std::uint16_t count = 1);
  void accumulate(const BEVPatch& patch);

  VoteRow votes_at(const CellIndex& c) const;
  SemanticClass label_at(const CellIndex& c) const;
  SemanticClass label_at_world(const Vec2& p) const;

  struct Bounds {
    CellIndex min;
    CellIndex max;  // inclusive
  };
  // Bounding box of cells with at least one vote; empty for an empty map.
  std::optional<Bounds> bounds() const;

  std::size_t voted_cell_count() const;
  bool empty() const { return tiles_.empty(); }
  void clear() { tiles_.clear(); }

  void for_each_voted_cell(
      const std::function<void(const CellIndex&, const VoteRow&)>& fn) const;

  BEVRaster to_raster() const;
  // Rebuilds a map from a snapshot, one vote per labeled cell.
  static BEVMap from_raster(const BEVRaster& raster);

  static constexpr std::int32_t kTileSize = 128;

 private:
  struct Tile {
    std::vector<std::uint16_t> votes;  // kTileSize^2 * kSemanticClassCount
  };

  static std::uint64_t tile_key(std::int32_t tx, std::int32_t ty);
  std::uint16_t* cell_votes(const CellIndex& c, bool create);
  const std::uint16_t* cell_votes(const CellIndex& c) const;

  double cell_size_;
  std::unordered_map<std::uint64_t, Tile> tiles_;
};

}  // namespace lanecarto
