#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace lanecarto {

// Per-pixel segmentation classes. The integer codes are the palette indices
// of the raster files and are stable across the toolkit.
enum class SemanticClass : std::uint8_t {
  Unknown = 0,
  DaCenter = 1,     // ego lane
  DaLeft = 2,       // neighboring lane, left
  DaLeftLeft = 3,   // second lane to the left
  DaRight = 4,
  DaRightRight = 5,
  LmDashed = 6,     // dashed lane marking
  LmSolid = 7,      // solid lane marking
  Crosswalk = 8,
  Curb = 9,
  StopLine = 10,
};

inline constexpr int kSemanticClassCount = 11;

inline bool is_drivable_area(SemanticClass c) {
  return c >= SemanticClass::DaCenter && c <= SemanticClass::DaRightRight;
}

// Classes a vehicle footprint may not touch.
inline bool is_hard_boundary(SemanticClass c) {
  return c == SemanticClass::LmSolid || c == SemanticClass::Curb;
}

// Classes a vehicle may drive over (dashed markings and crosswalks are
// painted on drivable surface).
inline bool is_traversable(SemanticClass c) {
  return is_drivable_area(c) || c == SemanticClass::LmDashed ||
         c == SemanticClass::Crosswalk;
}

// Classes that terminate a lateral width probe.
inline bool is_probe_stop(SemanticClass c) {
  return c == SemanticClass::LmSolid || c == SemanticClass::LmDashed ||
         c == SemanticClass::Curb;
}

std::string_view semantic_class_name(SemanticClass c);

struct Rgb {
  std::uint8_t r, g, b;
};

// Palette written into indexed PNG rasters; index == class code.
const std::array<Rgb, kSemanticClassCount>& semantic_palette();

}  // namespace lanecarto
