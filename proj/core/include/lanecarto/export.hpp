#pragma once

#include <string>

#include "lanecarto/pipeline.hpp"

namespace lanecarto {

enum class ExportFormat { GeoJson, LaneletJson, Svg };

// "geojson" | "lanelet-json" | "svg"; anything else is a ValidationError.
ExportFormat parse_export_format(const std::string& name);

// FeatureCollection with one LineString per lane center line, one Polygon
// per lane surface and one LineString per intersection connection, each
// tagged with a "role" property. An empty document yields an empty
// FeatureCollection.
std::string export_geojson(const HDMapDocument& doc);

// Flat lanelet list: left/right bounds, center line and successor relations
// (successor ids are lanelet ids, derived from the intersection
// connections).
std::string export_lanelet_json(const HDMapDocument& doc);

// Inverse of export_lanelet_json as far as the lane geometry goes: roads and
// lanes are reconstructed (within float round-trip accuracy), intersections
// and skeleton are not.
HDMapDocument import_lanelet_json(const std::string& text);

// Standalone plot: lane surfaces filled, lane boundaries dotted, connection
// trajectories dotted, center lines solid; viewBox fits the document bounds.
std::string export_svg(const HDMapDocument& doc);

std::string export_document(const HDMapDocument& doc, ExportFormat format);

}  // namespace lanecarto
