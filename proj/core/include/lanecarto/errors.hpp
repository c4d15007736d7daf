#pragma once

#include <stdexcept>
#include <string>

namespace lanecarto {

// Bad input files / documents: malformed XML, JSON, config syntax.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally valid input violating a contract (missing node refs, bad ranges).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Unknown ids, empty maps.
struct LookupError : std::runtime_error {
  explicit LookupError(const std::string& what) : std::runtime_error(what) {}
};

// Numerically degenerate input (collinear clouds, duplicate knots).
struct DegenerateInputError : std::runtime_error {
  explicit DegenerateInputError(const std::string& what) : std::runtime_error(what) {}
};

// Frame / pose timestamp mismatch beyond the sync tolerance.
struct SyncError : std::runtime_error {
  explicit SyncError(const std::string& what) : std::runtime_error(what) {}
};

// Particle population died before reaching the target region.
struct ExtinctionError : std::runtime_error {
  explicit ExtinctionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lanecarto
