#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lanecarto/bev.hpp"
#include "lanecarto/errors.hpp"
#include "lanecarto/geometry.hpp"
#include "lanecarto/rng.hpp"
#include "lanecarto/skeleton.hpp"

namespace lanecarto {

// One simulated sedan: state [x, y, phi] plus its current filter weight.
// The footprint (length x width, from ExplorationConfig) is centered on
// position and aligned with phi.
struct Particle {
  Vec2 position;
  double phi = 0.0;  // kept in (-pi, pi]
  double weight = 0.0;
};

enum class ParticleStatus : std::uint8_t {
  Alive = 0,
  ReachedRoi,          // frozen inside the target intersection ROI
  TerminatedBoundary,  // footprint hit a hard boundary (or left the map)
  TerminatedStop,      // stop-line overlap, reported by weigh
  MaxSteps,            // still alive when the step budget ran out
};

const char* particle_status_name(ParticleStatus status);

struct ExplorationConfig {
  int particle_count = 500;
  double v_min = 0.9, v_max = 1.1;          // m/s, uniform per particle per step
  double omega_min = -0.2, omega_max = 0.2; // rad, uniform per particle per step
  double dt = 0.5;                          // s
  double footprint_length = 3.0;            // m, along heading
  double footprint_width = 1.5;             // m
  double boundary_kill_fraction = 0.05;     // kill when boundary share exceeds this
  double stop_fraction = 0.3;               // stop-line share that reports a stop
  int max_steps = 0;                        // 0: derived from start-to-ROI distance
  std::uint64_t rng_seed = 1;

  // Throws ValidationError on nonsensical values.
  void validate() const;
};

struct ParticleSet {
  std::vector<Particle> particles;
  std::vector<ParticleStatus> status;  // parallel to particles

  int size() const { return static_cast<int>(particles.size()); }
};

// Per-slot record of one step: state after motion and weighing, and the slot
// index at the previous step this state descends from (resampling assignment;
// -1 at step 0, own index for slots that were not resampled).
struct ParticleRecord {
  Particle particle;
  ParticleStatus status = ParticleStatus::Alive;
  std::int32_t parent = -1;
};

struct ParticleHistory {
  // steps[t][n]: slot n at step t; every step holds all N slots.
  std::vector<std::vector<ParticleRecord>> steps;
  // Slots that finished the exploration: frozen in the ROI, stopped on a
  // stop line, or alive at the step budget. Boundary-killed slots are not
  // part of the terminal set.
  std::vector<std::int32_t> terminal_slots;

  int step_count() const { return static_cast<int>(steps.size()); }
  int particle_count() const {
    return steps.empty() ? 0 : static_cast<int>(steps.front().size());
  }
  bool reached_roi() const;
  std::vector<Particle> terminal_particles() const;

  // Ancestry walk from the slot's final record back to step 0; consecutive
  // duplicate positions (frozen slots) are collapsed.
  Polyline trajectory_of(std::int32_t slot) const;
};

// Extinction carrying whatever history accumulated before the population died.
class ExtinctionWithHistory : public ExtinctionError {
 public:
  ExtinctionWithHistory(const std::string& message, ParticleHistory history)
      : ExtinctionError(message),
        history_(std::make_shared<ParticleHistory>(std::move(history))) {}

  const ParticleHistory& history() const { return *history_; }

 private:
  std::shared_ptr<ParticleHistory> history_;
};

// N particles on a strip of length entry_width centered at start,
// perpendicular to the start heading; uniform weights 1/N.
ParticleSet init_particles(const PlanarPose& start, const ExplorationConfig& cfg,
                           double entry_width);

// Motion model: x' = x + cos(phi+omega) * v * dt, y' = y + sin(phi+omega) * v * dt,
// phi' = normalize(phi + omega * dt).
Particle predict(const Particle& p, double v, double omega, double dt);

struct WeighResult {
  double weight = 0.0;
  ParticleStatus status = ParticleStatus::Alive;  // Alive / TerminatedBoundary / TerminatedStop
};

// Footprint-overlap weight: drivable share scaled down by boundary share,
// zero + kill past the boundary threshold, stop status past the stop-line
// threshold. A footprint entirely over unobserved cells is a kill.
WeighResult weigh(const Particle& p, const BEVMap& bev, const ExplorationConfig& cfg);

// Systematic (low-variance) resampling over the alive slots; one uniform
// offset drawn from rng. Returns the parent slot per slot (identity for
// non-alive slots). Throws ExtinctionError when all alive weights are zero.
std::vector<std::int32_t> resample(ParticleSet& set, Rng& rng);

// Algorithm: init a particle strip, then loop predict -> ROI freeze -> weigh
// -> record -> resample until no slot is alive or the step budget is hit.
// Throws ExtinctionWithHistory when the population dies before any terminal
// particle exists.
ParticleHistory explore(const BEVMap& bev, const PlanarPose& start,
                        const IntersectionROI& target_roi,
                        const ExplorationConfig& cfg, double entry_width);

// Debug dump (JSON text) for plotting particle clouds and trajectories.
std::string particle_history_to_json(const ParticleHistory& history);

}  // namespace lanecarto
