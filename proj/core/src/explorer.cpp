#include "lanecarto/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

namespace lanecarto {

const char* particle_status_name(ParticleStatus status) {
  switch (status) {
    case ParticleStatus::Alive: return "alive";
    case ParticleStatus::ReachedRoi: return "reached-roi";
    case ParticleStatus::TerminatedBoundary: return "terminated-boundary";
    case ParticleStatus::TerminatedStop: return "terminated-stop";
    case ParticleStatus::MaxSteps: return "max-steps";
  }
  return "unknown";
}

void ExplorationConfig::validate() const {
  if (particle_count < 1) throw ValidationError("particle_count must be >= 1");
  if (v_min > v_max) throw ValidationError("v_min exceeds v_max");
  if (omega_min > omega_max) throw ValidationError("omega_min exceeds omega_max");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (footprint_length <= 0.0 || footprint_width <= 0.0) {
    throw ValidationError("footprint dimensions must be positive");
  }
  if (boundary_kill_fraction <= 0.0 || boundary_kill_fraction > 1.0) {
    throw ValidationError("boundary_kill_fraction must lie in (0, 1]");
  }
}

ParticleSet init_particles(const PlanarPose& start, const ExplorationConfig& cfg,
                           double entry_width) {
  cfg.validate();
  if (!(entry_width > 0.0)) throw ValidationError("entry_width must be positive");

  const int n = cfg.particle_count;
  const Vec2 perp = Vec2{std::cos(start.yaw), std::sin(start.yaw)}.left_normal();
  ParticleSet set;
  set.particles.resize(n);
  set.status.assign(n, ParticleStatus::Alive);
  for (int k = 0; k < n; ++k) {
    const double offset =
        n == 1 ? 0.0 : -entry_width / 2.0 + entry_width * k / (n - 1);
    set.particles[k].position = start.position + perp * offset;
    set.particles[k].phi = normalize_angle(start.yaw);
    set.particles[k].weight = 1.0 / n;
  }
  return set;
}

Particle predict(const Particle& p, double v, double omega, double dt) {
  Particle out = p;
  out.position.x = p.position.x + std::cos(p.phi + omega) * v * dt;
  out.position.y = p.position.y + std::sin(p.phi + omega) * v * dt;
  out.phi = normalize_angle(p.phi + omega * dt);
  return out;
}

WeighResult weigh(const Particle& p, const BEVMap& bev, const ExplorationConfig& cfg) {
  const double pitch = bev.cell_size();
  const int nx = std::max(1, static_cast<int>(std::lround(cfg.footprint_length / pitch)));
  const int ny = std::max(1, static_cast<int>(std::lround(cfg.footprint_width / pitch)));
  const Vec2 dir{std::cos(p.phi), std::sin(p.phi)};
  const Vec2 perp = dir.left_normal();

  int observed = 0, drivable = 0, boundary = 0, stop = 0;
  for (int i = 0; i < nx; ++i) {
    const double s = -cfg.footprint_length / 2.0 + (i + 0.5) * cfg.footprint_length / nx;
    for (int j = 0; j < ny; ++j) {
      const double d = -cfg.footprint_width / 2.0 + (j + 0.5) * cfg.footprint_width / ny;
      const SemanticClass label = bev.label_at_world(p.position + dir * s + perp * d);
      if (label == SemanticClass::Unknown) continue;
      ++observed;
      if (is_traversable(label)) ++drivable;
      if (is_hard_boundary(label)) ++boundary;
      if (label == SemanticClass::StopLine) ++stop;
    }
  }
  const double total = static_cast<double>(nx) * ny;
  if (observed == 0) return {0.0, ParticleStatus::TerminatedBoundary};

  const double f_boundary = boundary / total;
  if (f_boundary > cfg.boundary_kill_fraction) {
    return {0.0, ParticleStatus::TerminatedBoundary};
  }
  if (stop / total > cfg.stop_fraction) {
    return {p.weight, ParticleStatus::TerminatedStop};
  }
  const double f_drivable = drivable / total;
  const double damp =
      std::clamp(1.0 - f_boundary / cfg.boundary_kill_fraction, 0.0, 1.0);
  return {std::clamp(f_drivable * damp, 0.0, 1.0), ParticleStatus::Alive};
}

std::vector<std::int32_t> resample(ParticleSet& set, Rng& rng) {
  const int n = set.size();
  std::vector<std::int32_t> parents(n);
  std::iota(parents.begin(), parents.end(), 0);

  // Slots frozen at the intersection keep their state; every other slot is
  // refilled from the alive weights, so the propagating population stays at
  // full strength until the whole swarm has arrived.
  std::vector<int> pool;
  std::vector<int> targets;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    switch (set.status[i]) {
      case ParticleStatus::Alive:
        pool.push_back(i);
        total += set.particles[i].weight;
        targets.push_back(i);
        break;
      case ParticleStatus::TerminatedBoundary:
        targets.push_back(i);
        break;
      default:
        break;
    }
  }
  if (pool.empty()) throw ExtinctionError("no alive particles to resample");
  if (!(total > 0.0)) throw ExtinctionError("all alive particle weights are zero");

  // Systematic resampling: m evenly spaced pointers with one random offset
  // sweep the cumulative weight in a single pass.
  const int m = static_cast<int>(targets.size());
  const double u0 = rng.uniform01() / m;
  std::vector<Particle> offspring(m);
  std::vector<std::int32_t> offspring_parent(m);
  int src = 0;
  double cumulative = set.particles[pool[0]].weight / total;
  for (int k = 0; k < m; ++k) {
    const double u = u0 + static_cast<double>(k) / m;
    while (cumulative < u && src + 1 < static_cast<int>(pool.size())) {
      ++src;
      cumulative += set.particles[pool[src]].weight / total;
    }
    offspring[k] = set.particles[pool[src]];
    offspring_parent[k] = pool[src];
  }
  for (int k = 0; k < m; ++k) {
    set.particles[targets[k]] = offspring[k];
    set.particles[targets[k]].weight = 1.0 / m;
    set.status[targets[k]] = ParticleStatus::Alive;
    parents[targets[k]] = offspring_parent[k];
  }
  return parents;
}

ParticleHistory explore(const BEVMap& bev, const PlanarPose& start,
                        const IntersectionROI& target_roi,
                        const ExplorationConfig& cfg, double entry_width) {
  cfg.validate();
  ParticleSet set = init_particles(start, cfg, entry_width);
  const int n = set.size();

  int max_steps = cfg.max_steps;
  if (max_steps <= 0) {
    const double v_mid = (cfg.v_min + cfg.v_max) / 2.0;
    const double reach = (polygon_centroid(target_roi.polygon) - start.position).norm();
    max_steps = std::max(1, static_cast<int>(std::ceil(4.0 * reach / (v_mid * cfg.dt))));
  }

  Rng rng(cfg.rng_seed);
  ParticleHistory history;

  // Step 0: the initial strip; particles already inside the ROI freeze here.
  {
    std::vector<ParticleRecord> records(n);
    for (int i = 0; i < n; ++i) {
      if (point_in_polygon(target_roi.polygon, set.particles[i].position)) {
        set.status[i] = ParticleStatus::ReachedRoi;
      }
      records[i] = {set.particles[i], set.status[i], -1};
    }
    history.steps.push_back(std::move(records));
  }

  std::vector<std::int32_t> parents(n);
  std::iota(parents.begin(), parents.end(), 0);

  for (int t = 1; t <= max_steps; ++t) {
    bool any_alive = false;
    for (int i = 0; i < n; ++i) any_alive |= set.status[i] == ParticleStatus::Alive;
    if (!any_alive) break;

    // Per-slot draws in index order keep the run reproducible.
    for (int i = 0; i < n; ++i) {
      if (set.status[i] != ParticleStatus::Alive) continue;
      const double v = rng.uniform(cfg.v_min, cfg.v_max);
      const double omega = rng.uniform(cfg.omega_min, cfg.omega_max);
      Particle moved = predict(set.particles[i], v, omega, cfg.dt);

      if (point_in_polygon(target_roi.polygon, moved.position)) {
        // Arrival at the intersection ends propagation; no weighing inside.
        set.particles[i] = moved;
        set.status[i] = ParticleStatus::ReachedRoi;
        continue;
      }
      const WeighResult result = weigh(moved, bev, cfg);
      switch (result.status) {
        case ParticleStatus::TerminatedBoundary:
          moved.weight = 0.0;
          set.status[i] = ParticleStatus::TerminatedBoundary;
          break;
        case ParticleStatus::TerminatedStop:
          // Stop lines pause weighing but do not end the drive.
          break;
        default:
          moved.weight = result.weight;
          break;
      }
      set.particles[i] = moved;
    }

    std::vector<ParticleRecord> records(n);
    for (int i = 0; i < n; ++i) {
      records[i] = {set.particles[i], set.status[i], parents[i]};
    }
    history.steps.push_back(std::move(records));

    bool still_alive = false;
    for (int i = 0; i < n; ++i) still_alive |= set.status[i] == ParticleStatus::Alive;
    if (!still_alive || t == max_steps) break;

    try {
      parents = resample(set, rng);
    } catch (const ExtinctionError&) {
      // Zero total weight: the remaining alive slots cannot reproduce.
      for (int i = 0; i < n; ++i) {
        if (set.status[i] == ParticleStatus::Alive) {
          set.status[i] = ParticleStatus::TerminatedBoundary;
          history.steps.back()[i].status = ParticleStatus::TerminatedBoundary;
        }
      }
      break;
    }
  }

  // Leftover alive slots exhausted the step budget.
  for (int i = 0; i < n; ++i) {
    if (set.status[i] == ParticleStatus::Alive) {
      set.status[i] = ParticleStatus::MaxSteps;
      history.steps.back()[i].status = ParticleStatus::MaxSteps;
    }
  }
  for (int i = 0; i < n; ++i) {
    const ParticleStatus s = set.status[i];
    if (s == ParticleStatus::ReachedRoi || s == ParticleStatus::TerminatedStop ||
        s == ParticleStatus::MaxSteps) {
      history.terminal_slots.push_back(i);
    }
  }
  if (history.terminal_slots.empty()) {
    throw ExtinctionWithHistory(
        "particle population went extinct after " +
            std::to_string(history.step_count() - 1) + " step(s) without reaching the ROI",
        std::move(history));
  }
  return history;
}

bool ParticleHistory::reached_roi() const {
  if (steps.empty()) return false;
  for (std::int32_t slot : terminal_slots) {
    if (steps.back()[slot].status == ParticleStatus::ReachedRoi) return true;
  }
  return false;
}

std::vector<Particle> ParticleHistory::terminal_particles() const {
  std::vector<Particle> out;
  out.reserve(terminal_slots.size());
  for (std::int32_t slot : terminal_slots) out.push_back(steps.back()[slot].particle);
  return out;
}

Polyline ParticleHistory::trajectory_of(std::int32_t slot) const {
  Polyline reversed;
  std::int32_t idx = slot;
  for (int t = step_count() - 1; t >= 0; --t) {
    const ParticleRecord& rec = steps[t][idx];
    if (reversed.empty() || (reversed.back() - rec.particle.position).norm() > 1e-12) {
      reversed.push_back(rec.particle.position);
    }
    if (rec.parent >= 0) idx = rec.parent;
  }
  return {reversed.rbegin(), reversed.rend()};
}

std::string particle_history_to_json(const ParticleHistory& history) {
  nlohmann::json doc;
  doc["particle_count"] = history.particle_count();
  doc["step_count"] = history.step_count();
  doc["terminal_slots"] = history.terminal_slots;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& step : history.steps) {
    nlohmann::json row = nlohmann::json::array();
    for (const ParticleRecord& rec : step) {
      row.push_back({rec.particle.position.x, rec.particle.position.y,
                     rec.particle.phi, rec.particle.weight, rec.parent,
                     particle_status_name(rec.status)});
    }
    steps.push_back(std::move(row));
  }
  doc["steps"] = std::move(steps);
  return doc.dump();
}

}  // namespace lanecarto
