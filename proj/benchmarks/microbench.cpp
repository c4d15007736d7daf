// Microbenchmarks for the hot inner loops: particle motion and weighing,
// marking clustering, and ground triangulation.

#include <benchmark/benchmark.h>

#include <vector>

#include "lanecarto/bev.hpp"
#include "lanecarto/dbscan.hpp"
#include "lanecarto/explorer.hpp"
#include "lanecarto/mesh.hpp"
#include "lanecarto/rng.hpp"

namespace {

using namespace lanecarto;

void BM_Predict(benchmark::State& state) {
  Rng rng(1);
  Particle p;
  p.position = {rng.uniform(-10, 10), rng.uniform(-10, 10)};
  p.phi = rng.uniform(-kPi, kPi);
  const double v = 1.0, omega = 0.1, dt = 0.5;
  for (auto _ : state) {
    p = predict(p, v, omega, dt);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_Predict);

BEVMap corridor_bev() {
  BEVMap bev(0.1);
  for (double x = 0.0; x < 60.0; x += 0.1) {
    for (double y = -1.5; y <= 1.5; y += 0.1) {
      bev.add_vote(bev.world_to_cell({x, y}), SemanticClass::DaCenter);
    }
    bev.add_vote(bev.world_to_cell({x, -1.55}), SemanticClass::LmSolid);
    bev.add_vote(bev.world_to_cell({x, 1.55}), SemanticClass::LmSolid);
  }
  return bev;
}

void BM_Weigh(benchmark::State& state) {
  const BEVMap bev = corridor_bev();
  ExplorationConfig cfg;
  Rng rng(2);
  std::vector<Particle> particles;
  for (int i = 0; i < 256; ++i) {
    Particle p;
    p.position = {rng.uniform(5.0, 55.0), rng.uniform(-1.2, 1.2)};
    p.phi = rng.uniform(-0.2, 0.2);
    particles.push_back(p);
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const WeighResult r = weigh(particles[i++ & 255], bev, cfg);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_Weigh);

void BM_Dbscan(benchmark::State& state) {
  Rng rng(3);
  std::vector<Vec2> pts;
  const int clusters = 4;
  for (int c = 0; c < clusters; ++c) {
    const Vec2 center{10.0 * c, 0.0};
    for (int i = 0; i < static_cast<int>(state.range(0)) / clusters; ++i) {
      pts.push_back(center + Vec2{rng.gaussian() * 0.5, rng.gaussian() * 0.5});
    }
  }
  for (auto _ : state) {
    auto labels = dbscan(pts, 1.0, 5);
    benchmark::DoNotOptimize(labels);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Dbscan)->Range(64, 2048)->Complexity();

void BM_Delaunay(benchmark::State& state) {
  Rng rng(4);
  std::vector<Vec3> pts;
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
    pts.push_back({rng.uniform(0.0, 50.0), rng.uniform(0.0, 50.0), rng.uniform(-0.2, 0.2)});
  }
  for (auto _ : state) {
    GroundMesh mesh = delaunay_triangulate(pts);
    benchmark::DoNotOptimize(mesh);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Delaunay)->Range(64, 1024)->Complexity();

}  // namespace

BENCHMARK_MAIN();
