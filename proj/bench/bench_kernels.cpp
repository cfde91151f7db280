// Serial reference kernels against their OpenMP counterparts on a synthetic
// lift scene (MiC and two people).

#include <benchmark/benchmark.h>

#include "liftguard/pointcloud.hpp"
#include "liftguard/synthetic.hpp"

using namespace liftguard;

namespace {

const PointCloud& scene_cloud() {
  static const PointCloud cloud = [] {
    SceneSpec spec;
    spec.objects = {{ClassLabel::MiC, WorldPoint(20, 2, 4.5), kDefaultMicDims},
                    {ClassLabel::Human, WorldPoint(12, -3, 0.85), kDefaultHumanDims},
                    {ClassLabel::Human, WorldPoint(14, 5, 0.85), kDefaultHumanDims}};
    spec.density = 800;
    spec.seed = 17;
    return generate_scene(spec).cloud;
  }();
  return cloud;
}

void BM_DenoiseReference(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(reference::denoise(scene_cloud()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scene_cloud().size()));
}
void BM_DenoiseParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(denoise(scene_cloud()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scene_cloud().size()));
}

void BM_VoxelReference(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(reference::voxel_downsample(scene_cloud(), 0.05));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scene_cloud().size()));
}
void BM_VoxelParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(voxel_downsample(scene_cloud(), 0.05));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scene_cloud().size()));
}

void BM_RenderReference(benchmark::State& state) {
  const CalibrationBundle calib = default_synthetic_calibration();
  for (auto _ : state) benchmark::DoNotOptimize(reference::render_depth_image(scene_cloud(), calib));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scene_cloud().size()));
}
void BM_RenderParallel(benchmark::State& state) {
  const CalibrationBundle calib = default_synthetic_calibration();
  for (auto _ : state) benchmark::DoNotOptimize(render_depth_image(scene_cloud(), calib));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scene_cloud().size()));
}

}  // namespace

BENCHMARK(BM_DenoiseReference)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DenoiseParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_VoxelReference)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_VoxelParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RenderReference)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RenderParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
