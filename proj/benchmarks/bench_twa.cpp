/*
   Copyright 2026 The fbdg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <benchmark/benchmark.h>

#include "fbdg/twa.hpp"

namespace {

void BM_GpeStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const fbdg::GridDims grid{n, n, static_cast<int>(state.range(1)), 0.0};
  fbdg::DriveSpec d;
  d.trajectory = fbdg::Trajectory::kDiagonal;
  d.amplitude = 2.1;
  d.omega = 20.0;
  d.envelope.hold_periods = 1000;
  const auto p = fbdg::LatticeParams::make(1.0, 12.0, 50.0);
  auto field = fbdg::sample_initial(grid, p, d, {}, 1, 0);
  fbdg::GpeIntegrator gpe(grid, d, p, 256);
  for (auto _ : state) gpe.advance(field, 64);
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_GpeStep)->Args({8, 8})->Args({16, 8})->Args({16, 32})->Unit(benchmark::kMicrosecond);

void BM_SampleInitial(benchmark::State& state) {
  const fbdg::GridDims grid{16, 16, 8, 0.0};
  fbdg::DriveSpec d;
  d.amplitude = 1.0;
  d.omega = 20.0;
  const auto p = fbdg::LatticeParams::make(1.0, 12.0, 50.0);
  std::uint64_t r = 0;
  for (auto _ : state) benchmark::DoNotOptimize(fbdg::sample_initial(grid, p, d, {}, 1, r++).amplitudes.data());
}
BENCHMARK(BM_SampleInitial)->Unit(benchmark::kMicrosecond);

}  // namespace
