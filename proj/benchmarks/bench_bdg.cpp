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

#include "fbdg/bdg.hpp"

namespace {

void BM_EvolveMode(benchmark::State& state) {
  fbdg::DriveSpec d;
  d.trajectory = fbdg::Trajectory::kDiagonal;
  d.amplitude = 1.25;
  d.omega = 20.0;
  const auto p = fbdg::LatticeParams::make(1.0, 12.0);
  fbdg::BdgRunConfig cfg;
  cfg.n_cycles = 24;
  cfg.steps_per_period = static_cast<int>(state.range(0));
  cfg.stepper = state.range(1) == 0 ? fbdg::BdgStepper::kMagnus4 : fbdg::BdgStepper::kRk4;
  cfg.norm_tolerance = 1e300;
  const fbdg::Momentum q{2.7, 2.3, 1.4};
  const auto init = fbdg::init_mode(q, d, p);
  for (auto _ : state) benchmark::DoNotOptimize(fbdg::evolve_mode(init, d, p, cfg).final_state.v);
  state.SetItemsProcessed(state.iterations() * cfg.n_cycles * cfg.steps_per_period);
}
BENCHMARK(BM_EvolveMode)->Args({256, 0})->Args({256, 1})->Args({64, 0});

void BM_GridScan(benchmark::State& state) {
  fbdg::DriveSpec d;
  d.trajectory = fbdg::Trajectory::kLinearX;
  d.amplitude = 1.25;
  d.omega = 20.0;
  const auto p = fbdg::LatticeParams::make(1.0, 12.0);
  fbdg::BdgRunConfig cfg;
  cfg.grid = fbdg::GridDims{8, 8, 4, 0.0};
  cfg.norm_tolerance = 1e300;
  for (auto _ : state) benchmark::DoNotOptimize(fbdg::grid_instability_scan(d, p, cfg).rate);
}
BENCHMARK(BM_GridScan)->Unit(benchmark::kMillisecond);

}  // namespace
