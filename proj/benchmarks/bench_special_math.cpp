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

#include "fbdg/analytics.hpp"
#include "fbdg/special_math.hpp"

namespace {

void BM_BesselJ(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fbdg::bessel_j(order, x));
    x = x < 40.0 ? x + 0.37 : 0.1;
  }
}
BENCHMARK(BM_BesselJ)->Arg(0)->Arg(2)->Arg(20);

void BM_J0Inverse(benchmark::State& state) {
  double y = 0.05;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fbdg::bessel_j0_inverse(y));
    y = y < 0.95 ? y + 0.013 : 0.05;
  }
}
BENCHMARK(BM_J0Inverse);

void BM_HoppingFromDepth(benchmark::State& state) {
  const auto problem = fbdg::make_band_problem(11.0, 814e-9, fbdg::phys::kRubidium87Mass,
                                               static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fbdg::hopping_from_depth(problem));
}
BENCHMARK(BM_HoppingFromDepth)->Arg(21)->Arg(41);

void BM_GammaAndQmum(benchmark::State& state) {
  fbdg::DriveSpec d;
  d.trajectory = fbdg::Trajectory::kCircular;
  d.amplitude = 1.25;
  const auto p = fbdg::LatticeParams::make(1.0, 14.0);
  double w = 5.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fbdg::gamma_and_qmum(d, p, w).gamma);
    w = w < 60.0 ? w + 0.7 : 5.0;
  }
}
BENCHMARK(BM_GammaAndQmum);

}  // namespace
