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

#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace fbdg {

enum class TraceKind { kCondensedFraction, kModeOccupation };

/// Sampled (t, y) series. Times strictly increasing, y >= 0.
struct DecayTrace {
  std::vector<double> t;
  std::vector<double> y;
  TraceKind kind = TraceKind::kCondensedFraction;

  std::size_t size() const { return t.size(); }
  /// Throws Error(kParse) on length mismatch, non-increasing times or
  /// negative values.
  void validate() const;
};

enum class FitMethod { kExponential, kLinearFallback, kWindowedLogSlope };

std::string_view to_string(FitMethod method);

struct FitResult {
  double amplitude = 0.0;  // A, the fitted value at t = 0
  double rate = 0.0;       // positive: decay for condensed fraction, growth for occupations
  double stderr_rate = 0.0;
  double r_squared = 1.0;  // coefficient of determination of the fitted model
  FitMethod method = FitMethod::kExponential;
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t n_points = 0;
  bool stable = false;        // windowed fit saw non-positive samples
  bool sign_warning = false;  // rate sign opposite to what the trace kind implies
};

/// Log-space least squares of y = A exp(-Gamma t) (decay) or
/// A exp(+Gamma t) (growth) over samples with y >= y(0)/2.
FitResult fit_exponential(const DecayTrace& trace);

/// Straight line over samples with y >= y(0)/2; Gamma = |slope| / y(0).
FitResult fit_linear_fallback(const DecayTrace& trace);

/// Exponential fit unless its log-space R^2 is below r2_threshold, in which
/// case the linear fallback is returned.
FitResult fit_decay(const DecayTrace& trace, double r2_threshold = 0.9);

/// Log-slope over the final window_cycles * period span of the trace.
FitResult windowed_log_slope(const DecayTrace& trace, int window_cycles, double period);

struct BootstrapResult {
  double mean = 0.0;
  double stddev = 0.0;
  int resamples = 0;
  int failures = 0;
  bool degenerate = false;  // fewer than two successful resamples
};

using TraceFitter = std::function<FitResult(const DecayTrace&)>;

/// Fits the mean trace of each with-replacement resample of the
/// realizations. All traces must share the same time grid. Failed fits are
/// dropped; more than 20% failures throws Error(kBootstrapUnstable).
BootstrapResult bootstrap_rate(const std::vector<DecayTrace>& traces, const TraceFitter& fitter,
                               int resamples, std::uint64_t seed);

/// Pointwise mean of traces that share a time grid.
DecayTrace mean_trace(const std::vector<DecayTrace>& traces);

}  // namespace fbdg
