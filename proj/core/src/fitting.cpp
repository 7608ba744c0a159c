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

#include "fbdg/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fbdg/error.hpp"
#include "fbdg/rng.hpp"

namespace fbdg {

namespace {

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 1.0;
};

// Ordinary least squares y = a + b x, centred for stability.
LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += r * r;
  }
  if (x.size() > 2) fit.slope_stderr = std::sqrt(std::max(ssr, 0.0) / (n - 2.0) / sxx);
  fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return fit;
}

// Indices of the half-initial-value window.
std::vector<std::size_t> half_window(const DecayTrace& trace) {
  std::vector<std::size_t> idx;
  const double threshold = 0.5 * trace.y.front();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace.y[i] >= threshold) idx.push_back(i);
  }
  return idx;
}

double orientation(TraceKind kind) { return kind == TraceKind::kCondensedFraction ? -1.0 : 1.0; }

}  // namespace

void DecayTrace::validate() const {
  if (t.size() != y.size()) throw Error(ErrorCode::kParse, "trace time and value columns differ in length");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(y[i])) {
      throw Error(ErrorCode::kParse, "non-finite sample at row " + std::to_string(i));
    }
    if (y[i] < 0.0) throw Error(ErrorCode::kParse, "negative value at row " + std::to_string(i));
    if (i > 0 && !(t[i] > t[i - 1])) {
      throw Error(ErrorCode::kParse, "times not strictly increasing at row " + std::to_string(i));
    }
  }
}

std::string_view to_string(FitMethod method) {
  switch (method) {
    case FitMethod::kExponential: return "exponential";
    case FitMethod::kLinearFallback: return "linear_fallback";
    case FitMethod::kWindowedLogSlope: return "windowed_log_slope";
  }
  return "unknown";
}

FitResult fit_exponential(const DecayTrace& trace) {
  trace.validate();
  if (trace.size() == 0 || !(trace.y.front() > 0.0)) {
    throw Error(ErrorCode::kInsufficientData, "exponential fit needs a positive first sample");
  }
  const auto idx = half_window(trace);
  if (idx.size() < 4) {
    throw Error(ErrorCode::kInsufficientData,
                "exponential fit needs >= 4 samples above half the initial value, got " +
                    std::to_string(idx.size()));
  }
  std::vector<double> x;
  std::vector<double> ly;
  for (auto i : idx) {
    x.push_back(trace.t[i]);
    ly.push_back(std::log(trace.y[i]));
  }
  const LineFit line = least_squares(x, ly);
  FitResult result;
  result.method = FitMethod::kExponential;
  result.amplitude = std::exp(line.intercept);
  result.rate = orientation(trace.kind) * line.slope;
  result.stderr_rate = line.slope_stderr;
  result.r_squared = line.r_squared;
  result.t_start = x.front();
  result.t_end = x.back();
  result.n_points = x.size();
  result.sign_warning = result.rate < 0.0;
  return result;
}

FitResult fit_linear_fallback(const DecayTrace& trace) {
  trace.validate();
  if (trace.size() == 0 || !(trace.y.front() > 0.0)) {
    throw Error(ErrorCode::kInsufficientData, "linear fit needs a positive first sample");
  }
  const auto idx = half_window(trace);
  if (idx.size() < 3) {
    throw Error(ErrorCode::kInsufficientData, "linear fit needs >= 3 samples in the window");
  }
  std::vector<double> x;
  std::vector<double> y;
  for (auto i : idx) {
    x.push_back(trace.t[i]);
    y.push_back(trace.y[i]);
  }
  const LineFit line = least_squares(x, y);
  const double y0 = trace.y.front();
  FitResult result;
  result.method = FitMethod::kLinearFallback;
  result.amplitude = line.intercept;
  result.rate = std::abs(line.slope) / y0;
  result.stderr_rate = line.slope_stderr / y0;
  result.r_squared = line.r_squared;
  result.t_start = x.front();
  result.t_end = x.back();
  result.n_points = x.size();
  result.sign_warning = orientation(trace.kind) * line.slope < 0.0;
  return result;
}

FitResult fit_decay(const DecayTrace& trace, double r2_threshold) {
  FitResult exponential = fit_exponential(trace);
  if (exponential.r_squared >= r2_threshold) return exponential;
  return fit_linear_fallback(trace);
}

FitResult windowed_log_slope(const DecayTrace& trace, int window_cycles, double period) {
  trace.validate();
  if (window_cycles < 1 || !(period > 0.0)) {
    throw Error(ErrorCode::kDomain, "window needs >= 1 cycle and a positive period");
  }
  if (trace.size() < static_cast<std::size_t>(window_cycles) + 1) {
    throw Error(ErrorCode::kInsufficientData, "trace shorter than the fit window");
  }
  const double t_end = trace.t.back();
  const double t_start = t_end - window_cycles * period * (1.0 + 1e-9);
  std::vector<double> x;
  std::vector<double> ly;
  FitResult result;
  result.method = FitMethod::kWindowedLogSlope;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace.t[i] < t_start) continue;
    if (!(trace.y[i] > 0.0)) {
      result.stable = true;
      result.t_start = trace.t[i];
      result.t_end = t_end;
      return result;
    }
    x.push_back(trace.t[i]);
    ly.push_back(std::log(trace.y[i]));
  }
  if (x.size() < 2) throw Error(ErrorCode::kInsufficientData, "fewer than two samples in the fit window");
  const LineFit line = least_squares(x, ly);
  result.amplitude = std::exp(line.intercept);
  result.rate = orientation(trace.kind) * line.slope;
  result.stderr_rate = line.slope_stderr;
  result.r_squared = line.r_squared;
  result.t_start = x.front();
  result.t_end = x.back();
  result.n_points = x.size();
  return result;
}

DecayTrace mean_trace(const std::vector<DecayTrace>& traces) {
  if (traces.empty()) throw Error(ErrorCode::kInsufficientData, "no traces to average");
  DecayTrace mean = traces.front();
  for (std::size_t k = 1; k < traces.size(); ++k) {
    if (traces[k].size() != mean.size()) throw Error(ErrorCode::kDomain, "traces do not share a time grid");
    for (std::size_t i = 0; i < mean.size(); ++i) mean.y[i] += traces[k].y[i];
  }
  for (auto& v : mean.y) v /= static_cast<double>(traces.size());
  return mean;
}

BootstrapResult bootstrap_rate(const std::vector<DecayTrace>& traces, const TraceFitter& fitter,
                               int resamples, std::uint64_t seed) {
  if (traces.size() < 2) throw Error(ErrorCode::kInsufficientData, "bootstrap needs >= 2 realizations");
  if (resamples < 1) throw Error(ErrorCode::kDomain, "bootstrap needs >= 1 resample");
  const std::size_t n = traces.size();
  std::vector<double> rates;
  BootstrapResult result;
  result.resamples = resamples;
  std::vector<DecayTrace> pick(n);
  for (int r = 0; r < resamples; ++r) {
    const CounterRng rng(seed, static_cast<std::uint64_t>(r));
    for (std::size_t i = 0; i < n; ++i) pick[i] = traces[rng.index(i, n)];
    try {
      rates.push_back(fitter(mean_trace(pick)).rate);
    } catch (const Error&) {
      ++result.failures;
    }
  }
  if (result.failures * 5 > resamples) {
    throw Error(ErrorCode::kBootstrapUnstable,
                std::to_string(result.failures) + " of " + std::to_string(resamples) + " resample fits failed");
  }
  double sum = 0.0;
  for (double v : rates) sum += v;
  result.mean = sum / static_cast<double>(rates.size());
  double var = 0.0;
  for (double v : rates) var += (v - result.mean) * (v - result.mean);
  result.degenerate = rates.size() < 2;
  result.stddev = result.degenerate ? 0.0 : std::sqrt(var / static_cast<double>(rates.size() - 1));
  return result;
}

}  // namespace fbdg
