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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "fbdg/error.hpp"
#include "fbdg/fitting.hpp"
#include "oracles/oracles.hpp"

using namespace fbdg;

namespace {

DecayTrace sampled(double a, double rate, int n, double dt, TraceKind kind = TraceKind::kCondensedFraction) {
  DecayTrace tr;
  tr.kind = kind;
  const double sign = kind == TraceKind::kCondensedFraction ? -1.0 : 1.0;
  for (int k = 0; k < n; ++k) {
    tr.t.push_back(k * dt);
    tr.y.push_back(a * std::exp(sign * rate * k * dt));
  }
  return tr;
}

}  // namespace

TEST_CASE("noiseless exponential is recovered exactly") {
  const auto fit = fit_exponential(sampled(0.8, 3.0, 10, 0.02));
  CHECK(fit.method == FitMethod::kExponential);
  CHECK(fit.rate == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.amplitude == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(fit.stderr_rate < 1e-10);
  CHECK(fit.stderr_rate >= 0.0);
  CHECK(fit.n_points == 10);
  CHECK_FALSE(fit.sign_warning);

  const auto growth = fit_exponential(sampled(0.01, 2.0, 12, 0.1, TraceKind::kModeOccupation));
  CHECK(growth.rate == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("half-value window restricts the exponential fit") {
  // Samples below y(0)/2 are ignored: t up to ln 2 / 3.
  const auto fit = fit_exponential(sampled(1.0, 3.0, 40, 0.02));
  CHECK(fit.t_end <= std::log(2.0) / 3.0);
  CHECK(fit.t_end > std::log(2.0) / 3.0 - 0.02);
  CHECK(fit.n_points == 12);
  CHECK_THROWS_AS(fit_exponential(sampled(1.0, 3.0, 40, 0.1)), Error);
}

TEST_CASE("Monte-Carlo calibration of the exponential fit") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 0.05);
  const double truth = 3.0;
  int covered = 0;
  const int reps = 500;
  for (int r = 0; r < reps; ++r) {
    DecayTrace tr;
    for (int k = 0; k < 20; ++k) {
      const double t = 0.01 * k;
      tr.t.push_back(t);
      tr.y.push_back(0.8 * std::exp(-truth * t) * (1.0 + noise(rng)));
    }
    const auto fit = fit_exponential(tr);
    if (std::abs(fit.rate - truth) <= 2.0 * fit.stderr_rate) ++covered;
  }
  CHECK(covered >= 450);
}

TEST_CASE("fallback decision") {
  // A pure exponential keeps the exponential path.
  CHECK(fit_decay(sampled(1.0, 0.5, 30, 0.04)).method == FitMethod::kExponential);

  DecayTrace line;
  for (int k = 0; k <= 40; ++k) {
    line.t.push_back(0.1 * k);
    line.y.push_back(1.0 - 0.1 * line.t.back());
  }
  const auto lin = fit_linear_fallback(line);
  CHECK(lin.method == FitMethod::kLinearFallback);
  CHECK(lin.rate == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(lin.amplitude == doctest::Approx(1.0).epsilon(1e-12));

  // Concave, accelerating decay: log-space R^2 falls below 0.9.
  DecayTrace accel;
  for (int k = 0; k <= 40; ++k) {
    const double t = 0.025 * k;
    accel.t.push_back(t);
    accel.y.push_back(1.0 - 0.55 * std::pow(t, 4));
  }
  const auto exp_fit = fit_exponential(accel);
  CHECK(exp_fit.r_squared < 0.9);
  const auto chosen = fit_decay(accel);
  CHECK(chosen.method == FitMethod::kLinearFallback);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < accel.size(); ++i) {
    if (accel.y[i] >= 0.5 * accel.y[0]) {
      x.push_back(accel.t[i]);
      y.push_back(accel.y[i]);
    }
  }
  CHECK(chosen.rate == doctest::Approx(std::abs(oracle::least_squares(x, y).slope) / accel.y[0]).epsilon(1e-10));
  // The threshold is configurable.
  CHECK(fit_decay(accel, 0.5).method == FitMethod::kExponential);
}

TEST_CASE("decay trace shaped like a shaken condensate chooses the exponential") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 0.02);
  DecayTrace tr;
  for (int k = 0; k < 16; ++k) {
    const double t = 1e-3 * k;  // seconds
    tr.t.push_back(t);
    tr.y.push_back(std::max(0.0, 0.9 * std::exp(-60.0 * t) * (1.0 + noise(rng))));
  }
  const auto fit = fit_decay(tr);
  CHECK(fit.method == FitMethod::kExponential);
  CHECK(fit.rate == doctest::Approx(60.0).epsilon(0.15));
}

TEST_CASE("scale invariance and time-shift covariance") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 0.03);
  DecayTrace tr;
  for (int k = 0; k < 25; ++k) {
    tr.t.push_back(0.05 * k);
    tr.y.push_back(0.7 * std::exp(-1.3 * tr.t.back()) * (1.0 + noise(rng)));
  }
  const auto base = fit_exponential(tr);
  for (double c : {1e-3, 0.5, 7.0, 1e4}) {
    DecayTrace scaled = tr;
    for (auto& v : scaled.y) v *= c;
    const auto f = fit_exponential(scaled);
    CHECK(f.rate == doctest::Approx(base.rate).epsilon(1e-10));
    CHECK(f.amplitude == doctest::Approx(c * base.amplitude).epsilon(1e-10));
  }
  for (double t0 : {-0.3, 0.2, 5.0}) {
    DecayTrace shifted = tr;
    for (auto& t : shifted.t) t += t0;
    const auto f = fit_exponential(shifted);
    CHECK(f.rate == doctest::Approx(base.rate).epsilon(1e-9));
    CHECK(f.amplitude == doctest::Approx(base.amplitude * std::exp(base.rate * t0)).epsilon(1e-9));
  }
}

TEST_CASE("model selection depends only on the trace") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<std::pair<double, double>> samples;
  for (int k = 0; k < 30; ++k) samples.emplace_back(0.1 * k, std::max(0.01, 1.0 - 0.03 * k + 0.02 * noise(rng)));
  auto build = [](std::vector<std::pair<double, double>> s) {
    std::sort(s.begin(), s.end());
    DecayTrace tr;
    for (const auto& [t, y] : s) {
      tr.t.push_back(t);
      tr.y.push_back(y);
    }
    return tr;
  };
  const auto reference = fit_decay(build(samples));
  for (int r = 0; r < 10; ++r) {
    std::shuffle(samples.begin(), samples.end(), rng);
    const auto f = fit_decay(build(samples));
    CHECK(f.method == reference.method);
    CHECK(f.rate == reference.rate);
  }
}

TEST_CASE("windowed log slope") {
  const auto grow = sampled(1.0, 0.8, 30, 0.25, TraceKind::kModeOccupation);
  const auto fit = windowed_log_slope(grow, 8, 0.25);
  CHECK(fit.rate == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(fit.n_points == 9);
  CHECK(fit.t_end == doctest::Approx(29 * 0.25));
  CHECK(fit.t_start == doctest::Approx(21 * 0.25));
  CHECK(fit.method == FitMethod::kWindowedLogSlope);

  DecayTrace flat{{0, 1, 2, 3, 4}, {2, 2, 2, 2, 2}, TraceKind::kModeOccupation};
  CHECK(windowed_log_slope(flat, 3, 1.0).rate == doctest::Approx(0.0));

  DecayTrace dead{{0, 1, 2, 3, 4}, {2, 1, 0, 0, 0}, TraceKind::kModeOccupation};
  const auto stable = windowed_log_slope(dead, 3, 1.0);
  CHECK(stable.stable);
  CHECK(stable.rate == 0.0);

  CHECK_THROWS_AS(windowed_log_slope(flat, 5, 1.0), Error);
  CHECK_THROWS_AS(windowed_log_slope(flat, 0, 1.0), Error);
}

TEST_CASE("longer windows average out beating on top of growth") {
  DecayTrace tr;
  tr.kind = TraceKind::kModeOccupation;
  const double period = 1.0;
  for (int k = 0; k <= 40; ++k) {
    const double t = k * period;
    tr.t.push_back(t);
    tr.y.push_back(std::exp(0.4 * t) * (1.0 + 0.3 * std::cos(1.1 * t)));
  }
  const double r8 = windowed_log_slope(tr, 8, period).rate;
  const double r5 = windowed_log_slope(tr, 5, period).rate;
  CHECK(std::abs(r8 - 0.4) < std::abs(r5 - 0.4));
}

TEST_CASE("trace validation") {
  DecayTrace bad{{0, 1, 1, 2}, {1, 0.9, 0.8, 0.7}};
  try {
    fit_exponential(bad);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
  }
  DecayTrace negative{{0, 1, 2, 3}, {1, 0.9, -0.1, 0.7}};
  CHECK_THROWS_AS(negative.validate(), Error);
  DecayTrace mismatched{{0, 1, 2}, {1, 0.9}};
  CHECK_THROWS_AS(mismatched.validate(), Error);
  DecayTrace few{{0, 1, 2}, {1, 0.9, 0.8}};
  try {
    fit_exponential(few);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientData);
  }
  DecayTrace two{{0, 1}, {1, 0.9}};
  CHECK_THROWS_AS(fit_linear_fallback(two), Error);
}

TEST_CASE("sign warnings") {
  const auto growing_fraction = sampled(0.5, -0.7, 10, 0.1);  // grows although a fraction should decay
  CHECK(fit_exponential(growing_fraction).sign_warning);
  CHECK(fit_exponential(growing_fraction).rate < 0.0);
  CHECK_FALSE(fit_exponential(sampled(0.5, 0.7, 10, 0.1)).sign_warning);
}

TEST_CASE("bootstrap: identical realizations and degenerate resampling") {
  const auto base = sampled(1.0, 0.5, 20, 0.1, TraceKind::kModeOccupation);
  std::vector<DecayTrace> same(5, base);
  const TraceFitter fitter = [](const DecayTrace& t) { return fit_exponential(t); };
  const auto r = bootstrap_rate(same, fitter, 50, 1);
  CHECK(r.stddev == 0.0);
  CHECK(r.mean == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(r.degenerate);
  const auto one = bootstrap_rate(same, fitter, 1, 1);
  CHECK(one.degenerate);
  CHECK(one.stddev == 0.0);

  CHECK_THROWS_AS(bootstrap_rate({base}, fitter, 10, 1), Error);
  const TraceFitter failing = [](const DecayTrace&) -> FitResult {
    throw Error(ErrorCode::kInsufficientData, "no");
  };
  try {
    bootstrap_rate(same, failing, 10, 1);
    FAIL("expected bootstrap-unstable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBootstrapUnstable);
  }
  std::vector<DecayTrace> ragged{base, sampled(1.0, 0.5, 10, 0.1)};
  CHECK_THROWS_AS(mean_trace(ragged), Error);
}

TEST_CASE("bootstrap is deterministic given the seed") {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<DecayTrace> traces;
  for (int r = 0; r < 20; ++r) {
    auto tr = sampled(1.0, 0.5, 20, 0.1, TraceKind::kModeOccupation);
    for (auto& y : tr.y) y *= 1.0 + noise(rng);
    traces.push_back(tr);
  }
  const TraceFitter fitter = [](const DecayTrace& t) { return fit_exponential(t); };
  const auto a = bootstrap_rate(traces, fitter, 100, 3);
  const auto b = bootstrap_rate(traces, fitter, 100, 3);
  const auto c = bootstrap_rate(traces, fitter, 100, 4);
  CHECK(a.mean == b.mean);
  CHECK(a.stddev == b.stddev);
  CHECK(a.mean != c.mean);
}

// Bootstrap spread as an error bar: the deviation of the bootstrap mean from
// the truth is roughly normal with the bootstrap standard deviation, so it
// falls inside one standard deviation about 68% of the time and inside two
// about 95% of the time.
TEST_CASE("bootstrap calibration over meta-repetitions") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> noise(0.0, 0.2);
  const double truth = 0.5;
  const TraceFitter fitter = [](const DecayTrace& t) { return fit_exponential(t); };
  int within1 = 0, within2 = 0;
  const int meta = 200;
  for (int m = 0; m < meta; ++m) {
    std::vector<DecayTrace> traces;
    for (int r = 0; r < 50; ++r) {
      auto tr = sampled(1.0, truth, 15, 0.1, TraceKind::kModeOccupation);
      for (auto& y : tr.y) y *= 1.0 + noise(rng);
      traces.push_back(tr);
    }
    const auto b = bootstrap_rate(traces, fitter, 200, static_cast<std::uint64_t>(m));
    const double dev = std::abs(b.mean - truth);
    if (dev <= b.stddev) ++within1;
    if (dev <= 2.0 * b.stddev) ++within2;
  }
  CHECK(within1 >= static_cast<int>(0.55 * meta));
  CHECK(within1 <= static_cast<int>(0.82 * meta));
  CHECK(within2 >= static_cast<int>(0.90 * meta));
}
