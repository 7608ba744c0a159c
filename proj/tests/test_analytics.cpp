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
#include <numbers>
#include <random>
#include <vector>

#include "fbdg/analytics.hpp"
#include "fbdg/error.hpp"
#include "fbdg/special_math.hpp"
#include "oracles/oracles.hpp"

using namespace fbdg;

namespace {

constexpr double kPi = std::numbers::pi;

DriveSpec make_drive(Trajectory trajectory, double k0, double omega = 1.0) {
  DriveSpec d;
  d.trajectory = trajectory;
  d.amplitude = k0;
  d.omega = omega;
  return d;
}

LatticeParams paper_lattice(double gamma0 = 0.0) {
  return LatticeParams::make(hz_to_rad_s(50.0), hz_to_rad_s(700.0), 1.0, gamma0);
}

const Trajectory kAll[] = {Trajectory::kLinearX, Trajectory::kDiagonal, Trajectory::kCircular};

double sq(double x) { return x * x; }

}  // namespace

TEST_CASE("effective hopping") {
  const double j = hz_to_rad_s(50.0);
  CHECK(effective_hopping(0.0, j) == j);
  CHECK(std::abs(effective_hopping(2.404826, j)) < 1e-6 * j);
  CHECK(rad_s_to_hz(effective_hopping(1.25, j)) == doctest::Approx(32.295).epsilon(1e-4));
  CHECK(effective_hopping(3.0, j) < 0.0);
}

TEST_CASE("s(q) examples") {
  const auto p = paper_lattice();
  const double omega = hz_to_rad_s(2500.0);
  const double j2 = oracle::bessel_series_ld(2, 1.25);
  const double lin = s_of_q({kPi, 0, 0}, make_drive(Trajectory::kLinearX, 1.25, omega), p);
  CHECK(lin == doctest::Approx(4.0 * p.hopping * j2 * p.interaction / omega).epsilon(1e-12));
  CHECK(s_of_q({kPi, kPi, 0}, make_drive(Trajectory::kCircular, 1.25, omega), p) == 0.0);
  CHECK(s_of_q({kPi, kPi, 0}, make_drive(Trajectory::kDiagonal, 1.25, omega), p) ==
        doctest::Approx(2.0 * lin).epsilon(1e-14));
  // |J2| past its first zero keeps the rate non-negative.
  CHECK(s_of_q({kPi, 0, 0}, make_drive(Trajectory::kLinearX, 6.0, omega), p) > 0.0);
}

TEST_CASE("high-frequency rate of the x-only drive at the reference point") {
  const auto p = paper_lattice(1.0);
  const auto r = gamma_and_qmum(make_drive(Trajectory::kLinearX, 1.25), p, hz_to_rad_s(2500.0));
  CHECK(r.regime == Regime::kHighFrequency);
  CHECK(r.multiplicity == 1);
  REQUIRE(r.q_mum.size() == 1);
  CHECK(r.q_mum[0].qx == doctest::Approx(kPi));
  CHECK(r.q_mum[0].qy == 0.0);
  const double expected = 8.0 * p.hopping * oracle::bessel_series_ld(2, 1.25) * p.interaction / hz_to_rad_s(2500.0);
  CHECK(r.gamma_mum - 1.0 == doctest::Approx(expected).epsilon(1e-12));
  CHECK(rad_s_to_hz(r.gamma_mum - 1.0) == doctest::Approx(19.16).epsilon(1e-3));
  CHECK((r.gamma_mum - 1.0) / p.hopping == doctest::Approx(0.383).epsilon(2e-3));
}

TEST_CASE("low-frequency branch at 300 Hz") {
  const auto p = paper_lattice();
  const auto r = gamma_and_qmum(make_drive(Trajectory::kLinearX, 1.25), p, hz_to_rad_s(300.0));
  CHECK(r.regime == Regime::kLowFrequency);
  // Independent evaluation of the closed form in long double.
  const long double g = 700.0L, w = 300.0L, j = 50.0L;
  const long double eres = std::sqrt(g * g + w * w) - g;
  const long double j0 = oracle::bessel_series_ld(0, 1.25);
  const long double j2 = oracle::bessel_series_ld(2, 1.25);
  const double qx = static_cast<double>(2.0L * std::asin(std::sqrt(eres / (4.0L * j * j0))));
  CHECK(r.q_mum[0].qx == doctest::Approx(qx).epsilon(1e-12));
  CHECK(r.q_mum[0].qx == doctest::Approx(1.52413).epsilon(1e-5));
  CHECK(std::sin(r.q_mum[0].qx / 2) == doctest::Approx(0.69043).epsilon(1e-5));
  CHECK(rad_s_to_hz(r.gamma) == doctest::Approx(static_cast<double>(eres * j2 / j0 * g / w)).epsilon(1e-12));
  CHECK(rad_s_to_hz(r.gamma) == doctest::Approx(38.06).epsilon(1e-3));
}

TEST_CASE("cusp frequencies at the reference parameters") {
  const auto p = paper_lattice();
  const auto lin = omega_c(make_drive(Trajectory::kLinearX, 1.25), p);
  const auto diag = omega_c(make_drive(Trajectory::kDiagonal, 1.25), p);
  const auto circ = omega_c(make_drive(Trajectory::kCircular, 1.25), p);
  CHECK(std::abs(rad_s_to_hz(lin.omega_c) - 444.5) < 0.1);
  CHECK(std::abs(rad_s_to_hz(diag.omega_c) - 654.6) < 0.1);
  CHECK(std::abs(rad_s_to_hz(lin.omega_c) - 444.0) < 0.01 * 444.0);
  CHECK(std::abs(rad_s_to_hz(diag.omega_c) - 655.0) < 0.01 * 655.0);
  CHECK(circ.omega_c == lin.omega_c);
  CHECK(diag.equals_bandwidth);
  CHECK_FALSE(lin.equals_bandwidth);
  CHECK_FALSE(circ.equals_bandwidth);
  CHECK(diag.omega_c == doctest::Approx(diag.bandwidth).epsilon(1e-14));
  CHECK_THROWS_AS(omega_c(make_drive(Trajectory::kLinearX, 2.5), p), Error);
}

TEST_CASE("cusp and bandwidth relations over a parameter sweep") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uk(0.0, 2.3);
  std::uniform_real_distribution<double> ug(0.01, 30.0);
  for (int i = 0; i < 200; ++i) {
    const auto p = LatticeParams::make(1.0, ug(rng));
    const double k0 = uk(rng);
    for (auto trajectory : kAll) {
      const auto c = omega_c(make_drive(trajectory, k0), p);
      CHECK(c.omega_c <= c.bandwidth + 1e-10);
    }
    const auto lin = omega_c(make_drive(Trajectory::kLinearX, k0), p);
    CHECK(lin.omega_c < bandwidth(DriveDimensionality::k1D, p, k0));
  }
  const auto free = LatticeParams::make(1.0, 0.0);
  CHECK(bandwidth(DriveDimensionality::k2D, free, 0.0) == doctest::Approx(8.0));
  CHECK(bandwidth(DriveDimensionality::k1D, free, 0.0) == doctest::Approx(8.0));
}

TEST_CASE("high-frequency ratios and low-frequency degeneracy") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> uk(0.1, 2.3);
  std::uniform_real_distribution<double> ug(0.5, 20.0);
  for (int i = 0; i < 100; ++i) {
    const auto p = LatticeParams::make(1.0, ug(rng), 1.0, 0.0);
    const double k0 = uk(rng);
    const double w_hi = 1.5 * omega_c(make_drive(Trajectory::kDiagonal, k0), p).omega_c;
    const double lin = gamma_and_qmum(make_drive(Trajectory::kLinearX, k0), p, w_hi).gamma_mum;
    const double diag = gamma_and_qmum(make_drive(Trajectory::kDiagonal, k0), p, w_hi).gamma_mum;
    const double circ = gamma_and_qmum(make_drive(Trajectory::kCircular, k0), p, w_hi).gamma_mum;
    CHECK(diag / lin == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(circ / lin == doctest::Approx(2.0).epsilon(1e-14));

    const double w_lo = 0.6 * omega_c(make_drive(Trajectory::kLinearX, k0), p).omega_c;
    const double g_lin = gamma_and_qmum(make_drive(Trajectory::kLinearX, k0), p, w_lo).gamma;
    const double g_diag = gamma_and_qmum(make_drive(Trajectory::kDiagonal, k0), p, w_lo).gamma;
    const double g_circ = gamma_and_qmum(make_drive(Trajectory::kCircular, k0), p, w_lo).gamma;
    CHECK(g_diag == g_lin);
    CHECK(g_circ == g_lin);
  }
}

TEST_CASE("branch continuity at the cusp") {
  for (auto trajectory : kAll) {
    for (double k0 : {0.5, 1.25, 2.1}) {
      const auto p = LatticeParams::make(1.0, 12.0);
      const auto d = make_drive(trajectory, k0);
      const double wc = omega_c(d, p).omega_c;
      const double below = gamma_and_qmum(d, p, wc * (1.0 - 1e-9)).gamma;
      const double above = gamma_and_qmum(d, p, wc * (1.0 + 1e-9)).gamma;
      CHECK(gamma_and_qmum(d, p, wc * (1.0 - 1e-9)).regime == Regime::kLowFrequency);
      CHECK(gamma_and_qmum(d, p, wc).regime == Regime::kHighFrequency);
      CHECK(std::abs(below - above) < 1e-6 * above);
      // Both branches equal edge J_eff J2/J0 g/omega_c, with edge = 4 or 8.
      const double edge = trajectory == Trajectory::kDiagonal ? 8.0 : 4.0;
      const double common = edge * bessel_j(0, k0) * bessel_j(2, k0) / bessel_j(0, k0) * p.interaction / wc;
      CHECK(above == doctest::Approx(common).epsilon(1e-8));
    }
  }
}

TEST_CASE("rate is linear in g J / omega above the cusp") {
  const double k0 = 2.1;
  const double omega = 2500.0;
  double previous_ratio = -1.0;
  for (double scale : {0.5, 1.0, 2.0, 4.0}) {
    const auto p = LatticeParams::make(50.0 * scale, 70.0, 1.0, 1.0);
    const auto r = gamma_and_qmum(make_drive(Trajectory::kLinearX, k0), p, omega);
    REQUIRE(r.regime == Regime::kHighFrequency);
    const double ratio = (r.gamma_mum - 1.0) / (p.interaction * p.hopping / omega);
    if (previous_ratio > 0) CHECK(ratio == doctest::Approx(previous_ratio).epsilon(1e-14));
    previous_ratio = ratio;
  }
  const auto p1 = LatticeParams::make(50.0, 70.0);
  const auto p2 = LatticeParams::make(100.0, 70.0);
  const double r1 = gamma_and_qmum(make_drive(Trajectory::kDiagonal, k0), p1, omega).gamma_mum;
  const double r2 = gamma_and_qmum(make_drive(Trajectory::kDiagonal, k0), p2, omega).gamma_mum;
  CHECK(r2 == doctest::Approx(2.0 * r1).epsilon(1e-14));
}

TEST_CASE("cusp shape: rising below omega_c, falling as 1/omega above") {
  const auto p = paper_lattice(1.0);
  for (auto trajectory : kAll) {
    const auto d = make_drive(trajectory, 1.25);
    const double wc = omega_c(d, p).omega_c;
    double previous = 0.0;
    for (int i = 1; i < 100; ++i) {
      const double r = gamma_and_qmum(d, p, wc * i / 100.0).gamma_mum;
      CHECK(r > previous);
      previous = r;
    }
    for (int i = 1; i <= 20; ++i) {
      const double w = wc * (1.0 + 0.25 * i);
      const double r = gamma_and_qmum(d, p, w).gamma_mum - p.background_rate;
      const double r0 = gamma_and_qmum(d, p, wc).gamma_mum - p.background_rate;
      CHECK(r == doctest::Approx(r0 * wc / w).epsilon(1e-12));
    }
  }
}

TEST_CASE("gamma_mum bookkeeping") {
  const auto p = LatticeParams::make(1.0, 12.0, 1.0, 0.3);
  for (auto trajectory : kAll) {
    for (double w : {3.0, 30.0}) {
      const auto r = gamma_and_qmum(make_drive(trajectory, 1.25), p, w);
      CHECK(r.gamma >= 0.0);
      CHECK(r.gamma_mum >= p.background_rate);
      CHECK(r.gamma_mum == doctest::Approx(mode_multiplicity(trajectory) * 2.0 * r.gamma + 0.3));
      CHECK(static_cast<int>(r.q_mum.size()) == mode_multiplicity(trajectory));
      for (const auto& q : r.q_mum) CHECK(s_of_q(q, make_drive(trajectory, 1.25, w), p) == doctest::Approx(r.gamma));
    }
  }
  CHECK_THROWS_AS(gamma_and_qmum(make_drive(Trajectory::kLinearX, 2.5), p, 3.0), Error);
  CHECK_THROWS_AS(gamma_and_qmum(make_drive(Trajectory::kLinearX, 1.0), p, 0.0), Error);
  CHECK_THROWS_AS(gamma_and_qmum(make_drive(Trajectory::kLinearX, j0_first_zero()), p, 3.0), Error);
}

TEST_CASE("circular high-frequency modes are the two axis edges") {
  const auto r = gamma_and_qmum(make_drive(Trajectory::kCircular, 1.25), LatticeParams::make(1.0, 12.0), 40.0);
  REQUIRE(r.q_mum.size() == 2);
  CHECK(r.q_mum[0].qx == doctest::Approx(kPi));
  CHECK(r.q_mum[0].qy == 0.0);
  CHECK(r.q_mum[1].qx == 0.0);
  CHECK(r.q_mum[1].qy == doctest::Approx(kPi));
}

// Brute force: the transverse momentum can make up any missing energy, so
// the resonance set in the (qx, qy) plane is eps_eff(qx, qy, 0) <= sqrt(g^2 +
// omega^2) - g. Maximize s over that set on a 401 x 401 grid.
TEST_CASE("brute-force argmax of s(q) over the resonance set") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uk(0.3, 2.2);
  std::uniform_real_distribution<double> ug(2.0, 20.0);
  std::uniform_real_distribution<double> uw(0.2, 2.0);
  const int n = 401;
  const double h = 2.0 * kPi / (n - 1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto trajectory = kAll[trial % 3];
    const auto p = LatticeParams::make(1.0, ug(rng));
    auto d = make_drive(trajectory, uk(rng));
    d.omega = uw(rng) * omega_c(d, p).omega_c;
    const auto r = gamma_and_qmum(d, p, d.omega);
    const double reach = std::sqrt(sq(p.interaction) + sq(d.omega)) - p.interaction;

    double best = -1.0;
    std::vector<Momentum> grid;
    std::vector<double> values;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Momentum q{-kPi + i * h, -kPi + j * h, 0.0};
        if (eps_eff(q, d, p) > reach) continue;
        const double s = s_of_q(q, d, p);
        grid.push_back(q);
        values.push_back(s);
        best = std::max(best, s);
      }
    }
    CAPTURE(trial);
    CAPTURE(to_string(trajectory));
    // The grid maximum approaches gamma from below; its rate of change over
    // one spacing bounds the gap.
    const double slope_bound = 4.0 * p.hopping * std::abs(bessel_j(2, d.amplitude)) * p.interaction / d.omega;
    CHECK(best <= r.gamma * (1.0 + 1e-12));
    CHECK(best >= r.gamma - 2.0 * slope_bound * h);
    // Grid points within that resolution of the maximum; maximizers come in
    // sign-flipped copies, so compare magnitudes.
    for (const auto& qm : r.q_mum) {
      bool near = false;
      for (std::size_t k = 0; k < grid.size() && !near; ++k) {
        if (values[k] < best - 2.0 * slope_bound * h) continue;
        const double dx = std::abs(std::abs(grid[k].qx) - std::abs(qm.qx));
        const double dy = std::abs(std::abs(grid[k].qy) - std::abs(qm.qy));
        near = dx <= h && dy <= h;
      }
      CHECK(near);
    }
  }
}

TEST_CASE("critical amplitude") {
  CHECK(k0_critical(1.0, 1.0) == 0.0);
  CHECK(k0_critical(2500.0, 700.0) == doctest::Approx(1.9031).epsilon(1e-4));
  const double ref = oracle::bisect([](double x) { return oracle::bessel_series_ld(0, x) - 0.28; }, 0.0, 2.4048255576957728);
  CHECK(std::abs(k0_critical(2500.0, 700.0) - ref) < 1e-9);
  CHECK(k0_critical(1e9, 1.0) == doctest::Approx(2.404826).epsilon(1e-6));
  CHECK_THROWS_AS(k0_critical(1.0, 1.5), Error);
  try {
    k0_critical(600.0, 700.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoCriticalAmplitude);
  }
  double previous = 0.0;
  for (double w = 700.0; w < 1e6; w *= 1.2) {
    const double k = k0_critical(w, 700.0);
    CHECK(k >= previous);
    CHECK(k < j0_first_zero());
    previous = k;
  }
}

TEST_CASE("g calibration from the cusp") {
  const double j = hz_to_rad_s(50.0);
  const double g = calibrate_g_from_cusp(hz_to_rad_s(444.5), j, 1.25);
  CHECK(rad_s_to_hz(g) == doctest::Approx(700.0).epsilon(0.01));
  for (double gin : {0.1, 3.0, 12.0, 300.0}) {
    const auto p = LatticeParams::make(1.0, gin);
    const double wc = omega_c(make_drive(Trajectory::kLinearX, 1.1), p).omega_c;
    CHECK(calibrate_g_from_cusp(wc, 1.0, 1.1) == doctest::Approx(gin).epsilon(1e-10));
  }
  const double edge = 4.0 * effective_hopping(1.1, 1.0);
  CHECK(std::abs(calibrate_g_from_cusp(edge, 1.0, 1.1)) < 1e-14);
  CHECK_THROWS_AS(calibrate_g_from_cusp(0.9 * edge, 1.0, 1.1), Error);
  CHECK_THROWS_AS(calibrate_g_from_cusp(10.0, 1.0, 2.6), Error);
}

TEST_CASE("stable condensate momentum") {
  for (auto trajectory : kAll) CHECK(stable_momentum(make_drive(trajectory, 1.0)).is_zero());
  const auto lin = stable_momentum(make_drive(Trajectory::kLinearX, 3.0));
  CHECK(lin.qx == doctest::Approx(kPi));
  CHECK(lin.qy == 0.0);
  const auto diag = stable_momentum(make_drive(Trajectory::kDiagonal, 3.0));
  CHECK(diag.qx == doctest::Approx(kPi));
  CHECK(diag.qy == doctest::Approx(kPi));
}
