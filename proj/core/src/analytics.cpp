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

#include "fbdg/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fbdg/error.hpp"
#include "fbdg/special_math.hpp"

namespace fbdg {

namespace {

constexpr double kPi = std::numbers::pi;

double sin_half_sq(double q) {
  const double s = std::sin(0.5 * q);
  return s * s;
}

// Band-edge value of eps_eff that fixes omega_c: 4 J_eff at (pi, 0) for the
// x-only and circular drives, 8 J_eff at (pi, pi) for the diagonal one.
double edge_factor(Trajectory trajectory) {
  return trajectory == Trajectory::kDiagonal ? 8.0 : 4.0;
}

}  // namespace

std::string_view to_string(Regime regime) {
  return regime == Regime::kLowFrequency ? "low_freq" : "high_freq";
}

double effective_hopping(double k0, double hopping) { return hopping * bessel_j(0, k0); }

double s_of_q(const Momentum& q, const DriveSpec& drive, const LatticeParams& p) {
  const double sx = sin_half_sq(q.qx);
  const double sy = sin_half_sq(q.qy);
  double geometry = sx;
  if (drive.trajectory == Trajectory::kDiagonal) geometry = sx + sy;
  if (drive.trajectory == Trajectory::kCircular) geometry = std::abs(sx - sy);
  return 4.0 * p.hopping * std::abs(bessel_j(2, drive.amplitude)) * geometry * p.interaction / drive.omega;
}

int mode_multiplicity(Trajectory trajectory) {
  return trajectory == Trajectory::kLinearX ? 1 : 2;
}

CuspData omega_c(const DriveSpec& drive, const LatticeParams& p) {
  require_positive_band(drive);
  const double edge = edge_factor(drive.trajectory) * effective_hopping(drive.amplitude, p.hopping);
  CuspData cusp;
  cusp.omega_c = std::sqrt(edge * (edge + 2.0 * p.interaction));
  const auto dim = drive.trajectory == Trajectory::kLinearX ? DriveDimensionality::k1D
                                                            : DriveDimensionality::k2D;
  cusp.bandwidth = bandwidth(dim, p, drive.amplitude);
  cusp.equals_bandwidth = drive.trajectory == Trajectory::kDiagonal;
  return cusp;
}

double bandwidth(DriveDimensionality dimensionality, const LatticeParams& p, double k0) {
  const double j0 = std::abs(bessel_j(0, k0));
  const double width = dimensionality == DriveDimensionality::k2D ? 8.0 * p.hopping * j0
                                                                  : 4.0 * p.hopping * (j0 + 1.0);
  return std::sqrt(width * (width + 2.0 * p.interaction));
}

InstabilityResult gamma_and_qmum(const DriveSpec& drive, const LatticeParams& p, double omega) {
  if (!(omega > 0.0)) throw Error(ErrorCode::kDomain, "drive frequency must be positive");
  require_positive_band(drive);
  const double g = p.interaction;
  const double j0 = bessel_j(0, drive.amplitude);
  const double j2 = std::abs(bessel_j(2, drive.amplitude));
  const double cusp = omega_c(drive, p).omega_c;

  InstabilityResult result;
  result.multiplicity = mode_multiplicity(drive.trajectory);
  if (omega >= cusp) {
    result.regime = Regime::kHighFrequency;
    const double factor = drive.trajectory == Trajectory::kDiagonal ? 8.0 : 4.0;
    result.gamma = factor * p.hopping * j2 * g / omega;
    switch (drive.trajectory) {
      case Trajectory::kLinearX: result.q_mum = {{kPi, 0.0, 0.0}}; break;
      case Trajectory::kDiagonal: result.q_mum = {{kPi, kPi, 0.0}, {-kPi, kPi, 0.0}}; break;
      case Trajectory::kCircular: result.q_mum = {{kPi, 0.0, 0.0}, {0.0, kPi, 0.0}}; break;
    }
  } else {
    result.regime = Regime::kLowFrequency;
    // On resonance eps_eff = sqrt(g^2 + omega^2) - g.
    const double resonant_eps = std::sqrt(g * g + omega * omega) - g;
    const double ratio = resonant_eps / (edge_factor(drive.trajectory) * p.hopping * j0);
    const double q = 2.0 * std::asin(std::sqrt(std::min(ratio, 1.0)));
    result.gamma = resonant_eps * (j2 / j0) * (g / omega);
    switch (drive.trajectory) {
      case Trajectory::kLinearX: result.q_mum = {{q, 0.0, 0.0}}; break;
      case Trajectory::kDiagonal: result.q_mum = {{q, q, 0.0}, {q, -q, 0.0}}; break;
      case Trajectory::kCircular: result.q_mum = {{q, 0.0, 0.0}, {0.0, q, 0.0}}; break;
    }
  }
  result.gamma_mum = result.multiplicity * 2.0 * result.gamma + p.background_rate;
  return result;
}

double k0_critical(double omega, double interaction) {
  if (!(omega > 0.0)) throw Error(ErrorCode::kDomain, "drive frequency must be positive");
  const double ratio = interaction / omega;
  if (ratio > 1.0) {
    throw Error(ErrorCode::kNoCriticalAmplitude,
                "g/omega = " + std::to_string(ratio) + " > 1: no critical amplitude");
  }
  return bessel_j0_inverse(ratio);
}

double calibrate_g_from_cusp(double measured_omega_c, double hopping, double k0) {
  const double edge = 4.0 * effective_hopping(k0, hopping);
  if (!(edge > 0.0)) throw Error(ErrorCode::kInvertedBand, "J_eff <= 0: cusp calibration undefined");
  if (measured_omega_c < edge) {
    throw Error(ErrorCode::kInconsistentMeasurement,
                "measured omega_c below 4 J_eff: no non-negative g reproduces it");
  }
  return (measured_omega_c * measured_omega_c - edge * edge) / (2.0 * edge);
}

Momentum stable_momentum(const DriveSpec& drive) {
  if (drive.amplitude <= j0_first_zero()) return {};
  if (drive.trajectory == Trajectory::kLinearX) return {kPi, 0.0, 0.0};
  return {kPi, kPi, 0.0};
}

}  // namespace fbdg
