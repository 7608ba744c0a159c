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

#include "fbdg/lattice.hpp"

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

}  // namespace

LatticeParams LatticeParams::make(double hopping, double interaction, double density,
                                  double background_rate, double transverse_mass) {
  LatticeParams p;
  p.hopping = hopping;
  p.interaction = interaction;
  p.density = density;
  p.onsite = density > 0.0 ? interaction / density : 0.0;
  p.background_rate = background_rate;
  p.transverse_mass = transverse_mass > 0.0 ? transverse_mass : 1.0 / (2.0 * hopping);
  p.validate();
  return p;
}

void LatticeParams::validate() const {
  if (!(hopping > 0.0)) throw Error(ErrorCode::kDomain, "hopping J must be positive");
  if (!(interaction >= 0.0)) throw Error(ErrorCode::kDomain, "interaction g must be non-negative");
  if (!(density > 0.0)) throw Error(ErrorCode::kDomain, "density n0 must be positive");
  if (!(background_rate >= 0.0)) throw Error(ErrorCode::kDomain, "background rate must be non-negative");
  if (!(transverse_mass > 0.0)) throw Error(ErrorCode::kDomain, "transverse mass must be positive");
  const double scale = std::max(std::abs(interaction), 1e-300);
  if (std::abs(onsite * density - interaction) > 1e-12 * scale && interaction > 0.0) {
    throw Error(ErrorCode::kDomain, "g must equal U n0");
  }
}

std::string_view to_string(Trajectory trajectory) {
  switch (trajectory) {
    case Trajectory::kLinearX: return "linear_x";
    case Trajectory::kDiagonal: return "diagonal";
    case Trajectory::kCircular: return "circular";
  }
  return "unknown";
}

Trajectory parse_trajectory(std::string_view text) {
  if (text == "linear_x" || text == "linear" || text == "x") return Trajectory::kLinearX;
  if (text == "diagonal" || text == "diag") return Trajectory::kDiagonal;
  if (text == "circular" || text == "circ") return Trajectory::kCircular;
  throw Error(ErrorCode::kConfig, "unknown trajectory '" + std::string(text) + "'");
}

double DriveSpec::period() const { return 2.0 * kPi / omega; }

double DriveSpec::phase() const { return trajectory == Trajectory::kCircular ? -0.5 * kPi : 0.0; }

void DriveSpec::validate() const {
  if (!(amplitude >= 0.0)) throw Error(ErrorCode::kDomain, "drive amplitude K0 must be non-negative");
  if (!(omega > 0.0)) throw Error(ErrorCode::kDomain, "drive frequency must be positive");
  if (envelope.ramp_up_periods < 1) throw Error(ErrorCode::kDomain, "ramp_up_periods must be >= 1");
  if (envelope.hold_periods < 0 || envelope.ramp_down_periods < 0) {
    throw Error(ErrorCode::kDomain, "hold and ramp-down periods must be >= 0");
  }
  if (!(envelope.end_phase >= 0.0 && envelope.end_phase < 2.0 * kPi)) {
    throw Error(ErrorCode::kDomain, "end_phase must lie in [0, 2 pi)");
  }
}

double DriveSpec::stop_time(int steps_per_period) const {
  const double hold_end = (envelope.ramp_up_periods + envelope.hold_periods) * period();
  double offset = std::fmod(envelope.end_phase + 0.5 * kPi, 2.0 * kPi) / omega;
  if (steps_per_period > 0) {
    const double dt = period() / steps_per_period;
    offset = std::round(offset / dt) * dt;
    if (offset > period() - 0.5 * dt) offset = 0.0;
  } else if (period() - offset < 1e-9 * period()) {
    offset = 0.0;  // phase just below the wrap point
  }
  return hold_end + offset;
}

double DriveSpec::end_time() const {
  const double hold_end = (envelope.ramp_up_periods + envelope.hold_periods) * period();
  if (envelope.abrupt_stop) return stop_time();
  return hold_end + envelope.ramp_down_periods * period();
}

double wrap_quasimomentum(double q) {
  double r = std::remainder(q, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Momentum Momentum::canonical() const {
  return Momentum{wrap_quasimomentum(qx), wrap_quasimomentum(qy), qz};
}

double envelope_value(double t, const DriveSpec& drive) {
  const Envelope& env = drive.envelope;
  const double period = drive.period();
  if (t <= 0.0) return 0.0;
  const double ramp_up = env.ramp_up_periods * period;
  if (t < ramp_up) return sin_half_sq(kPi * t / ramp_up);
  const double hold_end = ramp_up + env.hold_periods * period;
  if (env.abrupt_stop) return t < drive.stop_time() ? 1.0 : 0.0;
  if (t <= hold_end) return 1.0;
  const double ramp_down = env.ramp_down_periods * period;
  if (t >= hold_end + ramp_down) return 0.0;
  const double c = std::cos(0.5 * kPi * (t - hold_end) / ramp_down);
  return c * c;
}

GaugeShift gauge_shift(const DriveSpec& drive, double t, bool with_envelope) {
  const double amplitude = drive.amplitude * (with_envelope ? envelope_value(t, drive) : 1.0);
  if (amplitude == 0.0) return {};
  const double wt = drive.omega * t;
  return GaugeShift{amplitude * std::sin(wt), drive.kappa() * amplitude * std::sin(wt + drive.phase())};
}

double shifted_dispersion(const Momentum& q, const GaugeShift& shift, const LatticeParams& p) {
  const double lattice = std::sin(0.5 * q.qx) * std::sin(0.5 * q.qx - shift.x) +
                         std::sin(0.5 * q.qy) * std::sin(0.5 * q.qy - shift.y);
  return 4.0 * p.hopping * lattice + p.transverse_energy(q.qz);
}

double dispersion(const Momentum& q, double t, const DriveSpec& drive, const LatticeParams& p) {
  return shifted_dispersion(q, gauge_shift(drive, t, false), p);
}

double eps_eff(const Momentum& q, const DriveSpec& drive, const LatticeParams& p) {
  const double j0 = bessel_j(0, drive.amplitude);
  const double sx = sin_half_sq(q.qx);
  const double sy = sin_half_sq(q.qy);
  const double lattice = drive.trajectory == Trajectory::kLinearX ? j0 * sx + sy : j0 * (sx + sy);
  return 4.0 * p.hopping * lattice + p.transverse_energy(q.qz);
}

void require_positive_band(const DriveSpec& drive) {
  const double j0 = bessel_j(0, drive.amplitude);
  if (j0 <= 1e-12) {
    throw Error(ErrorCode::kInvertedBand,
                "J_eff <= 0 at K0 = " + std::to_string(drive.amplitude) + " (inverted band)");
  }
}

BogoliubovFrame bog_frame_from_energy(double kinetic, double interaction) {
  if (kinetic < 0.0) throw Error(ErrorCode::kInvertedBand, "negative kinetic energy in Bogoliubov frame");
  BogoliubovFrame frame;
  frame.eps_eff = kinetic;
  frame.e_bog = std::sqrt(kinetic * (kinetic + 2.0 * interaction));
  if (frame.e_bog <= 0.0) throw Error(ErrorCode::kSingularMode, "zero Bogoliubov energy (condensate mode)");
  frame.cosh2theta = (kinetic + interaction) / frame.e_bog;
  frame.sinh2theta = interaction / frame.e_bog;
  return frame;
}

BogoliubovFrame bog_frame(const Momentum& q, const DriveSpec& drive, const LatticeParams& p) {
  const Momentum c = q.canonical();
  if (c.is_zero()) throw Error(ErrorCode::kSingularMode, "q = 0 is the condensate mode");
  const double e = eps_eff(c, drive, p);
  if (e < 0.0) throw Error(ErrorCode::kInvertedBand, "eps_eff < 0 (inverted band)");
  return bog_frame_from_energy(e, p.interaction);
}

std::vector<double> h_coefficients(const Momentum& q, const DriveSpec& drive,
                                   const LatticeParams& p, int l_max) {
  if (l_max < 1) throw Error(ErrorCode::kDomain, "l_max must be >= 1");
  const double sx = sin_half_sq(q.qx);
  const double sy = sin_half_sq(q.qy);
  std::vector<double> c(static_cast<std::size_t>(l_max));
  for (int l = 1; l <= l_max; ++l) {
    const double bessel = bessel_j(2 * l, drive.amplitude);
    double geometry = sx;
    if (drive.trajectory == Trajectory::kDiagonal) geometry = sx + sy;
    if (drive.trajectory == Trajectory::kCircular) geometry = sx + (l % 2 == 0 ? sy : -sy);
    c[static_cast<std::size_t>(l - 1)] = 8.0 * p.hopping * geometry * bessel;
  }
  return c;
}

double displacement_from_k0(const DriveSpec& drive, double lattice_spacing_m, double mass_kg) {
  if (!(drive.omega > 0.0)) throw Error(ErrorCode::kDomain, "drive frequency must be positive");
  return phys::kHbar * drive.amplitude / (lattice_spacing_m * drive.omega * mass_kg);
}

}  // namespace fbdg
