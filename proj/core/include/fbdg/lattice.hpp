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

#include <string_view>
#include <vector>

namespace fbdg {

// Internal units: hbar = 1, lattice spacing a = 1, energies are angular
// frequencies. Any consistent energy unit works (rad/s or units of J).

inline double hz_to_rad_s(double hz) { return 2.0 * 3.14159265358979323846 * hz; }
inline double rad_s_to_hz(double w) { return w / (2.0 * 3.14159265358979323846); }

struct LatticeParams {
  double hopping = 1.0;      // J
  double interaction = 0.0;  // g = U n0
  double onsite = 0.0;       // U
  double density = 1.0;      // n0, particles per grid cell
  double background_rate = 0.0;  // gamma0, 1/time
  double transverse_mass = 0.5;  // m_z; transverse kinetic energy q_z^2 / (2 m_z)

  /// Builds a consistent record with U = g / n0. If transverse_mass is not
  /// positive it defaults to 1/(2J), the continuum limit of the lattice
  /// hopping.
  static LatticeParams make(double hopping, double interaction, double density = 1.0,
                            double background_rate = 0.0, double transverse_mass = 0.0);

  /// Throws Error(kDomain) when an invariant is violated.
  void validate() const;

  double transverse_energy(double qz) const { return qz * qz / (2.0 * transverse_mass); }
};

enum class Trajectory { kLinearX, kDiagonal, kCircular };

std::string_view to_string(Trajectory trajectory);
Trajectory parse_trajectory(std::string_view text);

/// Amplitude envelope in units of the drive period.
struct Envelope {
  int ramp_up_periods = 1;
  int hold_periods = 0;
  int ramp_down_periods = 0;
  /// Stop phase in the lattice-displacement convention: the drive is cut
  /// when the displacement phase (omega t - pi/2) equals end_phase, counted
  /// from the end of the hold. Only used with abrupt_stop.
  double end_phase = 0.0;
  bool abrupt_stop = false;
};

struct DriveSpec {
  Trajectory trajectory = Trajectory::kLinearX;
  double amplitude = 0.0;  // K0
  double omega = 1.0;
  Envelope envelope;

  double period() const;
  double kappa() const { return trajectory == Trajectory::kLinearX ? 0.0 : 1.0; }
  /// Relative x-y phase: 0 (linear, diagonal) or -pi/2 (circular).
  double phase() const;
  void validate() const;

  /// Time at which the envelope reaches zero for good.
  double end_time() const;
  /// Time of an abrupt stop, snapped to the nearest multiple of
  /// period()/steps_per_period when steps_per_period > 0.
  double stop_time(int steps_per_period = 0) const;
};

struct Momentum {
  double qx = 0.0;
  double qy = 0.0;
  double qz = 0.0;

  /// Maps qx, qy into (-pi, pi] by 2 pi periodicity.
  Momentum canonical() const;
  bool is_zero() const { return qx == 0.0 && qy == 0.0 && qz == 0.0; }
  Momentum operator-() const { return Momentum{-qx, -qy, -qz}; }
};

double wrap_quasimomentum(double q);

/// Quasimomentum shift A(t) of the drive gauge. The kinetic energy at time
/// t is the static dispersion evaluated at q - A(t).
struct GaugeShift {
  double x = 0.0;
  double y = 0.0;
};

/// A_x = K0 env(t) sin(omega t), A_y = kappa K0 env(t) sin(omega t + phi).
/// With with_envelope = false the envelope is taken as 1.
GaugeShift gauge_shift(const DriveSpec& drive, double t, bool with_envelope = true);

/// Static lattice dispersion shifted so that the q = 0 energy vanishes at the
/// given gauge shift: sum_d 4J sin(q_d/2) sin(q_d/2 - A_d) + q_z^2/2m_z.
double shifted_dispersion(const Momentum& q, const GaugeShift& shift, const LatticeParams& p);

/// Instantaneous dispersion at constant amplitude K0 (no envelope).
double dispersion(const Momentum& q, double t, const DriveSpec& drive, const LatticeParams& p);

/// Effective (period-averaged) dispersion. May be negative past the first
/// zero of J_0; use require_positive_band() before building a Bogoliubov frame.
double eps_eff(const Momentum& q, const DriveSpec& drive, const LatticeParams& p);

/// Throws Error(kInvertedBand) if J_eff = J J0(K0) <= 0.
void require_positive_band(const DriveSpec& drive);

struct BogoliubovFrame {
  double eps_eff = 0.0;
  double e_bog = 0.0;
  double cosh2theta = 1.0;
  double sinh2theta = 0.0;
};

/// Bogoliubov frame from an arbitrary non-negative kinetic energy.
BogoliubovFrame bog_frame_from_energy(double kinetic, double interaction);

BogoliubovFrame bog_frame(const Momentum& q, const DriveSpec& drive, const LatticeParams& p);

/// Coefficients c_l of cos(2 l omega t) in h_q(t), l = 1..l_max.
std::vector<double> h_coefficients(const Momentum& q, const DriveSpec& drive,
                                   const LatticeParams& p, int l_max);

/// Envelope value in [0, 1] at time t >= 0.
double envelope_value(double t, const DriveSpec& drive);

/// Physical shake amplitude Delta x = hbar K0 / (a omega m), SI units
/// (omega in rad/s, a in m, m in kg).
double displacement_from_k0(const DriveSpec& drive, double lattice_spacing_m, double mass_kg);

}  // namespace fbdg
