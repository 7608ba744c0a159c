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

#include <numbers>

namespace fbdg {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Bessel function of the first kind J_n(x) for 0 <= n <= 64 and |x| <= 50.
/// Absolute error is below 1e-10 on the whole domain. Throws
/// Error(kDomain) outside it.
double bessel_j(int order, double x);

/// First positive zero of J_0 (2.404825557695773...).
double j0_first_zero();

/// Inverse of J_0 on its principal branch [0, j0_first_zero()]; y in (0, 1].
double bessel_j0_inverse(double y);

/// Physical constants (SI).
namespace phys {
inline constexpr double kPlanck = 6.62607015e-34;
inline constexpr double kHbar = kPlanck / kTwoPi;
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;
inline constexpr double kRubidium87Mass = 86.909180527 * kAtomicMassUnit;
}  // namespace phys

/// Recoil energy E_R = h^2 / (2 m lambda^2) expressed as an ordinary
/// frequency E_R / h in Hz.
double recoil_frequency_hz(double wavelength_m, double mass_kg);

/// 1D lattice V(x) = V0 sin^2(k_L x) with k_L = 2 pi / lambda, lattice
/// spacing a = lambda / 2. Energies in units of E_R.
struct BandProblem {
  double depth_er = 0.0;
  int cutoff = 21;  // plane waves per side
  double recoil_hz = 0.0;
};

BandProblem make_band_problem(double depth_er, double wavelength_m, double mass_kg,
                              int cutoff = 21);

/// Lowest-band energy (E_R) at quasimomentum q in units of 1/a, q in [-pi, pi].
/// Throws Error(kConvergence) if the eigenvalue moves by more than 1e-6 E_R
/// when the cutoff is raised by 2.
double band_energy(const BandProblem& problem, double quasimomentum);

/// Tight-binding hopping J = [E(pi) - E(0)] / 4, in Hz.
double hopping_from_depth(const BandProblem& problem);

}  // namespace fbdg
