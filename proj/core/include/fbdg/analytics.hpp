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

#include <vector>

#include "fbdg/lattice.hpp"

namespace fbdg {

enum class Regime { kLowFrequency, kHighFrequency };

std::string_view to_string(Regime regime);

/// Closed-form instability result for one drive.
struct InstabilityResult {
  std::vector<Momentum> q_mum;  // one representative per +-q pair
  double gamma = 0.0;           // mode amplitude growth rate
  double gamma_mum = 0.0;       // observable rate: multiplicity * 2 gamma + gamma0
  Regime regime = Regime::kHighFrequency;
  int multiplicity = 1;
};

struct CuspData {
  double omega_c = 0.0;
  double bandwidth = 0.0;
  bool equals_bandwidth = false;
};

enum class DriveDimensionality { k1D, k2D };

double effective_hopping(double k0, double hopping);

/// Momentum-resolved rate factor s(q), using |J_2(K0)| and drive.omega.
double s_of_q(const Momentum& q, const DriveSpec& drive, const LatticeParams& p);

/// Number of equally unstable +-q pairs: 1 for the x-only drive, 2 otherwise.
int mode_multiplicity(Trajectory trajectory);

/// Most unstable modes and rates at drive frequency omega (drive.omega is
/// ignored). Requires J_eff > 0.
InstabilityResult gamma_and_qmum(const DriveSpec& drive, const LatticeParams& p, double omega);

CuspData omega_c(const DriveSpec& drive, const LatticeParams& p);

/// Effective Bogoliubov bandwidth for 1D (x-only) or 2D drives.
double bandwidth(DriveDimensionality dimensionality, const LatticeParams& p, double k0);

/// Critical amplitude K0c = J0^{-1}(g/omega). Throws kNoCriticalAmplitude
/// when g/omega > 1.
double k0_critical(double omega, double interaction);

/// Inverts the x-only cusp relation omega_c^2 = 4J_eff (4J_eff + 2g).
double calibrate_g_from_cusp(double measured_omega_c, double hopping, double k0);

/// Dynamically stable condensate momentum.
Momentum stable_momentum(const DriveSpec& drive);

}  // namespace fbdg
