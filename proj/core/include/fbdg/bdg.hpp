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

#include <complex>
#include <cstddef>
#include <vector>

#include "fbdg/lattice.hpp"
#include "fbdg/parallel.hpp"

namespace fbdg {

using Complex = std::complex<double>;

/// Momentum grid. x and y are lattice directions with N sites each
/// (q = 2 pi k / N); z is a periodic box of length lz sampled by nz Fourier
/// modes (q_z = 2 pi k / lz). lz <= 0 means lz = nz.
struct GridDims {
  int nx = 1;
  int ny = 1;
  int nz = 1;
  double lz = 0.0;

  std::size_t volume() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  double box_length_z() const { return lz > 0.0 ? lz : static_cast<double>(nz); }
  void validate() const;
};

/// Lattice quasimomentum for index k on a ring of n sites, in (-pi, pi].
double lattice_momentum(int k, int n);
/// Transverse momentum for FFT index k of n modes in a box of length lz.
double transverse_momentum(int k, int n, double lz);

/// All grid momenta in row-major (x, y, z) FFT index order.
std::vector<Momentum> momentum_grid(const GridDims& grid);

struct ModePairState {
  Complex u{1.0, 0.0};
  Complex v{0.0, 0.0};
  Momentum q;
  double t = 0.0;

  double symplectic_norm() const { return std::norm(u) - std::norm(v); }
  double occupation() const { return std::norm(v); }
};

enum class BdgStepper { kRk4, kMagnus4 };

BdgStepper parse_stepper(std::string_view text);
std::string_view to_string(BdgStepper stepper);

struct BdgRunConfig {
  int steps_per_period = 256;
  int n_cycles = 24;
  GridDims grid;
  int fit_window_cycles = 8;
  /// Apply the drive envelope; by default the amplitude is constant.
  bool use_envelope = false;
  BdgStepper stepper = BdgStepper::kMagnus4;
  /// Largest allowed symplectic-norm drift, relative to |u|^2 + |v|^2,
  /// before kIntegratorTolerance. Equals the absolute drift while the mode
  /// is near the vacuum.
  double norm_tolerance = 1e-6;
  ParallelOptions parallel;

  void validate() const;
};

struct ModeTrajectory {
  Momentum q;
  std::vector<double> times;        // t_k = k T, k = 0..n_cycles
  std::vector<double> occupations;  // n_q(t_k) = |v|^2
  double max_norm_drift = 0.0;      // max_k ||u|^2 - |v|^2 - 1|
  ModePairState final_state;
};

/// Static (K0 = 0) Bogoliubov mode (u, v) = (cosh theta, -sinh theta): the
/// positive-frequency eigenvector of the undriven BdG matrix.
ModePairState init_mode(const Momentum& q, const DriveSpec& drive, const LatticeParams& p);

/// Gauge-shift samples shared by all modes of a run: cos and sin of A_x and
/// A_y at the substep times of the chosen stepper.
class DriveTable {
 public:
  DriveTable(const DriveSpec& drive, const BdgRunConfig& cfg);

  double dt() const { return dt_; }
  int steps() const { return steps_; }
  /// Node j is at time j dt / 2 for the Runge-Kutta stepper and holds the
  /// Gauss-Legendre points for the Magnus stepper.
  struct Node {
    double cx, sx, cy, sy;
  };
  const std::vector<Node>& nodes() const { return nodes_; }
  BdgStepper stepper() const { return stepper_; }

 private:
  double dt_ = 0.0;
  int steps_ = 0;
  BdgStepper stepper_ = BdgStepper::kRk4;
  std::vector<Node> nodes_;
};

ModeTrajectory evolve_mode(const ModePairState& state, const DriveSpec& drive, const LatticeParams& p,
                           const BdgRunConfig& cfg);
ModeTrajectory evolve_mode(const ModePairState& state, const DriveTable& table, const LatticeParams& p,
                           const BdgRunConfig& cfg);

struct ModeRate {
  Momentum q;
  double rate = 0.0;  // growth rate of n_q, i.e. 2 gamma_q
  bool stable = false;
};

struct GridScanResult {
  Momentum q_max;
  double rate = 0.0;
  std::vector<ModeRate> modes;  // grid order, q = 0 omitted
};

/// Evolves every non-zero grid mode and fits the log-slope of n_q over the
/// last fit_window_cycles periods. Ties in the maximum go to the
/// lexicographically smallest (qx, qy, qz).
GridScanResult grid_instability_scan(const DriveSpec& drive, const LatticeParams& p, const BdgRunConfig& cfg);

/// Summed linearized depletion (1/V) sum_{q != 0} n_q(t_k) at each period.
std::vector<double> summed_occupation(const DriveSpec& drive, const LatticeParams& p, const BdgRunConfig& cfg);

}  // namespace fbdg
