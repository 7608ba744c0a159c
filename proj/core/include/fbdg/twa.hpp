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
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fbdg/bdg.hpp"
#include "fbdg/fitting.hpp"
#include "fbdg/lattice.hpp"
#include "fbdg/parallel.hpp"

namespace fbdg {

/// Frame in which a field is stored. The only evolution frame is the one
/// where the drive enters as a time-dependent quasimomentum shift of the
/// kinetic energy.
enum class GaugeTag { kQuasimomentumShift };

std::string_view to_string(GaugeTag gauge);
GaugeTag parse_gauge(std::string_view text);

/// Complex field a_r on the real-space grid, row-major (x, y, z).
struct FieldState {
  GridDims grid;
  std::vector<Complex> amplitudes;
  double t = 0.0;
  GaugeTag gauge = GaugeTag::kQuasimomentumShift;
  std::uint64_t seed = 0;
  std::uint64_t realization = 0;

  double total_number() const;
};

struct SampleOptions {
  /// Multiplies the Wigner noise amplitude; 0 gives the noiseless condensate.
  double noise_scale = 1.0;
};

/// Wigner sample of the Bogoliubov vacuum on top of a plane-wave condensate
/// at q0 (which must be a grid momentum with q0.qz = 0). Noise draws come
/// from the counter-based stream (seed, realization). For q0 = 0 the modes
/// are those of the undriven lattice; otherwise the drive-averaged band is
/// used, which is the one that makes a band-edge condensate stable.
FieldState sample_initial(const GridDims& grid, const LatticeParams& p, const DriveSpec& drive,
                          const Momentum& q0, std::uint64_t seed, std::uint64_t realization,
                          const SampleOptions& options = {});

struct TwaRunConfig {
  GridDims grid;
  int steps_per_period = 256;
  /// Static evolution appended after the drive has ended.
  int post_stop_periods = 0;
  /// When positive, a trajectory ends at the first period with
  /// n_ex >= stop_depletion * n0. Ensemble means then cover the common
  /// prefix of all realizations.
  double stop_depletion = 0.0;
  Momentum q0;
  SampleOptions sample;

  void validate() const;
};

/// Stroboscopic observables of one trajectory.
struct ObservableTrace {
  std::vector<double> times;
  std::vector<double> n_ex_raw;            // (1/V) sum_{q != q0} |a_q|^2
  std::vector<double> n_ex;                // half-quantum subtracted
  std::vector<double> condensed_fraction;  // |a_q0|^2 / N
  std::vector<double> total_number;        // N(t)
  std::uint64_t realization = 0;
};

/// Split-step GPE integrator in the quasimomentum-shift gauge. Owns its
/// FFT plans; one instance per thread.
class GpeIntegrator {
 public:
  GpeIntegrator(const GridDims& grid, const DriveSpec& drive, const LatticeParams& p, int steps_per_period);
  ~GpeIntegrator();
  GpeIntegrator(const GpeIntegrator&) = delete;
  GpeIntegrator& operator=(const GpeIntegrator&) = delete;

  double dt() const { return dt_; }

  /// One Strang step (half kinetic, nonlinear, half kinetic), each kinetic
  /// half evaluated at its own midpoint.
  void step(FieldState& state);

  /// n_steps consecutive steps; adjacent kinetic halves are fused, so the
  /// cost is one transform pair per step.
  void advance(FieldState& state, long n_steps);

  /// Momentum-space amplitudes a_q = V^{-1/2} sum_r a_r e^{-i q r}.
  std::vector<Complex> momentum_amplitudes(const FieldState& state);

  /// Kinetic plus interaction energy at the state's time.
  double energy(const FieldState& state);

 private:
  struct Plans;

  GaugeShift shift_at(double t) const;
  void fill_phase(const GaugeShift& a1, double tau1, const GaugeShift& a2, double tau2);
  void multiply_phase(double scale);
  void nonlinear(double tau);

  GridDims grid_;
  DriveSpec drive_;
  LatticeParams params_;
  double dt_ = 0.0;
  double stop_time_ = 0.0;
  double hold_end_ = 0.0;
  std::vector<double> ax_, bx_, ay_, by_, ez_;
  std::vector<Complex> phase_x_, phase_y_, phase_z_;
  Plans* plans_ = nullptr;
};

/// Evolves a sampled state through the drive envelope and any post-stop
/// hold, recording observables at every multiple of the drive period.
/// Throws Error(kBlowUp) on a non-finite field.
ObservableTrace run_trajectory(const FieldState& initial, const DriveSpec& drive, const LatticeParams& p,
                               const TwaRunConfig& cfg, FieldState* final_state = nullptr);

struct EnsembleConfig {
  int n_realizations = 50;
  std::uint64_t master_seed = 0;
  int bootstrap_resamples = 200;
  ParallelOptions parallel;

  void validate() const;
};

struct EnsembleResult {
  ObservableTrace mean;
  std::vector<double> n_ex_band;  // bootstrap standard deviation of the mean
  std::vector<double> condensed_fraction_band;
  bool bands_defined = false;
  std::vector<ObservableTrace> realizations;
};

EnsembleResult ensemble_run(const EnsembleConfig& ensemble, const DriveSpec& drive, const LatticeParams& p,
                            const TwaRunConfig& cfg);

/// Short-time and long-time growth rates of n_ex.
struct TwaRates {
  FitResult short_time;
  FitResult long_time;
  double short_region_end = 0.0;
  /// False when the short-time region holds fewer than
  /// short_window_cycles + 1 samples; short_time is then left empty.
  bool short_valid = false;
};

struct TwaRateOptions {
  /// The short-time region ends at the last sample with n_ex below this
  /// fraction of n0.
  double short_fraction = 0.05;
  int short_window_cycles = 5;
  /// The long-time fit covers samples after the short-time region while
  /// the condensate still holds more than this fraction of n0 (n_ex below
  /// (1 - fraction) n0).
  double long_condensate_fraction = 0.5;
};

TwaRates twa_rates(const std::vector<double>& times, const std::vector<double>& n_ex, double n0, double period,
                   const TwaRateOptions& options = {});

/// Versioned text checkpoint: header lines, then one "re im" line per site.
void write_checkpoint(std::ostream& out, const FieldState& state);
FieldState read_checkpoint(std::istream& in);
void write_checkpoint_file(const std::string& path, const FieldState& state);
FieldState read_checkpoint_file(const std::string& path);

}  // namespace fbdg
