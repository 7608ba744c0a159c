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
#include <string>
#include <vector>

#include "fbdg/bdg.hpp"
#include "fbdg/lattice.hpp"
#include "fbdg/twa.hpp"
#include "harness/config.hpp"

namespace fbdg::harness {

// Frequencies in config files are ordinary frequencies in Hz; internally
// everything is converted to rad/s with hbar = 1.

LatticeParams lattice_from(const Config& cfg);
DriveSpec drive_from(const Config& cfg);
BdgRunConfig bdg_config_from(const Config& cfg, int workers);
TwaRunConfig twa_config_from(const Config& cfg);
EnsembleConfig ensemble_from(const Config& cfg, std::uint64_t seed, int workers);
TwaRateOptions twa_rate_options_from(const Config& cfg);

enum class ScanVariable { kK0, kOmega, kGJOverOmega, kG, kV0 };
enum class Engine { kAnalytic, kBdg, kTwa };

std::string to_string(ScanVariable variable);
ScanVariable parse_scan_variable(const std::string& text);
std::string to_string(Engine engine);
Engine parse_engine(const std::string& text);

struct ScanSpec {
  ScanVariable variable = ScanVariable::kOmega;
  std::vector<double> values;  // Hz for OMEGA and G, E_R for V0, plain numbers otherwise
  LatticeParams lattice;
  DriveSpec drive;
  std::vector<Trajectory> trajectories;
  std::vector<Engine> engines;
  // Band-structure inputs for V0 scans.
  double wavelength_m = 814e-9;
  double mass_kg = 0.0;
  int cutoff = 21;

  /// Values non-empty and strictly monotone.
  void validate() const;
};

/// Reads [scan]. Throws Error(kConfig) when the scanned quantity is also set
/// in [lattice] or [drive], or when `required` is not among the engines.
ScanSpec scan_from(const Config& cfg, Engine required);

struct ScanPoint {
  LatticeParams lattice;
  DriveSpec drive;
};

ScanPoint scan_point(const ScanSpec& scan, double value, Trajectory trajectory);

struct RunManifest {
  std::string command;
  std::uint64_t config_hash = 0;
  std::uint64_t master_seed = 0;
  int workers = 0;
  std::string engine_versions;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::string> outputs;

  void write(const std::string& path) const;
};

/// FNV-1a 64-bit hash.
std::uint64_t hash_text(const std::string& text);
std::string utc_now();

struct RunContext {
  Config config;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int workers = 0;
  std::string input;  // positional input for `fit`
  std::vector<std::string> outputs;

  std::string output_path(const std::string& name);
};

// Each command writes its CSV files into ctx.out_dir and returns the
// process exit code (0 success, 3 numerical failure of every point).
int cmd_rates(RunContext& ctx);
int cmd_k0c(RunContext& ctx);
int cmd_bdg(RunContext& ctx);
int cmd_twa(RunContext& ctx);
int cmd_endphase(RunContext& ctx);
int cmd_fit(RunContext& ctx);

}  // namespace fbdg::harness
