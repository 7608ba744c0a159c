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

#include "harness/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include "fbdg/analytics.hpp"
#include "fbdg/error.hpp"
#include "fbdg/fitting.hpp"
#include "fbdg/special_math.hpp"
#include "fbdg/version.hpp"
#include "harness/csv.hpp"

namespace fbdg::harness {

namespace {

constexpr double kPi = std::numbers::pi;

double hz(double rad_s) { return rad_s_to_hz(rad_s); }

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

Cell opt(const std::optional<double>& v) {
  if (v) return *v;
  return std::monostate{};
}

Cell flag_cell(const std::vector<std::string>& flags) {
  return flags.empty() ? std::string("ok") : join(flags, ";");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  return out;
}

std::string error_flag(const Error& e) {
  std::string flag(to_string(e.code()));
  std::replace(flag.begin(), flag.end(), ' ', '_');
  return flag;
}

// Explicit "values" list, or start/stop/count (spacing linear or log).
std::vector<double> read_values(const Config& cfg, const std::string& section) {
  auto values = cfg.get_doubles(section + ".values");
  const bool has_grid = cfg.has(section + ".start") || cfg.has(section + ".stop") || cfg.has(section + ".count");
  if (!values.empty() && has_grid) {
    throw Error(ErrorCode::kConfig, "[" + section + "] sets both values and start/stop/count");
  }
  if (has_grid) {
    const double start = cfg.require_double(section + ".start");
    const double stop = cfg.require_double(section + ".stop");
    const long count = cfg.get_int(section + ".count", 0);
    const std::string spacing = cfg.get_string(section + ".spacing", "linear");
    if (count < 1) throw Error(ErrorCode::kConfig, "[" + section + "] count must be >= 1");
    if (spacing != "linear" && spacing != "log") {
      throw Error(ErrorCode::kConfig, "[" + section + "] spacing must be linear or log");
    }
    if (spacing == "log" && !(start > 0.0 && stop > 0.0)) {
      throw Error(ErrorCode::kConfig, "[" + section + "] log spacing needs positive start and stop");
    }
    for (long i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
      values.push_back(spacing == "log" ? start * std::pow(stop / start, f) : start + f * (stop - start));
    }
  }
  return values;
}

void require_monotone(const std::vector<double>& values, const std::string& what) {
  if (values.empty()) throw Error(ErrorCode::kConfig, what + ": no values");
  if (values.size() < 2) return;
  const bool up = values[1] > values[0];
  for (std::size_t i = 1; i < values.size(); ++i) {
    const bool ok = up ? values[i] > values[i - 1] : values[i] < values[i - 1];
    if (!ok) throw Error(ErrorCode::kConfig, what + ": values must be strictly monotone");
  }
}

const char* scanned_key(ScanVariable v) {
  switch (v) {
    case ScanVariable::kK0: return "drive.k0";
    case ScanVariable::kOmega: return "drive.omega_hz";
    case ScanVariable::kGJOverOmega: return "lattice.interaction_hz";
    case ScanVariable::kG: return "lattice.interaction_hz";
    case ScanVariable::kV0: return "lattice.hopping_hz";
  }
  return "";
}

// Shared leading columns of the scan outputs.
const std::vector<std::string> kPointHeader = {"scan_variable", "scan_value", "trajectory", "k0",
                                               "omega_hz",      "omega_rad_s", "j_hz",      "g_hz"};

std::vector<Cell> point_cells(const ScanSpec& scan, double value, const ScanPoint& pt) {
  return {to_string(scan.variable), value, std::string(to_string(pt.drive.trajectory)), pt.drive.amplitude,
          hz(pt.drive.omega), pt.drive.omega, hz(pt.lattice.hopping), hz(pt.lattice.interaction)};
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::size_t n = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  f.n = x.size();
  if (f.n < 2) throw Error(ErrorCode::kInsufficientData, "line fit needs >= 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(f.n);
  my /= static_cast<double>(f.n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw Error(ErrorCode::kInsufficientData, "line fit needs distinct x values");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (f.n > 2) {
    double ss = 0.0;
    for (std::size_t i = 0; i < f.n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      ss += r * r;
    }
    f.stderr_slope = std::sqrt(ss / static_cast<double>(f.n - 2) / sxx);
  }
  return f;
}

std::vector<DecayTrace> realization_traces(const EnsembleResult& result) {
  const std::size_t points = result.mean.times.size();
  std::vector<DecayTrace> traces;
  for (const auto& r : result.realizations) {
    DecayTrace t;
    t.kind = TraceKind::kModeOccupation;
    t.t.assign(r.times.begin(), r.times.begin() + static_cast<std::ptrdiff_t>(points));
    t.y.assign(r.n_ex.begin(), r.n_ex.begin() + static_cast<std::ptrdiff_t>(points));
    traces.push_back(std::move(t));
  }
  return traces;
}

struct TwaPointResult {
  TwaRates rates;
  std::optional<double> short_stderr;
  std::optional<double> long_stderr;
  std::vector<std::string> flags;
};

// Rates from the ensemble mean, uncertainties from resampled realizations.
TwaPointResult analyse_twa(const EnsembleResult& result, double n0, double period, const TwaRateOptions& options,
                           const EnsembleConfig& ens) {
  TwaPointResult out;
  out.rates = twa_rates(result.mean.times, result.mean.n_ex, n0, period, options);
  if (!out.rates.short_valid) out.flags.push_back("short_window_too_short");
  if (result.realizations.size() < 2) return out;
  const auto traces = realization_traces(result);
  auto boot = [&](bool long_time) -> std::optional<double> {
    const TraceFitter fitter = [&](const DecayTrace& mean) {
      const TwaRates r = twa_rates(mean.t, mean.y, n0, period, options);
      if (!long_time && !r.short_valid) throw Error(ErrorCode::kInsufficientData, "short window");
      return long_time ? r.long_time : r.short_time;
    };
    try {
      const auto b = bootstrap_rate(traces, fitter, ens.bootstrap_resamples,
                                    ens.master_seed ^ (long_time ? 0x1011ULL : 0x5407ULL));
      if (b.degenerate) return std::nullopt;
      return b.stddev;
    } catch (const Error& e) {
      out.flags.push_back(std::string(long_time ? "long" : "short") + "_bootstrap_" + error_flag(e));
      return std::nullopt;
    }
  };
  if (out.rates.short_valid) out.short_stderr = boot(false);
  out.long_stderr = boot(true);
  return out;
}

}  // namespace

// ---------------------------------------------------------------- builders

LatticeParams lattice_from(const Config& cfg) {
  const double j = hz_to_rad_s(cfg.get_double("lattice.hopping_hz", 50.0));
  const double g = hz_to_rad_s(cfg.get_double("lattice.interaction_hz", 700.0));
  const double n0 = cfg.get_double("lattice.density", 1.0);
  const double gamma0 = cfg.get_double("lattice.background_rate_per_s", 0.0);
  const double factor = cfg.get_double("lattice.transverse_mass_factor", 1.0);
  if (!(factor > 0.0)) throw Error(ErrorCode::kConfig, "lattice.transverse_mass_factor must be positive");
  if (!(j > 0.0)) throw Error(ErrorCode::kConfig, "lattice.hopping_hz must be positive");
  try {
    return LatticeParams::make(j, g, n0, gamma0, factor / (2.0 * j));
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
}

DriveSpec drive_from(const Config& cfg) {
  DriveSpec d;
  d.trajectory = parse_trajectory(cfg.get_string("drive.trajectory", "linear_x"));
  d.amplitude = cfg.get_double("drive.k0", 1.25);
  d.omega = hz_to_rad_s(cfg.get_double("drive.omega_hz", 2500.0));
  d.envelope.ramp_up_periods = static_cast<int>(cfg.get_int("drive.ramp_up_periods", 1));
  d.envelope.hold_periods = static_cast<int>(cfg.get_int("drive.hold_periods", 0));
  d.envelope.ramp_down_periods = static_cast<int>(cfg.get_int("drive.ramp_down_periods", 0));
  d.envelope.end_phase = cfg.get_double("drive.end_phase_rad", 0.0);
  d.envelope.abrupt_stop = cfg.get_bool("drive.abrupt_stop", false);
  try {
    d.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  return d;
}

namespace {

GridDims grid_from(const Config& cfg, const std::string& section, int nx, int nz) {
  GridDims g;
  g.nx = static_cast<int>(cfg.get_int(section + ".nx", nx));
  g.ny = static_cast<int>(cfg.get_int(section + ".ny", g.nx));
  g.nz = static_cast<int>(cfg.get_int(section + ".nz", nz));
  g.lz = cfg.get_double(section + ".lz", 0.0);
  try {
    g.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  return g;
}

}  // namespace

BdgRunConfig bdg_config_from(const Config& cfg, int workers) {
  BdgRunConfig c;
  c.grid = grid_from(cfg, "bdg", 24, 1);
  c.steps_per_period = static_cast<int>(cfg.get_int("bdg.steps_per_period", c.steps_per_period));
  c.n_cycles = static_cast<int>(cfg.get_int("bdg.n_cycles", c.n_cycles));
  c.fit_window_cycles = static_cast<int>(cfg.get_int("bdg.fit_window_cycles", c.fit_window_cycles));
  c.use_envelope = cfg.get_bool("bdg.use_envelope", false);
  c.stepper = parse_stepper(cfg.get_string("bdg.stepper", "magnus4"));
  c.norm_tolerance = cfg.get_double("bdg.norm_tolerance", c.norm_tolerance);
  c.parallel.workers = workers;
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  return c;
}

TwaRunConfig twa_config_from(const Config& cfg) {
  TwaRunConfig c;
  c.grid = grid_from(cfg, "twa", 16, 8);
  c.steps_per_period = static_cast<int>(cfg.get_int("twa.steps_per_period", c.steps_per_period));
  c.post_stop_periods = static_cast<int>(cfg.get_int("twa.post_stop_periods", 0));
  c.stop_depletion = cfg.get_double("twa.stop_depletion", 0.0);
  c.q0 = Momentum{cfg.get_double("twa.q0x", 0.0), cfg.get_double("twa.q0y", 0.0), 0.0};
  c.sample.noise_scale = cfg.get_double("twa.noise_scale", 1.0);
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  return c;
}

EnsembleConfig ensemble_from(const Config& cfg, std::uint64_t seed, int workers) {
  EnsembleConfig e;
  e.n_realizations = static_cast<int>(cfg.get_int("twa.n_realizations", 10));
  e.bootstrap_resamples = static_cast<int>(cfg.get_int("twa.bootstrap_resamples", 200));
  e.master_seed = seed;
  e.parallel.workers = workers;
  try {
    e.validate();
  } catch (const Error& err) {
    throw Error(ErrorCode::kConfig, err.what());
  }
  return e;
}

TwaRateOptions twa_rate_options_from(const Config& cfg) {
  TwaRateOptions o;
  o.short_fraction = cfg.get_double("twa.short_fraction", o.short_fraction);
  o.short_window_cycles = static_cast<int>(cfg.get_int("twa.short_window_cycles", o.short_window_cycles));
  o.long_condensate_fraction = cfg.get_double("twa.long_condensate_fraction", o.long_condensate_fraction);
  if (!(o.short_fraction > 0.0 && o.short_fraction < 1.0) || o.short_window_cycles < 1 ||
      !(o.long_condensate_fraction > 0.0 && o.long_condensate_fraction < 1.0)) {
    throw Error(ErrorCode::kConfig, "invalid TWA rate-window options");
  }
  return o;
}

// ------------------------------------------------------------------ scans

std::string to_string(ScanVariable variable) {
  switch (variable) {
    case ScanVariable::kK0: return "K0";
    case ScanVariable::kOmega: return "OMEGA";
    case ScanVariable::kGJOverOmega: return "GJ_OVER_OMEGA";
    case ScanVariable::kG: return "G";
    case ScanVariable::kV0: return "V0";
  }
  return "unknown";
}

ScanVariable parse_scan_variable(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (t == "K0") return ScanVariable::kK0;
  if (t == "OMEGA") return ScanVariable::kOmega;
  if (t == "GJ_OVER_OMEGA") return ScanVariable::kGJOverOmega;
  if (t == "G") return ScanVariable::kG;
  if (t == "V0") return ScanVariable::kV0;
  throw Error(ErrorCode::kConfig, "unknown scan variable '" + text + "'");
}

std::string to_string(Engine engine) {
  switch (engine) {
    case Engine::kAnalytic: return "ANALYTIC";
    case Engine::kBdg: return "BDG";
    case Engine::kTwa: return "TWA";
  }
  return "unknown";
}

Engine parse_engine(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (t == "ANALYTIC") return Engine::kAnalytic;
  if (t == "BDG") return Engine::kBdg;
  if (t == "TWA") return Engine::kTwa;
  throw Error(ErrorCode::kConfig, "unknown engine '" + text + "'");
}

void ScanSpec::validate() const {
  require_monotone(values, "scan");
  if (trajectories.empty()) throw Error(ErrorCode::kConfig, "scan: no trajectories");
  if (engines.empty()) throw Error(ErrorCode::kConfig, "scan: no engines");
}

ScanSpec scan_from(const Config& cfg, Engine required) {
  ScanSpec s;
  s.variable = parse_scan_variable(cfg.get_string("scan.variable", "OMEGA"));
  if (cfg.has(scanned_key(s.variable))) {
    throw Error(ErrorCode::kConfig, "scanned variable " + to_string(s.variable) + " is also fixed by '" +
                                        scanned_key(s.variable) + "'");
  }
  s.values = read_values(cfg, "scan");
  s.lattice = lattice_from(cfg);
  s.drive = drive_from(cfg);
  for (const auto& t : cfg.get_strings("scan.trajectories")) s.trajectories.push_back(parse_trajectory(t));
  if (s.trajectories.empty()) s.trajectories.push_back(s.drive.trajectory);
  for (const auto& e : cfg.get_strings("scan.engines")) s.engines.push_back(parse_engine(e));
  if (s.engines.empty()) s.engines.push_back(required);
  if (std::find(s.engines.begin(), s.engines.end(), required) == s.engines.end()) {
    throw Error(ErrorCode::kConfig, "scan.engines does not include " + to_string(required));
  }
  s.wavelength_m = cfg.get_double("band.wavelength_nm", 814.0) * 1e-9;
  s.mass_kg = cfg.get_double("band.mass_amu", 86.909180527) * phys::kAtomicMassUnit;
  s.cutoff = static_cast<int>(cfg.get_int("band.cutoff", 21));
  s.validate();
  return s;
}

ScanPoint scan_point(const ScanSpec& scan, double value, Trajectory trajectory) {
  ScanPoint pt{scan.lattice, scan.drive};
  pt.drive.trajectory = trajectory;
  double j = pt.lattice.hopping;
  double g = pt.lattice.interaction;
  switch (scan.variable) {
    case ScanVariable::kK0: pt.drive.amplitude = value; break;
    case ScanVariable::kOmega: pt.drive.omega = hz_to_rad_s(value); break;
    case ScanVariable::kG: g = hz_to_rad_s(value); break;
    // value is g J / omega in Hz.
    case ScanVariable::kGJOverOmega: g = hz_to_rad_s(value) * pt.drive.omega / j; break;
    case ScanVariable::kV0:
      j = hz_to_rad_s(hopping_from_depth(make_band_problem(value, scan.wavelength_m, scan.mass_kg, scan.cutoff)));
      break;
  }
  pt.drive.validate();
  pt.lattice = LatticeParams::make(j, g, pt.lattice.density, pt.lattice.background_rate, pt.lattice.transverse_mass);
  return pt;
}

// --------------------------------------------------------------- manifest

void RunManifest::write(const std::string& path) const {
  auto out = open_out(path);
  out << "command = " << command << '\n';
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
  out << "config_hash = " << hash << '\n';
  out << "master_seed = " << master_seed << '\n';
  out << "workers = " << workers << '\n';
  out << "engine_versions = " << engine_versions << '\n';
  out << "started_utc = " << started_utc << '\n';
  out << "finished_utc = " << finished_utc << '\n';
  out << "outputs = " << join(outputs, ", ") << '\n';
}

std::uint64_t hash_text(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string RunContext::output_path(const std::string& name) {
  std::filesystem::create_directories(out_dir);
  outputs.push_back(name);
  return (std::filesystem::path(out_dir) / name).string();
}

// --------------------------------------------------------------- commands

int cmd_rates(RunContext& ctx) {
  const ScanSpec scan = scan_from(ctx.config, Engine::kAnalytic);
  struct Row {
    std::vector<Cell> cells;
    bool failed = false;
  };
  std::vector<std::pair<double, Trajectory>> jobs;
  for (double v : scan.values)
    for (Trajectory t : scan.trajectories) jobs.emplace_back(v, t);
  std::vector<Row> rows(jobs.size());
  ParallelOptions par{ctx.workers};
  parallel_for(jobs.size(), par, [&](std::size_t i) {
    const auto [value, traj] = jobs[i];
    std::vector<std::string> flags;
    const ScanPoint pt = scan_point(scan, value, traj);
    std::vector<Cell> cells = point_cells(scan, value, pt);
    std::optional<InstabilityResult> res;
    std::optional<CuspData> cusp;
    std::optional<double> k0c;
    try {
      res = gamma_and_qmum(pt.drive, pt.lattice, pt.drive.omega);
      cusp = omega_c(pt.drive, pt.lattice);
    } catch (const Error& e) {
      flags.push_back(error_flag(e));
    }
    try {
      k0c = k0_critical(pt.drive.omega, pt.lattice.interaction);
    } catch (const Error& e) {
      flags.push_back(error_flag(e));
    }
    cells.push_back(res ? Cell(std::string(to_string(res->regime))) : Cell(std::monostate{}));
    for (int m = 0; m < 2; ++m) {
      if (res && static_cast<std::size_t>(m) < res->q_mum.size()) {
        const Momentum& q = res->q_mum[static_cast<std::size_t>(m)];
        cells.push_back(q.qx);
        cells.push_back(q.qy);
      } else {
        cells.push_back(std::monostate{});
        cells.push_back(std::monostate{});
      }
    }
    cells.push_back(res ? Cell(static_cast<long long>(res->multiplicity)) : Cell(std::monostate{}));
    cells.push_back(res ? Cell(res->gamma) : Cell(std::monostate{}));
    cells.push_back(res ? Cell(res->gamma_mum) : Cell(std::monostate{}));
    cells.push_back(res ? Cell(res->gamma_mum - pt.lattice.background_rate) : Cell(std::monostate{}));
    cells.push_back(cusp ? Cell(hz(cusp->omega_c)) : Cell(std::monostate{}));
    cells.push_back(cusp ? Cell(cusp->omega_c) : Cell(std::monostate{}));
    cells.push_back(cusp ? Cell(hz(cusp->bandwidth)) : Cell(std::monostate{}));
    cells.push_back(opt(k0c));
    cells.push_back(flag_cell(flags));
    rows[i] = Row{std::move(cells), !res};
  });
  auto out = open_out(ctx.output_path("rates.csv"));
  auto header = kPointHeader;
  for (const char* h : {"regime", "q1x", "q1y", "q2x", "q2y", "multiplicity", "gamma_per_s", "Gamma_mum_per_s",
                        "Gamma_mum_minus_gamma0_per_s", "omega_c_hz", "omega_c_rad_s", "bandwidth_hz",
                        "k0_critical", "flag"})
    header.emplace_back(h);
  CsvWriter w(out, header);
  bool any_ok = false;
  for (const auto& r : rows) {
    w.row(r.cells);
    any_ok = any_ok || !r.failed;
  }
  return any_ok ? 0 : 3;
}

int cmd_k0c(RunContext& ctx) {
  const Config& cfg = ctx.config;
  auto omegas = read_values(cfg, "k0c");
  require_monotone(omegas, "k0c");
  const LatticeParams lattice = lattice_from(cfg);
  auto out = open_out(ctx.output_path("k0c.csv"));
  CsvWriter w(out, {"omega_hz", "omega_rad_s", "g_hz", "g_over_omega", "k0_critical", "k0_critical_asymptote",
                    "flag"});
  for (double f : omegas) {
    const double omega = hz_to_rad_s(f);
    std::vector<std::string> flags;
    std::optional<double> k0c;
    try {
      k0c = k0_critical(omega, lattice.interaction);
    } catch (const Error& e) {
      flags.push_back(error_flag(e));
    }
    w.row({f, omega, hz(lattice.interaction), lattice.interaction / omega, opt(k0c), j0_first_zero(),
           flag_cell(flags)});
  }
  return 0;
}

int cmd_bdg(RunContext& ctx) {
  const ScanSpec scan = scan_from(ctx.config, Engine::kBdg);
  const BdgRunConfig bdg = bdg_config_from(ctx.config, ctx.workers);
  const bool write_modes = ctx.config.get_bool("bdg.write_modes", false);

  auto out = open_out(ctx.output_path("bdg.csv"));
  auto header = kPointHeader;
  for (const char* h : {"rate_bdg_per_s", "rate_analytic_per_s", "ratio", "qmax_x", "qmax_y", "qmax_z",
                        "fit_t_start_s", "fit_t_end_s", "flag"})
    header.emplace_back(h);
  CsvWriter w(out, header);
  std::ofstream modes_out;
  std::optional<CsvWriter> modes;
  if (write_modes) {
    modes_out = open_out(ctx.output_path("bdg_modes.csv"));
    modes.emplace(modes_out, std::vector<std::string>{"scan_value", "trajectory", "qx", "qy", "qz",
                                                      "rate_per_s", "stable"});
  }

  std::size_t failures = 0, points = 0;
  for (double value : scan.values) {
    for (Trajectory traj : scan.trajectories) {
      ++points;
      const ScanPoint pt = scan_point(scan, value, traj);
      std::vector<Cell> cells = point_cells(scan, value, pt);
      std::vector<std::string> flags;
      std::optional<GridScanResult> res;
      std::optional<double> analytic;
      try {
        res = grid_instability_scan(pt.drive, pt.lattice, bdg);
      } catch (const Error& e) {
        flags.push_back(error_flag(e));
        ++failures;
      }
      try {
        // n_q grows at twice the amplitude rate.
        analytic = pt.drive.amplitude > 0.0 ? 2.0 * gamma_and_qmum(pt.drive, pt.lattice, pt.drive.omega).gamma : 0.0;
      } catch (const Error& e) {
        flags.push_back(error_flag(e));
      }
      const double period = pt.drive.period();
      cells.push_back(res ? Cell(res->rate) : Cell(std::monostate{}));
      cells.push_back(opt(analytic));
      cells.push_back(res && analytic && *analytic > 0.0 ? Cell(res->rate / *analytic) : Cell(std::monostate{}));
      cells.push_back(res ? Cell(res->q_max.qx) : Cell(std::monostate{}));
      cells.push_back(res ? Cell(res->q_max.qy) : Cell(std::monostate{}));
      cells.push_back(res ? Cell(res->q_max.qz) : Cell(std::monostate{}));
      cells.push_back((bdg.n_cycles - bdg.fit_window_cycles) * period);
      cells.push_back(bdg.n_cycles * period);
      cells.push_back(flag_cell(flags));
      w.row(cells);
      if (modes && res) {
        for (const auto& m : res->modes) {
          modes->row({value, std::string(to_string(traj)), m.q.qx, m.q.qy, m.q.qz, m.rate,
                      static_cast<long long>(m.stable)});
        }
      }
    }
  }
  return failures == points ? 3 : 0;
}

namespace {

void write_trace(const std::string& path, const EnsembleResult& r, double period,
                 const std::vector<double>* bdg_prediction) {
  auto out = open_out(path);
  std::vector<std::string> header = {"t_s", "t_periods", "n_ex", "n_ex_band", "n_ex_raw", "condensed_fraction",
                                     "condensed_fraction_band", "total_number"};
  if (bdg_prediction) header.emplace_back("n_ex_bdg");
  CsvWriter w(out, header);
  const auto& m = r.mean;
  for (std::size_t i = 0; i < m.times.size(); ++i) {
    std::vector<Cell> cells = {m.times[i], std::round(m.times[i] / period), m.n_ex[i],
                               r.bands_defined ? Cell(r.n_ex_band[i]) : Cell(std::monostate{}), m.n_ex_raw[i],
                               m.condensed_fraction[i],
                               r.bands_defined ? Cell(r.condensed_fraction_band[i]) : Cell(std::monostate{}),
                               m.total_number[i]};
    if (bdg_prediction) {
      cells.push_back(i < bdg_prediction->size() ? Cell((*bdg_prediction)[i]) : Cell(std::monostate{}));
    }
    w.row(cells);
  }
}

const std::vector<std::string> kRateHeader = {"short_rate_per_s", "short_stderr_per_s", "short_valid",
                                              "short_region_end_s", "long_rate_per_s", "long_stderr_per_s",
                                              "long_t_start_s", "long_t_end_s", "long_points"};

void append_rates(std::vector<Cell>& cells, const TwaPointResult& r) {
  cells.push_back(r.rates.short_valid ? Cell(r.rates.short_time.rate) : Cell(std::monostate{}));
  cells.push_back(opt(r.short_stderr));
  cells.push_back(static_cast<long long>(r.rates.short_valid));
  cells.push_back(r.rates.short_region_end);
  cells.push_back(r.rates.long_time.rate);
  cells.push_back(opt(r.long_stderr));
  cells.push_back(r.rates.long_time.t_start);
  cells.push_back(r.rates.long_time.t_end);
  cells.push_back(static_cast<long long>(r.rates.long_time.n_points));
}

int twa_gscan(RunContext& ctx) {
  const ScanSpec scan = scan_from(ctx.config, Engine::kTwa);
  if (scan.variable != ScanVariable::kG) {
    throw Error(ErrorCode::kConfig, "TWA scans support only scan.variable = G");
  }
  const TwaRunConfig run = twa_config_from(ctx.config);
  const EnsembleConfig ens = ensemble_from(ctx.config, ctx.seed, ctx.workers);
  const TwaRateOptions options = twa_rate_options_from(ctx.config);

  auto out = open_out(ctx.output_path("twa_gscan.csv"));
  auto header = kPointHeader;
  header.insert(header.end(), kRateHeader.begin(), kRateHeader.end());
  header.emplace_back("flag");
  CsvWriter w(out, header);
  std::size_t failures = 0, points = 0;
  std::vector<double> log_g, log_rate;
  for (double value : scan.values) {
    for (Trajectory traj : scan.trajectories) {
      ++points;
      const ScanPoint pt = scan_point(scan, value, traj);
      std::vector<Cell> cells = point_cells(scan, value, pt);
      try {
        const EnsembleResult r = ensemble_run(ens, pt.drive, pt.lattice, run);
        const TwaPointResult a = analyse_twa(r, pt.lattice.density, pt.drive.period(), options, ens);
        append_rates(cells, a);
        cells.push_back(flag_cell(a.flags));
        if (a.rates.long_time.rate > 0.0 && scan.trajectories.size() == 1) {
          log_g.push_back(std::log(pt.lattice.interaction));
          log_rate.push_back(std::log(a.rates.long_time.rate));
        }
      } catch (const Error& e) {
        ++failures;
        cells.resize(kPointHeader.size() + kRateHeader.size(), std::monostate{});
        cells.push_back(error_flag(e));
        std::cerr << "twa point " << value << ": " << e.what() << '\n';
      }
      w.row(cells);
    }
  }
  auto fit_out = open_out(ctx.output_path("twa_gscan_fit.csv"));
  CsvWriter fw(fit_out, {"quantity", "loglog_slope", "loglog_slope_stderr", "points", "flag"});
  if (log_g.size() >= 2) {
    const LineFit f = fit_line(log_g, log_rate);
    fw.row({std::string("long_rate_vs_g"), f.slope, f.stderr_slope, static_cast<long long>(f.n),
            std::string("ok")});
  } else {
    fw.row({std::string("long_rate_vs_g"), std::monostate{}, std::monostate{},
            static_cast<long long>(log_g.size()), std::string("insufficient_points")});
  }
  return failures == points ? 3 : 0;
}

}  // namespace

int cmd_twa(RunContext& ctx) {
  if (ctx.config.has("scan.variable")) return twa_gscan(ctx);
  const Config& cfg = ctx.config;
  const LatticeParams lattice = lattice_from(cfg);
  const DriveSpec drive = drive_from(cfg);
  const TwaRunConfig run = twa_config_from(cfg);
  const EnsembleConfig ens = ensemble_from(cfg, ctx.seed, ctx.workers);
  const TwaRateOptions options = twa_rate_options_from(cfg);
  const bool compare_bdg = cfg.get_bool("twa.compare_bdg", false);
  const bool checkpoint = cfg.get_bool("twa.checkpoint", false);

  const EnsembleResult r = ensemble_run(ens, drive, lattice, run);
  std::vector<double> bdg_prediction;
  if (compare_bdg) {
    BdgRunConfig b;
    b.grid = run.grid;
    b.steps_per_period = run.steps_per_period;
    b.n_cycles = static_cast<int>(r.mean.times.size()) - 1;
    b.fit_window_cycles = std::min(b.n_cycles, 1);
    b.use_envelope = true;
    b.norm_tolerance = 1e300;  // growing modes are not checked here
    b.parallel.workers = ctx.workers;
    bdg_prediction = summed_occupation(drive, lattice, b);
  }
  write_trace(ctx.output_path("twa_trace.csv"), r, drive.period(), compare_bdg ? &bdg_prediction : nullptr);

  auto out = open_out(ctx.output_path("twa_rates.csv"));
  std::vector<std::string> header = {"n0", "realizations", "trajectory", "k0", "omega_hz", "omega_rad_s",
                                     "j_hz", "g_hz"};
  header.insert(header.end(), kRateHeader.begin(), kRateHeader.end());
  header.emplace_back("flag");
  CsvWriter w(out, header);
  std::vector<Cell> cells = {lattice.density, static_cast<long long>(ens.n_realizations),
                             std::string(to_string(drive.trajectory)), drive.amplitude, hz(drive.omega),
                             drive.omega, hz(lattice.hopping), hz(lattice.interaction)};
  int code = 0;
  try {
    const TwaPointResult a = analyse_twa(r, lattice.density, drive.period(), options, ens);
    append_rates(cells, a);
    cells.push_back(flag_cell(a.flags));
  } catch (const Error& e) {
    // The trace stands on its own; a failed rate fit is reported, not fatal.
    cells.resize(header.size() - 1, std::monostate{});
    cells.push_back(error_flag(e));
  }
  w.row(cells);

  if (checkpoint) {
    const FieldState initial = sample_initial(run.grid, lattice, drive, run.q0, ens.master_seed, 0, run.sample);
    FieldState final_state;
    run_trajectory(initial, drive, lattice, run, &final_state);
    write_checkpoint_file(ctx.output_path("twa_final_r0.ckpt"), final_state);
  }
  return code;
}

int cmd_endphase(RunContext& ctx) {
  const Config& cfg = ctx.config;
  const LatticeParams lattice = lattice_from(cfg);
  const DriveSpec base = drive_from(cfg);
  TwaRunConfig run = twa_config_from(cfg);
  run.post_stop_periods = static_cast<int>(cfg.get_int("endphase.post_stop_periods", 10));
  const EnsembleConfig ens = ensemble_from(cfg, ctx.seed, ctx.workers);
  auto phases = cfg.get_doubles("endphase.phases_rad");
  if (phases.empty()) phases = {0.0, 0.25 * kPi, 0.5 * kPi, 0.75 * kPi};
  const int ramp_down = static_cast<int>(cfg.get_int("endphase.ramp_down_periods", 2));
  if (ramp_down < 1) throw Error(ErrorCode::kConfig, "endphase.ramp_down_periods must be >= 1");

  struct Variant {
    std::string kind;
    DriveSpec drive;
  };
  std::vector<Variant> variants;
  for (double phase : phases) {
    DriveSpec d = base;
    d.envelope.abrupt_stop = true;
    d.envelope.ramp_down_periods = 0;
    d.envelope.end_phase = phase;
    try {
      d.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, e.what());
    }
    variants.push_back({"abrupt", d});
  }
  DriveSpec ramped = base;
  ramped.envelope.abrupt_stop = false;
  ramped.envelope.ramp_down_periods = ramp_down;
  variants.push_back({"ramped", ramped});

  auto out = open_out(ctx.output_path("endphase.csv"));
  CsvWriter w(out, {"variant", "end_phase_rad", "stop_time_s", "post_stop_time_s", "n_ex_post", "n_ex_post_band",
                    "condensed_fraction_post", "flag"});
  std::size_t failures = 0;
  for (const auto& v : variants) {
    const bool abrupt = v.kind == "abrupt";
    // Every variant shares the master seed, so phases see the same noise.
    try {
      const EnsembleResult r = ensemble_run(ens, v.drive, lattice, run);
      const std::size_t last = r.mean.times.size() - 1;
      w.row({v.kind, abrupt ? Cell(v.drive.envelope.end_phase) : Cell(std::monostate{}),
             abrupt ? v.drive.stop_time(run.steps_per_period) : v.drive.end_time(), r.mean.times[last],
             r.mean.n_ex[last], r.bands_defined ? Cell(r.n_ex_band[last]) : Cell(std::monostate{}),
             r.mean.condensed_fraction[last], std::string("ok")});
    } catch (const Error& e) {
      ++failures;
      w.row({v.kind, abrupt ? Cell(v.drive.envelope.end_phase) : Cell(std::monostate{}), std::monostate{},
             std::monostate{}, std::monostate{}, std::monostate{}, std::monostate{}, error_flag(e)});
    }
  }
  return failures == variants.size() ? 3 : 0;
}

int cmd_fit(RunContext& ctx) {
  const Config& cfg = ctx.config;
  const std::string input = ctx.input.empty() ? cfg.get_string("fit.input", "") : ctx.input;
  if (input.empty()) throw Error(ErrorCode::kConfig, "fit: no input file (positional argument or fit.input)");
  const CsvTable table = read_csv_file(input);
  if (table.header.size() < 2) throw Error(ErrorCode::kParse, input + ": need at least two columns");

  auto column = [&](const std::string& key, std::size_t fallback) {
    const std::string name = cfg.get_string(key, "");
    return name.empty() ? fallback : table.column(name);
  };
  std::size_t t_default = 0;
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (table.header[i] == "t_s") t_default = i;
  const std::size_t tc = column("fit.t_column", t_default);
  const std::size_t yc = column("fit.y_column", tc == 0 ? 1 : 0);

  DecayTrace trace;
  trace.t = table.numbers(tc);
  trace.y = table.numbers(yc);
  const std::string kind = cfg.get_string("fit.kind", "condensed_fraction");
  if (kind == "condensed_fraction") {
    trace.kind = TraceKind::kCondensedFraction;
  } else if (kind == "mode_occupation") {
    trace.kind = TraceKind::kModeOccupation;
  } else {
    throw Error(ErrorCode::kConfig, "fit.kind must be condensed_fraction or mode_occupation");
  }
  for (std::size_t i = 1; i < trace.t.size(); ++i) {
    if (!(trace.t[i] > trace.t[i - 1])) {
      throw Error(ErrorCode::kParse, input + " line " + std::to_string(table.line_numbers[i]) +
                                         ": times must be strictly increasing");
    }
  }
  for (std::size_t i = 0; i < trace.y.size(); ++i) {
    if (trace.y[i] < 0.0) {
      throw Error(ErrorCode::kParse, input + " line " + std::to_string(table.line_numbers[i]) +
                                         ": negative value");
    }
  }

  const std::string method = cfg.get_string("fit.method", "auto");
  FitResult f;
  if (method == "auto") {
    f = fit_decay(trace, cfg.get_double("fit.r2_threshold", 0.9));
  } else if (method == "exponential") {
    f = fit_exponential(trace);
  } else if (method == "linear") {
    f = fit_linear_fallback(trace);
  } else if (method == "windowed") {
    f = windowed_log_slope(trace, static_cast<int>(cfg.get_int("fit.window_cycles", 5)),
                           cfg.require_double("fit.period_s"));
  } else {
    throw Error(ErrorCode::kConfig, "fit.method must be auto, exponential, linear or windowed");
  }
  auto out = open_out(ctx.output_path("fit.csv"));
  CsvWriter w(out, {"input", "t_column", "y_column", "method", "amplitude", "rate_per_s", "stderr_rate_per_s",
                    "r_squared", "t_start_s", "t_end_s", "n_points", "stable", "sign_warning"});
  w.row({input, table.header[tc], table.header[yc], std::string(to_string(f.method)), f.amplitude, f.rate,
         f.stderr_rate, f.r_squared, f.t_start, f.t_end, static_cast<long long>(f.n_points),
         static_cast<long long>(f.stable), static_cast<long long>(f.sign_warning)});
  return 0;
}

}  // namespace fbdg::harness
