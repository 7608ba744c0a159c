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

#include "fbdg/twa.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fbdg/error.hpp"
#include "fbdg/rng.hpp"

namespace fbdg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kCheckpointVersion = 1;

// FFTW planning is not thread-safe; execution of an existing plan is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t flat_index(const GridDims& grid, int i, int j, int k) {
  return (static_cast<std::size_t>(i) * static_cast<std::size_t>(grid.ny) + static_cast<std::size_t>(j)) *
             static_cast<std::size_t>(grid.nz) +
         static_cast<std::size_t>(k);
}

int grid_index(double q, int n) {
  const double c = wrap_quasimomentum(q);
  for (int k = 0; k < n; ++k) {
    if (std::abs(lattice_momentum(k, n) - c) < 1e-9) return k;
  }
  return -1;
}

std::size_t condensate_index(const GridDims& grid, const Momentum& q0) {
  const int ix = grid_index(q0.qx, grid.nx);
  const int iy = grid_index(q0.qy, grid.ny);
  if (ix < 0 || iy < 0 || q0.qz != 0.0) {
    throw Error(ErrorCode::kGrid, "condensate momentum is not a point of the " + std::to_string(grid.nx) + "x" +
                                      std::to_string(grid.ny) + " grid");
  }
  return flat_index(grid, ix, iy, 0);
}

double sin_half(double q) { return std::sin(0.5 * q); }

}  // namespace

std::string_view to_string(GaugeTag gauge) {
  (void)gauge;
  return "quasimomentum_shift";
}

GaugeTag parse_gauge(std::string_view text) {
  if (text == "quasimomentum_shift") return GaugeTag::kQuasimomentumShift;
  throw Error(ErrorCode::kParse, "unknown gauge tag '" + std::string(text) + "'");
}

double FieldState::total_number() const {
  double n = 0.0;
  for (const auto& a : amplitudes) n += std::norm(a);
  return n;
}

struct GpeIntegrator::Plans {
  fftw_complex* buffer = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  Complex* data() { return reinterpret_cast<Complex*>(buffer); }
};

GpeIntegrator::GpeIntegrator(const GridDims& grid, const DriveSpec& drive, const LatticeParams& p,
                             int steps_per_period)
    : grid_(grid), drive_(drive), params_(p) {
  grid.validate();
  drive.validate();
  p.validate();
  if (steps_per_period < 8) throw Error(ErrorCode::kDomain, "steps_per_period must be >= 8");
  dt_ = drive.period() / steps_per_period;
  stop_time_ = drive.stop_time(steps_per_period);
  hold_end_ = (drive.envelope.ramp_up_periods + drive.envelope.hold_periods) * drive.period();

  const double four_j = 4.0 * p.hopping;
  auto axis = [&](int n, std::vector<double>& a, std::vector<double>& b) {
    a.resize(static_cast<std::size_t>(n));
    b.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const double q = lattice_momentum(k, n);
      a[static_cast<std::size_t>(k)] = four_j * sin_half(q) * sin_half(q);
      b[static_cast<std::size_t>(k)] = four_j * sin_half(q) * std::cos(0.5 * q);
    }
  };
  axis(grid.nx, ax_, bx_);
  axis(grid.ny, ay_, by_);
  ez_.resize(static_cast<std::size_t>(grid.nz));
  for (int k = 0; k < grid.nz; ++k) {
    ez_[static_cast<std::size_t>(k)] = p.transverse_energy(transverse_momentum(k, grid.nz, grid.box_length_z()));
  }
  phase_x_.resize(ax_.size());
  phase_y_.resize(ay_.size());
  phase_z_.resize(ez_.size());

  plans_ = new Plans;
  std::lock_guard lock(fftw_planner_mutex());
  plans_->buffer = fftw_alloc_complex(grid.volume());
  plans_->forward = fftw_plan_dft_3d(grid.nx, grid.ny, grid.nz, plans_->buffer, plans_->buffer, FFTW_FORWARD,
                                     FFTW_ESTIMATE);
  plans_->backward = fftw_plan_dft_3d(grid.nx, grid.ny, grid.nz, plans_->buffer, plans_->buffer, FFTW_BACKWARD,
                                      FFTW_ESTIMATE);
}

GpeIntegrator::~GpeIntegrator() {
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plans_->forward);
  fftw_destroy_plan(plans_->backward);
  fftw_free(plans_->buffer);
  delete plans_;
}

GaugeShift GpeIntegrator::shift_at(double t) const {
  if (drive_.envelope.abrupt_stop && t >= hold_end_) {
    if (t >= stop_time_) return {};
    return gauge_shift(drive_, t, false);
  }
  return gauge_shift(drive_, t, true);
}

void GpeIntegrator::fill_phase(const GaugeShift& a1, double tau1, const GaugeShift& a2, double tau2) {
  const double cx1 = std::cos(a1.x), sx1 = std::sin(a1.x), cy1 = std::cos(a1.y), sy1 = std::sin(a1.y);
  const double cx2 = std::cos(a2.x), sx2 = std::sin(a2.x), cy2 = std::cos(a2.y), sy2 = std::sin(a2.y);
  for (std::size_t i = 0; i < ax_.size(); ++i) {
    const double e = tau1 * (ax_[i] * cx1 - bx_[i] * sx1) + tau2 * (ax_[i] * cx2 - bx_[i] * sx2);
    phase_x_[i] = std::polar(1.0, -e);
  }
  for (std::size_t j = 0; j < ay_.size(); ++j) {
    const double e = tau1 * (ay_[j] * cy1 - by_[j] * sy1) + tau2 * (ay_[j] * cy2 - by_[j] * sy2);
    phase_y_[j] = std::polar(1.0, -e);
  }
  for (std::size_t k = 0; k < ez_.size(); ++k) phase_z_[k] = std::polar(1.0, -(tau1 + tau2) * ez_[k]);
}

void GpeIntegrator::multiply_phase(double scale) {
  Complex* data = plans_->data();
  std::size_t idx = 0;
  for (std::size_t i = 0; i < phase_x_.size(); ++i) {
    for (std::size_t j = 0; j < phase_y_.size(); ++j) {
      const Complex pxy = scale * phase_x_[i] * phase_y_[j];
      for (std::size_t k = 0; k < phase_z_.size(); ++k, ++idx) data[idx] *= pxy * phase_z_[k];
    }
  }
}

void GpeIntegrator::nonlinear(double tau) {
  Complex* data = plans_->data();
  const double u = params_.onsite;
  const std::size_t n = grid_.volume();
  for (std::size_t r = 0; r < n; ++r) data[r] *= std::polar(1.0, -u * std::norm(data[r]) * tau);
}

void GpeIntegrator::step(FieldState& state) { advance(state, 1); }

void GpeIntegrator::advance(FieldState& state, long n_steps) {
  if (state.amplitudes.size() != grid_.volume()) throw Error(ErrorCode::kGrid, "field does not match the grid");
  if (n_steps <= 0) return;
  Complex* data = plans_->data();
  std::copy(state.amplitudes.begin(), state.amplitudes.end(), data);
  const double inv_volume = 1.0 / static_cast<double>(grid_.volume());
  const double h = 0.5 * dt_;
  const double t0 = state.t;
  for (long s = 0; s <= n_steps; ++s) {
    // Kinetic half after step s-1 fused with the half before step s.
    const double t_prev = t0 + (s - 1) * dt_ + 0.75 * dt_;
    const double t_next = t0 + s * dt_ + 0.25 * dt_;
    const double tau_prev = s > 0 ? h : 0.0;
    const double tau_next = s < n_steps ? h : 0.0;
    fftw_execute(plans_->forward);
    fill_phase(shift_at(t_prev), tau_prev, shift_at(t_next), tau_next);
    multiply_phase(inv_volume);
    fftw_execute(plans_->backward);
    if (s < n_steps) nonlinear(dt_);
  }
  std::copy(data, data + grid_.volume(), state.amplitudes.begin());
  state.t = t0 + n_steps * dt_;
}

std::vector<Complex> GpeIntegrator::momentum_amplitudes(const FieldState& state) {
  if (state.amplitudes.size() != grid_.volume()) throw Error(ErrorCode::kGrid, "field does not match the grid");
  Complex* data = plans_->data();
  std::copy(state.amplitudes.begin(), state.amplitudes.end(), data);
  fftw_execute(plans_->forward);
  const double scale = 1.0 / std::sqrt(static_cast<double>(grid_.volume()));
  std::vector<Complex> out(data, data + grid_.volume());
  for (auto& a : out) a *= scale;
  return out;
}

double GpeIntegrator::energy(const FieldState& state) {
  const auto ak = momentum_amplitudes(state);
  const GaugeShift a = shift_at(state.t);
  const double cx = std::cos(a.x), sx = std::sin(a.x), cy = std::cos(a.y), sy = std::sin(a.y);
  double kinetic = 0.0;
  std::size_t idx = 0;
  for (std::size_t i = 0; i < ax_.size(); ++i) {
    for (std::size_t j = 0; j < ay_.size(); ++j) {
      const double exy = ax_[i] * cx - bx_[i] * sx + ay_[j] * cy - by_[j] * sy;
      for (std::size_t k = 0; k < ez_.size(); ++k, ++idx) kinetic += (exy + ez_[k]) * std::norm(ak[idx]);
    }
  }
  double interaction = 0.0;
  for (const auto& v : state.amplitudes) interaction += std::norm(v) * std::norm(v);
  return kinetic + 0.5 * params_.onsite * interaction;
}

FieldState sample_initial(const GridDims& grid, const LatticeParams& p, const DriveSpec& drive,
                          const Momentum& q0, std::uint64_t seed, std::uint64_t realization,
                          const SampleOptions& options) {
  grid.validate();
  p.validate();
  const std::size_t c_index = condensate_index(grid, q0);
  const Momentum qc{lattice_momentum(static_cast<int>(c_index / (static_cast<std::size_t>(grid.ny) * grid.nz)), grid.nx),
                    lattice_momentum(static_cast<int>((c_index / static_cast<std::size_t>(grid.nz)) % grid.ny), grid.ny),
                    0.0};
  const bool uniform = qc.is_zero();
  auto band = [&](const Momentum& q) {
    return uniform ? shifted_dispersion(q, GaugeShift{}, p) : eps_eff(q, drive, p);
  };
  const double e0 = band(qc);
  const std::size_t volume = grid.volume();
  const auto momenta = momentum_grid(grid);

  // Momentum-space amplitudes a_k with a_r = V^{-1/2} sum_k a_k e^{i k r}.
  std::vector<Complex> ak(volume, Complex{});
  ak[c_index] = std::sqrt(p.density * static_cast<double>(volume));
  const CounterRng rng(seed, realization);
  // Wigner vacuum: <|gamma|^2> = 1/2, so each quadrature has variance 1/4.
  const double sigma = 0.5 * options.noise_scale;
  if (sigma > 0.0) {
    for (std::size_t m = 0; m < volume; ++m) {
      const Momentum& pm = momenta[m];
      if (pm.is_zero()) continue;
      const Momentum plus{qc.qx + pm.qx, qc.qy + pm.qy, pm.qz};
      const double kinetic = band(plus.canonical()) - e0;
      if (kinetic < -1e-12 * p.hopping) {
        throw Error(ErrorCode::kInvertedBand, "condensate at q0 is not a band minimum of the sampling band");
      }
      const BogoliubovFrame frame = bog_frame_from_energy(std::max(kinetic, 0.0), p.interaction);
      const double u = std::sqrt(0.5 * (frame.cosh2theta + 1.0));
      const double v = -std::sqrt(0.5 * (frame.cosh2theta - 1.0));
      const Complex gamma(sigma * rng.normal(2 * m), sigma * rng.normal(2 * m + 1));
      // Mode p puts u gamma at q0 + p and conj(v gamma) at q0 - p.
      auto index_of = [&](const Momentum& q) {
        const int ix = grid_index(q.qx, grid.nx);
        const int iy = grid_index(q.qy, grid.ny);
        int iz = static_cast<int>(std::lround(q.qz * grid.box_length_z() / (2.0 * kPi)));
        iz = ((iz % grid.nz) + grid.nz) % grid.nz;
        return flat_index(grid, ix, iy, iz);
      };
      ak[index_of(plus)] += u * gamma;
      ak[index_of(Momentum{qc.qx - pm.qx, qc.qy - pm.qy, -pm.qz})] += v * std::conj(gamma);
    }
  }

  FieldState state;
  state.grid = grid;
  state.seed = seed;
  state.realization = realization;
  state.amplitudes.assign(volume, Complex{});
  const double scale = 1.0 / std::sqrt(static_cast<double>(volume));
  {
    fftw_complex* buf = nullptr;
    fftw_plan plan = nullptr;
    {
      std::lock_guard lock(fftw_planner_mutex());
      buf = fftw_alloc_complex(volume);
      plan = fftw_plan_dft_3d(grid.nx, grid.ny, grid.nz, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    auto* data = reinterpret_cast<Complex*>(buf);
    std::copy(ak.begin(), ak.end(), data);
    fftw_execute(plan);
    for (std::size_t r = 0; r < volume; ++r) state.amplitudes[r] = scale * data[r];
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(buf);
  }
  return state;
}

void TwaRunConfig::validate() const {
  grid.validate();
  if (steps_per_period < 8) throw Error(ErrorCode::kDomain, "steps_per_period must be >= 8");
  if (post_stop_periods < 0) throw Error(ErrorCode::kDomain, "post_stop_periods must be >= 0");
  if (!(sample.noise_scale >= 0.0)) throw Error(ErrorCode::kDomain, "noise_scale must be >= 0");
  if (!(stop_depletion >= 0.0)) throw Error(ErrorCode::kDomain, "stop_depletion must be >= 0");
}

namespace {

void record(ObservableTrace& trace, const FieldState& state, GpeIntegrator& integrator, std::size_t c_index,
            double noise_scale) {
  const auto ak = integrator.momentum_amplitudes(state);
  double total = 0.0;
  for (const auto& a : ak) total += std::norm(a);
  const double volume = static_cast<double>(ak.size());
  const double condensate = std::norm(ak[c_index]);
  if (!std::isfinite(total)) {
    throw Error(ErrorCode::kBlowUp, "non-finite field at t = " + std::to_string(state.t) + " (realization " +
                                        std::to_string(state.realization) + ")");
  }
  const double raw = (total - condensate) / volume;
  const double half_quantum = 0.5 * noise_scale * noise_scale * (volume - 1.0) / volume;
  trace.times.push_back(state.t);
  trace.n_ex_raw.push_back(raw);
  trace.n_ex.push_back(raw - half_quantum);
  trace.condensed_fraction.push_back(total > 0.0 ? condensate / total : 0.0);
  trace.total_number.push_back(total);
}

}  // namespace

ObservableTrace run_trajectory(const FieldState& initial, const DriveSpec& drive, const LatticeParams& p,
                               const TwaRunConfig& cfg, FieldState* final_state) {
  cfg.validate();
  if (initial.grid.nx != cfg.grid.nx || initial.grid.ny != cfg.grid.ny || initial.grid.nz != cfg.grid.nz) {
    throw Error(ErrorCode::kGrid, "initial field grid differs from the run grid");
  }
  GpeIntegrator integrator(cfg.grid, drive, p, cfg.steps_per_period);
  const std::size_t c_index = condensate_index(cfg.grid, cfg.q0);
  const double period = drive.period();
  const long drive_periods = static_cast<long>(std::ceil(drive.end_time() / period - 1e-9));
  const long total_periods = std::max(drive_periods, 0L) + cfg.post_stop_periods;

  FieldState state = initial;
  ObservableTrace trace;
  trace.realization = initial.realization;
  record(trace, state, integrator, c_index, cfg.sample.noise_scale);
  for (long k = 0; k < total_periods; ++k) {
    integrator.advance(state, cfg.steps_per_period);
    // Re-anchor to the period grid so rounding in t does not accumulate.
    state.t = initial.t + (k + 1) * period;
    record(trace, state, integrator, c_index, cfg.sample.noise_scale);
    if (cfg.stop_depletion > 0.0 && trace.n_ex.back() >= cfg.stop_depletion * p.density) break;
  }
  if (final_state != nullptr) *final_state = std::move(state);
  return trace;
}

void EnsembleConfig::validate() const {
  if (n_realizations < 1) throw Error(ErrorCode::kDomain, "n_realizations must be >= 1");
  if (bootstrap_resamples < 1) throw Error(ErrorCode::kDomain, "bootstrap_resamples must be >= 1");
}

EnsembleResult ensemble_run(const EnsembleConfig& ensemble, const DriveSpec& drive, const LatticeParams& p,
                            const TwaRunConfig& cfg) {
  ensemble.validate();
  cfg.validate();
  EnsembleResult result;
  const auto n = static_cast<std::size_t>(ensemble.n_realizations);
  result.realizations.resize(n);
  parallel_for(n, ensemble.parallel, [&](std::size_t k) {
    const FieldState initial = sample_initial(cfg.grid, p, drive, cfg.q0, ensemble.master_seed, k, cfg.sample);
    result.realizations[k] = run_trajectory(initial, drive, p, cfg);
  });

  std::size_t points = result.realizations.front().times.size();
  for (const auto& r : result.realizations) points = std::min(points, r.times.size());
  ObservableTrace& mean = result.mean;
  mean.times.assign(result.realizations.front().times.begin(),
                    result.realizations.front().times.begin() + static_cast<std::ptrdiff_t>(points));
  mean.n_ex_raw.assign(points, 0.0);
  mean.n_ex.assign(points, 0.0);
  mean.condensed_fraction.assign(points, 0.0);
  mean.total_number.assign(points, 0.0);
  for (const auto& r : result.realizations) {
    for (std::size_t i = 0; i < points; ++i) {
      mean.n_ex_raw[i] += r.n_ex_raw[i];
      mean.n_ex[i] += r.n_ex[i];
      mean.condensed_fraction[i] += r.condensed_fraction[i];
      mean.total_number[i] += r.total_number[i];
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < points; ++i) {
    mean.n_ex_raw[i] *= inv;
    mean.n_ex[i] *= inv;
    mean.condensed_fraction[i] *= inv;
    mean.total_number[i] *= inv;
  }

  result.n_ex_band.assign(points, 0.0);
  result.condensed_fraction_band.assign(points, 0.0);
  result.bands_defined = n >= 2;
  if (!result.bands_defined) return result;
  // Bootstrap: standard deviation over resampled ensemble means.
  const auto resamples = static_cast<std::size_t>(ensemble.bootstrap_resamples);
  std::vector<double> sum_ex(points, 0.0), sum_ex2(points, 0.0), sum_cf(points, 0.0), sum_cf2(points, 0.0);
  std::vector<double> ex(points), cf(points);
  for (std::size_t b = 0; b < resamples; ++b) {
    const CounterRng rng(ensemble.master_seed ^ 0xb005'7ea9'0000'0000ULL, b);
    std::fill(ex.begin(), ex.end(), 0.0);
    std::fill(cf.begin(), cf.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& r = result.realizations[rng.index(i, n)];
      for (std::size_t t = 0; t < points; ++t) {
        ex[t] += r.n_ex[t];
        cf[t] += r.condensed_fraction[t];
      }
    }
    for (std::size_t t = 0; t < points; ++t) {
      ex[t] *= inv;
      cf[t] *= inv;
      sum_ex[t] += ex[t];
      sum_ex2[t] += ex[t] * ex[t];
      sum_cf[t] += cf[t];
      sum_cf2[t] += cf[t] * cf[t];
    }
  }
  const double m = static_cast<double>(resamples);
  for (std::size_t t = 0; t < points; ++t) {
    const double vex = sum_ex2[t] / m - (sum_ex[t] / m) * (sum_ex[t] / m);
    const double vcf = sum_cf2[t] / m - (sum_cf[t] / m) * (sum_cf[t] / m);
    result.n_ex_band[t] = std::sqrt(std::max(vex, 0.0));
    result.condensed_fraction_band[t] = std::sqrt(std::max(vcf, 0.0));
  }
  return result;
}

TwaRates twa_rates(const std::vector<double>& times, const std::vector<double>& n_ex, double n0, double period,
                   const TwaRateOptions& options) {
  if (times.size() != n_ex.size() || times.size() < 3) {
    throw Error(ErrorCode::kInsufficientData, "TWA rate extraction needs >= 3 matching samples");
  }
  TwaRates rates;
  std::size_t end = 0;
  while (end + 1 < times.size() && n_ex[end + 1] < options.short_fraction * n0) ++end;
  rates.short_region_end = times[end];
  const auto window = static_cast<std::size_t>(options.short_window_cycles);
  if (end >= window) {
    DecayTrace shortt{{times.begin() + static_cast<long>(end - window), times.begin() + static_cast<long>(end + 1)},
                      {n_ex.begin() + static_cast<long>(end - window), n_ex.begin() + static_cast<long>(end + 1)},
                      TraceKind::kModeOccupation};
    rates.short_time = windowed_log_slope(shortt, options.short_window_cycles, period);
    rates.short_valid = true;
  }

  DecayTrace longt;
  longt.kind = TraceKind::kModeOccupation;
  const double ceiling = (1.0 - options.long_condensate_fraction) * n0;
  for (std::size_t i = end; i < times.size() && n_ex[i] <= ceiling; ++i) {
    longt.t.push_back(times[i]);
    longt.y.push_back(n_ex[i]);
  }
  if (longt.size() < 3) throw Error(ErrorCode::kInsufficientData, "long-time window holds fewer than 3 samples");
  const int long_cycles = static_cast<int>(std::lround((longt.t.back() - longt.t.front()) / period));
  rates.long_time = windowed_log_slope(longt, std::max(long_cycles, 1), period);
  return rates;
}

void write_checkpoint(std::ostream& out, const FieldState& state) {
  out << "fbdg-field " << kCheckpointVersion << '\n';
  out << "grid " << state.grid.nx << ' ' << state.grid.ny << ' ' << state.grid.nz << '\n';
  out.precision(17);
  out << "lz " << state.grid.box_length_z() << '\n';
  out << "t " << state.t << '\n';
  out << "gauge " << to_string(state.gauge) << '\n';
  out << "seed " << state.seed << '\n';
  out << "realization " << state.realization << '\n';
  out << "data " << state.amplitudes.size() << '\n';
  for (const auto& a : state.amplitudes) out << a.real() << ' ' << a.imag() << '\n';
  if (!out) throw Error(ErrorCode::kIo, "checkpoint write failed");
}

FieldState read_checkpoint(std::istream& in) {
  auto expect = [&](const char* key) {
    std::string word;
    if (!(in >> word) || word != key) {
      throw Error(ErrorCode::kParse, std::string("checkpoint: expected '") + key + "'");
    }
  };
  expect("fbdg-field");
  int version = 0;
  if (!(in >> version) || version != kCheckpointVersion) {
    throw Error(ErrorCode::kParse, "checkpoint: unsupported version " + std::to_string(version));
  }
  FieldState state;
  expect("grid");
  in >> state.grid.nx >> state.grid.ny >> state.grid.nz;
  expect("lz");
  in >> state.grid.lz;
  expect("t");
  in >> state.t;
  expect("gauge");
  std::string gauge;
  in >> gauge;
  state.gauge = parse_gauge(gauge);
  expect("seed");
  in >> state.seed;
  expect("realization");
  in >> state.realization;
  expect("data");
  std::size_t count = 0;
  in >> count;
  if (!in) throw Error(ErrorCode::kParse, "checkpoint: malformed header");
  state.grid.validate();
  if (count != state.grid.volume()) throw Error(ErrorCode::kParse, "checkpoint: data count does not match grid");
  state.amplitudes.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    double re = 0.0;
    double im = 0.0;
    if (!(in >> re >> im)) throw Error(ErrorCode::kParse, "checkpoint: truncated data at site " + std::to_string(i));
    state.amplitudes[i] = {re, im};
  }
  return state;
}

void write_checkpoint_file(const std::string& path, const FieldState& state) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path);
  write_checkpoint(out, state);
}

FieldState read_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return read_checkpoint(in);
}

}  // namespace fbdg
