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

#include "fbdg/bdg.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <tuple>

#include "fbdg/error.hpp"
#include "fbdg/fitting.hpp"

namespace fbdg {

namespace {

constexpr double kPi = std::numbers::pi;

// Per-mode constants of eps(+-q, A) = sum_d (a_d cos A_d -+ b_d sin A_d) + e_z
// with a_d = 4J sin^2(q_d/2) and b_d = 4J sin(q_d/2) cos(q_d/2).
struct ModeCoefficients {
  double ax, bx, ay, by, ez, g;

  ModeCoefficients(const Momentum& q, const LatticeParams& p) {
    const double sx = std::sin(0.5 * q.qx);
    const double sy = std::sin(0.5 * q.qy);
    const double four_j = 4.0 * p.hopping;
    ax = four_j * sx * sx;
    bx = four_j * sx * std::cos(0.5 * q.qx);
    ay = four_j * sy * sy;
    by = four_j * sy * std::cos(0.5 * q.qy);
    ez = p.transverse_energy(q.qz);
    g = p.interaction;
  }

  // Diagonal entries eps(q) + g and eps(-q) + g.
  std::pair<double, double> diagonal(const DriveTable::Node& n) const {
    const double even = ax * n.cx + ay * n.cy + ez + g;
    const double odd = bx * n.sx + by * n.sy;
    return {even - odd, even + odd};
  }
};

// d/dt (u, v) = -i M (u, v), M = [[d1, g], [-g, -d2]].
inline void rhs(const ModeCoefficients& m, const DriveTable::Node& n, Complex u, Complex v, Complex& du,
                Complex& dv) {
  const auto [d1, d2] = m.diagonal(n);
  const Complex a = d1 * u + m.g * v;
  const Complex b = -m.g * u - d2 * v;
  du = Complex(a.imag(), -a.real());
  dv = Complex(b.imag(), -b.real());
}

void rk4_step(const ModeCoefficients& m, const DriveTable::Node* nodes, double dt, Complex& u, Complex& v) {
  Complex k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
  const double h = 0.5 * dt;
  rhs(m, nodes[0], u, v, k1u, k1v);
  rhs(m, nodes[1], u + h * k1u, v + h * k1v, k2u, k2v);
  rhs(m, nodes[1], u + h * k2u, v + h * k2v, k3u, k3v);
  rhs(m, nodes[2], u + dt * k3u, v + dt * k3v, k4u, k4v);
  u += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
  v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

// Fourth-order Magnus step with Gauss-Legendre nodes and the exact 2x2
// exponential. The propagator stays in U(1) x SU(1,1) so |u|^2 - |v|^2 is
// preserved up to rounding.
void magnus_step(const ModeCoefficients& m, const DriveTable::Node* nodes, double dt, Complex& u, Complex& v) {
  const auto [a1, b1] = m.diagonal(nodes[0]);
  const auto [a2, b2] = m.diagonal(nodes[1]);
  const double g = m.g;
  // Omega = -i dt/2 (M1 + M2) + (sqrt3/12) dt^2 [A2, A1] with A = -i M,
  // [A2, A1] = -[M2, M1].
  const double c = std::sqrt(3.0) / 12.0 * dt * dt;
  // [M2, M1] for M = [[a, g], [-g, -b]]: off-diagonal entries only.
  const double comm01 = g * ((a2 + b2) - (a1 + b1));
  const double comm10 = g * ((a2 + b2) - (a1 + b1));
  const Complex o00(0.0, -0.5 * dt * (a1 + a2));
  const Complex o11(0.0, 0.5 * dt * (b1 + b2));
  const Complex o01 = Complex(0.0, -dt * g) - c * comm01;
  const Complex o10 = Complex(0.0, dt * g) - c * comm10;
  const Complex trace_half = 0.5 * (o00 + o11);
  const Complex x00 = o00 - trace_half;
  const Complex lambda_sq = x00 * x00 + o01 * o10;
  const Complex lambda = std::sqrt(lambda_sq);
  Complex ch;
  Complex sh_over;
  if (std::abs(lambda) < 1e-8) {
    ch = 1.0 + 0.5 * lambda_sq;
    sh_over = 1.0 + lambda_sq / 6.0;
  } else {
    ch = std::cosh(lambda);
    sh_over = std::sinh(lambda) / lambda;
  }
  const Complex phase = std::exp(trace_half);
  const Complex e00 = phase * (ch + sh_over * x00);
  const Complex e11 = phase * (ch - sh_over * x00);
  const Complex e01 = phase * sh_over * o01;
  const Complex e10 = phase * sh_over * o10;
  const Complex nu = e00 * u + e01 * v;
  const Complex nv = e10 * u + e11 * v;
  u = nu;
  v = nv;
}

DriveTable::Node make_node(const DriveSpec& drive, double t, bool use_envelope) {
  const GaugeShift a = gauge_shift(drive, t, use_envelope);
  return {std::cos(a.x), std::sin(a.x), std::cos(a.y), std::sin(a.y)};
}

bool momentum_less(const Momentum& a, const Momentum& b) {
  return std::tie(a.qx, a.qy, a.qz) < std::tie(b.qx, b.qy, b.qz);
}

}  // namespace

void GridDims::validate() const {
  if (nx < 1 || ny < 1 || nz < 1) throw Error(ErrorCode::kGrid, "grid dimensions must be >= 1");
  if (lz < 0.0 || !std::isfinite(lz)) throw Error(ErrorCode::kGrid, "transverse box length must be positive (0 selects nz)");
}

double lattice_momentum(int k, int n) {
  // Indices above n/2 fold to negative momenta; k = n/2 maps to +pi.
  const int folded = k > n / 2 ? k - n : k;
  return 2.0 * kPi * folded / n;
}

double transverse_momentum(int k, int n, double lz) {
  const int folded = k > n / 2 ? k - n : k;
  return 2.0 * kPi * folded / lz;
}

std::vector<Momentum> momentum_grid(const GridDims& grid) {
  grid.validate();
  std::vector<Momentum> out;
  out.reserve(grid.volume());
  const double lz = grid.box_length_z();
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      for (int k = 0; k < grid.nz; ++k) {
        out.push_back({lattice_momentum(i, grid.nx), lattice_momentum(j, grid.ny),
                       transverse_momentum(k, grid.nz, lz)});
      }
    }
  }
  return out;
}

BdgStepper parse_stepper(std::string_view text) {
  if (text == "rk4") return BdgStepper::kRk4;
  if (text == "magnus4" || text == "magnus") return BdgStepper::kMagnus4;
  throw Error(ErrorCode::kConfig, "unknown BdG stepper '" + std::string(text) + "'");
}

std::string_view to_string(BdgStepper stepper) {
  return stepper == BdgStepper::kRk4 ? "rk4" : "magnus4";
}

void BdgRunConfig::validate() const {
  if (steps_per_period < 64) throw Error(ErrorCode::kDomain, "steps_per_period must be >= 64");
  if (fit_window_cycles < 1) throw Error(ErrorCode::kDomain, "fit_window_cycles must be >= 1");
  if (n_cycles < fit_window_cycles) throw Error(ErrorCode::kDomain, "n_cycles must be >= fit_window_cycles");
  grid.validate();
}

ModePairState init_mode(const Momentum& q, const DriveSpec& drive, const LatticeParams& p) {
  (void)drive;
  const Momentum c = q.canonical();
  if (c.is_zero()) throw Error(ErrorCode::kSingularMode, "q = 0 is the condensate mode");
  const double kinetic = shifted_dispersion(c, GaugeShift{}, p);
  const BogoliubovFrame frame = bog_frame_from_energy(kinetic, p.interaction);
  // cosh^2 theta = (cosh 2theta + 1)/2, sinh^2 theta = (cosh 2theta - 1)/2.
  ModePairState state;
  state.q = c;
  state.u = std::sqrt(0.5 * (frame.cosh2theta + 1.0));
  state.v = -std::sqrt(0.5 * (frame.cosh2theta - 1.0));
  return state;
}

DriveTable::DriveTable(const DriveSpec& drive, const BdgRunConfig& cfg) : stepper_(cfg.stepper) {
  drive.validate();
  cfg.validate();
  dt_ = drive.period() / cfg.steps_per_period;
  steps_ = cfg.steps_per_period * cfg.n_cycles;
  if (stepper_ == BdgStepper::kRk4) {
    // Without an envelope the drive is periodic, but a full table keeps the
    // stepping loop branch free and costs only a few MB.
    nodes_.resize(static_cast<std::size_t>(2 * steps_ + 1));
    for (int j = 0; j <= 2 * steps_; ++j) {
      nodes_[static_cast<std::size_t>(j)] = make_node(drive, 0.5 * dt_ * j, cfg.use_envelope);
    }
  } else {
    const double offset = std::sqrt(3.0) / 6.0;
    nodes_.resize(static_cast<std::size_t>(2 * steps_));
    for (int n = 0; n < steps_; ++n) {
      const double t0 = dt_ * n;
      nodes_[static_cast<std::size_t>(2 * n)] = make_node(drive, t0 + (0.5 - offset) * dt_, cfg.use_envelope);
      nodes_[static_cast<std::size_t>(2 * n + 1)] = make_node(drive, t0 + (0.5 + offset) * dt_, cfg.use_envelope);
    }
  }
}

ModeTrajectory evolve_mode(const ModePairState& state, const DriveSpec& drive, const LatticeParams& p,
                           const BdgRunConfig& cfg) {
  const DriveTable table(drive, cfg);
  return evolve_mode(state, table, p, cfg);
}

ModeTrajectory evolve_mode(const ModePairState& state, const DriveTable& table, const LatticeParams& p,
                           const BdgRunConfig& cfg) {
  const ModeCoefficients m(state.q, p);
  ModeTrajectory out;
  out.q = state.q;
  Complex u = state.u;
  Complex v = state.v;
  const double dt = table.dt();
  const double period = dt * cfg.steps_per_period;
  out.times.reserve(static_cast<std::size_t>(cfg.n_cycles) + 1);
  out.occupations.reserve(static_cast<std::size_t>(cfg.n_cycles) + 1);
  out.times.push_back(state.t);
  out.occupations.push_back(std::norm(v));
  const auto& nodes = table.nodes();
  const bool rk4 = table.stepper() == BdgStepper::kRk4;
  for (int cycle = 0; cycle < cfg.n_cycles; ++cycle) {
    for (int s = 0; s < cfg.steps_per_period; ++s) {
      const int n = cycle * cfg.steps_per_period + s;
      if (rk4) {
        rk4_step(m, &nodes[static_cast<std::size_t>(2 * n)], dt, u, v);
      } else {
        magnus_step(m, &nodes[static_cast<std::size_t>(2 * n)], dt, u, v);
      }
    }
    const double drift = std::abs(std::norm(u) - std::norm(v) - 1.0);
    out.max_norm_drift = std::max(out.max_norm_drift, drift);
    // Rounding alone leaves a drift of order eps (|u|^2 + |v|^2).
    const double scale = std::norm(u) + std::norm(v);
    if (!(drift <= cfg.norm_tolerance * scale)) {
      throw Error(ErrorCode::kIntegratorTolerance,
                  "symplectic norm drift " + std::to_string(drift) + " after cycle " + std::to_string(cycle + 1) +
                      "; increase steps_per_period");
    }
    out.times.push_back(state.t + (cycle + 1) * period);
    out.occupations.push_back(std::norm(v));
  }
  out.final_state = state;
  out.final_state.u = u;
  out.final_state.v = v;
  out.final_state.t = state.t + cfg.n_cycles * period;
  return out;
}

GridScanResult grid_instability_scan(const DriveSpec& drive, const LatticeParams& p, const BdgRunConfig& cfg) {
  const DriveTable table(drive, cfg);
  std::vector<Momentum> modes;
  for (const auto& q : momentum_grid(cfg.grid)) {
    if (!q.is_zero()) modes.push_back(q);
  }
  GridScanResult result;
  result.modes.resize(modes.size());
  const double period = drive.period();
  parallel_for(modes.size(), cfg.parallel, [&](std::size_t i) {
    const ModeTrajectory traj = evolve_mode(init_mode(modes[i], drive, p), table, p, cfg);
    // Fit |u|^2 + |v|^2 = 1 + 2 n_q: same asymptotic exponent as n_q, but
    // bounded away from zero, so beating of non-growing modes does not
    // masquerade as growth.
    DecayTrace trace{traj.times, traj.occupations, TraceKind::kModeOccupation};
    for (auto& y : trace.y) y = 1.0 + 2.0 * y;
    const FitResult fit = windowed_log_slope(trace, cfg.fit_window_cycles, period);
    ModeRate& slot = result.modes[i];
    slot.q = modes[i];
    slot.stable = fit.stable;
    slot.rate = fit.stable ? 0.0 : fit.rate;
  });
  bool first = true;
  for (const auto& m : result.modes) {
    if (first || m.rate > result.rate || (m.rate == result.rate && momentum_less(m.q, result.q_max))) {
      result.q_max = m.q;
      result.rate = m.rate;
      first = false;
    }
  }
  return result;
}

std::vector<double> summed_occupation(const DriveSpec& drive, const LatticeParams& p, const BdgRunConfig& cfg) {
  const DriveTable table(drive, cfg);
  std::vector<Momentum> modes;
  for (const auto& q : momentum_grid(cfg.grid)) {
    if (!q.is_zero()) modes.push_back(q);
  }
  std::vector<std::vector<double>> per_mode(modes.size());
  parallel_for(modes.size(), cfg.parallel, [&](std::size_t i) {
    per_mode[i] = evolve_mode(init_mode(modes[i], drive, p), table, p, cfg).occupations;
  });
  std::vector<double> total(static_cast<std::size_t>(cfg.n_cycles) + 1, 0.0);
  for (const auto& occ : per_mode) {
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += occ[k];
  }
  const auto volume = static_cast<double>(cfg.grid.volume());
  for (auto& v : total) v /= volume;
  return total;
}

}  // namespace fbdg
