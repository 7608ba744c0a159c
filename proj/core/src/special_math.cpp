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

#include "fbdg/special_math.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "fbdg/error.hpp"

namespace fbdg {

namespace {

constexpr int kMaxOrder = 64;
constexpr double kMaxArgument = 50.0;
constexpr double kSeriesLimit = 12.0;

// Ascending series sum_k (-1)^k (x/2)^(2k+n) / (k! (k+n)!), x >= 0.
double bessel_series(int n, double x) {
  const double half = 0.5 * x;
  double term = 1.0;
  for (int i = 1; i <= n; ++i) term *= half / i;
  if (term == 0.0) return 0.0;
  const double q = -half * half;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * (k + n));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum) && k > half) break;
  }
  return sum;
}

// Miller's backward recurrence normalized with J_0 + 2 sum J_2k = 1, x > 0.
double bessel_miller(int n, double x) {
  const int big = std::max(n, static_cast<int>(x));
  int start = big + 30 + static_cast<int>(std::sqrt(40.0 * big));
  start += start % 2;
  const double two_over_x = 2.0 / x;
  double j_next = 0.0;
  double j_cur = 1e-30;
  double result = 0.0;
  double norm = 0.0;
  for (int k = start; k > 0; --k) {
    const double j_prev = k * two_over_x * j_cur - j_next;
    j_next = j_cur;
    j_cur = j_prev;
    if (std::abs(j_cur) > 1e200) {
      j_cur *= 1e-200;
      j_next *= 1e-200;
      result *= 1e-200;
      norm *= 1e-200;
    }
    // j_cur now holds J_{k-1} up to normalization.
    if (k - 1 == n) result = j_cur;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * j_cur;
  }
  norm += j_cur;
  return result / norm;
}

}  // namespace

double bessel_j(int order, double x) {
  if (order < 0 || order > kMaxOrder) {
    throw Error(ErrorCode::kDomain, "bessel_j order " + std::to_string(order) + " outside [0, 64]");
  }
  if (!(std::abs(x) <= kMaxArgument)) {
    throw Error(ErrorCode::kDomain, "bessel_j argument " + std::to_string(x) + " outside [-50, 50]");
  }
  const double ax = std::abs(x);
  const double sign = (x < 0.0 && order % 2 == 1) ? -1.0 : 1.0;
  if (ax == 0.0) return order == 0 ? 1.0 : 0.0;
  const double value = ax <= kSeriesLimit ? bessel_series(order, ax) : bessel_miller(order, ax);
  return sign * value;
}

double j0_first_zero() {
  static const double zero = [] {
    double x = 2.4;
    for (int i = 0; i < 50; ++i) {
      const double step = bessel_j(0, x) / bessel_j(1, x);  // J0' = -J1
      x += step;
      if (std::abs(step) < 1e-16) break;
    }
    return x;
  }();
  return zero;
}

double bessel_j0_inverse(double y) {
  if (!(y > 0.0 && y <= 1.0)) {
    throw Error(ErrorCode::kDomain, "bessel_j0_inverse argument " + std::to_string(y) + " outside (0, 1]");
  }
  if (y == 1.0) return 0.0;
  double lo = 0.0;
  double hi = j0_first_zero();
  for (int i = 0; i < 60 && hi - lo > 1e-6; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (bessel_j(0, mid) > y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Newton polish; J0 is strictly decreasing on the branch.
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 20; ++i) {
    const double slope = -bessel_j(1, x);
    if (slope == 0.0) break;
    const double step = (bessel_j(0, x) - y) / slope;
    x = std::clamp(x - step, lo, hi);
    if (std::abs(step) < 1e-15) break;
  }
  return x;
}

double recoil_frequency_hz(double wavelength_m, double mass_kg) {
  return phys::kPlanck / (2.0 * mass_kg * wavelength_m * wavelength_m);
}

BandProblem make_band_problem(double depth_er, double wavelength_m, double mass_kg, int cutoff) {
  BandProblem problem;
  problem.depth_er = depth_er;
  problem.cutoff = cutoff;
  problem.recoil_hz = recoil_frequency_hz(wavelength_m, mass_kg);
  return problem;
}

namespace {

void validate(const BandProblem& problem) {
  if (!(problem.depth_er >= 0.0)) {
    throw Error(ErrorCode::kDomain, "lattice depth must be non-negative");
  }
  if (problem.cutoff < 5) {
    throw Error(ErrorCode::kDomain, "plane-wave cutoff must be at least 5");
  }
  if (!(problem.recoil_hz > 0.0)) {
    throw Error(ErrorCode::kDomain, "recoil frequency must be positive");
  }
}

// V0 sin^2(k_L x) = V0/2 - (V0/4)(e^{2ik_L x} + e^{-2ik_L x}); plane waves
// e^{i(q/a + 2 k_L n)x}, kinetic energy (q/pi + 2n)^2 in E_R.
double lowest_eigenvalue(double depth, int cutoff, double q) {
  const int size = 2 * cutoff + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(size, size);
  const double k = q / std::numbers::pi;
  for (int i = 0; i < size; ++i) {
    const double n = i - cutoff;
    h(i, i) = (k + 2.0 * n) * (k + 2.0 * n) + 0.5 * depth;
    if (i + 1 < size) {
      h(i, i + 1) = -0.25 * depth;
      h(i + 1, i) = -0.25 * depth;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

}  // namespace

double band_energy(const BandProblem& problem, double quasimomentum) {
  validate(problem);
  const double e = lowest_eigenvalue(problem.depth_er, problem.cutoff, quasimomentum);
  const double e_more = lowest_eigenvalue(problem.depth_er, problem.cutoff + 2, quasimomentum);
  if (std::abs(e - e_more) > 1e-6) {
    throw Error(ErrorCode::kConvergence,
                "band energy not converged at cutoff " + std::to_string(problem.cutoff));
  }
  return e;
}

double hopping_from_depth(const BandProblem& problem) {
  const double width = band_energy(problem, std::numbers::pi) - band_energy(problem, 0.0);
  return 0.25 * width * problem.recoil_hz;
}

}  // namespace fbdg
