// Copyright 2026 The shearlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Direct simulation of the time-T map G_T of the pulsed flow: Lyapunov
// spectra, attractor classification, time averages and histograms on the
// cycle coordinate, and sweeps over T.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dynsys.hpp"
#include "limit_cycle.hpp"

namespace shearlab {

// splitmix64 step; derives independent per-index streams from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

struct BootstrapEstimate {
  double mean = 0.0;
  double halfwidth = 0.0;  // half of the central 95% bootstrap interval
};

// Block bootstrap of the mean: the series is cut into `blocks` contiguous
// blocks and their means are resampled with replacement.
BootstrapEstimate block_bootstrap(const std::vector<double>& series, int blocks, int resamples,
                                  std::uint64_t seed);

// Random state near the cycle: uniform s, normal offset up to `radius`.
Eigen::VectorXd random_near_cycle(const LimitCycle& cycle, double radius, std::mt19937_64& rng);

struct LyapunovOptions {
  int blocks = 100;
  int resamples = 200;
  std::uint64_t seed = 1;
  double escape_radius = 0.0;  // distance from the cycle that counts as escape; 0 = unchecked
};

struct LyapunovResult {
  std::vector<double> exponents;  // per application of G_T, descending
  std::vector<double> per_time;   // exponents / T
  int iterates = 0;
  double ci_halfwidth = 0.0;      // top exponent
  double log_det_mean = 0.0;      // (1 / iterates) sum log |det DG_T|
  double sum_rule_error = 0.0;    // |sum exponents - log_det_mean| / max(1, |log_det_mean|)
  Eigen::VectorXd final_state;
};

// QR-reorthogonalised tangent products over `iterates` maps after `burn_in`.
LyapunovResult lyapunov_spectrum(const dsl::FieldProgram& prog, const PulseSchedule& schedule,
                                 const Eigen::VectorXd& x0, int iterates, int burn_in,
                                 const IntegratorConfig& config, const LyapunovOptions& options = {},
                                 const LimitCycle* cycle = nullptr);

enum class AttractorClass { Sink, InvariantCurve, Chaotic, Undecided };
const char* to_string(AttractorClass c);

struct ClassifyOptions {
  int burn_in = 100;
  int iterates = 500;
  int transient_cap = 2000;   // further maps searched for a periodic limit when not chaotic
  int chaos_confirm = 1000;   // further maps a chaotic orbit must survive without settling
  int period_cap = 32;
  double residual = 1e-8;     // |G^p(x) - x| for a converged periodic point
  double zero_band = 0.02;    // |top| below this (or its CI) reads as neutral
  int bins = 64;              // s-histogram for invariant-curve coverage
  double coverage = 0.9;      // fraction of occupied bins for a curve that fills the circle
  double spread = 0.25;       // max distance from the cycle on an invariant curve
  double escape_radius = 1.0;
  double init_radius = 0.05;
  int blocks = 100;
  int resamples = 200;
  std::uint64_t seed = 1;
};

struct Classification {
  AttractorClass cls = AttractorClass::Undecided;
  double top = 0.0;
  double ci = 0.0;
  int period = 0;               // sink period
  int transient = 0;            // maps before the periodic limit was reached
  double transient_exponent = 0.0;  // mean top stretching over the transient
  double coverage = 0.0;
  double spread = 0.0;
  int maps = 0;
};

Classification classify_attractor(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                                  const PulseSchedule& schedule, const IntegratorConfig& config,
                                  const ClassifyOptions& options = {});
// Same, from a given initial state.
Classification classify_from(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                             const PulseSchedule& schedule, const Eigen::VectorXd& x0,
                             const IntegratorConfig& config, const ClassifyOptions& options);

struct SweepPoint {
  double T = 0.0;
  Classification c;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<double> window_start;     // unit windows [start, start + 1)
  std::vector<double> window_fraction;  // chaotic fraction per window
};

struct SweepOptions {
  ClassifyOptions classify;
  int threads = 1;
};

// Classifies G_T on T = T_lo, T_lo + step, ... <= T_hi with per-index seeds.
SweepResult sweep_T(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                    const PulseSchedule& schedule_template, double T_lo, double T_hi, double step,
                    const IntegratorConfig& config, const SweepOptions& options = {});

// Chaotic fraction over [start, start + width) of a sweep.
double chaotic_fraction(const SweepResult& sweep, double start, double width);

void write_sweep_csv(const std::string& path, const SweepResult& sweep);

using Observable = std::function<double(const Eigen::VectorXd& x, double s)>;

struct SrbOptions {
  int initial_points = 2;
  int iterates = 100000;
  int burn_in = 200;
  int bins = 64;
  int max_lag = 20;
  double init_radius = 0.05;
  double escape_radius = 1.0;
  int blocks = 100;
  int resamples = 200;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct SrbReport {
  // averages[i][j]: observable j from initial point i
  std::vector<std::vector<BootstrapEstimate>> averages;
  bool agree = false;        // every pair within 3x the combined half-width
  double worst_ratio = 0.0;  // max |avg_i - avg_k| / combined half-width
  std::vector<double> histogram;  // s-marginal mass per bin, pooled
  std::vector<double> autocorrelation;  // cos(pi s / L), lags 0..max_lag, first orbit
  double variance = 0.0;
  double decay_rate = 0.0;   // fitted geometric ratio per map
  int fit_lags = 0;
};

// Default observable list is {cos(pi s / L)}.
SrbReport srb_diagnostics(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                          const PulseSchedule& schedule, const IntegratorConfig& config,
                          const SrbOptions& options = {},
                          const std::vector<Observable>& observables = {});

// Histogram of s over [0, L) with `bins` bins, normalised to unit mass.
std::vector<double> s_histogram(const std::vector<double>& s, double L, int bins);
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

void write_histogram_csv(const std::string& path, const std::vector<double>& mass);

struct DetRatio {
  double min_det = 0.0;
  double max_det = 0.0;
  double ratio = 0.0;
  int points = 0;
};

// |det DG_T| over random points in a tube of the given radius around the cycle.
DetRatio det_ratio(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                   const PulseSchedule& schedule, const IntegratorConfig& config, int points,
                   double radius, std::uint64_t seed);

}  // namespace shearlab
