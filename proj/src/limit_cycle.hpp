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

// Attracting periodic orbit of the unforced flow: located by Poincare
// shooting and Newton, then reparametrised by arclength s in [0, L).

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "dynsys.hpp"
#include "spectral.hpp"

namespace shearlab {

struct CycleOptions {
  int nodes = 1024;
  int poincare_iterations = 200;  // upper bound; stops once a return moves < poincare_tol
  double poincare_tol = 1e-4;
  int max_newton = 30;
  double residual_tol = 1e-10;
  double equilibrium_tol = 1e-9;  // |f| below this counts as an equilibrium
  double max_return_time = 1e4;
  double arclength_tol = 1e-13;   // tolerance of the arclength quadrature
  bool anchor_at_guess = true;    // s = 0 at the cycle point nearest the guess
};

struct Section {
  Eigen::VectorXd point;
  Eigen::VectorXd normal;
};

class LimitCycle {
 public:
  int dim() const noexcept { return static_cast<int>(X_.rows()); }
  int nodes() const noexcept { return static_cast<int>(X_.cols()); }
  double period() const noexcept { return p0_; }
  double length() const noexcept { return L_; }
  const Section& section() const noexcept { return section_; }
  double closure_gap() const noexcept { return closure_gap_; }
  double shooting_residual() const noexcept { return residual_; }

  // Node data at s_j = j L / N.
  double node_s(int j) const noexcept { return L_ * j / nodes(); }
  const Eigen::MatrixXd& node_points() const noexcept { return X_; }
  const Eigen::MatrixXd& node_tangents() const noexcept { return Tn_; }
  const std::vector<double>& node_times() const noexcept { return times_; }

  // Spline interpolants, valid for every real s (period L).
  Eigen::VectorXd point(double s) const;
  Eigen::VectorXd tangent(double s) const;       // unit
  Eigen::VectorXd tangent_prime(double s) const; // d/ds of the unit tangent
  // Flow time from gamma(0) to gamma(s); increases by p0 per lap.
  double time_at(double s) const;
  // Arclength of the nearest point on the cycle and the distance to it.
  double project(const Eigen::VectorXd& x, double* distance = nullptr) const;

  // Quadrature of int_0^L |f(gamma)|^{-1} ds over the nodes.
  double flow_time_quadrature(FlowSystem& sys) const;

  void save(const std::string& csv_path, const std::string& json_path,
            const std::vector<std::complex<double>>& multipliers = {}) const;
  static LimitCycle load(const std::string& csv_path, const std::string& json_path);

 private:
  friend LimitCycle find_limit_cycle(const dsl::FieldProgram&, const Eigen::VectorXd&,
                                     const IntegratorConfig&, const CycleOptions&);
  friend LimitCycle make_cycle_from_nodes(Eigen::MatrixXd, Eigen::MatrixXd, std::vector<double>,
                                          double, double, Section);
  void build_splines();

  double p0_ = 0.0;
  double L_ = 0.0;
  double closure_gap_ = 0.0;
  double residual_ = 0.0;
  Section section_;
  Eigen::MatrixXd X_, Tn_;
  std::vector<double> times_;
  std::vector<PeriodicSpline> pos_, tan_;
  PeriodicSpline time_residual_;
};

LimitCycle find_limit_cycle(const dsl::FieldProgram& prog, const Eigen::VectorXd& x_guess,
                            const IntegratorConfig& config, const CycleOptions& options = {});

LimitCycle make_cycle_from_nodes(Eigen::MatrixXd points, Eigen::MatrixXd tangents,
                                 std::vector<double> times, double p0, double L, Section section);

struct MonodromyResult {
  std::vector<std::complex<double>> multipliers;
  int trivial_index = -1;
  int near_one = 0;     // multipliers within 1e-4 of 1
  bool stable = false;  // exactly one near 1, the rest strictly inside the unit circle
  Eigen::MatrixXd matrix;
};

MonodromyResult monodromy(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                          const IntegratorConfig& config);

}  // namespace shearlab
