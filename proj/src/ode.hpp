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

// Adaptive Dormand-Prince 5(4) integrator with the order-4 continuous
// extension, for a generic right-hand side on R^m.

#pragma once

#include <functional>
#include <span>
#include <vector>

namespace shearlab {

struct IntegratorConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double max_step = 0.0;      // 0 = unbounded
  double initial_step = 0.0;  // 0 = automatic
  long max_steps = 50'000'000;

  void validate() const;
};

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

// Interpolant of one accepted step on [t0, t0 + h].
class DenseStep {
 public:
  double t0() const noexcept { return t0_; }
  double t1() const noexcept { return t0_ + h_; }
  double h() const noexcept { return h_; }
  int dim() const noexcept { return dim_; }
  void eval(double t, std::span<double> out) const;
  double eval(double t, int component) const;
  // State at the end of the step.
  std::span<const double> end() const noexcept { return {end_, static_cast<std::size_t>(dim_)}; }
  std::span<const double> start() const noexcept { return {rcont_, static_cast<std::size_t>(dim_)}; }

 private:
  friend class Dopri5;
  double t0_ = 0.0;
  double h_ = 0.0;
  int dim_ = 0;
  const double* rcont_ = nullptr;  // 5 * dim
  const double* end_ = nullptr;
};

// Returning false from the observer ends the integration after that step.
using StepObserver = std::function<bool(const DenseStep&)>;

struct OdeStats {
  long steps = 0;
  long rejected = 0;
  long evals = 0;
  double t = 0.0;       // time reached
  double last_h = 0.0;  // proposed next step size, usable as a hint
  bool stopped = false; // observer requested the stop
};

class Dopri5 {
 public:
  explicit Dopri5(IntegratorConfig cfg = {});

  const IntegratorConfig& config() const noexcept { return cfg_; }

  // Advances y from t0 to t1 (either direction). `h_hint` seeds the first
  // step when positive.
  OdeStats integrate(const OdeRhs& rhs, double t0, double t1, std::span<double> y,
                     const StepObserver& observer = {}, double h_hint = 0.0);

 private:
  double initial_step(const OdeRhs& rhs, double t0, std::span<const double> y, double dir);

  IntegratorConfig cfg_;
  std::vector<double> k_[7];
  std::vector<double> ytmp_, y1_, yerr_, rcont_;
};

}  // namespace shearlab
