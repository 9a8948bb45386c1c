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

// The pulse-forced system x' = f(x) + eps * P(t) * F(x), where P is the
// 0/1 pulse train of width rho and period T, together with its kick,
// relaxation and time-T maps and the variational (tangent) flow.

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "field_dsl.hpp"
#include "ode.hpp"

namespace shearlab {

struct PulseSchedule {
  double rho = 1.0;
  double T = 2.0;
  double epsilon = 0.0;

  void validate() const;
  // 1 on [kT, kT + rho], 0 elsewhere.
  int evaluate(double t) const;
};

struct FlowSample {
  double t = 0.0;
  Eigen::VectorXd x;
  Eigen::MatrixXd tangent;  // empty when not requested
};

struct MapResult {
  Eigen::VectorXd x;
  Eigen::MatrixXd tangent;
};

// Optional containment check for kicks: `distance` measures how far a state
// is from the reference set, and exceeding `radius` raises a tube-exit error.
struct TubeGuard {
  std::function<double(const Eigen::VectorXd&)> distance;
  double radius = 0.0;
};

// Called after each accepted step with the step interpolant over the state
// (and, with tangents, the column-major tangent after the state). `forcing`
// is the pulse value on the step. Returning false stops the integration.
using FlowObserver = std::function<bool(const DenseStep& step, int forcing)>;

// Owns the per-thread scratch needed to evaluate the field; one instance per
// worker. The program must outlive the system.
class FlowSystem {
 public:
  FlowSystem(const dsl::FieldProgram& prog, IntegratorConfig config);

  int dim() const noexcept { return n_; }
  const dsl::FieldProgram& program() const noexcept { return *prog_; }
  const IntegratorConfig& config() const noexcept { return ode_.config(); }

  // Field value g = f + eps*p*F and optionally its Jacobian (row-major).
  void field(const double* x, double eps_p, double* out, double* jac = nullptr);
  Eigen::VectorXd intrinsic(const Eigen::VectorXd& x);
  Eigen::MatrixXd intrinsic_jacobian(const Eigen::VectorXd& x);

  // Integrates from (t0, x0) to t1 >= t0, restarting at every pulse switch.
  // Without a schedule the forcing is off.
  FlowSample integrate(const PulseSchedule* schedule, const Eigen::VectorXd& x0, double t0,
                       double t1, bool with_tangent, std::vector<FlowSample>* trajectory = nullptr,
                       const FlowObserver& observer = {}, const TubeGuard* guard = nullptr);

  MapResult kick_map(const PulseSchedule& schedule, const Eigen::VectorXd& x0,
                     bool with_tangent = true, const TubeGuard* guard = nullptr);
  MapResult relaxation_map(double duration, const Eigen::VectorXd& x0, bool with_tangent = true);
  MapResult time_T_map(const PulseSchedule& schedule, const Eigen::VectorXd& x0,
                       bool with_tangent = true, const TubeGuard* guard = nullptr);

  // True when the last integrate() call was stopped by its observer.
  bool stopped() const noexcept { return stopped_; }

 private:
  const dsl::FieldProgram* prog_;
  int n_;
  dsl::Evaluator ev_;
  Dopri5 ode_;
  std::vector<double> fbuf_, jbuf_;
  double h_hint_ = 0.0;
  bool stopped_ = false;
};

// Free-function forms of the operations above.
std::vector<FlowSample> integrate(const dsl::FieldProgram& prog, const PulseSchedule* schedule,
                                  const Eigen::VectorXd& x0, double t0, double t1,
                                  const IntegratorConfig& config, bool with_tangent);
MapResult kick_map(const dsl::FieldProgram& prog, const PulseSchedule& schedule,
                   const Eigen::VectorXd& x0, const IntegratorConfig& config,
                   const TubeGuard* guard = nullptr);
MapResult relaxation_map(const dsl::FieldProgram& prog, double duration, const Eigen::VectorXd& x0,
                         const IntegratorConfig& config);
MapResult time_T_map(const dsl::FieldProgram& prog, const PulseSchedule& schedule,
                     const Eigen::VectorXd& x0, const IntegratorConfig& config,
                     const TubeGuard* guard = nullptr);

// CSV with header t,x1..xn.
void write_trajectory_csv(const std::string& path, const std::vector<FlowSample>& samples);

}  // namespace shearlab
