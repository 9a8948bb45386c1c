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

#include "dynsys.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "errors.hpp"

namespace shearlab {

void PulseSchedule::validate() const {
  if (!(rho > 0.0) || !(T > rho) || !std::isfinite(T))
    throw Error(ErrorCode::InvalidArgument, "pulse schedule needs 0 < rho < T");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw Error(ErrorCode::InvalidArgument, "forcing amplitude must be finite and >= 0");
}

int PulseSchedule::evaluate(double t) const {
  const double phase = t - T * std::floor(t / T);
  return phase <= rho ? 1 : 0;
}

FlowSystem::FlowSystem(const dsl::FieldProgram& prog, IntegratorConfig config)
    : prog_(&prog), n_(prog.dim()), ev_(prog), ode_(config) {
  fbuf_.resize(n_);
  jbuf_.resize(n_ * n_);
}

void FlowSystem::field(const double* x, double eps_p, double* out, double* jac) {
  const std::span<const double> xs(x, n_);
  const bool forced = eps_p != 0.0 && prog_->has_forcing();
  if (!jac) {
    ev_.value(dsl::Which::Intrinsic, xs, {out, static_cast<std::size_t>(n_)});
    if (forced) {
      ev_.value(dsl::Which::Forcing, xs, fbuf_);
      for (int i = 0; i < n_; ++i) out[i] += eps_p * fbuf_[i];
    }
    return;
  }
  ev_.jacobian(dsl::Which::Intrinsic, xs, {out, static_cast<std::size_t>(n_)},
               {jac, static_cast<std::size_t>(n_ * n_)});
  if (forced) {
    ev_.jacobian(dsl::Which::Forcing, xs, fbuf_, jbuf_);
    for (int i = 0; i < n_; ++i) out[i] += eps_p * fbuf_[i];
    for (int i = 0; i < n_ * n_; ++i) jac[i] += eps_p * jbuf_[i];
  }
}

Eigen::VectorXd FlowSystem::intrinsic(const Eigen::VectorXd& x) {
  Eigen::VectorXd out(n_);
  field(x.data(), 0.0, out.data());
  return out;
}

Eigen::MatrixXd FlowSystem::intrinsic_jacobian(const Eigen::VectorXd& x) {
  Eigen::VectorXd out(n_);
  std::vector<double> jac(n_ * n_);
  field(x.data(), 0.0, out.data(), jac.data());
  Eigen::MatrixXd J(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) J(i, j) = jac[i * n_ + j];
  return J;
}

FlowSample FlowSystem::integrate(const PulseSchedule* schedule, const Eigen::VectorXd& x0,
                                 double t0, double t1, bool with_tangent,
                                 std::vector<FlowSample>* trajectory, const FlowObserver& observer,
                                 const TubeGuard* guard) {
  if (x0.size() != n_) throw Error(ErrorCode::InvalidArgument, "initial state has wrong dimension");
  if (!(t1 >= t0)) throw Error(ErrorCode::InvalidArgument, "integration requires t1 >= t0");
  if (schedule) schedule->validate();
  stopped_ = false;

  const int n = n_;
  const int m = with_tangent ? n + n * n : n;
  std::vector<double> y(m, 0.0);
  for (int i = 0; i < n; ++i) y[i] = x0[i];
  if (with_tangent)
    for (int i = 0; i < n; ++i) y[n + i * n + i] = 1.0;

  auto emit = [&](double t, const double* state) {
    FlowSample s;
    s.t = t;
    s.x = Eigen::Map<const Eigen::VectorXd>(state, n);
    if (with_tangent) s.tangent = Eigen::Map<const Eigen::MatrixXd>(state + n, n, n);
    return s;
  };
  if (trajectory) trajectory->push_back(emit(t0, y.data()));

  std::vector<double> g(n), jac(n * n);
  double eps_p = 0.0;
  const OdeRhs rhs = [&](double, std::span<const double> yy, std::span<double> dy) {
    if (!with_tangent) {
      field(yy.data(), eps_p, dy.data());
      return;
    }
    field(yy.data(), eps_p, dy.data(), jac.data());
    // Column-major V: dV(:,j) = J V(:,j).
    for (int j = 0; j < n; ++j) {
      const double* v = yy.data() + n + j * n;
      double* dv = dy.data() + n + j * n;
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += jac[i * n + k] * v[k];
        dv[i] = acc;
      }
    }
  };

  int pulse = 0;
  bool stop = false;
  const StepObserver step_obs = [&](const DenseStep& step) {
    const std::span<const double> end = step.end();
    if (guard && guard->distance) {
      const Eigen::VectorXd xe = Eigen::Map<const Eigen::VectorXd>(end.data(), n);
      if (guard->distance(xe) > guard->radius)
        throw Error(ErrorCode::TubeExit, "state left the tubular neighbourhood at t = " +
                                             std::to_string(step.t1()));
    }
    if (trajectory) trajectory->push_back(emit(step.t1(), end.data()));
    if (observer && !observer(step, pulse)) {
      stop = true;
      return false;
    }
    return true;
  };

  const bool forced = schedule && schedule->epsilon != 0.0 && prog_->has_forcing();
  double t = t0;
  while (t < t1 && !stop) {
    double seg_end = t1;
    if (forced) {
      const double T = schedule->T;
      const double k = std::floor(t / T);
      double next = k * T + schedule->rho;
      const double tol = 1e-13 * std::max(1.0, std::abs(t));
      if (next <= t + tol) next = (k + 1) * T;
      if (next <= t + tol) next = (k + 1) * T + schedule->rho;
      seg_end = std::min(t1, next);
      pulse = schedule->evaluate(0.5 * (t + seg_end));
      eps_p = schedule->epsilon * pulse;
    } else {
      pulse = schedule ? schedule->evaluate(0.5 * (t + t1)) : 0;
      eps_p = 0.0;
    }
    try {
      const OdeStats st = ode_.integrate(rhs, t, seg_end, y, step_obs, h_hint_);
      if (st.last_h > 0.0) h_hint_ = st.last_h;
      t = st.stopped ? st.t : seg_end;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Domain)
        throw Error(ErrorCode::Domain, std::string(e.what()) + " (during integration)");
      throw;
    }
    for (int i = 0; i < n; ++i)
      if (!std::isfinite(y[i])) throw Error(ErrorCode::Integration, "non-finite state");
  }
  stopped_ = stop;
  return emit(t, y.data());
}

MapResult FlowSystem::kick_map(const PulseSchedule& schedule, const Eigen::VectorXd& x0,
                               bool with_tangent, const TubeGuard* guard) {
  schedule.validate();
  const FlowSample s = integrate(&schedule, x0, 0.0, schedule.rho, with_tangent, nullptr, {}, guard);
  return {s.x, s.tangent};
}

MapResult FlowSystem::relaxation_map(double duration, const Eigen::VectorXd& x0, bool with_tangent) {
  if (!(duration >= 0.0)) throw Error(ErrorCode::InvalidArgument, "duration must be >= 0");
  if (duration == 0.0)
    return {x0, with_tangent ? Eigen::MatrixXd::Identity(n_, n_) : Eigen::MatrixXd()};
  const FlowSample s = integrate(nullptr, x0, 0.0, duration, with_tangent);
  return {s.x, s.tangent};
}

MapResult FlowSystem::time_T_map(const PulseSchedule& schedule, const Eigen::VectorXd& x0,
                                 bool with_tangent, const TubeGuard* guard) {
  const MapResult k = kick_map(schedule, x0, with_tangent, guard);
  const MapResult r = relaxation_map(schedule.T - schedule.rho, k.x, with_tangent);
  MapResult out;
  out.x = r.x;
  if (with_tangent) out.tangent = r.tangent * k.tangent;
  return out;
}

std::vector<FlowSample> integrate(const dsl::FieldProgram& prog, const PulseSchedule* schedule,
                                  const Eigen::VectorXd& x0, double t0, double t1,
                                  const IntegratorConfig& config, bool with_tangent) {
  FlowSystem sys(prog, config);
  std::vector<FlowSample> out;
  sys.integrate(schedule, x0, t0, t1, with_tangent, &out);
  return out;
}

MapResult kick_map(const dsl::FieldProgram& prog, const PulseSchedule& schedule,
                   const Eigen::VectorXd& x0, const IntegratorConfig& config, const TubeGuard* guard) {
  FlowSystem sys(prog, config);
  return sys.kick_map(schedule, x0, true, guard);
}

MapResult relaxation_map(const dsl::FieldProgram& prog, double duration, const Eigen::VectorXd& x0,
                         const IntegratorConfig& config) {
  FlowSystem sys(prog, config);
  return sys.relaxation_map(duration, x0, true);
}

MapResult time_T_map(const dsl::FieldProgram& prog, const PulseSchedule& schedule,
                     const Eigen::VectorXd& x0, const IntegratorConfig& config,
                     const TubeGuard* guard) {
  FlowSystem sys(prog, config);
  return sys.time_T_map(schedule, x0, true, guard);
}

void write_trajectory_csv(const std::string& path, const std::vector<FlowSample>& samples) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  const int n = samples.empty() ? 0 : static_cast<int>(samples.front().x.size());
  out << "t";
  for (int i = 0; i < n; ++i) out << ",x" << i + 1;
  out << '\n' << std::setprecision(17);
  for (const auto& s : samples) {
    out << s.t;
    for (int i = 0; i < n; ++i) out << ',' << s.x[i];
    out << '\n';
  }
}

}  // namespace shearlab
