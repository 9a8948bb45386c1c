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

#include "limit_cycle.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "errors.hpp"

namespace shearlab {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Return {
  double t = 0.0;
  VectorXd x;
  MatrixXd V;
};

// Solves phi(t) = 0 on [a, b] given phi(a) < 0 <= phi(b).
template <class F>
double bisect(F&& phi, double a, double b) {
  double fa = phi(a);
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
    const double m = 0.5 * (a + b);
    const double fm = phi(m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

Return poincare_return(FlowSystem& sys, const Section& sec, const VectorXd& x0, bool with_tangent,
                       const CycleOptions& opt) {
  const int n = sys.dim();
  const int m = with_tangent ? n + n * n : n;
  Return ret;
  bool found = false;
  // The start lies on the section, so a crossing only counts once the orbit
  // has been clearly on the negative side.
  bool armed = false;
  const double arm_tol = 1e-9 * (1.0 + x0.norm());
  std::vector<double> buf(m), g(n);
  auto height = [&](std::span<const double> y) {
    double h = 0.0;
    for (int i = 0; i < n; ++i) h += (y[i] - sec.point[i]) * sec.normal[i];
    return h;
  };
  const FlowObserver obs = [&](const DenseStep& step, int) {
    const std::span<const double> end = step.end();
    sys.field(end.data(), 0.0, g.data());
    double speed = 0.0;
    for (double v : g) speed += v * v;
    if (std::sqrt(speed) < opt.equilibrium_tol)
      throw Error(ErrorCode::Equilibrium, "orbit converges to an equilibrium (f -> 0)");
    const double h0 = height(step.start());
    const double h1 = height(end);
    if (armed && h0 < 0.0 && h1 >= 0.0) {
      const double t = bisect(
          [&](double tt) {
            step.eval(tt, buf);
            return height(buf);
          },
          step.t0(), step.t1());
      step.eval(t, buf);
      ret.t = t;
      ret.x = Eigen::Map<const VectorXd>(buf.data(), n);
      if (with_tangent) ret.V = Eigen::Map<const MatrixXd>(buf.data() + n, n, n);
      found = true;
      return false;
    }
    if (h1 < -arm_tol) armed = true;
    return true;
  };
  sys.integrate(nullptr, x0, 0.0, opt.max_return_time, with_tangent, nullptr, obs);
  if (!found) throw Error(ErrorCode::Convergence, "orbit does not return to the shooting section");
  return ret;
}

}  // namespace

LimitCycle find_limit_cycle(const dsl::FieldProgram& prog, const VectorXd& x_guess,
                            const IntegratorConfig& config, const CycleOptions& opt) {
  const int n = prog.dim();
  if (x_guess.size() != n) throw Error(ErrorCode::InvalidArgument, "guess has wrong dimension");
  if (opt.nodes < 8 || opt.nodes % 2 != 0)
    throw Error(ErrorCode::InvalidArgument, "node count must be even and >= 8");
  FlowSystem sys(prog, config);
  const VectorXd f0 = sys.intrinsic(x_guess);
  if (f0.norm() < opt.equilibrium_tol)
    throw Error(ErrorCode::Equilibrium, "guess is an equilibrium (f = 0)");
  Section sec{x_guess, f0.normalized()};

  // Relax onto the cycle with return-map iterations until the map settles.
  VectorXd x = x_guess;
  Return r = poincare_return(sys, sec, x, false, opt);
  for (int i = 1; i < opt.poincare_iterations && (r.x - x).norm() > opt.poincare_tol; ++i) {
    x = r.x;
    r = poincare_return(sys, sec, x, false, opt);
  }
  x = r.x;
  double T = r.t;

  // Newton on (x, T): phi_T(x) - x = 0, <n, x - x_s> = 0, with backtracking.
  auto shoot = [&](const VectorXd& xx, double TT) {
    return sys.integrate(nullptr, xx, 0.0, TT, true);
  };
  FlowSample fs = shoot(x, T);
  double residual = (fs.x - x).norm();
  for (int it = 0; residual >= opt.residual_tol; ++it) {
    if (it >= opt.max_newton)
      throw Error(ErrorCode::Convergence, "shooting Newton did not converge (residual " +
                                              std::to_string(residual) + ")");
    MatrixXd J = MatrixXd::Zero(n + 1, n + 1);
    J.topLeftCorner(n, n) = fs.tangent - MatrixXd::Identity(n, n);
    J.topRightCorner(n, 1) = sys.intrinsic(fs.x);
    J.bottomLeftCorner(1, n) = sec.normal.transpose();
    VectorXd rhs(n + 1);
    rhs.head(n) = x - fs.x;
    rhs[n] = -sec.normal.dot(x - sec.point);
    const VectorXd delta = J.completeOrthogonalDecomposition().solve(rhs);
    double step = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 12; ++ls, step *= 0.5) {
      const VectorXd xn = x + step * delta.head(n);
      const double Tn = T + step * delta[n];
      if (!(Tn > 0.0) || !xn.allFinite()) continue;
      FlowSample fn = shoot(xn, Tn);
      const double rn = (fn.x - xn).norm();
      if (rn < residual || ls == 11) {
        x = xn;
        T = Tn;
        fs = std::move(fn);
        improved = rn < residual;
        residual = rn;
        break;
      }
    }
    if (!improved && residual >= opt.residual_tol)
      throw Error(ErrorCode::Convergence, "shooting Newton stalled (residual " +
                                              std::to_string(residual) + ")");
  }

  // Arclength: integrate (x, s) with s' = |f(x)| over one period, twice: the
  // first pass measures L, the second places the nodes at s_j = j L / N.
  Dopri5 ode([&] {
    IntegratorConfig c = config;
    c.abs_tol = c.rel_tol = opt.arclength_tol;
    return c;
  }());
  const OdeRhs rhs = [&](double, std::span<const double> y, std::span<double> dy) {
    sys.field(y.data(), 0.0, dy.data());
    double sp = 0.0;
    for (int i = 0; i < n; ++i) sp += dy[i] * dy[i];
    dy[n] = std::sqrt(sp);
  };
  auto resample = [&](const VectorXd& x0, int N) {
    std::vector<double> y(n + 1), start(n + 1);
    for (int i = 0; i < n; ++i) start[i] = x0[i];
    start[n] = 0.0;
    y = start;
    ode.integrate(rhs, 0.0, T, y);
    const double L = y[n];
    const double gap = (Eigen::Map<const VectorXd>(y.data(), n) - x0).norm();

    MatrixXd P(n, N), Tn(n, N);
    std::vector<double> times(N);
    for (int i = 0; i < n; ++i) P(i, 0) = x0[i];
    times[0] = 0.0;
    int next = 1;
    std::vector<double> buf(n + 1);
    y = start;
    ode.integrate(rhs, 0.0, T, y, [&](const DenseStep& step) {
      while (next < N) {
        const double target = L * next / N;
        if (step.end()[n] < target) break;
        const double t =
            bisect([&](double tt) { return step.eval(tt, n) - target; }, step.t0(), step.t1());
        step.eval(t, buf);
        for (int i = 0; i < n; ++i) P(i, next) = buf[i];
        times[next] = t;
        ++next;
      }
      return true;
    });
    if (next != N) throw Error(ErrorCode::Internal, "arclength resampling missed nodes");

    for (int j = 0; j < N; ++j) {
      const VectorXd f = sys.intrinsic(P.col(j));
      const double sp = f.norm();
      if (sp < opt.equilibrium_tol)
        throw Error(ErrorCode::Equilibrium, "flow speed vanishes on the cycle");
      Tn.col(j) = f / sp;
    }
    LimitCycle c = make_cycle_from_nodes(std::move(P), std::move(Tn), std::move(times), T, L, sec);
    c.closure_gap_ = gap;
    c.residual_ = residual;
    return c;
  };

  LimitCycle c = resample(x, opt.nodes);
  if (opt.anchor_at_guess) {
    // Move the origin s = 0 to the cycle point nearest the guess, reached by
    // flowing along the cycle so the new origin stays on it.
    const double s_star = c.project(x_guess);
    const double tau = c.time_at(s_star);
    if (tau > 0.0 && tau < T && circle_distance(s_star, 0.0, c.length()) > 1e-14 * c.length()) {
      const VectorXd x0 = sys.integrate(nullptr, x, 0.0, tau, false).x;
      c = resample(x0, opt.nodes);
    }
  }
  return c;
}

LimitCycle make_cycle_from_nodes(MatrixXd points, MatrixXd tangents, std::vector<double> times,
                                 double p0, double L, Section section) {
  if (points.cols() != tangents.cols() || static_cast<int>(times.size()) != points.cols())
    throw Error(ErrorCode::InvalidArgument, "inconsistent cycle node data");
  LimitCycle c;
  c.X_ = std::move(points);
  c.Tn_ = std::move(tangents);
  c.times_ = std::move(times);
  c.p0_ = p0;
  c.L_ = L;
  c.section_ = std::move(section);
  c.build_splines();
  return c;
}

void LimitCycle::build_splines() {
  const int n = dim(), N = nodes();
  pos_.clear();
  tan_.clear();
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(N), t(N);
    for (int j = 0; j < N; ++j) {
      v[j] = X_(i, j);
      t[j] = Tn_(i, j);
    }
    pos_.emplace_back(std::move(v), L_);
    tan_.emplace_back(std::move(t), L_);
  }
  std::vector<double> r(N);
  for (int j = 0; j < N; ++j) r[j] = times_[j] - p0_ * node_s(j) / L_;
  time_residual_ = PeriodicSpline(std::move(r), L_);
}

VectorXd LimitCycle::point(double s) const {
  VectorXd x(dim());
  for (int i = 0; i < dim(); ++i) x[i] = pos_[i].value(s);
  return x;
}

VectorXd LimitCycle::tangent(double s) const {
  VectorXd t(dim());
  for (int i = 0; i < dim(); ++i) t[i] = tan_[i].value(s);
  return t.normalized();
}

VectorXd LimitCycle::tangent_prime(double s) const {
  VectorXd t(dim());
  for (int i = 0; i < dim(); ++i) t[i] = tan_[i].d1(s);
  return t;
}

double LimitCycle::time_at(double s) const { return p0_ * s / L_ + time_residual_.value(s); }

double LimitCycle::project(const VectorXd& x, double* distance) const {
  int best = 0;
  double bd = 1e300;
  for (int j = 0; j < nodes(); ++j) {
    const double d = (X_.col(j) - x).squaredNorm();
    if (d < bd) {
      bd = d;
      best = j;
    }
  }
  double s = node_s(best);
  const double h = L_ / nodes();
  for (int it = 0; it < 30; ++it) {
    VectorXd g(dim()), g1(dim()), g2(dim());
    for (int i = 0; i < dim(); ++i) {
      g[i] = pos_[i].value(s);
      g1[i] = pos_[i].d1(s);
      g2[i] = pos_[i].d2(s);
    }
    const VectorXd r = x - g;
    const double phi = r.dot(g1);
    const double dphi = -g1.squaredNorm() + r.dot(g2);
    if (dphi >= 0.0) break;  // not a local minimum; keep the node estimate
    double step = -phi / dphi;
    step = std::clamp(step, -h, h);
    s += step;
    if (std::abs(step) < 1e-15 * std::max(1.0, L_)) break;
  }
  s = wrap(s, L_);
  if (distance) *distance = (point(s) - x).norm();
  return s;
}

double LimitCycle::flow_time_quadrature(FlowSystem& sys) const {
  double sum = 0.0;
  for (int j = 0; j < nodes(); ++j) sum += 1.0 / sys.intrinsic(X_.col(j)).norm();
  return sum * L_ / nodes();
}

void LimitCycle::save(const std::string& csv_path, const std::string& json_path,
                      const std::vector<std::complex<double>>& multipliers) const {
  std::ofstream csv(csv_path);
  if (!csv) throw Error(ErrorCode::Io, "cannot write " + csv_path);
  csv << "s,t";
  for (int i = 0; i < dim(); ++i) csv << ",x" << i + 1;
  for (int i = 0; i < dim(); ++i) csv << ",tx" << i + 1;
  csv << '\n' << std::setprecision(17);
  for (int j = 0; j < nodes(); ++j) {
    csv << node_s(j) << ',' << times_[j];
    for (int i = 0; i < dim(); ++i) csv << ',' << X_(i, j);
    for (int i = 0; i < dim(); ++i) csv << ',' << Tn_(i, j);
    csv << '\n';
  }
  nlohmann::json h;
  h["p0"] = p0_;
  h["L"] = L_;
  h["nodes"] = nodes();
  h["dim"] = dim();
  h["closure_gap"] = closure_gap_;
  h["shooting_residual"] = residual_;
  h["section"]["point"] = std::vector<double>(section_.point.data(), section_.point.data() + dim());
  h["section"]["normal"] = std::vector<double>(section_.normal.data(), section_.normal.data() + dim());
  nlohmann::json mj = nlohmann::json::array();
  for (const auto& m : multipliers) mj.push_back({m.real(), m.imag()});
  h["multipliers"] = mj;
  std::ofstream js(json_path);
  if (!js) throw Error(ErrorCode::Io, "cannot write " + json_path);
  js << std::setw(2) << h << '\n';
}

LimitCycle LimitCycle::load(const std::string& csv_path, const std::string& json_path) {
  std::ifstream js(json_path);
  if (!js) throw Error(ErrorCode::Io, "file not found: " + json_path);
  nlohmann::json h;
  try {
    js >> h;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Io, "malformed cycle header: " + std::string(e.what()));
  }
  const int n = h.at("dim").get<int>();
  const int N = h.at("nodes").get<int>();
  std::ifstream csv(csv_path);
  if (!csv) throw Error(ErrorCode::Io, "file not found: " + csv_path);
  std::string line;
  std::getline(csv, line);
  MatrixXd P(n, N), Tn(n, N);
  std::vector<double> times(N);
  for (int j = 0; j < N; ++j) {
    if (!std::getline(csv, line)) throw Error(ErrorCode::Io, "cycle CSV has too few rows");
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != 2 + 2 * n) throw Error(ErrorCode::Io, "cycle CSV row has wrong width");
    times[j] = row[1];
    for (int i = 0; i < n; ++i) {
      P(i, j) = row[2 + i];
      Tn(i, j) = row[2 + n + i];
    }
  }
  Section sec;
  const auto sp = h.at("section").at("point").get<std::vector<double>>();
  const auto sn = h.at("section").at("normal").get<std::vector<double>>();
  sec.point = Eigen::Map<const VectorXd>(sp.data(), n);
  sec.normal = Eigen::Map<const VectorXd>(sn.data(), n);
  LimitCycle c = make_cycle_from_nodes(std::move(P), std::move(Tn), std::move(times),
                                       h.at("p0").get<double>(), h.at("L").get<double>(), sec);
  c.closure_gap_ = h.value("closure_gap", 0.0);
  c.residual_ = h.value("shooting_residual", 0.0);
  return c;
}

MonodromyResult monodromy(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                          const IntegratorConfig& config) {
  FlowSystem sys(prog, config);
  const FlowSample fs = sys.integrate(nullptr, cycle.point(0.0), 0.0, cycle.period(), true);
  MonodromyResult r;
  r.matrix = fs.tangent;
  Eigen::EigenSolver<MatrixXd> es(fs.tangent, false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Convergence, "eigen-solver failure");
  double best = 1e300;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> mu = es.eigenvalues()[i];
    r.multipliers.push_back(mu);
    const double d = std::abs(mu - 1.0);
    if (d < 1e-4) ++r.near_one;
    if (d < best) {
      best = d;
      r.trivial_index = i;
    }
  }
  r.stable = r.near_one == 1;
  for (int i = 0; i < static_cast<int>(r.multipliers.size()); ++i)
    if (i != r.trivial_index && !(std::abs(r.multipliers[i]) < 1.0)) r.stable = false;
  return r;
}

}  // namespace shearlab
