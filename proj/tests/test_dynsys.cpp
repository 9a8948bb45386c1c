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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dynsys.hpp"
#include "errors.hpp"
#include "rs_oracle.hpp"

using namespace shearlab;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

constexpr double kPi = std::numbers::pi;

IntegratorConfig tight() {
  IntegratorConfig c;
  c.abs_tol = 1e-12;
  c.rel_tol = 1e-12;
  return c;
}

VectorXd polar(double r, double th) { return Vector2d(r * std::cos(th), r * std::sin(th)); }

}  // namespace

TEST_CASE("pulse schedule is a 0/1 train of width rho") {
  const PulseSchedule p{1.0, 5.0, 0.1};
  CHECK(p.evaluate(0.0) == 1);
  CHECK(p.evaluate(1.0) == 1);
  CHECK(p.evaluate(1.0001) == 0);
  CHECK(p.evaluate(4.9) == 0);
  CHECK(p.evaluate(5.5) == 1);
  CHECK(p.evaluate(-4.5) == 1);
  CHECK_THROWS_AS((PulseSchedule{2.0, 1.0, 0.0}.validate()), Error);
  CHECK_THROWS_AS((PulseSchedule{0.0, 1.0, 0.0}.validate()), Error);
}

TEST_CASE("rotation field closes after 2 pi and its tangent is a rotation") {
  const auto prog = dsl::parse_field("f1 = -x2; f2 = x1");
  const auto traj = integrate(prog, nullptr, Vector2d(1, 0), 0.0, 2 * kPi, tight(), false);
  CHECK((traj.back().x - Vector2d(1, 0)).norm() < 1e-8);
  CHECK(traj.back().t == 2 * kPi);
  const auto half = integrate(prog, nullptr, Vector2d(1, 0), 0.0, kPi, tight(), true);
  const MatrixXd V = half.back().tangent;
  CHECK((V - (-MatrixXd::Identity(2, 2))).norm() < 1e-8);
  CHECK(std::abs(V.determinant() - 1.0) < 1e-8);
}

TEST_CASE("radial-shear radius follows the closed-form decay") {
  const auto prog = dsl::parse_field(rs::source(0.05, 1.0));
  const auto traj = integrate(prog, nullptr, Vector2d(1.5, 0), 0.0, 10.0, tight(), false);
  const double r = traj.back().x.norm();
  CHECK(std::abs((r - 1.0) - 0.5 * std::exp(-0.05 * 10.0)) < 1e-6);
  // theta(t) = t + beta (r0 - 1)(1 - e^{-lam t}) / lam.
  const double th = std::atan2(traj.back().x[1], traj.back().x[0]);
  const double expect = 10.0 + 0.5 * (1 - std::exp(-0.5)) / 0.05;
  CHECK(std::remainder(th - expect, 2 * kPi) == doctest::Approx(0.0).epsilon(1e-8).scale(1));
}

TEST_CASE("integration stops exactly at every pulse switch") {
  const auto prog = dsl::parse_field(rs::source(0.05, 1.0));
  const PulseSchedule sched{0.7, 3.0, 0.01};
  const auto traj = integrate(prog, &sched, Vector2d(1, 0), 0.0, 10.0, tight(), false);
  for (double sw : {0.7, 3.0, 3.7, 6.0, 6.7, 9.0, 9.7}) {
    bool hit = false;
    for (const auto& s : traj) hit = hit || s.t == doctest::Approx(sw).epsilon(1e-14);
    CHECK_MESSAGE(hit, "missing switch time " << sw);
  }
}

TEST_CASE("kick map: unforced limit and first-order radial displacement") {
  const double lam = 0.05, beta = 1.0;
  const auto prog = dsl::parse_field(rs::source(lam, beta));
  const IntegratorConfig cfg = tight();
  const VectorXd x0 = polar(1.0, 0.8);
  {
    const MapResult k = kick_map(prog, PulseSchedule{1.0, 5.0, 0.0}, x0, cfg);
    const MapResult f = relaxation_map(prog, 1.0, x0, cfg);
    CHECK((k.x - f.x).norm() < 1e-13);
    CHECK((k.tangent - f.tangent).norm() < 1e-12);
  }
  // Linearised in eps: y(1) = eps * int_0^1 e^{-lam(1 - tau)} sin(s0 + tau) dtau.
  std::vector<double> errs;
  for (double eps : {0.01, 0.005, 0.0025}) {
    for (double s0 : {0.3, 1.7, 4.0}) {
      const MapResult k = kick_map(prog, PulseSchedule{1.0, 5.0, eps}, polar(1.0, s0), cfg);
      const double y = k.x.norm() - 1.0;
      double lin = 0.0;
      const int M = 2000;
      for (int j = 0; j < M; ++j) {
        const double tau = (j + 0.5) / M;
        lin += std::exp(-lam * (1 - tau)) * std::sin(s0 + tau) / M;
      }
      lin *= eps;
      const double simple = eps * (std::cos(s0) - std::cos(s0 + 1.0));
      CHECK(std::abs(y - lin) < 2.0 * eps * eps);
      CHECK(std::abs(y - simple) < eps * (lam + 2.0 * eps));
      errs.push_back(std::abs(y - lin) / (eps * eps));
    }
  }
}

TEST_CASE("kick followed by the reversed flow returns to the start") {
  const auto fwd = dsl::parse_field(rs::source(0.05, 1.0));
  const auto bwd = dsl::parse_field(
      "param lam = 0.05; param beta = 1; let r = sqrt(x1^2 + x2^2); let w = 1 + beta*(r - 1);"
      "f1 = -(-lam*(r - 1)*x1/r - w*x2); f2 = -(-lam*(r - 1)*x2/r + w*x1);"
      "F1 = -(x2/r)*(x1/r); F2 = -(x2/r)*(x2/r);");
  const VectorXd x0 = polar(1.02, 2.0);
  const PulseSchedule s{1.0, 5.0, 0.05};
  const MapResult k = kick_map(fwd, s, x0, tight());
  const MapResult back = kick_map(bwd, s, k.x, tight());
  CHECK((back.x - x0).norm() < 1e-9);
  CHECK((back.tangent * k.tangent - MatrixXd::Identity(2, 2)).norm() < 1e-8);
}

TEST_CASE("tube guard raises a tube-exit error") {
  const auto prog = dsl::parse_field(rs::source(0.05, 1.0));
  TubeGuard guard{[](const VectorXd& x) { return std::abs(x.norm() - 1.0); }, 1e-3};
  try {
    kick_map(prog, PulseSchedule{1.0, 5.0, 0.1}, polar(1.0, 0.5), tight(), &guard);
    FAIL("no tube exit");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TubeExit);
  }
  guard.radius = 0.2;
  CHECK_NOTHROW(kick_map(prog, PulseSchedule{1.0, 5.0, 0.1}, polar(1.0, 0.5), tight(), &guard));
}

TEST_CASE("relaxation map contracts the distance to the cycle at rate lam") {
  const double lam = 0.05;
  const auto prog = dsl::parse_field(rs::source(lam, 2.0));
  const MapResult id = relaxation_map(prog, 0.0, polar(1.1, 0.3), tight());
  CHECK((id.x - polar(1.1, 0.3)).norm() == 0.0);
  for (double d : {0.5, 3.0, 12.0}) {
    const MapResult r = relaxation_map(prog, d, polar(1.1, 0.3), tight());
    const double ratio = (r.x.norm() - 1.0) / 0.1;
    CHECK(std::abs(ratio / std::exp(-lam * d) - 1.0) < 1e-6);
  }
  IntegratorConfig cfg = tight();
  cfg.abs_tol = 1e-10;
  const MapResult far = relaxation_map(prog, 32.0 / lam, polar(1.1, 0.3), cfg);
  CHECK(std::abs(far.x.norm() - 1.0) < 1e-10);
}

TEST_CASE("time-T map: periodic orbit, orientation and determinant ratio") {
  const double lam = 0.05;
  const auto prog = dsl::parse_field(rs::source(lam, 1.0));
  const MapResult p = time_T_map(prog, PulseSchedule{1.0, 2 * kPi, 0.0}, polar(1.0, 0.4), tight());
  CHECK((p.x - polar(1.0, 0.4)).norm() < 1e-7);

  IntegratorConfig cfg;
  cfg.abs_tol = cfg.rel_tol = 1e-9;
  const PulseSchedule s{1.0, 12.0, 0.05};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> th(0, 2 * kPi), rr(0.97, 1.03);
  FlowSystem sys(prog, cfg);
  double dmin = 1e300, dmax = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double det = sys.time_T_map(s, polar(rr(rng), th(rng))).tangent.determinant();
    CHECK(det > 0.0);
    dmin = std::min(dmin, std::abs(det));
    dmax = std::max(dmax, std::abs(det));
  }
  const double KD = dmax / dmin;
  MESSAGE("determinant ratio K_D = " << KD);
  CHECK(std::isfinite(KD));
  CHECK(KD >= 1.0);
}

TEST_CASE("tolerance halving and tangent versus finite differences") {
  const auto prog = dsl::parse_field(rs::source(0.1, 3.0));
  const PulseSchedule s{1.0, 8.0, 0.05};
  IntegratorConfig c1;
  c1.abs_tol = c1.rel_tol = 1e-9;
  IntegratorConfig c2 = c1;
  c2.abs_tol = c2.rel_tol = 5e-10;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> th(0, 2 * kPi), rr(0.95, 1.05);
  FlowSystem a(prog, c1), b(prog, c2), fine(prog, tight());
  for (int i = 0; i < 20; ++i) {
    const VectorXd x0 = polar(rr(rng), th(rng));
    const MapResult m1 = a.time_T_map(s, x0);
    const MapResult m2 = b.time_T_map(s, x0);
    CHECK((m1.x - m2.x).norm() < 10 * 1e-9 * std::max(1.0, m1.x.norm()) * 10);
    const MapResult m = fine.time_T_map(s, x0);
    MatrixXd fd(2, 2);
    for (int j = 0; j < 2; ++j) {
      VectorXd xp = x0, xm = x0;
      xp[j] += 1e-6;
      xm[j] -= 1e-6;
      fd.col(j) = (fine.time_T_map(s, xp, false).x - fine.time_T_map(s, xm, false).x) / 2e-6;
    }
    CHECK((fd - m.tangent).norm() / m.tangent.norm() < 1e-4);
  }
}

TEST_CASE("normal displacement during a kick is proportional to eps") {
  const auto prog = dsl::parse_field(rs::source(0.05, 1.0));
  std::vector<double> C;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    double worst = 0.0;
    FlowSystem sys(prog, tight());
    for (int j = 0; j < 16; ++j) {
      const double s0 = 2 * kPi * j / 16;
      const PulseSchedule sched{1.0, 5.0, eps};
      std::vector<FlowSample> tr;
      sys.integrate(&sched, polar(1.0, s0), 0.0, 1.0, false, &tr);
      for (const auto& p : tr) worst = std::max(worst, std::abs(p.x.norm() - 1.0));
    }
    C.push_back(worst / eps);
  }
  MESSAGE("fitted C across eps: " << C[0] << ", " << C[1] << ", " << C[2]);
  for (double c : C) CHECK(c < 1.0);
  CHECK(std::abs(C[0] / C[2] - 1.0) < 0.05);
}
