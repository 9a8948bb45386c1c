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
#include <filesystem>
#include <numbers>

#include "errors.hpp"
#include "field_dsl.hpp"
#include "limit_cycle.hpp"
#include "rs_oracle.hpp"

using namespace shearlab;
using Eigen::VectorXd;

namespace {
constexpr double kPi = std::numbers::pi;

IntegratorConfig tight() {
  IntegratorConfig c;
  c.abs_tol = c.rel_tol = 1e-12;
  return c;
}

const char* kVanDerPol =
    "param mu = 1;\n"
    "f1 = x2;\n"
    "f2 = mu*(1 - x1^2)*x2 - x1;\n";

VectorXd v2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("reference cycle: period, length, multipliers") {
  const auto prog = dsl::parse_field(rs::source(0.05, 1.0));
  const LimitCycle c = find_limit_cycle(prog, v2(1.3, 0.2), tight());
  CHECK(std::abs(c.period() - 2 * kPi) < 1e-8);
  CHECK(std::abs(c.length() - 2 * kPi) < 1e-6);
  CHECK(c.closure_gap() < 1e-8);
  // The origin is the cycle point nearest the guess.
  const double th = std::atan2(0.2, 1.3);
  CHECK((c.point(0.0) - v2(std::cos(th), std::sin(th))).norm() < 1e-8);
  for (int j = 0; j < c.nodes(); j += 37) {
    CHECK(std::abs(c.node_points().col(j).norm() - 1.0) < 1e-8);
    CHECK(std::abs(c.node_tangents().col(j).norm() - 1.0) < 1e-12);
  }
  const MonodromyResult m = monodromy(prog, c, tight());
  CHECK(m.stable);
  CHECK(m.near_one == 1);
  std::vector<double> mods;
  for (const auto& mu : m.multipliers) mods.push_back(std::abs(mu));
  std::sort(mods.begin(), mods.end());
  CHECK(std::abs(mods[0] - std::exp(-0.05 * 2 * kPi)) < 1e-6);
  CHECK(std::abs(mods[1] - 1.0) < 1e-6);
  // Unit speed: flow time equals arclength.
  for (int k = 0; k < 20; ++k) {
    const double s = 0.31 * k;
    CHECK(std::abs(c.time_at(s) - s) < 1e-8);
  }
}

TEST_CASE("van der Pol cycle: closure, quadrature, Liouville, refinement") {
  const auto prog = dsl::parse_field(kVanDerPol);
  CycleOptions opt;
  opt.nodes = 512;
  const LimitCycle c = find_limit_cycle(prog, v2(2.0, 0.0), tight(), opt);
  CHECK(std::abs(c.period() - 6.6632868593231) < 1e-8);
  CHECK(c.closure_gap() < 1e-8);
  CHECK(c.shooting_residual() < 1e-10);
  FlowSystem sys(prog, tight());
  CHECK(std::abs(c.flow_time_quadrature(sys) - c.period()) < 1e-6);

  for (int j = 0; j < c.nodes(); j += 29) {
    const VectorXd t = c.tangent(c.node_s(j));
    CHECK(std::abs(t.norm() - 1.0) < 1e-8);
  }

  // det M = exp(int div f dt), with dt = ds / |f|.
  const MonodromyResult m = monodromy(prog, c, tight());
  double integral = 0.0;
  for (int j = 0; j < c.nodes(); ++j) {
    const VectorXd x = c.node_points().col(j);
    integral += (1.0 - x[0] * x[0]) / sys.intrinsic(x).norm();
  }
  integral *= c.length() / c.nodes();
  CHECK(std::abs(m.matrix.determinant() - std::exp(integral)) < 1e-6 * std::exp(integral) + 1e-9);
  CHECK(m.stable);

  // Node times agree with the spline reparametrisation and the direct flow.
  for (int k = 0; k < 20; ++k) {
    const double s = c.length() * (k + 0.3) / 20;
    const FlowSample fs = sys.integrate(nullptr, c.point(0.0), 0.0, c.time_at(s), false);
    CHECK((fs.x - c.point(s)).norm() < 1e-6);
  }

  opt.nodes = 1024;
  const LimitCycle c2 = find_limit_cycle(prog, v2(2.0, 0.0), tight(), opt);
  CHECK(std::abs(c2.length() - c.length()) < 1e-8);

  double dist = 1.0;
  const double s = c.project(c.point(1.7) + 1e-3 * VectorXd::Ones(2), &dist);
  CHECK(std::abs(s - 1.7) < 2e-3);
  CHECK(dist < 2e-3);
}

TEST_CASE("failures: equilibrium guess and non-hyperbolic cycle") {
  const auto vdp = dsl::parse_field(kVanDerPol);
  try {
    find_limit_cycle(vdp, v2(0.0, 0.0), tight());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Equilibrium);
  }
  const auto rot = dsl::parse_field("f1 = -x2;\nf2 = x1;\n");
  const LimitCycle c = find_limit_cycle(rot, v2(1.0, 0.0), tight());
  const MonodromyResult m = monodromy(rot, c, tight());
  CHECK(m.near_one == 2);
  CHECK_FALSE(m.stable);
}

TEST_CASE("save and load round trip") {
  const auto prog = dsl::parse_field(rs::source(0.05, 1.0));
  CycleOptions opt;
  opt.nodes = 128;
  const LimitCycle c = find_limit_cycle(prog, v2(1.0, 0.0), tight(), opt);
  const auto dir = std::filesystem::temp_directory_path() / "shearlab_cycle_test";
  std::filesystem::create_directories(dir);
  const std::string csv = (dir / "cycle.csv").string(), js = (dir / "cycle.json").string();
  c.save(csv, js, {{1.0, 0.0}, {0.73, 0.0}});
  const LimitCycle d = LimitCycle::load(csv, js);
  CHECK(d.nodes() == c.nodes());
  CHECK(d.period() == c.period());
  CHECK(d.length() == c.length());
  CHECK((d.node_points() - c.node_points()).norm() == 0.0);
  CHECK(std::abs(d.time_at(2.5) - c.time_at(2.5)) == 0.0);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(LimitCycle::load(csv, js), Error);
}
