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
#include <random>

#include "errors.hpp"
#include "rs_oracle.hpp"
#include "singular_limit.hpp"

using namespace shearlab;
using Eigen::VectorXd;

namespace {
constexpr double kPi = std::numbers::pi;

IntegratorConfig tight() {
  IntegratorConfig c;
  c.abs_tol = c.rel_tol = 1e-12;
  return c;
}

LimitCycle rs_cycle(const dsl::FieldProgram& prog, int nodes = 256) {
  CycleOptions opt;
  opt.nodes = nodes;
  VectorXd g(2);
  g << 1.3, 0.0;
  return find_limit_cycle(prog, g, tight(), opt);
}

double rel(double x, double y) { return std::abs(x - y) / std::max(1e-12, std::abs(y)); }
}  // namespace

TEST_CASE("implicit solver reproduces the closed-form reference family") {
  const double rho = 1.0, beta = 3.0;
  for (double Lam : {0.0, 0.5, 50.0, 100.0, 200.0}) {
    const auto map = SingularLimitMap::reference(Lam, rho, beta);
    CHECK(map.two_L() == doctest::Approx(4 * kPi));
    double err = 0.0, res = 0.0;
    for (double a : {0.0, 0.7, 2.0, 5.5, 4 * kPi - 0.1}) {
      for (int j = 0; j < 1000; ++j) {
        const double s = 4 * kPi * j / 1000.0;
        const double f = map(s, a);
        err = std::max(err, std::abs(f - rs::singular_limit(s, a, rho, Lam, beta)));
        res = std::max(res, std::abs(map.residual(s, a, f)));
      }
    }
    CHECK(err < 1e-9);
    CHECK(res < 1e-12 * (1 + Lam));
    // Degree one on the lifted circle.
    CHECK(map(1.3 + 4 * kPi, 0.4) - map(1.3, 0.4) == doctest::Approx(4 * kPi).epsilon(1e-13));
  }
}

TEST_CASE("s and a derivatives match the closed form and central differences") {
  const double rho = 1.0, beta = -2.0, Lam = 100.0;
  const auto map = SingularLimitMap::reference(Lam, rho, beta);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 4 * kPi);
  double worst1 = 0, worst2 = 0, worsta = 0, worst_cf = 0;
  for (int k = 0; k < 100; ++k) {
    const double s = U(rng), a = U(rng);
    const auto d = map.derivs(s, a);
    worst_cf = std::max({worst_cf, std::abs(d.d1 - (1 - Lam * rs::phi_d1(s, rho, beta))),
                         std::abs(d.d2 + Lam * rs::phi_d2(s, rho, beta))});
    const double h = 1e-4;
    const double fd1 = (map(s + h, a) - map(s - h, a)) / (2 * h);
    const double fd2 = (map(s + h, a) - 2 * d.f + map(s - h, a)) / (h * h);
    const double fda = (map(s, a + h) - map(s, a - h)) / (2 * h);
    worst1 = std::max(worst1, std::abs(fd1 - d.d1) / std::max(1.0, std::abs(d.d1)));
    worst2 = std::max(worst2, std::abs(fd2 - d.d2) / std::max(1.0, std::abs(d.d2)));
    worsta = std::max(worsta, rel(fda, d.da));
    CHECK(d.da > 0);
  }
  CHECK(worst_cf < 1e-8);
  CHECK(worst1 < 1e-5);
  CHECK(worst2 < 1e-5);
  CHECK(worsta < 1e-5);
}

TEST_CASE("critical points agree with a brute-force sign scan") {
  const double rho = 1.0, beta = 1.0, Lam = 100.0;
  const auto map = SingularLimitMap::reference(Lam, rho, beta);
  const auto& crit = map.critical_points();
  REQUIRE(crit.size() == 4);
  // Independent oracle: sign changes of 1 - Lambda Phi' on 10^6 points.
  std::vector<double> brute;
  const int N = 1000000;
  auto h = [&](double s) { return 1 - Lam * rs::phi_d1(s, rho, beta); };
  double prev = h(0);
  for (int j = 1; j <= N; ++j) {
    const double s = 4 * kPi * j / N;
    const double cur = h(s);
    if ((cur > 0) != (prev > 0)) brute.push_back(s);
    prev = cur;
  }
  REQUIRE(brute.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(crit[i] - brute[i]) < 4 * kPi / N);
    CHECK(std::abs(map.derivs(crit[i], 0.3).d1) < 1e-9);
  }
  // Critical points of Phi: (pi - rho)/2 and (3 pi - rho)/2 plus 2 pi copies.
  REQUIRE(map.psi_critical_points().size() == 4);
  CHECK(map.psi_critical_points()[0] == doctest::Approx((kPi - rho) / 2).epsilon(1e-10));
  CHECK(map.psi_critical_points()[1] == doctest::Approx((3 * kPi - rho) / 2).epsilon(1e-10));
  // Below the existence threshold f_a is a diffeomorphism.
  const double thr = 1.0 / (2 * std::sin(0.5));
  CHECK(SingularLimitMap::reference(0.9 * thr, rho, beta).critical_points().empty());
  CHECK(SingularLimitMap::reference(1.1 * thr, rho, beta).critical_points().size() == 4);
}

TEST_CASE("Morse estimate constants are stable in Lambda") {
  std::vector<MorseEstimateFit> fits;
  for (double Lam : {50.0, 100.0, 200.0}) {
    const auto map = SingularLimitMap::reference(Lam, 1.0, 1.0);
    const auto fit = fit_morse_estimates(map, 0.0);
    CHECK(fit.q0 == 4);
    CHECK(fit.K4 > 0.1);
    CHECK(fit.K5 > 0.1);
    CHECK(fit.K6 == doctest::Approx(1.0));
    fits.push_back(fit);
  }
  for (const auto& f : fits) {
    CHECK(f.K3 / fits[0].K3 < 4.0);
    CHECK(fits[0].K3 / f.K3 < 4.0);
    // |v - vbar| ~ 1 / (Lambda |Phi''|) with |Phi''| = 2 sin(1/2) at rho = 1.
    CHECK(f.K3 == doctest::Approx(1.0 / (2 * std::sin(0.5))).epsilon(0.05));
  }
}

TEST_CASE("critical curves") {
  const double Lam = 100.0;
  const auto map = SingularLimitMap::reference(Lam, 1.0, 1.0);
  const double a = 1.234;
  for (int k = 0; k < 4; ++k) {
    const auto cc = advance_critical_curve(map, k, a, 6);
    REQUIRE(cc.values.size() == 7);
    CHECK(std::abs(map.derivs(cc.values[0], a).d1) < 1e-9);
    // d gamma_1 / da is df/da at the critical point.
    const double h = 1e-5;
    const double v = map.critical_points()[k];
    const double fd = (map(v, a + h) - map(v, a - h)) / (2 * h);
    CHECK(rel(cc.slopes[1], fd) < 1e-5);
    CHECK(cc.slopes[1] >= 1.0 / map.K6() - 1e-12);
    CHECK(cc.slopes[1] <= map.K6() + 1e-12);
    // Growth while the orbit avoids C_xi.
    for (int i = 1; i < 6; ++i) {
      if (map.in_C_xi(wrap(cc.values[i], map.two_L()))) break;
      CHECK(std::abs(cc.slopes[i + 1]) > std::pow(Lam, i / 5.0));
    }
    // Deeper slopes against finite differences of the iterated orbit.
    auto orbit = [&](double aa, int depth) {
      double s = v;
      for (int i = 0; i < depth; ++i) s = map(s, aa);
      return s;
    };
    const double fd3 = (orbit(a + 1e-7, 3) - orbit(a - 1e-7, 3)) / 2e-7;
    CHECK(rel(cc.slopes[3], fd3) < 1e-4);
  }
  CHECK_THROWS_AS(advance_critical_curve(map, 4, a, 3), Error);
  CHECK_THROWS_AS(advance_critical_curve(map, 0, a, 0), Error);
  const double D = fit_distortion(map, 0, a, a + map.xi(), 3);
  CHECK(D >= 1.0);
  CHECK(std::isfinite(D));
}

TEST_CASE("multiprecision orbit agrees with double precision at shallow depth") {
  const auto map = SingularLimitMap::reference(100.0, 1.0, 1.0);
  mpreal::default_precision(80);
  const mpreal c = map.polish_critical<mpreal>(map.critical_points()[1]);
  CHECK(std::abs(static_cast<double>(c) - map.critical_points()[1]) < 1e-14);
  std::vector<mpreal> mv, ms;
  critical_orbit<mpreal>(map, c, mpreal(0.5), 3, mv, &ms);
  const auto cc = advance_critical_curve(map, 1, 0.5, 3);
  for (int i = 0; i <= 3; ++i) {
    CHECK(static_cast<double>(mv[i]) == doctest::Approx(cc.values[i]).epsilon(1e-9));
    CHECK(static_cast<double>(ms[i]) == doctest::Approx(cc.slopes[i]).epsilon(1e-6));
  }
  // Defining residual at 80 digits.
  const mpreal f = map.eval<mpreal>(mpreal(2), mpreal(0.5));
  mpreal Bf[1], Bs[1], ps[1];
  map.B().eval(f, 0, Bf);
  map.B().eval(mpreal(2), 0, Bs);
  map.psi().eval(mpreal(2), 0, ps);
  const mpreal r = Bf[0] - Bs[0] + mpreal(100) * ps[0] - (mpreal(0.5) + mpreal(1));
  CHECK(abs(r) < mpreal("1e-70"));
}

TEST_CASE("family built from the computed Phi matches the reference") {
  const double lam = 0.1, beta = 2.0;
  const auto prog = dsl::parse_field(rs::source(lam, beta));
  const LimitCycle c = rs_cycle(prog);
  const MovingFrame fr = build_frame(c);
  const NormalFormData nf = compute_normal_form(prog, c, fr, tight());
  const PhiFunction ph = compute_phi(prog, c, fr, nf);
  const double eps = 0.01;
  const double Lam = flow_fold_coefficient(eps, nf);
  CHECK(Lam == doctest::Approx(eps * beta / lam).epsilon(1e-6));
  const auto map = SingularLimitMap::from_phi(ph, c, Lam);
  const auto ref = SingularLimitMap::reference(Lam, 1.0, beta);
  double err = 0.0;
  for (int j = 0; j < 200; ++j) {
    const double s = 4 * kPi * j / 200.0;
    err = std::max(err, std::abs(map(s, 0.8) - ref(s, 0.8)));
  }
  CHECK(err < 1e-6);
  // t_hat(a) is the flow time to gamma(a).
  for (double a : {0.5, 3.0, 7.0})
    CHECK(map.t_hat()(a) == doctest::Approx(c.time_at(a)).epsilon(1e-6));
  const auto path = std::filesystem::temp_directory_path() / "sl_map.csv";
  save_singular_limit_csv(path.string(), map, 0.8, 64);
  CHECK(std::filesystem::file_size(path) > 100);
  std::filesystem::remove(path);
}

TEST_CASE("flow-extracted map: rigid shift without forcing and convergence in m") {
  const double lam = 0.1, beta = 0.5;
  const auto prog = dsl::parse_field(rs::source(lam, beta));
  const LimitCycle c = rs_cycle(prog);
  std::vector<double> grid;
  for (int j = 0; j < 16; ++j) grid.push_back(2 * kPi * j / 16.0);
  IntegratorConfig cfg;
  cfg.abs_tol = cfg.rel_tol = 1e-11;

  const double a = 0.6;
  const auto shift = empirical_singular_limit(prog, c, 0.0, 1.0, a, 1, grid, cfg);
  for (std::size_t j = 0; j < grid.size(); ++j)
    CHECK(circle_distance(shift.s_end[j], grid[j] + 1.0 + a, 2 * kPi) < 1e-7);

  const double eps = 1e-3;
  const auto map = SingularLimitMap::reference(eps * beta / lam, 1.0, beta);
  double prev = 1e300;
  std::vector<double> sup;
  for (int m : {1, 2, 3}) {
    const auto emp = empirical_singular_limit(prog, c, eps, 1.0, a, m, grid, cfg);
    sup.push_back(empirical_sup_distance(emp, map, a, 2 * kPi));
    CHECK(sup.back() < prev);
    prev = sup.back();
  }
  // Residual phase decays like exp(-lambda 2 p0 m).
  const double ratio = sup[2] / sup[0];
  const double pred = std::exp(-lam * 2 * (2 * kPi) * 2);
  CHECK(ratio / pred < 5.0);
  CHECK(pred / ratio < 5.0);

  CHECK_THROWS_AS(empirical_singular_limit(prog, c, eps, 1.0, a, 0, grid, cfg), Error);
  EmpiricalOptions tiny;
  tiny.tube_radius = 1e-9;
  CHECK_THROWS_AS(empirical_singular_limit(prog, c, eps, 1.0, a, 1, grid, cfg, tiny), Error);
}
