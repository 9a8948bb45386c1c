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

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "errors.hpp"
#include "misiurewicz.hpp"
#include "rs_oracle.hpp"

using namespace shearlab;

namespace {
constexpr double kPi = std::numbers::pi;

// Cached certification of the reference family, shared by several cases.
const SearchResult& certified(double Lam) {
  static std::map<double, SearchResult> cache;
  auto it = cache.find(Lam);
  if (it == cache.end()) {
    const auto map = SingularLimitMap::reference(Lam, 1.0, 1.0);
    it = cache.emplace(Lam, search_admissible_parameter(map)).first;
  }
  return it->second;
}

// Direct-iteration oracle at higher precision than the search used.
double direct_clearance(const SingularLimitMap& map, const mpreal& a, int depth, unsigned digits) {
  PrecisionGuard g(digits);
  double best = 1e300;
  for (double v : map.critical_points()) {
    mpreal x = map.polish_critical<mpreal>(v);
    const mpreal aa(a);
    for (int i = 1; i <= depth; ++i) {
      x = map.eval<mpreal>(x, aa);
      const mpreal P(map.two_L());
      const double w = static_cast<double>(x - P * floor(x / P));
      best = std::min(best, map.distance_to_psi_critical(w) - map.xi());
    }
  }
  return best;
}
}  // namespace

TEST_CASE("admissible parameter search certifies 40-iterate clearance") {
  const auto map = SingularLimitMap::reference(100.0, 1.0, 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  const auto& res = certified(100.0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("search: " << secs << " s, restarts " << res.restarts << ", steps "
                     << res.config.history.size() << ", D1 " << res.D1);
  CHECK(secs < 120.0);
  CHECK(res.clearance > 0);
  CHECK(direct_clearance(map, res.a_star, 40, res.digits10 + 30) > 0);
  CHECK(res.standing_assumption);
  CHECK(res.delta0_length == doctest::Approx(3 * res.D1 * 4 * map.xi()));
  // Nested intervals: widths never grow.
  double w = 1e300;
  for (const auto& s : res.config.history) {
    if (s.action == "restart") w = 1e300;
    CHECK(s.width <= w * (1 + 1e-12));
    w = s.width;
  }
}

TEST_CASE("measure removed per advance on a two-critical-point family") {
  // s + a + rho - Lambda (cos(s + rho) - cos s) on a circle of length 2 pi.
  const double P = 2 * kPi, rho = 1.0;
  TrigSeries psi(P, 0.0, {std::cos(rho) - 1.0}, {-std::sin(rho)});
  const SingularLimitMap map(TrigSeries::constant(P, 1.0), psi, TrigSeries(P, 0.0, {}, {}, 1.0),
                             100.0, rho);
  REQUIRE(map.critical_points().size() == 2);
  MisiurewiczOptions opt;
  opt.n_target = 20;
  const auto res = search_admissible_parameter(map, opt);
  int counted = 0;
  for (const auto& s : res.config.history) {
    if (s.action != "advance" || s.image_ratio < 1.0) continue;
    ++counted;
    CHECK(s.removed <= 2.0 / 3.0);
  }
  CHECK(counted > 0);
}

TEST_CASE("search preconditions") {
  const auto small = SingularLimitMap::reference(5.0, 1.0, 1.0);
  try {
    search_admissible_parameter(small);
    FAIL("expected a precondition error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Precondition);
  }
  const auto diffeo = SingularLimitMap::reference(0.5, 1.0, 1.0);
  MisiurewiczOptions opt;
  opt.Lambda3 = 0.1;
  CHECK_THROWS_AS(search_admissible_parameter(diffeo, opt), Error);
}

TEST_CASE("expansion outside U and inside-U clauses") {
  const auto map = SingularLimitMap::reference(100.0, 1.0, 1.0);
  const auto& res = certified(100.0);
  PrecisionGuard g(res.digits10);
  const auto e = verify_expansion(map, res.a_star);
  MESSAGE("lambda0 " << e.lambda0 << " d0 " << e.d0 << " C2 margin " << e.C2_margin
                     << " no-return " << e.C2_no_return << "/" << e.C2_samples);
  CHECK(e.A1);
  CHECK(e.A2);
  CHECK(e.B);
  CHECK(e.U_radius == doctest::Approx(0.5 * map.xi()));
  CHECK(e.C1);
  CHECK(e.C2);
  CHECK(e.mixing_rate);
  CHECK(e.lambda0 > std::log(8.0));
  CHECK(e.d0 > 0);
  CHECK(e.d0 <= 1);
  // (C1) through Lemma bound: |f''| >= K4 Lambda on U.
  CHECK(e.C1_min_f2 / map.Lambda() > 0.1);
  // A rotation-like diffeomorphism has no expansion.
  const auto rot = SingularLimitMap::reference(0.1, 1.0, 1.0);
  CHECK_FALSE(verify_expansion(rot, mpreal(0.3)).A1);
}

TEST_CASE("binding periods") {
  std::vector<double> K7;
  for (double Lam : {50.0, 100.0, 200.0}) {
    const auto map = SingularLimitMap::reference(Lam, 1.0, 1.0);
    const auto& res = certified(Lam);
    PrecisionGuard g(res.digits10);
    const auto b = check_binding(map, res.a_star);
    CHECK(b.m_above_one);
    CHECK(b.K7 > 0);
    CHECK(b.samples.size() == 4 * 2 * 16);
    MESSAGE("Lambda " << Lam << " K7 " << b.K7 << " skipped " << b.skipped);
    K7.push_back(b.K7);
    const mpreal c = map.polish_critical<mpreal>(map.critical_points()[0]);
    CHECK_THROWS_AS(binding_time(map, res.a_star, 0, c, 40), Error);
  }
  // The constant is a Lambda-uniform lower bound: it must not decay as Lambda grows.
  for (double k : K7) CHECK(k > K7[0] / 4.0);
}

TEST_CASE("transversality sums") {
  const auto map = SingularLimitMap::reference(100.0, 1.0, 1.0);
  const auto& res = certified(100.0);
  PrecisionGuard g(res.digits10);
  const auto t = check_transversality(map, res.a_star);
  REQUIRE(t.sums.size() == 4);
  CHECK(t.pass);
  for (std::size_t k = 0; k < 4; ++k) {
    // K6 = 1: the first term is exactly 1 and later terms are a small geometric tail.
    CHECK(t.first_terms[k] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(t.sums[k]) > 0.5);
    CHECK(t.tail_bounds[k] < 1e-20);
  }
  const auto tiny = SingularLimitMap::reference(2.0, 1.0, 1.0);
  CHECK_THROWS_AS(check_transversality(tiny, mpreal(0.0)), Error);
}

TEST_CASE("mixing matrix") {
  const auto map = SingularLimitMap::reference(100.0, 1.0, 1.0);
  const auto& res = certified(100.0);
  PrecisionGuard g(res.digits10);
  const auto m = check_mixing(map, res.a_star);
  CHECK(m.r == 4);
  CHECK(m.applicable);
  CHECK(m.verdict);
  CHECK(m.N == 1);
  for (const auto& row : m.Q)
    for (int x : row) CHECK(x == 1);
  const auto none = check_mixing(SingularLimitMap::reference(0.5, 1.0, 1.0), mpreal(0));
  CHECK(none.r == 0);
  CHECK_FALSE(none.applicable);
  CHECK_FALSE(none.verdict);
}

TEST_CASE("report export") {
  const auto map = SingularLimitMap::reference(100.0, 1.0, 1.0);
  MisiurewiczReport rep;
  rep.search = certified(100.0);
  rep.n_target = 40;
  PrecisionGuard g(rep.search.digits10);
  rep.expansion = verify_expansion(map, rep.search.a_star);
  rep.mixing = check_mixing(map, rep.search.a_star);
  const auto j = to_json(rep, map);
  CHECK(j["q0"] == 4);
  CHECK(j["orbit_clearance"]["N_max"] == 40);
  CHECK(j["a_star_digits"].get<std::string>().size() > 60);
  const auto path = std::filesystem::temp_directory_path() / "mis_trace.csv";
  write_search_trace_csv(path.string(), rep.search.config);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "step,lo,hi_minus_lo,depths,action,removed");
  std::filesystem::remove(path);
}

TEST_CASE("turn nondegeneracy from the flow") {
  const auto prog = dsl::parse_field(rs::source(0.1, 2.0));
  CycleOptions opt;
  opt.nodes = 256;
  IntegratorConfig cfg;
  cfg.abs_tol = cfg.rel_tol = 1e-11;
  Eigen::VectorXd g(2);
  g << 1.3, 0.0;
  const LimitCycle c = find_limit_cycle(prog, g, cfg, opt);
  const auto grad = turn_nondegeneracy(prog, c, {1.0, 2.5}, 0.01, 1.0, 0.3, 2, cfg);
  REQUIRE(grad.size() == 2);
  // A radial offset z decays as z e^{-lam t} and shifts the phase by (beta / lam)(1 - e^{-lam T}) z.
  const double T = 1.0 + 2 * (2 * kPi) * 2 + 0.3;
  for (double x : grad) CHECK(x == doctest::Approx(2.0 / 0.1 * (1 - std::exp(-0.1 * T))).epsilon(0.05));
}
