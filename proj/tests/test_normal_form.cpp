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
#include "normal_form.hpp"
#include "rs_oracle.hpp"

using namespace shearlab;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
constexpr double kPi = std::numbers::pi;

IntegratorConfig tight() {
  IntegratorConfig c;
  c.abs_tol = c.rel_tol = 1e-12;
  return c;
}

VectorXd vec(std::initializer_list<double> v) {
  VectorXd x(v.size());
  int i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

LimitCycle rs_cycle(const dsl::FieldProgram& prog, int nodes = 256) {
  CycleOptions opt;
  opt.nodes = nodes;
  return find_limit_cycle(prog, vec({1.3, 0.0}), tight(), opt);
}

// Reference system with an extra, more strongly contracting direction x3.
std::string rs3_source(double lam, double beta, double kz) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "param lam = %.17g; param beta = %.17g; param kz = %.17g;\n"
                "let r = sqrt(x1^2 + x2^2);\n"
                "let w = 1 + beta*(r - 1);\n"
                "f1 = -lam*(r - 1)*x1/r - w*x2;\n"
                "f2 = -lam*(r - 1)*x2/r + w*x1;\n"
                "f3 = -kz*x3;\n"
                "F1 = (x2/r)*(x1/r); F2 = (x2/r)*(x2/r); F3 = 0;\n",
                lam, beta, kz);
  return buf;
}

const char* kVanDerPol =
    "param mu = 1;\n"
    "f1 = x2;\n"
    "f2 = mu*(1 - x1^2)*x2 - x1;\n"
    "F1 = 0; F2 = cos(x1);\n";
}  // namespace

TEST_CASE("frames on the unit circle") {
  const auto prog = dsl::parse_field(rs::source(0.05, 1.0));
  const LimitCycle c = rs_cycle(prog);
  for (FrameMethod m : {FrameMethod::ParallelTransport, FrameMethod::Frenet}) {
    const MovingFrame fr = build_frame(c, m);
    CHECK(fr.nodes() == 2 * c.nodes());
    CHECK(fr.orthonormality_error() < 1e-8);
    CHECK(fr.tangent_error(c) < 1e-8);
    CHECK(fr.skew_error() < 1e-6);
    CHECK(fr.closes_after_L);
    // Radial first row, curvature 1.
    for (int j = 0; j < fr.nodes(); j += 41) {
      const VectorXd x = c.node_points().col(j % c.nodes());
      CHECK((fr.E[j].row(0).transpose() - x).norm() < 1e-8);
      CHECK(std::abs(fr.K[j](0, 1) - 1.0) < 1e-6);
      CHECK(std::abs(fr.K[j](1, 0) + 1.0) < 1e-6);
    }
  }
}

TEST_CASE("normal form of the reference system") {
  const double lam = 0.05, beta = 1.0;
  const auto prog = dsl::parse_field(rs::source(lam, beta));
  const LimitCycle c = rs_cycle(prog);
  const MovingFrame fr = build_frame(c);
  const NormalFormData nf = compute_normal_form(prog, c, fr, tight());
  double eb0 = 0, eb1 = 0, eA = 0, eP = 0;
  for (int j = 0; j < nf.nodes(); ++j) {
    eb0 = std::max(eb0, std::abs(nf.b0(nf.s[j]) - 1.0));
    eb1 = std::max(eb1, std::abs(nf.b1[j][0] + beta));
    eA = std::max(eA, std::abs(nf.A_tilde[j](0, 0) + lam));
    eP = std::max(eP, std::abs(nf.P[j](0, 0) - 1.0));
  }
  CHECK(eb0 < 1e-6);
  CHECK(eb1 < 1e-4);
  CHECK(eA < 1e-6);
  CHECK(eP < 1e-6);
  CHECK(std::abs(nf.A[0] + lam) < 1e-6);
  CHECK(std::abs(nf.A[0] - std::log(nf.multipliers[0]) / (4 * kPi)) < 1e-12);
  CHECK(std::abs(nf.Sigma[0] - rs::shear_integral(beta)) < 1e-3);
  CHECK(std::abs(nf.sigma - rs::shear_factor(beta)) < 1e-3);
  CHECK(nf.mu[0] == 1.0);
  CHECK(nf.d[0] == doctest::Approx(-1.0));
  CHECK(nf.floquet_residual < 1e-5);
  for (int j = 0; j < nf.nodes(); j += 37) {
    const MatrixXd pred = nf.P[j] * (nf.s[j] * nf.A).array().exp().matrix().asDiagonal() *
                          nf.P[0].inverse();
    CHECK((nf.Y[j] - pred).norm() < 1e-5);
  }
}

TEST_CASE("time rescaling f -> 2 f halves b0 and Sigma") {
  const double lam = 0.05, beta = 1.0;
  const auto p1 = dsl::parse_field(rs::source(lam, beta));
  const std::string src2 =
      "param lam = 0.05; param beta = 1;\n"
      "let r = sqrt(x1^2 + x2^2);\nlet w = 1 + beta*(r - 1);\n"
      "f1 = 2*(-lam*(r - 1)*x1/r - w*x2);\nf2 = 2*(-lam*(r - 1)*x2/r + w*x1);\n";
  const auto p2 = dsl::parse_field(src2);
  const LimitCycle c1 = rs_cycle(p1), c2 = rs_cycle(p2);
  const NormalFormData n1 = compute_normal_form(p1, c1, build_frame(c1), tight());
  const NormalFormData n2 = compute_normal_form(p2, c2, build_frame(c2), tight());
  CHECK(std::abs(n2.b0(1.0) - 0.5 * n1.b0(1.0)) < 1e-8);
  CHECK(std::abs(n2.Sigma[0] - 0.5 * n1.Sigma[0]) < 1e-3);
  CHECK(std::abs(n2.A[0] - n1.A[0]) < 1e-6);
}

TEST_CASE("three-dimensional extension: two normal exponents") {
  const auto prog = dsl::parse_field(rs3_source(0.05, 1.0, 0.3));
  CycleOptions opt;
  opt.nodes = 256;
  const LimitCycle c = find_limit_cycle(prog, vec({1.3, 0.0, 0.1}), tight(), opt);
  const MovingFrame fr = build_frame(c);
  CHECK(fr.orthonormality_error() < 1e-8);
  CHECK(fr.skew_error() < 1e-6);
  CHECK(fr.closes_after_L);
  const NormalFormData nf = compute_normal_form(prog, c, fr, tight());
  REQUIRE(nf.normal_dim() == 2);
  CHECK(std::abs(nf.A[0] + 0.05) < 1e-6);
  CHECK(std::abs(nf.A[1] + 0.3) < 1e-6);
  CHECK(std::abs(nf.mu[1] - 0.05 / 0.3) < 1e-6);
  CHECK(std::abs(nf.sigma - rs::shear_factor(1.0)) < 1e-3);
  CHECK(std::abs(std::abs(nf.d[0]) - 1.0) < 1e-6);
  CHECK(std::abs(nf.d[1]) < 1e-6);
  const PhiFunction ph = compute_phi(prog, c, fr, nf);
  for (int k = 0; k < 50; ++k) {
    const double s = 4 * kPi * k / 50;
    CHECK(std::abs(ph.phi(s) - rs::phi(s, 1.0, 1.0)) < 1e-5);
  }
}

TEST_CASE("Phi on the reference system") {
  const auto prog = dsl::parse_field(rs::source(0.05, 1.0));
  const LimitCycle c = rs_cycle(prog);
  const MovingFrame fr = build_frame(c);
  const NormalFormData nf = compute_normal_form(prog, c, fr, tight());
  const PhiFunction ph = compute_phi(prog, c, fr, nf);
  double err = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const double s = 4 * kPi * k / 2000;
    err = std::max(err, std::abs(ph.phi(s) - rs::phi(s, 1.0, 1.0)));
    double v[3];
    ph.eval_direct(s, v);
    CHECK(std::abs(v[0] - ph.phi(s)) < 1e-8);
    CHECK(std::abs(v[1] - rs::phi_d1(s, 1.0, 1.0)) < 1e-6);
    CHECK(std::abs(v[2] - rs::phi_d2(s, 1.0, 1.0)) < 1e-6);
  }
  CHECK(err < 1e-5);
  CHECK(std::abs(ph.s_tilde(0.7) - 1.7) < 1e-8);
  REQUIRE(ph.critical_points.size() == 4);
  const double expect[4] = {(kPi - 1) / 2, (3 * kPi - 1) / 2, (kPi - 1) / 2 + 2 * kPi,
                            (3 * kPi - 1) / 2 + 2 * kPi};
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(ph.critical_points[i].s - expect[i]) < 1e-6);
    CHECK(std::abs(std::abs(ph.critical_points[i].phi2) - 2 * std::sin(0.5)) < 1e-6);
  }
  CHECK(ph.morse);
  const auto& k = ph.constants;
  CHECK(k.delta0 > 0.0);
  CHECK(k.delta0 < 0.5 * k.d1);
  CHECK(k.d0 > 0.0);
  CHECK(k.d2 > 0.0);
  CHECK(std::abs(k.d1 - kPi) < 1e-6);

  // Independence of lambda and beta (beta > 0).
  for (auto [lam, beta] : {std::pair{0.02, 1.0}, std::pair{0.05, 7.0}, std::pair{0.2, 0.3}}) {
    const auto p2 = dsl::parse_field(rs::source(lam, beta));
    const LimitCycle c2 = rs_cycle(p2);
    const MovingFrame f2 = build_frame(c2);
    const NormalFormData n2 = compute_normal_form(p2, c2, f2, tight());
    const PhiFunction ph2 = compute_phi(p2, c2, f2, n2);
    double diff = 0.0;
    for (int q = 0; q < 500; ++q) {
      const double s = 4 * kPi * q / 500;
      diff = std::max(diff, std::abs(ph2.phi(s) - ph.phi(s)));
    }
    CHECK(diff < 1e-6);
  }
}

TEST_CASE("zero forcing gives a degenerate Phi") {
  const auto prog = dsl::parse_field(
      "param lam = 0.05; param beta = 1;\n"
      "let r = sqrt(x1^2 + x2^2);\nlet w = 1 + beta*(r - 1);\n"
      "f1 = -lam*(r - 1)*x1/r - w*x2;\nf2 = -lam*(r - 1)*x2/r + w*x1;\n");
  const LimitCycle c = rs_cycle(prog);
  const MovingFrame fr = build_frame(c);
  const NormalFormData nf = compute_normal_form(prog, c, fr, tight());
  const PhiFunction ph = compute_phi(prog, c, fr, nf);
  CHECK(std::abs(ph.phi(1.0)) < 1e-14);
  CHECK_FALSE(ph.morse);
  CHECK(ph.critical_points.empty());
}

TEST_CASE("Morse analysis flags degenerate and tangential critical points") {
  // sin^3(s) / 3: Phi' = sin^2 cos has a double root at 0 without a sign change.
  const TrigSeries tangential(2 * kPi, 0.0, {0.0, 0.0, 0.0}, {0.25, 0.0, -1.0 / 12});
  const MorseAnalysis a = analyse_morse(tangential, 1e-6, 4096);
  CHECK_FALSE(a.morse);
  const TrigSeries good(2 * kPi, 0.0, {1.0}, {0.0});
  const MorseAnalysis b = analyse_morse(good, 1e-6, 4096);
  CHECK(b.morse);
  CHECK(b.critical_points.size() == 2);
  CHECK(std::abs(b.constants.d1 - kPi) < 1e-9);
}

TEST_CASE("van der Pol: frame invariance of sigma and node convergence") {
  const auto prog = dsl::parse_field(kVanDerPol);
  CycleOptions opt;
  opt.nodes = 512;
  const LimitCycle c = find_limit_cycle(prog, vec({2.0, 0.0}), tight(), opt);
  const MovingFrame pt = build_frame(c, FrameMethod::ParallelTransport);
  // This cycle has inflection points, where the Frenet normal is undefined.
  try {
    build_frame(c, FrameMethod::Frenet);
    FAIL("expected a degenerate Frenet frame");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Precondition);
  }
  const NormalFormData a = compute_normal_form(prog, c, pt, tight());
  CHECK(a.floquet_residual < 1e-5);

  // On a convex cycle both frames reduce to the signed normal.
  const auto convex = dsl::parse_field(
      "param mu = 0.3;\nf1 = x2;\nf2 = mu*(1 - x1^2)*x2 - x1;\nF1 = 0; F2 = cos(x1);\n");
  const LimitCycle cc = find_limit_cycle(convex, vec({2.0, 0.0}), tight(), opt);
  const NormalFormData ca = compute_normal_form(convex, cc, build_frame(cc), tight());
  const NormalFormData cb =
      compute_normal_form(convex, cc, build_frame(cc, FrameMethod::Frenet), tight());
  CHECK(std::abs(ca.sigma - cb.sigma) < 1e-5 * ca.sigma);
  CHECK(a.A[0] < 0.0);

  opt.nodes = 1024;
  const LimitCycle c2 = find_limit_cycle(prog, vec({2.0, 0.0}), tight(), opt);
  const NormalFormData a2 = compute_normal_form(prog, c2, build_frame(c2), tight());
  CHECK(std::abs(a2.Sigma[0] - a.Sigma[0]) < 1e-6 * std::abs(a.Sigma[0]));

  const PhiFunction ph = compute_phi(prog, c, pt, a);
  const auto dir = std::filesystem::temp_directory_path() / "shearlab_nf_test";
  std::filesystem::create_directories(dir);
  save_normal_form((dir / "nf.json").string(), (dir / "nf.csv").string(), a, &ph);
  CHECK(std::filesystem::file_size(dir / "nf.csv") > 1000);
  std::filesystem::remove_all(dir);
}
