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

#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <numbers>

#include "spectral.hpp"

using namespace shearlab;

namespace {
constexpr double kPi = std::numbers::pi;
double g(double s) { return std::exp(std::sin(s)) + 0.3 * std::cos(3 * s); }
double g1(double s) { return std::cos(s) * std::exp(std::sin(s)) - 0.9 * std::sin(3 * s); }
}  // namespace

TEST_CASE("series from samples interpolates and differentiates spectrally") {
  const int N = 64;
  std::vector<double> v(N);
  for (int j = 0; j < N; ++j) v[j] = g(2 * kPi * j / N);
  const TrigSeries t = TrigSeries::from_samples(v, 2 * kPi);
  for (double s : {0.1, 1.234, 4.0, 6.2, -3.0, 20.0}) {
    CHECK(std::abs(t(s) - g(s)) < 1e-13);
    CHECK(std::abs(t.derivative(s, 1) - g1(s)) < 1e-12);
    CHECK(std::abs(t.derivative().operator()(s) - g1(s)) < 1e-12);
  }
  const TrigSeries I = t.antiderivative();
  CHECK(I(0.0) == doctest::Approx(0.0).scale(1));
  // Trapezoid over one period equals the mean times the period.
  double sum = 0;
  for (double x : v) sum += x;
  CHECK(std::abs(I(2 * kPi) - sum * 2 * kPi / N) < 1e-12);
  CHECK(std::abs(I.derivative(1.3, 1) - g(1.3)) < 1e-12);
}

TEST_CASE("closed-form series evaluates identically in multiprecision") {
  using mp = boost::multiprecision::mpfr_float;
  mp::default_precision(60);
  // cos(s + 1) - cos(s) on a 4 pi circle: harmonic 2 only.
  const TrigSeries phi(4 * kPi, 0.0, {0.0, std::cos(1.0) - 1.0}, {0.0, -std::sin(1.0)});
  for (double s : {0.3, 2.0, 7.5}) {
    CHECK(std::abs(phi(s) - (std::cos(s + 1) - std::cos(s))) < 1e-14);
    mp out[3];
    phi.eval(mp(s), 2, out);
    CHECK(std::abs(out[0].convert_to<double>() - phi(s)) < 1e-15);
    CHECK(std::abs(out[2].convert_to<double>() - (-std::cos(s + 1) + std::cos(s))) < 1e-14);
  }
}

TEST_CASE("periodic cubic spline reproduces smooth data to fourth order") {
  double prev = 1.0;
  for (int N : {64, 128, 256}) {
    std::vector<double> v(N);
    for (int j = 0; j < N; ++j) v[j] = g(2 * kPi * j / N);
    const PeriodicSpline sp(v, 2 * kPi);
    double err = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double s = 2 * kPi * (i + 0.37) / 1000;
      err = std::max(err, std::abs(sp.value(s) - g(s)));
      CHECK(std::abs(sp.d1(s) - g1(s)) < 50.0 / (N * N));
    }
    CHECK(sp.value(2 * kPi * 3 / N) == doctest::Approx(v[3]).epsilon(1e-13));
    CHECK(err < prev / 10.0);
    prev = err;
  }
}

TEST_CASE("circle helpers") {
  CHECK(circle_distance(0.1, 6.2, 2 * kPi) == doctest::Approx(0.1 + 2 * kPi - 6.2));
  CHECK(wrap(-0.5, 2.0) == doctest::Approx(1.5));
  CHECK(wrap(4.0, 2.0) == 0.0);
}
