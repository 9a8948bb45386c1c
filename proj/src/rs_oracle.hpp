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

// The radial-shear reference system: in polar coordinates
//   r' = -lam (r - 1),   theta' = 1 + beta (r - 1),
// forced by F = sin(theta) times the outward radial unit vector. Its unit
// circle cycle and every normal-form quantity are known in closed form.

#pragma once

#include <cmath>
#include <numbers>
#include <string>

namespace shearlab::rs {

inline std::string source(double lam, double beta) {
  char buf[96];
  std::string s = "# radial-shear reference system\n";
  std::snprintf(buf, sizeof buf, "param lam = %.17g;\n", lam);
  s += buf;
  std::snprintf(buf, sizeof buf, "param beta = %.17g;\n", beta);
  s += buf;
  s +=
      "let r = sqrt(x1^2 + x2^2);\n"
      "let w = 1 + beta*(r - 1);\n"
      "f1 = -lam*(r - 1)*x1/r - w*x2;\n"
      "f2 = -lam*(r - 1)*x2/r + w*x1;\n"
      "F1 = (x2/r)*(x1/r);\n"
      "F2 = (x2/r)*(x2/r);\n";
  return s;
}

inline double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

// Phi(s0) = sign(beta) (cos(s0 + rho) - cos(s0)) and its derivatives.
inline double phi(double s, double rho, double beta) {
  return sign(beta) * (std::cos(s + rho) - std::cos(s));
}
inline double phi_d1(double s, double rho, double beta) {
  return sign(beta) * (-std::sin(s + rho) + std::sin(s));
}
inline double phi_d2(double s, double rho, double beta) {
  return sign(beta) * (-std::cos(s + rho) + std::cos(s));
}

inline double shear_integral(double beta) { return -4.0 * std::numbers::pi * beta; }
inline double shear_factor(double beta) { return 4.0 * std::numbers::pi * std::abs(beta); }

// Lambda = eps * sigma / |lambda_1|.
inline double hyperbolicity(double eps, double lam, double beta) {
  return eps * shear_factor(beta) / lam;
}

// Lifted singular-limit map s + a + rho - Lambda Phi(s).
inline double singular_limit(double s, double a, double rho, double Lambda, double beta) {
  return s + a + rho - Lambda * phi(s, rho, beta);
}

}  // namespace shearlab::rs
