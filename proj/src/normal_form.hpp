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

// Moving frame along the cycle, linear normal-form data (b0, b1, A~, Floquet
// pair P, A, shear integral) and the forcing profile Phi on the circle of
// length 2L. All sampled data lives on a uniform grid of 2N nodes on [0, 2L).

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "field_dsl.hpp"
#include "limit_cycle.hpp"
#include "ode.hpp"
#include "spectral.hpp"

namespace shearlab {

enum class FrameMethod { ParallelTransport, Frenet };

const char* to_string(FrameMethod m) noexcept;
FrameMethod frame_method_from_string(const std::string& s);

struct MovingFrame {
  FrameMethod method = FrameMethod::ParallelTransport;
  double L = 0.0;
  bool closes_after_L = true;   // E(s + L) = E(s); otherwise only after 2L
  Eigen::MatrixXd holonomy;     // normal block of E(L) E(0)^T before correction
  std::vector<Eigen::MatrixXd> E;  // rows e_1..e_n, e_n = unit tangent
  std::vector<Eigen::MatrixXd> K;  // E' E^T

  int dim() const { return E.empty() ? 0 : static_cast<int>(E.front().rows()); }
  int nodes() const { return static_cast<int>(E.size()); }
  double node_s(int j) const { return 2.0 * L * j / nodes(); }
  double orthonormality_error() const;
  double skew_error() const;
  double tangent_error(const LimitCycle& cycle) const;
};

MovingFrame build_frame(const LimitCycle& cycle, FrameMethod method = FrameMethod::ParallelTransport);

struct NormalFormData {
  double L = 0.0;
  std::vector<double> s;                 // grid on [0, 2L)
  TrigSeries b0;                         // period 2L
  std::vector<Eigen::VectorXd> b1;       // R^{n-1} per node
  std::vector<Eigen::MatrixXd> A_tilde;  // per node
  std::vector<Eigen::MatrixXd> P;        // per node
  std::vector<Eigen::MatrixXd> Y;        // dY/ds = A~ Y, Y(0) = I; one extra entry at 2L
  std::vector<Eigen::VectorXd> psi_n1;   // per node, used by exports
  Eigen::VectorXd A;                     // diagonal, descending, negative
  Eigen::VectorXd multipliers;           // normal Floquet multipliers over 2L
  Eigen::MatrixXd V;                     // P(0): eigenvectors of the normal monodromy
  Eigen::VectorXd Sigma;
  double sigma = 0.0;
  Eigen::VectorXd mu;
  Eigen::VectorXd d;
  double floquet_residual = 0.0;  // |Y(2L) - P(2L) e^{2LA} P(0)^{-1}|

  int normal_dim() const { return static_cast<int>(A.size()); }
  int nodes() const { return static_cast<int>(s.size()); }
  double two_L() const { return 2.0 * L; }
  double lambda1() const { return A[0]; }
};

NormalFormData compute_normal_form(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                                   const MovingFrame& frame, const IntegratorConfig& config = {});

struct CriticalPoint {
  double s = 0.0;
  double phi2 = 0.0;  // Phi'' at s
};

struct MorseConstants {
  double K2 = 0.0;      // C^3 norm bound
  double d0 = 0.0;      // |Phi''| lower bound on C_delta0
  double d1 = 0.0;      // minimum gap between critical points
  double d2 = 0.0;      // |Phi'| lower bound off C_delta0
  double delta0 = 0.0;  // 0 < delta0 < d1 / 2
};

struct PhiOptions {
  double rho = 1.0;
  double hessian_threshold = 1e-6;  // |Phi''| above this at every critical point
  int scan_points = 1 << 14;        // scan grid on [0, 2L) for critical points
};

struct PhiFunction {
  double rho = 1.0;
  double L = 0.0;
  TrigSeries b0, B;                  // B = int_0^s b0
  std::vector<TrigSeries> zeta, Z;   // components of zeta and their antiderivatives
  Eigen::VectorXd d;
  TrigSeries phi;                    // Phi as a series on [0, 2L)
  std::vector<CriticalPoint> critical_points;
  MorseConstants constants;
  bool morse = false;
  std::string morse_reason;

  double two_L() const { return 2.0 * L; }
  // Lifted s~ with int_{s0}^{s~} b0 = rho.
  double s_tilde(double s0) const;
  // Phi, Phi', Phi'' from zeta and s~ directly (independent of the fitted series).
  void eval_direct(double s0, double out[3]) const;
};

PhiFunction compute_phi(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                        const MovingFrame& frame, const NormalFormData& nf,
                        const PhiOptions& options = {});

// Critical points and Morse constants of a series on its period.
struct MorseAnalysis {
  std::vector<CriticalPoint> critical_points;
  MorseConstants constants;
  bool morse = false;
  std::string reason;
};
MorseAnalysis analyse_morse(const TrigSeries& psi, double hessian_threshold, int scan_points);

// JSON header plus CSV tables (s, b0, b1, P, zeta, Phi, Phi', Phi'').
void save_normal_form(const std::string& json_path, const std::string& csv_path,
                      const NormalFormData& nf, const PhiFunction* phi);

}  // namespace shearlab
