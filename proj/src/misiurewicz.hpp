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

// Misiurewicz certification of singular-limit maps: expansion away from the
// critical set, the nested parameter-interval search for critical orbits that
// avoid C_xi(Psi), binding periods, transversality sums and mixing.
//
// Parameter intervals shrink geometrically with depth, so the search and every
// check that follows critical orbits run in MPFR arithmetic. The MPFR default
// precision is process-wide; these routines set and restore it and must not
// run concurrently with other multiprecision work.

#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "singular_limit.hpp"

namespace shearlab {

// Sets the MPFR default precision for the lifetime of the guard.
class PrecisionGuard {
 public:
  explicit PrecisionGuard(unsigned digits10);
  ~PrecisionGuard();
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  unsigned saved_;
};

// Decimal digits needed to follow critical orbits for `depth` iterates.
unsigned search_digits(const SingularLimitMap& map, int depth);

struct MisiurewiczOptions {
  int n_target = 40;         // certified clearance depth
  double Lambda3 = 10.0;     // below this the search declines to start
  double a_center = 0.0;     // centre of the initial parameter interval
  double D1 = 0.0;           // 0 = fitted on the initial interval
  int max_steps = 100000;
  int max_restarts = 32;     // after a dead end the initial interval slides right by its length
  unsigned digits10 = 0;     // 0 = search_digits(map, n_target + 10)
};

struct SearchStep {
  int step = 0;
  std::string action;  // advance | halve | restart
  std::string lo;      // full-precision left endpoint
  double width = 0.0;
  std::vector<int> depth;
  double removed = 0.0;  // fraction of the interval removed by preimages of C_xi
  double image_ratio = 0.0;  // min over advanced branches of length(image) / (3 D1 q0 xi)
};

struct AdmissibleConfiguration {
  mpreal lo, hi;
  std::vector<int> depth;
  std::vector<SearchStep> history;
};

struct SearchResult {
  mpreal a_star;
  AdmissibleConfiguration config;
  double D1 = 1.0;
  double K6 = 1.0;
  double delta0_length = 0.0;
  bool standing_assumption = false;  // 3 D1 K6^2 q0 xi < d~ / 2
  int restarts = 0;
  unsigned digits10 = 0;
  double clearance = 0.0;  // min over k, 1 <= i <= n_target of dist(f^i(c_k), C_xi) by re-iteration
};

SearchResult search_admissible_parameter(const SingularLimitMap& map,
                                         const MisiurewiczOptions& options = {});

// Minimum over critical points and 1 <= i <= depth of the distance from the
// i-th iterate to C_xi(Psi) (negative inside).
double critical_orbit_clearance(const SingularLimitMap& map, const mpreal& a, int depth);

void write_search_trace_csv(const std::string& path, const AdmissibleConfiguration& config);

struct ExpansionOptions {
  double U_radius = 0.0;  // U = C_{U_radius}(f_a); 0 = xi / 2
  int horizon = 40;
  int grid = 4096;
  int M0 = 0;  // 0 = smallest M0 for which every clause holds
  int c2_samples = 48;  // per critical point and side
};

struct ExpansionReport {
  double U_radius = 0.0;
  int horizon = 0;
  int M0 = 0;
  double lambda0 = 0.0;
  double d0 = 0.0;
  bool A1 = false, A2 = false, B = false, C1 = false, C2 = false;
  double B_margin = 0.0;  // min distance of critical orbits (1..horizon) from U
  double C1_min_f2 = 0.0;
  double C2_margin = 0.0;  // min of log|(f^p)'| + log d0 - lambda0 p / 3
  int C2_samples = 0;
  int C2_no_return = 0;
  bool mixing_rate = false;  // e^{lambda0 / 3} > 2
  std::vector<double> rate_from;  // min rate over m >= M for M = 1..horizon
};

ExpansionReport verify_expansion(const SingularLimitMap& map, const mpreal& a,
                                 const ExpansionOptions& options = {});

struct BindingSample {
  int k = 0;
  double offset = 0.0;  // s - c
  int m = 0;            // 0 when the cap was reached
  double log_derivative = 0.0;
};

struct BindingReport {
  std::vector<BindingSample> samples;
  bool m_above_one = false;
  double K7 = 0.0;
  int skipped = 0;
};

// m(s) for one point; s == c is rejected.
BindingSample binding_time(const SingularLimitMap& map, const mpreal& a, int k, const mpreal& s,
                           int cap);
BindingReport check_binding(const SingularLimitMap& map, const mpreal& a, int samples = 16,
                            int cap = 40);

struct TransversalityReport {
  std::vector<double> sums;
  std::vector<double> first_terms;
  std::vector<double> tail_bounds;
  bool pass = false;
};

TransversalityReport check_transversality(const SingularLimitMap& map, const mpreal& a,
                                          int terms = 50, double Lambda_min = 10.0);

struct MixingReport {
  int r = 0;
  std::vector<std::vector<int>> Q;
  int N = 0;  // smallest N with Q^N > 0; 0 when none up to the cap
  bool applicable = false;
  bool verdict = false;
};

MixingReport check_mixing(const SingularLimitMap& map, const mpreal& a, int cap = 64);

struct MisiurewiczReport {
  SearchResult search;
  ExpansionReport expansion;
  BindingReport binding;
  TransversalityReport transversality;
  MixingReport mixing;
  int n_target = 0;
};

MisiurewiczReport certify(const SingularLimitMap& map, const MisiurewiczOptions& options = {},
                          const ExpansionOptions& expansion = {});

nlohmann::json to_json(const MisiurewiczReport& report, const SingularLimitMap& map);

// Nondegeneracy at turns: finite-difference gradient of the flow-extracted
// s-map in the initial normal displacement, at each critical point.
std::vector<double> turn_nondegeneracy(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                                       const std::vector<double>& points, double epsilon,
                                       double rho, double t_hat_a, int m,
                                       const IntegratorConfig& config, double h = 1e-5);

}  // namespace shearlab
