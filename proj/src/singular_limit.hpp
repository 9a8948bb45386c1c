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

// Singular-limit circle maps f_a on S = R / 2L Z, defined implicitly by
//   int_s^{f_a(s)} b0 = t_hat(a) + rho - Lambda Psi(s),
// with lifted values throughout. Evaluation is templated on the real type so
// deep critical orbits can be followed in multiprecision.

#pragma once

#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dynsys.hpp"
#include "errors.hpp"
#include "limit_cycle.hpp"
#include "normal_form.hpp"
#include "spectral.hpp"

namespace shearlab {

using mpreal = boost::multiprecision::mpfr_float;

class SingularLimitMap {
 public:
  // b0 and psi have period 2L; t_hat maps [0, 2L) increasingly onto [0, 2 p0).
  SingularLimitMap(TrigSeries b0, TrigSeries psi, TrigSeries t_hat, double Lambda, double rho);

  // Closed-form reference family s + a + rho - Lambda Phi(s) on [0, 4 pi).
  static SingularLimitMap reference(double Lambda, double rho, double beta);
  // Family built from a computed Phi; t_hat from the cycle's flow-time table.
  static SingularLimitMap from_phi(const PhiFunction& phi, const LimitCycle& cycle, double Lambda);

  double Lambda() const noexcept { return Lambda_; }
  double rho() const noexcept { return rho_; }
  double two_L() const noexcept { return two_L_; }
  const TrigSeries& b0() const noexcept { return b0_; }
  const TrigSeries& B() const noexcept { return B_; }
  const TrigSeries& psi() const noexcept { return psi_; }
  const TrigSeries& t_hat() const noexcept { return t_hat_; }
  double b0_min() const noexcept { return b0_min_; }
  double b0_max() const noexcept { return b0_max_; }
  double K6() const noexcept { return b0_max_ / b0_min_; }

  double xi() const noexcept { return xi_; }
  void set_xi(double xi);

  // Lifted f_a(s).
  template <class R>
  R eval(const R& s, const R& a) const;
  double operator()(double s, double a) const { return eval<double>(s, a); }

  // f', f'' in s and d f / d a at (s, a) given f = f_a(s).
  template <class R>
  void derivatives(const R& s, const R& a, const R& f, R& d1, R& d2, R& da) const;
  struct Derivs {
    double f, d1, d2, da;
  };
  Derivs derivs(double s, double a) const;

  // Defining residual int_s^f b0 + Lambda Psi(s) - (t_hat(a) + rho).
  double residual(double s, double a, double f) const;

  // Critical points of f_a on [0, 2L): roots of b0 - Lambda Psi' (independent of a).
  const std::vector<double>& critical_points() const noexcept { return crit_; }
  // Critical points of Psi on [0, 2L) and the minimum gap between them.
  const std::vector<double>& psi_critical_points() const noexcept { return psi_crit_; }
  double psi_gap() const noexcept { return psi_gap_; }
  // Newton polish of a critical point in type R.
  template <class R>
  R polish_critical(double guess) const;

  // Circular distance from s to the critical set of Psi; C_xi membership.
  double distance_to_psi_critical(double s) const;
  bool in_C_xi(double s) const { return distance_to_psi_critical(s) < xi_; }
  double distance_to_critical(double s) const;

 private:
  void locate_critical_sets();

  TrigSeries b0_, B_, psi_, t_hat_;
  double Lambda_, rho_, two_L_;
  double b0_min_ = 1.0, b0_max_ = 1.0;
  double B_osc_ = 0.0;  // sup |B(s) - slope s|
  double xi_ = 0.0;
  std::vector<double> crit_, psi_crit_;
  double psi_gap_ = 0.0;
};

template <class R>
R SingularLimitMap::eval(const R& s, const R& a) const {
  using std::abs;
  R th[1], ps[1], bs[1];
  t_hat_.eval(a, 0, th);
  psi_.eval(s, 0, ps);
  B_.eval(s, 0, bs);
  const R target = bs[0] + th[0] + R(rho_) - R(Lambda_) * ps[0];
  const R m = R(B_.slope());
  // B(g) = m g + p(g), |p - a0| bounded: bracket the root.
  R lo = (target - R(B_osc_)) / m - R(1e-9) * (abs(target) + R(1));
  R hi = (target + R(B_osc_)) / m + R(1e-9) * (abs(target) + R(1));
  R g = (target - R(B_.a0())) / m;
  if (g <= lo || g >= hi) g = (lo + hi) / 2;
  const R tol = std::numeric_limits<R>::epsilon() * 8 * (abs(target) + R(1));
  for (int it = 0; it < 200; ++it) {
    R v[2];
    B_.eval(g, 1, v);
    const R h = v[0] - target;
    if (h > 0) hi = g;
    else lo = g;
    if (abs(h) <= tol) break;
    R gn = g - h / v[1];
    if (!(gn > lo && gn < hi)) gn = (lo + hi) / 2;
    if (abs(gn - g) <= std::numeric_limits<R>::epsilon() * 4 * (abs(g) + R(1))) {
      g = gn;
      break;
    }
    g = gn;
  }
  return g;
}

template <class R>
void SingularLimitMap::derivatives(const R& s, const R& a, const R& f, R& d1, R& d2, R& da) const {
  R bs[2], bf[2], ps[3], ba[1];
  b0_.eval(s, 1, bs);
  b0_.eval(f, 1, bf);
  psi_.eval(s, 2, ps);
  R th[2];
  t_hat_.eval(a, 1, th);
  const R L = R(Lambda_);
  d1 = (bs[0] - L * ps[1]) / bf[0];
  d2 = (bs[1] - L * ps[2] - bf[1] * d1 * d1) / bf[0];
  // d/da: t_hat'(a) / b0(f); t_hat' = b0(a) along the cycle.
  da = th[1] / bf[0];
  (void)ba;
}

template <class R>
R SingularLimitMap::polish_critical(double guess) const {
  using std::abs;
  R x = R(guess);
  const R L = R(Lambda_);
  for (int it = 0; it < 100; ++it) {
    R b[2], p[3];
    b0_.eval(x, 1, b);
    psi_.eval(x, 2, p);
    const R h = b[0] - L * p[1];
    const R dh = b[1] - L * p[2];
    const R dx = h / dh;
    x -= dx;
    if (abs(dx) <= std::numeric_limits<R>::epsilon() * 4 * (abs(x) + R(1))) break;
  }
  return x;
}

struct CriticalCurve {
  int k = 0;         // branch index (position in critical_points())
  double a = 0.0;
  std::vector<double> values;  // gamma_i(a) = f_a^i(v_k), i = 0..depth (lifted)
  std::vector<double> slopes;  // d/da gamma_i(a)
};

// Iterates and a-derivatives by d gamma_{i+1} = f'(gamma_i) d gamma_i + df/da(gamma_i).
CriticalCurve advance_critical_curve(const SingularLimitMap& map, int k, double a, int depth);

template <class R>
void critical_orbit(const SingularLimitMap& map, const R& c, const R& a, int depth,
                    std::vector<R>& values, std::vector<R>* slopes) {
  values.assign(1, c);
  if (slopes) slopes->assign(1, R(0));
  R s = c, ds = R(0);
  for (int i = 0; i < depth; ++i) {
    const R f = map.eval(s, a);
    if (slopes) {
      R d1, d2, da;
      map.derivatives(s, a, f, d1, d2, da);
      ds = d1 * ds + da;
      slopes->push_back(ds);
    }
    values.push_back(f);
    s = f;
  }
}

// Fitted constants of the critical-point estimates at one Lambda.
struct MorseEstimateFit {
  int q0 = 0;
  double K3 = 0.0;  // max |v_i - vbar_i| Lambda
  double K4 = 0.0;  // min |f''| / Lambda on C_xi(f_a)
  double K5 = 0.0;  // min |f'| / Lambda^{1/4} off C_{xi/2}(f_a)
  double K6 = 0.0;
};
MorseEstimateFit fit_morse_estimates(const SingularLimitMap& map, double a, int scan = 1 << 16);

// Largest ratio |d gamma_n/da(a)| / |d gamma_n/da(a')| over parameter pairs.
// n = 1 uses all of [a_lo, a_hi]; for n >= 2 the pairs come from intervals
// around sampled centres, shrunk until gamma_1..gamma_{n-1} avoid C_xi and
// gamma_{n-1} has image shorter than xi.
double fit_distortion(const SingularLimitMap& map, int k, double a_lo, double a_hi, int depth,
                      int samples = 9);

struct EmpiricalOptions {
  double tube_radius = 0.5;  // endpoints farther than half of this from the cycle are rejected
  int threads = 1;
};

struct EmpiricalMap {
  std::vector<double> s0;
  std::vector<double> s_end;   // arclength on [0, L) of the projected endpoint
  std::vector<double> offset;  // distance of the endpoint from the cycle
  double T = 0.0;
};

// Flow-extracted s-map: from gamma(s0), run the pulsed flow for
// T = rho + 2 p0 m + t_hat_a and project onto the cycle.
EmpiricalMap empirical_singular_limit(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                                      double epsilon, double rho, double t_hat_a, int m,
                                      const std::vector<double>& s0, const IntegratorConfig& config,
                                      const EmpiricalOptions& options = {});

// Sup over the grid of the circle distance (mod L) between the flow s-map and f_a.
double empirical_sup_distance(const EmpiricalMap& emp, const SingularLimitMap& map, double a,
                              double L);

// Degree-one circle map on [0, L) spline-interpolated from a flow s-map
// sampled on the uniform grid s0_j = j L / N.
class EmpiricalCircleMap {
 public:
  EmpiricalCircleMap(const EmpiricalMap& emp, double L);
  double L() const noexcept { return L_; }
  // Image in [0, L).
  double operator()(double s) const;

 private:
  double L_;
  PeriodicSpline disp_;  // lifted image minus s
};

// Fold coefficient of the flow-derived family: eps sigma / (|lambda_1| 2L).
double flow_fold_coefficient(double epsilon, const NormalFormData& nf);

// Grid export: s, f_a(s), f', f''.
void save_singular_limit_csv(const std::string& path, const SingularLimitMap& map, double a,
                             int points);

}  // namespace shearlab
