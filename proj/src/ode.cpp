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

#include "ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace shearlab {
namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace

void IntegratorConfig::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
    throw Error(ErrorCode::InvalidArgument, "integrator tolerances must be positive");
  if (max_step < 0.0 || initial_step < 0.0 || max_steps <= 0)
    throw Error(ErrorCode::InvalidArgument, "integrator step limits must be non-negative");
}

void DenseStep::eval(double t, std::span<double> out) const {
  const double s = (t - t0_) / h_;
  const double s1 = 1.0 - s;
  const int n = dim_;
  for (int i = 0; i < n; ++i)
    out[i] = rcont_[i] +
             s * (rcont_[n + i] +
                  s1 * (rcont_[2 * n + i] + s * (rcont_[3 * n + i] + s1 * rcont_[4 * n + i])));
}

double DenseStep::eval(double t, int i) const {
  const double s = (t - t0_) / h_;
  const double s1 = 1.0 - s;
  const int n = dim_;
  return rcont_[i] +
         s * (rcont_[n + i] +
              s1 * (rcont_[2 * n + i] + s * (rcont_[3 * n + i] + s1 * rcont_[4 * n + i])));
}

Dopri5::Dopri5(IntegratorConfig cfg) : cfg_(cfg) { cfg_.validate(); }

double Dopri5::initial_step(const OdeRhs& rhs, double t0, std::span<const double> y, double dir) {
  // Hairer's starting-step heuristic.
  const std::size_t m = y.size();
  auto& f0 = k_[0];
  double dnf = 0.0, dny = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y[i]);
    dnf += (f0[i] / sk) * (f0[i] / sk);
    dny += (y[i] / sk) * (y[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  if (cfg_.max_step > 0.0) h = std::min(h, cfg_.max_step);
  for (std::size_t i = 0; i < m; ++i) ytmp_[i] = y[i] + dir * h * f0[i];
  rhs(t0 + dir * h, ytmp_, k_[1]);
  double der2 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y[i]);
    der2 += ((k_[1][i] - f0[i]) / sk) * ((k_[1][i] - f0[i]) / sk);
  }
  der2 = std::sqrt(der2 / static_cast<double>(m)) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf / static_cast<double>(m)));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
  h = std::min(100.0 * std::abs(h), h1);
  if (cfg_.max_step > 0.0) h = std::min(h, cfg_.max_step);
  return h;
}

OdeStats Dopri5::integrate(const OdeRhs& rhs, double t0, double t1, std::span<double> y,
                           const StepObserver& observer, double h_hint) {
  OdeStats st;
  st.t = t0;
  const std::size_t m = y.size();
  if (t1 == t0) return st;
  for (auto& k : k_) k.resize(m);
  ytmp_.resize(m);
  y1_.resize(m);
  yerr_.resize(m);
  rcont_.resize(5 * m);

  for (std::size_t i = 0; i < m; ++i)
    if (!std::isfinite(y[i])) throw Error(ErrorCode::Integration, "non-finite initial state");

  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  double t = t0;
  rhs(t, y, k_[0]);
  ++st.evals;
  double h = h_hint > 1e-12 * std::max(1.0, span) ? std::min(h_hint, span) : (cfg_.initial_step > 0.0 ? cfg_.initial_step : initial_step(rhs, t0, y, dir));
  if (cfg_.max_step > 0.0) h = std::min(h, cfg_.max_step);
  double facold = 1e-4;
  bool last_rejected = false;
  constexpr double safe = 0.9, beta = 0.04, facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;
  const double expo1 = 0.2 - beta * 0.75;
  auto& k1 = k_[0];
  auto& k2 = k_[1];
  auto& k3 = k_[2];
  auto& k4 = k_[3];
  auto& k5 = k_[4];
  auto& k6 = k_[5];
  auto& k7 = k_[6];

  DenseStep dense;
  dense.dim_ = static_cast<int>(m);
  dense.rcont_ = rcont_.data();
  dense.end_ = y1_.data();

  for (;;) {
    if (st.steps + st.rejected >= cfg_.max_steps)
      throw Error(ErrorCode::Integration, "maximum number of integration steps exceeded");
    const double remaining = std::abs(t1 - t);
    bool final_step = false;
    if (h >= remaining * (1.0 - 1e-12) || remaining - h < 1e-12 * span) {
      h = remaining;
      final_step = true;
    }
    const double min_h = 1e-14 * std::max(1.0, std::abs(t));
    if (h < min_h) throw Error(ErrorCode::Integration, "step size underflow at t = " + std::to_string(t));
    const double hs = dir * h;

    for (std::size_t i = 0; i < m; ++i) ytmp_[i] = y[i] + hs * a21 * k1[i];
    rhs(t + c2 * hs, ytmp_, k2);
    for (std::size_t i = 0; i < m; ++i) ytmp_[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * hs, ytmp_, k3);
    for (std::size_t i = 0; i < m; ++i) ytmp_[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * hs, ytmp_, k4);
    for (std::size_t i = 0; i < m; ++i)
      ytmp_[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * hs, ytmp_, k5);
    for (std::size_t i = 0; i < m; ++i)
      ytmp_[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double tph = final_step ? t1 : t + hs;
    rhs(tph, ytmp_, k6);
    for (std::size_t i = 0; i < m; ++i)
      y1_[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    rhs(tph, y1_, k7);
    st.evals += 6;

    double err = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < m; ++i) {
      const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sk = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y[i]), std::abs(y1_[i]));
      err += (e / sk) * (e / sk);
      finite = finite && std::isfinite(y1_[i]);
    }
    err = std::sqrt(err / static_cast<double>(m));
    if (!finite || !std::isfinite(err)) {
      // Treat as a failed step; shrink hard.
      ++st.rejected;
      h *= 0.1;
      last_rejected = true;
      continue;
    }

    const double fac11 = std::pow(err, expo1);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(facold, beta);
      fac = std::clamp(fac / safe, facc2, facc1);
      double hnew = h / fac;
      facold = std::max(err, 1e-4);
      ++st.steps;

      for (std::size_t i = 0; i < m; ++i) {
        const double ydiff = y1_[i] - y[i];
        const double bspl = hs * k1[i] - ydiff;
        rcont_[i] = y[i];
        rcont_[m + i] = ydiff;
        rcont_[2 * m + i] = bspl;
        rcont_[3 * m + i] = ydiff - hs * k7[i] - bspl;
        rcont_[4 * m + i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      dense.t0_ = t;
      dense.h_ = hs;
      const double tnew = final_step ? t1 : t + hs;
      bool keep_going = true;
      if (observer) keep_going = observer(dense);
      std::copy(y1_.begin(), y1_.end(), y.begin());
      std::swap(k1, k7);
      t = tnew;
      st.last_h = cfg_.max_step > 0.0 ? std::min(hnew, cfg_.max_step) : hnew;
      st.t = t;
      if (!keep_going) {
        st.stopped = true;
        return st;
      }
      if (final_step) return st;
      if (cfg_.max_step > 0.0) hnew = std::min(hnew, cfg_.max_step);
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      h = hnew;
    } else {
      h /= std::min(facc1, fac11 / safe);
      ++st.rejected;
      last_rejected = true;
    }
  }
}

}  // namespace shearlab
