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

// Periodic function representations on a circle of length P:
//  - TrigSeries: slope*s + a0 + sum_k a_k cos(k w s) + b_k sin(k w s), w = 2 pi / P,
//    evaluable in any floating type (double or multiprecision);
//  - PeriodicSpline: C^2 cubic spline through uniform samples.

#pragma once

#include <boost/math/constants/constants.hpp>
#include <cmath>
#include <span>
#include <vector>

namespace shearlab {

class TrigSeries {
 public:
  TrigSeries() = default;
  TrigSeries(double period, double a0, std::vector<double> a, std::vector<double> b,
             double slope = 0.0);

  // Interpolating series of uniform samples s_j = j P / N (N even). Harmonics
  // whose amplitude is below rel_trunc * max amplitude at the tail are dropped.
  static TrigSeries from_samples(std::span<const double> samples, double period,
                                 double rel_trunc = 1e-15);
  static TrigSeries constant(double period, double c) { return TrigSeries(period, c, {}, {}); }

  double period() const noexcept { return period_; }
  double slope() const noexcept { return slope_; }
  double a0() const noexcept { return a0_; }
  const std::vector<double>& cos_coefs() const noexcept { return a_; }
  const std::vector<double>& sin_coefs() const noexcept { return b_; }
  int harmonics() const noexcept { return static_cast<int>(a_.size()); }

  // out[j] = j-th derivative at s, j = 0..order.
  template <class R>
  void eval(const R& s, int order, R* out) const;

  double operator()(double s) const {
    double v;
    eval(s, 0, &v);
    return v;
  }
  double derivative(double s, int k) const;

  TrigSeries derivative() const;
  // Antiderivative vanishing at s = 0; the mean becomes the slope.
  TrigSeries antiderivative() const;
  TrigSeries scaled(double c) const;
  // Samples at s_j = j P / N.
  std::vector<double> sample(int N) const;
  // Sup of |f^{(k)}| estimated on a grid of N points.
  double sup_norm(int k, int N = 4096) const;

 private:
  double period_ = 1.0;
  double slope_ = 0.0;
  double a0_ = 0.0;
  std::vector<double> a_, b_;  // index k-1 holds harmonic k
};

template <class R>
void TrigSeries::eval(const R& s, int order, R* out) const {
  using std::cos;
  using std::sin;
  const R w = 2 * boost::math::constants::pi<R>() / R(period_);
  const R ws = w * s;
  const R c1 = cos(ws);
  const R s1 = sin(ws);
  for (int j = 0; j <= order; ++j) out[j] = R(0);
  out[0] = R(a0_) + R(slope_) * s;
  if (order >= 1) out[1] = R(slope_);
  R ck = c1, sk = s1;
  for (std::size_t k = 1; k <= a_.size(); ++k) {
    R a = R(a_[k - 1]);
    R b = R(b_[k - 1]);
    out[0] += a * ck + b * sk;
    if (order >= 1) {
      const R kw = R(static_cast<double>(k)) * w;
      R scale = kw;
      for (int j = 1; j <= order; ++j) {
        // d/ds (a cos + b sin) = kw (b cos - a sin)
        const R na = b;
        const R nb = -a;
        a = na;
        b = nb;
        out[j] += scale * (a * ck + b * sk);
        scale *= kw;
      }
    }
    const R cn = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = cn;
  }
}

class PeriodicSpline {
 public:
  PeriodicSpline() = default;
  PeriodicSpline(std::vector<double> values, double period);

  double period() const noexcept { return period_; }
  int size() const noexcept { return static_cast<int>(y_.size()); }
  double value(double s) const;
  double d1(double s) const;
  double d2(double s) const;

 private:
  void locate(double s, int& i, double& t) const;
  double period_ = 1.0;
  double h_ = 1.0;
  std::vector<double> y_, m_;  // values and second derivatives at nodes
};

// Derivative of a periodic function from uniform samples (even count), by FFT.
std::vector<double> spectral_derivative(std::span<const double> samples, double period);

// Circular distance on R / P Z.
inline double circle_distance(double a, double b, double P) {
  const double d = std::fmod(std::abs(a - b), P);
  return d > 0.5 * P ? P - d : d;
}

// Representative of s in [0, P).
inline double wrap(double s, double P) {
  double r = std::fmod(s, P);
  if (r < 0) r += P;
  if (r >= P) r -= P;
  return r;
}

}  // namespace shearlab
