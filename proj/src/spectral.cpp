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

#include "spectral.hpp"

#include <algorithm>
#include <complex>
#include <numbers>
#include <unsupported/Eigen/FFT>

#include "errors.hpp"

namespace shearlab {

TrigSeries::TrigSeries(double period, double a0, std::vector<double> a, std::vector<double> b,
                       double slope)
    : period_(period), slope_(slope), a0_(a0), a_(std::move(a)), b_(std::move(b)) {
  if (!(period > 0.0)) throw Error(ErrorCode::InvalidArgument, "series period must be positive");
  if (a_.size() < b_.size()) a_.resize(b_.size(), 0.0);
  if (b_.size() < a_.size()) b_.resize(a_.size(), 0.0);
}

TrigSeries TrigSeries::from_samples(std::span<const double> samples, double period,
                                    double rel_trunc) {
  const int N = static_cast<int>(samples.size());
  if (N < 4 || N % 2 != 0)
    throw Error(ErrorCode::InvalidArgument, "series needs an even number (>= 4) of samples");
  Eigen::FFT<double> fft;
  std::vector<double> in(samples.begin(), samples.end());
  std::vector<std::complex<double>> c;
  fft.fwd(c, in);
  const int K = N / 2 - 1;  // the Nyquist mode is dropped
  std::vector<double> a(K), b(K);
  double amax = 0.0;
  for (int k = 1; k <= K; ++k) {
    a[k - 1] = 2.0 * c[k].real() / N;
    b[k - 1] = -2.0 * c[k].imag() / N;
    amax = std::max(amax, std::hypot(a[k - 1], b[k - 1]));
  }
  const double a0 = c[0].real() / N;
  amax = std::max(amax, std::abs(a0));
  int keep = K;
  while (keep > 0 && std::hypot(a[keep - 1], b[keep - 1]) <= rel_trunc * amax) --keep;
  a.resize(keep);
  b.resize(keep);
  return TrigSeries(period, a0, std::move(a), std::move(b));
}

double TrigSeries::derivative(double s, int k) const {
  std::vector<double> out(k + 1);
  eval(s, k, out.data());
  return out[k];
}

TrigSeries TrigSeries::derivative() const {
  const double w = 2.0 * std::numbers::pi / period_;
  std::vector<double> a(a_.size()), b(b_.size());
  for (std::size_t k = 1; k <= a_.size(); ++k) {
    a[k - 1] = k * w * b_[k - 1];
    b[k - 1] = -static_cast<double>(k) * w * a_[k - 1];
  }
  return TrigSeries(period_, slope_, std::move(a), std::move(b));
}

TrigSeries TrigSeries::antiderivative() const {
  if (slope_ != 0.0)
    throw Error(ErrorCode::Unsupported, "antiderivative of a series with a linear term");
  const double w = 2.0 * std::numbers::pi / period_;
  std::vector<double> a(a_.size()), b(b_.size());
  double c0 = 0.0;
  for (std::size_t k = 1; k <= a_.size(); ++k) {
    // int (a cos + b sin) = (a sin - b cos) / (k w)
    a[k - 1] = -b_[k - 1] / (k * w);
    b[k - 1] = a_[k - 1] / (k * w);
    c0 -= a[k - 1];
  }
  return TrigSeries(period_, c0, std::move(a), std::move(b), a0_);
}

TrigSeries TrigSeries::scaled(double c) const {
  std::vector<double> a(a_), b(b_);
  for (auto& v : a) v *= c;
  for (auto& v : b) v *= c;
  return TrigSeries(period_, a0_ * c, std::move(a), std::move(b), slope_ * c);
}

std::vector<double> TrigSeries::sample(int N) const {
  std::vector<double> out(N);
  for (int j = 0; j < N; ++j) out[j] = (*this)(period_ * j / N);
  return out;
}

double TrigSeries::sup_norm(int k, int N) const {
  double m = 0.0;
  for (int j = 0; j < N; ++j) m = std::max(m, std::abs(derivative(period_ * j / N, k)));
  return m;
}

std::vector<double> spectral_derivative(std::span<const double> samples, double period) {
  const int N = static_cast<int>(samples.size());
  if (N < 4 || N % 2 != 0)
    throw Error(ErrorCode::InvalidArgument, "spectral derivative needs an even sample count");
  Eigen::FFT<double> fft;
  std::vector<double> in(samples.begin(), samples.end());
  std::vector<std::complex<double>> c, dc(N);
  fft.fwd(c, in);
  const double w = 2.0 * std::numbers::pi / period;
  for (int k = 0; k < N; ++k) {
    const int kk = k <= N / 2 ? k : k - N;
    dc[k] = (k == N / 2) ? 0.0 : c[k] * std::complex<double>(0.0, w * kk);
  }
  std::vector<std::complex<double>> out;
  fft.inv(out, dc);
  std::vector<double> r(N);
  for (int k = 0; k < N; ++k) r[k] = out[k].real();
  return r;
}

PeriodicSpline::PeriodicSpline(std::vector<double> values, double period)
    : period_(period), y_(std::move(values)) {
  const int N = static_cast<int>(y_.size());
  if (N < 4) throw Error(ErrorCode::InvalidArgument, "spline needs at least 4 nodes");
  if (!(period > 0.0)) throw Error(ErrorCode::InvalidArgument, "spline period must be positive");
  h_ = period / N;
  // The periodic system M_{i-1} + 4 M_i + M_{i+1} = 6 (y_{i+1} - 2 y_i + y_{i-1}) / h^2 is
  // circulant, so it diagonalises under the DFT.
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> yc(N), rhs_hat, m_hat(N);
  std::vector<double> rhs(N);
  for (int i = 0; i < N; ++i)
    rhs[i] = 6.0 * (y_[(i + 1) % N] - 2.0 * y_[i] + y_[(i + N - 1) % N]) / (h_ * h_);
  fft.fwd(rhs_hat, rhs);
  for (int k = 0; k < N; ++k) {
    const double ck = std::cos(2.0 * std::numbers::pi * k / N);
    m_hat[k] = rhs_hat[k] / (4.0 + 2.0 * ck);
  }
  std::vector<std::complex<double>> m_c;
  fft.inv(m_c, m_hat);
  m_.resize(N);
  for (int i = 0; i < N; ++i) m_[i] = m_c[i].real();
}

void PeriodicSpline::locate(double s, int& i, double& t) const {
  const double u = wrap(s, period_) / h_;
  i = static_cast<int>(std::floor(u));
  const int N = static_cast<int>(y_.size());
  if (i >= N) i = N - 1;
  if (i < 0) i = 0;
  t = u - i;
}

double PeriodicSpline::value(double s) const {
  int i;
  double t;
  locate(s, i, t);
  const int N = static_cast<int>(y_.size());
  const int j = (i + 1) % N;
  const double a = 1.0 - t;
  return a * y_[i] + t * y_[j] + ((a * a * a - a) * m_[i] + (t * t * t - t) * m_[j]) * h_ * h_ / 6.0;
}

double PeriodicSpline::d1(double s) const {
  int i;
  double t;
  locate(s, i, t);
  const int N = static_cast<int>(y_.size());
  const int j = (i + 1) % N;
  const double a = 1.0 - t;
  return (y_[j] - y_[i]) / h_ + ((1.0 - 3.0 * a * a) * m_[i] + (3.0 * t * t - 1.0) * m_[j]) * h_ / 6.0;
}

double PeriodicSpline::d2(double s) const {
  int i;
  double t;
  locate(s, i, t);
  const int N = static_cast<int>(y_.size());
  return (1.0 - t) * m_[i] + t * m_[(i + 1) % N];
}

}  // namespace shearlab
