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

#include "attractor_lab.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <thread>

#include "errors.hpp"

namespace shearlab {

namespace {

void check_state(const MapResult& r, bool with_tangent) {
  if (!r.x.allFinite()) throw Error(ErrorCode::Integration, "non-finite state in G_T");
  if (with_tangent && !r.tangent.allFinite())
    throw Error(ErrorCode::Integration, "non-finite tangent in G_T");
}

void check_escape(const LimitCycle* cycle, double radius, const Eigen::VectorXd& x, int k) {
  if (!cycle || !(radius > 0)) return;
  double d = 0.0;
  cycle->project(x, &d);
  if (d > radius)
    throw Error(ErrorCode::TubeExit, "orbit escaped to distance " + std::to_string(d) +
                                         " from the cycle after " + std::to_string(k) + " maps");
}

// Tangent frame carried along an orbit; returns log |R_ii| of one step.
class QrFrame {
 public:
  explicit QrFrame(int n) : Q_(Eigen::MatrixXd::Identity(n, n)), logs_(n) {}
  const Eigen::VectorXd& push(const Eigen::MatrixXd& tangent) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(tangent * Q_);
    Q_ = qr.householderQ();
    for (int i = 0; i < logs_.size(); ++i) logs_[i] = std::log(std::abs(qr.matrixQR()(i, i)));
    return logs_;
  }

 private:
  Eigen::MatrixXd Q_;
  Eigen::VectorXd logs_;
};

double mean(const std::vector<double>& v, std::size_t from = 0, std::size_t to = ~std::size_t{0}) {
  to = std::min(to, v.size());
  if (to <= from) return 0.0;
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) acc += v[i];
  return acc / static_cast<double>(to - from);
}

// log spectral radius per map of the tangent product over one period.
double periodic_top_exponent(FlowSystem& fs, const PulseSchedule& sch, Eigen::VectorXd x, int p) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(x.size(), x.size());
  for (int i = 0; i < p; ++i) {
    const MapResult r = fs.time_T_map(sch, x, true);
    check_state(r, true);
    M = r.tangent * M;
    x = r.x;
  }
  const double rad = M.eigenvalues().cwiseAbs().maxCoeff();
  return std::log(rad) / p;
}

// Smallest p <= cap with |x - x_{k-p}| <= tol (1 + |x|); 0 if none.
class PeriodDetector {
 public:
  PeriodDetector(int cap, double tol) : cap_(cap), tol_(tol), ring_(cap + 1) {}
  int push(const Eigen::VectorXd& x) {
    int found = 0;
    const double scale = tol_ * (1.0 + x.norm());
    for (int p = 1; p <= std::min<long>(cap_, count_); ++p)
      if ((x - ring_[(count_ - p) % ring_.size()]).norm() <= scale) {
        found = p;
        break;
      }
    ring_[count_ % ring_.size()] = x;
    ++count_;
    return found;
  }

 private:
  int cap_;
  double tol_;
  std::vector<Eigen::VectorXd> ring_;
  long count_ = 0;
};

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

BootstrapEstimate block_bootstrap(const std::vector<double>& series, int blocks, int resamples,
                                  std::uint64_t seed) {
  if (series.empty()) throw Error(ErrorCode::InvalidArgument, "bootstrap of an empty series");
  if (blocks < 1 || resamples < 2)
    throw Error(ErrorCode::InvalidArgument, "bootstrap needs blocks >= 1 and resamples >= 2");
  BootstrapEstimate out;
  out.mean = mean(series);
  const int b = std::min<int>(blocks, static_cast<int>(series.size()));
  if (b < 2) return out;
  const std::size_t len = series.size() / b;
  std::vector<double> bm(b);
  for (int i = 0; i < b; ++i) bm[i] = mean(series, i * len, (i + 1) * len);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, b - 1);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double acc = 0.0;
    for (int i = 0; i < b; ++i) acc += bm[pick(rng)];
    m = acc / b;
  }
  std::sort(means.begin(), means.end());
  auto q = [&](double p) {
    const double pos = p * (resamples - 1);
    const int i = static_cast<int>(pos);
    const double f = pos - i;
    return i + 1 < resamples ? means[i] * (1 - f) + means[i + 1] * f : means[i];
  };
  out.halfwidth = 0.5 * (q(0.975) - q(0.025));
  return out;
}

Eigen::VectorXd random_near_cycle(const LimitCycle& cycle, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss;
  const double s = cycle.length() * u01(rng);
  const Eigen::VectorXd t = cycle.tangent(s);
  Eigen::VectorXd g(cycle.dim());
  do {
    for (int i = 0; i < g.size(); ++i) g[i] = gauss(rng);
    g -= g.dot(t) * t;
  } while (g.norm() < 1e-8);
  return cycle.point(s) + radius * (2.0 * u01(rng) - 1.0) * g.normalized();
}

LyapunovResult lyapunov_spectrum(const dsl::FieldProgram& prog, const PulseSchedule& schedule,
                                 const Eigen::VectorXd& x0, int iterates, int burn_in,
                                 const IntegratorConfig& config, const LyapunovOptions& options,
                                 const LimitCycle* cycle) {
  if (iterates < 1 || burn_in < 0)
    throw Error(ErrorCode::InvalidArgument, "need iterates >= 1 and burn_in >= 0");
  schedule.validate();
  FlowSystem fs(prog, config);
  const int n = fs.dim();
  Eigen::VectorXd x = x0;
  for (int k = 0; k < burn_in; ++k) {
    const MapResult r = fs.time_T_map(schedule, x, false);
    check_state(r, false);
    x = r.x;
    check_escape(cycle, options.escape_radius, x, k + 1);
  }
  QrFrame frame(n);
  std::vector<double> sums(n, 0.0), top(iterates);
  double log_det = 0.0;
  for (int k = 0; k < iterates; ++k) {
    const MapResult r = fs.time_T_map(schedule, x, true);
    check_state(r, true);
    const Eigen::VectorXd& l = frame.push(r.tangent);
    for (int i = 0; i < n; ++i) sums[i] += l[i];
    top[k] = l[0];
    log_det += std::log(std::abs(r.tangent.determinant()));
    x = r.x;
    check_escape(cycle, options.escape_radius, x, burn_in + k + 1);
  }
  LyapunovResult out;
  out.iterates = iterates;
  for (double& s : sums) s /= iterates;
  out.exponents = sums;
  std::sort(out.exponents.begin(), out.exponents.end(), std::greater<>());
  for (double e : out.exponents) out.per_time.push_back(e / schedule.T);
  out.log_det_mean = log_det / iterates;
  double total = 0.0;
  for (double e : out.exponents) total += e;
  out.sum_rule_error = std::abs(total - out.log_det_mean) / std::max(1.0, std::abs(out.log_det_mean));
  // The first QR column carries the top exponent once the frame has aligned.
  out.ci_halfwidth = block_bootstrap(top, options.blocks, options.resamples, options.seed).halfwidth;
  out.final_state = x;
  return out;
}

const char* to_string(AttractorClass c) {
  switch (c) {
    case AttractorClass::Sink: return "sink";
    case AttractorClass::InvariantCurve: return "invariant_curve";
    case AttractorClass::Chaotic: return "chaotic";
    case AttractorClass::Undecided: return "undecided";
  }
  return "undecided";
}

Classification classify_from(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                             const PulseSchedule& schedule, const Eigen::VectorXd& x0,
                             const IntegratorConfig& config, const ClassifyOptions& opt) {
  if (opt.iterates < 2 || opt.burn_in < 0 || opt.period_cap < 1)
    throw Error(ErrorCode::InvalidArgument, "classification needs iterates >= 2 and period_cap >= 1");
  schedule.validate();
  FlowSystem fs(prog, config);
  const double L = cycle.length();
  Classification out;
  QrFrame frame(fs.dim());
  PeriodDetector detect(opt.period_cap, opt.residual);
  std::vector<double> logs;
  std::vector<int> occupied(opt.bins, 0);
  Eigen::VectorXd x = x0;
  detect.push(x);

  auto finish_sink = [&](int k, int p) {
    out.maps = k;
    out.period = p;
    out.transient = std::max(0, k - p);
    out.transient_exponent = mean(logs, 0, std::min<std::size_t>(logs.size(), out.transient));
    out.top = periodic_top_exponent(fs, schedule, x, p);
    out.ci = 0.0;
    out.cls = out.top < 0 ? AttractorClass::Sink : AttractorClass::Undecided;
    return out;
  };

  const int total = opt.burn_in + opt.iterates;
  for (int k = 1; k <= total; ++k) {
    const MapResult r = fs.time_T_map(schedule, x, true);
    check_state(r, true);
    logs.push_back(frame.push(r.tangent)[0]);
    x = r.x;
    double d = 0.0;
    const double s = cycle.project(x, &d);
    if (opt.escape_radius > 0 && d > opt.escape_radius)
      throw Error(ErrorCode::TubeExit, "orbit escaped to distance " + std::to_string(d) +
                                           " from the cycle after " + std::to_string(k) + " maps");
    if (const int p = detect.push(x)) return finish_sink(k, p);
    if (k > opt.burn_in) {
      const int bin = std::min(opt.bins - 1, static_cast<int>(wrap(s, L) / L * opt.bins));
      occupied[bin] = 1;
      out.spread = std::max(out.spread, d);
    }
  }
  out.maps = total;
  const std::vector<double> tail(logs.begin() + opt.burn_in, logs.end());
  const BootstrapEstimate est =
      block_bootstrap(tail, opt.blocks, opt.resamples, mix_seed(opt.seed, 0xb007));
  out.top = est.mean;
  out.ci = est.halfwidth;
  out.coverage = static_cast<double>(std::count(occupied.begin(), occupied.end(), 1)) / opt.bins;

  // Chaotic transients can end in a sink; other verdicts get a longer periodic search.
  auto settles = [&](int extra) {
    for (int k = total + 1; k <= total + extra; ++k) {
      const MapResult r = fs.time_T_map(schedule, x, false);
      check_state(r, false);
      x = r.x;
      check_escape(&cycle, opt.escape_radius, x, k);
      if (const int p = detect.push(x)) {
        finish_sink(k, p);
        return true;
      }
    }
    out.maps = total + extra;
    return false;
  };
  if (out.top - out.ci > 0) {
    if (!settles(opt.chaos_confirm)) out.cls = AttractorClass::Chaotic;
  } else if (out.top < opt.zero_band && out.top > -std::max(opt.zero_band, out.ci) &&
             out.coverage >= opt.coverage && out.spread <= opt.spread) {
    out.cls = AttractorClass::InvariantCurve;
  } else if (!settles(opt.transient_cap)) {
    out.cls = AttractorClass::Undecided;
  }
  return out;
}

Classification classify_attractor(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                                  const PulseSchedule& schedule, const IntegratorConfig& config,
                                  const ClassifyOptions& options) {
  std::mt19937_64 rng(options.seed);
  const Eigen::VectorXd x0 = random_near_cycle(cycle, options.init_radius, rng);
  return classify_from(prog, cycle, schedule, x0, config, options);
}

SweepResult sweep_T(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                    const PulseSchedule& tmpl, double T_lo, double T_hi, double step,
                    const IntegratorConfig& config, const SweepOptions& options) {
  if (!(step > 0)) throw Error(ErrorCode::InvalidArgument, "sweep step must be positive");
  if (!(T_hi >= T_lo)) throw Error(ErrorCode::InvalidArgument, "sweep range is empty");
  const int count = static_cast<int>(std::floor((T_hi - T_lo) / step + 1e-9)) + 1;
  SweepResult out;
  out.points.resize(count);
  const int nthreads = std::max(1, std::min(options.threads, count));
  std::vector<std::exception_ptr> errs(nthreads);
  auto work = [&](int tid) {
    try {
      for (int i = tid; i < count; i += nthreads) {
        PulseSchedule sch = tmpl;
        sch.T = T_lo + i * step;
        ClassifyOptions co = options.classify;
        co.seed = mix_seed(options.classify.seed, i);
        out.points[i].T = sch.T;
        out.points[i].c = classify_attractor(prog, cycle, sch, config, co);
      }
    } catch (...) {
      errs[tid] = std::current_exception();
    }
  };
  if (nthreads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);

  const double span = T_hi - T_lo;
  const int windows = std::max(1, static_cast<int>(std::floor(span + 1e-9)));
  for (int w = 0; w < windows; ++w) {
    const double start = T_lo + w;
    const double width = (w + 1 == windows) ? std::max(1.0, span - w) + 0.5 * step : 1.0;
    out.window_start.push_back(start);
    out.window_fraction.push_back(chaotic_fraction(out, start, width));
  }
  return out;
}

double chaotic_fraction(const SweepResult& sweep, double start, double width) {
  int n = 0, c = 0;
  for (const auto& p : sweep.points)
    if (p.T >= start && p.T < start + width) {
      ++n;
      if (p.c.cls == AttractorClass::Chaotic) ++c;
    }
  return n ? static_cast<double>(c) / n : 0.0;
}

void write_sweep_csv(const std::string& path, const SweepResult& sweep) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  f.precision(17);
  f << "T,class,top,ci,period,transient,transient_exponent\n";
  for (const auto& p : sweep.points)
    f << p.T << ',' << to_string(p.c.cls) << ',' << p.c.top << ',' << p.c.ci << ',' << p.c.period
      << ',' << p.c.transient << ',' << p.c.transient_exponent << '\n';
}

std::vector<double> s_histogram(const std::vector<double>& s, double L, int bins) {
  if (bins < 1 || !(L > 0)) throw Error(ErrorCode::InvalidArgument, "histogram needs bins >= 1, L > 0");
  std::vector<double> h(bins, 0.0);
  for (double v : s) h[std::min(bins - 1, static_cast<int>(wrap(v, L) / L * bins))] += 1.0;
  if (!s.empty())
    for (double& m : h) m /= static_cast<double>(s.size());
  return h;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::InvalidArgument, "histogram sizes differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

void write_histogram_csv(const std::string& path, const std::vector<double>& mass) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  f.precision(17);
  f << "bin,mass\n";
  for (std::size_t i = 0; i < mass.size(); ++i) f << i << ',' << mass[i] << '\n';
}

SrbReport srb_diagnostics(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                          const PulseSchedule& schedule, const IntegratorConfig& config,
                          const SrbOptions& opt, const std::vector<Observable>& observables) {
  if (opt.initial_points < 1 || opt.iterates < 2 || opt.max_lag < 1 || opt.max_lag >= opt.iterates)
    throw Error(ErrorCode::InvalidArgument, "SRB test needs points >= 1 and 1 <= max_lag < iterates");
  schedule.validate();
  const double L = cycle.length();
  std::vector<Observable> obs = observables;
  if (obs.empty())
    obs.push_back([L](const Eigen::VectorXd&, double s) { return std::cos(std::numbers::pi * s / L); });

  const int P = opt.initial_points;
  std::vector<std::vector<std::vector<double>>> series(
      P, std::vector<std::vector<double>>(obs.size()));
  std::vector<std::vector<double>> svals(P);
  const int nthreads = std::max(1, std::min(opt.threads, P));
  std::vector<std::exception_ptr> errs(nthreads);
  auto work = [&](int tid) {
    try {
      FlowSystem fs(prog, config);
      for (int i = tid; i < P; i += nthreads) {
        std::mt19937_64 rng(mix_seed(opt.seed, i));
        Eigen::VectorXd x = random_near_cycle(cycle, opt.init_radius, rng);
        for (auto& v : series[i]) v.reserve(opt.iterates);
        svals[i].reserve(opt.iterates);
        for (int k = 0; k < opt.burn_in + opt.iterates; ++k) {
          const MapResult r = fs.time_T_map(schedule, x, false);
          check_state(r, false);
          x = r.x;
          double d = 0.0;
          const double s = wrap(cycle.project(x, &d), L);
          if (opt.escape_radius > 0 && d > opt.escape_radius)
            throw Error(ErrorCode::TubeExit, "orbit escaped from the cycle neighbourhood");
          if (k < opt.burn_in) continue;
          svals[i].push_back(s);
          for (std::size_t j = 0; j < obs.size(); ++j) series[i][j].push_back(obs[j](x, s));
        }
      }
    } catch (...) {
      errs[tid] = std::current_exception();
    }
  };
  if (nthreads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);

  SrbReport rep;
  rep.averages.resize(P);
  for (int i = 0; i < P; ++i)
    for (std::size_t j = 0; j < obs.size(); ++j)
      rep.averages[i].push_back(block_bootstrap(series[i][j], opt.blocks, opt.resamples,
                                                mix_seed(opt.seed, 1000 + i * obs.size() + j)));
  rep.agree = true;
  for (int i = 0; i < P; ++i)
    for (int k = i + 1; k < P; ++k)
      for (std::size_t j = 0; j < obs.size(); ++j) {
        const auto& a = rep.averages[i][j];
        const auto& b = rep.averages[k][j];
        const double comb = std::hypot(a.halfwidth, b.halfwidth);
        const double diff = std::abs(a.mean - b.mean);
        const double ratio = comb > 0 ? diff / comb : (diff > 0 ? INFINITY : 0.0);
        rep.worst_ratio = std::max(rep.worst_ratio, ratio);
        if (!(ratio < 3.0)) rep.agree = false;
      }

  std::vector<double> pooled;
  for (const auto& s : svals) pooled.insert(pooled.end(), s.begin(), s.end());
  rep.histogram = s_histogram(pooled, L, opt.bins);

  // Autocorrelation of cos(pi s / L) along the first orbit.
  std::vector<double> phi(svals[0].size());
  for (std::size_t t = 0; t < phi.size(); ++t) phi[t] = std::cos(std::numbers::pi * svals[0][t] / L);
  const double mu = mean(phi);
  const std::size_t N = phi.size();
  for (int lag = 0; lag <= opt.max_lag; ++lag) {
    double acc = 0.0;
    for (std::size_t t = 0; t + lag < N; ++t) acc += (phi[t] - mu) * (phi[t + lag] - mu);
    rep.autocorrelation.push_back(acc / static_cast<double>(N - lag));
  }
  rep.variance = rep.autocorrelation[0];
  // Geometric fit log(C_k / C_0) = k log r over the lags above the noise floor.
  const double floor = 2.0 / std::sqrt(static_cast<double>(N));
  double num = 0.0, den = 0.0;
  for (int k = 1; k <= opt.max_lag && rep.variance > 0; ++k) {
    const double c = rep.autocorrelation[k] / rep.variance;
    if (!(c > floor)) break;
    num += k * std::log(c);
    den += static_cast<double>(k) * k;
    ++rep.fit_lags;
  }
  rep.decay_rate = den > 0 ? std::exp(num / den) : 0.0;
  return rep;
}

DetRatio det_ratio(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                   const PulseSchedule& schedule, const IntegratorConfig& config, int points,
                   double radius, std::uint64_t seed) {
  if (points < 1) throw Error(ErrorCode::InvalidArgument, "det ratio needs at least one point");
  schedule.validate();
  FlowSystem fs(prog, config);
  std::mt19937_64 rng(seed);
  DetRatio out;
  out.points = points;
  out.min_det = INFINITY;
  for (int i = 0; i < points; ++i) {
    const MapResult r = fs.time_T_map(schedule, random_near_cycle(cycle, radius, rng), true);
    check_state(r, true);
    const double d = std::abs(r.tangent.determinant());
    out.min_det = std::min(out.min_det, d);
    out.max_det = std::max(out.max_det, d);
  }
  out.ratio = out.max_det / out.min_det;
  return out;
}

}  // namespace shearlab
