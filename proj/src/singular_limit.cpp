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

#include "singular_limit.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <numbers>
#include <thread>

namespace shearlab {
namespace {

using Fn = std::function<double(double)>;

double bisect(const Fn& h, double lo, double hi) {
  double hlo = h(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double hm = h(mid);
    if (hm == 0.0) return mid;
    if ((hm > 0) == (hlo > 0)) {
      lo = mid;
      hlo = hm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Roots of a P-periodic function on [0, P) from a sign scan. Local minima of
// |h| without a sign change are resolved through the extremum of h; a pair
// that cannot be separated raises Unresolved.
std::vector<double> periodic_roots(const Fn& h, const Fn& dh, double P, int N, double scale) {
  std::vector<double> v(N);
  const double step = P / N;
  for (int j = 0; j < N; ++j) v[j] = h(j * step);
  std::vector<double> roots;
  for (int j = 0; j < N; ++j) {
    const double a = v[j], b = v[(j + 1) % N];
    const double s0 = j * step, s1 = s0 + step;
    if (a == 0.0) {
      roots.push_back(s0);
    } else if ((a > 0) != (b > 0) && b != 0.0) {
      roots.push_back(bisect(h, s0, s1));
    }
  }
  for (int j = 0; j < N; ++j) {
    const double a = v[(j + N - 1) % N], b = v[j], c = v[(j + 1) % N];
    if ((a > 0) != (b > 0) || (b > 0) != (c > 0)) continue;
    if (!(std::abs(b) <= std::abs(a) && std::abs(b) <= std::abs(c))) continue;
    const double lo = (j - 1) * step, hi = (j + 1) * step;
    if ((dh(lo) > 0) == (dh(hi) > 0)) continue;
    const double e = bisect(dh, lo, hi);
    const double he = h(e);
    if ((he > 0) != (b > 0) && he != 0.0) {
      roots.push_back(wrap(bisect(h, lo, e), P));
      roots.push_back(wrap(bisect(h, e, hi), P));
    } else if (std::abs(he) < 1e-12 * scale) {
      throw Error(ErrorCode::Unresolved,
                  "unresolved root pair near s = " + std::to_string(wrap(e, P)) +
                      "; refine the scan grid");
    }
  }
  for (double& r : roots) r = wrap(r, P);
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots)
    if (out.empty() || r - out.back() > 1e-12 * P) out.push_back(r);
  if (out.size() > 1 && out.front() + P - out.back() <= 1e-12 * P) out.pop_back();
  return out;
}

}  // namespace

SingularLimitMap::SingularLimitMap(TrigSeries b0, TrigSeries psi, TrigSeries t_hat, double Lambda,
                                   double rho)
    : b0_(std::move(b0)),
      psi_(std::move(psi)),
      t_hat_(std::move(t_hat)),
      Lambda_(Lambda),
      rho_(rho),
      two_L_(b0_.period()) {
  if (!(Lambda >= 0.0) || !std::isfinite(Lambda))
    throw Error(ErrorCode::InvalidArgument, "Lambda must be finite and non-negative");
  if (!(rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");
  if (std::abs(psi_.period() - two_L_) > 1e-12 * two_L_ ||
      std::abs(t_hat_.period() - two_L_) > 1e-12 * two_L_)
    throw Error(ErrorCode::InvalidArgument, "b0, Psi and t_hat must share the period 2L");
  if (psi_.slope() != 0.0) throw Error(ErrorCode::InvalidArgument, "Psi must be periodic");
  const int N = std::max(4096, 16 * (b0_.harmonics() + 1));
  const auto samples = b0_.sample(N);
  b0_min_ = *std::min_element(samples.begin(), samples.end());
  b0_max_ = *std::max_element(samples.begin(), samples.end());
  if (!(b0_min_ > 0.0)) throw Error(ErrorCode::Precondition, "b0 must be positive");
  if (!(t_hat_.slope() > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_hat must increase");
  B_ = b0_.antiderivative();
  B_osc_ = 0.0;
  for (int j = 0; j < N; ++j) {
    const double s = two_L_ * j / N;
    B_osc_ = std::max(B_osc_, std::abs(B_(s) - B_.slope() * s));
  }
  B_osc_ = 1.01 * B_osc_ + 1e-12;
  xi_ = Lambda > 0.0 ? std::pow(Lambda, -0.75) : 0.0;
  locate_critical_sets();
}

SingularLimitMap SingularLimitMap::reference(double Lambda, double rho, double beta) {
  const double P = 4.0 * std::numbers::pi;
  const double sg = beta > 0 ? 1.0 : (beta < 0 ? -1.0 : 0.0);
  // cos(s + rho) - cos(s) on the 4 pi circle is harmonic 2.
  TrigSeries psi(P, 0.0, {0.0, sg * (std::cos(rho) - 1.0)}, {0.0, -sg * std::sin(rho)});
  TrigSeries t_hat(P, 0.0, {}, {}, 1.0);
  return SingularLimitMap(TrigSeries::constant(P, 1.0), psi, t_hat, Lambda, rho);
}

SingularLimitMap SingularLimitMap::from_phi(const PhiFunction& phi, const LimitCycle& cycle,
                                            double Lambda) {
  if (std::abs(phi.L - cycle.length()) > 1e-9 * cycle.length())
    throw Error(ErrorCode::InvalidArgument, "Phi and cycle lengths differ");
  // t_hat' = b0: the flow time from gamma(0) to gamma(a).
  return SingularLimitMap(phi.b0, phi.phi, phi.B, Lambda, phi.rho);
}

void SingularLimitMap::set_xi(double xi) {
  if (!(xi > 0.0)) throw Error(ErrorCode::InvalidArgument, "xi must be positive");
  xi_ = xi;
}

SingularLimitMap::Derivs SingularLimitMap::derivs(double s, double a) const {
  Derivs d{};
  d.f = eval<double>(s, a);
  derivatives<double>(s, a, d.f, d.d1, d.d2, d.da);
  return d;
}

double SingularLimitMap::residual(double s, double a, double f) const {
  return (B_(f) - B_(s)) + Lambda_ * psi_(s) - (t_hat_(a) + rho_);
}

void SingularLimitMap::locate_critical_sets() {
  const int N = std::max(1 << 14, 64 * (psi_.harmonics() + b0_.harmonics() + 1));
  const double psi1 = std::max(psi_.sup_norm(1), 1e-300);
  psi_crit_ = periodic_roots([&](double s) { return psi_.derivative(s, 1); },
                             [&](double s) { return psi_.derivative(s, 2); }, two_L_, N, psi1);
  psi_gap_ = two_L_;
  for (std::size_t i = 0; i < psi_crit_.size(); ++i) {
    const double nxt = i + 1 < psi_crit_.size() ? psi_crit_[i + 1] : psi_crit_[0] + two_L_;
    psi_gap_ = std::min(psi_gap_, nxt - psi_crit_[i]);
  }
  crit_.clear();
  if (Lambda_ * psi1 < b0_min_) return;  // f_a is a diffeomorphism
  crit_ = periodic_roots([&](double s) { return b0_(s) - Lambda_ * psi_.derivative(s, 1); },
                         [&](double s) { return b0_.derivative(s, 1) - Lambda_ * psi_.derivative(s, 2); },
                         two_L_, N, Lambda_ * psi1);
  for (double& c : crit_) c = wrap(polish_critical<double>(c), two_L_);
  std::sort(crit_.begin(), crit_.end());
}

double SingularLimitMap::distance_to_psi_critical(double s) const {
  double d = std::numeric_limits<double>::infinity();
  for (double c : psi_crit_) d = std::min(d, circle_distance(s, c, two_L_));
  return d;
}

double SingularLimitMap::distance_to_critical(double s) const {
  double d = std::numeric_limits<double>::infinity();
  for (double c : crit_) d = std::min(d, circle_distance(s, c, two_L_));
  return d;
}

CriticalCurve advance_critical_curve(const SingularLimitMap& map, int k, double a, int depth) {
  if (depth < 1) throw Error(ErrorCode::InvalidArgument, "depth must be at least 1");
  if (k < 0 || k >= static_cast<int>(map.critical_points().size()))
    throw Error(ErrorCode::InvalidArgument, "critical branch index out of range");
  CriticalCurve cc;
  cc.k = k;
  cc.a = a;
  critical_orbit<double>(map, map.critical_points()[k], a, depth, cc.values, &cc.slopes);
  return cc;
}

MorseEstimateFit fit_morse_estimates(const SingularLimitMap& map, double a, int scan) {
  MorseEstimateFit fit;
  const auto& crit = map.critical_points();
  fit.q0 = static_cast<int>(crit.size());
  fit.K6 = map.K6();
  if (crit.empty()) return fit;
  const double Lam = map.Lambda();
  const double xi = map.xi();
  for (double v : crit) fit.K3 = std::max(fit.K3, map.distance_to_psi_critical(v) * Lam);
  fit.K4 = std::numeric_limits<double>::infinity();
  for (double v : crit) {
    for (int j = -32; j <= 32; ++j) {
      const double s = v + xi * j / 32.0;
      fit.K4 = std::min(fit.K4, std::abs(map.derivs(s, a).d2) / Lam);
    }
  }
  fit.K5 = std::numeric_limits<double>::infinity();
  const double L14 = std::pow(Lam, 0.25);
  for (int j = 0; j < scan; ++j) {
    const double s = map.two_L() * j / scan;
    if (map.distance_to_critical(s) < 0.5 * xi) continue;
    fit.K5 = std::min(fit.K5, std::abs(map.derivs(s, a).d1) / L14);
  }
  // The boundary of C_{xi/2} itself, where the grid is least informative.
  for (double v : crit)
    for (double sgn : {-1.0, 1.0})
      fit.K5 = std::min(fit.K5, std::abs(map.derivs(v + sgn * 0.5 * xi, a).d1) / L14);
  return fit;
}

double fit_distortion(const SingularLimitMap& map, int k, double a_lo, double a_hi, int depth,
                      int samples) {
  if (samples < 2 || !(a_hi > a_lo) || depth < 1)
    throw Error(ErrorCode::InvalidArgument, "distortion fit needs an interval, depth and two samples");
  const double P = map.two_L();
  auto slope_ratio = [&](double lo, double hi, int n) {
    double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
    for (int j = 0; j < samples; ++j) {
      const auto cc = advance_critical_curve(map, k, lo + (hi - lo) * j / (samples - 1), n);
      mn = std::min(mn, std::abs(cc.slopes[n]));
      mx = std::max(mx, std::abs(cc.slopes[n]));
    }
    return mx / mn;
  };
  // n = 1 holds for any pair of parameters.
  double D = slope_ratio(a_lo, a_hi, 1);
  // n >= 2: around each centre, shrink the interval until gamma_1..gamma_{n-1}
  // avoid C_xi and the image of gamma_{n-1} is shorter than xi.
  for (int j = 0; j < samples; ++j) {
    const double centre = a_lo + (a_hi - a_lo) * j / (samples - 1);
    double h = 0.5 * (a_hi - a_lo);
    for (int n = 2; n <= depth; ++n) {
      bool ok = false;
      for (int it = 0; it < 60 && h > 1e-14 * (1 + std::abs(centre)); ++it, h *= 0.5) {
        double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
        bool clear = true;
        for (int q = 0; q < samples && clear; ++q) {
          const auto cc = advance_critical_curve(map, k, centre - h + 2 * h * q / (samples - 1), n - 1);
          for (int i = 1; i <= n - 1; ++i)
            if (map.in_C_xi(wrap(cc.values[i], P))) clear = false;
          ymin = std::min(ymin, cc.values[n - 1]);
          ymax = std::max(ymax, cc.values[n - 1]);
        }
        if (clear && ymax - ymin < map.xi()) {
          ok = true;
          break;
        }
      }
      if (!ok) break;  // the centre's own orbit meets C_xi
      D = std::max(D, slope_ratio(centre - h, centre + h, n));
    }
  }
  return D;
}

EmpiricalMap empirical_singular_limit(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                                      double epsilon, double rho, double t_hat_a, int m,
                                      const std::vector<double>& s0, const IntegratorConfig& config,
                                      const EmpiricalOptions& options) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "m must be at least 1");
  EmpiricalMap out;
  out.s0 = s0;
  out.T = rho + 2.0 * cycle.period() * m + t_hat_a;
  PulseSchedule sched{rho, out.T, epsilon};
  sched.validate();
  out.s_end.assign(s0.size(), 0.0);
  out.offset.assign(s0.size(), 0.0);
  const int nthreads = std::max(1, std::min<int>(options.threads, static_cast<int>(s0.size())));
  std::vector<std::exception_ptr> errs(nthreads);
  auto work = [&](int tid) {
    try {
      FlowSystem sys(prog, config);
      for (std::size_t j = tid; j < s0.size(); j += nthreads) {
        const MapResult r = sys.time_T_map(sched, cycle.point(s0[j]), false);
        double dist = 0.0;
        out.s_end[j] = cycle.project(r.x, &dist);
        out.offset[j] = dist;
        if (dist > 0.5 * options.tube_radius)
          throw Error(ErrorCode::TubeExit,
                      "endpoint at distance " + std::to_string(dist) +
                          " from the cycle exceeds half the tube radius");
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
  return out;
}

EmpiricalCircleMap::EmpiricalCircleMap(const EmpiricalMap& emp, double L) : L_(L) {
  const std::size_t N = emp.s0.size();
  if (N < 8 || emp.s_end.size() != N)
    throw Error(ErrorCode::InvalidArgument, "empirical circle map needs at least 8 samples");
  for (std::size_t j = 0; j < N; ++j)
    if (std::abs(emp.s0[j] - L * j / N) > 1e-9 * L)
      throw Error(ErrorCode::InvalidArgument, "empirical circle map needs the grid s0_j = j L / N");
  auto centred = [L](double d) {
    d = wrap(d, L);
    return d > 0.5 * L ? d - L : d;
  };
  std::vector<double> disp(N);
  disp[0] = centred(emp.s_end[0] - emp.s0[0]);
  for (std::size_t j = 1; j < N; ++j)
    disp[j] = disp[j - 1] + centred(emp.s_end[j] - emp.s_end[j - 1]) - (emp.s0[j] - emp.s0[j - 1]);
  const double closing =
      disp[N - 1] + centred(emp.s_end[0] - emp.s_end[N - 1]) - (L - emp.s0[N - 1]) - disp[0];
  if (std::abs(closing) > 0.25 * L)
    throw Error(ErrorCode::Unsupported, "sampled s-map is not of degree one or the grid is too coarse");
  disp_ = PeriodicSpline(std::move(disp), L);
}

double EmpiricalCircleMap::operator()(double s) const { return wrap(s + disp_.value(s), L_); }

double empirical_sup_distance(const EmpiricalMap& emp, const SingularLimitMap& map, double a,
                              double L) {
  double sup = 0.0;
  for (std::size_t j = 0; j < emp.s0.size(); ++j)
    sup = std::max(sup, circle_distance(emp.s_end[j], map(emp.s0[j], a), L));
  return sup;
}

double flow_fold_coefficient(double epsilon, const NormalFormData& nf) {
  return epsilon * nf.sigma / (std::abs(nf.lambda1()) * nf.two_L());
}

void save_singular_limit_csv(const std::string& path, const SingularLimitMap& map, double a,
                             int points) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path);
  os.precision(17);
  os << "s,f,f1,f2\n";
  for (int j = 0; j < points; ++j) {
    const double s = map.two_L() * j / points;
    const auto d = map.derivs(s, a);
    os << s << ',' << d.f << ',' << d.d1 << ',' << d.d2 << '\n';
  }
}

}  // namespace shearlab
