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

#include "misiurewicz.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace shearlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_mp(const mpreal& x, double P) {
  const mpreal p(P);
  const mpreal r = x - p * floor(x / p);
  return wrap(static_cast<double>(r), P);
}

std::string to_string_full(const mpreal& x) {
  return x.str(std::max<int>(17, static_cast<int>(mpreal::default_precision())),
               std::ios_base::scientific);
}

// gamma_depth(a) for the critical point c, with the a-slope when requested.
mpreal iterate(const SingularLimitMap& map, const mpreal& c, const mpreal& a, int depth,
               mpreal* slope = nullptr) {
  mpreal s = c, ds = 0;
  for (int i = 0; i < depth; ++i) {
    const mpreal f = map.eval<mpreal>(s, a);
    if (slope) {
      mpreal d1, d2, da;
      map.derivatives<mpreal>(s, a, f, d1, d2, da);
      ds = d1 * ds + da;
    }
    s = f;
  }
  if (slope) *slope = ds;
  return s;
}

std::vector<mpreal> critical_points_mp(const SingularLimitMap& map) {
  std::vector<mpreal> out;
  for (double v : map.critical_points()) out.push_back(map.polish_critical<mpreal>(v));
  return out;
}

// Solves gamma_depth(a) = y on [a0, a1] where the values at the ends bracket y.
mpreal preimage(const SingularLimitMap& map, const mpreal& c, int depth, const mpreal& y,
                mpreal a0, mpreal a1, mpreal f0, mpreal f1) {
  f0 -= y;
  f1 -= y;
  const mpreal tol = abs(a1 - a0) * mpreal(1e-15);
  int side = 0;
  mpreal a = a0;
  for (int it = 0; it < 200; ++it) {
    if (f0 == 0) return a0;
    if (f1 == 0) return a1;
    a = (a0 * f1 - a1 * f0) / (f1 - f0);
    if (!(a > a0 && a < a1)) a = (a0 + a1) / 2;
    const mpreal f = iterate(map, c, a, depth) - y;
    if ((f > 0) == (f0 > 0)) {
      a0 = a;
      f0 = f;
      if (side == -1) f1 /= 2;
      side = -1;
    } else {
      a1 = a;
      f1 = f;
      if (side == 1) f0 /= 2;
      side = 1;
    }
    if (a1 - a0 <= tol || f == 0) break;
  }
  return a;
}

struct Piece {
  mpreal lo, hi;
};

// Parameter sub-intervals of [a0, a1] on which gamma_depth, assumed monotone,
// lands in C_xi(Psi).
void bad_set(const SingularLimitMap& map, const mpreal& c, int depth, const mpreal& a0,
             const mpreal& a1, const mpreal& y0, const mpreal& y1, std::vector<Piece>& bad) {
  const mpreal ylo = y0 < y1 ? y0 : y1;
  const mpreal yhi = y0 < y1 ? y1 : y0;
  const double P = map.two_L();
  const double xi = map.xi();
  const mpreal mP(P);
  for (double p : map.psi_critical_points()) {
    const long j0 = static_cast<long>(std::floor(static_cast<double>((ylo - mpreal(p + xi)) / mP)));
    const long j1 = static_cast<long>(std::ceil(static_cast<double>((yhi - mpreal(p - xi)) / mP)));
    for (long j = j0; j <= j1; ++j) {
      const mpreal clo = mpreal(p) + mP * j - mpreal(xi);
      const mpreal chi = mpreal(p) + mP * j + mpreal(xi);
      if (chi <= ylo || clo >= yhi) continue;
      auto pre = [&](const mpreal& y) {
        if (y <= ylo) return y0 < y1 ? a0 : a1;
        if (y >= yhi) return y0 < y1 ? a1 : a0;
        return preimage(map, c, depth, y, a0, a1, y0, y1);
      };
      const mpreal b0 = pre(clo), b1 = pre(chi);
      bad.push_back({b0 < b1 ? b0 : b1, b0 < b1 ? b1 : b0});
    }
  }
}

}  // namespace

PrecisionGuard::PrecisionGuard(unsigned digits10) : saved_(mpreal::default_precision()) {
  mpreal::default_precision(digits10);
}

PrecisionGuard::~PrecisionGuard() { mpreal::default_precision(saved_); }

unsigned search_digits(const SingularLimitMap& map, int depth) {
  const double growth =
      1.0 + (map.b0_max() + map.Lambda() * map.psi().sup_norm(1)) / map.b0_min() * map.K6();
  const double bits = 96.0 + depth * std::log2(std::max(2.0, growth));
  return static_cast<unsigned>(std::ceil(bits * std::log10(2.0))) + 2;
}

SearchResult search_admissible_parameter(const SingularLimitMap& map,
                                         const MisiurewiczOptions& opt) {
  if (map.Lambda() < opt.Lambda3)
    throw Error(ErrorCode::Precondition, "Lambda " + std::to_string(map.Lambda()) +
                                             " is below the search threshold " +
                                             std::to_string(opt.Lambda3));
  if (map.critical_points().empty())
    throw Error(ErrorCode::Precondition, "the map has no critical points");
  if (opt.n_target < 1) throw Error(ErrorCode::InvalidArgument, "n_target must be positive");
  const int q0 = static_cast<int>(map.critical_points().size());
  const double xi = map.xi();
  const double dt = map.psi_gap();

  SearchResult res;
  res.K6 = map.K6();
  if (opt.D1 > 0) {
    res.D1 = opt.D1;
  } else {
    const double ell = 3.0 * res.K6 * q0 * xi;
    res.D1 = 1.0;
    for (int k = 0; k < q0; ++k)
      res.D1 = std::max(res.D1, fit_distortion(map, k, opt.a_center - ell / 2,
                                               opt.a_center + ell / 2, 4));
  }
  res.delta0_length = 3.0 * res.D1 * res.K6 * q0 * xi;
  res.standing_assumption = 3.0 * res.D1 * res.K6 * res.K6 * q0 * xi < 0.5 * dt;
  res.digits10 = opt.digits10 ? opt.digits10 : search_digits(map, opt.n_target + 10);
  PrecisionGuard guard(res.digits10);
  const auto crit = critical_points_mp(map);

  auto& cfg = res.config;
  int step = 0;
  std::vector<int> deepest(q0, 0);
  auto record = [&](const char* action, double removed, double ratio) {
    SearchStep s;
    s.step = step;
    s.action = action;
    s.lo = to_string_full(cfg.lo);
    s.width = static_cast<double>(cfg.hi - cfg.lo);
    s.depth = cfg.depth;
    s.removed = removed;
    s.image_ratio = ratio;
    cfg.history.push_back(std::move(s));
  };

  for (int r = 0; r <= opt.max_restarts; ++r) {
    cfg.lo = mpreal(opt.a_center) + mpreal(res.delta0_length) * (r - 0.5);
    cfg.hi = cfg.lo + mpreal(res.delta0_length);
    cfg.depth.assign(q0, 0);
    if (r > 0) record("restart", 0.0, 0.0);
    bool dead = false;
    for (; step < opt.max_steps; ++step) {
      bool done = true;
      for (int k = 0; k < q0; ++k) done = done && cfg.depth[k] >= opt.n_target;
      if (done) {
        res.a_star = (cfg.lo + cfg.hi) / 2;
        res.restarts = r;
        res.clearance = critical_orbit_clearance(map, res.a_star, opt.n_target);
        if (!(res.clearance > 0))
          throw Error(ErrorCode::Internal, "certified parameter fails direct re-verification");
        return res;
      }
      struct Branch {
        mpreal ylo, yhi, slo, shi;
        bool ready = false;
        double ratio = 0.0;
      };
      std::vector<Branch> br(q0);
      bool any = false;
      for (int k = 0; k < q0; ++k) {
        const int d = cfg.depth[k];
        if (d >= opt.n_target) continue;
        auto& b = br[k];
        const mpreal cur = abs(iterate(map, crit[k], cfg.hi, d) - iterate(map, crit[k], cfg.lo, d));
        b.ylo = iterate(map, crit[k], cfg.lo, d + 1, &b.slo);
        b.yhi = iterate(map, crit[k], cfg.hi, d + 1, &b.shi);
        const double next = static_cast<double>(abs(b.yhi - b.ylo));
        b.ready = cur < mpreal(xi) && next < 0.5 * dt;
        b.ratio = next / (3.0 * res.D1 * q0 * xi);
        any = any || b.ready;
      }
      if (!any) {
        cfg.hi = (cfg.lo + cfg.hi) / 2;
        record("halve", 0.5, 0.0);
        continue;
      }
      std::vector<Piece> bad;
      double ratio = kInf;
      for (int k = 0; k < q0; ++k) {
        if (!br[k].ready) continue;
        const int d = cfg.depth[k] + 1;
        ratio = std::min(ratio, br[k].ratio);
        if ((br[k].slo > 0) == (br[k].shi > 0)) {
          bad_set(map, crit[k], d, cfg.lo, cfg.hi, br[k].ylo, br[k].yhi, bad);
        } else {
          // Not monotone on the interval: treat it piecewise on a fine grid.
          const int M = 256;
          mpreal a0 = cfg.lo, y0 = br[k].ylo;
          for (int j = 1; j <= M; ++j) {
            const mpreal a1 = cfg.lo + (cfg.hi - cfg.lo) * j / M;
            const mpreal y1 = iterate(map, crit[k], a1, d);
            bad_set(map, crit[k], d, a0, a1, y0, y1, bad);
            a0 = a1;
            y0 = y1;
          }
        }
      }
      // Longest component of the complement of the bad set.
      std::sort(bad.begin(), bad.end(), [](const Piece& x, const Piece& y) { return x.lo < y.lo; });
      const mpreal width = cfg.hi - cfg.lo;
      mpreal cursor = cfg.lo, best_lo = cfg.lo, best_hi = cfg.lo, good = 0;
      auto consider = [&](const mpreal& lo, const mpreal& hi) {
        if (hi <= lo) return;
        good += hi - lo;
        if (hi - lo > best_hi - best_lo) {
          best_lo = lo;
          best_hi = hi;
        }
      };
      for (const auto& p : bad) {
        consider(cursor, p.lo < cfg.hi ? p.lo : cfg.hi);
        if (p.hi > cursor) cursor = p.hi;
      }
      consider(cursor, cfg.hi);
      const double removed = 1.0 - static_cast<double>(good / width);
      if (!(best_hi - best_lo > width * mpreal(1e-12))) {
        for (int k = 0; k < q0; ++k) deepest[k] = std::max(deepest[k], cfg.depth[k]);
        dead = true;
        ++step;
        break;
      }
      const mpreal margin = (best_hi - best_lo) * mpreal(1e-9);
      cfg.lo = best_lo + margin;
      cfg.hi = best_hi - margin;
      for (int k = 0; k < q0; ++k)
        if (br[k].ready) ++cfg.depth[k];
      record("advance", removed, ratio);
    }
    if (!dead) break;
  }
  std::string depths;
  for (int k = 0; k < q0; ++k) {
    deepest[k] = std::max(deepest[k], cfg.depth[k]);
    depths += (k ? "," : "") + std::to_string(deepest[k]);
  }
  throw Error(ErrorCode::Convergence,
              "admissible parameter search failed after " + std::to_string(step) +
                  " steps; deepest configuration reached depths [" + depths + "]");
}

double critical_orbit_clearance(const SingularLimitMap& map, const mpreal& a, int depth) {
  double best = kInf;
  for (const mpreal& c : critical_points_mp(map)) {
    mpreal s = c;
    for (int i = 1; i <= depth; ++i) {
      s = map.eval<mpreal>(s, a);
      best = std::min(best, map.distance_to_psi_critical(wrap_mp(s, map.two_L())) - map.xi());
    }
  }
  return best;
}

void write_search_trace_csv(const std::string& path, const AdmissibleConfiguration& config) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path);
  os.precision(17);
  os << "step,lo,hi_minus_lo,depths,action,removed\n";
  for (const auto& s : config.history) {
    os << s.step << ',' << s.lo << ',' << s.width << ',';
    for (std::size_t k = 0; k < s.depth.size(); ++k) os << (k ? ";" : "") << s.depth[k];
    os << ',' << s.action << ',' << s.removed << '\n';
  }
}

ExpansionReport verify_expansion(const SingularLimitMap& map, const mpreal& a,
                                 const ExpansionOptions& opt) {
  if (opt.horizon < 2 || opt.M0 < 0 || opt.M0 > opt.horizon || opt.grid < 16)
    throw Error(ErrorCode::InvalidArgument, "invalid expansion options");
  ExpansionReport rep;
  rep.U_radius = opt.U_radius > 0 ? opt.U_radius : 0.5 * map.xi();
  rep.horizon = opt.horizon;
  const double P = map.two_L();
  // U = C_{U_radius}(f_a); empty for a diffeomorphism.
  auto inU = [&](double s) { return map.distance_to_critical(wrap(s, P)) < rep.U_radius; };
  const double ad = static_cast<double>(a);
  const auto crit = critical_points_mp(map);

  // (B) relative to U: distance of the critical orbits from U.
  rep.B_margin = kInf;
  for (const mpreal& c : crit) {
    mpreal x = c;
    for (int i = 1; i <= opt.horizon; ++i) {
      x = map.eval<mpreal>(x, a);
      rep.B_margin = std::min(rep.B_margin, map.distance_to_critical(wrap_mp(x, P)) - rep.U_radius);
    }
  }
  rep.B = rep.B_margin > 0;

  std::vector<double> min_rate(opt.horizon + 1, kInf);
  std::vector<std::pair<int, double>> landing;  // (m, log|(f^m)'|) with f^m(x) in U
  for (int j = 0; j < opt.grid; ++j) {
    double x = P * (j + 0.5) / opt.grid;
    if (inU(x)) continue;
    double logD = 0.0;
    for (int m = 1; m <= opt.horizon; ++m) {
      const auto d = map.derivs(x, ad);
      logD += std::log(std::abs(d.d1));
      x = d.f;
      min_rate[m] = std::min(min_rate[m], logD / m);
      if (inU(x)) {
        landing.emplace_back(m, logD);
        break;
      }
    }
  }
  rep.rate_from.assign(opt.horizon, kInf);
  double run = kInf;
  for (int M = opt.horizon; M >= 1; --M) {
    run = std::min(run, min_rate[M]);
    rep.rate_from[M - 1] = run;
  }
  rep.C1_min_f2 = kInf;
  for (double p : map.critical_points())
    for (int j = -64; j <= 64; ++j)
      rep.C1_min_f2 = std::min(rep.C1_min_f2,
                               std::abs(map.derivs(p + rep.U_radius * j / 64.5, ad).d2));
  rep.C1 = rep.C1_min_f2 > 0;

  // (C2) with p0(x) the first return time to U, iterated in multiprecision so
  // points close to c follow the certified critical orbit.
  std::vector<std::pair<int, double>> returns;  // (p0(x), log|(f^p0)'(x)|)
  const int cap = 2 * opt.horizon;
  for (const mpreal& c : crit) {
    for (int side : {-1, 1}) {
      for (int j = 0; j < opt.c2_samples; ++j) {
        const double t = opt.c2_samples > 1 ? static_cast<double>(j) / (opt.c2_samples - 1) : 1.0;
        const double delta = std::pow(10.0, -12.0 + t * (12.0 + std::log10(2 * rep.U_radius)));
        mpreal x = c + mpreal(side * delta);
        if (!inU(wrap_mp(x, P))) continue;
        ++rep.C2_samples;
        double logD = 0.0;
        int p = 0;
        for (int i = 1; i <= cap; ++i) {
          const mpreal f = map.eval<mpreal>(x, a);
          mpreal d1, d2, da;
          map.derivatives<mpreal>(x, a, f, d1, d2, da);
          logD += std::log(std::abs(static_cast<double>(d1)));
          x = f;
          if (inU(wrap_mp(x, P))) {
            p = i;
            break;
          }
        }
        if (p == 0) {
          ++rep.C2_no_return;
          continue;
        }
        returns.emplace_back(p, logD);
      }
    }
  }

  // (A1) only asks for some M0: take the smallest one for which (A1), (A2),
  // (C2) and e^{lambda0/3} > 2 hold together, else the one with the largest rate.
  auto evaluate = [&](int M0) {
    ExpansionReport r = rep;
    r.M0 = M0;
    r.lambda0 = rep.rate_from[M0 - 1];
    r.A1 = std::isfinite(r.lambda0) && r.lambda0 > 0;
    r.d0 = 1.0;
    for (const auto& [m, logD] : landing) r.d0 = std::min(r.d0, std::exp(logD - r.lambda0 * m));
    r.A2 = r.A1 && r.d0 > 0;
    r.mixing_rate = r.A1 && std::exp(r.lambda0 / 3) > 2.0;
    r.C2_margin = kInf;
    for (const auto& [p, logD] : returns)
      r.C2_margin = std::min(r.C2_margin, logD + std::log(r.d0) - r.lambda0 * p / 3.0);
    r.C2 = r.A2 && r.C2_margin >= 0.0;
    return r;
  };
  if (opt.M0 > 0) return evaluate(opt.M0);
  for (int M0 = 1; M0 <= opt.horizon / 2; ++M0) {
    ExpansionReport r = evaluate(M0);
    if (r.A1 && r.A2 && r.C2 && r.mixing_rate) return r;
  }
  return evaluate(opt.horizon / 2);
}

BindingSample binding_time(const SingularLimitMap& map, const mpreal& a, int k, const mpreal& s,
                           int cap) {
  if (k < 0 || k >= static_cast<int>(map.critical_points().size()))
    throw Error(ErrorCode::InvalidArgument, "critical branch index out of range");
  const mpreal c = map.polish_critical<mpreal>(map.critical_points()[k]);
  if (s == c) throw Error(ErrorCode::InvalidArgument, "binding time is undefined at s = c");
  BindingSample out;
  out.k = k;
  out.offset = static_cast<double>(s - c);
  mpreal x = s, y = c;
  const mpreal half(0.5 * map.xi());
  for (int m = 1; m <= cap; ++m) {
    const mpreal fx = map.eval<mpreal>(x, a);
    mpreal d1, d2, da;
    map.derivatives<mpreal>(x, a, fx, d1, d2, da);
    out.log_derivative += std::log(std::abs(static_cast<double>(d1)));
    x = fx;
    y = map.eval<mpreal>(y, a);
    if (abs(x - y) > half) {
      out.m = m;
      return out;
    }
  }
  out.m = 0;
  return out;
}

BindingReport check_binding(const SingularLimitMap& map, const mpreal& a, int samples, int cap) {
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "need at least one binding sample");
  BindingReport rep;
  const double r = std::pow(map.Lambda(), -11.0 / 12.0);
  const int q0 = static_cast<int>(map.critical_points().size());
  double logK7 = kInf;
  rep.m_above_one = true;
  for (int k = 0; k < q0; ++k) {
    const mpreal c = map.polish_critical<mpreal>(map.critical_points()[k]);
    for (int side : {-1, 1}) {
      for (int j = 1; j <= samples; ++j) {
        const auto b = binding_time(map, a, k, c + mpreal(side * r * j / samples), cap);
        rep.samples.push_back(b);
        if (b.m == 0) {
          ++rep.skipped;
          continue;
        }
        rep.m_above_one = rep.m_above_one && b.m > 1;
        logK7 = std::min(logK7, 16.0 * b.log_derivative / b.m - std::log(map.Lambda()));
      }
    }
  }
  rep.K7 = std::isfinite(logK7) ? std::exp(logK7) : 0.0;
  return rep;
}

TransversalityReport check_transversality(const SingularLimitMap& map, const mpreal& a, int terms,
                                          double Lambda_min) {
  if (map.Lambda() < Lambda_min || map.critical_points().empty())
    throw Error(ErrorCode::Precondition,
                "transversality sums need an expanding map (Lambda too small)");
  if (terms < 2) throw Error(ErrorCode::InvalidArgument, "need at least two terms");
  TransversalityReport rep;
  rep.pass = true;
  mpreal b0a[1];
  map.b0().eval(a, 0, b0a);
  for (const mpreal& c : critical_points_mp(map)) {
    // orbit[j] = f^j(c), j = 0..terms
    std::vector<mpreal> orbit{c};
    for (int j = 0; j < terms; ++j) orbit.push_back(map.eval<mpreal>(orbit.back(), a));
    // (f^k)'(f(c)) = prod_{j=1..k} f'(f^j(c)), kept as a log and a sign.
    double sum = 0.0, logD = 0.0, sign = 1.0, last = 0.0, prev = 0.0;
    for (int k = 0; k < terms; ++k) {
      if (k >= 1) {
        mpreal d1, d2, da;
        map.derivatives<mpreal>(orbit[k], a, orbit[k + 1], d1, d2, da);
        logD += std::log(std::abs(static_cast<double>(d1)));
        if (d1 < 0) sign = -sign;
      }
      mpreal bf[1];
      map.b0().eval(orbit[k + 1], 0, bf);
      const double dA = static_cast<double>(b0a[0] / bf[0]);
      const double term = sign * dA * std::exp(-logD);
      if (k == 0) rep.first_terms.push_back(term);
      sum += term;
      prev = last;
      last = term;
    }
    const double q = prev != 0.0 ? std::abs(last / prev) : 0.0;
    const double tail = q < 1.0 ? std::abs(last) * q / (1.0 - q) : kInf;
    rep.sums.push_back(sum);
    rep.tail_bounds.push_back(tail);
    rep.pass = rep.pass && std::abs(sum) - tail > 0;
  }
  return rep;
}

MixingReport check_mixing(const SingularLimitMap& map, const mpreal& a, int cap) {
  MixingReport rep;
  const auto& v = map.critical_points();
  rep.r = static_cast<int>(v.size());
  if (rep.r == 0) return rep;
  rep.applicable = true;
  const double P = map.two_L();
  const double ad = static_cast<double>(a);
  const int r = rep.r;
  auto node = [&](int i) { return i < r ? v[i] : v[i - r] + P; };
  rep.Q.assign(r, std::vector<int>(r, 0));
  for (int i = 0; i < r; ++i) {
    double y0 = map(node(i), ad), y1 = map(node(i + 1), ad);
    if (y0 > y1) std::swap(y0, y1);
    for (int m = 0; m < r; ++m) {
      const double lo = node(m), hi = node(m + 1);
      const long j0 = static_cast<long>(std::floor((y0 - hi) / P));
      const long j1 = static_cast<long>(std::ceil((y1 - lo) / P));
      for (long j = j0; j <= j1 && !rep.Q[i][m]; ++j)
        if (lo + j * P >= y0 && hi + j * P <= y1) rep.Q[i][m] = 1;
    }
  }
  std::vector<std::vector<int>> Pw = rep.Q;
  for (int n = 1; n <= cap; ++n) {
    bool pos = true;
    for (const auto& row : Pw)
      for (int x : row) pos = pos && x;
    if (pos) {
      rep.N = n;
      rep.verdict = true;
      break;
    }
    std::vector<std::vector<int>> nx(r, std::vector<int>(r, 0));
    for (int i = 0; i < r; ++i)
      for (int k = 0; k < r; ++k)
        if (Pw[i][k])
          for (int m = 0; m < r; ++m) nx[i][m] |= rep.Q[k][m];
    Pw = std::move(nx);
  }
  return rep;
}

MisiurewiczReport certify(const SingularLimitMap& map, const MisiurewiczOptions& options,
                          const ExpansionOptions& expansion) {
  MisiurewiczReport rep;
  rep.n_target = options.n_target;
  rep.search = search_admissible_parameter(map, options);
  PrecisionGuard guard(rep.search.digits10);
  rep.expansion = verify_expansion(map, rep.search.a_star, expansion);
  rep.binding = check_binding(map, rep.search.a_star, 16, options.n_target);
  rep.transversality =
      check_transversality(map, rep.search.a_star, 50, std::min(options.Lambda3, map.Lambda()));
  rep.mixing = check_mixing(map, rep.search.a_star);
  return rep;
}

nlohmann::json to_json(const MisiurewiczReport& rep, const SingularLimitMap& map) {
  using nlohmann::json;
  PrecisionGuard guard(std::max(rep.search.digits10, 20u));
  json j;
  j["Lambda"] = map.Lambda();
  j["xi"] = map.xi();
  j["q0"] = map.critical_points().size();
  j["critical_points"] = map.critical_points();
  j["a_star"] = static_cast<double>(rep.search.a_star);
  j["a_star_digits"] = to_string_full(rep.search.a_star);
  j["search"] = {{"D1", rep.search.D1},
                 {"K6", rep.search.K6},
                 {"delta0_length", rep.search.delta0_length},
                 {"standing_assumption", rep.search.standing_assumption},
                 {"restarts", rep.search.restarts},
                 {"steps", rep.search.config.history.size()},
                 {"digits10", rep.search.digits10}};
  j["orbit_clearance"] = {{"N_max", rep.n_target}, {"min_distance", rep.search.clearance}};
  const auto& e = rep.expansion;
  j["expansion"] = {{"U_radius", e.U_radius}, {"lambda0", e.lambda0}, {"M0", e.M0},
                    {"d0", e.d0},             {"A1", e.A1},           {"A2", e.A2},
                    {"C1", e.C1},             {"C2", e.C2},           {"C1_min_f2", e.C1_min_f2},
                    {"B", e.B},               {"B_margin", e.B_margin},
                    {"C2_margin", e.C2_margin}, {"C2_samples", e.C2_samples},
                    {"C2_no_return", e.C2_no_return}, {"horizon", e.horizon}};
  json samples = json::array();
  for (const auto& b : rep.binding.samples)
    samples.push_back({{"k", b.k}, {"offset", b.offset}, {"m", b.m}, {"log_derivative", b.log_derivative}});
  j["binding"] = {{"m_above_one", rep.binding.m_above_one},
                  {"K7", rep.binding.K7},
                  {"skipped", rep.binding.skipped},
                  {"samples", samples}};
  j["transversality"] = {{"sums", rep.transversality.sums},
                         {"first_terms", rep.transversality.first_terms},
                         {"tail_bounds", rep.transversality.tail_bounds},
                         {"pass", rep.transversality.pass}};
  j["mixing"] = {{"Q", rep.mixing.Q},
                 {"N", rep.mixing.N},
                 {"r", rep.mixing.r},
                 {"applicable", rep.mixing.applicable},
                 {"verdict", rep.mixing.verdict},
                 {"exp_lambda0_over_3_gt_2", e.mixing_rate}};
  return j;
}

std::vector<double> turn_nondegeneracy(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                                       const std::vector<double>& points, double epsilon,
                                       double rho, double t_hat_a, int m,
                                       const IntegratorConfig& config, double h) {
  if (!(h > 0)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  const double L = cycle.length();
  PulseSchedule sched{rho, rho + 2.0 * cycle.period() * m + t_hat_a, epsilon};
  FlowSystem sys(prog, config);
  std::vector<double> out;
  const int n = cycle.dim();
  for (double s : points) {
    const Eigen::VectorXd p = cycle.point(s);
    const Eigen::VectorXd t = cycle.tangent(s);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(t);
    const Eigen::MatrixXd Q = qr.householderQ();
    double g2 = 0.0;
    for (int i = 1; i < n; ++i) {
      const Eigen::VectorXd e = Q.col(i);
      const double sp = cycle.project(sys.time_T_map(sched, p + h * e, false).x);
      const double sm = cycle.project(sys.time_T_map(sched, p - h * e, false).x);
      double diff = std::fmod(sp - sm, L);
      if (diff > 0.5 * L) diff -= L;
      if (diff < -0.5 * L) diff += L;
      g2 += (diff / (2 * h)) * (diff / (2 * h));
    }
    out.push_back(std::sqrt(g2));
  }
  return out;
}

}  // namespace shearlab
