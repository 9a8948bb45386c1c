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

#include "validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>

#include "attractor_lab.hpp"
#include "errors.hpp"
#include "misiurewicz.hpp"
#include "normal_form.hpp"
#include "rs_oracle.hpp"
#include "singular_limit.hpp"

namespace shearlab {
namespace {

using Eigen::VectorXd;
using nlohmann::json;
constexpr double kPi = std::numbers::pi;

IntegratorConfig tol(double t) {
  IntegratorConfig c;
  c.abs_tol = c.rel_tol = t;
  return c;
}

LimitCycle rs_cycle(const dsl::FieldProgram& prog, int nodes = 256) {
  VectorXd g(2);
  g << 1.3, 0.0;
  CycleOptions opt;
  opt.nodes = nodes;
  return find_limit_cycle(prog, g, tol(1e-12), opt);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

void artifact(const ValidationOptions& o, const std::string& name, const json& j) {
  if (o.out_dir.empty()) return;
  std::filesystem::create_directories(o.out_dir);
  std::ofstream(std::filesystem::path(o.out_dir) / name) << j.dump(2) << '\n';
}

std::string artifact_path(const ValidationOptions& o, const std::string& name) {
  std::filesystem::create_directories(o.out_dir);
  return (std::filesystem::path(o.out_dir) / name).string();
}

// Certified parameter of the reference family at Lambda = 100, shared by the
// Misiurewicz criterion and the choice of the sweep window.
const SearchResult& certified_reference() {
  static std::once_flag once;
  static std::optional<SearchResult> res;
  std::call_once(once, [] {
    const auto map = SingularLimitMap::reference(100.0, 1.0, 1.0);
    res = search_admissible_parameter(map);
  });
  return *res;
}

// Strong-shear regime of the dynamics criteria: flow fold eps beta / lambda = 8,
// hyperbolicity factor eps sigma / lambda ~ 100.
struct Strong {
  double lam = 0.1, beta = 80.0, eps = 0.01, rho = 1.0;
  dsl::FieldProgram prog = dsl::parse_field(rs::source(lam, beta));
  LimitCycle cycle = rs_cycle(prog);
  IntegratorConfig cfg = tol(1e-6);
  PulseSchedule at(double T, double e) const { return {rho, T, e}; }
  // T = rho + 2 p0 m + t_hat(a); t_hat(a) = a since b0 = 1.
  double window_start(int m) const {
    const double a = std::fmod(static_cast<double>(certified_reference().a_star), 4 * kPi);
    return rho + 2 * cycle.period() * m + a;
  }
};

const Strong& strong() {
  static const Strong s;
  return s;
}

// 1. Limit cycle period, length and Floquet multiplier.
void limit_cycle_criterion(CriterionResult& r, const ValidationOptions&) {
  const double lam = 0.1, beta = 1.0;
  const auto prog = dsl::parse_field(rs::source(lam, beta));
  const LimitCycle c = rs_cycle(prog);
  const MonodromyResult mono = monodromy(prog, c, tol(1e-12));
  double mult = 0.0;
  for (int i = 0; i < static_cast<int>(mono.multipliers.size()); ++i)
    if (i != mono.trivial_index) mult = std::abs(mono.multipliers[i]);
  const double ep = std::abs(c.period() - 2 * kPi);
  const double eL = std::abs(c.length() - 2 * kPi);
  const double em = std::abs(mult - std::exp(-2 * kPi * lam));
  r.pass = ep < 1e-8 && eL < 1e-6 && em < 1e-6 && mono.stable;
  r.details = {{"lambda", lam}, {"beta", beta}, {"p0", c.period()}, {"L", c.length()},
               {"multiplier", mult}, {"p0_error", ep}, {"L_error", eL},
               {"multiplier_error", em}, {"stable", mono.stable}};
  r.summary = fmt("|p0-2pi|=%.2e |L-2pi|=%.2e |mu-exp(-2pi lam)|=%.2e", ep, eL, em);
}

// 2. Normal-form coefficients.
void normal_form_criterion(CriterionResult& r, const ValidationOptions&) {
  const double lam = 0.1, beta = 1.0;
  const auto prog = dsl::parse_field(rs::source(lam, beta));
  const LimitCycle c = rs_cycle(prog);
  const NormalFormData nf = compute_normal_form(prog, c, build_frame(c), tol(1e-12));
  double eb0 = 0.0, eb1 = 0.0;
  for (int j = 0; j < nf.nodes(); ++j) {
    eb0 = std::max(eb0, std::abs(nf.b0(nf.s[j]) - 1.0));
    eb1 = std::max(eb1, std::abs(nf.b1[j][0] + beta));
  }
  const double eS = std::abs(nf.Sigma[0] - rs::shear_integral(beta));
  const double eA = std::abs(nf.A[0] + lam);
  r.pass = eb0 < 1e-6 && eb1 < 1e-4 && eS < 1e-3 && eA < 1e-6;
  r.details = {{"lambda", lam}, {"beta", beta}, {"b0_error", eb0}, {"b1_error", eb1},
               {"Sigma", nf.Sigma[0]}, {"Sigma_error", eS}, {"A", nf.A[0]}, {"A_error", eA},
               {"sigma", nf.sigma}};
  r.summary = fmt("|b0-1|=%.2e |b1+beta|=%.2e |Sigma+4pi beta|=%.2e |A+lam|=%.2e", eb0, eb1, eS,
                  eA);
}

// 3. Phi against its closed form, its critical points, and parameter invariance.
void phi_criterion(CriterionResult& r, const ValidationOptions&) {
  const double rho = 1.0;
  auto phi_of = [&](double lam, double beta) {
    const auto prog = dsl::parse_field(rs::source(lam, beta));
    const LimitCycle c = rs_cycle(prog);
    const MovingFrame fr = build_frame(c);
    const NormalFormData nf = compute_normal_form(prog, c, fr, tol(1e-12));
    PhiOptions po;
    po.rho = rho;
    return compute_phi(prog, c, fr, nf, po);
  };
  const PhiFunction base = phi_of(0.1, 1.0);
  constexpr int N = 2000;
  double sup = 0.0;
  for (int j = 0; j < N; ++j) {
    const double s = 4 * kPi * j / N;
    sup = std::max(sup, std::abs(base.phi(s) - rs::phi(s, rho, 1.0)));
  }
  std::vector<double> expected;
  for (double v : {(kPi - rho) / 2, (3 * kPi - rho) / 2}) {
    expected.push_back(v);
    expected.push_back(v + 2 * kPi);
  }
  double crit_err = 0.0;
  for (double e : expected) {
    double best = 1e300;
    for (const auto& cp : base.critical_points) best = std::min(best, std::abs(cp.s - e));
    crit_err = std::max(crit_err, best);
  }
  const bool count_ok = base.critical_points.size() == expected.size();

  // Phi is built from the unforced field and the forcing profile; eps never
  // enters, so only lambda and beta can move it.
  json scan = json::array();
  double drift = 0.0;
  for (auto [lam, beta] : {std::pair{0.05, 1.0}, {0.2, 1.0}, {0.1, 0.5}, {0.1, 4.0}}) {
    const PhiFunction p = phi_of(lam, beta);
    double d = 0.0;
    for (int j = 0; j < N; j += 4) {
      const double s = 4 * kPi * j / N;
      d = std::max(d, std::abs(p.phi(s) - base.phi(s)));
    }
    drift = std::max(drift, d);
    scan.push_back({{"lambda", lam}, {"beta", beta}, {"max_change", d}});
  }
  r.pass = sup < 1e-5 && count_ok && crit_err < 1e-6 && base.morse && drift < 1e-6;
  r.details = {{"sup_error", sup},         {"critical_points", base.critical_points.size()},
               {"critical_error", crit_err}, {"morse", base.morse},
               {"rescaling", scan},         {"max_rescaling_change", drift},
               {"epsilon_enters", false}};
  r.summary = fmt("sup=%.2e crit=%.2e rescale=%.2e", sup, crit_err, drift) +
              (base.morse ? " morse" : " not-morse");
}

// 4. Implicit singular limit against the closed form and finite differences.
void singular_limit_criterion(CriterionResult& r, const ValidationOptions&) {
  const double rho = 1.0, beta = 1.0, Lam = 100.0;
  const auto map = SingularLimitMap::reference(Lam, rho, beta);
  double err = 0.0;
  for (double a : {0.0, 0.7, 2.0, 5.5, 4 * kPi - 0.1})
    for (int j = 0; j < 1000; ++j) {
      const double s = 4 * kPi * j / 1000.0;
      err = std::max(err, std::abs(map(s, a) - rs::singular_limit(s, a, rho, Lam, beta)));
    }

  auto rel = [](double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); };
  // Same checks on the map assembled from the computed Phi, b0 and t_hat.
  const auto prog = dsl::parse_field(rs::source(0.1, beta));
  const LimitCycle c = rs_cycle(prog);
  const MovingFrame fr = build_frame(c);
  const NormalFormData nf = compute_normal_form(prog, c, fr, tol(1e-12));
  const PhiFunction phi = compute_phi(prog, c, fr, nf);
  const auto built = SingularLimitMap::from_phi(phi, c, Lam);

  double w1 = 0.0, w2 = 0.0, wa = 0.0, wb = 0.0;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 4 * kPi);
  for (const SingularLimitMap* m : {&map, &built}) {
    for (int k = 0; k < 100; ++k) {
      const double s = U(rng), a = U(rng);
      const auto d = m->derivs(s, a);
      const double h = 1e-4;
      const double fd1 = ((*m)(s + h, a) - (*m)(s - h, a)) / (2 * h);
      const double fd2 = ((*m)(s + h, a) - 2 * d.f + (*m)(s - h, a)) / (h * h);
      const double fda = ((*m)(s, a + h) - (*m)(s, a - h)) / (2 * h);
      w1 = std::max(w1, rel(fd1, d.d1));
      w2 = std::max(w2, rel(fd2, d.d2));
      wa = std::max(wa, rel(fda, d.da));
      wb = std::max(wb, rel(fda, m->b0()(a) / m->b0()(d.f)));
    }
  }
  r.pass = err < 1e-9 && w1 < 1e-5 && w2 < 1e-5 && wa < 1e-5 && wb < 1e-5;
  r.details = {{"Lambda", Lam},   {"closed_form_error", err}, {"d1_rel", w1},
               {"d2_rel", w2},    {"da_rel", wa},             {"da_vs_b0_ratio_rel", wb}};
  r.summary = fmt("closed=%.2e f'=%.2e f''=%.2e df/da=%.2e", err, w1, w2, std::max(wa, wb));
}

// 5. Critical-point estimate constants across Lambda.
void morse_criterion(CriterionResult& r, const ValidationOptions&) {
  std::vector<MorseEstimateFit> fits;
  json rows = json::array();
  for (double Lam : {50.0, 100.0, 200.0}) {
    const auto fit = fit_morse_estimates(SingularLimitMap::reference(Lam, 1.0, 1.0), 0.0);
    fits.push_back(fit);
    rows.push_back({{"Lambda", Lam}, {"q0", fit.q0}, {"K3", fit.K3}, {"K4", fit.K4},
                    {"K5", fit.K5}});
  }
  auto spread = [&](double MorseEstimateFit::*k) {
    double lo = 1e300, hi = 0.0;
    for (const auto& f : fits) {
      lo = std::min(lo, f.*k);
      hi = std::max(hi, f.*k);
    }
    return lo > 0 ? hi / lo : INFINITY;
  };
  bool q0 = true;
  for (const auto& f : fits) q0 = q0 && f.q0 == 4;
  const double s3 = spread(&MorseEstimateFit::K3), s4 = spread(&MorseEstimateFit::K4),
               s5 = spread(&MorseEstimateFit::K5);
  r.pass = q0 && s3 < 4 && s4 < 4 && s5 < 4;
  r.details = {{"fits", rows}, {"K3_spread", s3}, {"K4_spread", s4}, {"K5_spread", s5}};
  r.summary = fmt("q0=%g spread K3=%.2f K4=%.2f K5=%.2f", q0 ? 4.0 : -1.0, s3, s4, s5);
}

// 6. Misiurewicz certification at Lambda = 100.
void misiurewicz_criterion(CriterionResult& r, const ValidationOptions& o) {
  const auto map = SingularLimitMap::reference(100.0, 1.0, 1.0);
  MisiurewiczReport rep;
  rep.search = certified_reference();
  rep.n_target = 40;
  {
    PrecisionGuard g(rep.search.digits10);
    rep.expansion = verify_expansion(map, rep.search.a_star);
    rep.binding = check_binding(map, rep.search.a_star);
    rep.transversality = check_transversality(map, rep.search.a_star);
    rep.mixing = check_mixing(map, rep.search.a_star);
  }
  // Independent re-iteration with 30 more digits than the search used.
  double clearance;
  {
    PrecisionGuard g(rep.search.digits10 + 30);
    clearance = critical_orbit_clearance(map, mpreal(rep.search.a_star), 40);
  }
  double min_sum = 1e300;
  for (double s : rep.transversality.sums) min_sum = std::min(min_sum, std::abs(s));
  bool all_ones = !rep.mixing.Q.empty();
  for (const auto& row : rep.mixing.Q)
    for (int q : row) all_ones = all_ones && q == 1;
  int min_m = 1 << 30;
  for (const auto& s : rep.binding.samples) min_m = std::min(min_m, s.m);
  const double rate = std::exp(rep.expansion.lambda0 / 3);
  r.pass = clearance > 0 && rep.search.clearance > 0 && rep.binding.m_above_one &&
           min_sum > 0.5 && all_ones && rep.mixing.N == 1 && rate > 2;
  r.details = {{"a_star", static_cast<double>(rep.search.a_star)},
               {"clearance_search", rep.search.clearance},
               {"clearance_reverified", clearance},
               {"binding_min_m", min_m},
               {"binding_samples", rep.binding.samples.size()},
               {"transversality_min_abs_sum", min_sum},
               {"Q_all_ones", all_ones},
               {"N", rep.mixing.N},
               {"lambda0", rep.expansion.lambda0},
               {"exp_lambda0_over_3", rate}};
  artifact(o, "misiurewicz.json", to_json(rep, map));
  r.summary = fmt("clearance=%.2e min m=%g |sum|>=%.3f e^(l0/3)=%.3f", clearance, min_m, min_sum,
                  rate) +
              " N=" + std::to_string(rep.mixing.N);
}

// 7. Flow-extracted s-map converging to the constructed f_a.
void empirical_criterion(CriterionResult& r, const ValidationOptions& o) {
  const double lam = 0.05, beta = 1.0, eps = 1e-3, rho = 1.0, a = 0.6;
  const auto prog = dsl::parse_field(rs::source(lam, beta));
  const LimitCycle c = rs_cycle(prog);
  const MovingFrame fr = build_frame(c);
  const NormalFormData nf = compute_normal_form(prog, c, fr, tol(1e-12));
  PhiOptions po;
  po.rho = rho;
  const PhiFunction phi = compute_phi(prog, c, fr, nf, po);
  const auto map = SingularLimitMap::from_phi(phi, c, flow_fold_coefficient(eps, nf));
  std::vector<double> grid;
  for (int j = 0; j < 32; ++j) grid.push_back(c.length() * j / 32.0);
  EmpiricalOptions eo;
  eo.threads = o.threads;
  const std::vector<int> ms = {2, 4, 8};
  std::vector<double> sup;
  for (int m : ms) {
    const auto emp = empirical_singular_limit(prog, c, eps, rho, map.t_hat()(a), m, grid,
                                              tol(1e-11), eo);
    sup.push_back(empirical_sup_distance(emp, map, a, c.length()));
  }
  bool decreasing = true, consistent = true;
  json ratios = json::array();
  for (std::size_t i = 1; i < ms.size(); ++i) {
    decreasing = decreasing && sup[i] < sup[i - 1];
    const double obs = sup[i] / sup[i - 1];
    const double pred = std::exp(-2 * kPi * lam * 2 * (ms[i] - ms[i - 1]));
    consistent = consistent && obs / pred < 5 && pred / obs < 5;
    ratios.push_back({{"observed", obs}, {"predicted", pred}});
  }
  r.pass = decreasing && consistent;
  r.details = {{"m", ms}, {"sup_distance", sup}, {"ratios", ratios},
               {"Lambda_flow", map.Lambda()}};
  r.summary = fmt("sup m=2,4,8: %.2e %.2e %.2e", sup[0], sup[1], sup[2]) +
              (consistent ? " rate ok" : " rate off");
}

// Wilson score interval lower bound at 95%.
double wilson_lower(int k, int n) {
  if (n == 0) return 0.0;
  const double z = 1.96, p = static_cast<double>(k) / n;
  const double den = 1 + z * z / n;
  return (p + z * z / (2 * n) - z * std::sqrt(p * (1 - p) / n + z * z / (4.0 * n * n))) / den;
}

// 8. Neutral-plus-contracting unforced map, chaos and transient chaos when kicked.
void dichotomy_criterion(CriterionResult& r, const ValidationOptions& o) {
  const Strong& st = strong();
  json unforced = json::array();
  bool zero_ok = true;
  for (double T : {5.3, 11.7, 26.8}) {
    LyapunovOptions lo;
    lo.seed = o.seed;
    std::mt19937_64 rng(mix_seed(o.seed, static_cast<std::uint64_t>(T * 100)));
    const VectorXd x0 = random_near_cycle(st.cycle, 0.05, rng);
    const auto ly = lyapunov_spectrum(st.prog, st.at(T, 0.0), x0, 500, 50, st.cfg, lo, &st.cycle);
    ClassifyOptions co;
    co.seed = o.seed;
    const auto cl = classify_attractor(st.prog, st.cycle, st.at(T, 0.0), st.cfg, co);
    const double expect = -st.lam * T;
    const double rel = std::abs(ly.exponents[1] - expect) / std::abs(expect);
    const bool ok = rel < 0.1 && std::abs(ly.exponents[0]) < 0.02 &&
                    cl.cls != AttractorClass::Chaotic;
    zero_ok = zero_ok && ok;
    unforced.push_back({{"T", T}, {"exponents", ly.exponents}, {"expected", expect},
                        {"relative_error", rel}, {"class", to_string(cl.cls)}});
  }

  SweepOptions so;
  so.threads = o.threads;
  so.classify.seed = o.seed;
  const double T0 = st.window_start(2);
  const auto main = sweep_T(st.prog, st.cycle, st.at(T0, st.eps), T0, T0 + 1.0, 1.0 / 200,
                            st.cfg, so);
  int chaotic = 0, ci_ok = 0;
  for (const auto& p : main.points)
    if (p.c.cls == AttractorClass::Chaotic) {
      ++chaotic;
      if (p.c.top - p.c.ci > 0) ++ci_ok;
    }
  const int n = static_cast<int>(main.points.size());
  const double frac = static_cast<double>(chaotic) / std::max(n, 1);
  const double frac_lo = wilson_lower(chaotic, n);

  const auto wide = sweep_T(st.prog, st.cycle, st.at(T0, st.eps), T0 - 1.0, T0 + 2.0, 0.05,
                            st.cfg, so);
  json transient_sinks = json::array();
  for (const auto& p : wide.points)
    if (p.c.cls == AttractorClass::Sink && p.c.transient >= 20 && p.c.transient_exponent > 0)
      transient_sinks.push_back({{"T", p.T}, {"period", p.c.period},
                                 {"transient", p.c.transient},
                                 {"transient_exponent", p.c.transient_exponent}});
  if (!o.out_dir.empty()) {
    write_sweep_csv(artifact_path(o, "sweep_window.csv"), main);
    write_sweep_csv(artifact_path(o, "sweep_wide.csv"), wide);
  }
  r.pass = zero_ok && n >= 200 && chaotic > 0 && ci_ok == chaotic && frac_lo > 0 &&
           !transient_sinks.empty();
  r.details = {{"unforced", unforced},
               {"window", {T0, T0 + 1.0}},
               {"points", n},
               {"chaotic", chaotic},
               {"chaotic_fraction", frac},
               {"fraction_ci_lower", frac_lo},
               {"chaotic_with_ci_excluding_zero", ci_ok},
               {"wide_window", {T0 - 1.0, T0 + 2.0}},
               {"sinks_with_transient", transient_sinks}};
  r.summary =std::string("eps=0 ") + (zero_ok ? "ok" : "off") +
              fmt("; %g/%g chaotic (fraction %.3f, lower %.3f)", chaotic, n, frac, frac_lo) +
              "; transient sinks " + std::to_string(transient_sinks.size());
}

// 9. Time averages from independent initial conditions at a chaotic T.
void srb_criterion(CriterionResult& r, const ValidationOptions& o) {
  const Strong& st = strong();
  const double T0 = st.window_start(2);
  ClassifyOptions co;
  co.seed = o.seed;
  double T = -1.0;
  Classification found;
  json tried = json::array();
  for (int k = 0; k < 40 && T < 0; ++k) {
    const double t = T0 + 0.5 + 0.0125 * k;
    const auto c = classify_attractor(st.prog, st.cycle, st.at(t, st.eps), st.cfg, co);
    tried.push_back({{"T", t}, {"class", to_string(c.cls)}});
    if (c.cls == AttractorClass::Chaotic && c.top - c.ci > 0) {
      T = t;
      found = c;
    }
  }
  if (T < 0) {
    r.pass = false;
    r.details = {{"tried", tried}};
    r.summary = "no chaotic T found";
    return;
  }
  SrbOptions so;
  so.initial_points = 2;
  so.iterates = 100000;
  so.seed = o.seed;
  so.threads = o.threads;
  const auto rep = srb_diagnostics(st.prog, st.cycle, st.at(T, st.eps), st.cfg, so);
  if (!o.out_dir.empty()) write_histogram_csv(artifact_path(o, "srb_histogram.csv"), rep.histogram);
  json avg = json::array();
  for (const auto& row : rep.averages)
    avg.push_back({{"mean", row[0].mean}, {"halfwidth", row[0].halfwidth}});
  r.pass = rep.agree;
  r.details = {{"T", T},           {"top", found.top},           {"ci", found.ci},
               {"averages", avg},  {"worst_ratio", rep.worst_ratio},
               {"iterates", so.iterates}, {"decay_rate", rep.decay_rate}};
  r.summary = fmt("T=%.4f means %.4f %.4f, |diff|/combined CI=%.2f (limit 3)", T,
                  rep.averages[0][0].mean, rep.averages[1][0].mean, rep.worst_ratio);
}

// 10. |det DG_T| range under tolerance halving.
void det_ratio_criterion(CriterionResult& r, const ValidationOptions& o) {
  const Strong& st = strong();
  const double T = 26.8;
  const auto a = det_ratio(st.prog, st.cycle, st.at(T, st.eps), tol(1e-8), 100, 0.1, o.seed);
  const auto b = det_ratio(st.prog, st.cycle, st.at(T, st.eps), tol(5e-9), 100, 0.1, o.seed);
  const bool finite = std::isfinite(a.ratio) && std::isfinite(b.ratio) && a.min_det > 0 &&
                      b.min_det > 0;
  const double change = finite ? std::max(a.ratio / b.ratio, b.ratio / a.ratio) : INFINITY;
  r.pass = finite && change < 2;
  r.details = {{"T", T},
               {"ratio", a.ratio},
               {"ratio_half_tolerance", b.ratio},
               {"min_det", a.min_det},
               {"max_det", a.max_det},
               {"change", change},
               {"points", a.points}};
  r.summary = fmt("ratio %.6g -> %.6g (change x%.4f)", a.ratio, b.ratio, change);
}

struct Entry {
  const char* name;
  double limit;
  void (*run)(CriterionResult&, const ValidationOptions&);
};

const Entry kEntries[kCriteria] = {
    {"limit cycle", 5.0, limit_cycle_criterion},
    {"normal form", 10.0, normal_form_criterion},
    {"phi", 0.0, phi_criterion},
    {"singular limit", 0.0, singular_limit_criterion},
    {"morse estimates", 30.0, morse_criterion},
    {"misiurewicz", 120.0, misiurewicz_criterion},
    {"empirical convergence", 300.0, empirical_criterion},
    {"dynamics dichotomy", 900.0, dichotomy_criterion},
    {"srb averages", 0.0, srb_criterion},
    {"det ratio", 0.0, det_ratio_criterion},
};

}  // namespace

CriterionResult run_criterion(int id, const ValidationOptions& options) {
  if (id < 1 || id > kCriteria)
    throw Error(ErrorCode::InvalidArgument, "criterion id out of range: " + std::to_string(id));
  const Entry& sp = kEntries[id - 1];
  CriterionResult r;
  r.id = id;
  r.name = sp.name;
  r.time_limit = sp.limit;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    sp.run(r, options);
  } catch (const std::exception& e) {
    r.pass = false;
    r.summary = std::string("error: ") + e.what();
    r.details["error"] = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.time_limit > 0 && r.seconds >= r.time_limit) {
    r.pass = false;
    r.summary += fmt(" [over time limit %.0f s]", r.time_limit);
  }
  return r;
}

std::vector<CriterionResult> run_validation(const std::vector<int>& ids,
                                            const ValidationOptions& options) {
  std::vector<CriterionResult> out;
  for (int id : ids) out.push_back(run_criterion(id, options));
  return out;
}

nlohmann::json to_json(const CriterionResult& r) {
  return {{"id", r.id},       {"name", r.name},       {"pass", r.pass},
          {"seconds", r.seconds}, {"time_limit", r.time_limit}, {"summary", r.summary},
          {"details", r.details}};
}

}  // namespace shearlab
