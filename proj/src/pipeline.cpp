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

#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "singular_limit.hpp"
#include "validation.hpp"

namespace shearlab {

namespace fs = std::filesystem;
using Eigen::VectorXd;
using nlohmann::json;

const std::vector<std::string> kCommands = {"find-cycle",         "normal-form", "shear",
                                            "singular-limit",     "misiurewicz-search",
                                            "lyapunov",           "sweep",       "validate"};

namespace {

std::string read_file(const fs::path& p, const std::string& key) {
  std::ifstream is(p, std::ios::binary);
  if (!is) {
    if (!fs::exists(p)) throw ConfigError("file not found", "file not found: " + p.string(), key);
    throw ConfigError("unreadable file", "cannot read " + p.string(), key);
  }
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Typed access with config errors naming the offending key.
class Reader {
 public:
  Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError("invalid value", prefix_ + " must be an object", prefix_);
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) throw ConfigError("unknown key", "unknown key " + name(k), name(k));
  }

  bool has(const char* k) const { return j_.contains(k) && !j_.at(k).is_null(); }

  template <class T>
  void get(const char* k, T& out) const {
    if (!has(k)) return;
    try {
      out = j_.at(k).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("invalid value", "wrong type for " + name(k), name(k));
    }
  }

  double positive(const char* k, double& out) const {
    get(k, out);
    if (!(out > 0) || !std::isfinite(out))
      throw ConfigError("invalid value", name(k) + " must be positive", name(k));
    return out;
  }

  template <class T>
  void at_least(const char* k, T& out, T lo) const {
    get(k, out);
    if (out < lo)
      throw ConfigError("invalid value", name(k) + " must be at least " + std::to_string(lo),
                        name(k));
  }

  Reader child(const char* k) const { return Reader(j_.at(k), name(k)); }
  const json& raw(const char* k) const { return j_.at(k); }
  std::string name(const std::string& k) const { return prefix_.empty() ? k : prefix_ + "." + k; }

 private:
  const json& j_;
  std::string prefix_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json complex_list(const std::vector<std::complex<double>>& v) {
  json out = json::array();
  for (const auto& z : v) out.push_back({{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}});
  return out;
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Output bookkeeping: artifacts are declared as they are written.
class Outputs {
 public:
  explicit Outputs(const fs::path& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir_.string());
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void declare(const std::string& name, const std::string& kind) {
    artifacts_.push_back({{"file", name}, {"kind", kind}});
  }
  void json_file(const std::string& name, const json& j) {
    std::ofstream os(path(name));
    os << j.dump(2) << '\n';
    if (!os) throw Error(ErrorCode::Io, "cannot write " + path(name));
    declare(name, "json");
  }
  // Gnuplot script over CSV columns named in the header.
  void plot(const std::string& name, const std::string& csv, const std::string& x,
            const std::vector<std::string>& ys, const std::string& title) {
    std::ofstream os(path(name));
    os << "set datafile separator ','\nset key autotitle columnhead\n"
       << "set title '" << title << "'\nset xlabel '" << x << "'\nplot ";
    for (std::size_t i = 0; i < ys.size(); ++i)
      os << (i ? ", " : "") << "'" << csv << "' using '" << x << "':'" << ys[i]
         << "' with lines";
    os << '\n';
    declare(name, "gnuplot");
  }
  const json& artifacts() const { return artifacts_; }

 private:
  fs::path dir_;
  json artifacts_ = json::array();
};

struct Timer {
  json& sink;
  explicit Timer(json& s) : sink(s) {}
  template <class F>
  auto operator()(const char* stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = f();
    sink[stage] = seconds_since(t0);
    return r;
  }
};

struct CycleStage {
  LimitCycle cycle;
  MonodromyResult mono;
};

struct NormalStage {
  MovingFrame frame;
  NormalFormData nf;
  PhiFunction phi;
};

CycleStage cycle_stage(const RunConfig& c, Timer& t) {
  CycleStage s{t("cycle", [&] { return find_limit_cycle(c.prog, c.guess, c.cycle_config, c.cycle); }),
               {}};
  s.mono = t("monodromy", [&] { return monodromy(c.prog, s.cycle, c.cycle_config); });
  return s;
}

NormalStage normal_stage(const RunConfig& c, const LimitCycle& cycle, Timer& t) {
  NormalStage s{t("frame", [&] { return build_frame(cycle, c.frame); }), {}, {}};
  s.nf = t("normal_form",
           [&] { return compute_normal_form(c.prog, cycle, s.frame, c.cycle_config); });
  s.phi = t("phi", [&] { return compute_phi(c.prog, cycle, s.frame, s.nf, c.phi); });
  return s;
}

json cycle_json(const CycleStage& s) {
  return {{"p0", s.cycle.period()},
          {"L", s.cycle.length()},
          {"nodes", s.cycle.nodes()},
          {"closure_gap", s.cycle.closure_gap()},
          {"multipliers", complex_list(s.mono.multipliers)},
          {"stable", s.mono.stable}};
}

json morse_json(const PhiFunction& phi) {
  json cps = json::array();
  for (const auto& cp : phi.critical_points) cps.push_back({{"s", cp.s}, {"phi2", cp.phi2}});
  return {{"morse", phi.morse},
          {"reason", phi.morse_reason},
          {"critical_points", cps},
          {"d0", phi.constants.d0},
          {"d1", phi.constants.d1},
          {"d2", phi.constants.d2},
          {"delta0", phi.constants.delta0},
          {"K2", phi.constants.K2}};
}

// Hyperbolicity factor eps sigma / |lambda_1| and the fold
// coefficient that the flow-derived family actually carries.
json shear_json(const RunConfig& c, const NormalStage& n) {
  const double lam1 = n.nf.lambda1();
  return {{"Sigma", vec_json(n.nf.Sigma)},
          {"sigma", n.nf.sigma},
          {"lambda1", lam1},
          {"A", vec_json(n.nf.A)},
          {"mu", vec_json(n.nf.mu)},
          {"d", vec_json(n.nf.d)},
          {"epsilon", c.schedule.epsilon},
          {"Lambda", c.schedule.epsilon * n.nf.sigma / std::abs(lam1)},
          {"fold_coefficient", flow_fold_coefficient(c.schedule.epsilon, n.nf)},
          {"floquet_residual", n.nf.floquet_residual}};
}

SingularLimitMap build_map(const RunConfig& c, const CycleStage& cs, const NormalStage& n) {
  const double Lam = c.Lambda ? *c.Lambda : flow_fold_coefficient(c.schedule.epsilon, n.nf);
  auto map = SingularLimitMap::from_phi(n.phi, cs.cycle, Lam);
  if (c.xi) map.set_xi(*c.xi);
  return map;
}

void run_find_cycle(const RunConfig& c, Outputs& out, Timer& t, json& res) {
  const auto cs = cycle_stage(c, t);
  cs.cycle.save(out.path("cycle.csv"), out.path("cycle.json"), cs.mono.multipliers);
  out.declare("cycle.csv", "csv");
  out.declare("cycle.json", "json");
  out.plot("cycle.gp", "cycle.csv", "x1", {"x2"}, "limit cycle");
  res = cycle_json(cs);
}

void run_normal_form(const RunConfig& c, Outputs& out, Timer& t, json& res, bool shear_only) {
  const auto cs = cycle_stage(c, t);
  const auto n = normal_stage(c, cs.cycle, t);
  if (!shear_only) {
    save_normal_form(out.path("normal_form.json"), out.path("normal_form.csv"), n.nf, &n.phi);
    out.declare("normal_form.json", "json");
    out.declare("normal_form.csv", "csv");
    out.plot("phi.gp", "normal_form.csv", "s", {"Phi"}, "Phi");
    res["cycle"] = cycle_json(cs);
    res["b0_mean"] = n.nf.b0.a0();
  }
  res["shear"] = shear_json(c, n);
  res["morse"] = morse_json(n.phi);
  if (shear_only) out.json_file("shear.json", res);
}

void run_singular_limit(const RunConfig& c, Outputs& out, Timer& t, json& res) {
  const auto cs = cycle_stage(c, t);
  const auto n = normal_stage(c, cs.cycle, t);
  const auto map = build_map(c, cs, n);
  save_singular_limit_csv(out.path("singular_limit.csv"), map, c.a, c.export_points);
  out.declare("singular_limit.csv", "csv");
  out.plot("singular_limit.gp", "singular_limit.csv", "s", {"f"}, "singular limit");
  json crit = map.critical_points();
  res = {{"Lambda", map.Lambda()}, {"a", c.a},          {"xi", map.xi()},
         {"two_L", map.two_L()},   {"critical_points", crit}};
  if (map.critical_points().size() >= 2) {
    const auto fit = t("morse_estimates", [&] { return fit_morse_estimates(map, c.a); });
    res["morse_estimates"] = {{"q0", fit.q0}, {"K3", fit.K3}, {"K4", fit.K4}, {"K5", fit.K5},
                              {"K6", fit.K6}};
  }
  if (c.schedule.epsilon > 0 && !c.m.empty()) {
    std::vector<double> grid;
    for (int j = 0; j < c.grid; ++j) grid.push_back(cs.cycle.length() * j / c.grid);
    EmpiricalOptions eo;
    eo.threads = c.threads;
    eo.tube_radius = c.tube_radius;
    std::ofstream csv(out.path("empirical.csv"));
    csv << "m,T,sup_distance\n";
    csv.precision(17);
    json rows = json::array();
    // The flow s-map converges to the family with the flow's own fold coefficient.
    auto flow_map = SingularLimitMap::from_phi(n.phi, cs.cycle,
                                               flow_fold_coefficient(c.schedule.epsilon, n.nf));
    res["Lambda_flow"] = flow_map.Lambda();
    for (int m : c.m) {
      const auto emp = t("empirical", [&] {
        return empirical_singular_limit(c.prog, cs.cycle, c.schedule.epsilon, c.schedule.rho,
                                        flow_map.t_hat()(c.a), m, grid, c.config, eo);
      });
      const double d = empirical_sup_distance(emp, flow_map, c.a, cs.cycle.length());
      csv << m << ',' << emp.T << ',' << d << '\n';
      rows.push_back({{"m", m}, {"T", emp.T}, {"sup_distance", d}});
    }
    out.declare("empirical.csv", "csv");
    out.plot("empirical.gp", "empirical.csv", "m", {"sup_distance"}, "flow s-map vs f_a");
    res["empirical"] = rows;
  }
}

void run_misiurewicz(const RunConfig& c, Outputs& out, Timer& t, json& res, bool& ok) {
  const auto cs = cycle_stage(c, t);
  const auto n = normal_stage(c, cs.cycle, t);
  const auto map = build_map(c, cs, n);
  const auto rep = t("certify", [&] { return certify(map, c.misiurewicz, c.expansion); });
  json j = to_json(rep, map);
  out.json_file("misiurewicz.json", j);
  write_search_trace_csv(out.path("search_trace.csv"), rep.search.config);
  out.declare("search_trace.csv", "csv");
  {
    PrecisionGuard g(rep.search.digits10);
    save_singular_limit_csv(out.path("certified_map.csv"), map,
                            static_cast<double>(rep.search.a_star), c.export_points);
  }
  out.declare("certified_map.csv", "csv");
  out.plot("certified_map.gp", "certified_map.csv", "s", {"f"}, "certified map");
  ok = rep.search.clearance > 0 && rep.binding.m_above_one && rep.transversality.pass &&
       rep.mixing.verdict && rep.expansion.mixing_rate;
  res = std::move(j);
  res["certified"] = ok;
}

void run_lyapunov(const RunConfig& c, Outputs& out, Timer& t, json& res) {
  const auto cs = cycle_stage(c, t);
  std::mt19937_64 rng(c.seed);
  const VectorXd x0 = random_near_cycle(cs.cycle, c.init_radius, rng);
  LyapunovOptions lo;
  lo.seed = c.seed;
  lo.escape_radius = c.classify.escape_radius;
  const auto ly = t("lyapunov", [&] {
    return lyapunov_spectrum(c.prog, c.schedule, x0, c.iterates, c.burn_in, c.config, lo,
                             &cs.cycle);
  });
  ClassifyOptions co = c.classify;
  co.seed = c.seed;
  const auto cl =
      t("classify", [&] { return classify_attractor(c.prog, cs.cycle, c.schedule, c.config, co); });
  res = {{"T", c.schedule.T},
         {"epsilon", c.schedule.epsilon},
         {"exponents", ly.exponents},
         {"per_time", ly.per_time},
         {"ci_halfwidth", ly.ci_halfwidth},
         {"log_det_mean", ly.log_det_mean},
         {"sum_rule_error", ly.sum_rule_error},
         {"class", to_string(cl.cls)},
         {"classification",
          {{"top", cl.top}, {"ci", cl.ci}, {"period", cl.period}, {"transient", cl.transient},
           {"transient_exponent", cl.transient_exponent}}}};
  const auto dr = t("det_ratio", [&] {
    return det_ratio(c.prog, cs.cycle, c.schedule, c.config, c.det_points, c.init_radius,
                     c.seed);
  });
  res["det_ratio"] = {{"min", dr.min_det}, {"max", dr.max_det}, {"ratio", dr.ratio},
                      {"points", dr.points}};
  if (c.srb_iterates > 0) {
    SrbOptions so;
    so.iterates = c.srb_iterates;
    so.seed = c.seed;
    so.threads = c.threads;
    so.init_radius = c.init_radius;
    so.escape_radius = c.classify.escape_radius;
    const auto srb =
        t("srb", [&] { return srb_diagnostics(c.prog, cs.cycle, c.schedule, c.config, so); });
    write_histogram_csv(out.path("histogram.csv"), srb.histogram);
    out.declare("histogram.csv", "csv");
    out.plot("histogram.gp", "histogram.csv", "bin", {"mass"}, "s-marginal");
    json avg = json::array();
    for (const auto& row : srb.averages)
      avg.push_back({{"mean", row[0].mean}, {"halfwidth", row[0].halfwidth}});
    res["srb"] = {{"averages", avg},
                  {"agree", srb.agree},
                  {"worst_ratio", srb.worst_ratio},
                  {"autocorrelation", srb.autocorrelation},
                  {"decay_rate", srb.decay_rate}};
  }
  out.json_file("lyapunov.json", res);
}

void run_sweep(const RunConfig& c, Outputs& out, Timer& t, json& res) {
  if (c.T_step <= 0) throw ConfigError("missing value", "sweep needs sweep.T_min, T_max, step", "sweep");
  const auto cs = cycle_stage(c, t);
  SweepOptions so;
  so.classify = c.classify;
  so.classify.seed = c.seed;
  so.threads = c.threads;
  const auto sw = t("sweep", [&] {
    return sweep_T(c.prog, cs.cycle, c.schedule, c.T_min, c.T_max, c.T_step, c.config, so);
  });
  write_sweep_csv(out.path("sweep.csv"), sw);
  out.declare("sweep.csv", "csv");
  out.plot("sweep.gp", "sweep.csv", "T", {"top"}, "top exponent per map");
  std::map<std::string, int> counts;
  for (const auto& p : sw.points) ++counts[to_string(p.c.cls)];
  json windows = json::array();
  for (std::size_t i = 0; i < sw.window_start.size(); ++i)
    windows.push_back({{"start", sw.window_start[i]}, {"chaotic_fraction", sw.window_fraction[i]}});
  res = {{"points", sw.points.size()},
         {"counts", counts},
         {"chaotic_fraction", chaotic_fraction(sw, c.T_min, c.T_max - c.T_min + c.T_step / 2)},
         {"windows", windows}};
}

bool run_validate(const RunConfig& c, Outputs& out, json& res, json& timing) {
  ValidationOptions vo;
  vo.threads = c.threads;
  vo.seed = c.seed;
  vo.out_dir = out.path("validate");
  std::vector<int> ids = c.criteria;
  if (ids.empty())
    for (int i = 1; i <= kCriteria; ++i) ids.push_back(i);
  json rows = json::array();
  bool ok = true;
  for (int id : ids) {
    auto r = run_criterion(id, vo);
    timing["criterion_" + std::to_string(id)] = r.seconds;
    ok = ok && r.pass;
    rows.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"details", r.details}});
  }
  res = {{"criteria", rows}, {"all_pass", ok}};
  if (fs::exists(vo.out_dir))
    for (const auto& e : fs::directory_iterator(vo.out_dir)) {
      const auto name = "validate/" + e.path().filename().string();
      out.declare(name, e.path().extension() == ".json" ? "json" : "csv");
    }
  return ok;
}

}  // namespace

RunConfig parse_config(const json& j, const fs::path& base_dir) {
  RunConfig c;
  const Reader top(j, "");
  top.allow({"field", "params", "schedule", "sweep", "integrator", "cycle", "pipeline", "lab",
             "validate", "seed", "threads", "out"});
  if (!top.has("field")) throw ConfigError("missing value", "config needs a field", "field");
  if (top.raw("field").is_string()) {
    c.field_source = top.raw("field").get<std::string>();
  } else {
    const Reader f = top.child("field");
    f.allow({"source", "file"});
    if (f.has("source") == f.has("file"))
      throw ConfigError("invalid value", "field needs exactly one of source, file", "field");
    f.get("source", c.field_source);
    if (f.has("file")) {
      f.get("file", c.field_file);
      fs::path p(c.field_file);
      if (p.is_relative()) p = base_dir / p;
      c.field_source = read_file(p, "field.file");
    }
  }
  if (top.has("params")) top.get("params", c.params);
  try {
    c.prog = dsl::parse_field(c.field_source, c.params);
  } catch (const Error& e) {
    throw ConfigError("field program", e.what(), "field");
  }

  const int n = c.prog.dim();
  c.guess = VectorXd::Zero(n);
  c.guess[0] = 1.0;
  c.cycle.nodes = 256;
  c.cycle_config.abs_tol = c.cycle_config.rel_tol = 1e-12;
  if (top.has("cycle")) {
    const Reader r = top.child("cycle");
    r.allow({"guess", "nodes", "tolerance"});
    if (r.has("guess")) {
      std::vector<double> g;
      r.get("guess", g);
      if (static_cast<int>(g.size()) != n)
        throw ConfigError("invalid value", "cycle.guess must have " + std::to_string(n) + " entries",
                          "cycle.guess");
      c.guess = Eigen::Map<VectorXd>(g.data(), n);
    }
    r.at_least("nodes", c.cycle.nodes, 16);
    double tl = 1e-12;
    if (r.has("tolerance")) c.cycle_config.abs_tol = c.cycle_config.rel_tol = r.positive("tolerance", tl);
  }
  if (top.has("integrator")) {
    const Reader r = top.child("integrator");
    r.allow({"abs_tol", "rel_tol", "max_step"});
    if (r.has("abs_tol")) r.positive("abs_tol", c.config.abs_tol);
    if (r.has("rel_tol")) r.positive("rel_tol", c.config.rel_tol);
    r.get("max_step", c.config.max_step);
    if (c.config.max_step < 0)
      throw ConfigError("invalid value", "integrator.max_step must be >= 0", "integrator.max_step");
  }
  if (top.has("schedule")) {
    const Reader r = top.child("schedule");
    r.allow({"rho", "T", "epsilon"});
    r.positive("rho", c.schedule.rho);
    if (r.has("T")) r.positive("T", c.schedule.T);
    r.get("epsilon", c.schedule.epsilon);
    if (c.schedule.epsilon < 0)
      throw ConfigError("invalid value", "schedule.epsilon must be >= 0", "schedule.epsilon");
  }
  if (!(c.schedule.rho < c.schedule.T))
    throw ConfigError("invalid value", "schedule needs rho < T", "schedule.T");
  if (top.has("sweep")) {
    const Reader r = top.child("sweep");
    r.allow({"T_min", "T_max", "step"});
    r.positive("T_min", c.T_min);
    r.positive("T_max", c.T_max);
    r.positive("step", c.T_step);
    if (!(c.T_min <= c.T_max) || !(c.schedule.rho < c.T_min))
      throw ConfigError("invalid value", "sweep needs rho < T_min <= T_max", "sweep");
  }
  if (top.has("pipeline")) {
    const Reader r = top.child("pipeline");
    r.allow({"frame", "rho", "hessian_threshold", "scan_points", "Lambda", "xi", "a", "m", "grid",
             "export_points", "tube_radius", "n_target", "Lambda3", "a_center", "max_restarts",
             "U_radius", "horizon"});
    if (r.has("frame")) {
      std::string f;
      r.get("frame", f);
      try {
        c.frame = frame_method_from_string(f);
      } catch (const Error& e) {
        throw ConfigError("invalid value", e.what(), "pipeline.frame");
      }
    }
    if (r.has("hessian_threshold")) r.positive("hessian_threshold", c.phi.hessian_threshold);
    r.at_least("scan_points", c.phi.scan_points, 64);
    double v = 0;
    if (r.has("Lambda")) c.Lambda = r.positive("Lambda", v);
    if (r.has("xi")) c.xi = r.positive("xi", v);
    r.get("a", c.a);
    r.get("m", c.m);
    for (int m : c.m)
      if (m < 1) throw ConfigError("invalid value", "pipeline.m entries must be >= 1", "pipeline.m");
    r.at_least("grid", c.grid, 8);
    r.at_least("export_points", c.export_points, 2);
    if (r.has("tube_radius")) r.positive("tube_radius", c.tube_radius);
    r.at_least("n_target", c.misiurewicz.n_target, 1);
    if (r.has("Lambda3")) r.positive("Lambda3", c.misiurewicz.Lambda3);
    r.get("a_center", c.misiurewicz.a_center);
    r.at_least("max_restarts", c.misiurewicz.max_restarts, 0);
    if (r.has("U_radius")) r.positive("U_radius", c.expansion.U_radius);
    r.at_least("horizon", c.expansion.horizon, 1);
  }
  // Phi uses the kick length of the schedule.
  c.phi.rho = c.schedule.rho;
  if (top.has("lab")) {
    const Reader r = top.child("lab");
    r.allow({"iterates", "burn_in", "init_radius", "escape_radius", "classify_iterates",
             "classify_burn_in", "transient_cap", "srb_iterates", "det_points"});
    r.at_least("iterates", c.iterates, 100);
    r.at_least("burn_in", c.burn_in, 0);
    if (r.has("init_radius")) r.positive("init_radius", c.init_radius);
    if (r.has("escape_radius")) r.positive("escape_radius", c.classify.escape_radius);
    r.at_least("classify_iterates", c.classify.iterates, 100);
    r.at_least("classify_burn_in", c.classify.burn_in, 0);
    r.at_least("transient_cap", c.classify.transient_cap, 0);
    r.at_least("srb_iterates", c.srb_iterates, 0);
    r.at_least("det_points", c.det_points, 2);
  }
  c.classify.init_radius = c.init_radius;
  if (top.has("validate")) {
    const Reader r = top.child("validate");
    r.allow({"criteria"});
    r.get("criteria", c.criteria);
    for (int id : c.criteria)
      if (id < 1 || id > kCriteria)
        throw ConfigError("invalid value", "validate.criteria entries must be in 1..10",
                          "validate.criteria");
  }
  top.get("seed", c.seed);
  top.at_least("threads", c.threads, 1);
  if (top.has("out")) {
    std::string o;
    top.get("out", o);
    c.out_dir = o;
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  const std::string text = read_file(path, "config");
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("syntax", std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j, path.parent_path());
}

RunResult run_command(const std::string& command, const RunConfig& config) {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    throw ConfigError("unknown command", "unknown command '" + command + "'", "command");
  Outputs out(config.out_dir);
  RunResult rr;
  Timer t(rr.timing);
  json res;
  if (command == "find-cycle") run_find_cycle(config, out, t, res);
  else if (command == "normal-form") run_normal_form(config, out, t, res, false);
  else if (command == "shear") run_normal_form(config, out, t, res, true);
  else if (command == "singular-limit") run_singular_limit(config, out, t, res);
  else if (command == "misiurewicz-search") run_misiurewicz(config, out, t, res, rr.ok);
  else if (command == "lyapunov") run_lyapunov(config, out, t, res);
  else if (command == "sweep") run_sweep(config, out, t, res);
  else rr.ok = run_validate(config, out, res, rr.timing);

  rr.summary = {{"command", command},
                {"seed", config.seed},
                {"ok", rr.ok},
                {"field_file", config.field_file},
                {"params", config.params},
                {"result", res},
                {"artifacts", out.artifacts()}};
  std::ofstream(out.path("summary.json")) << rr.summary.dump(2) << '\n';
  std::ofstream(out.path("timing.json")) << rr.timing.dump(2) << '\n';
  return rr;
}

}  // namespace shearlab
