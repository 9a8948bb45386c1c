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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pipeline.hpp"
#include "rs_oracle.hpp"

using namespace shearlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {
constexpr double kPi = std::numbers::pi;
const fs::path kConfigs = SHEARLAB_CONFIG_DIR;

json read_json(const fs::path& p) {
  std::ifstream is(p);
  return json::parse(is);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json base() { return read_json(kConfigs / "rs.json"); }

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("shearlab_pipeline_" + name);
  fs::remove_all(d);
  return d;
}

std::string config_error_kind(const json& j) {
  try {
    parse_config(j, kConfigs);
  } catch (const ConfigError& e) {
    return e.kind();
  }
  return "";
}

// Every declared artifact exists and parses.
void check_artifacts(const fs::path& dir, const json& summary) {
  for (const auto& a : summary["artifacts"]) {
    const auto p = dir / a["file"].get<std::string>();
    REQUIRE(fs::exists(p));
    const auto kind = a["kind"].get<std::string>();
    if (kind == "json") {
      CHECK_NOTHROW(read_json(p));
    } else if (kind == "csv") {
      std::ifstream is(p);
      std::string header, row;
      std::getline(is, header);
      CHECK(!header.empty());
      CHECK(std::getline(is, row));
      const auto cols = std::count(header.begin(), header.end(), ',');
      CHECK(std::count(row.begin(), row.end(), ',') == cols);
    } else {
      CHECK(slurp(p).find("plot ") != std::string::npos);
    }
  }
}
}  // namespace

TEST_CASE("bundled configuration loads") {
  const RunConfig c = load_config(kConfigs / "rs.json");
  CHECK(c.prog.dim() == 2);
  CHECK(c.prog.param("beta") == 1.0);
  CHECK(c.schedule.T == 26.8);
  CHECK(c.Lambda.value() == 100.0);
  CHECK(c.guess[0] == 1.3);
  CHECK(c.phi.rho == 1.0);
  CHECK(c.field_file == "rs.field");
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(load_config(kConfigs / "absent.json"), ConfigError);
  try {
    load_config(kConfigs / "absent.json");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == "file not found");
  }

  json j = base();
  j["field"]["file"] = "no_such.field";
  CHECK(config_error_kind(j) == "file not found");

  j = base();
  j["colour"] = 1;
  CHECK(config_error_kind(j) == "unknown key");

  j = base();
  j["schedule"]["T"] = 0.5;
  CHECK(config_error_kind(j) == "invalid value");

  j = base();
  j["integrator"]["abs_tol"] = -1;
  CHECK(config_error_kind(j) == "invalid value");

  j = base();
  j["cycle"]["guess"] = {1.0};
  CHECK(config_error_kind(j) == "invalid value");

  j = base();
  j["params"]["gamma"] = 2.0;
  CHECK(config_error_kind(j) == "field program");

  j = base();
  j["field"] = "f1 = x2; f2 = ;";
  CHECK(config_error_kind(j) == "field program");

  j = base();
  j["pipeline"]["frame"] = "bishop";
  CHECK(config_error_kind(j) == "invalid value");

  j = base();
  j["validate"] = {{"criteria", {0}}};
  CHECK(config_error_kind(j) == "invalid value");

  const auto bad = scratch("bad") / "bad.json";
  fs::create_directories(bad.parent_path());
  std::ofstream(bad) << "{ \"field\": ";
  try {
    load_config(bad);
    FAIL("expected a syntax error");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == "syntax");
  }
}

TEST_CASE("shear summary carries sigma and Lambda") {
  RunConfig c = load_config(kConfigs / "rs.json");
  c.out_dir = scratch("shear");
  const auto rr = run_command("shear", c);
  const json& s = rr.summary["result"]["shear"];
  const double beta = 1.0, lam = 0.1, eps = 0.01;
  CHECK(std::abs(s["sigma"].get<double>() - rs::shear_factor(beta)) < 1e-3);
  CHECK(std::abs(s["lambda1"].get<double>() + lam) < 1e-6);
  CHECK(s["Lambda"].get<double>() ==
        doctest::Approx(eps * s["sigma"].get<double>() / lam).epsilon(1e-12));
  CHECK(s["fold_coefficient"].get<double>() == doctest::Approx(eps * beta / lam).epsilon(1e-6));
  CHECK(rr.summary["result"]["morse"]["morse"] == true);
  check_artifacts(c.out_dir, rr.summary);
  CHECK(fs::exists(c.out_dir / "summary.json"));
  CHECK(fs::exists(c.out_dir / "timing.json"));
}

TEST_CASE("summaries are byte-identical across runs") {
  RunConfig c = load_config(kConfigs / "rs.json");
  c.out_dir = scratch("det_a");
  run_command("normal-form", c);
  const auto a = slurp(c.out_dir / "summary.json");
  c.out_dir = scratch("det_b");
  run_command("normal-form", c);
  CHECK(a == slurp(c.out_dir / "summary.json"));
  check_artifacts(c.out_dir, read_json(c.out_dir / "summary.json"));
}

TEST_CASE("find-cycle and singular-limit artifacts") {
  RunConfig c = load_config(kConfigs / "rs.json");
  c.out_dir = scratch("cycle");
  auto rr = run_command("find-cycle", c);
  CHECK(std::abs(rr.summary["result"]["p0"].get<double>() - 2 * kPi) < 1e-8);
  check_artifacts(c.out_dir, rr.summary);

  c.out_dir = scratch("sl");
  rr = run_command("singular-limit", c);
  const json& r = rr.summary["result"];
  CHECK(r["Lambda"] == 100.0);
  CHECK(r["critical_points"].size() == 4);
  CHECK(r["morse_estimates"]["q0"] == 4);
  // Flow s-map distances shrink with m.
  REQUIRE(r["empirical"].size() == 3);
  CHECK(r["empirical"][1]["sup_distance"].get<double>() <
        r["empirical"][0]["sup_distance"].get<double>());
  check_artifacts(c.out_dir, rr.summary);
}

TEST_CASE("lyapunov and sweep on the strong-shear config") {
  json j = read_json(kConfigs / "rs_strong.json");
  j["lab"]["iterates"] = 200;
  j["lab"]["srb_iterates"] = 500;
  j["lab"]["det_points"] = 10;
  j["sweep"] = {{"T_min", 26.7}, {"T_max", 26.8}, {"step", 0.05}};
  RunConfig c = parse_config(j, kConfigs);
  c.out_dir = scratch("lyap");
  auto rr = run_command("lyapunov", c);
  const json& r = rr.summary["result"];
  CHECK(r["exponents"].size() == 2);
  CHECK(r["det_ratio"]["ratio"].get<double>() >= 1.0);
  CHECK(r.contains("srb"));
  check_artifacts(c.out_dir, rr.summary);

  c.out_dir = scratch("sweep");
  rr = run_command("sweep", c);
  CHECK(rr.summary["result"]["points"] == 3);
  check_artifacts(c.out_dir, rr.summary);

  c.T_step = 0;
  CHECK_THROWS_AS(run_command("sweep", c), ConfigError);
  CHECK_THROWS_AS(run_command("dance", c), ConfigError);
}

TEST_CASE("validate runs a chosen subset") {
  json j = base();
  j["validate"] = {{"criteria", {1, 2}}};
  RunConfig c = parse_config(j, kConfigs);
  c.out_dir = scratch("validate");
  const auto rr = run_command("validate", c);
  CHECK(rr.ok);
  CHECK(rr.summary["result"]["criteria"].size() == 2);
  CHECK(rr.summary["result"]["all_pass"] == true);
  CHECK(rr.timing.contains("criterion_1"));
}
