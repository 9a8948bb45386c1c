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

// Exercises the shared library through its C header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <numbers>
#include <string>

#include "shearlab/shearlab.h"

namespace {
constexpr double kPi = std::numbers::pi;

const char* kRs =
    "param lam = 0.1; param beta = 1;\n"
    "let r = sqrt(x1^2 + x2^2);\nlet w = 1 + beta*(r - 1);\n"
    "f1 = -lam*(r - 1)*x1/r - w*x2;\nf2 = -lam*(r - 1)*x2/r + w*x1;\n"
    "F1 = (x2/r)*(x1/r); F2 = (x2/r)*(x2/r);\n";

nlohmann::json last_error() { return nlohmann::json::parse(shearlab_last_error()); }
}  // namespace

TEST_CASE("field and cycle handles") {
  shearlab_field* f = nullptr;
  REQUIRE(shearlab_field_parse(kRs, &f) == SHEARLAB_OK);
  CHECK(shearlab_field_dim(f) == 2);
  const double guess[2] = {1.3, 0.0};
  shearlab_cycle* c = nullptr;
  REQUIRE(shearlab_cycle_find(f, guess, 2, 1e-12, 128, &c) == SHEARLAB_OK);
  CHECK(std::abs(shearlab_cycle_period(c) - 2 * kPi) < 1e-8);
  CHECK(std::abs(shearlab_cycle_length(c) - 2 * kPi) < 1e-6);
  double x[2];
  REQUIRE(shearlab_cycle_point(c, 0.0, x, 2) == SHEARLAB_OK);
  CHECK(std::abs(std::hypot(x[0], x[1]) - 1.0) < 1e-8);
  CHECK(shearlab_cycle_point(c, 0.0, x, 3) == SHEARLAB_ERR_INVALID_ARGUMENT);

  // Unforced relaxation from the cycle is a rotation by T.
  double y[2];
  REQUIRE(shearlab_time_T_map(f, 1.0, 2.5, 0.0, x, 2, 1e-12, y) == SHEARLAB_OK);
  CHECK(std::abs(std::atan2(y[1], y[0]) - std::remainder(std::atan2(x[1], x[0]) + 2.5, 2 * kPi)) <
        1e-8);
  CHECK(shearlab_time_T_map(f, 3.0, 2.5, 0.1, x, 2, 1e-12, y) != SHEARLAB_OK);

  REQUIRE(shearlab_field_set_param(f, "beta", 2.0) == SHEARLAB_OK);
  CHECK(shearlab_field_set_param(f, "gamma", 2.0) == SHEARLAB_ERR_INVALID_ARGUMENT);
  shearlab_cycle_destroy(c);
  shearlab_field_destroy(f);
}

TEST_CASE("errors are reported as JSON") {
  shearlab_field* f = nullptr;
  CHECK(shearlab_field_parse("f1 = x2 +;", &f) == SHEARLAB_ERR_PARSE);
  CHECK(f == nullptr);
  auto e = last_error();
  CHECK(e["status"] == "parse_error");
  CHECK(e.contains("line"));

  CHECK(shearlab_field_parse(nullptr, &f) == SHEARLAB_ERR_INVALID_ARGUMENT);
  CHECK(last_error()["status"] == "invalid_argument");

  shearlab_session* s = nullptr;
  CHECK(shearlab_session_open("/nonexistent/config.json", &s) == SHEARLAB_ERR_CONFIG);
  e = last_error();
  CHECK(e["kind"] == "file not found");
  CHECK(std::string(shearlab_status_string(SHEARLAB_ERR_PIPELINE)) == "pipeline_error");
}

TEST_CASE("session run writes a summary") {
  shearlab_session* s = nullptr;
  const std::string cfg = std::string(SHEARLAB_CONFIG_DIR) + "/rs.json";
  REQUIRE(shearlab_session_open(cfg.c_str(), &s) == SHEARLAB_OK);
  const auto out = std::filesystem::temp_directory_path() / "shearlab_capi_run";
  std::filesystem::remove_all(out);
  REQUIRE(shearlab_session_set_out_dir(s, out.c_str()) == SHEARLAB_OK);
  REQUIRE(shearlab_session_set_seed(s, 7) == SHEARLAB_OK);
  CHECK(shearlab_session_set_threads(s, 0) == SHEARLAB_ERR_INVALID_ARGUMENT);
  char* summary = nullptr;
  REQUIRE(shearlab_session_run(s, "find-cycle", &summary) == SHEARLAB_OK);
  const auto j = nlohmann::json::parse(summary);
  shearlab_string_free(summary);
  CHECK(j["seed"] == 7);
  CHECK(std::filesystem::exists(out / "summary.json"));
  CHECK(shearlab_session_run(s, "dance", &summary) == SHEARLAB_ERR_CONFIG);
  shearlab_session_destroy(s);
}

TEST_CASE("single criterion") {
  char* r = nullptr;
  REQUIRE(shearlab_validate_criterion(1, 1, 1, &r) == SHEARLAB_OK);
  const auto j = nlohmann::json::parse(r);
  shearlab_string_free(r);
  CHECK(j["pass"] == true);
  CHECK(shearlab_validate_criterion(11, 1, 1, &r) == SHEARLAB_ERR_INVALID_ARGUMENT);
}
