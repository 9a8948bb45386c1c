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

// Run configuration and command orchestration behind the command-line tool.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attractor_lab.hpp"
#include "errors.hpp"
#include "field_dsl.hpp"
#include "misiurewicz.hpp"
#include "normal_form.hpp"

namespace shearlab {

// Raised while loading or validating a configuration. `kind` is a short
// machine-readable tag such as "file not found" or "invalid value".
class ConfigError : public Error {
 public:
  ConfigError(std::string kind, const std::string& message, std::string key = {})
      : Error(ErrorCode::InvalidArgument, message), kind_(std::move(kind)), key_(std::move(key)) {}
  const std::string& kind() const noexcept { return kind_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::string kind_;
  std::string key_;
};

struct RunConfig {
  std::string field_source;
  std::string field_file;  // empty for inline sources
  std::map<std::string, double> params;
  dsl::FieldProgram prog;

  Eigen::VectorXd guess;
  CycleOptions cycle;
  IntegratorConfig cycle_config;  // cycle, frame and normal form
  IntegratorConfig config;        // forced-flow maps

  PulseSchedule schedule;
  double T_min = 0.0, T_max = 0.0, T_step = 0.0;  // sweep range; step 0 = unset

  FrameMethod frame = FrameMethod::ParallelTransport;
  PhiOptions phi;
  std::optional<double> Lambda;  // override of the singular-limit fold coefficient
  std::optional<double> xi;
  double a = 0.0;
  std::vector<int> m = {2, 4, 8};
  int grid = 64;
  int export_points = 1000;
  double tube_radius = 0.5;
  MisiurewiczOptions misiurewicz;
  ExpansionOptions expansion;

  int iterates = 2000;
  int burn_in = 100;
  double init_radius = 0.05;
  ClassifyOptions classify;
  int srb_iterates = 0;  // 0 = no SRB run in `lyapunov`
  int det_points = 100;

  std::vector<int> criteria;  // validate; empty = all

  std::uint64_t seed = 1;
  int threads = 1;
  std::filesystem::path out_dir = "shearlab_out";
};

// Reads a JSON configuration; relative field paths resolve against the
// config's directory. Throws ConfigError.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

extern const std::vector<std::string> kCommands;

struct RunResult {
  nlohmann::json summary;  // deterministic for fixed config and seed
  nlohmann::json timing;   // wall-clock seconds per stage
  bool ok = true;          // false when a check inside the command failed
};

// Runs one command, writing artifacts, summary.json and timing.json into
// config.out_dir. Pipeline failures throw Error.
RunResult run_command(const std::string& command, const RunConfig& config);

}  // namespace shearlab
