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

// shearlab <command> --config <path> [--out <dir>] [--seed <u64>] [--threads <k>]
// Exit status: 0 ok, 1 pipeline failure, 2 configuration error.

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <string>

#include "shearlab/shearlab.h"

namespace {

constexpr int kExitPipeline = 1;
constexpr int kExitConfig = 2;

int report(shearlab_status st) {
  std::cerr << shearlab_last_error() << std::endl;
  return st == SHEARLAB_ERR_CONFIG || st == SHEARLAB_ERR_PARSE ? kExitConfig : kExitPipeline;
}

int usage_error(const std::string& message) {
  std::cerr << nlohmann::json{{"status", "config_error"}, {"kind", "usage"}, {"message", message}}
                   .dump()
            << std::endl;
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shearlab: shear-induced chaos in pulse-driven oscillators"};
  app.set_version_flag("--version", shearlab_version());
  std::string command, config, out;
  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("command", command,
                 "find-cycle | normal-form | shear | singular-limit | misiurewicz-search | "
                 "lyapunov | sweep | validate")
      ->required()
      ->check(CLI::IsMember({"find-cycle", "normal-form", "shear", "singular-limit",
                             "misiurewicz-search", "lyapunov", "sweep", "validate"}));
  app.add_option("--config", config, "run configuration (JSON)")->required();
  auto* out_opt = app.add_option("--out", out, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  auto* threads_opt =
      app.add_option("--threads", threads, "worker threads (default: $SHEARLAB_THREADS)")
          ->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return usage_error(e.what());
  }

  if (!threads_opt->count()) {
    if (const char* env = std::getenv("SHEARLAB_THREADS"); env && *env) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        threads = 0;
      }
      if (threads < 1) return usage_error("SHEARLAB_THREADS must be a positive integer");
    }
  }

  shearlab_session* session = nullptr;
  if (auto st = shearlab_session_open(config.c_str(), &session); st != SHEARLAB_OK)
    return report(st);
  shearlab_status st = SHEARLAB_OK;
  if (out_opt->count()) st = shearlab_session_set_out_dir(session, out.c_str());
  if (st == SHEARLAB_OK && seed_opt->count()) st = shearlab_session_set_seed(session, seed);
  if (st == SHEARLAB_OK && threads > 0) st = shearlab_session_set_threads(session, threads);
  if (st != SHEARLAB_OK) {
    shearlab_session_destroy(session);
    return report(st);
  }

  char* summary = nullptr;
  st = shearlab_session_run(session, command.c_str(), &summary);
  if (summary) {
    std::cout << summary << std::endl;
    shearlab_string_free(summary);
  }
  shearlab_session_destroy(session);
  return st == SHEARLAB_OK ? 0 : report(st);
}
