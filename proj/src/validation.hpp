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

// Acceptance suite on the radial-shear reference system. Each criterion is
// self-contained and checks computed quantities against closed forms.

#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

namespace shearlab {

struct ValidationOptions {
  int threads = 1;
  std::uint64_t seed = 1;
  std::string out_dir;  // artifacts are written here when non-empty
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  double time_limit = 0.0;  // 0 = none
  std::string summary;
  nlohmann::json details;
};

constexpr int kCriteria = 10;

CriterionResult run_criterion(int id, const ValidationOptions& options = {});
std::vector<CriterionResult> run_validation(const std::vector<int>& ids,
                                            const ValidationOptions& options = {});

nlohmann::json to_json(const CriterionResult& r);

}  // namespace shearlab
