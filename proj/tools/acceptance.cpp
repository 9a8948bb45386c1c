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

// Runs the acceptance suite and prints one line per criterion.
// Usage: shearlab_acceptance [id ...]

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "validation.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty())
    for (int i = 1; i <= shearlab::kCriteria; ++i) ids.push_back(i);
  shearlab::ValidationOptions opt;
  if (const char* t = std::getenv("SHEARLAB_THREADS")) opt.threads = std::max(1, std::atoi(t));
  int failed = 0;
  for (int id : ids) {
    const auto r = shearlab::run_criterion(id, opt);
    std::printf("criterion %2d %s  %-22s %8.2fs  %s\n", r.id, r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.seconds, r.summary.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(ids.size()) - failed, ids.size());
  return failed == 0 ? 0 : 1;
}
