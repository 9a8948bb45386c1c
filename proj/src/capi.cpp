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

#include "shearlab/shearlab.h"

#include <cstring>
#include <new>
#include <string>

#include "dynsys.hpp"
#include "limit_cycle.hpp"
#include "pipeline.hpp"
#include "validation.hpp"

using nlohmann::json;

struct shearlab_field {
  std::string source;
  std::map<std::string, double> params;
  shearlab::dsl::FieldProgram prog;
};

struct shearlab_cycle {
  shearlab::LimitCycle cycle;
};

struct shearlab_session {
  shearlab::RunConfig config;
};

namespace {

thread_local std::string g_last_error = "{}";

shearlab_status fail(shearlab_status st, json err) {
  err["status"] = shearlab_status_string(st);
  g_last_error = err.dump();
  return st;
}

shearlab_status fail(shearlab_status st, const std::string& kind, const std::string& message) {
  return fail(st, json{{"kind", kind}, {"message", message}});
}

// Maps exceptions from the core onto status codes.
template <class F>
shearlab_status guarded(F&& f) {
  try {
    return f();
  } catch (const shearlab::ConfigError& e) {
    json j{{"kind", e.kind()}, {"message", e.what()}};
    if (!e.key().empty()) j["key"] = e.key();
    return fail(SHEARLAB_ERR_CONFIG, j);
  } catch (const shearlab::ParseError& e) {
    return fail(SHEARLAB_ERR_PARSE, json{{"kind", "parse"},
                                         {"message", e.what()},
                                         {"line", e.line()},
                                         {"column", e.column()}});
  } catch (const shearlab::Error& e) {
    const auto st = e.code() == shearlab::ErrorCode::Io ? SHEARLAB_ERR_IO
                    : e.code() == shearlab::ErrorCode::InvalidArgument
                        ? SHEARLAB_ERR_INVALID_ARGUMENT
                    : e.code() == shearlab::ErrorCode::Internal ? SHEARLAB_ERR_INTERNAL
                                                                 : SHEARLAB_ERR_PIPELINE;
    return fail(st, shearlab::to_string(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SHEARLAB_ERR_INTERNAL, "memory", "out of memory");
  } catch (const std::exception& e) {
    return fail(SHEARLAB_ERR_INTERNAL, "internal", e.what());
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

shearlab_status null_arg(const char* what) {
  return fail(SHEARLAB_ERR_INVALID_ARGUMENT, "invalid argument", std::string(what) + " is null");
}

shearlab::IntegratorConfig tolerance(double t) {
  shearlab::IntegratorConfig c;
  c.abs_tol = c.rel_tol = t;
  return c;
}

}  // namespace

extern "C" {

const char* shearlab_version(void) { return "1.0.0"; }

const char* shearlab_status_string(shearlab_status s) {
  switch (s) {
    case SHEARLAB_OK: return "ok";
    case SHEARLAB_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SHEARLAB_ERR_CONFIG: return "config_error";
    case SHEARLAB_ERR_PARSE: return "parse_error";
    case SHEARLAB_ERR_PIPELINE: return "pipeline_error";
    case SHEARLAB_ERR_CHECK_FAILED: return "check_failed";
    case SHEARLAB_ERR_IO: return "io_error";
    case SHEARLAB_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* shearlab_last_error(void) { return g_last_error.c_str(); }

void shearlab_string_free(char* s) { std::free(s); }

shearlab_status shearlab_field_parse(const char* source, shearlab_field** out) {
  if (!source) return null_arg("source");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto f = std::make_unique<shearlab_field>();
    f->source = source;
    f->prog = shearlab::dsl::parse_field(f->source);
    *out = f.release();
    return SHEARLAB_OK;
  });
}

void shearlab_field_destroy(shearlab_field* field) { delete field; }

int shearlab_field_dim(const shearlab_field* field) { return field ? field->prog.dim() : 0; }

shearlab_status shearlab_field_set_param(shearlab_field* field, const char* name, double value) {
  if (!field) return null_arg("field");
  if (!name) return null_arg("name");
  return guarded([&] {
    auto params = field->params;
    params[name] = value;
    field->prog = shearlab::dsl::parse_field(field->source, params);
    field->params = std::move(params);
    return SHEARLAB_OK;
  });
}

shearlab_status shearlab_cycle_find(const shearlab_field* field, const double* guess, size_t n,
                                    double tol, int nodes, shearlab_cycle** out) {
  if (!field) return null_arg("field");
  if (!guess) return null_arg("guess");
  if (!out) return null_arg("out");
  *out = nullptr;
  if (static_cast<int>(n) != field->prog.dim())
    return fail(SHEARLAB_ERR_INVALID_ARGUMENT, "invalid argument", "guess size != field dimension");
  if (!(tol > 0)) return fail(SHEARLAB_ERR_INVALID_ARGUMENT, "invalid argument", "tolerance <= 0");
  return guarded([&] {
    shearlab::CycleOptions opt;
    if (nodes > 0) opt.nodes = nodes;
    Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(guess, static_cast<Eigen::Index>(n));
    *out = new shearlab_cycle{shearlab::find_limit_cycle(field->prog, g, tolerance(tol), opt)};
    return SHEARLAB_OK;
  });
}

void shearlab_cycle_destroy(shearlab_cycle* cycle) { delete cycle; }

double shearlab_cycle_period(const shearlab_cycle* cycle) {
  return cycle ? cycle->cycle.period() : 0.0;
}

double shearlab_cycle_length(const shearlab_cycle* cycle) {
  return cycle ? cycle->cycle.length() : 0.0;
}

shearlab_status shearlab_cycle_point(const shearlab_cycle* cycle, double s, double* x, size_t n) {
  if (!cycle) return null_arg("cycle");
  if (!x) return null_arg("x");
  if (static_cast<int>(n) != cycle->cycle.dim())
    return fail(SHEARLAB_ERR_INVALID_ARGUMENT, "invalid argument", "x size != cycle dimension");
  return guarded([&] {
    const Eigen::VectorXd p = cycle->cycle.point(s);
    std::copy(p.data(), p.data() + n, x);
    return SHEARLAB_OK;
  });
}

shearlab_status shearlab_time_T_map(const shearlab_field* field, double rho, double T,
                                    double epsilon, const double* x, size_t n, double tol,
                                    double* x_out) {
  if (!field) return null_arg("field");
  if (!x) return null_arg("x");
  if (!x_out) return null_arg("x_out");
  if (static_cast<int>(n) != field->prog.dim())
    return fail(SHEARLAB_ERR_INVALID_ARGUMENT, "invalid argument", "x size != field dimension");
  if (!(tol > 0)) return fail(SHEARLAB_ERR_INVALID_ARGUMENT, "invalid argument", "tolerance <= 0");
  return guarded([&] {
    shearlab::PulseSchedule sch{rho, T, epsilon};
    sch.validate();
    const Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(x, static_cast<Eigen::Index>(n));
    const auto r = shearlab::time_T_map(field->prog, sch, x0, tolerance(tol));
    std::copy(r.x.data(), r.x.data() + n, x_out);
    return SHEARLAB_OK;
  });
}

shearlab_status shearlab_session_open(const char* config_path, shearlab_session** out) {
  if (!config_path) return null_arg("config_path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    *out = new shearlab_session{shearlab::load_config(config_path)};
    return SHEARLAB_OK;
  });
}

void shearlab_session_destroy(shearlab_session* session) { delete session; }

shearlab_status shearlab_session_set_out_dir(shearlab_session* session, const char* dir) {
  if (!session) return null_arg("session");
  if (!dir) return null_arg("dir");
  session->config.out_dir = dir;
  return SHEARLAB_OK;
}

shearlab_status shearlab_session_set_seed(shearlab_session* session, uint64_t seed) {
  if (!session) return null_arg("session");
  session->config.seed = seed;
  return SHEARLAB_OK;
}

shearlab_status shearlab_session_set_threads(shearlab_session* session, int threads) {
  if (!session) return null_arg("session");
  if (threads < 1)
    return fail(SHEARLAB_ERR_INVALID_ARGUMENT, "invalid argument", "threads must be >= 1");
  session->config.threads = threads;
  return SHEARLAB_OK;
}

shearlab_status shearlab_session_run(shearlab_session* session, const char* command,
                                     char** summary_json) {
  if (!session) return null_arg("session");
  if (!command) return null_arg("command");
  if (summary_json) *summary_json = nullptr;
  return guarded([&] {
    const auto rr = shearlab::run_command(command, session->config);
    if (summary_json) *summary_json = dup(rr.summary.dump(2));
    if (!rr.ok)
      return fail(SHEARLAB_ERR_CHECK_FAILED, "check failed",
                  "command '" + std::string(command) + "' completed with a failing verdict");
    return SHEARLAB_OK;
  });
}

shearlab_status shearlab_validate_criterion(int id, uint64_t seed, int threads,
                                            char** result_json) {
  if (!result_json) return null_arg("result_json");
  *result_json = nullptr;
  if (id < 1 || id > shearlab::kCriteria)
    return fail(SHEARLAB_ERR_INVALID_ARGUMENT, "invalid argument", "criterion id out of range");
  return guarded([&] {
    shearlab::ValidationOptions vo;
    vo.seed = seed;
    vo.threads = threads < 1 ? 1 : threads;
    const auto r = shearlab::run_criterion(id, vo);
    *result_json = dup(shearlab::to_json(r).dump());
    if (!r.pass) return fail(SHEARLAB_ERR_CHECK_FAILED, "check failed", r.summary);
    return SHEARLAB_OK;
  });
}

}  // extern "C"
