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

#include "errors.hpp"

namespace shearlab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Integration: return "integration";
    case ErrorCode::TubeExit: return "tube_exit";
    case ErrorCode::Convergence: return "convergence";
    case ErrorCode::Equilibrium: return "equilibrium";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::Precondition: return "precondition";
    case ErrorCode::Unresolved: return "unresolved";
    case ErrorCode::Io: return "io";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::Syntax: return "syntax";
    case ParseErrorKind::Arity: return "arity";
    case ParseErrorKind::UnknownIdentifier: return "unknown_identifier";
    case ParseErrorKind::Duplicate: return "duplicate";
    case ParseErrorKind::MissingComponent: return "missing_component";
  }
  return "unknown";
}

ParseError::ParseError(ParseErrorKind kind, int line, int column, const std::string& message)
    : Error(ErrorCode::Parse, std::string(to_string(kind)) + " error at " + std::to_string(line) +
                                  ":" + std::to_string(column) + ": " + message),
      kind_(kind),
      line_(line),
      column_(column),
      message_(message) {}

}  // namespace shearlab
