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

#pragma once

#include <stdexcept>
#include <string>

namespace shearlab {

enum class ErrorCode {
  InvalidArgument,
  Parse,
  Domain,
  Integration,
  TubeExit,
  Convergence,
  Equilibrium,
  Unsupported,
  Precondition,
  Unresolved,
  Io,
  Internal,
};

const char* to_string(ErrorCode code);

// Every failure raised by the core carries a code so that the C boundary can
// translate it into a status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class ParseErrorKind { Syntax, Arity, UnknownIdentifier, Duplicate, MissingComponent };

const char* to_string(ParseErrorKind kind);

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, int line, int column, const std::string& message);
  ParseErrorKind kind() const noexcept { return kind_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ParseErrorKind kind_;
  int line_;
  int column_;
  std::string message_;
};

}  // namespace shearlab
