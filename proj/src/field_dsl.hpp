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

// Vector-field programs: a small arithmetic language for the pair (f, F) of
// an intrinsic field and a forcing field on R^n, compiled to a flat tape and
// evaluated with forward-mode jets (value, gradient, Hessian).
//
// Grammar (whitespace-insensitive, `#` starts a comment that runs to the end
// of the line):
//
//   program   := { statement ";" } [ statement ]
//   statement := "param" NAME "=" ["-"|"+"] NUMBER
//              | "let" NAME "=" expr
//              | COMPONENT "=" expr            COMPONENT := f1..fn | F1..Fn
//   expr      := term { ("+" | "-") term }
//   term      := unary { ("*" | "/") unary }
//   unary     := ("-" | "+") unary | power
//   power     := primary [ "^" INTEGER | "^" "(" INTEGER ")" ]   INTEGER may be signed
//   primary   := NUMBER | NAME | FUNC "(" expr { "," expr } ")" | "(" expr ")"
//   FUNC      := sin | cos | exp | log | sqrt | atan2
//
// The dimension n is the number of intrinsic components, which must be
// exactly f1..fn. Forcing components are optional; missing ones are zero.
// Variables are x1..xn, `pi` is predefined, parameters may be declared in
// any order, and `let` bindings are visible to later statements only.

#pragma once

#include <array>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shearlab::dsl {

inline constexpr int kMaxDim = 8;

enum class Op : unsigned char {
  Const,
  Var,
  Param,
  Let,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  PowI,
  Sin,
  Cos,
  Exp,
  Log,
  Sqrt,
  Atan2,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  Op op = Op::Const;
  double value = 0.0;  // Const
  int index = -1;      // Var (0-based), Param, Let
  int exponent = 0;    // PowI
  std::vector<ExprPtr> args;
};

struct Parameter {
  std::string name;
  double value = 0.0;
};

struct Binding {
  std::string name;
  ExprPtr expr;
};

enum class Which { Intrinsic, Forcing };

struct Instr {
  Op op = Op::Const;
  int a = -1;
  int b = -1;
  int k = 0;
  double c = 0.0;
};

// Straight-line program: every instruction writes the slot with its own
// index. Outputs of -1 denote an identically-zero component.
struct Tape {
  std::vector<Instr> code;
  std::vector<int> outputs;
};

struct JetValue {
  double value = 0.0;
  std::vector<double> first;   // gradient, size n (order >= 1)
  std::vector<double> second;  // Hessian row-major n*n (order == 2)
};

class FieldProgram {
 public:
  int dim() const noexcept { return dim_; }
  const std::vector<Parameter>& params() const noexcept { return params_; }
  const std::vector<Binding>& lets() const noexcept { return lets_; }
  const std::vector<ExprPtr>& intrinsic() const noexcept { return f_; }
  // Entries may be null (component absent, i.e. zero).
  const std::vector<ExprPtr>& forcing() const noexcept { return forcing_; }
  bool has_forcing() const noexcept;
  const Tape& tape(Which which) const noexcept {
    return which == Which::Intrinsic ? f_tape_ : forcing_tape_;
  }
  double param(std::string_view name) const;

  // Canonical source text; parses back to an equivalent program.
  std::string to_source() const;

 private:
  friend FieldProgram parse_field(std::string_view, const std::map<std::string, double>&);
  void compile();

  int dim_ = 0;
  std::vector<Parameter> params_;
  std::vector<Binding> lets_;
  std::vector<ExprPtr> f_;
  std::vector<ExprPtr> forcing_;
  Tape f_tape_;
  Tape forcing_tape_;
};

// Parses a program. `overrides` replaces declared parameter values; naming an
// undeclared parameter there is an error.
FieldProgram parse_field(std::string_view source,
                         const std::map<std::string, double>& overrides = {});

std::string to_string(const Expr& e, const FieldProgram& prog);
bool equivalent(const Expr& a, const Expr& b);
bool equivalent(const FieldProgram& a, const FieldProgram& b);

// Reusable scratch space for tape evaluation. One evaluator per thread; the
// program itself is immutable and may be shared.
class Evaluator {
 public:
  explicit Evaluator(const FieldProgram& prog);

  const FieldProgram& program() const noexcept { return *prog_; }
  int dim() const noexcept { return prog_->dim(); }

  void value(Which which, std::span<const double> x, std::span<double> out);
  // jac is row-major: jac[i*n + j] = d out_i / d x_j.
  void jacobian(Which which, std::span<const double> x, std::span<double> out,
                std::span<double> jac);
  std::vector<JetValue> jets(Which which, std::span<const double> x, int order);

 private:
  const FieldProgram* prog_;
  std::vector<double> s0_;
  struct J1 {
    double v;
    std::array<double, kMaxDim> g;
  };
  struct J2 {
    double v;
    std::array<double, kMaxDim> g;
    std::array<double, kMaxDim * kMaxDim> h;
  };
  std::vector<J1> s1_;
  std::vector<J2> s2_;
};

std::vector<JetValue> eval_jet(const FieldProgram& prog, Which which, std::span<const double> x,
                               int order);

}  // namespace shearlab::dsl
