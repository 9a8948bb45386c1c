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

#include "field_dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <set>

#include "errors.hpp"

namespace shearlab::dsl {
namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Number, Name, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, Assign, Semi, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.col = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        lex_number(t);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          advance();
        t.kind = Tok::Name;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else {
        switch (c) {
          case '+': t.kind = Tok::Plus; break;
          case '-': t.kind = Tok::Minus; break;
          case '*': t.kind = Tok::Star; break;
          case '/': t.kind = Tok::Slash; break;
          case '^': t.kind = Tok::Caret; break;
          case '(': t.kind = Tok::LParen; break;
          case ')': t.kind = Tok::RParen; break;
          case ',': t.kind = Tok::Comma; break;
          case '=': t.kind = Tok::Assign; break;
          case ';': t.kind = Tok::Semi; break;
          default:
            throw ParseError(ParseErrorKind::Syntax, line_, col_,
                             std::string("unexpected character '") + c + "'");
        }
        t.text = std::string(1, c);
        advance();
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void lex_number(Token& t) {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      advance();
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      const std::size_t save_pos = pos_;
      const int save_col = col_;
      advance();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        digits();
      } else {
        pos_ = save_pos;
        col_ = save_col;
      }
    }
    t.kind = Tok::Number;
    t.text = std::string(src_.substr(start, pos_ - start));
    const auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
    if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
      throw ParseError(ParseErrorKind::Syntax, t.line, t.col, "malformed number '" + t.text + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// ---------------------------------------------------------------------------
// Raw syntax tree (names unresolved)

struct Raw {
  enum Kind { Number, Name, Call, Neg, Binary, Pow } kind = Number;
  double number = 0.0;
  std::string name;
  char op = 0;
  int exponent = 0;
  std::vector<std::unique_ptr<Raw>> args;
  int line = 1;
  int col = 1;
};

struct Statement {
  enum Kind { Param, Let, Component } kind = Let;
  std::string name;
  double number = 0.0;
  std::unique_ptr<Raw> expr;
  int line = 1;
  int col = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<Statement> program() {
    std::vector<Statement> out;
    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::Semi) {
        next();
        continue;
      }
      out.push_back(statement());
      if (peek().kind == Tok::Semi) {
        next();
      } else if (peek().kind != Tok::End) {
        fail(peek(), "expected ';' after statement");
      }
    }
    return out;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError(ParseErrorKind::Syntax, t.line, t.col, msg);
  }

  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(peek(), std::string("expected ") + what);
    return next();
  }

  Statement statement() {
    Statement st;
    const Token& head = expect(Tok::Name, "a statement");
    st.line = head.line;
    st.col = head.col;
    if (head.text == "param") {
      st.kind = Statement::Param;
      st.name = expect(Tok::Name, "parameter name").text;
      expect(Tok::Assign, "'='");
      double sign = 1.0;
      if (peek().kind == Tok::Minus || peek().kind == Tok::Plus) {
        if (next().kind == Tok::Minus) sign = -1.0;
      }
      st.number = sign * expect(Tok::Number, "a numeric literal").number;
    } else if (head.text == "let") {
      st.kind = Statement::Let;
      st.name = expect(Tok::Name, "binding name").text;
      expect(Tok::Assign, "'='");
      st.expr = expr();
    } else {
      st.kind = Statement::Component;
      st.name = head.text;
      expect(Tok::Assign, "'='");
      st.expr = expr();
    }
    return st;
  }

  std::unique_ptr<Raw> node(Raw::Kind kind, const Token& at) {
    auto r = std::make_unique<Raw>();
    r->kind = kind;
    r->line = at.line;
    r->col = at.col;
    return r;
  }

  std::unique_ptr<Raw> expr() {
    auto lhs = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const Token& op = next();
      auto b = node(Raw::Binary, op);
      b->op = op.kind == Tok::Plus ? '+' : '-';
      b->args.push_back(std::move(lhs));
      b->args.push_back(term());
      lhs = std::move(b);
    }
    return lhs;
  }

  std::unique_ptr<Raw> term() {
    auto lhs = unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      const Token& op = next();
      auto b = node(Raw::Binary, op);
      b->op = op.kind == Tok::Star ? '*' : '/';
      b->args.push_back(std::move(lhs));
      b->args.push_back(unary());
      lhs = std::move(b);
    }
    return lhs;
  }

  std::unique_ptr<Raw> unary() {
    if (peek().kind == Tok::Minus) {
      const Token& op = next();
      auto n = node(Raw::Neg, op);
      n->args.push_back(unary());
      return n;
    }
    if (peek().kind == Tok::Plus) {
      next();
      return unary();
    }
    return power();
  }

  int integer_exponent() {
    bool paren = false;
    if (peek().kind == Tok::LParen) {
      next();
      paren = true;
    }
    int sign = 1;
    if (peek().kind == Tok::Minus || peek().kind == Tok::Plus) {
      if (next().kind == Tok::Minus) sign = -1;
    }
    const Token& t = expect(Tok::Number, "an integer exponent");
    if (t.text.find_first_of(".eE") != std::string::npos || t.number > 1e6)
      fail(t, "exponent must be an integer literal");
    if (paren) expect(Tok::RParen, "')'");
    return sign * static_cast<int>(t.number);
  }

  std::unique_ptr<Raw> power() {
    auto base = primary();
    if (peek().kind == Tok::Caret) {
      const Token& op = next();
      auto p = node(Raw::Pow, op);
      p->exponent = integer_exponent();
      p->args.push_back(std::move(base));
      return p;
    }
    return base;
  }

  std::unique_ptr<Raw> primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number: {
        next();
        auto n = node(Raw::Number, t);
        n->number = t.number;
        return n;
      }
      case Tok::Name: {
        next();
        if (peek().kind == Tok::LParen) {
          next();
          auto c = node(Raw::Call, t);
          c->name = t.text;
          if (peek().kind != Tok::RParen) {
            c->args.push_back(expr());
            while (peek().kind == Tok::Comma) {
              next();
              c->args.push_back(expr());
            }
          }
          expect(Tok::RParen, "')'");
          return c;
        }
        auto n = node(Raw::Name, t);
        n->name = t.text;
        return n;
      }
      case Tok::LParen: {
        next();
        auto e = expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      default:
        fail(t, "expected an expression");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Resolution

std::optional<int> indexed_name(std::string_view name, char prefix) {
  if (name.size() < 2 || name[0] != prefix) return std::nullopt;
  int v = 0;
  const auto res = std::from_chars(name.data() + 1, name.data() + name.size(), v);
  if (res.ec != std::errc() || res.ptr != name.data() + name.size() || v < 1 || name[1] == '0')
    return std::nullopt;
  return v;
}

struct FuncInfo {
  const char* name;
  Op op;
  int arity;
};

constexpr FuncInfo kFuncs[] = {
    {"sin", Op::Sin, 1},   {"cos", Op::Cos, 1},   {"exp", Op::Exp, 1},
    {"log", Op::Log, 1},   {"sqrt", Op::Sqrt, 1}, {"atan2", Op::Atan2, 2},
};

const FuncInfo* find_func(std::string_view name) {
  for (const auto& f : kFuncs)
    if (name == f.name) return &f;
  return nullptr;
}

bool reserved(std::string_view name) {
  return name == "pi" || name == "param" || name == "let" || find_func(name) != nullptr ||
         indexed_name(name, 'x') || indexed_name(name, 'f') || indexed_name(name, 'F');
}

class Resolver {
 public:
  Resolver(int dim, const std::vector<Parameter>& params) : dim_(dim), params_(params) {}

  void add_let(const std::string& name) { lets_.push_back(name); }

  ExprPtr resolve(const Raw& r) const {
    auto e = std::make_shared<Expr>();
    switch (r.kind) {
      case Raw::Number:
        e->op = Op::Const;
        e->value = r.number;
        break;
      case Raw::Name:
        resolve_name(r, *e);
        break;
      case Raw::Neg:
        e->op = Op::Neg;
        e->args.push_back(resolve(*r.args[0]));
        break;
      case Raw::Binary:
        e->op = r.op == '+' ? Op::Add : r.op == '-' ? Op::Sub : r.op == '*' ? Op::Mul : Op::Div;
        e->args.push_back(resolve(*r.args[0]));
        e->args.push_back(resolve(*r.args[1]));
        break;
      case Raw::Pow:
        e->op = Op::PowI;
        e->exponent = r.exponent;
        e->args.push_back(resolve(*r.args[0]));
        break;
      case Raw::Call: {
        const FuncInfo* f = find_func(r.name);
        if (!f)
          throw ParseError(ParseErrorKind::UnknownIdentifier, r.line, r.col,
                           "unknown function '" + r.name + "'");
        if (static_cast<int>(r.args.size()) != f->arity)
          throw ParseError(ParseErrorKind::Arity, r.line, r.col,
                           "'" + r.name + "' expects " + std::to_string(f->arity) +
                               " argument(s), got " + std::to_string(r.args.size()));
        e->op = f->op;
        for (const auto& a : r.args) e->args.push_back(resolve(*a));
        break;
      }
    }
    return e;
  }

 private:
  void resolve_name(const Raw& r, Expr& e) const {
    if (r.name == "pi") {
      e.op = Op::Const;
      e.value = std::numbers::pi;
      return;
    }
    if (auto k = indexed_name(r.name, 'x')) {
      if (*k <= dim_) {
        e.op = Op::Var;
        e.index = *k - 1;
        return;
      }
      throw ParseError(ParseErrorKind::UnknownIdentifier, r.line, r.col,
                       "variable '" + r.name + "' exceeds dimension " + std::to_string(dim_));
    }
    for (std::size_t i = lets_.size(); i-- > 0;) {
      if (lets_[i] == r.name) {
        e.op = Op::Let;
        e.index = static_cast<int>(i);
        return;
      }
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (params_[i].name == r.name) {
        e.op = Op::Param;
        e.index = static_cast<int>(i);
        return;
      }
    }
    if (find_func(r.name))
      throw ParseError(ParseErrorKind::Arity, r.line, r.col,
                       "function '" + r.name + "' used without arguments");
    throw ParseError(ParseErrorKind::UnknownIdentifier, r.line, r.col,
                     "unknown identifier '" + r.name + "'");
  }

  int dim_;
  const std::vector<Parameter>& params_;
  std::vector<std::string> lets_;
};

// ---------------------------------------------------------------------------
// Printing

std::string fmt_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void print(const Expr& e, const FieldProgram& prog, std::string& out) {
  auto bin = [&](const char* op) {
    out += '(';
    print(*e.args[0], prog, out);
    out += op;
    print(*e.args[1], prog, out);
    out += ')';
  };
  auto call = [&](const char* name) {
    out += name;
    out += '(';
    for (std::size_t i = 0; i < e.args.size(); ++i) {
      if (i) out += ", ";
      print(*e.args[i], prog, out);
    }
    out += ')';
  };
  switch (e.op) {
    case Op::Const:
      if (e.value < 0) {
        out += "(-" + fmt_number(-e.value) + ")";
      } else {
        out += fmt_number(e.value);
      }
      break;
    case Op::Var: out += "x" + std::to_string(e.index + 1); break;
    case Op::Param: out += prog.params()[e.index].name; break;
    case Op::Let: out += prog.lets()[e.index].name; break;
    case Op::Neg:
      out += "(-";
      print(*e.args[0], prog, out);
      out += ')';
      break;
    case Op::Add: bin(" + "); break;
    case Op::Sub: bin(" - "); break;
    case Op::Mul: bin(" * "); break;
    case Op::Div: bin(" / "); break;
    case Op::PowI:
      out += '(';
      print(*e.args[0], prog, out);
      out += ")^";
      out += e.exponent < 0 ? "(" + std::to_string(e.exponent) + ")" : std::to_string(e.exponent);
      break;
    case Op::Sin: call("sin"); break;
    case Op::Cos: call("cos"); break;
    case Op::Exp: call("exp"); break;
    case Op::Log: call("log"); break;
    case Op::Sqrt: call("sqrt"); break;
    case Op::Atan2: call("atan2"); break;
  }
}

// ---------------------------------------------------------------------------
// Compilation

class Compiler {
 public:
  Compiler(const FieldProgram& prog, Tape& tape) : prog_(prog), tape_(tape) {}

  void run(const std::vector<ExprPtr>& components) {
    for (const auto& b : prog_.lets()) let_slots_.push_back(emit_expr(*b.expr));
    for (const auto& c : components) tape_.outputs.push_back(c ? emit_expr(*c) : -1);
  }

 private:
  int emit(Instr in) {
    tape_.code.push_back(in);
    return static_cast<int>(tape_.code.size()) - 1;
  }

  int emit_expr(const Expr& e) {
    Instr in;
    in.op = e.op;
    switch (e.op) {
      case Op::Const:
        in.c = e.value;
        return emit(in);
      case Op::Param:
        in.op = Op::Const;
        in.c = prog_.params()[e.index].value;
        return emit(in);
      case Op::Var:
        in.k = e.index;
        return emit(in);
      case Op::Let:
        return let_slots_[e.index];
      case Op::PowI:
        in.k = e.exponent;
        in.a = emit_expr(*e.args[0]);
        return emit(in);
      default:
        in.a = emit_expr(*e.args[0]);
        if (e.args.size() > 1) in.b = emit_expr(*e.args[1]);
        return emit(in);
    }
  }

  const FieldProgram& prog_;
  Tape& tape_;
  std::vector<int> let_slots_;
};

[[noreturn]] void domain_fail(const char* what) {
  throw Error(ErrorCode::Domain, std::string("domain error: ") + what);
}

// (f, f', f'') of each unary operation, with domain checks. `order` limits
// which derivatives must exist.
struct Unary {
  double f0, f1, f2;
};

// Exponentiation by squaring; u != 0 when k < 0.
double ipow(double u, int k) {
  if (k < 0) return 1.0 / ipow(u, -k);
  double r = 1.0;
  for (; k; k >>= 1, u *= u)
    if (k & 1) r *= u;
  return r;
}

Unary apply_unary(Op op, double u, int k, int order) {
  switch (op) {
    case Op::Neg: return {-u, -1.0, 0.0};
    case Op::Sin: return {std::sin(u), std::cos(u), -std::sin(u)};
    case Op::Cos: return {std::cos(u), -std::sin(u), -std::cos(u)};
    case Op::Exp: {
      const double e = std::exp(u);
      return {e, e, e};
    }
    case Op::Log:
      if (!(u > 0.0)) domain_fail("log of non-positive argument");
      return {std::log(u), 1.0 / u, -1.0 / (u * u)};
    case Op::Sqrt: {
      if (u < 0.0 || std::isnan(u)) domain_fail("sqrt of negative argument");
      if (u == 0.0 && order > 0) domain_fail("sqrt is not differentiable at 0");
      const double r = std::sqrt(u);
      return {r, order > 0 ? 0.5 / r : 0.0, order > 0 ? -0.25 / (r * u) : 0.0};
    }
    case Op::PowI: {
      if (u == 0.0 && k < 0) domain_fail("division by zero in negative power");
      const double p0 = ipow(u, k);
      const double p1 = k == 0 ? 0.0 : k * ipow(u, k - 1);
      const double p2 = (k == 0 || k == 1) ? 0.0 : k * (k - 1) * ipow(u, k - 2);
      return {p0, p1, p2};
    }
    default: domain_fail("not a unary operation");
  }
}

double recip_check(double b) {
  if (b == 0.0) domain_fail("division by zero");
  return 1.0 / b;
}

void check_atan2(double y, double x, int order) {
  if (order > 0 && x == 0.0 && y == 0.0) domain_fail("atan2 is not differentiable at (0, 0)");
}

}  // namespace

// ---------------------------------------------------------------------------
// FieldProgram

bool FieldProgram::has_forcing() const noexcept {
  return std::any_of(forcing_.begin(), forcing_.end(), [](const ExprPtr& p) { return p != nullptr; });
}

double FieldProgram::param(std::string_view name) const {
  for (const auto& p : params_)
    if (p.name == name) return p.value;
  throw Error(ErrorCode::InvalidArgument, "no parameter named '" + std::string(name) + "'");
}

std::string FieldProgram::to_source() const {
  std::string out;
  for (const auto& p : params_) out += "param " + p.name + " = " + fmt_number(p.value) + ";\n";
  for (const auto& b : lets_) {
    out += "let " + b.name + " = ";
    print(*b.expr, *this, out);
    out += ";\n";
  }
  for (int i = 0; i < dim_; ++i) {
    out += "f" + std::to_string(i + 1) + " = ";
    print(*f_[i], *this, out);
    out += ";\n";
  }
  for (int i = 0; i < dim_; ++i) {
    if (!forcing_[i]) continue;
    out += "F" + std::to_string(i + 1) + " = ";
    print(*forcing_[i], *this, out);
    out += ";\n";
  }
  return out;
}

void FieldProgram::compile() {
  f_tape_ = Tape{};
  forcing_tape_ = Tape{};
  Compiler(*this, f_tape_).run(f_);
  Compiler(*this, forcing_tape_).run(forcing_);
}

std::string to_string(const Expr& e, const FieldProgram& prog) {
  std::string out;
  print(e, prog, out);
  return out;
}

FieldProgram parse_field(std::string_view source, const std::map<std::string, double>& overrides) {
  std::vector<Statement> stmts = Parser(Lexer(source).run()).program();

  FieldProgram prog;
  // Parameters and the dimension are known before any expression resolves.
  std::set<std::string> names;
  int max_f = 0;
  std::map<int, const Statement*> f_stmt, forcing_stmt;
  for (const auto& st : stmts) {
    if (st.kind == Statement::Param) {
      if (reserved(st.name))
        throw ParseError(ParseErrorKind::Duplicate, st.line, st.col,
                         "'" + st.name + "' is a reserved name");
      if (!names.insert(st.name).second)
        throw ParseError(ParseErrorKind::Duplicate, st.line, st.col,
                         "'" + st.name + "' declared twice");
      prog.params_.push_back({st.name, st.number});
    } else if (st.kind == Statement::Component) {
      if (auto k = indexed_name(st.name, 'f')) {
        if (!f_stmt.emplace(*k, &st).second)
          throw ParseError(ParseErrorKind::Duplicate, st.line, st.col,
                           "component '" + st.name + "' defined twice");
        max_f = std::max(max_f, *k);
      } else if (auto kf = indexed_name(st.name, 'F')) {
        if (!forcing_stmt.emplace(*kf, &st).second)
          throw ParseError(ParseErrorKind::Duplicate, st.line, st.col,
                           "component '" + st.name + "' defined twice");
      } else {
        throw ParseError(ParseErrorKind::Syntax, st.line, st.col,
                         "'" + st.name + "' is not a component; use 'let' for bindings");
      }
    }
  }
  if (f_stmt.empty()) throw ParseError(ParseErrorKind::MissingComponent, 1, 1, "no component f1");
  if (max_f > kMaxDim)
    throw ParseError(ParseErrorKind::Syntax, f_stmt.rbegin()->second->line,
                     f_stmt.rbegin()->second->col,
                     "dimension exceeds the supported maximum " + std::to_string(kMaxDim));
  for (int k = 1; k <= max_f; ++k)
    if (!f_stmt.count(k))
      throw ParseError(ParseErrorKind::MissingComponent, 1, 1,
                       "component f" + std::to_string(k) + " is missing");
  for (const auto& [k, st] : forcing_stmt)
    if (k > max_f)
      throw ParseError(ParseErrorKind::UnknownIdentifier, st->line, st->col,
                       "'" + st->name + "' exceeds dimension " + std::to_string(max_f));
  prog.dim_ = max_f;

  for (const auto& [name, value] : overrides) {
    auto it = std::find_if(prog.params_.begin(), prog.params_.end(),
                           [&](const Parameter& p) { return p.name == name; });
    if (it == prog.params_.end())
      throw Error(ErrorCode::InvalidArgument, "override for undeclared parameter '" + name + "'");
    it->value = value;
  }

  Resolver resolver(prog.dim_, prog.params_);
  prog.f_.assign(prog.dim_, nullptr);
  prog.forcing_.assign(prog.dim_, nullptr);
  for (const auto& st : stmts) {
    if (st.kind == Statement::Let) {
      if (reserved(st.name))
        throw ParseError(ParseErrorKind::Duplicate, st.line, st.col,
                         "'" + st.name + "' is a reserved name");
      if (!names.insert(st.name).second)
        throw ParseError(ParseErrorKind::Duplicate, st.line, st.col,
                         "'" + st.name + "' declared twice");
      prog.lets_.push_back({st.name, resolver.resolve(*st.expr)});
      resolver.add_let(st.name);
    } else if (st.kind == Statement::Component) {
      ExprPtr e = resolver.resolve(*st.expr);
      if (auto k = indexed_name(st.name, 'f')) {
        prog.f_[*k - 1] = std::move(e);
      } else {
        prog.forcing_[*indexed_name(st.name, 'F') - 1] = std::move(e);
      }
    }
  }
  prog.compile();
  return prog;
}

bool equivalent(const Expr& a, const Expr& b) {
  if (a.op != b.op || a.index != b.index || a.exponent != b.exponent ||
      a.args.size() != b.args.size())
    return false;
  if (a.op == Op::Const && a.value != b.value) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!equivalent(*a.args[i], *b.args[i])) return false;
  return true;
}

bool equivalent(const FieldProgram& a, const FieldProgram& b) {
  if (a.dim() != b.dim() || a.params().size() != b.params().size() ||
      a.lets().size() != b.lets().size())
    return false;
  for (std::size_t i = 0; i < a.params().size(); ++i)
    if (a.params()[i].name != b.params()[i].name || a.params()[i].value != b.params()[i].value)
      return false;
  for (std::size_t i = 0; i < a.lets().size(); ++i)
    if (a.lets()[i].name != b.lets()[i].name || !equivalent(*a.lets()[i].expr, *b.lets()[i].expr))
      return false;
  for (int i = 0; i < a.dim(); ++i) {
    if (!equivalent(*a.intrinsic()[i], *b.intrinsic()[i])) return false;
    const auto& fa = a.forcing()[i];
    const auto& fb = b.forcing()[i];
    if (static_cast<bool>(fa) != static_cast<bool>(fb)) return false;
    if (fa && !equivalent(*fa, *fb)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Evaluation

Evaluator::Evaluator(const FieldProgram& prog) : prog_(&prog) {
  const std::size_t len =
      std::max(prog.tape(Which::Intrinsic).code.size(), prog.tape(Which::Forcing).code.size());
  s0_.resize(len);
}

void Evaluator::value(Which which, std::span<const double> x, std::span<double> out) {
  const Tape& tape = prog_->tape(which);
  double* s = s0_.data();
  for (std::size_t i = 0; i < tape.code.size(); ++i) {
    const Instr& in = tape.code[i];
    switch (in.op) {
      case Op::Const: s[i] = in.c; break;
      case Op::Var: s[i] = x[in.k]; break;
      case Op::Add: s[i] = s[in.a] + s[in.b]; break;
      case Op::Sub: s[i] = s[in.a] - s[in.b]; break;
      case Op::Mul: s[i] = s[in.a] * s[in.b]; break;
      case Op::Div: s[i] = s[in.a] * recip_check(s[in.b]); break;
      case Op::Atan2:
        s[i] = std::atan2(s[in.a], s[in.b]);
        break;
      default: s[i] = apply_unary(in.op, s[in.a], in.k, 0).f0; break;
    }
  }
  for (std::size_t c = 0; c < out.size(); ++c) {
    const int o = tape.outputs[c];
    out[c] = o < 0 ? 0.0 : s[o];
  }
}

void Evaluator::jacobian(Which which, std::span<const double> x, std::span<double> out,
                         std::span<double> jac) {
  const Tape& tape = prog_->tape(which);
  const int n = prog_->dim();
  s1_.resize(tape.code.size());
  J1* s = s1_.data();
  for (std::size_t i = 0; i < tape.code.size(); ++i) {
    const Instr& in = tape.code[i];
    J1& r = s[i];
    switch (in.op) {
      case Op::Const:
        r.v = in.c;
        for (int j = 0; j < n; ++j) r.g[j] = 0.0;
        break;
      case Op::Var:
        r.v = x[in.k];
        for (int j = 0; j < n; ++j) r.g[j] = j == in.k ? 1.0 : 0.0;
        break;
      case Op::Add: {
        const J1& a = s[in.a];
        const J1& b = s[in.b];
        r.v = a.v + b.v;
        for (int j = 0; j < n; ++j) r.g[j] = a.g[j] + b.g[j];
        break;
      }
      case Op::Sub: {
        const J1& a = s[in.a];
        const J1& b = s[in.b];
        r.v = a.v - b.v;
        for (int j = 0; j < n; ++j) r.g[j] = a.g[j] - b.g[j];
        break;
      }
      case Op::Mul: {
        const J1& a = s[in.a];
        const J1& b = s[in.b];
        r.v = a.v * b.v;
        for (int j = 0; j < n; ++j) r.g[j] = a.g[j] * b.v + a.v * b.g[j];
        break;
      }
      case Op::Div: {
        const J1& a = s[in.a];
        const J1& b = s[in.b];
        const double ib = recip_check(b.v);
        r.v = a.v * ib;
        for (int j = 0; j < n; ++j) r.g[j] = (a.g[j] - r.v * b.g[j]) * ib;
        break;
      }
      case Op::Atan2: {
        const J1& y = s[in.a];
        const J1& xx = s[in.b];
        check_atan2(y.v, xx.v, 1);
        const double q = xx.v * xx.v + y.v * y.v;
        r.v = std::atan2(y.v, xx.v);
        for (int j = 0; j < n; ++j) r.g[j] = (xx.v * y.g[j] - y.v * xx.g[j]) / q;
        break;
      }
      default: {
        const J1& u = s[in.a];
        const Unary f = apply_unary(in.op, u.v, in.k, 1);
        r.v = f.f0;
        for (int j = 0; j < n; ++j) r.g[j] = f.f1 * u.g[j];
        break;
      }
    }
  }
  for (int c = 0; c < n; ++c) {
    const int o = tape.outputs[c];
    if (o < 0) {
      out[c] = 0.0;
      for (int j = 0; j < n; ++j) jac[c * n + j] = 0.0;
    } else {
      out[c] = s[o].v;
      for (int j = 0; j < n; ++j) jac[c * n + j] = s[o].g[j];
    }
  }
}

std::vector<JetValue> Evaluator::jets(Which which, std::span<const double> x, int order) {
  const int n = prog_->dim();
  if (order < 0 || order > 2) throw Error(ErrorCode::InvalidArgument, "jet order must be 0, 1 or 2");
  if (static_cast<int>(x.size()) != n) throw Error(ErrorCode::InvalidArgument, "point has wrong dimension");
  for (double v : x)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "point is not finite");
  std::vector<JetValue> res(n);
  if (order == 0) {
    std::vector<double> v(n);
    value(which, x, v);
    for (int i = 0; i < n; ++i) res[i].value = v[i];
    return res;
  }
  if (order == 1) {
    std::vector<double> v(n), jac(n * n);
    jacobian(which, x, v, jac);
    for (int i = 0; i < n; ++i) {
      res[i].value = v[i];
      res[i].first.assign(jac.begin() + i * n, jac.begin() + (i + 1) * n);
    }
    return res;
  }

  const Tape& tape = prog_->tape(which);
  s2_.resize(tape.code.size());
  J2* s = s2_.data();
  auto zero = [n](J2& r) {
    for (int j = 0; j < n; ++j) {
      r.g[j] = 0.0;
      for (int k = j; k < n; ++k) r.h[j * kMaxDim + k] = 0.0;
    }
  };
  // Only the upper triangle (j <= k) is propagated; the lower one is mirrored
  // on output so the Hessian is exactly symmetric.
  for (std::size_t i = 0; i < tape.code.size(); ++i) {
    const Instr& in = tape.code[i];
    J2& r = s[i];
    switch (in.op) {
      case Op::Const:
        r.v = in.c;
        zero(r);
        break;
      case Op::Var:
        r.v = x[in.k];
        zero(r);
        r.g[in.k] = 1.0;
        break;
      case Op::Add:
      case Op::Sub: {
        const J2& a = s[in.a];
        const J2& b = s[in.b];
        const double sg = in.op == Op::Add ? 1.0 : -1.0;
        r.v = a.v + sg * b.v;
        for (int j = 0; j < n; ++j) {
          r.g[j] = a.g[j] + sg * b.g[j];
          for (int k = j; k < n; ++k)
            r.h[j * kMaxDim + k] = a.h[j * kMaxDim + k] + sg * b.h[j * kMaxDim + k];
        }
        break;
      }
      case Op::Mul:
      case Op::Div: {
        const J2& a = s[in.a];
        J2 b = s[in.b];
        if (in.op == Op::Div) {
          // a / b = a * (1/b)
          const double ib = recip_check(b.v);
          const double f1 = -ib * ib;
          const double f2 = 2.0 * ib * ib * ib;
          J2 rb;
          rb.v = ib;
          for (int j = 0; j < n; ++j) {
            rb.g[j] = f1 * b.g[j];
            for (int k = j; k < n; ++k)
              rb.h[j * kMaxDim + k] = f2 * b.g[j] * b.g[k] + f1 * b.h[j * kMaxDim + k];
          }
          b = rb;
        }
        J2 out;
        out.v = a.v * b.v;
        for (int j = 0; j < n; ++j) {
          out.g[j] = a.g[j] * b.v + a.v * b.g[j];
          for (int k = j; k < n; ++k)
            out.h[j * kMaxDim + k] = a.v * b.h[j * kMaxDim + k] + b.v * a.h[j * kMaxDim + k] +
                                     a.g[j] * b.g[k] + a.g[k] * b.g[j];
        }
        r = out;
        break;
      }
      case Op::Atan2: {
        const J2& y = s[in.a];
        const J2& xx = s[in.b];
        check_atan2(y.v, xx.v, 2);
        const double q = xx.v * xx.v + y.v * y.v;
        const double gy = xx.v / q, gx = -y.v / q;
        const double gyy = -2.0 * xx.v * y.v / (q * q);
        const double gxx = -gyy;
        const double gxy = (y.v * y.v - xx.v * xx.v) / (q * q);
        J2 out;
        out.v = std::atan2(y.v, xx.v);
        for (int j = 0; j < n; ++j) {
          out.g[j] = gy * y.g[j] + gx * xx.g[j];
          for (int k = j; k < n; ++k)
            out.h[j * kMaxDim + k] = gyy * y.g[j] * y.g[k] + gxx * xx.g[j] * xx.g[k] +
                                     gxy * (y.g[j] * xx.g[k] + xx.g[j] * y.g[k]) +
                                     gy * y.h[j * kMaxDim + k] + gx * xx.h[j * kMaxDim + k];
        }
        r = out;
        break;
      }
      default: {
        const J2 u = s[in.a];
        const Unary f = apply_unary(in.op, u.v, in.k, 2);
        r.v = f.f0;
        for (int j = 0; j < n; ++j) {
          r.g[j] = f.f1 * u.g[j];
          for (int k = j; k < n; ++k)
            r.h[j * kMaxDim + k] = f.f2 * u.g[j] * u.g[k] + f.f1 * u.h[j * kMaxDim + k];
        }
        break;
      }
    }
  }
  for (int c = 0; c < n; ++c) {
    const int o = tape.outputs[c];
    JetValue& jv = res[c];
    jv.first.assign(n, 0.0);
    jv.second.assign(n * n, 0.0);
    if (o < 0) continue;
    jv.value = s[o].v;
    for (int j = 0; j < n; ++j) {
      jv.first[j] = s[o].g[j];
      for (int k = j; k < n; ++k) {
        jv.second[j * n + k] = s[o].h[j * kMaxDim + k];
        jv.second[k * n + j] = s[o].h[j * kMaxDim + k];
      }
    }
  }
  return res;
}

std::vector<JetValue> eval_jet(const FieldProgram& prog, Which which, std::span<const double> x,
                               int order) {
  Evaluator ev(prog);
  return ev.jets(which, x, order);
}

}  // namespace shearlab::dsl
