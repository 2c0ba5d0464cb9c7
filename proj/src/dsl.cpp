#include "dsl.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <variant>

#include "homs.hpp"

namespace laurent::dsl {

using cones::Box;
using cones::Exponent;
using cones::exp_zero;
using homs::ParamTuple;
using rings::Ring;
using rings::RingKind;
using rings::Value;
using series::Series;

namespace {

// ---------------------------------------------------------------------------
// Lexer

struct SrcPos {
  int line = 1;
  int col = 1;
};

std::string at(const SrcPos& p) {
  return "line " + std::to_string(p.line) + ", col " + std::to_string(p.col);
}

struct Token {
  enum class K { Ident, Int, Rat, Sym, Newline, End } k = K::End;
  std::string text;   // Ident name / Int digits / Sym spelling
  std::string denom;  // Rat denominator digits
  SrcPos pos;
};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  SrcPos pos;
  size_t i = 0;
  auto push = [&](Token::K k, std::string text, SrcPos p,
                  std::string denom = "") {
    out.push_back({k, std::move(text), std::move(denom), p});
  };
  while (i < src.size()) {
    char c = src[i];
    SrcPos here = pos;
    auto advance = [&](size_t by) {
      for (size_t j = 0; j < by; ++j) {
        if (src[i + j] == '\n') {
          ++pos.line;
          pos.col = 1;
        } else {
          ++pos.col;
        }
      }
      i += by;
    };
    if (c == '\n') {
      push(Token::K::Newline, "\n", here);
      advance(1);
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
        ++j;
      std::string digits = src.substr(i, j - i);
      // immediate p/q (no spaces) is a rational literal
      if (j + 1 < src.size() && src[j] == '/' &&
          std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        size_t k = j + 1;
        while (k < src.size() &&
               std::isdigit(static_cast<unsigned char>(src[k])))
          ++k;
        std::string den = src.substr(j + 1, k - j - 1);
        advance(k - i);
        push(Token::K::Rat, digits, here, den);
        continue;
      }
      advance(j - i);
      push(Token::K::Int, digits, here);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) ||
              src[j] == '_'))
        ++j;
      std::string name = src.substr(i, j - i);
      advance(j - i);
      push(Token::K::Ident, name, here);
      continue;
    }
    if (c == '.' && i + 1 < src.size() && src[i + 1] == '.') {
      advance(2);
      push(Token::K::Sym, "..", here);
      continue;
    }
    if (c == '=' && i + 1 < src.size() && src[i + 1] == '=') {
      advance(2);
      push(Token::K::Sym, "==", here);
      continue;
    }
    if (std::string("+-*/^(),={}:;[]").find(c) != std::string::npos) {
      advance(1);
      push(Token::K::Sym, std::string(1, c), here);
      continue;
    }
    fail(Errc::SyntaxError,
         at(here) + ": unexpected character '" + std::string(1, c) + "'");
  }
  push(Token::K::End, "", pos);
  return out;
}

// ---------------------------------------------------------------------------
// Abstract syntax

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  enum class K {
    Int,
    Rat,
    Ident,
    Add,
    Sub,
    Neg,
    Mul,
    Div,
    Pow,
    Wedge,
    Tuple,
    Prod,  // product-ring scalar literal {a, b}
    Call,
    OMark
  } k = K::Int;
  SrcPos pos;
  std::string text;   // Ident/Call name; Int digits; Rat numerator
  std::string denom;  // Rat denominator
  long long ipow = 0;
  Box box;  // OMark
  std::vector<ExprPtr> kids;
};

struct Stmt {
  enum class K {
    Ring,
    Vars,
    Let,
    Print,
    CheckInv,
    CheckEq,
    Invert,
    Residue,
    Verify
  } k = K::Print;
  SrcPos pos;
  std::string name;  // Let binder
  RingPtr ring;      // Ring
  int nvars = 0;     // Vars
  ExprPtr a, b;
  bool dlog_suffix = false;
  std::optional<Box> prec;
  std::optional<unsigned long long> seed;  // Verify
  std::optional<int> count;
  std::string mutation;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<Stmt> script() {
    std::vector<Stmt> out;
    for (;;) {
      while (is_sep()) next();
      if (peek().k == Token::K::End) break;
      out.push_back(statement());
    }
    return out;
  }

  /// ring line + vars line + bare value expression (serialized values).
  struct ValueDoc {
    RingPtr ring;
    int nvars = 0;
    ExprPtr value;
  };
  ValueDoc value_document() {
    ValueDoc doc;
    while (is_sep()) next();
    Stmt r = statement();
    if (r.k != Stmt::K::Ring)
      fail(Errc::FormatError, at(r.pos) + ": expected a ring header line");
    while (is_sep()) next();
    Stmt v = statement();
    if (v.k != Stmt::K::Vars)
      fail(Errc::FormatError, at(v.pos) + ": expected a vars header line");
    while (is_sep()) next();
    doc.ring = r.ring;
    doc.nvars = v.nvars;
    doc.value = expression();
    end_of_statement();
    while (is_sep()) next();
    expect_end();
    return doc;
  }

  RingPtr bare_ring() {
    RingPtr r = ring_literal();
    expect_end();
    return r;
  }

  RingPtr ring_literal() {
    std::vector<RingPtr> factors{ring_atom()};
    while (peek_sym("*")) {
      next();
      factors.push_back(ring_atom());
    }
    return factors.size() == 1 ? factors[0] : Ring::product(factors);
  }

 private:
  std::vector<Token> toks_;
  size_t i_ = 0;

  const Token& peek(size_t ahead = 0) const {
    return toks_[std::min(i_ + ahead, toks_.size() - 1)];
  }
  const Token& next() { return toks_[std::min(i_++, toks_.size() - 1)]; }
  bool is_sep() const {
    return peek().k == Token::K::Newline ||
           (peek().k == Token::K::Sym && peek().text == ";");
  }
  bool peek_sym(const std::string& s, size_t ahead = 0) const {
    return peek(ahead).k == Token::K::Sym && peek(ahead).text == s;
  }
  bool peek_ident(const std::string& s) const {
    return peek().k == Token::K::Ident && peek().text == s;
  }
  void expect_sym(const std::string& s) {
    if (!peek_sym(s))
      fail(Errc::SyntaxError,
           at(peek().pos) + ": expected '" + s + "', found '" + peek().text +
               "'");
    next();
  }
  std::string expect_ident(const std::string& what) {
    if (peek().k != Token::K::Ident)
      fail(Errc::SyntaxError, at(peek().pos) + ": expected " + what);
    return next().text;
  }
  long long expect_int(const std::string& what) {
    bool neg = false;
    if (peek_sym("-")) {
      neg = true;
      next();
    }
    if (peek().k != Token::K::Int)
      fail(Errc::SyntaxError, at(peek().pos) + ": expected " + what);
    long long v = std::stoll(next().text);
    return neg ? -v : v;
  }
  void end_of_statement() {
    if (is_sep() || peek().k == Token::K::End) return;
    fail(Errc::SyntaxError, at(peek().pos) + ": expected end of statement, " +
                                "found '" + peek().text + "'");
  }
  void expect_end() {
    if (peek().k != Token::K::End)
      fail(Errc::SyntaxError,
           at(peek().pos) + ": trailing input '" + peek().text + "'");
  }

  RingPtr ring_atom() {
    SrcPos p = peek().pos;
    std::string base = expect_ident("ring name");
    RingPtr r;
    if (base == "Z") {
      if (peek_sym("/")) {
        next();
        long long m = expect_int("modulus");
        r = Ring::modular(m);
      } else {
        r = Ring::integers();
      }
    } else if (base == "Q") {
      r = Ring::rationals();
    } else {
      fail(Errc::SyntaxError, at(p) + ": unknown ring '" + base + "'");
    }
    // nilpotent extension suffixes R[g]/(g^k)
    while (peek_sym("[")) {
      next();
      std::string gen = expect_ident("generator name");
      expect_sym("]");
      expect_sym("/");
      expect_sym("(");
      std::string gen2 = expect_ident("generator name");
      if (gen2 != gen)
        fail(Errc::SyntaxError, at(p) + ": relation names a different "
                                        "generator '" + gen2 + "'");
      expect_sym("^");
      long long k = expect_int("nilpotency order");
      expect_sym(")");
      r = Ring::nilpotent_ext(r, gen, static_cast<int>(k));
    }
    return r;
  }

  Stmt statement() {
    Stmt s;
    s.pos = peek().pos;
    std::string head = expect_ident("statement keyword");
    if (head == "ring") {
      s.k = Stmt::K::Ring;
      s.ring = ring_literal();
    } else if (head == "vars") {
      s.k = Stmt::K::Vars;
      s.nvars = vars_clause();
    } else if (head == "let") {
      s.k = Stmt::K::Let;
      s.name = expect_ident("binding name");
      expect_sym("=");
      s.a = expression();
    } else if (head == "print") {
      s.k = Stmt::K::Print;
      s.a = expression();
      s.prec = prec_clause();
    } else if (head == "check") {
      if (peek_ident("invertible")) {
        next();
        s.k = Stmt::K::CheckInv;
        s.a = expression();
      } else {
        s.k = Stmt::K::CheckEq;
        s.a = expression();
        expect_sym("==");
        s.b = expression();
      }
      s.prec = prec_clause();
    } else if (head == "invert") {
      s.k = Stmt::K::Invert;
      s.a = expression();
      s.prec = prec_clause();
    } else if (head == "residue") {
      s.k = Stmt::K::Residue;
      s.a = expression();
      if (peek_ident("dlog")) {
        next();
        s.dlog_suffix = true;
      }
      s.prec = prec_clause();
    } else if (head == "verify") {
      s.k = Stmt::K::Verify;
      while (peek().k == Token::K::Ident) {
        std::string opt = next().text;
        if (opt == "seed")
          s.seed = static_cast<unsigned long long>(expect_int("seed"));
        else if (opt == "count")
          s.count = static_cast<int>(expect_int("count"));
        else if (opt == "mutation")
          s.mutation = expect_ident("mutation name");
        else
          fail(Errc::SyntaxError,
               at(s.pos) + ": unknown verify option '" + opt + "'");
      }
    } else {
      fail(Errc::SyntaxError,
           at(s.pos) + ": unknown statement '" + head + "'");
    }
    end_of_statement();
    return s;
  }

  int vars_clause() {
    SrcPos p = peek().pos;
    std::vector<std::string> names{expect_ident("variable name")};
    if (peek_sym("..")) {
      next();
      std::string last = expect_ident("variable name");
      if (names[0] != "t1" || last.size() < 2 || last[0] != 't')
        fail(Errc::SyntaxError, at(p) + ": range form is t1 .. tn");
      int n = std::stoi(last.substr(1));
      if (n < 1) fail(Errc::SyntaxError, at(p) + ": empty variable range");
      return n;
    }
    while (peek().k == Token::K::Ident) names.push_back(next().text);
    if (names.size() == 1 && names[0] == "t") return 1;
    for (size_t k = 0; k < names.size(); ++k)
      if (names[k] != "t" + std::to_string(k + 1))
        fail(Errc::SyntaxError,
             at(p) + ": variables must be named t1..tn in order");
    return static_cast<int>(names.size());
  }

  std::optional<Box> prec_clause() {
    if (!peek_ident("prec")) return std::nullopt;
    next();
    expect_sym("(");
    Box box{expect_int("precision bound")};
    while (peek_sym(",")) {
      next();
      box.push_back(expect_int("precision bound"));
    }
    expect_sym(")");
    return box;
  }

  ExprPtr node(Expr::K k, SrcPos pos) {
    auto e = std::make_shared<Expr>();
    e->k = k;
    e->pos = pos;
    return e;
  }

  ExprPtr expression() { return additive(); }

  ExprPtr additive() {
    ExprPtr lhs = mulexp();
    while (peek_sym("+") || peek_sym("-")) {
      bool plus = next().text == "+";
      ExprPtr rhs = mulexp();
      ExprPtr e = node(plus ? Expr::K::Add : Expr::K::Sub, lhs->pos);
      e->kids = {lhs, rhs};
      lhs = e;
    }
    return lhs;
  }

  ExprPtr mulexp() {
    ExprPtr lhs = unary();
    while (peek_sym("*") || peek_sym("/")) {
      bool times = next().text == "*";
      ExprPtr rhs = unary();
      ExprPtr e = node(times ? Expr::K::Mul : Expr::K::Div, lhs->pos);
      e->kids = {lhs, rhs};
      lhs = e;
    }
    return lhs;
  }

  ExprPtr unary() {
    if (peek_sym("-")) {
      SrcPos p = next().pos;
      ExprPtr e = node(Expr::K::Neg, p);
      e->kids = {unary()};
      return e;
    }
    return powexp();
  }

  ExprPtr powexp() {
    ExprPtr base = postfix();
    if (!peek_sym("^")) return base;
    SrcPos p = next().pos;
    if (peek().k == Token::K::Int || peek_sym("-")) {
      ExprPtr e = node(Expr::K::Pow, p);
      e->ipow = expect_int("integer exponent");
      e->kids = {base};
      // right-associative integer towers are a syntax error on purpose:
      // (f^2)^3 must be written with parentheses
      if (peek_sym("^"))
        fail(Errc::SyntaxError,
             at(peek().pos) + ": chained '^' needs parentheses");
      return e;
    }
    ExprPtr e = node(Expr::K::Wedge, p);
    e->kids = {base, powexp()};  // right-assoc wedge chain
    return e;
  }

  ExprPtr postfix() {
    ExprPtr e = primary();
    while (peek_sym("(") && e->k == Expr::K::Ident) {
      ExprPtr call = node(Expr::K::Call, e->pos);
      call->text = e->text;
      next();
      if (!peek_sym(")")) {
        call->kids.push_back(expression());
        while (peek_sym(",")) {
          next();
          call->kids.push_back(expression());
        }
      }
      expect_sym(")");
      e = call;
    }
    return e;
  }

  ExprPtr primary() {
    const Token& t = peek();
    if (t.k == Token::K::Int) {
      ExprPtr e = node(Expr::K::Int, t.pos);
      e->text = next().text;
      return e;
    }
    if (t.k == Token::K::Rat) {
      ExprPtr e = node(Expr::K::Rat, t.pos);
      e->text = t.text;
      e->denom = t.denom;
      next();
      return e;
    }
    if (t.k == Token::K::Ident) {
      if (t.text == "O" && peek_sym("(", 1)) return o_marker();
      ExprPtr e = node(Expr::K::Ident, t.pos);
      e->text = next().text;
      return e;
    }
    if (peek_sym("(")) {
      SrcPos p = next().pos;
      ExprPtr first = expression();
      if (peek_sym(")")) {
        next();
        return first;  // grouping
      }
      ExprPtr e = node(Expr::K::Tuple, p);
      e->kids = {first};
      while (peek_sym(",")) {
        next();
        e->kids.push_back(expression());
      }
      expect_sym(")");
      return e;
    }
    if (peek_sym("{")) {
      SrcPos p = next().pos;
      ExprPtr e = node(Expr::K::Prod, p);
      e->kids = {expression()};
      while (peek_sym(",")) {
        next();
        e->kids.push_back(expression());
      }
      expect_sym("}");
      return e;
    }
    fail(Errc::SyntaxError,
         at(t.pos) + ": expected an expression, found '" +
             (t.k == Token::K::End ? std::string("end of input") : t.text) +
             "'");
  }

  ExprPtr o_marker() {
    SrcPos p = next().pos;  // O
    expect_sym("(");
    if (!peek_ident("box"))
      fail(Errc::SyntaxError, at(peek().pos) + ": expected 'box'");
    next();
    expect_sym(":");
    ExprPtr e = node(Expr::K::OMark, p);
    if (peek_sym(")"))
      fail(Errc::SyntaxError, at(peek().pos) + ": empty box bound list");
    e->box.push_back(expect_int("box bound"));
    while (peek_sym(",")) {
      next();
      e->box.push_back(expect_int("box bound"));
    }
    expect_sym(")");
    return e;
  }
};

// ---------------------------------------------------------------------------
// Runtime values

struct TupleV {
  std::vector<Series> comps;
};
struct FormV {
  Series coeff;            // already includes the 1/t factors of dlog's
  std::vector<int> vars;   // strictly increasing slots
};
struct TextV {
  std::string text;
};
struct OMarkV {
  Box box;
};
using RV = std::variant<Series, TupleV, FormV, TextV, OMarkV>;

bool is_reserved(const std::string& name) {
  static const char* kReserved[] = {
      "ring",  "vars",    "let",      "print",    "check",   "invert",
      "verify", "residue", "dlog",     "wedge",    "adjoint", "jacobian",
      "nu",    "upsilon", "prec",     "invertible", "seed",  "count",
      "mutation", "O",    "box"};
  for (const char* r : kReserved)
    if (name == r) return true;
  return false;
}

std::optional<Value> gen_value(const RingPtr& r, const std::string& name) {
  if (r->kind() != RingKind::NilpotentExt) return std::nullopt;
  if (r->generator_name() == name)
    return Value::ext(r, {Value::zero(r->base()), Value::one(r->base())});
  if (auto inner = gen_value(r->base(), name))
    return Value::ext(r, {*inner});
  return std::nullopt;
}

/// Declares the stored coefficients certified only inside `box`; the support
/// outside is assumed to stay in the printed terms' cone widened by the
/// coordinate directions.
Series mark_inexact(const Series& f, const Box& box, const SrcPos& pos) {
  if (box.size() != static_cast<size_t>(f.nvars))
    fail(Errc::TypeError, at(pos) + ": O(box: ...) arity mismatch");
  Series out = series::truncate(f, box);
  out.exact = false;
  out.guarantee = box;
  std::vector<Exponent> pts;
  for (const auto& [k, v] : out.coeffs) pts.push_back(k);
  cones::ConeEnvelope env = cones::envelope_of_points(f.nvars, pts);
  std::vector<Exponent> gens = env.generators;
  for (int i = 0; i < f.nvars; ++i) gens.push_back(cones::exp_unit(f.nvars, i));
  out.envelope = cones::make_envelope(env.base, gens);
  out.certified_nu.clear();
  return out;
}

std::string tuple_text(const std::vector<Series>& comps) {
  std::string s = "(";
  for (size_t i = 0; i < comps.size(); ++i) {
    if (i) s += ", ";
    s += series::to_string(comps[i]);
  }
  return s + ")";
}

std::optional<std::string> series_difference(const Series& f, const Series& g) {
  Box w = cones::box_meet(f.guarantee, g.guarantee);
  std::set<Exponent, cones::LexLess> keys;
  for (const auto& [k, v] : f.coeffs)
    if (cones::box_contains(w, k)) keys.insert(k);
  for (const auto& [k, v] : g.coeffs)
    if (cones::box_contains(w, k)) keys.insert(k);
  for (const auto& k : keys) {
    Value a = series::coefficient(f, k);
    Value b = series::coefficient(g, k);
    if (!a.eq(b))
      return "at t^" + cones::exp_to_string(k) + ": " + a.to_string() +
             " != " + b.to_string();
  }
  return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// Interpreter

namespace {

struct Evaluator {
  RingPtr ring;
  int nvars = 0;
  std::map<std::string, RV> env;
  unsigned long long seed = 20260823;
  long long prec_bound = 8;

  Box default_prec() const { return cones::box_all(nvars, prec_bound); }

  void need_context(const SrcPos& pos) const {
    if (!ring || nvars == 0)
      fail(Errc::TypeError,
           at(pos) + ": ring and vars must be declared first");
  }

  Series as_series(RV v, const SrcPos& pos) const {
    if (auto* s = std::get_if<Series>(&v)) return *s;
    fail(Errc::TypeError, at(pos) + ": a series-valued expression is needed");
  }

  ParamTuple as_tuple(RV v, const SrcPos& pos) const {
    if (auto* t = std::get_if<TupleV>(&v))
      return homs::validate_tuple(static_cast<int>(t->comps.size()), t->comps);
    if (auto* s = std::get_if<Series>(&v))
      return homs::validate_tuple(1, {*s});
    fail(Errc::TypeError, at(pos) + ": a tuple-valued expression is needed");
  }

  /// TopForm coefficient of a full-degree form (or a bare series, read as
  /// f dt1 ^ ... ^ dtn directly).
  Series as_top_form(RV v, const SrcPos& pos) const {
    if (auto* s = std::get_if<Series>(&v)) return *s;
    if (auto* w = std::get_if<FormV>(&v)) {
      if (static_cast<int>(w->vars.size()) != nvars)
        fail(Errc::TypeError,
             at(pos) + ": form degree " + std::to_string(w->vars.size()) +
                 " is not the full degree " + std::to_string(nvars));
      return w->coeff;
    }
    fail(Errc::TypeError, at(pos) + ": a top form is needed");
  }

  RV eval(const Expr& e, const Box& prec, const RingPtr& r) {
    switch (e.k) {
      case Expr::K::Int:
        return constant_in(r, Value::from_int(r, rings::Int(e.text)));
      case Expr::K::Rat:
        return constant_in(
            r, Value::from_rational(
                   r, rings::Rational(rings::Int(e.text), rings::Int(e.denom))));
      case Expr::K::Ident: {
        if (auto it = env.find(e.text); it != env.end() && r == ring)
          return it->second;
        if (auto idx = var_index(e.text))
          return series::variable(nvars, r, *idx);
        if (auto g = gen_value(r, e.text)) return constant_in(r, *g);
        fail(Errc::TypeError, at(e.pos) + ": unbound name '" + e.text + "'");
      }
      case Expr::K::Add:
      case Expr::K::Sub: {
        RV lhs = eval(*e.kids[0], prec, r);
        RV rhs = eval(*e.kids[1], prec, r);
        if (auto* o = std::get_if<OMarkV>(&rhs)) {
          if (e.k == Expr::K::Sub)
            fail(Errc::TypeError, at(e.pos) + ": O(...) must be added");
          return mark_inexact(as_series(lhs, e.pos), o->box, e.pos);
        }
        Series a = as_series(lhs, e.pos);
        Series b = as_series(rhs, e.pos);
        return e.k == Expr::K::Add ? series::add(a, b) : series::sub(a, b);
      }
      case Expr::K::Neg: {
        RV v = eval(*e.kids[0], prec, r);
        if (auto* w = std::get_if<FormV>(&v))
          return FormV{series::negate(w->coeff), w->vars};
        return series::negate(as_series(v, e.pos));
      }
      case Expr::K::Mul: {
        RV lhs = eval(*e.kids[0], prec, r);
        RV rhs = eval(*e.kids[1], prec, r);
        auto* wl = std::get_if<FormV>(&lhs);
        auto* wr = std::get_if<FormV>(&rhs);
        if (wl && wr)
          fail(Errc::TypeError, at(e.pos) + ": use '^' to wedge forms");
        if (wl) return FormV{series::mul(wl->coeff, as_series(rhs, e.pos)),
                             wl->vars};
        if (wr) return FormV{series::mul(as_series(lhs, e.pos), wr->coeff),
                             wr->vars};
        return series::mul(as_series(lhs, e.pos), as_series(rhs, e.pos));
      }
      case Expr::K::Div: {
        Series a = as_series(eval(*e.kids[0], prec, r), e.pos);
        Series b = as_series(eval(*e.kids[1], prec, r), e.pos);
        return series::mul(a, series::invert(b, prec));
      }
      case Expr::K::Pow: {
        Series f = as_series(eval(*e.kids[0], prec, r), e.pos);
        if (e.ipow >= 0) return series::pow_nonneg(f, e.ipow);
        return series::pow_nonneg(series::invert(f, prec), -e.ipow);
      }
      case Expr::K::Wedge: {
        RV lhs = eval(*e.kids[0], prec, r);
        RV rhs = eval(*e.kids[1], prec, r);
        auto* wl = std::get_if<FormV>(&lhs);
        auto* wr = std::get_if<FormV>(&rhs);
        if (!wl || !wr)
          fail(Errc::TypeError, at(e.pos) + ": '^' between non-integer "
                                            "operands wedges two forms");
        return wedge_forms(*wl, *wr, e.pos);
      }
      case Expr::K::Tuple: {
        TupleV t;
        for (const auto& kid : e.kids)
          t.comps.push_back(as_series(eval(*kid, prec, r), kid->pos));
        return t;
      }
      case Expr::K::Prod: {
        if (r->kind() != RingKind::Product)
          fail(Errc::TypeError,
               at(e.pos) + ": '{...}' literal needs a product ring");
        const auto& factors = r->factors();
        if (factors.size() != e.kids.size())
          fail(Errc::TypeError,
               at(e.pos) + ": expected " + std::to_string(factors.size()) +
                   " components, got " + std::to_string(e.kids.size()));
        std::vector<Value> parts;
        for (size_t i = 0; i < factors.size(); ++i) {
          Series c = as_series(eval(*e.kids[i], prec, factors[i]), e.pos);
          parts.push_back(scalar_of(c, e.kids[i]->pos));
        }
        return constant_in(r, Value::tuple(r, parts));
      }
      case Expr::K::Call:
        return call(e, prec, r);
      case Expr::K::OMark:
        return OMarkV{e.box};
    }
    fail(Errc::Internal, "unhandled expression kind");
  }

  Series constant_in(const RingPtr& r, const Value& v) const {
    return series::make_series(nvars, r, {{exp_zero(nvars), v}});
  }

  Value scalar_of(const Series& s, const SrcPos& pos) const {
    for (const auto& [k, v] : s.coeffs)
      if (k != exp_zero(s.nvars))
        fail(Errc::TypeError,
             at(pos) + ": product components must be ring constants");
    return series::coefficient(s, exp_zero(s.nvars));
  }

  std::optional<int> var_index(const std::string& name) const {
    if (name == "t") return nvars == 1 ? std::optional<int>(0) : std::nullopt;
    if (name.size() >= 2 && name[0] == 't') {
      for (size_t i = 1; i < name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name[i])))
          return std::nullopt;
      int idx = std::stoi(name.substr(1));
      if (idx >= 1 && idx <= nvars) return idx - 1;
    }
    return std::nullopt;
  }

  FormV wedge_forms(const FormV& a, const FormV& b, const SrcPos& pos) const {
    std::vector<int> vars = a.vars;
    vars.insert(vars.end(), b.vars.begin(), b.vars.end());
    std::sort(vars.begin(), vars.end());
    if (std::adjacent_find(vars.begin(), vars.end()) != vars.end())
      fail(Errc::TypeError, at(pos) + ": repeated dlog slot");
    // sign = parity of pairs (x in a, y in b) with x > y
    long long swaps = 0;
    for (int x : a.vars)
      for (int y : b.vars)
        if (x > y) ++swaps;
    Series c = series::mul(a.coeff, b.coeff);
    if (swaps % 2 == 1) c = series::negate(c);
    return FormV{c, vars};
  }

  RV call(const Expr& e, const Box& prec, const RingPtr& r) {
    const std::string& fn = e.text;
    auto arg = [&](size_t i) { return eval(*e.kids[i], prec, r); };
    auto need_args = [&](size_t n) {
      if (e.kids.size() != n)
        fail(Errc::TypeError, at(e.pos) + ": " + fn + " takes " +
                                  std::to_string(n) + " argument(s)");
    };
    if (fn == "dlog") {
      need_args(1);
      Series m = as_series(arg(0), e.pos);
      if (m.coeffs.size() != 1 || !m.exact)
        fail(Errc::TypeError, at(e.pos) + ": dlog needs an exact monomial");
      const Exponent& k = m.coeffs.begin()->first;
      int slot = -1;
      for (int i = 0; i < nvars; ++i)
        if (k[static_cast<size_t>(i)] != 0) {
          if (slot >= 0)
            fail(Errc::TypeError,
                 at(e.pos) + ": dlog needs a single-variable monomial");
          slot = i;
        }
      if (slot < 0)
        fail(Errc::TypeError, at(e.pos) + ": dlog of a constant vanishes");
      Value kk = Value::from_int(r, k[static_cast<size_t>(slot)]);
      Series c = series::monomial(nvars, r, cones::exp_neg(cones::exp_unit(nvars, slot)), kk);
      return FormV{c, {slot}};
    }
    if (fn == "residue") {
      need_args(1);
      Series f = as_top_form(arg(0), e.pos);
      return constant_in(
          r, series::coefficient(f, Exponent(static_cast<size_t>(nvars), -1)));
    }
    if (fn == "wedge") {
      need_args(2);
      ParamTuple phi = as_tuple(arg(0), e.pos);
      series::TopForm w{as_top_form(arg(1), e.pos)};
      return constant_in(r, homs::wedge_residue(phi, w, prec));
    }
    if (fn == "adjoint") {
      need_args(2);
      ParamTuple phi = as_tuple(arg(0), e.pos);
      Series f = as_series(arg(1), e.pos);
      return homs::adjoint_apply(phi, f, prec);
    }
    if (fn == "jacobian") {
      need_args(1);
      return homs::jacobian(as_tuple(arg(0), e.pos), prec);
    }
    if (fn == "nu") {
      need_args(1);
      auto dec = series::unit_decompose(as_series(arg(0), e.pos));
      std::string out;
      for (size_t i = 0; i < dec.factors.size(); ++i) {
        if (i) out += "; ";
        out += cones::exp_to_string(dec.factors[i].nu);
      }
      return TextV{out};
    }
    if (fn == "upsilon") {
      need_args(1);
      ParamTuple phi = as_tuple(arg(0), e.pos);
      std::string out;
      for (size_t i = 0; i < phi.factors.size(); ++i) {
        if (i) out += "; ";
        out += phi.factors[i].upsilon.to_string();
      }
      return TextV{out};
    }
    if (is_reserved(fn))
      fail(Errc::TypeError, at(e.pos) + ": '" + fn + "' is not callable here");

    // substitution application: f(phi) or theta(phi)
    auto it = env.find(fn);
    if (it == env.end())
      fail(Errc::TypeError, at(e.pos) + ": unbound name '" + fn + "'");
    ParamTuple phi = [&]() {
      if (e.kids.size() == 1) return as_tuple(arg(0), e.pos);
      TupleV t;
      for (size_t i = 0; i < e.kids.size(); ++i)
        t.comps.push_back(as_series(arg(i), e.kids[i]->pos));
      return as_tuple(RV{t}, e.pos);
    }();
    if (auto* f = std::get_if<Series>(&it->second))
      return homs::substitute(*f, phi, prec);
    if (std::holds_alternative<TupleV>(it->second)) {
      ParamTuple th = as_tuple(it->second, e.pos);
      // components th_i(phi_1, ..., phi_m)
      ParamTuple out = homs::compose_tuples(phi, th, prec);
      return TupleV{out.components};
    }
    fail(Errc::TypeError, at(e.pos) + ": '" + fn + "' is not applicable");
  }

  std::string rv_text(const RV& v, const SrcPos& pos) const {
    if (auto* s = std::get_if<Series>(&v)) return series::to_string(*s);
    if (auto* t = std::get_if<TupleV>(&v)) return tuple_text(t->comps);
    if (auto* x = std::get_if<TextV>(&v)) return x->text;
    if (auto* w = std::get_if<FormV>(&v)) {
      std::string s = series::to_string(w->coeff) + " *";
      for (int i : w->vars) s += " dt" + std::to_string(i + 1);
      return s;
    }
    fail(Errc::TypeError, at(pos) + ": O(...) is not a value");
  }

  // ------------------------------------------------------------------
  // statement execution

  void exec(const Stmt& s, RunResult& res) {
    switch (s.k) {
      case Stmt::K::Ring: {
        if (ring)
          fail(Errc::TypeError, at(s.pos) + ": the ring is already declared");
        ring = s.ring;
        return;
      }
      case Stmt::K::Vars: {
        if (nvars)
          fail(Errc::TypeError, at(s.pos) + ": vars are already declared");
        nvars = s.nvars;
        return;
      }
      case Stmt::K::Let: {
        need_context(s.pos);
        if (is_reserved(s.name) || var_index(s.name))
          fail(Errc::TypeError,
               at(s.pos) + ": '" + s.name + "' is a reserved name");
        if (env.count(s.name))
          fail(Errc::TypeError,
               at(s.pos) + ": '" + s.name + "' is already bound");
        env.emplace(s.name, eval(*s.a, default_prec(), ring));
        return;
      }
      case Stmt::K::Print: {
        need_context(s.pos);
        Box prec = s.prec.value_or(default_prec());
        RV v = eval(*s.a, prec, ring);
        res.outputs.push_back({"print", rv_text(v, s.pos)});
        return;
      }
      case Stmt::K::CheckInv: {
        need_context(s.pos);
        ParamTuple phi = as_tuple(eval(*s.a, default_prec(), ring), s.pos);
        homs::EndoReport rep = homs::endo_report(phi);
        std::string diag;
        for (size_t i = 0; i < rep.d.size(); ++i) {
          if (i) diag += ", ";
          diag += std::to_string(rep.d[i]);
        }
        if (rep.all_invertible()) {
          res.outputs.push_back({"check", "invertible: diag = [" + diag + "]"});
        } else {
          res.outputs.push_back(
              {"check", "not invertible: diag = [" + diag + "]"});
          res.exit_code = std::max(res.exit_code, 1);
        }
        return;
      }
      case Stmt::K::CheckEq: {
        need_context(s.pos);
        Box prec = s.prec.value_or(default_prec());
        RV a = eval(*s.a, prec, ring);
        RV b = eval(*s.b, prec, ring);
        std::optional<std::string> bad = compare(a, b, s.pos);
        if (!bad) {
          res.outputs.push_back({"check", "check passed"});
        } else {
          res.outputs.push_back({"check", "check failed: " + *bad});
          res.exit_code = std::max(res.exit_code, 1);
        }
        return;
      }
      case Stmt::K::Invert: {
        need_context(s.pos);
        Box prec = s.prec.value_or(default_prec());
        ParamTuple phi = as_tuple(eval(*s.a, prec, ring), s.pos);
        ParamTuple psi = homs::inverse_tuple(phi, prec);
        res.outputs.push_back(
            {"invert", psi.n == 1 ? series::to_string(psi.components[0])
                                  : tuple_text(psi.components)});
        return;
      }
      case Stmt::K::Residue: {
        need_context(s.pos);
        Box prec = s.prec.value_or(default_prec());
        RV v = eval(*s.a, prec, ring);
        Series f = as_top_form(v, s.pos);  // `dlog` suffix reads f dt directly
        Value r = series::coefficient(f, Exponent(static_cast<size_t>(nvars), -1));
        res.outputs.push_back({"residue", r.to_string()});
        return;
      }
      case Stmt::K::Verify: {
        verify::SuiteConfig cfg;
        cfg.seed = s.seed.value_or(seed);
        if (s.count) cfg.count = *s.count;
        if (!s.mutation.empty() && s.mutation != "none") {
          if (s.mutation == "wedge_sign_flip")
            cfg.mutation = verify::Mutation::WedgeSignFlip;
          else if (s.mutation == "residue_index_off_by_one")
            cfg.mutation = verify::Mutation::ResidueIndexOffByOne;
          else if (s.mutation == "drop_nil_tail")
            cfg.mutation = verify::Mutation::DropNilTail;
          else
            fail(Errc::TypeError,
                 at(s.pos) + ": unknown mutation '" + s.mutation + "'");
        }
        auto reports = verify::run_suite(cfg);
        int failed = 0, skipped = 0;
        std::string text;
        for (const auto& rep : reports) {
          if (rep.status == verify::Status::Fail) ++failed;
          if (rep.status == verify::Status::SkippedPrecision) ++skipped;
          text += verify::report_line(rep) + "\n";
        }
        text += "verify: " + std::to_string(reports.size()) + " checks, " +
                std::to_string(failed) + " failed, " +
                std::to_string(skipped) + " skipped-precision";
        res.outputs.push_back({"verify", text});
        if (failed > 0) res.exit_code = std::max(res.exit_code, 1);
        return;
      }
    }
  }

  std::optional<std::string> compare(const RV& a, const RV& b,
                                     const SrcPos& pos) const {
    if (auto* sa = std::get_if<Series>(&a)) {
      if (auto* sb = std::get_if<Series>(&b)) return series_difference(*sa, *sb);
      fail(Errc::TypeError, at(pos) + ": cannot compare a series with this");
    }
    if (auto* ta = std::get_if<TupleV>(&a)) {
      auto* tb = std::get_if<TupleV>(&b);
      if (!tb || ta->comps.size() != tb->comps.size())
        return "tuple arities differ";
      for (size_t i = 0; i < ta->comps.size(); ++i)
        if (auto bad = series_difference(ta->comps[i], tb->comps[i]))
          return "component " + std::to_string(i + 1) + " " + *bad;
      return std::nullopt;
    }
    if (auto* xa = std::get_if<TextV>(&a)) {
      auto* xb = std::get_if<TextV>(&b);
      if (xb && xa->text == xb->text) return std::nullopt;
      return xb ? "'" + xa->text + "' != '" + xb->text + "'"
                : "cannot compare text with this";
    }
    fail(Errc::TypeError, at(pos) + ": these values cannot be compared");
  }
};

}  // namespace

struct Session::Interp : Evaluator {};

Session::Session() : imp_(std::make_unique<Interp>()) {}
Session::~Session() = default;

void Session::set_seed(unsigned long long seed) { imp_->seed = seed; }

void Session::set_default_prec(long long bound) { imp_->prec_bound = bound; }

RunResult Session::run(const std::string& text) {
  RunResult res;
  std::vector<Stmt> stmts;
  try {
    Parser parser(lex(text));
    stmts = parser.script();
  } catch (const Error& e) {
    res.outputs.push_back({"error", e.what()});
    res.exit_code = 2;
    return res;
  }
  for (const auto& s : stmts) {
    try {
      imp_->exec(s, res);
    } catch (const Error& e) {
      res.outputs.push_back({"error", at(s.pos) + ": " + e.what()});
      res.exit_code =
          (e.code() == Errc::SyntaxError || e.code() == Errc::TypeError ||
           e.code() == Errc::FormatError)
              ? 2
              : std::max(res.exit_code, 1);
      return res;
    } catch (const std::exception& e) {
      res.outputs.push_back({"error", at(s.pos) + ": " + e.what()});
      res.exit_code = 2;
      return res;
    }
  }
  return res;
}

std::string render(const RunResult& result, bool record) {
  std::string out;
  if (record) out = "laurentlab-record 1\n";
  for (const auto& o : result.outputs) {
    std::istringstream lines(o.text);
    std::string line;
    while (std::getline(lines, line))
      out += record ? o.kind + "\t" + line + "\n" : line + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Value serialization

RingPtr parse_ring_literal(const std::string& text) {
  Parser parser(lex(text));
  return parser.bare_ring();
}

std::string serialize(const Series& f) {
  std::string vars = f.nvars == 1 ? "t" : "t1 .. t" + std::to_string(f.nvars);
  return "ring " + f.ring->name() + "\nvars " + vars + "\n" +
         series::to_string(f) + "\n";
}

Series deserialize(const std::string& text) {
  try {
    Parser parser(lex(text));
    Parser::ValueDoc doc = parser.value_document();
    Evaluator interp;
    interp.ring = doc.ring;
    interp.nvars = doc.nvars;
    RV v = interp.eval(*doc.value, cones::box_all(doc.nvars, 8), doc.ring);
    return interp.as_series(v, doc.value->pos);
  } catch (const Error& e) {
    if (e.code() == Errc::FormatError) throw;
    fail(Errc::FormatError, e.what());
  }
}

}  // namespace laurent::dsl
