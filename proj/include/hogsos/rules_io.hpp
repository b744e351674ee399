#pragma once

#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hogsos/rules.hpp"

namespace hogsos {

// ---------------------------------------------------------------------------
// Text form of rule tables.
//
//   lang xcl
//   effect det          (det | dist | pow)
//   subst on            (only in binder languages)
//
//   rank app 0
//   rank S 1
//
//   rule S |- fun t -> S'(t)
//   rule app(x, y) [x -> x'] |- red x' y
//   rule app(x, y) [x => g] |- red g(y)
//   rule choice(x, y) |- red 1/2: x, 1/2: y
//   rule par(x, y) [x -> x', y -> y'] |- red {x' || y'}
//   rule var[m,j] |- ! ; nu(u) -> u[j]
//   rule lam[m](x) |- fun t -> x{id, t} ; nu(u) -> lam(x{u, *})
//
// A rule head names the operator family, binds its schematic parameters in
// brackets, and names one metavariable per argument. The bracketed premise
// list constrains argument tags: `x -> x'` (reduct, binding the reduct),
// `x => g` (function node, binding it), `x !` (terminal). Unlisted arguments
// match any tag. An optional stage guard `@0` / `@s` restricts the rule to
// stage zero / successor stages.
//
// Conclusions: `!` is terminal; `fun t -> e` is a function node with probe
// `t`; `red ...` is a reduct bag, written as a bare expression (det), as
// `w: e, w: e` (dist), or as `{e, e}` (pow). A trailing `; nu(u) -> e` gives
// the substitution observable.
//
// Expressions: juxtaposition applies through the `app` family and `||` joins
// through `par` (juxtaposition binds tighter; both associate left). `g(y)`
// probes the function bound to `g`. Any other identifier is an operator
// family, optionally with `[params]` and `(args)`; instances without
// explicit parameters are resolved from argument sorts. `u[j]` reads the
// formal environment. Braces after an argument name apply its substitution
// observable: `x{u}` passes the formal environment through, `x{u, *}`
// weakens it and appends a fresh variable, `x{id, t}` extends the identity
// environment with `t`, and `x{e1, e2}` lists entries explicitly.

struct ParsedTable {
  std::string lang;
  Effect effect = Effect::deterministic;
  bool with_subst = false;
  std::map<std::string, int> ranks;
  std::vector<RuleSchema> schemas;
};

inline const char* effect_short(Effect e) {
  switch (e) {
    case Effect::deterministic: return "det";
    case Effect::distribution: return "dist";
    case Effect::powerset: return "pow";
  }
  return "det";
}

inline std::optional<Effect> effect_from_short(const std::string& s) {
  if (s == "det") return Effect::deterministic;
  if (s == "dist") return Effect::distribution;
  if (s == "pow") return Effect::powerset;
  return std::nullopt;
}

namespace rules_text {

enum class Tk {
  ident, number, lbrack, rbrack, lparen, rparen, lbrace, rbrace,
  comma, colon, semi, at, bang, star, slash, arrow, fatarrow, turnstile,
  parbar, end
};

struct Token {
  Tk kind;
  std::string text;
};

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

struct Cursor {
  std::vector<Token> toks;
  size_t pos = 0;
  int lineno = 0;

  [[noreturn]] void err(const std::string& msg) const {
    fail(errc::parse_error, "rule table line " + std::to_string(lineno) + ": " + msg);
  }
  const Token& peek(size_t ahead = 0) const {
    size_t i = pos + ahead;
    return i < toks.size() ? toks[i] : toks.back();
  }
  bool at(Tk k, size_t ahead = 0) const { return peek(ahead).kind == k; }
  Token eat() { return toks[pos < toks.size() - 1 ? pos++ : pos]; }
  Token expect(Tk k, const std::string& what) {
    if (!at(k)) err("expected " + what + (peek().text.empty() ? "" : ", got '" + peek().text + "'"));
    return eat();
  }
  std::string expect_ident(const std::string& what) { return expect(Tk::ident, what).text; }
};

inline Cursor lex_line(const std::string& line, int lineno) {
  Cursor cur;
  cur.lineno = lineno;
  size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (ident_start(c)) {
      size_t j = i;
      while (j < line.size() && ident_char(line[j])) ++j;
      cur.toks.push_back({Tk::ident, line.substr(i, j - i)});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      cur.toks.push_back({Tk::number, line.substr(i, j - i)});
      i = j;
      continue;
    }
    auto two = [&](char next) { return i + 1 < line.size() && line[i + 1] == next; };
    switch (c) {
      case '[': cur.toks.push_back({Tk::lbrack, "["}); ++i; break;
      case ']': cur.toks.push_back({Tk::rbrack, "]"}); ++i; break;
      case '(': cur.toks.push_back({Tk::lparen, "("}); ++i; break;
      case ')': cur.toks.push_back({Tk::rparen, ")"}); ++i; break;
      case '{': cur.toks.push_back({Tk::lbrace, "{"}); ++i; break;
      case '}': cur.toks.push_back({Tk::rbrace, "}"}); ++i; break;
      case ',': cur.toks.push_back({Tk::comma, ","}); ++i; break;
      case ':': cur.toks.push_back({Tk::colon, ":"}); ++i; break;
      case ';': cur.toks.push_back({Tk::semi, ";"}); ++i; break;
      case '@': cur.toks.push_back({Tk::at, "@"}); ++i; break;
      case '!': cur.toks.push_back({Tk::bang, "!"}); ++i; break;
      case '*': cur.toks.push_back({Tk::star, "*"}); ++i; break;
      case '/': cur.toks.push_back({Tk::slash, "/"}); ++i; break;
      case '-':
        if (!two('>'))
          fail(errc::parse_error,
               "rule table line " + std::to_string(lineno) + ": stray '-'");
        cur.toks.push_back({Tk::arrow, "->"});
        i += 2;
        break;
      case '=':
        if (!two('>'))
          fail(errc::parse_error,
               "rule table line " + std::to_string(lineno) + ": stray '='");
        cur.toks.push_back({Tk::fatarrow, "=>"});
        i += 2;
        break;
      case '|':
        if (two('-')) {
          cur.toks.push_back({Tk::turnstile, "|-"});
          i += 2;
        } else if (two('|')) {
          cur.toks.push_back({Tk::parbar, "||"});
          i += 2;
        } else {
          fail(errc::parse_error,
               "rule table line " + std::to_string(lineno) + ": stray '|'");
        }
        break;
      default:
        fail(errc::parse_error, "rule table line " + std::to_string(lineno) +
                                    ": unexpected character '" + std::string(1, c) + "'");
    }
  }
  cur.toks.push_back({Tk::end, ""});
  return cur;
}

// Names in scope while parsing a conclusion expression.
struct ExprScope {
  std::map<std::string, int> args;
  std::map<std::string, int> reducts;
  std::map<std::string, int> funs;
  std::string probe;
  std::string env;
};

inline CExprPtr parse_expr(Cursor& cur, const ExprScope& sc);

inline CExprPtr parse_subst(Cursor& cur, const ExprScope& sc, int arg) {
  cur.expect(Tk::lbrace, "'{'");
  if (cur.at(Tk::rbrace)) {
    cur.eat();
    return CExpr::mk_subst(arg, EnvKind::explicit_list);
  }
  if (cur.at(Tk::ident) && cur.peek().text == "id" &&
      (cur.at(Tk::comma, 1) || cur.at(Tk::rbrace, 1))) {
    cur.eat();
    std::vector<CExprPtr> entries;
    while (cur.at(Tk::comma)) {
      cur.eat();
      entries.push_back(parse_expr(cur, sc));
    }
    cur.expect(Tk::rbrace, "'}'");
    return CExpr::mk_subst(arg, EnvKind::idents_probe, std::move(entries));
  }
  if (!sc.env.empty() && cur.at(Tk::ident) && cur.peek().text == sc.env) {
    if (cur.at(Tk::rbrace, 1)) {
      cur.eat();
      cur.eat();
      return CExpr::mk_subst(arg, EnvKind::formal);
    }
    if (cur.at(Tk::comma, 1) && cur.at(Tk::star, 2) && cur.at(Tk::rbrace, 3)) {
      cur.eat();
      cur.eat();
      cur.eat();
      cur.eat();
      return CExpr::mk_subst(arg, EnvKind::formal_extended);
    }
  }
  std::vector<CExprPtr> entries;
  entries.push_back(parse_expr(cur, sc));
  while (cur.at(Tk::comma)) {
    cur.eat();
    entries.push_back(parse_expr(cur, sc));
  }
  cur.expect(Tk::rbrace, "'}'");
  return CExpr::mk_subst(arg, EnvKind::explicit_list, std::move(entries));
}

inline CExprPtr parse_atom(Cursor& cur, const ExprScope& sc) {
  if (cur.at(Tk::lparen)) {
    cur.eat();
    CExprPtr e = parse_expr(cur, sc);
    cur.expect(Tk::rparen, "')'");
    return e;
  }
  std::string name = cur.expect_ident("an expression");
  if (!sc.probe.empty() && name == sc.probe) return CExpr::mk_probe();
  if (!sc.env.empty() && name == sc.env) {
    cur.expect(Tk::lbrack, "'[' after the environment name");
    CExprPtr e;
    if (cur.at(Tk::number)) {
      auto at = std::make_shared<CExpr>();
      at->kind = CKind::env_at;
      at->index = std::stoi(cur.eat().text);
      e = at;
    } else {
      e = CExpr::mk_env_at(cur.expect_ident("an environment index"));
    }
    cur.expect(Tk::rbrack, "']'");
    return e;
  }
  if (auto it = sc.args.find(name); it != sc.args.end()) {
    if (cur.at(Tk::lbrace)) return parse_subst(cur, sc, it->second);
    return CExpr::mk_arg(it->second);
  }
  if (auto it = sc.reducts.find(name); it != sc.reducts.end()) return CExpr::mk_reduct(it->second);
  if (auto it = sc.funs.find(name); it != sc.funs.end()) {
    cur.expect(Tk::lparen, "'(' after a function binder");
    CExprPtr arg = parse_expr(cur, sc);
    cur.expect(Tk::rparen, "')'");
    return CExpr::mk_apply(it->second, std::move(arg));
  }
  std::vector<std::string> params;
  if (cur.at(Tk::lbrack)) {
    cur.eat();
    while (true) {
      if (!cur.at(Tk::ident) && !cur.at(Tk::number)) cur.err("expected a parameter");
      params.push_back(cur.eat().text);
      if (cur.at(Tk::comma)) {
        cur.eat();
        continue;
      }
      break;
    }
    cur.expect(Tk::rbrack, "']'");
  }
  std::vector<CExprPtr> kids;
  if (cur.at(Tk::lparen)) {
    cur.eat();
    if (!cur.at(Tk::rparen)) {
      kids.push_back(parse_expr(cur, sc));
      while (cur.at(Tk::comma)) {
        cur.eat();
        kids.push_back(parse_expr(cur, sc));
      }
    }
    cur.expect(Tk::rparen, "')'");
  }
  return CExpr::mk_op(name, std::move(kids), std::move(params));
}

inline bool starts_atom(const Cursor& cur) { return cur.at(Tk::ident) || cur.at(Tk::lparen); }

inline CExprPtr parse_app(Cursor& cur, const ExprScope& sc) {
  CExprPtr e = parse_atom(cur, sc);
  while (starts_atom(cur)) e = CExpr::mk_op("app", {e, parse_atom(cur, sc)});
  return e;
}

inline CExprPtr parse_expr(Cursor& cur, const ExprScope& sc) {
  CExprPtr e = parse_app(cur, sc);
  while (cur.at(Tk::parbar)) {
    cur.eat();
    e = CExpr::mk_op("par", {e, parse_app(cur, sc)});
  }
  return e;
}

inline Rational parse_weight(Cursor& cur) {
  std::string num = cur.expect(Tk::number, "a weight").text;
  if (cur.at(Tk::slash)) {
    cur.eat();
    num += "/" + cur.expect(Tk::number, "a denominator").text;
  }
  return parse_rational(num);
}

inline RuleSchema parse_rule(Cursor& cur, Effect effect) {
  RuleSchema s;
  s.family = cur.expect_ident("an operator family");
  if (cur.at(Tk::lbrack)) {
    cur.eat();
    while (true) {
      s.param_names.push_back(cur.expect_ident("a parameter name"));
      if (cur.at(Tk::comma)) {
        cur.eat();
        continue;
      }
      break;
    }
    cur.expect(Tk::rbrack, "']'");
  }
  ExprScope sc;
  if (cur.at(Tk::lparen)) {
    cur.eat();
    while (true) {
      Premise p;
      p.name = cur.expect_ident("an argument name");
      if (sc.args.count(p.name)) cur.err("duplicate argument name '" + p.name + "'");
      sc.args[p.name] = static_cast<int>(s.premises.size());
      s.premises.push_back(std::move(p));
      if (cur.at(Tk::comma)) {
        cur.eat();
        continue;
      }
      break;
    }
    cur.expect(Tk::rparen, "')'");
  }
  if (cur.at(Tk::lbrack)) {
    cur.eat();
    while (true) {
      std::string name = cur.expect_ident("an argument name");
      auto it = sc.args.find(name);
      if (it == sc.args.end()) cur.err("premise names unknown argument '" + name + "'");
      Premise& p = s.premises[it->second];
      if (!p.any) cur.err("argument '" + name + "' constrained twice");
      p.any = false;
      if (cur.at(Tk::arrow)) {
        cur.eat();
        p.tag = StepTag::reduct;
        p.binder = cur.expect_ident("a reduct binder");
        sc.reducts[p.binder] = it->second;
      } else if (cur.at(Tk::fatarrow)) {
        cur.eat();
        p.tag = StepTag::function;
        p.binder = cur.expect_ident("a function binder");
        sc.funs[p.binder] = it->second;
      } else if (cur.at(Tk::bang)) {
        cur.eat();
        p.tag = StepTag::terminal;
      } else {
        cur.err("expected '->', '=>' or '!' after '" + name + "'");
      }
      if (cur.at(Tk::comma)) {
        cur.eat();
        continue;
      }
      break;
    }
    cur.expect(Tk::rbrack, "']'");
  }
  if (cur.at(Tk::at)) {
    cur.eat();
    if (cur.at(Tk::number) && cur.peek().text == "0") {
      cur.eat();
      s.stage = StageGuard::zero;
    } else if (cur.at(Tk::ident) && cur.peek().text == "s") {
      cur.eat();
      s.stage = StageGuard::succ;
    } else {
      cur.err("expected '0' or 's' after '@'");
    }
  }
  cur.expect(Tk::turnstile, "'|-'");
  if (cur.at(Tk::bang)) {
    cur.eat();
    s.ctag = StepTag::terminal;
  } else if (cur.at(Tk::ident) && cur.peek().text == "fun") {
    cur.eat();
    s.ctag = StepTag::function;
    s.probe_name = cur.expect_ident("a probe name");
    cur.expect(Tk::arrow, "'->'");
    sc.probe = s.probe_name;
    s.cfun = parse_expr(cur, sc);
    sc.probe.clear();
  } else if (cur.at(Tk::ident) && cur.peek().text == "red") {
    cur.eat();
    s.ctag = StepTag::reduct;
    s.ceffect = effect;
    switch (effect) {
      case Effect::deterministic:
        s.cbag.emplace_back(Rational(1), parse_expr(cur, sc));
        break;
      case Effect::distribution:
        while (true) {
          Rational w = parse_weight(cur);
          cur.expect(Tk::colon, "':' after a weight");
          s.cbag.emplace_back(w, parse_expr(cur, sc));
          if (cur.at(Tk::comma)) {
            cur.eat();
            continue;
          }
          break;
        }
        break;
      case Effect::powerset:
        cur.expect(Tk::lbrace, "'{'");
        if (!cur.at(Tk::rbrace)) {
          s.cbag.emplace_back(Rational(1), parse_expr(cur, sc));
          while (cur.at(Tk::comma)) {
            cur.eat();
            s.cbag.emplace_back(Rational(1), parse_expr(cur, sc));
          }
        }
        cur.expect(Tk::rbrace, "'}'");
        break;
    }
  } else {
    cur.err("expected a conclusion ('!', 'fun' or 'red')");
  }
  if (cur.at(Tk::semi)) {
    cur.eat();
    if (!(cur.at(Tk::ident) && cur.peek().text == "nu")) cur.err("expected 'nu'");
    cur.eat();
    cur.expect(Tk::lparen, "'('");
    s.env_name = cur.expect_ident("an environment name");
    cur.expect(Tk::rparen, "')'");
    cur.expect(Tk::arrow, "'->'");
    sc.env = s.env_name;
    s.cnu = parse_expr(cur, sc);
    sc.env.clear();
  }
  cur.expect(Tk::end, "end of line");
  return s;
}

}  // namespace rules_text

inline ParsedTable parse_rule_table(const std::string& text) {
  using namespace rules_text;
  ParsedTable t;
  bool lang_set = false;
  bool effect_set = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    Cursor cur = lex_line(line, lineno);
    if (cur.at(Tk::end)) continue;
    std::string head = cur.expect_ident("a directive");
    if (head == "lang") {
      t.lang = cur.expect_ident("a language name");
      lang_set = true;
    } else if (head == "effect") {
      std::string w = cur.expect_ident("det, dist or pow");
      std::optional<Effect> e = effect_from_short(w);
      if (!e) cur.err("unknown effect '" + w + "'");
      t.effect = *e;
      effect_set = true;
    } else if (head == "subst") {
      if (cur.expect_ident("'on'") != "on") cur.err("expected 'subst on'");
      t.with_subst = true;
    } else if (head == "rank") {
      std::string family = cur.expect_ident("an operator family");
      int n = std::stoi(cur.expect(Tk::number, "a rank").text);
      if (t.ranks.count(family)) cur.err("duplicate rank for '" + family + "'");
      t.ranks[family] = n;
    } else if (head == "rule") {
      if (!effect_set) cur.err("effect must be declared before rules");
      t.schemas.push_back(parse_rule(cur, t.effect));
      continue;  // parse_rule consumed the line end
    } else {
      cur.err("unknown directive '" + head + "'");
    }
    cur.expect(Tk::end, "end of line");
  }
  if (!lang_set) fail(errc::parse_error, "rule table: missing 'lang' directive");
  if (!effect_set) fail(errc::parse_error, "rule table: missing 'effect' directive");
  for (const RuleSchema& s : t.schemas) {
    if (!t.ranks.count(s.family))
      fail(errc::rule_table_invalid, "rule table: no rank for family '" + s.family + "'");
    if (t.with_subst && !s.cnu)
      fail(errc::rule_table_invalid,
           "rule table: rule for " + s.family + " lacks a substitution clause");
    if (!t.with_subst && s.cnu)
      fail(errc::rule_table_invalid,
           "rule table: rule for " + s.family + " has a substitution clause but subst is off");
  }
  return t;
}

// ---------------------------------------------------------------------------
// Canonical printer. Directives come first (ranks alphabetically), then the
// rules in table order. Premise constraints are printed in argument order,
// distribution entries always carry weights, and juxtaposition/|| are used
// for parameterless app/par conclusions, so printing a parsed table
// reproduces canonically formatted input byte for byte.

namespace rules_text {

inline int expr_level(const CExprPtr& e) {
  if (e->kind == CKind::op && e->op_params.empty() && !e->decl && e->kids.size() == 2) {
    if (e->family == "par") return 0;
    if (e->family == "app") return 1;
  }
  return 2;
}

inline void print_expr(std::ostream& os, const CExprPtr& e, const RuleSchema& s, int min_level) {
  int level = expr_level(e);
  bool paren = level < min_level;
  if (paren) os << "(";
  switch (e->kind) {
    case CKind::arg:
      os << s.premises.at(e->index).name;
      break;
    case CKind::reduct_of:
      os << s.premises.at(e->index).binder;
      break;
    case CKind::apply_fun:
      os << s.premises.at(e->index).binder << "(";
      print_expr(os, e->kids.front(), s, 0);
      os << ")";
      break;
    case CKind::bound_probe:
      os << s.probe_name;
      break;
    case CKind::env_at:
      os << s.env_name << "["
         << (e->index_param.empty() ? std::to_string(e->index) : e->index_param) << "]";
      break;
    case CKind::subst_of: {
      os << s.premises.at(e->index).name << "{";
      switch (e->env_kind) {
        case EnvKind::formal:
          os << s.env_name;
          break;
        case EnvKind::formal_extended:
          os << s.env_name << ", *";
          break;
        case EnvKind::idents_probe:
          os << "id";
          for (const CExprPtr& k : e->kids) {
            os << ", ";
            print_expr(os, k, s, 0);
          }
          break;
        case EnvKind::explicit_list:
          for (size_t i = 0; i < e->kids.size(); ++i) {
            if (i) os << ", ";
            print_expr(os, e->kids[i], s, 0);
          }
          break;
      }
      os << "}";
      break;
    }
    case CKind::op:
      if (level == 0) {
        print_expr(os, e->kids[0], s, 0);
        os << " || ";
        print_expr(os, e->kids[1], s, 1);
      } else if (level == 1) {
        print_expr(os, e->kids[0], s, 1);
        os << " ";
        print_expr(os, e->kids[1], s, 2);
      } else {
        os << e->family;
        if (!e->op_params.empty()) {
          os << "[";
          for (size_t i = 0; i < e->op_params.size(); ++i) {
            if (i) os << ",";
            os << e->op_params[i];
          }
          os << "]";
        }
        if (!e->kids.empty()) {
          os << "(";
          for (size_t i = 0; i < e->kids.size(); ++i) {
            if (i) os << ", ";
            print_expr(os, e->kids[i], s, 0);
          }
          os << ")";
        }
      }
      break;
    case CKind::term_leaf:
      fail(errc::rule_table_invalid, "instantiated rules cannot be printed as table text");
  }
  if (paren) os << ")";
}

}  // namespace rules_text

inline std::string print_schema(const RuleSchema& s) {
  using rules_text::print_expr;
  std::ostringstream os;
  os << "rule " << s.family;
  if (!s.param_names.empty()) {
    os << "[";
    for (size_t i = 0; i < s.param_names.size(); ++i) {
      if (i) os << ",";
      os << s.param_names[i];
    }
    os << "]";
  }
  if (!s.premises.empty()) {
    os << "(";
    for (size_t i = 0; i < s.premises.size(); ++i) {
      if (i) os << ", ";
      os << s.premises[i].name;
    }
    os << ")";
  }
  bool constrained = false;
  for (const Premise& p : s.premises) constrained = constrained || !p.any;
  if (constrained) {
    os << " [";
    bool first = true;
    for (const Premise& p : s.premises) {
      if (p.any) continue;
      if (!first) os << ", ";
      first = false;
      os << p.name;
      switch (p.tag) {
        case StepTag::reduct: os << " -> " << p.binder; break;
        case StepTag::function: os << " => " << p.binder; break;
        case StepTag::terminal: os << " !"; break;
      }
    }
    os << "]";
  }
  if (s.stage == StageGuard::zero) os << " @0";
  if (s.stage == StageGuard::succ) os << " @s";
  os << " |- ";
  switch (s.ctag) {
    case StepTag::terminal:
      os << "!";
      break;
    case StepTag::function:
      os << "fun " << s.probe_name << " -> ";
      print_expr(os, s.cfun, s, 0);
      break;
    case StepTag::reduct:
      os << "red ";
      switch (s.ceffect) {
        case Effect::deterministic:
          print_expr(os, s.cbag.front().second, s, 0);
          break;
        case Effect::distribution:
          for (size_t i = 0; i < s.cbag.size(); ++i) {
            if (i) os << ", ";
            os << rational_str(s.cbag[i].first) << ": ";
            print_expr(os, s.cbag[i].second, s, 0);
          }
          break;
        case Effect::powerset:
          os << "{";
          for (size_t i = 0; i < s.cbag.size(); ++i) {
            if (i) os << ", ";
            print_expr(os, s.cbag[i].second, s, 0);
          }
          os << "}";
          break;
      }
      break;
  }
  if (s.cnu) {
    os << " ; nu(" << s.env_name << ") -> ";
    print_expr(os, s.cnu, s, 0);
  }
  return os.str();
}

inline std::string print_rule_table(const std::string& lang, Effect effect, bool with_subst,
                                    const std::map<std::string, int>& ranks,
                                    const std::vector<RuleSchema>& schemas) {
  std::ostringstream os;
  os << "lang " << lang << "\n";
  os << "effect " << effect_short(effect) << "\n";
  if (with_subst) os << "subst on\n";
  os << "\n";
  for (const auto& [family, rank] : ranks) os << "rank " << family << " " << rank << "\n";
  os << "\n";
  for (const RuleSchema& s : schemas) os << print_schema(s) << "\n";
  return os.str();
}

inline std::string print_rule_table(const ParsedTable& t) {
  return print_rule_table(t.lang, t.effect, t.with_subst, t.ranks, t.schemas);
}

inline std::string print_rule_table(const HoGsosLaw& law) {
  return print_rule_table(law.name, law.effect, law.with_subst, law.family_rank, law.schemas);
}

// Laws hold a mutex, so they live behind a pointer. Structural checks run
// here: effect agreement, distribution weights, premise overlap, flatness.
inline std::shared_ptr<HoGsosLaw> assemble_law(ParsedTable t, std::shared_ptr<Signature> sig,
                                               HoGsosLaw::Hooks hooks, bool guarded = false) {
  auto law = std::make_shared<HoGsosLaw>();
  law->name = t.lang;
  law->sig = std::move(sig);
  law->effect = t.effect;
  law->guarded = guarded;
  law->with_subst = t.with_subst;
  law->schemas = std::move(t.schemas);
  law->family_rank = std::move(t.ranks);
  law->hooks = std::move(hooks);
  check_table(*law);
  FlatnessReport rep = check_flatness(*law);
  if (!rep.flat) fail(errc::flatness_violation, rep.violations.front());
  return law;
}

}  // namespace hogsos
