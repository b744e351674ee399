#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "hogsos/engine.hpp"
#include "hogsos/rules_io.hpp"

namespace hogsos {
namespace tcl {

// ---------------------------------------------------------------------------
// Types: unit and arrows, interned so pointer identity is structural
// identity. The canonical rendering doubles as the kernel sort name, with ->
// associating right and parentheses only around arrow domains.

class Ty {
 public:
  const Ty* from;  // null for unit
  const Ty* to;
  int complexity;  // |unit| = 1, |a->b| = |a| + |b|
  std::string text;

  bool is_unit() const { return from == nullptr; }
  Sort sort() const { return Sort(text); }

  static const Ty* unit() {
    static Ty u{nullptr, nullptr, 1, "unit"};
    return &u;
  }

  static const Ty* arrow(const Ty* a, const Ty* b) {
    static std::mutex m;
    static std::map<std::pair<const Ty*, const Ty*>, std::unique_ptr<Ty>> table;
    std::lock_guard<std::mutex> lock(m);
    auto key = std::make_pair(a, b);
    auto it = table.find(key);
    if (it == table.end()) {
      std::string s = (a->is_unit() ? a->text : "(" + a->text + ")") + "->" + b->text;
      it = table.emplace(key, std::unique_ptr<Ty>(new Ty{a, b, a->complexity + b->complexity,
                                                         std::move(s)}))
               .first;
    }
    return it->second.get();
  }

 private:
  Ty(const Ty* f, const Ty* t, int c, std::string s)
      : from(f), to(t), complexity(c), text(std::move(s)) {}
  friend struct std::default_delete<Ty>;
  ~Ty() = default;
};

namespace detail_ty {

inline const Ty* parse_at(const std::string& s, size_t& i) {
  auto skip = [&] { while (i < s.size() && s[i] == ' ') ++i; };
  skip();
  const Ty* left = nullptr;
  if (i < s.size() && s[i] == '(') {
    ++i;
    left = parse_at(s, i);
    skip();
    if (i >= s.size() || s[i] != ')') fail(errc::parse_error, "type: expected ')' in '" + s + "'");
    ++i;
  } else if (s.compare(i, 4, "unit") == 0) {
    i += 4;
    left = Ty::unit();
  } else {
    fail(errc::parse_error, "type: expected 'unit' or '(' in '" + s + "'");
  }
  skip();
  if (i + 1 < s.size() && s[i] == '-' && s[i + 1] == '>') {
    i += 2;
    return Ty::arrow(left, parse_at(s, i));
  }
  return left;
}

}  // namespace detail_ty

inline const Ty* parse_ty(const std::string& s) {
  size_t i = 0;
  const Ty* t = detail_ty::parse_at(s, i);
  while (i < s.size() && s[i] == ' ') ++i;
  if (i != s.size()) fail(errc::parse_error, "type: trailing input in '" + s + "'");
  return t;
}

inline const Ty* ty_of_sort(const Sort& s) { return parse_ty(s.name()); }

// ---------------------------------------------------------------------------
// Operator schemes. Instances are materialized on demand; the type subscripts
// are part of operator identity.

struct TclSig {
  std::shared_ptr<Signature> sig = std::make_shared<Signature>();
  bool prob = false;

  const OperatorDecl* instance_ty(const std::string& family,
                                  const std::vector<const Ty*>& p) const {
    auto arr = [](const Ty* x, const Ty* y) { return Ty::arrow(x, y); };
    OperatorDecl d;
    d.family = family;
    d.rank = family == "app" ? 0 : 1;
    auto want = [&](size_t n) {
      if (p.size() != n)
        fail(errc::sort_mismatch, family + " takes " + std::to_string(n) + " type parameters");
    };
    if (family == "e") {
      want(0);
      d.result_sort = Ty::unit()->sort();
    } else if (family == "I") {
      want(1);
      d.result_sort = arr(p[0], p[0])->sort();
    } else if (family == "K") {
      want(2);
      d.result_sort = arr(p[0], arr(p[1], p[0]))->sort();
    } else if (family == "S") {
      want(3);
      d.result_sort = arr(arr(p[0], arr(p[1], p[2])), arr(arr(p[0], p[1]), arr(p[0], p[2])))->sort();
    } else if (family == "S'") {
      want(3);
      d.arg_sorts = {arr(p[0], arr(p[1], p[2]))->sort()};
      d.result_sort = arr(arr(p[0], p[1]), arr(p[0], p[2]))->sort();
    } else if (family == "K'") {
      want(2);
      d.arg_sorts = {p[0]->sort()};
      d.result_sort = arr(p[1], p[0])->sort();
    } else if (family == "S''") {
      want(3);
      d.arg_sorts = {arr(p[0], arr(p[1], p[2]))->sort(), arr(p[0], p[1])->sort()};
      d.result_sort = arr(p[0], p[2])->sort();
    } else if (family == "app") {
      want(2);
      d.arg_sorts = {arr(p[0], p[1])->sort(), p[0]->sort()};
      d.result_sort = p[1]->sort();
    } else if (family == "choice" && prob) {
      want(1);
      d.arg_sorts = {p[0]->sort(), p[0]->sort()};
      d.result_sort = p[0]->sort();
    } else {
      fail(errc::sort_mismatch, "unknown operator family '" + family + "'");
    }
    for (const Ty* t : p) d.params.push_back(t->text);
    d.name = family;
    if (!p.empty()) {
      d.name += "[";
      for (size_t i = 0; i < p.size(); ++i) d.name += (i ? "," : "") + p[i]->text;
      d.name += "]";
    }
    return sig->add(std::move(d));
  }

  const OperatorDecl* instance(const std::string& family,
                               const std::vector<std::string>& params) const {
    std::vector<const Ty*> p;
    p.reserve(params.size());
    for (const std::string& s : params) p.push_back(parse_ty(s));
    return instance_ty(family, p);
  }
};

// ---------------------------------------------------------------------------
// Rule tables. Combinator rules are those of the deterministic calculus; the
// probabilistic one adds the fair-coin choice, whose arguments are not
// stepped, and carries explicit Dirac weights on the application rules.

inline const char* xtcl_table() {
  return
      "lang xtcl\n"
      "effect det\n"
      "\n"
      "rank I 1\n"
      "rank K 1\n"
      "rank K' 1\n"
      "rank S 1\n"
      "rank S' 1\n"
      "rank S'' 1\n"
      "rank app 0\n"
      "rank e 1\n"
      "\n"
      "rule S[a,b,c] |- fun t -> S'[a,b,c](t)\n"
      "rule S'[a,b,c](x) |- fun t -> S''[a,b,c](x, t)\n"
      "rule S''[a,b,c](x, y) |- fun t -> x t (y t)\n"
      "rule K[a,b] |- fun t -> K'[a,b](t)\n"
      "rule K'[a,b](x) |- fun t -> x\n"
      "rule I[a] |- fun t -> t\n"
      "rule e |- !\n"
      "rule app(x, y) [x -> x'] |- red x' y\n"
      "rule app(x, y) [x => g] |- red g(y)\n";
}

inline const char* xptcl_table() {
  return
      "lang xptcl\n"
      "effect dist\n"
      "\n"
      "rank I 1\n"
      "rank K 1\n"
      "rank K' 1\n"
      "rank S 1\n"
      "rank S' 1\n"
      "rank S'' 1\n"
      "rank app 0\n"
      "rank choice 1\n"
      "rank e 1\n"
      "\n"
      "rule S[a,b,c] |- fun t -> S'[a,b,c](t)\n"
      "rule S'[a,b,c](x) |- fun t -> S''[a,b,c](x, t)\n"
      "rule S''[a,b,c](x, y) |- fun t -> x t (y t)\n"
      "rule K[a,b] |- fun t -> K'[a,b](t)\n"
      "rule K'[a,b](x) |- fun t -> x\n"
      "rule I[a] |- fun t -> t\n"
      "rule e |- !\n"
      "rule choice[a](x, y) |- red 1/2: x, 1/2: y\n"
      "rule app(x, y) [x -> x'] |- red 1: x' y\n"
      "rule app(x, y) [x => g] |- red 1: g(y)\n";
}

// ---------------------------------------------------------------------------
// Type inference for the surface syntax: plain unification with an occurs
// check; type variables left unconstrained default to unit (documented
// convention; any ground instance of the principal type is well-typed).

class TyInfer {
 public:
  int fresh() { return add(0, -1, -1); }
  int unit_n() { return add(1, -1, -1); }
  int arrow_n(int a, int b) { return add(2, a, b); }

  int of_ty(const Ty* t) {
    return t->is_unit() ? unit_n() : arrow_n(of_ty(t->from), of_ty(t->to));
  }

  void unify(int x, int y) {
    x = find(x);
    y = find(y);
    if (x == y) return;
    if (ns[x].tag == 0) {
      if (occurs(x, y))
        fail(errc::ill_typed, "occurs check: no finite type solves this application");
      ns[x].link = y;
      return;
    }
    if (ns[y].tag == 0) {
      unify(y, x);
      return;
    }
    if (ns[x].tag == 1 && ns[y].tag == 1) return;
    if (ns[x].tag == 2 && ns[y].tag == 2) {
      unify(ns[x].a, ns[y].a);
      unify(ns[x].b, ns[y].b);
      return;
    }
    fail(errc::ill_typed, "cannot unify unit with an arrow type");
  }

  const Ty* resolve(int x) {
    x = find(x);
    if (ns[x].tag == 2) return Ty::arrow(resolve(ns[x].a), resolve(ns[x].b));
    return Ty::unit();
  }

 private:
  struct N {
    int tag;  // 0 variable, 1 unit, 2 arrow
    int a, b;
    int link;
  };
  std::vector<N> ns;

  int add(int tag, int a, int b) {
    ns.push_back({tag, a, b, -1});
    return static_cast<int>(ns.size()) - 1;
  }
  int find(int x) {
    while (ns[x].tag == 0 && ns[x].link >= 0) x = ns[x].link;
    return x;
  }
  bool occurs(int v, int x) {
    x = find(x);
    if (x == v) return true;
    if (ns[x].tag == 2) return occurs(v, ns[x].a) || occurs(v, ns[x].b);
    return false;
  }
};

// ---------------------------------------------------------------------------
// Surface syntax: application by juxtaposition (left-associative), choice as
// infix + (probabilistic calculus only, binding looser than application),
// S'/K'/S'' in call form, optional explicit subscripts like S[unit,unit,unit].

namespace detail_surface {

struct Tok {
  enum K { ident, lpar, rpar, lbrack, rbrack, comma, plus, end } k;
  std::string s;
};

inline std::vector<Tok> lex(const std::string& text) {
  std::vector<Tok> out;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' ||
              text[j] == '\''))
        ++j;
      out.push_back({Tok::ident, text.substr(i, j - i)});
      i = j;
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      out.push_back({Tok::ident, "->"});
      i += 2;
      continue;
    }
    switch (c) {
      case '(': out.push_back({Tok::lpar, "("}); break;
      case ')': out.push_back({Tok::rpar, ")"}); break;
      case '[': out.push_back({Tok::lbrack, "["}); break;
      case ']': out.push_back({Tok::rbrack, "]"}); break;
      case ',': out.push_back({Tok::comma, ","}); break;
      case '+': out.push_back({Tok::plus, "+"}); break;
      default:
        fail(errc::parse_error, std::string("unexpected character '") + c + "' in term");
    }
    ++i;
  }
  out.push_back({Tok::end, ""});
  return out;
}

struct Ast {
  enum Kind { cst, call, apply, pick } kind;
  std::string name;
  std::vector<const Ty*> subs;
  std::vector<std::shared_ptr<Ast>> kids;
  std::vector<int> params;  // inference nodes for the operator's type parameters
  int ty = -1;
};
using AstPtr = std::shared_ptr<Ast>;

struct Parser {
  const std::vector<Tok>& toks;
  size_t pos = 0;
  bool prob;

  const Tok& peek() const { return toks[pos]; }
  Tok eat() { return toks[pos < toks.size() - 1 ? pos++ : pos]; }

  bool is_callable(const std::string& n) const { return n == "S'" || n == "K'" || n == "S''"; }
  bool is_const(const std::string& n) const {
    return n == "e" || n == "S" || n == "K" || n == "I";
  }

  AstPtr atom() {
    if (peek().k == Tok::lpar) {
      eat();
      AstPtr e = expr();
      if (peek().k != Tok::rpar) fail(errc::parse_error, "expected ')'");
      eat();
      return e;
    }
    if (peek().k != Tok::ident) fail(errc::parse_error, "expected a term");
    std::string name = eat().s;
    if (!is_const(name) && !is_callable(name))
      fail(errc::parse_error, "unknown operator '" + name + "'");
    auto n = std::make_shared<Ast>();
    n->kind = is_callable(name) ? Ast::call : Ast::cst;
    n->name = name;
    if (peek().k == Tok::lbrack) {
      eat();
      while (true) {
        n->subs.push_back(parse_ty_tokens());
        if (peek().k == Tok::comma) {
          eat();
          continue;
        }
        break;
      }
      if (peek().k != Tok::rbrack) fail(errc::parse_error, "expected ']'");
      eat();
    }
    if (n->kind == Ast::call) {
      if (peek().k != Tok::lpar)
        fail(errc::parse_error, name + " is an operator and needs argument parentheses");
      eat();
      n->kids.push_back(expr());
      while (peek().k == Tok::comma) {
        eat();
        n->kids.push_back(expr());
      }
      if (peek().k != Tok::rpar) fail(errc::parse_error, "expected ')'");
      eat();
      size_t want = name == "S''" ? 2 : 1;
      if (n->kids.size() != want)
        fail(errc::arity_mismatch, name + " takes " + std::to_string(want) + " arguments");
    }
    return n;
  }

  // Types inside subscripts reuse the term tokens; -> is absent from the term
  // lexer, so subscripts are re-lexed from the raw ident/parenthesis stream.
  const Ty* parse_ty_tokens() {
    const Ty* left = nullptr;
    if (peek().k == Tok::lpar) {
      eat();
      left = parse_ty_tokens();
      if (peek().k != Tok::rpar) fail(errc::parse_error, "type: expected ')'");
      eat();
    } else if (peek().k == Tok::ident && peek().s == "unit") {
      eat();
      left = Ty::unit();
    } else {
      fail(errc::parse_error, "type: expected 'unit' or '('");
    }
    if (peek().k == Tok::ident && peek().s == "->") {
      eat();
      return Ty::arrow(left, parse_ty_tokens());
    }
    return left;
  }

  AstPtr appseq() {
    AstPtr e = atom();
    while (peek().k == Tok::lpar || peek().k == Tok::ident) {
      auto n = std::make_shared<Ast>();
      n->kind = Ast::apply;
      n->kids = {e, atom()};
      e = n;
    }
    return e;
  }

  AstPtr expr() {
    AstPtr e = appseq();
    while (peek().k == Tok::plus) {
      if (!prob) fail(errc::parse_error, "choice is only available in the probabilistic calculus");
      eat();
      auto n = std::make_shared<Ast>();
      n->kind = Ast::pick;
      n->kids = {e, appseq()};
      e = n;
    }
    return e;
  }
};

inline int infer(const AstPtr& n, TyInfer& ti) {
  switch (n->kind) {
    case Ast::cst:
      if (n->name == "e") {
        n->ty = ti.unit_n();
      } else if (n->name == "I") {
        int a = ti.fresh();
        n->params = {a};
        n->ty = ti.arrow_n(a, a);
      } else if (n->name == "K") {
        int a = ti.fresh(), b = ti.fresh();
        n->params = {a, b};
        n->ty = ti.arrow_n(a, ti.arrow_n(b, a));
      } else {  // S
        int a = ti.fresh(), b = ti.fresh(), c = ti.fresh();
        n->params = {a, b, c};
        n->ty = ti.arrow_n(ti.arrow_n(a, ti.arrow_n(b, c)),
                           ti.arrow_n(ti.arrow_n(a, b), ti.arrow_n(a, c)));
      }
      break;
    case Ast::call: {
      if (n->name == "S'") {
        int a = ti.fresh(), b = ti.fresh(), c = ti.fresh();
        n->params = {a, b, c};
        ti.unify(infer(n->kids[0], ti), ti.arrow_n(a, ti.arrow_n(b, c)));
        n->ty = ti.arrow_n(ti.arrow_n(a, b), ti.arrow_n(a, c));
      } else if (n->name == "K'") {
        int a = ti.fresh(), b = ti.fresh();
        n->params = {a, b};
        ti.unify(infer(n->kids[0], ti), a);
        n->ty = ti.arrow_n(b, a);
      } else {  // S''
        int a = ti.fresh(), b = ti.fresh(), c = ti.fresh();
        n->params = {a, b, c};
        ti.unify(infer(n->kids[0], ti), ti.arrow_n(a, ti.arrow_n(b, c)));
        ti.unify(infer(n->kids[1], ti), ti.arrow_n(a, b));
        n->ty = ti.arrow_n(a, c);
      }
      break;
    }
    case Ast::apply: {
      int tf = infer(n->kids[0], ti);
      int tx = infer(n->kids[1], ti);
      int r = ti.fresh();
      ti.unify(tf, ti.arrow_n(tx, r));
      n->params = {tx, r};
      n->ty = r;
      break;
    }
    case Ast::pick: {
      int t = infer(n->kids[0], ti);
      ti.unify(t, infer(n->kids[1], ti));
      n->params = {t};
      n->ty = t;
      break;
    }
  }
  if (!n->subs.empty()) {
    if (n->subs.size() > n->params.size())
      fail(errc::parse_error, "too many type subscripts on " +
                                  (n->name.empty() ? std::string("an application") : n->name));
    for (size_t i = 0; i < n->subs.size(); ++i) ti.unify(n->params[i], ti.of_ty(n->subs[i]));
  }
  return n->ty;
}

inline Term build(const AstPtr& n, TyInfer& ti, const TclSig& sig) {
  std::vector<const Ty*> p;
  for (int x : n->params) p.push_back(ti.resolve(x));
  std::string family;
  switch (n->kind) {
    case Ast::cst:
    case Ast::call: family = n->name; break;
    case Ast::apply: family = "app"; break;
    case Ast::pick: family = "choice"; break;
  }
  std::vector<Term> kids;
  for (const AstPtr& k : n->kids) kids.push_back(build(k, ti, sig));
  return make_term(sig.instance_ty(family, p), std::move(kids));
}

}  // namespace detail_surface

// ---------------------------------------------------------------------------
// Enumeration producers. Operators whose instance is not determined by the
// target type (application domains, the middle type of S'') range over a
// small fixed universe of types plus the components of the target.

inline std::vector<const Ty*> small_types() {
  const Ty* u = Ty::unit();
  return {u, Ty::arrow(u, u), Ty::arrow(u, Ty::arrow(u, u)), Ty::arrow(Ty::arrow(u, u), u)};
}

inline std::vector<const Ty*> type_universe(const Ty* target) {
  std::vector<const Ty*> out = small_types();
  auto push = [&](const Ty* t) {
    for (const Ty* x : out)
      if (x == t) return;
    out.push_back(t);
  };
  push(target);
  if (!target->is_unit()) {
    push(target->from);
    push(target->to);
  }
  return out;
}

inline std::vector<const OperatorDecl*> producers_at(const TclSig& sig, const Ty* t) {
  std::vector<const OperatorDecl*> out;
  auto inst = [&](const std::string& f, std::vector<const Ty*> p) {
    out.push_back(sig.instance_ty(f, std::move(p)));
  };
  if (t->is_unit()) inst("e", {});
  if (!t->is_unit()) {
    const Ty* l = t->from;
    const Ty* r = t->to;
    if (l == r) inst("I", {l});
    if (!r->is_unit() && r->to == l) inst("K", {l, r->from});
    if (!l->is_unit() && !l->to->is_unit() && !r->is_unit() && !r->from->is_unit() &&
        !r->to->is_unit() && r->from->from == l->from && r->to->from == l->from &&
        r->from->to == l->to->from && r->to->to == l->to->to)
      inst("S", {l->from, l->to->from, l->to->to});
    if (!l->is_unit() && !r->is_unit() && l->from == r->from)
      inst("S'", {l->from, l->to, r->to});
    inst("K'", {r, l});
    for (const Ty* b : type_universe(t)) inst("S''", {l, b, r});
  }
  for (const Ty* a : type_universe(t)) inst("app", {a, t});
  if (sig.prob) inst("choice", {t});
  return out;
}

// ---------------------------------------------------------------------------
// The language bundle: signature, law, surface parser/printer, producers.

struct TypedLang {
  bool prob;
  std::shared_ptr<TclSig> sig;
  std::shared_ptr<HoGsosLaw> law;

  explicit TypedLang(bool probabilistic, const ParsedTable* table = nullptr)
      : prob(probabilistic), sig(std::make_shared<TclSig>()) {
    sig->prob = prob;
    HoGsosLaw::Hooks h;
    std::shared_ptr<TclSig> s = sig;
    h.instance = [s](const std::string& family, const std::vector<std::string>& params) {
      return s->instance(family, params);
    };
    h.resolve_by_args = [s](const std::string& family,
                            const std::vector<Sort>& args) -> const OperatorDecl* {
      if (family == "app" && args.size() == 2) {
        const Ty* f = ty_of_sort(args[0]);
        if (f->is_unit() || f->from->sort() != args[1]) return nullptr;
        return s->instance_ty("app", {f->from, f->to});
      }
      return nullptr;
    };
    h.fun_arg_sort = [](const Sort& x) {
      const Ty* t = ty_of_sort(x);
      if (t->is_unit()) fail(errc::sort_mismatch, "unit-sorted terms are not functions");
      return t->from->sort();
    };
    h.fun_result_sort = [](const Sort& x) {
      const Ty* t = ty_of_sort(x);
      if (t->is_unit()) fail(errc::sort_mismatch, "unit-sorted terms are not functions");
      return t->to->sort();
    };
    law = assemble_law(table ? *table : parse_rule_table(prob ? xptcl_table() : xtcl_table()),
                       sig->sig, std::move(h));
  }

  Term parse(const std::string& text) const {
    std::vector<detail_surface::Tok> toks = detail_surface::lex(text);
    detail_surface::Parser p{toks, 0, prob};
    detail_surface::AstPtr ast = p.expr();
    if (p.peek().k != detail_surface::Tok::end) fail(errc::parse_error, "trailing input");
    TyInfer ti;
    detail_surface::infer(ast, ti);
    return detail_surface::build(ast, ti, *sig);
  }

  const Ty* typecheck(const std::string& text) const { return ty_of_sort(parse(text)->sort()); }

  // Minimal-parentheses surface form; type subscripts are omitted (re-parsing
  // may default ambiguous subscripts to unit).
  static void print_at(std::ostream& os, const Term& t, int min_level) {
    const std::string& f = t->op()->family;
    int level = f == "app" ? 1 : f == "choice" ? 0 : 2;
    bool paren = level < min_level;
    if (paren) os << "(";
    if (f == "app") {
      print_at(os, t->kids()[0], 1);
      os << " ";
      print_at(os, t->kids()[1], 2);
    } else if (f == "choice") {
      print_at(os, t->kids()[0], 0);
      os << " + ";
      print_at(os, t->kids()[1], 1);
    } else {
      os << f;
      if (!t->kids().empty()) {
        os << "(";
        for (size_t i = 0; i < t->kids().size(); ++i) {
          if (i) os << ", ";
          print_at(os, t->kids()[i], 0);
        }
        os << ")";
      }
    }
    if (paren) os << ")";
  }

  std::string print(const Term& t) const {
    std::ostringstream os;
    print_at(os, t, 0);
    return os.str();
  }

  ProducerFn producers() const {
    std::shared_ptr<TclSig> s = sig;
    return [s](const Sort& sort) { return producers_at(*s, ty_of_sort(sort)); };
  }

  // All closed terms of the type with size <= size, smallest first.
  std::vector<Term> probes_for_type(const Ty* t, int size) const {
    std::vector<Term> out = enumerate_terms(producers(), t->sort(), size);
    if (out.empty())
      fail(errc::uninhabited_at_size,
           "no closed term of type " + t->text + " up to size " + std::to_string(size));
    return out;
  }
};

}  // namespace tcl
}  // namespace hogsos
