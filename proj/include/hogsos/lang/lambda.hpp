#pragma once

#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hogsos/engine.hpp"
#include "hogsos/rules_io.hpp"

namespace hogsos {
namespace lam {

// Untyped lambda calculus in de Bruijn style, indexed by context size: sort
// tm@m holds terms with m free variables. Variables count binders from the
// outside in: var j in context m refers to the j-th oldest binding, and
// lam[m] binds index m. Steps are weak head reduction; variables and stuck
// applications are terminal, abstractions are function nodes; every rule
// carries an explicit substitution component.

inline Sort ctx_sort(int m) { return Sort("tm@" + std::to_string(m)); }

inline int ctx_of(const Sort& s) {
  const std::string& n = s.name();
  if (n.size() < 4 || n.compare(0, 3, "tm@") != 0) return -1;
  for (size_t i = 3; i < n.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(n[i]))) return -1;
  return std::stoi(n.substr(3));
}

inline const char* lambda_table() {
  return
      "lang lambda\n"
      "effect det\n"
      "subst on\n"
      "\n"
      "rank app 0\n"
      "rank lam 0\n"
      "rank var 0\n"
      "\n"
      "rule var[m,j] |- ! ; nu(u) -> u[j]\n"
      "rule lam[m](x) |- fun t -> x{id, t} ; nu(u) -> lam(x{u, *})\n"
      "rule app[m](x, y) [x => g] |- red g(y) ; nu(u) -> x{u} y{u}\n"
      "rule app[m](x, y) [x -> x'] |- red x' y ; nu(u) -> x{u} y{u}\n"
      "rule app[m](x, y) [x !] |- ! ; nu(u) -> x{u} y{u}\n";
}

struct LamSig {
  std::shared_ptr<Signature> sig = std::make_shared<Signature>();

  const OperatorDecl* var(int m, int j) const {
    if (j < 0 || j >= m) fail(errc::sort_mismatch, "variable index out of context");
    OperatorDecl d;
    d.family = "var";
    d.params = {std::to_string(m), std::to_string(j)};
    d.name = "var[" + d.params[0] + "," + d.params[1] + "]";
    d.result_sort = ctx_sort(m);
    d.rank = 0;
    return sig->add(std::move(d));
  }
  const OperatorDecl* lam_op(int m) const {
    OperatorDecl d;
    d.family = "lam";
    d.params = {std::to_string(m)};
    d.name = "lam[" + d.params[0] + "]";
    d.arg_sorts = {ctx_sort(m + 1)};
    d.result_sort = ctx_sort(m);
    d.rank = 0;
    return sig->add(std::move(d));
  }
  const OperatorDecl* app_op(int m) const {
    OperatorDecl d;
    d.family = "app";
    d.params = {std::to_string(m)};
    d.name = "app[" + d.params[0] + "]";
    d.arg_sorts = {ctx_sort(m), ctx_sort(m)};
    d.result_sort = ctx_sort(m);
    d.rank = 0;
    return sig->add(std::move(d));
  }

  const OperatorDecl* instance(const std::string& family,
                               const std::vector<std::string>& params) const {
    auto num = [&](size_t i) {
      for (char c : params[i])
        if (!std::isdigit(static_cast<unsigned char>(c)))
          fail(errc::sort_mismatch, "context parameters must be numerals");
      return std::stoi(params[i]);
    };
    if (family == "var" && params.size() == 2) return var(num(0), num(1));
    if (family == "lam" && params.size() == 1) return lam_op(num(0));
    if (family == "app" && params.size() == 1) return app_op(num(0));
    fail(errc::sort_mismatch, "unknown operator family '" + family + "'");
  }
};

// ---------------------------------------------------------------------------
// Structural oracles, written by direct recursion so they are independent of
// the rule-driven engine.

inline Term mk_var(const LamSig& s, int m, int j) { return make_term(s.var(m, j)); }
inline Term mk_lam(const LamSig& s, int m, const Term& body) {
  return make_term(s.lam_op(m), {body});
}
inline Term mk_app(const LamSig& s, int m, const Term& f, const Term& x) {
  return make_term(s.app_op(m), {f, x});
}

inline int ctx_param(const Term& t) { return std::stoi(t->op()->params[0]); }

// Context weakening m -> m+1 along the inclusion: the fresh variable takes
// index m, so indices below the cut (the root's free variables) are stable
// while variables bound inside the term move up with their binders.
inline Term shift_from(const LamSig& s, const Term& t, int cut) {
  const std::string& f = t->op()->family;
  int m = ctx_param(t);
  if (f == "var") {
    int j = std::stoi(t->op()->params[1]);
    return mk_var(s, m + 1, j >= cut ? j + 1 : j);
  }
  if (f == "lam") return mk_lam(s, m + 1, shift_from(s, t->kids()[0], cut));
  return mk_app(s, m + 1, shift_from(s, t->kids()[0], cut), shift_from(s, t->kids()[1], cut));
}

inline Term weaken(const LamSig& s, const Term& t) { return shift_from(s, t, ctx_param(t)); }

// Simultaneous substitution: t in context m, env of m terms in context l.
inline Term subst(const LamSig& s, const Term& t, const std::vector<Term>& env, int l) {
  const std::string& f = t->op()->family;
  int m = ctx_param(t);
  if (static_cast<size_t>(m) != env.size())
    fail(errc::env_length_mismatch, "substitution environment has wrong length");
  if (f == "var") return env[std::stoi(t->op()->params[1])];
  if (f == "app")
    return mk_app(s, l, subst(s, t->kids()[0], env, l), subst(s, t->kids()[1], env, l));
  std::vector<Term> lifted;
  lifted.reserve(env.size() + 1);
  for (const Term& e : env) lifted.push_back(weaken(s, e));
  lifted.push_back(mk_var(s, l + 1, l));
  return mk_lam(s, l, subst(s, t->kids()[0], lifted, l + 1));
}

inline std::vector<Term> identity_env(const LamSig& s, int m) {
  std::vector<Term> env;
  env.reserve(m);
  for (int j = 0; j < m; ++j) env.push_back(mk_var(s, m, j));
  return env;
}

// One step of weak head reduction; nullopt for variables, abstractions, and
// stuck applications.
inline std::optional<Term> beta_step(const LamSig& s, const Term& t) {
  if (t->op()->family != "app") return std::nullopt;
  int m = ctx_param(t);
  const Term& f = t->kids()[0];
  const Term& x = t->kids()[1];
  if (f->op()->family == "lam") {
    std::vector<Term> env = identity_env(s, m);
    env.push_back(x);
    return subst(s, f->kids()[0], env, m);
  }
  std::optional<Term> fs = beta_step(s, f);
  if (!fs) return std::nullopt;
  return mk_app(s, m, *fs, x);
}

// ---------------------------------------------------------------------------
// Surface syntax: backslash binders with names, application by
// juxtaposition. Printing renames binders canonically: the variable bound at
// context depth m is written x<m>.

namespace detail_lam {

struct Tok {
  enum K { ident, lambda, dot, lpar, rpar, end } k;
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
    switch (c) {
      case '\\': out.push_back({Tok::lambda, "\\"}); break;
      case '.': out.push_back({Tok::dot, "."}); break;
      case '(': out.push_back({Tok::lpar, "("}); break;
      case ')': out.push_back({Tok::rpar, ")"}); break;
      default:
        fail(errc::parse_error, std::string("unexpected character '") + c + "' in term");
    }
    ++i;
  }
  out.push_back({Tok::end, ""});
  return out;
}

}  // namespace detail_lam

struct LambdaLang {
  std::shared_ptr<LamSig> sig;
  std::shared_ptr<HoGsosLaw> law;

  explicit LambdaLang(const ParsedTable* table = nullptr) : sig(std::make_shared<LamSig>()) {
    HoGsosLaw::Hooks h;
    std::shared_ptr<LamSig> s = sig;
    h.instance = [s](const std::string& family, const std::vector<std::string>& params) {
      return s->instance(family, params);
    };
    h.resolve_by_args = [s](const std::string& family,
                            const std::vector<Sort>& args) -> const OperatorDecl* {
      if (family == "app" && args.size() == 2 && args[0] == args[1]) {
        int m = ctx_of(args[0]);
        return m < 0 ? nullptr : s->app_op(m);
      }
      if (family == "lam" && args.size() == 1) {
        int m = ctx_of(args[0]);
        return m < 1 ? nullptr : s->lam_op(m - 1);
      }
      return nullptr;
    };
    h.fun_arg_sort = [](const Sort& x) { return x; };
    h.fun_result_sort = [](const Sort& x) { return x; };
    h.ctx_of = [](const Sort& x) { return ctx_of(x); };
    h.ctx_sort = [](int m) { return ctx_sort(m); };
    h.var_atom = [s](int m, int j) { return mk_var(*s, m, j); };
    h.weaken_term = [s](const Term& t) { return weaken(*s, t); };
    law = assemble_law(table ? *table : parse_rule_table(lambda_table()), sig->sig, std::move(h),
                       /*guarded=*/true);
  }

  Term parse_open(const std::string& text, const std::vector<std::string>& free_names) const {
    std::vector<detail_lam::Tok> toks = detail_lam::lex(text);
    size_t pos = 0;
    auto peek = [&]() -> const detail_lam::Tok& { return toks[pos]; };
    auto eat = [&]() -> detail_lam::Tok { return toks[pos + 1 < toks.size() ? pos++ : pos]; };

    std::vector<std::string> ctx = free_names;
    std::function<Term()> expr;
    std::function<Term()> atom = [&]() -> Term {
      if (peek().k == detail_lam::Tok::lpar) {
        eat();
        Term e = expr();
        if (peek().k != detail_lam::Tok::rpar) fail(errc::parse_error, "expected ')'");
        eat();
        return e;
      }
      if (peek().k != detail_lam::Tok::ident) fail(errc::parse_error, "expected a term");
      std::string name = eat().s;
      for (int j = static_cast<int>(ctx.size()) - 1; j >= 0; --j)
        if (ctx[j] == name) return mk_var(*sig, static_cast<int>(ctx.size()), j);
      fail(errc::parse_error, "unbound variable '" + name + "'");
    };
    expr = [&]() -> Term {
      if (peek().k == detail_lam::Tok::lambda) {
        eat();
        if (peek().k != detail_lam::Tok::ident) fail(errc::parse_error, "expected a binder name");
        std::string name = eat().s;
        if (peek().k != detail_lam::Tok::dot) fail(errc::parse_error, "expected '.'");
        eat();
        int m = static_cast<int>(ctx.size());
        ctx.push_back(name);
        Term body = expr();
        ctx.pop_back();
        return mk_lam(*sig, m, body);
      }
      Term e = atom();
      while (peek().k == detail_lam::Tok::lpar || peek().k == detail_lam::Tok::ident) {
        int m = static_cast<int>(ctx.size());
        e = mk_app(*sig, m, e, atom());
      }
      return e;
    };
    Term t = expr();
    if (peek().k != detail_lam::Tok::end) fail(errc::parse_error, "trailing input");
    return t;
  }

  Term parse(const std::string& text) const { return parse_open(text, {}); }

  static void print_at(std::ostream& os, const Term& t, int min_level) {
    const std::string& f = t->op()->family;
    int level = f == "lam" ? 0 : f == "app" ? 1 : 2;
    bool paren = level < min_level;
    if (paren) os << "(";
    if (f == "var") {
      os << "x" << t->op()->params[1];
    } else if (f == "lam") {
      os << "\\x" << ctx_param(t) << ". ";
      print_at(os, t->kids()[0], 0);
    } else {
      print_at(os, t->kids()[0], 1);
      os << " ";
      print_at(os, t->kids()[1], 2);
    }
    if (paren) os << ")";
  }

  std::string print(const Term& t) const {
    std::ostringstream os;
    print_at(os, t, 0);
    return os.str();
  }

  ProducerFn producers() const {
    std::shared_ptr<LamSig> s = sig;
    return [s](const Sort& sort) {
      int m = ctx_of(sort);
      if (m < 0) fail(errc::sort_mismatch, "not a context sort: " + sort.name());
      std::vector<const OperatorDecl*> out;
      for (int j = 0; j < m; ++j) out.push_back(s->var(m, j));
      out.push_back(s->lam_op(m));
      out.push_back(s->app_op(m));
      return out;
    };
  }

  // Probe pools for contexts 0..max_ctx and substitution environments per
  // context: the identity environment plus closing environments built from
  // small closed terms.
  TermProbes term_probes(int size, int max_ctx = 2) const {
    TermProbes p;
    std::vector<Term> closed = enumerate_terms(producers(), ctx_sort(0), std::max(size, 3));
    for (int m = 0; m <= max_ctx; ++m) {
      Sort s = ctx_sort(m);
      p.pool[s] = enumerate_terms(producers(), s, size);
      std::vector<std::pair<std::vector<Term>, Sort>> envs;
      envs.emplace_back(identity_env(*sig, m), s);
      for (int variant = 0; variant < 2 && m > 0 && !closed.empty(); ++variant) {
        std::vector<Term> env;
        env.reserve(m);
        for (int j = 0; j < m; ++j) env.push_back(closed[(j + variant) % closed.size()]);
        envs.emplace_back(std::move(env), ctx_sort(0));
      }
      p.envs[s] = std::move(envs);
    }
    return p;
  }
};

}  // namespace lam
}  // namespace hogsos
