#pragma once

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "hogsos/engine.hpp"
#include "hogsos/rules_io.hpp"

namespace hogsos {
namespace cl {

// Untyped combinatory calculi over a single sort. The deterministic calculus
// has the classic combinators plus application; the nondeterministic variant
// adds binary choice and communication-free parallel composition, with
// powerset-valued steps.

inline Sort tm_sort() { return Sort("tm"); }

inline const char* xcl_table() {
  return
      "lang xcl\n"
      "effect det\n"
      "\n"
      "rank I 1\n"
      "rank K 1\n"
      "rank K' 1\n"
      "rank S 1\n"
      "rank S' 1\n"
      "rank S'' 1\n"
      "rank app 0\n"
      "\n"
      "rule S |- fun t -> S'(t)\n"
      "rule S'(x) |- fun t -> S''(x, t)\n"
      "rule S''(x, y) |- fun t -> x t (y t)\n"
      "rule K |- fun t -> K'(t)\n"
      "rule K'(x) |- fun t -> x\n"
      "rule I |- fun t -> t\n"
      "rule app(x, y) [x -> x'] |- red x' y\n"
      "rule app(x, y) [x => g] |- red g(y)\n";
}

inline const char* xnccl_table() {
  return
      "lang xnccl\n"
      "effect pow\n"
      "\n"
      "rank I 1\n"
      "rank K 1\n"
      "rank K' 1\n"
      "rank S 1\n"
      "rank S' 1\n"
      "rank S'' 1\n"
      "rank app 0\n"
      "rank choice 1\n"
      "rank par 1\n"
      "\n"
      "rule S |- fun t -> S'(t)\n"
      "rule S'(x) |- fun t -> S''(x, t)\n"
      "rule S''(x, y) |- fun t -> x t (y t)\n"
      "rule K |- fun t -> K'(t)\n"
      "rule K'(x) |- fun t -> x\n"
      "rule I |- fun t -> t\n"
      "rule app(x, y) [x -> x'] |- red {x' y}\n"
      "rule app(x, y) [x => g] |- red {g(y)}\n"
      "rule choice(x, y) |- red {x, y}\n"
      "rule par(x, y) [x -> x', y -> y'] |- red {x' || y'}\n"
      "rule par(x, y) [x => f, y -> y'] |- red {x || y'}\n"
      "rule par(x, y) [x -> x', y => g] |- red {x' || y}\n"
      "rule par(x, y) [x => f, y => g] |- fun t -> x t || y t\n";
}

struct ClSig {
  std::shared_ptr<Signature> sig = std::make_shared<Signature>();
  bool nondet = false;

  const OperatorDecl* instance(const std::string& family) const {
    int arity;
    if (family == "S" || family == "K" || family == "I") {
      arity = 0;
    } else if (family == "S'" || family == "K'") {
      arity = 1;
    } else if (family == "S''" || family == "app") {
      arity = 2;
    } else if (nondet && (family == "choice" || family == "par")) {
      arity = 2;
    } else {
      fail(errc::sort_mismatch, "unknown operator family '" + family + "'");
    }
    OperatorDecl d;
    d.name = family;
    d.family = family;
    d.arg_sorts.assign(arity, tm_sort());
    d.result_sort = tm_sort();
    d.rank = family == "app" ? 0 : 1;
    return sig->add(std::move(d));
  }
};

namespace detail_cl {

struct Tok {
  enum K { ident, lpar, rpar, comma, plus, bar, end } k;
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
    if (c == '|' && i + 1 < text.size() && text[i + 1] == '|') {
      out.push_back({Tok::bar, "||"});
      i += 2;
      continue;
    }
    switch (c) {
      case '(': out.push_back({Tok::lpar, "("}); break;
      case ')': out.push_back({Tok::rpar, ")"}); break;
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

}  // namespace detail_cl

struct UntypedLang {
  bool nondet;
  std::shared_ptr<ClSig> sig;
  std::shared_ptr<HoGsosLaw> law;

  explicit UntypedLang(bool nondeterministic, const ParsedTable* table = nullptr)
      : nondet(nondeterministic), sig(std::make_shared<ClSig>()) {
    sig->nondet = nondet;
    HoGsosLaw::Hooks h;
    std::shared_ptr<ClSig> s = sig;
    h.instance = [s](const std::string& family, const std::vector<std::string>& params) {
      if (!params.empty()) fail(errc::sort_mismatch, "operators here take no parameters");
      return s->instance(family);
    };
    h.resolve_by_args = [s](const std::string& family,
                            const std::vector<Sort>& args) -> const OperatorDecl* {
      const OperatorDecl* d = s->instance(family);
      return d->arity() == args.size() ? d : nullptr;
    };
    h.fun_arg_sort = [](const Sort&) { return tm_sort(); };
    h.fun_result_sort = [](const Sort&) { return tm_sort(); };
    law = assemble_law(table ? *table : parse_rule_table(nondet ? xnccl_table() : xcl_table()),
                       sig->sig, std::move(h), /*guarded=*/true);
  }

  // Surface grammar: juxtaposition for application (left-associative, binds
  // tightest), infix + for choice, infix || for parallel (loosest), call
  // form for S'/K'/S''.
  Term parse(const std::string& text) const {
    std::vector<detail_cl::Tok> toks = detail_cl::lex(text);
    size_t pos = 0;
    auto peek = [&]() -> const detail_cl::Tok& { return toks[pos]; };
    auto eat = [&]() -> detail_cl::Tok { return toks[pos + 1 < toks.size() ? pos++ : pos]; };

    std::function<Term()> par_expr;
    std::function<Term()> atom = [&]() -> Term {
      if (peek().k == detail_cl::Tok::lpar) {
        eat();
        Term e = par_expr();
        if (peek().k != detail_cl::Tok::rpar) fail(errc::parse_error, "expected ')'");
        eat();
        return e;
      }
      if (peek().k != detail_cl::Tok::ident) fail(errc::parse_error, "expected a term");
      std::string name = eat().s;
      bool callable = name == "S'" || name == "K'" || name == "S''";
      bool constant = name == "S" || name == "K" || name == "I";
      if (!callable && !constant) fail(errc::parse_error, "unknown operator '" + name + "'");
      if (!callable) return make_term(sig->instance(name));
      if (peek().k != detail_cl::Tok::lpar)
        fail(errc::parse_error, name + " is an operator and needs argument parentheses");
      eat();
      std::vector<Term> kids;
      kids.push_back(par_expr());
      while (peek().k == detail_cl::Tok::comma) {
        eat();
        kids.push_back(par_expr());
      }
      if (peek().k != detail_cl::Tok::rpar) fail(errc::parse_error, "expected ')'");
      eat();
      const OperatorDecl* d = sig->instance(name);
      if (kids.size() != d->arity())
        fail(errc::arity_mismatch,
             name + " takes " + std::to_string(d->arity()) + " arguments");
      return make_term(d, std::move(kids));
    };
    auto app_expr = [&]() -> Term {
      Term e = atom();
      while (peek().k == detail_cl::Tok::lpar || peek().k == detail_cl::Tok::ident)
        e = make_term(sig->instance("app"), {e, atom()});
      return e;
    };
    auto choice_expr = [&]() -> Term {
      Term e = app_expr();
      while (peek().k == detail_cl::Tok::plus) {
        if (!nondet) fail(errc::parse_error, "choice is only available in the branching calculus");
        eat();
        e = make_term(sig->instance("choice"), {e, app_expr()});
      }
      return e;
    };
    par_expr = [&]() -> Term {
      Term e = choice_expr();
      while (peek().k == detail_cl::Tok::bar) {
        if (!nondet)
          fail(errc::parse_error, "parallel is only available in the branching calculus");
        eat();
        e = make_term(sig->instance("par"), {e, choice_expr()});
      }
      return e;
    };
    Term t = par_expr();
    if (peek().k != detail_cl::Tok::end) fail(errc::parse_error, "trailing input");
    return t;
  }

  static void print_at(std::ostream& os, const Term& t, int min_level) {
    const std::string& f = t->op()->family;
    int level = f == "par" ? 0 : f == "choice" ? 1 : f == "app" ? 2 : 3;
    bool paren = level < min_level;
    if (paren) os << "(";
    if (f == "par") {
      print_at(os, t->kids()[0], 0);
      os << " || ";
      print_at(os, t->kids()[1], 1);
    } else if (f == "choice") {
      print_at(os, t->kids()[0], 1);
      os << " + ";
      print_at(os, t->kids()[1], 2);
    } else if (f == "app") {
      print_at(os, t->kids()[0], 2);
      os << " ";
      print_at(os, t->kids()[1], 3);
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
    std::shared_ptr<ClSig> s = sig;
    bool nd = nondet;
    return [s, nd](const Sort&) {
      std::vector<const OperatorDecl*> out;
      for (const char* f : {"S", "K", "I", "S'", "K'", "S''", "app"}) out.push_back(s->instance(f));
      if (nd) {
        out.push_back(s->instance("choice"));
        out.push_back(s->instance("par"));
      }
      return out;
    };
  }

  std::vector<Term> probes(int size) const { return enumerate_terms(producers(), tm_sort(), size); }
};

}  // namespace cl
}  // namespace hogsos
