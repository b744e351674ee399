#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hogsos/denotation.hpp"
#include "hogsos/lang/lambda.hpp"
#include "hogsos/lang/xcl.hpp"
#include "hogsos/lang/xtcl.hpp"

namespace hogsos {

// Uniform handle over the shipped calculi, for the CLI and the harness.
// `term_probes(size, roots)` builds pools large enough to observe the given
// root terms: the typed languages close the root types under domain/codomain,
// the lambda-calculus raises the context ceiling to cover the roots.
struct Language {
  std::string name;
  bool typed = false;
  bool open_terms = false;
  std::shared_ptr<HoGsosLaw> law;
  std::vector<Sort> sample_sorts;
  ProducerFn producers;

  std::function<Term(const std::string&, const std::vector<std::string>&)> parse_impl;
  std::function<std::string(const Term&)> print;
  std::function<TermProbes(int, const std::vector<Term>&)> term_probes;

  std::shared_ptr<void> keep;  // owns the concrete language object

  Term parse(const std::string& text) const { return parse_impl(text, {}); }
  Term parse_open(const std::string& text, const std::vector<std::string>& free_names) const {
    return parse_impl(text, free_names);
  }
};

inline std::vector<std::string> language_names() {
  return {"xtcl", "xptcl", "xcl", "xnccl", "lambda"};
}

// Closed-term pools for every type reachable from the small universe plus the
// given extras via domain/codomain; that is exactly the set of sorts probing
// can encounter starting from those roots (reducts preserve the sort).
inline TermProbes typed_term_probes(const tcl::TypedLang& lang, int size,
                                    const std::vector<const tcl::Ty*>& extras = {}) {
  std::vector<const tcl::Ty*> todo = tcl::small_types();
  for (const tcl::Ty* t : extras)
    if (std::find(todo.begin(), todo.end(), t) == todo.end()) todo.push_back(t);
  TermProbes p;
  for (size_t i = 0; i < todo.size(); ++i) {
    const tcl::Ty* t = todo[i];
    if (!t->is_unit()) {
      for (const tcl::Ty* c : {t->from, t->to})
        if (std::find(todo.begin(), todo.end(), c) == todo.end()) todo.push_back(c);
    }
    p.pool[t->sort()] = enumerate_terms(lang.producers(), t->sort(), size);
  }
  return p;
}

inline Language make_language(const std::string& name, const ParsedTable* table = nullptr) {
  Language L;
  L.name = name;
  if (name == "xtcl" || name == "xptcl") {
    auto impl = std::make_shared<tcl::TypedLang>(name == "xptcl", table);
    L.typed = true;
    L.law = impl->law;
    L.keep = impl;
    L.producers = impl->producers();
    for (const tcl::Ty* t : tcl::small_types()) L.sample_sorts.push_back(t->sort());
    L.parse_impl = [impl](const std::string& s, const std::vector<std::string>& free) {
      if (!free.empty())
        fail(errc::unsupported, "free variables are only meaningful in the lambda-calculus");
      return impl->parse(s);
    };
    L.print = [impl](const Term& t) { return impl->print(t); };
    L.term_probes = [impl](int size, const std::vector<Term>& roots) {
      std::vector<const tcl::Ty*> extras;
      for (const Term& r : roots) extras.push_back(tcl::ty_of_sort(r->sort()));
      return typed_term_probes(*impl, size, extras);
    };
  } else if (name == "xcl" || name == "xnccl") {
    auto impl = std::make_shared<cl::UntypedLang>(name == "xnccl", table);
    L.law = impl->law;
    L.keep = impl;
    L.producers = impl->producers();
    L.sample_sorts = {cl::tm_sort()};
    L.parse_impl = [impl](const std::string& s, const std::vector<std::string>& free) {
      if (!free.empty())
        fail(errc::unsupported, "free variables are only meaningful in the lambda-calculus");
      return impl->parse(s);
    };
    L.print = [impl](const Term& t) { return impl->print(t); };
    L.term_probes = [impl](int size, const std::vector<Term>&) {
      TermProbes p;
      p.pool[cl::tm_sort()] = impl->probes(size);
      return p;
    };
  } else if (name == "lambda") {
    auto impl = std::make_shared<lam::LambdaLang>(table);
    L.open_terms = true;
    L.law = impl->law;
    L.keep = impl;
    L.producers = impl->producers();
    L.sample_sorts = {lam::ctx_sort(0), lam::ctx_sort(1)};
    L.parse_impl = [impl](const std::string& s, const std::vector<std::string>& free) {
      return impl->parse_open(s, free);
    };
    L.print = [impl](const Term& t) { return impl->print(t); };
    L.term_probes = [impl](int size, const std::vector<Term>& roots) {
      int max_ctx = 2;
      for (const Term& r : roots) max_ctx = std::max(max_ctx, lam::ctx_of(r->sort()));
      return impl->term_probes(size, max_ctx);
    };
  } else {
    fail(errc::config_error,
         "unknown language '" + name + "' (expected xtcl, xptcl, xcl, xnccl or lambda)");
  }
  return L;
}

// Denotes every term probe once, giving the observation side the matching
// contravariant data.
inline ProbeSet denote_probes(DenotationalModel& model, const TermProbes& tp) {
  ProbeSet ps;
  for (const auto& [s, pool] : tp.pool) {
    std::vector<Denotation>& out = ps.pool[s];
    out.reserve(pool.size());
    for (const Term& t : pool) out.push_back(model.denote(t));
  }
  for (const auto& [s, envs] : tp.envs) {
    auto& out = ps.envs[s];
    for (const auto& [env, target] : envs) {
      std::vector<Denotation> de;
      de.reserve(env.size());
      for (const Term& t : env) de.push_back(model.denote(t));
      out.emplace_back(std::move(de), target);
    }
  }
  return ps;
}

}  // namespace hogsos
