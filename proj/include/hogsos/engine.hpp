#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "hogsos/rules.hpp"

namespace hogsos {

// ---------------------------------------------------------------------------
// A carrier interprets conclusion expressions in some domain A: syntactic
// terms for the operational model, denotations for the denotational one.

template <typename A>
struct Carrier {
  std::function<A(const OperatorDecl*, std::vector<A>)> mk;
  std::function<A(const Term&)> embed;
  std::function<Sort(const A&)> sort_of;
  std::function<A(const A&)> weaken;  // one context up; binder languages only
  std::function<bool(const A&, const A&)> less;
};

namespace detail {

template <typename A>
struct EvalCtx {
  const HoGsosLaw* law;
  const std::vector<A>* kids;
  const std::vector<Behavior<A>>* bhs;
  const Carrier<A>* car;
  const A* probe = nullptr;
  const std::vector<A>* env = nullptr;
  Sort env_target;
  const std::map<int, A>* reduct_binding = nullptr;
};

template <typename A>
A eval_cexpr(const CExprPtr& e, const EvalCtx<A>& ctx) {
  switch (e->kind) {
    case CKind::arg:
      return ctx.kids->at(e->index);
    case CKind::reduct_of: {
      if (ctx.reduct_binding) {
        auto it = ctx.reduct_binding->find(e->index);
        if (it != ctx.reduct_binding->end()) return it->second;
      }
      const Behavior<A>& b = ctx.bhs->at(e->index);
      if (b.tag != StepTag::reduct || b.bag.effect != Effect::deterministic ||
          b.bag.items.size() != 1)
        fail(errc::rule_table_invalid,
             "reduct of argument " + std::to_string(e->index) +
                 " used where a single deterministic reduct is required");
      return b.bag.items.front().second;
    }
    case CKind::apply_fun: {
      const Behavior<A>& b = ctx.bhs->at(e->index);
      if (b.tag != StepTag::function || !b.fun)
        fail(errc::no_rule_applies,
             "argument " + std::to_string(e->index) + " is not a function node");
      return b.fun(eval_cexpr(e->kids.front(), ctx));
    }
    case CKind::subst_of: {
      const Behavior<A>& b = ctx.bhs->at(e->index);
      if (!b.subst)
        fail(errc::rule_table_invalid,
             "argument " + std::to_string(e->index) + " has no substitution observable");
      std::vector<A> entries;
      Sort target;
      switch (e->env_kind) {
        case EnvKind::explicit_list: {
          for (const CExprPtr& k : e->kids) entries.push_back(eval_cexpr(k, ctx));
          if (!entries.empty())
            target = ctx.car->sort_of(entries.front());
          else if (ctx.law->hooks.ctx_sort)
            target = ctx.law->hooks.ctx_sort(0);
          break;
        }
        case EnvKind::formal: {
          if (!ctx.env) fail(errc::env_length_mismatch, "no formal environment in scope");
          return b.subst(*ctx.env, ctx.env_target);
        }
        case EnvKind::formal_extended: {
          if (!ctx.env) fail(errc::env_length_mismatch, "no formal environment in scope");
          int l = ctx.law->hooks.ctx_of(ctx.env_target);
          if (l < 0) fail(errc::sort_mismatch, "environment target is not a context sort");
          for (const A& a : *ctx.env) entries.push_back(ctx.car->weaken(a));
          entries.push_back(ctx.car->embed(ctx.law->hooks.var_atom(l + 1, l)));
          target = ctx.law->hooks.ctx_sort(l + 1);
          break;
        }
        case EnvKind::idents_probe:
          fail(errc::rule_table_invalid, "identity environment survived instantiation");
      }
      return b.subst(entries, target);
    }
    case CKind::op: {
      std::vector<A> kids;
      kids.reserve(e->kids.size());
      for (const CExprPtr& k : e->kids) kids.push_back(eval_cexpr(k, ctx));
      const OperatorDecl* d = e->decl;
      if (!d) {
        std::vector<Sort> sorts;
        for (const A& a : kids) sorts.push_back(ctx.car->sort_of(a));
        d = ctx.law->hooks.resolve_by_args(e->family, sorts);
        if (!d)
          fail(errc::sort_mismatch, "cannot resolve operator family '" + e->family + "'");
      }
      return ctx.car->mk(d, std::move(kids));
    }
    case CKind::bound_probe:
      if (!ctx.probe) fail(errc::rule_table_invalid, "probe used outside a function body");
      return *ctx.probe;
    case CKind::env_at: {
      if (!ctx.env) fail(errc::env_length_mismatch, "no formal environment in scope");
      if (e->index < 0 || e->index >= static_cast<int>(ctx.env->size()))
        fail(errc::env_length_mismatch,
             "environment has " + std::to_string(ctx.env->size()) + " entries, index " +
                 std::to_string(e->index));
      return ctx.env->at(e->index);
    }
    case CKind::term_leaf:
      return ctx.car->embed(e->leaf);
  }
  fail(errc::rule_table_invalid, "unreachable conclusion expression");
}

template <typename A>
void collect_bag_refs(const CExprPtr& e, std::set<int>& out, const std::vector<Behavior<A>>& bhs) {
  if (e->kind == CKind::reduct_of) {
    const Behavior<A>& b = bhs.at(e->index);
    if (b.tag == StepTag::reduct &&
        (b.bag.effect != Effect::deterministic || b.bag.items.size() != 1))
      out.insert(e->index);
  }
  for (const CExprPtr& k : e->kids) collect_bag_refs(k, out, bhs);
}

}  // namespace detail

// Interpret a matched rule's conclusion for children `kids` whose one-step
// behaviors are `bhs`. Reduct conclusions expand `reduct_of` references over
// the children's whole effect bags (cartesian across distinct children,
// weights multiplied); function and substitution conclusions are packaged as
// closures so their bodies are only evaluated when probed.

template <typename A>
Behavior<A> instantiate_rule(const HoGsosLaw& law, const Rule& rule, std::vector<A> kids,
                             std::vector<Behavior<A>> bhs, Carrier<A> car) {
  auto kids_p = std::make_shared<const std::vector<A>>(std::move(kids));
  auto bhs_p = std::make_shared<const std::vector<Behavior<A>>>(std::move(bhs));
  auto car_p = std::make_shared<const Carrier<A>>(std::move(car));
  const HoGsosLaw* law_p = &law;

  auto base_ctx = [=]() {
    detail::EvalCtx<A> ctx;
    ctx.law = law_p;
    ctx.kids = kids_p.get();
    ctx.bhs = bhs_p.get();
    ctx.car = car_p.get();
    return ctx;
  };

  Behavior<A> out;
  switch (rule.ctag) {
    case StepTag::terminal:
      out = Behavior<A>::terminal();
      break;
    case StepTag::reduct: {
      std::vector<std::pair<Rational, A>> items;
      for (const auto& [w, expr] : rule.bag) {
        std::set<int> refs;
        detail::collect_bag_refs(expr, refs, *bhs_p);
        std::vector<int> ref_list(refs.begin(), refs.end());
        std::map<int, A> binding;
        std::function<void(size_t, const Rational&)> expand = [&](size_t k, const Rational& acc) {
          if (k == ref_list.size()) {
            detail::EvalCtx<A> ctx = base_ctx();
            ctx.reduct_binding = &binding;
            items.emplace_back(acc, detail::eval_cexpr(expr, ctx));
            return;
          }
          int i = ref_list[k];
          for (const auto& [wi, yi] : bhs_p->at(i).bag.items) {
            binding.insert_or_assign(i, yi);
            expand(k + 1, acc * wi);
            binding.erase(i);
          }
        };
        expand(0, w);
      }
      switch (law.effect) {
        case Effect::deterministic:
          if (items.size() != 1)
            fail(errc::rule_table_invalid, "deterministic conclusion produced " +
                                               std::to_string(items.size()) + " reducts");
          out = Behavior<A>::reduct(make_deterministic<A>(std::move(items.front().second)));
          break;
        case Effect::distribution:
          out = Behavior<A>::reduct(make_distribution<A>(std::move(items), car_p->less));
          break;
        case Effect::powerset: {
          std::vector<A> elems;
          elems.reserve(items.size());
          for (auto& [w, a] : items) elems.push_back(std::move(a));
          out = Behavior<A>::reduct(make_powerset<A>(std::move(elems), car_p->less));
          break;
        }
      }
      break;
    }
    case StepTag::function: {
      CExprPtr body = rule.fun;
      out = Behavior<A>::function([=](const A& probe) {
        detail::EvalCtx<A> ctx = base_ctx();
        ctx.probe = &probe;
        return detail::eval_cexpr(body, ctx);
      });
      break;
    }
  }
  if (rule.nu) {
    CExprPtr body = rule.nu;
    out.subst = [=](const std::vector<A>& env, const Sort& target) {
      detail::EvalCtx<A> ctx = base_ctx();
      ctx.env = &env;
      ctx.env_target = target;
      return detail::eval_cexpr(body, ctx);
    };
  }
  return out;
}

template <typename A>
std::vector<StepTag> child_tags(const std::vector<Behavior<A>>& bhs) {
  std::vector<StepTag> tags;
  tags.reserve(bhs.size());
  for (const Behavior<A>& b : bhs) tags.push_back(b.tag);
  return tags;
}

// ---------------------------------------------------------------------------
// The operational model: the unique coalgebra on closed terms obtained by
// primitive recursion over the law. Memoized per term (terms are interned, so
// pointer identity is structural identity).

inline Carrier<Term> term_carrier(const HoGsosLaw& law) {
  Carrier<Term> c;
  c.mk = [](const OperatorDecl* d, std::vector<Term> kids) {
    return make_term(d, std::move(kids));
  };
  c.embed = [](const Term& t) { return t; };
  c.sort_of = [](const Term& t) { return t->sort(); };
  if (law.hooks.weaken_term)
    c.weaken = law.hooks.weaken_term;
  else
    c.weaken = [](const Term& t) { return t; };
  c.less = term_less;
  return c;
}

class OperationalModel {
 public:
  explicit OperationalModel(const HoGsosLaw& law) : law_(law), car_(term_carrier(law)) {}

  const HoGsosLaw& law() const { return law_; }

  Behavior<Term> operator()(const Term& t) {
    {
      std::lock_guard<std::mutex> lock(m_);
      auto it = memo_.find(t.get());
      if (it != memo_.end()) return it->second;
    }
    std::vector<Term> kids(t->kids());
    std::vector<Behavior<Term>> bhs;
    bhs.reserve(kids.size());
    for (const Term& k : kids) bhs.push_back((*this)(k));
    const Rule& r = law_.require_match(t->op(), child_tags(bhs));
    Behavior<Term> b = instantiate_rule(law_, r, std::move(kids), std::move(bhs), car_);
    std::lock_guard<std::mutex> lock(m_);
    return memo_.emplace(t.get(), std::move(b)).first->second;
  }

 private:
  const HoGsosLaw& law_;
  Carrier<Term> car_;
  std::mutex m_;
  std::unordered_map<const TermNode*, Behavior<Term>> memo_;
};

// ---------------------------------------------------------------------------
// Reduction traces. Deterministic reducts are followed; a branching bag stops
// the trace (the CLI offers enumeration or seeded sampling on top of this).

enum class TraceStop { terminal, value, branch, fuel };

struct TraceEntry {
  Term term;
  bool steps;  // an unlabelled step leaves this configuration
};

struct Trace {
  std::vector<TraceEntry> entries;
  TraceStop stop = TraceStop::terminal;
};

inline Trace run_trace(OperationalModel& model, Term t, int fuel) {
  Trace tr;
  for (int used = 0;; ++used) {
    Behavior<Term> b = model(t);
    if (b.tag == StepTag::terminal) {
      tr.entries.push_back({t, false});
      tr.stop = TraceStop::terminal;
      return tr;
    }
    if (b.tag == StepTag::function) {
      tr.entries.push_back({t, false});
      tr.stop = TraceStop::value;
      return tr;
    }
    if (b.bag.items.size() != 1) {
      tr.entries.push_back({t, false});
      tr.stop = TraceStop::branch;
      return tr;
    }
    if (used >= fuel) {
      tr.entries.push_back({t, false});
      tr.stop = TraceStop::fuel;
      return tr;
    }
    tr.entries.push_back({t, true});
    t = b.bag.items.front().second;
  }
}

// ---------------------------------------------------------------------------
// Behavior comparison on terms (structural states, functions compared on a
// supplied probe pool) and the bialgebra pentagon: applying the model to an
// operator application must agree with one rule step over the children's
// behaviors. Both legs run through the engine, so this is an internal
// consistency check; independent per-language oracles live in the test suite.

struct TermProbes {
  std::map<Sort, std::vector<Term>> pool;
  std::map<Sort, std::vector<std::pair<std::vector<Term>, Sort>>> envs;

  const std::vector<Term>& pool_for(const Sort& s) const {
    static const std::vector<Term> none;
    auto it = pool.find(s);
    return it == pool.end() ? none : it->second;
  }
  const std::vector<std::pair<std::vector<Term>, Sort>>& envs_for(const Sort& s) const {
    static const std::vector<std::pair<std::vector<Term>, Sort>> none;
    auto it = envs.find(s);
    return it == envs.end() ? none : it->second;
  }
};

inline bool behavior_equal(const HoGsosLaw& law, const Behavior<Term>& a,
                           const Behavior<Term>& b, const Sort& sort, const TermProbes& probes,
                           std::string* why = nullptr) {
  auto explain = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (a.tag != b.tag)
    return explain(std::string("tag ") + step_tag_name(a.tag) + " vs " + step_tag_name(b.tag));
  if (a.tag == StepTag::reduct &&
      !effect_equal(a.bag, b.bag, [](const Term& x, const Term& y) { return term_eq(x, y); }))
    return explain("reduct bags differ");
  if (a.tag == StepTag::function) {
    for (const Term& p : probes.pool_for(law.hooks.fun_arg_sort(sort)))
      if (!term_eq(a.fun(p), b.fun(p)))
        return explain("function nodes differ on probe " + term_debug(p));
  }
  if (a.has_subst() != b.has_subst()) return explain("substitution observable mismatch");
  if (a.has_subst()) {
    for (const auto& [env, target] : probes.envs_for(sort))
      if (!term_eq(a.subst(env, target), b.subst(env, target)))
        return explain("substitution observables differ");
  }
  return true;
}

struct PentagonViolation {
  Term term;
  std::string detail;
};

// `model` supplies the coalgebra leg; `law` supplies the rule step. Feeding a
// model built from a different law is how the mutation tests demonstrate the
// check has teeth.
inline std::vector<PentagonViolation> check_bialgebra_law(const HoGsosLaw& law,
                                                          OperationalModel& model,
                                                          const std::vector<Term>& samples,
                                                          const TermProbes& probes) {
  std::vector<PentagonViolation> out;
  Carrier<Term> car = term_carrier(law);
  for (const Term& t : samples) {
    if (t->kids().empty()) continue;  // constants: both legs are the same rule application
    Behavior<Term> lhs = model(t);
    std::vector<Behavior<Term>> bhs;
    for (const Term& k : t->kids()) bhs.push_back(model(k));
    const Rule* r = law.match(t->op(), child_tags(bhs));
    if (!r) {
      out.push_back({t, "no rule applies"});
      continue;
    }
    Behavior<Term> rhs = instantiate_rule(law, *r, t->kids(), std::move(bhs), car);
    std::string why;
    if (!behavior_equal(law, lhs, rhs, t->sort(), probes, &why)) out.push_back({t, why});
  }
  return out;
}

}  // namespace hogsos
