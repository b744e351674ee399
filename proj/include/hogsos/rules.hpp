#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hogsos/behavior.hpp"
#include "hogsos/kernel.hpp"

namespace hogsos {

// ---------------------------------------------------------------------------
// Conclusion expressions. Rules are data: a pattern (operator family plus a
// required step tag per argument) and a conclusion built from this grammar.
// Schemas carry positional indices; metavariable names are kept only for
// printing. Operator references inside conclusions are resolved per concrete
// operator instance, either through the family's parameter binding or, when
// no parameters are given, from the argument sorts.

enum class CKind {
  arg,          // child i itself
  reduct_of,    // the reduct(s) of child i; ranges over the whole effect bag
  apply_fun,    // child i's function node applied to kids[0]
  subst_of,     // child i's substitution observable applied to an environment
  op,           // operator application over kids
  bound_probe,  // formal argument of a function-node conclusion
  env_at,       // entry of the formal environment (nu clauses)
  term_leaf,    // a fixed term (identity-environment variable atoms)
};

enum class EnvKind {
  explicit_list,    // kids are the entries
  formal,           // pass the formal environment through
  formal_extended,  // weaken every entry one context up, append a fresh variable
  idents_probe,     // identity variables of the host context, then kids (the probe)
};

struct CExpr;
using CExprPtr = std::shared_ptr<const CExpr>;

struct CExpr {
  CKind kind;
  int index = -1;                        // arg/reduct_of/apply_fun/subst_of: child; env_at: entry
  std::string index_param;               // env_at: schematic index (family parameter name)
  std::string family;                    // op: family name
  std::vector<std::string> op_params;    // op: schematic parameter names (empty = by-args)
  const OperatorDecl* decl = nullptr;    // op: resolved instance (instantiated rules)
  std::vector<CExprPtr> kids;            // op args / apply_fun argument / explicit env entries
  EnvKind env_kind = EnvKind::explicit_list;
  Term leaf;                             // term_leaf

  static CExprPtr mk_arg(int i) { return mk(CKind::arg, i); }
  static CExprPtr mk_reduct(int i) { return mk(CKind::reduct_of, i); }
  static CExprPtr mk_probe() { return mk(CKind::bound_probe, -1); }
  static CExprPtr mk_env_at(const std::string& param) {
    auto e = std::make_shared<CExpr>();
    e->kind = CKind::env_at;
    e->index_param = param;
    return e;
  }
  static CExprPtr mk_apply(int i, CExprPtr arg) {
    auto e = std::make_shared<CExpr>();
    e->kind = CKind::apply_fun;
    e->index = i;
    e->kids.push_back(std::move(arg));
    return e;
  }
  static CExprPtr mk_op(std::string family, std::vector<CExprPtr> kids,
                        std::vector<std::string> params = {}) {
    auto e = std::make_shared<CExpr>();
    e->kind = CKind::op;
    e->family = std::move(family);
    e->op_params = std::move(params);
    e->kids = std::move(kids);
    return e;
  }
  static CExprPtr mk_subst(int i, EnvKind ek, std::vector<CExprPtr> entries = {}) {
    auto e = std::make_shared<CExpr>();
    e->kind = CKind::subst_of;
    e->index = i;
    e->env_kind = ek;
    e->kids = std::move(entries);
    return e;
  }
  static CExprPtr mk_leaf(Term t) {
    auto e = std::make_shared<CExpr>();
    e->kind = CKind::term_leaf;
    e->leaf = std::move(t);
    return e;
  }

 private:
  static CExprPtr mk(CKind k, int i) {
    auto e = std::make_shared<CExpr>();
    e->kind = k;
    e->index = i;
    return e;
  }
};

// ---------------------------------------------------------------------------
// Rule schemas (one per text line) and their per-operator instantiations.

struct Premise {
  bool any = true;
  StepTag tag = StepTag::terminal;
  std::string name;    // argument metavariable
  std::string binder;  // reduct / function binder, if any
};

enum class StageGuard { any, zero, succ };

struct RuleSchema {
  std::string family;
  std::vector<std::string> param_names;
  std::vector<Premise> premises;
  StageGuard stage = StageGuard::any;

  StepTag ctag = StepTag::terminal;
  Effect ceffect = Effect::deterministic;
  std::vector<std::pair<Rational, CExprPtr>> cbag;  // ctag == reduct
  std::string probe_name;                           // ctag == function
  CExprPtr cfun;
  std::string env_name;  // nu binder, if the language has a substitution observable
  CExprPtr cnu;
};

struct Rule {
  const OperatorDecl* host = nullptr;
  const RuleSchema* schema = nullptr;
  std::vector<Premise> premises;  // copied, for matching
  StageGuard stage = StageGuard::any;

  StepTag ctag = StepTag::terminal;
  Effect ceffect = Effect::deterministic;
  std::vector<std::pair<Rational, CExprPtr>> bag;
  CExprPtr fun;
  CExprPtr nu;

  bool matches(const std::vector<StepTag>& tags, int stage_hint) const {
    if (stage == StageGuard::zero && stage_hint != 0) return false;
    if (stage == StageGuard::succ && stage_hint == 0) return false;
    for (size_t i = 0; i < premises.size(); ++i)
      if (!premises[i].any && premises[i].tag != tags[i]) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// A higher-order GSOS law: signature + rule schemas + the hooks a language
// supplies for instantiating operator families and (for binders) handling
// variables and weakening.

class HoGsosLaw {
 public:
  struct Hooks {
    // Materialize/lookup the family instance with the given parameter values.
    std::function<const OperatorDecl*(const std::string&, const std::vector<std::string>&)>
        instance;
    // Resolve a parameterless conclusion operator from its argument sorts.
    std::function<const OperatorDecl*(const std::string&, const std::vector<Sort>&)>
        resolve_by_args;
    // Probe sort / result sort of a function node at the given sort.
    std::function<Sort(const Sort&)> fun_arg_sort;
    std::function<Sort(const Sort&)> fun_result_sort;
    // Binder support (lambda only): de Bruijn contexts as sorts.
    std::function<int(const Sort&)> ctx_of;       // -1 if the sort is not a context
    std::function<Sort(int)> ctx_sort;
    std::function<Term(int, int)> var_atom;       // variable j in context m
    std::function<Term(const Term&)> weaken_term; // shift a term one context up
  };

  std::string name;
  std::shared_ptr<Signature> sig;
  Effect effect = Effect::deterministic;
  bool guarded = false;     // later-modality languages: observation depth = stage
  bool with_subst = false;  // behaviors carry the substitution observable
  std::vector<RuleSchema> schemas;
  std::map<std::string, int> family_rank;
  Hooks hooks;

  int rank_of(const std::string& family) const {
    auto it = family_rank.find(family);
    if (it == family_rank.end())
      fail(errc::rule_table_invalid, "no rank for family '" + family + "'");
    return it->second;
  }

  const std::vector<Rule>& rules_for(const OperatorDecl* op) const {
    std::lock_guard<std::mutex> lock(m_);
    auto it = cache_.find(op);
    if (it != cache_.end()) return it->second;
    std::vector<Rule> rules;
    for (const RuleSchema& s : schemas)
      if (s.family == op->family) rules.push_back(instantiate(s, op));
    if (rules.empty())
      fail(errc::no_rule_applies, "no rules for operator '" + op->name + "'");
    return cache_.emplace(op, std::move(rules)).first->second;
  }

  const Rule* match(const OperatorDecl* op, const std::vector<StepTag>& tags,
                    int stage_hint = -1) const {
    for (const Rule& r : rules_for(op))
      if (r.matches(tags, stage_hint)) return &r;
    return nullptr;
  }

  const Rule& require_match(const OperatorDecl* op, const std::vector<StepTag>& tags,
                            int stage_hint = -1) const {
    const Rule* r = match(op, tags, stage_hint);
    if (!r) {
      std::ostringstream os;
      os << "no rule for " << op->name << " with argument tags (";
      for (size_t i = 0; i < tags.size(); ++i) os << (i ? ", " : "") << step_tag_name(tags[i]);
      os << ")";
      fail(errc::no_rule_applies, os.str());
    }
    return *r;
  }

 private:
  // Bind schema parameter names to the host instance's parameter values and
  // resolve whatever can be resolved statically.
  Rule instantiate(const RuleSchema& s, const OperatorDecl* op) const {
    if (static_cast<int>(s.premises.size()) != op->arity())
      fail(errc::rule_table_invalid,
           "rule for " + s.family + " has " + std::to_string(s.premises.size()) +
               " premises but " + op->name + " has arity " + std::to_string(op->arity()));
    if (s.param_names.size() > op->params.size())
      fail(errc::rule_table_invalid, "rule for " + s.family + " binds more parameters than " +
                                         op->name + " carries");
    std::map<std::string, std::string> bind;
    for (size_t i = 0; i < s.param_names.size(); ++i) bind[s.param_names[i]] = op->params[i];

    Rule r;
    r.host = op;
    r.schema = &s;
    r.premises = s.premises;
    r.stage = s.stage;
    r.ctag = s.ctag;
    r.ceffect = s.ceffect;
    for (const auto& [w, e] : s.cbag) r.bag.emplace_back(w, resolve(e, op, bind));
    if (s.cfun) r.fun = resolve(s.cfun, op, bind);
    if (s.cnu) r.nu = resolve(s.cnu, op, bind);
    return r;
  }

  CExprPtr resolve(const CExprPtr& e, const OperatorDecl* op,
                   const std::map<std::string, std::string>& bind) const {
    auto out = std::make_shared<CExpr>(*e);
    for (CExprPtr& k : out->kids) k = resolve(k, op, bind);
    switch (e->kind) {
      case CKind::env_at: {
        if (!e->index_param.empty()) {
          auto it = bind.find(e->index_param);
          if (it == bind.end())
            fail(errc::unbound_metavariable, "environment index '" + e->index_param + "'");
          out->index = std::stoi(it->second);
        }
        break;
      }
      case CKind::op: {
        if (!e->op_params.empty()) {
          std::vector<std::string> values;
          for (const std::string& p : e->op_params) {
            auto it = bind.find(p);
            if (it == bind.end())
              fail(errc::unbound_metavariable, "family parameter '" + p + "'");
            values.push_back(it->second);
          }
          out->decl = hooks.instance(e->family, values);
        } else {
          // Try the static route; fall back to runtime resolution by sorts.
          std::vector<Sort> arg_sorts;
          bool ok = true;
          for (const CExprPtr& k : out->kids) {
            std::optional<Sort> s = static_sort(k, op);
            if (!s) {
              ok = false;
              break;
            }
            arg_sorts.push_back(*s);
          }
          if (ok) out->decl = hooks.resolve_by_args(e->family, arg_sorts);
        }
        break;
      }
      case CKind::subst_of: {
        if (e->env_kind == EnvKind::idents_probe) {
          int m = hooks.ctx_of ? hooks.ctx_of(op->result_sort) : -1;
          if (m < 0)
            fail(errc::rule_table_invalid, "identity environment outside a binder language");
          std::vector<CExprPtr> entries;
          for (int j = 0; j < m; ++j) entries.push_back(CExpr::mk_leaf(hooks.var_atom(m, j)));
          for (CExprPtr& k : out->kids) entries.push_back(std::move(k));
          out->kids = std::move(entries);
          out->env_kind = EnvKind::explicit_list;
        }
        break;
      }
      default:
        break;
    }
    return out;
  }

  // Sort of a conclusion expression when it is known statically, i.e. without
  // evaluating formal environments.
  std::optional<Sort> static_sort(const CExprPtr& e, const OperatorDecl* op) const {
    switch (e->kind) {
      case CKind::arg:
      case CKind::reduct_of:
        return op->arg_sorts.at(e->index);
      case CKind::apply_fun:
        return hooks.fun_result_sort(op->arg_sorts.at(e->index));
      case CKind::bound_probe:
        return hooks.fun_arg_sort(op->result_sort);
      case CKind::term_leaf:
        return e->leaf->sort();
      case CKind::op:
        if (e->decl) return e->decl->result_sort;
        return std::nullopt;
      case CKind::subst_of:
        if (e->env_kind == EnvKind::explicit_list) {
          if (e->kids.empty()) return hooks.ctx_sort ? std::optional<Sort>(hooks.ctx_sort(0))
                                                     : std::nullopt;
          return static_sort(e->kids.front(), op);
        }
        return std::nullopt;
      default:
        return std::nullopt;
    }
  }

  mutable std::mutex m_;
  mutable std::map<const OperatorDecl*, std::vector<Rule>> cache_;
};

// ---------------------------------------------------------------------------
// Relative flatness: for a rule of a rank-r family, conclusion operators may
// have rank <= r only at the root of a conclusion component (bag entry,
// function body, nu body); everywhere else the rank must be strictly below r.
// This is what makes the denotational algebra's recursion well-founded.

struct FlatnessReport {
  bool flat = true;
  std::vector<std::string> violations;
};

namespace detail {

inline void flatness_walk(const HoGsosLaw& law, const std::string& rule_family, int host_rank,
                          const CExprPtr& e, bool root, FlatnessReport& rep) {
  if (e->kind == CKind::op) {
    int r = law.rank_of(e->family);
    int bound = root ? host_rank : host_rank - 1;
    if (r > bound) {
      rep.flat = false;
      std::ostringstream os;
      os << "rule for " << rule_family << " (rank " << host_rank << ") mentions " << e->family
         << " (rank " << r << ") " << (root ? "at the head" : "in interior position");
      rep.violations.push_back(os.str());
    }
  }
  bool kids_root = false;  // anything below the component root is interior
  for (const CExprPtr& k : e->kids) flatness_walk(law, rule_family, host_rank, k, kids_root, rep);
}

}  // namespace detail

inline FlatnessReport check_flatness(const HoGsosLaw& law) {
  FlatnessReport rep;
  for (const RuleSchema& s : law.schemas) {
    int r = law.rank_of(s.family);
    for (const auto& [w, e] : s.cbag) detail::flatness_walk(law, s.family, r, e, true, rep);
    if (s.cfun) detail::flatness_walk(law, s.family, r, s.cfun, true, rep);
    if (s.cnu) detail::flatness_walk(law, s.family, r, s.cnu, true, rep);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Structural table validation: premise overlap (at most one rule can match a
// given tag tuple), distribution weights, effect agreement.

inline void check_table(const HoGsosLaw& law) {
  std::map<std::string, std::vector<const RuleSchema*>> by_family;
  for (const RuleSchema& s : law.schemas) {
    by_family[s.family].push_back(&s);
    if (s.ctag == StepTag::reduct) {
      if (s.ceffect != law.effect)
        fail(errc::rule_table_invalid,
             "rule for " + s.family + " uses effect " + effect_name(s.ceffect) +
                 " but the language branches with " + effect_name(law.effect));
      if (s.ceffect == Effect::deterministic && s.cbag.size() != 1)
        fail(errc::rule_table_invalid, "deterministic rule for " + s.family +
                                           " must have exactly one conclusion reduct");
      if (s.ceffect == Effect::distribution) {
        Rational total(0);
        for (const auto& [w, e] : s.cbag) {
          if (w <= 0)
            fail(errc::malformed_distribution, "rule for " + s.family + ": weight " +
                                                   rational_str(w));
          total += w;
        }
        if (total != 1)
          fail(errc::malformed_distribution,
               "rule for " + s.family + ": weights sum to " + rational_str(total));
      }
    }
    if (law.with_subst && !s.cnu)
      fail(errc::rule_table_invalid,
           "rule for " + s.family + " lacks a substitution clause in a binder language");
    if (!law.with_subst && s.cnu)
      fail(errc::rule_table_invalid,
           "rule for " + s.family + " has a substitution clause but the language has none");
  }
  static const StepTag all_tags[3] = {StepTag::terminal, StepTag::reduct, StepTag::function};
  for (auto& [family, rules] : by_family) {
    for (size_t i = 0; i < rules.size(); ++i)
      for (size_t j = i + 1; j < rules.size(); ++j) {
        const RuleSchema* a = rules[i];
        const RuleSchema* b = rules[j];
        if (a->premises.size() != b->premises.size())
          fail(errc::rule_table_invalid, "rules for " + family + " disagree on arity");
        bool stages_overlap = a->stage == StageGuard::any || b->stage == StageGuard::any ||
                              a->stage == b->stage;
        if (!stages_overlap) continue;
        // Overlap iff every premise position admits a common tag.
        bool overlap = true;
        for (size_t k = 0; k < a->premises.size() && overlap; ++k) {
          bool common = false;
          for (StepTag t : all_tags) {
            bool in_a = a->premises[k].any || a->premises[k].tag == t;
            bool in_b = b->premises[k].any || b->premises[k].tag == t;
            if (in_a && in_b) common = true;
          }
          overlap = common;
        }
        if (overlap)
          fail(errc::rule_table_invalid, "overlapping rules for " + family);
      }
  }
}

}  // namespace hogsos
