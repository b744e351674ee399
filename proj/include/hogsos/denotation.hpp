#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "hogsos/engine.hpp"

namespace hogsos {

// ---------------------------------------------------------------------------
// Denotations: elements of the locally final coalgebra, represented as
// lazily unfolded behavior nodes. Forcing is synchronized, idempotent and
// memoized per node; identity (`id`) is creation order and is only used for
// memo keys and deterministic bag layout, never for semantic comparison.

class Denotation {
 public:
  Denotation() = default;

  static Denotation lazy(Sort sort, std::function<Behavior<Denotation>()> thunk) {
    auto impl = std::make_shared<Impl>();
    impl->sort = std::move(sort);
    impl->id = next_id();
    impl->thunk = std::move(thunk);
    return Denotation(std::move(impl));
  }

  static Denotation now(Sort sort, Behavior<Denotation> node) {
    auto impl = std::make_shared<Impl>();
    impl->sort = std::move(sort);
    impl->id = next_id();
    impl->node = std::move(node);
    return Denotation(std::move(impl));
  }

  // A denotation that steps to itself forever: the point at infinity of the
  // final coalgebra. No term of a terminating language denotes it, but it is
  // a perfectly good element of the domain.
  static Denotation looping(Sort sort) {
    auto impl = std::make_shared<Impl>();
    impl->sort = std::move(sort);
    impl->id = next_id();
    Denotation d(impl);
    impl->thunk = [d]() { return Behavior<Denotation>::reduct(make_deterministic(d)); };
    return d;
  }

  bool valid() const { return static_cast<bool>(impl_); }
  const Sort& sort() const { return impl_->sort; }
  uint64_t id() const { return impl_->id; }
  bool same(const Denotation& o) const { return impl_ == o.impl_; }

  const Behavior<Denotation>& force() const {
    Impl& n = *impl_;
    {
      std::lock_guard<std::mutex> lock(n.m);
      if (n.node) return *n.node;
    }
    Behavior<Denotation> computed = n.thunk();
    std::lock_guard<std::mutex> lock(n.m);
    if (!n.node) {
      n.node = std::move(computed);
      n.thunk = nullptr;
    }
    return *n.node;
  }

 private:
  struct Impl {
    Sort sort;
    uint64_t id = 0;
    std::mutex m;
    std::optional<Behavior<Denotation>> node;
    std::function<Behavior<Denotation>()> thunk;
  };

  explicit Denotation(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

  static uint64_t next_id() {
    static std::atomic<uint64_t> counter{0};
    return ++counter;
  }

  std::shared_ptr<Impl> impl_;
};

inline bool denot_less(const Denotation& a, const Denotation& b) { return a.id() < b.id(); }

// ---------------------------------------------------------------------------
// The denotational model: the algebra on the final coalgebra induced by the
// law (well-founded by operator rank thanks to relative flatness), plus term
// denotation as its fold. Forcing one node matches a rule over the children's
// forced nodes and packages the conclusion lazily again.

class DenotationalModel {
 public:
  explicit DenotationalModel(const HoGsosLaw& law, int force_limit = 20000)
      : law_(law), force_limit_(force_limit) {
    FlatnessReport rep = check_flatness(law);
    if (!rep.flat) fail(errc::flatness_violation, rep.violations.front());
    check_table(law);
    car_.mk = [this](const OperatorDecl* d, std::vector<Denotation> kids) {
      return apply(d, std::move(kids));
    };
    car_.embed = [this](const Term& t) { return denote(t); };
    car_.sort_of = [](const Denotation& d) { return d.sort(); };
    car_.weaken = [this](const Denotation& d) { return weaken(d); };
    car_.less = denot_less;
  }

  const HoGsosLaw& law() const { return law_; }
  const Carrier<Denotation>& carrier() const { return car_; }

  Denotation apply(const OperatorDecl* op, std::vector<Denotation> kids) {
    if (static_cast<int>(kids.size()) != op->arity())
      fail(errc::arity_mismatch, "denotational algebra: " + op->name);
    return Denotation::lazy(op->result_sort, [this, op, kids = std::move(kids)]() {
      ForceGuard guard(this);
      std::vector<Behavior<Denotation>> bhs;
      bhs.reserve(kids.size());
      for (const Denotation& d : kids) bhs.push_back(d.force());
      const Rule& r = law_.require_match(op, child_tags(bhs));
      return instantiate_rule(law_, r, kids, std::move(bhs), car_);
    });
  }

  Denotation denote(const Term& t) {
    {
      std::lock_guard<std::mutex> lock(m_);
      auto it = memo_.find(t.get());
      if (it != memo_.end()) return it->second;
    }
    std::vector<Denotation> kids;
    kids.reserve(t->kids().size());
    for (const Term& k : t->kids()) kids.push_back(denote(k));
    Denotation d = apply(t->op(), std::move(kids));
    std::lock_guard<std::mutex> lock(m_);
    return memo_.emplace(t.get(), std::move(d)).first->second;
  }

  // Context weakening, derived from the substitution observable: substitute
  // the variables of the enlarged context for those of the original one.
  Denotation weaken(const Denotation& d) {
    int l = law_.hooks.ctx_of ? law_.hooks.ctx_of(d.sort()) : -1;
    if (l < 0) fail(errc::sort_mismatch, "weakening a non-context denotation");
    Sort target = law_.hooks.ctx_sort(l + 1);
    return Denotation::lazy(target, [this, d, l, target]() {
      const Behavior<Denotation>& b = d.force();
      if (!b.subst) fail(errc::rule_table_invalid, "weakening without substitution observable");
      std::vector<Denotation> env;
      env.reserve(l);
      for (int j = 0; j < l; ++j) env.push_back(denote(law_.hooks.var_atom(l + 1, j)));
      return b.subst(env, target).force();
    });
  }

 private:
  struct ForceGuard {
    explicit ForceGuard(DenotationalModel* m) : m_(m) {
      if (++depth() > m_->force_limit_)
        fail(errc::fuel_exhausted, "denotational forcing exceeded " +
                                       std::to_string(m_->force_limit_) + " nested nodes");
    }
    ~ForceGuard() { --depth(); }
    static int& depth() {
      thread_local int d = 0;
      return d;
    }
    DenotationalModel* m_;
  };

  const HoGsosLaw& law_;
  int force_limit_;
  Carrier<Denotation> car_;
  std::mutex m_;
  std::unordered_map<const TermNode*, Denotation> memo_;
};

// ---------------------------------------------------------------------------
// Probe sets: the contravariant data observation is relative to. Function
// nodes are probed with denotations of the argument sort; substitution
// observables with environments (entry vector plus target context sort).

struct ProbeSet {
  std::map<Sort, std::vector<Denotation>> pool;
  std::map<Sort, std::vector<std::pair<std::vector<Denotation>, Sort>>> envs;

  const std::vector<Denotation>& pool_for(const Sort& s) const {
    static const std::vector<Denotation> none;
    auto it = pool.find(s);
    return it == pool.end() ? none : it->second;
  }
  const std::vector<std::pair<std::vector<Denotation>, Sort>>& envs_for(const Sort& s) const {
    static const std::vector<std::pair<std::vector<Denotation>, Sort>> none;
    auto it = envs.find(s);
    return it == envs.end() ? none : it->second;
  }
};

// ---------------------------------------------------------------------------
// Depth-truncated observation. At depth 0 only the variant tag survives
// (marked cut for the tags that hide more). Deeper truncations recurse one
// level less on reducts, probe results and substitution results: that offset
// is exactly the later modality of the guarded languages.

struct FiniteTree {
  StepTag tag = StepTag::terminal;
  bool cut = false;  // observation horizon: children below are not recorded
  Effect effect = Effect::deterministic;
  std::vector<std::pair<Rational, FiniteTree>> kids;       // reduct successors
  std::vector<std::pair<std::string, FiniteTree>> probes;  // function node, by probe index
  std::vector<std::pair<std::string, FiniteTree>> substs;  // substitution observable, by env index
};

inline int tree_cmp(const FiniteTree& a, const FiniteTree& b) {
  if (a.tag != b.tag) return a.tag < b.tag ? -1 : 1;
  if (a.cut != b.cut) return a.cut < b.cut ? -1 : 1;
  if (a.effect != b.effect) return a.effect < b.effect ? -1 : 1;
  auto cmp_sizes = [](size_t x, size_t y) { return x < y ? -1 : (x > y ? 1 : 0); };
  if (int c = cmp_sizes(a.kids.size(), b.kids.size())) return c;
  if (int c = cmp_sizes(a.probes.size(), b.probes.size())) return c;
  if (int c = cmp_sizes(a.substs.size(), b.substs.size())) return c;
  for (size_t i = 0; i < a.kids.size(); ++i) {
    if (a.kids[i].first != b.kids[i].first) return a.kids[i].first < b.kids[i].first ? -1 : 1;
    if (int c = tree_cmp(a.kids[i].second, b.kids[i].second)) return c;
  }
  for (size_t i = 0; i < a.probes.size(); ++i) {
    if (int c = a.probes[i].first.compare(b.probes[i].first)) return c < 0 ? -1 : 1;
    if (int c = tree_cmp(a.probes[i].second, b.probes[i].second)) return c;
  }
  for (size_t i = 0; i < a.substs.size(); ++i) {
    if (int c = a.substs[i].first.compare(b.substs[i].first)) return c < 0 ? -1 : 1;
    if (int c = tree_cmp(a.substs[i].second, b.substs[i].second)) return c;
  }
  return 0;
}

inline bool tree_equal(const FiniteTree& a, const FiniteTree& b) { return tree_cmp(a, b) == 0; }

class Observer {
 public:
  Observer(const HoGsosLaw& law, ProbeSet probes)
      : law_(law), probes_(std::move(probes)) {}

  const ProbeSet& probes() const { return probes_; }

  FiniteTree truncate(const Denotation& d, int depth) {
    const Behavior<Denotation>& b = d.force();
    FiniteTree t;
    t.tag = b.tag;
    if (depth == 0) {
      t.cut = b.tag != StepTag::terminal || b.has_subst();
      return t;
    }
    if (b.tag == StepTag::reduct) {
      t.effect = b.bag.effect;
      std::vector<std::pair<Rational, FiniteTree>> kids;
      for (const auto& [w, y] : b.bag.items) kids.emplace_back(w, truncate(y, depth - 1));
      t.kids = canonical_bag(std::move(kids), b.bag.effect);
    } else if (b.tag == StepTag::function) {
      const auto& pool = probes_.pool_for(law_.hooks.fun_arg_sort(d.sort()));
      if (pool.empty()) fail(errc::probe_set_empty, "no probes for sort " + d.sort().name());
      for (size_t i = 0; i < pool.size(); ++i)
        t.probes.emplace_back(std::to_string(i), truncate(b.fun(pool[i]), depth - 1));
    }
    if (b.has_subst()) {
      const auto& envs = probes_.envs_for(d.sort());
      for (size_t i = 0; i < envs.size(); ++i)
        t.substs.emplace_back(std::to_string(i),
                              truncate(b.subst(envs[i].first, envs[i].second), depth - 1));
    }
    return t;
  }

  bool equal(const Denotation& a, const Denotation& b, int depth) {
    if (a.same(b)) return true;
    auto key = std::make_tuple(std::min(a.id(), b.id()), std::max(a.id(), b.id()), depth);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    bool r = compute_equal(a, b, depth);
    memo_.emplace(key, r);
    return r;
  }

  // Depth 0 compares variant tags only; anything deeper is one observation
  // stage further down.
  bool node_equal(const Behavior<Denotation>& x, const Behavior<Denotation>& y, const Sort& sort,
                  int depth) {
    if (x.tag != y.tag) return false;
    if (x.has_subst() != y.has_subst()) return false;
    if (depth == 0) return true;
    if (x.tag == StepTag::reduct) {
      if (x.bag.effect != y.bag.effect) return false;
      if (!effect_equal(x.bag, y.bag, [&](const Denotation& p, const Denotation& q) {
            return equal(p, q, depth - 1);
          }))
        return false;
    }
    if (x.tag == StepTag::function) {
      const auto& pool = probes_.pool_for(law_.hooks.fun_arg_sort(sort));
      if (pool.empty()) fail(errc::probe_set_empty, "no probes for sort " + sort.name());
      for (const Denotation& p : pool)
        if (!equal(x.fun(p), y.fun(p), depth - 1)) return false;
    }
    if (x.has_subst()) {
      for (const auto& [env, target] : probes_.envs_for(sort))
        if (!equal(x.subst(env, target), y.subst(env, target), depth - 1)) return false;
    }
    return true;
  }

  // First observation path separating a and b within the given depth, as a
  // list of human-readable steps; empty if none exists.
  std::vector<std::string> mismatch(const Denotation& a, const Denotation& b, int depth) {
    std::vector<std::string> path;
    find_mismatch(a, b, depth, path);
    return path;
  }

  // Least k <= max_depth at which the truncations differ gives 2^-k; equal
  // everywhere gives 0. This is the locally-final-coalgebra ultrametric,
  // computed relative to the probe pool.
  Rational distance(const Denotation& a, const Denotation& b, int max_depth) {
    for (int k = 0; k <= max_depth; ++k)
      if (!equal(a, b, k)) return pow2_inv(k);
    return Rational(0);
  }

 private:
  static std::vector<std::pair<Rational, FiniteTree>> canonical_bag(
      std::vector<std::pair<Rational, FiniteTree>> kids, Effect effect) {
    std::sort(kids.begin(), kids.end(), [](const auto& a, const auto& b) {
      int c = tree_cmp(a.second, b.second);
      if (c != 0) return c < 0;
      return a.first < b.first;
    });
    std::vector<std::pair<Rational, FiniteTree>> out;
    for (auto& [w, t] : kids) {
      if (!out.empty() && tree_equal(out.back().second, t)) {
        if (effect == Effect::distribution) out.back().first += w;
        // powerset: drop the duplicate
      } else {
        out.emplace_back(w, std::move(t));
      }
    }
    return out;
  }

  bool compute_equal(const Denotation& a, const Denotation& b, int depth) {
    if (a.sort() != b.sort()) return false;
    return node_equal(a.force(), b.force(), a.sort(), depth);
  }

  bool find_mismatch(const Denotation& a, const Denotation& b, int depth,
                     std::vector<std::string>& path) {
    if (equal(a, b, depth)) return false;
    const Behavior<Denotation>& x = a.force();
    const Behavior<Denotation>& y = b.force();
    if (x.tag != y.tag) {
      path.push_back(std::string("tag ") + step_tag_name(x.tag) + " vs " + step_tag_name(y.tag));
      return true;
    }
    if (x.tag == StepTag::reduct && depth > 0) {
      if (x.bag.effect != y.bag.effect ||
          !effect_equal(x.bag, y.bag, [&](const Denotation& p, const Denotation& q) {
            return equal(p, q, depth - 1);
          })) {
        // Point at one uncovered successor when there is one.
        for (const auto& [w, p] : x.bag.items) {
          bool covered = false;
          for (const auto& [w2, q] : y.bag.items)
            if (depth > 0 && equal(p, q, depth - 1)) covered = true;
          if (!covered && depth > 0) {
            path.push_back("reduct successor (left)");
            for (const auto& [w2, q] : y.bag.items)
              if (find_mismatch(p, q, depth - 1, path)) return true;
            return true;
          }
        }
        path.push_back("reduct bag (effect weights)");
        return true;
      }
    }
    if (x.tag == StepTag::function && depth > 0) {
      const auto& pool = probes_.pool_for(law_.hooks.fun_arg_sort(a.sort()));
      for (size_t i = 0; i < pool.size(); ++i)
        if (!equal(x.fun(pool[i]), y.fun(pool[i]), depth - 1)) {
          path.push_back("probe " + std::to_string(i));
          find_mismatch(x.fun(pool[i]), y.fun(pool[i]), depth - 1, path);
          return true;
        }
    }
    if (x.has_subst() && y.has_subst() && depth > 0) {
      const auto& envs = probes_.envs_for(a.sort());
      for (size_t i = 0; i < envs.size(); ++i) {
        Denotation p = x.subst(envs[i].first, envs[i].second);
        Denotation q = y.subst(envs[i].first, envs[i].second);
        if (!equal(p, q, depth - 1)) {
          path.push_back("environment " + std::to_string(i));
          find_mismatch(p, q, depth - 1, path);
          return true;
        }
      }
    }
    path.push_back("substitution observable presence");
    return true;
  }

  const HoGsosLaw& law_;
  ProbeSet probes_;
  std::map<std::tuple<uint64_t, uint64_t, int>, bool> memo_;
};

// ---------------------------------------------------------------------------
// Final-coalgebra shape at base sorts (behavior = successor + termination):
// every denotation is either (k steps, done) or divergent within the fuel.

struct UnitShape {
  bool divergent = false;
  int steps = 0;
};

inline UnitShape classify_shape(const Denotation& d, int fuel) {
  Denotation cur = d;
  UnitShape s;
  for (int k = 0; k <= fuel; ++k) {
    const Behavior<Denotation>& b = cur.force();
    if (b.tag == StepTag::terminal) {
      s.steps = k;
      return s;
    }
    if (b.tag != StepTag::reduct || b.bag.effect != Effect::deterministic)
      fail(errc::unsupported, "shape classification needs deterministic unit-sorted behavior");
    cur = b.bag.items.front().second;
  }
  s.divergent = true;
  s.steps = fuel;
  return s;
}

// ---------------------------------------------------------------------------
// JSON (schema finite-tree/1) and DOT rendering of truncations.

inline nlohmann::ordered_json tree_to_json(const FiniteTree& t) {
  nlohmann::ordered_json j;
  j["tag"] = step_tag_name(t.tag);
  if (t.cut) {
    j["cut"] = true;
    return j;
  }
  if (t.tag == StepTag::reduct) {
    j["effect"] = effect_name(t.effect);
    nlohmann::ordered_json kids = nlohmann::ordered_json::array();
    for (const auto& [w, k] : t.kids)
      kids.push_back(nlohmann::ordered_json{{"w", rational_str(w)}, {"t", tree_to_json(k)}});
    j["kids"] = std::move(kids);
  }
  if (t.tag == StepTag::function) {
    nlohmann::ordered_json ps = nlohmann::ordered_json::array();
    for (const auto& [label, k] : t.probes)
      ps.push_back(nlohmann::ordered_json{{"probe", label}, {"t", tree_to_json(k)}});
    j["probes"] = std::move(ps);
  }
  if (!t.substs.empty()) {
    nlohmann::ordered_json ss = nlohmann::ordered_json::array();
    for (const auto& [label, k] : t.substs)
      ss.push_back(nlohmann::ordered_json{{"env", label}, {"t", tree_to_json(k)}});
    j["substs"] = std::move(ss);
  }
  return j;
}

inline nlohmann::ordered_json truncation_to_json(const FiniteTree& t) {
  return nlohmann::ordered_json{{"schema", "finite-tree/1"}, {"tree", tree_to_json(t)}};
}

inline FiniteTree tree_from_json(const nlohmann::json& j) {
  FiniteTree t;
  std::string tag = j.at("tag").get<std::string>();
  if (tag == "terminal")
    t.tag = StepTag::terminal;
  else if (tag == "reduct")
    t.tag = StepTag::reduct;
  else if (tag == "function")
    t.tag = StepTag::function;
  else
    fail(errc::parse_error, "bad tree tag '" + tag + "'");
  if (j.contains("cut") && j["cut"].get<bool>()) {
    t.cut = true;
    return t;
  }
  if (t.tag == StepTag::reduct) {
    std::string eff = j.at("effect").get<std::string>();
    if (eff == "det")
      t.effect = Effect::deterministic;
    else if (eff == "dist")
      t.effect = Effect::distribution;
    else if (eff == "pow")
      t.effect = Effect::powerset;
    else
      fail(errc::parse_error, "bad effect '" + eff + "'");
    for (const auto& k : j.at("kids"))
      t.kids.emplace_back(parse_rational(k.at("w").get<std::string>()),
                          tree_from_json(k.at("t")));
  }
  if (t.tag == StepTag::function && j.contains("probes"))
    for (const auto& k : j.at("probes"))
      t.probes.emplace_back(k.at("probe").get<std::string>(), tree_from_json(k.at("t")));
  if (j.contains("substs"))
    for (const auto& k : j.at("substs"))
      t.substs.emplace_back(k.at("env").get<std::string>(), tree_from_json(k.at("t")));
  return t;
}

inline FiniteTree truncation_from_json(const nlohmann::json& j) {
  if (j.at("schema").get<std::string>() != "finite-tree/1")
    fail(errc::parse_error, "unknown schema");
  return tree_from_json(j.at("tree"));
}

namespace detail {

inline int dot_walk(const FiniteTree& t, std::ostream& os, int& next) {
  int me = next++;
  if (t.cut) {
    os << "  n" << me << " [label=\"" << step_tag_name(t.tag) << "...\", shape=plaintext];\n";
    return me;
  }
  switch (t.tag) {
    case StepTag::terminal:
      os << "  n" << me << " [label=\"done\", shape=doublecircle];\n";
      break;
    case StepTag::reduct:
      os << "  n" << me << " [label=\"" << effect_name(t.effect) << "\", shape=circle];\n";
      break;
    case StepTag::function:
      os << "  n" << me << " [label=\"fun\", shape=box];\n";
      break;
  }
  for (const auto& [w, k] : t.kids) {
    int kid = dot_walk(k, os, next);
    os << "  n" << me << " -> n" << kid;
    if (t.effect == Effect::distribution) os << " [label=\"" << rational_str(w) << "\"]";
    os << ";\n";
  }
  for (const auto& [label, k] : t.probes) {
    int kid = dot_walk(k, os, next);
    os << "  n" << me << " -> n" << kid << " [label=\"p" << label << "\", style=dashed];\n";
  }
  for (const auto& [label, k] : t.substs) {
    int kid = dot_walk(k, os, next);
    os << "  n" << me << " -> n" << kid << " [label=\"e" << label << "\", style=dotted];\n";
  }
  return me;
}

}  // namespace detail

inline std::string tree_to_dot(const FiniteTree& t) {
  std::ostringstream os;
  os << "digraph truncation {\n";
  int next = 0;
  detail::dot_walk(t, os, next);
  os << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Pentagon on the denotational carrier, compared observationally.

inline std::vector<PentagonViolation> check_bialgebra_denotational(
    const HoGsosLaw& law, DenotationalModel& model, Observer& obs,
    const std::vector<Term>& samples, int depth) {
  std::vector<PentagonViolation> out;
  for (const Term& t : samples) {
    if (t->kids().empty()) continue;
    std::vector<Denotation> kids;
    for (const Term& k : t->kids()) kids.push_back(model.denote(k));
    Behavior<Denotation> lhs = model.apply(t->op(), kids).force();
    std::vector<Behavior<Denotation>> bhs;
    for (const Denotation& d : kids) bhs.push_back(d.force());
    const Rule* r = law.match(t->op(), child_tags(bhs));
    if (!r) {
      out.push_back({t, "no rule applies"});
      continue;
    }
    Behavior<Denotation> rhs = instantiate_rule(law, *r, kids, std::move(bhs), model.carrier());
    if (!obs.node_equal(lhs, rhs, t->sort(), depth))
      out.push_back({t, "legs differ at depth " + std::to_string(depth)});
  }
  return out;
}

}  // namespace hogsos
