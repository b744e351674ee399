#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "hogsos/engine.hpp"

namespace hogsos {

// Step-indexed strong applicative bisimilarity, restricted to a finite probe
// pool: "related" means "not distinguished by these probes to this depth"
// (a sound over-approximation of the necessary condition for bisimilarity);
// "distinguished" is sound absolutely and comes with a witness trace that
// replays on the operational model to a concrete mismatch.
//
// Depth 0 compares root variant tags only; at depth n+1, reduct successors,
// probe results and substitution results are compared at depth n.

struct BisimStep {
  // kind: "tag"     final, root tags differ (left/right name them)
  //       "step"    descend into the unique deterministic successors
  //       "probe"   descend into the function results on probe `index`
  //       "subst"   descend into the substitution results on env `index`
  //       "mass"    final, probability mass of a successor class differs
  //       "only-in" final, a successor on one side has no partner across
  std::string kind;
  int index = -1;
  int depth = 0;           // depth at which this step was taken
  std::string left, right; // tag names or class masses
  std::string detail;      // printed probe / class representative

  // replay-only payloads (not serialized)
  Term probe_term;
  std::vector<Term> env;
  Sort env_target;
  Term elem;      // "only-in": the uncovered successor
  bool elem_left = false;
};

struct BisimReport {
  bool related = true;
  int depth = 0;
  std::vector<BisimStep> witness;
};

class BisimChecker {
 public:
  BisimChecker(const HoGsosLaw& law, OperationalModel& model, const TermProbes& probes)
      : law_(law), model_(model), probes_(probes) {}

  BisimReport check(const Term& p, const Term& q, int depth) {
    if (p->sort() != q->sort())
      fail(errc::sort_mismatch,
           "cannot compare " + p->sort().name() + " with " + q->sort().name());
    return rec(p, q, depth);
  }

 private:
  using Key = std::tuple<const TermNode*, const TermNode*, int>;

  BisimReport rec(const Term& p, const Term& q, int n) {
    if (term_eq(p, q)) return BisimReport{true, n, {}};
    Key key{p.get(), q.get(), n};
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    BisimReport r = compute(p, q, n);
    memo_.emplace(std::move(key), r);
    return r;
  }

  BisimReport compute(const Term& p, const Term& q, int n) {
    const Behavior<Term>& a = model_(p);
    const Behavior<Term>& b = model_(q);
    if (a.tag != b.tag) {
      BisimStep s;
      s.kind = "tag";
      s.depth = n;
      s.left = step_tag_name(a.tag);
      s.right = step_tag_name(b.tag);
      return BisimReport{false, n, {s}};
    }
    if (n == 0) return BisimReport{true, 0, {}};

    if (a.tag == StepTag::reduct) {
      std::optional<BisimReport> bad = match_bags(p, q, a, b, n);
      if (bad) return *bad;
    }
    if (a.tag == StepTag::function) {
      const std::vector<Term>& pool = probes_.pool_for(law_.hooks.fun_arg_sort(p->sort()));
      for (size_t i = 0; i < pool.size(); ++i) {
        BisimReport sub = rec(a.fun(pool[i]), b.fun(pool[i]), n - 1);
        if (!sub.related) return prepend_probe(std::move(sub), pool[i], static_cast<int>(i), n);
      }
    }
    if (law_.with_subst && a.subst && b.subst) {
      const auto& envs = probes_.envs_for(p->sort());
      for (size_t i = 0; i < envs.size(); ++i) {
        BisimReport sub =
            rec(a.subst(envs[i].first, envs[i].second), b.subst(envs[i].first, envs[i].second),
                n - 1);
        if (!sub.related) {
          BisimStep s;
          s.kind = "subst";
          s.index = static_cast<int>(i);
          s.depth = n;
          s.env = envs[i].first;
          s.env_target = envs[i].second;
          sub.witness.insert(sub.witness.begin(), std::move(s));
          sub.related = false;
          sub.depth = n;
          return sub;
        }
      }
    }
    return BisimReport{true, n, {}};
  }

  static BisimReport prepend_probe(BisimReport sub, const Term& probe, int index, int n) {
    BisimStep s;
    s.kind = "probe";
    s.index = index;
    s.depth = n;
    s.detail = term_debug(probe);
    s.probe_term = probe;
    sub.witness.insert(sub.witness.begin(), std::move(s));
    sub.depth = n;
    return sub;
  }

  std::optional<BisimReport> match_bags(const Term& p, const Term& q, const Behavior<Term>& a,
                                        const Behavior<Term>& b, int n) {
    switch (law_.effect) {
      case Effect::deterministic: {
        BisimReport sub = rec(a.bag.items.front().second, b.bag.items.front().second, n - 1);
        if (sub.related) return std::nullopt;
        BisimStep s;
        s.kind = "step";
        s.depth = n;
        sub.witness.insert(sub.witness.begin(), std::move(s));
        sub.depth = n;
        return sub;
      }
      case Effect::distribution: {
        // Group the union of supports into depth-(n-1) classes and compare
        // the exact mass each side assigns to every class.
        std::vector<Term> reps;
        auto class_of = [&](const Term& t) -> int {
          for (size_t i = 0; i < reps.size(); ++i)
            if (rec(t, reps[i], n - 1).related) return static_cast<int>(i);
          reps.push_back(t);
          return static_cast<int>(reps.size()) - 1;
        };
        std::map<int, std::pair<Rational, Rational>> mass;
        for (const auto& [w, t] : a.bag.items) mass[class_of(t)].first += w;
        for (const auto& [w, t] : b.bag.items) mass[class_of(t)].second += w;
        for (const auto& [c, m] : mass) {
          if (m.first == m.second) continue;
          BisimStep s;
          s.kind = "mass";
          s.depth = n;
          s.left = rational_str(m.first);
          s.right = rational_str(m.second);
          s.detail = term_debug(reps[c]);
          s.elem = reps[c];
          return BisimReport{false, n, {s}};
        }
        return std::nullopt;
      }
      case Effect::powerset: {
        // Egli-Milner: every successor on either side needs a partner.
        auto uncovered = [&](const EffectBag<Term>& xs, const EffectBag<Term>& ys,
                             bool left) -> std::optional<BisimStep> {
          for (const auto& [wx, x] : xs.items) {
            bool hit = false;
            for (const auto& [wy, y] : ys.items)
              if (rec(x, y, n - 1).related) {
                hit = true;
                break;
              }
            if (!hit) {
              BisimStep s;
              s.kind = "only-in";
              s.depth = n;
              s.detail = term_debug(x);
              s.elem = x;
              s.elem_left = left;
              (left ? s.left : s.right) = "unmatched successor";
              return s;
            }
          }
          return std::nullopt;
        };
        if (auto s = uncovered(a.bag, b.bag, true)) return BisimReport{false, n, {*s}};
        if (auto s = uncovered(b.bag, a.bag, false)) return BisimReport{false, n, {*s}};
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  const HoGsosLaw& law_;
  OperationalModel& model_;
  const TermProbes& probes_;
  std::map<Key, BisimReport> memo_;
};

inline BisimReport bisim(const HoGsosLaw& law, OperationalModel& model, const TermProbes& probes,
                         const Term& p, const Term& q, int depth) {
  return BisimChecker(law, model, probes).check(p, q, depth);
}

// Replays a distinguished verdict's trace against the model and confirms the
// claimed mismatch. Interior steps navigate both sides; the last step is the
// observable difference itself.
inline bool replay_witness(const HoGsosLaw& law, OperationalModel& model,
                           const TermProbes& probes, Term p, Term q, const BisimReport& r) {
  if (r.related || r.witness.empty()) return false;
  for (size_t i = 0; i + 1 < r.witness.size(); ++i) {
    const BisimStep& s = r.witness[i];
    const Behavior<Term>& a = model(p);
    const Behavior<Term>& b = model(q);
    if (s.kind == "step") {
      if (a.tag != StepTag::reduct || b.tag != StepTag::reduct) return false;
      p = a.bag.items.front().second;
      q = b.bag.items.front().second;
    } else if (s.kind == "probe") {
      if (a.tag != StepTag::function || b.tag != StepTag::function) return false;
      p = a.fun(s.probe_term);
      q = b.fun(s.probe_term);
    } else if (s.kind == "subst") {
      if (!a.subst || !b.subst) return false;
      p = a.subst(s.env, s.env_target);
      q = b.subst(s.env, s.env_target);
    } else {
      return false;
    }
  }
  const BisimStep& last = r.witness.back();
  const Behavior<Term>& a = model(p);
  const Behavior<Term>& b = model(q);
  if (last.kind == "tag") return a.tag != b.tag;
  if (a.tag != StepTag::reduct || b.tag != StepTag::reduct) return false;
  BisimChecker chk(law, model, probes);
  if (last.kind == "mass") {
    Rational ma, mb;
    for (const auto& [w, t] : a.bag.items)
      if (chk.check(t, last.elem, last.depth - 1).related) ma += w;
    for (const auto& [w, t] : b.bag.items)
      if (chk.check(t, last.elem, last.depth - 1).related) mb += w;
    return ma != mb;
  }
  if (last.kind == "only-in") {
    const EffectBag<Term>& other = last.elem_left ? b.bag : a.bag;
    for (const auto& [w, t] : other.items)
      if (chk.check(last.elem, t, last.depth - 1).related) return false;
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Partition refinement over a finite universe of terms, for the probabilistic
// and powerset calculi (and, degenerately, the deterministic ones). The
// universe is closed automatically under reduct supports and probe/env
// applications, level by level up to the requested depth, within a cap.
//
// Blocks start at one per (sort, root tag) and are refined by canonical
// signatures: exact aggregated class masses for distributions, sorted block
// sets for powersets, pointwise blocks of probe and substitution results.
// Terms admitted at closure level l are refined only to depth n - l, which is
// all the seed partition at depth n can observe of them.

struct Partition {
  std::vector<std::vector<Term>> blocks;
  std::map<const TermNode*, int> index;

  int block_of(const Term& t) const {
    auto it = index.find(t.get());
    return it == index.end() ? -1 : it->second;
  }
  bool same_block(const Term& a, const Term& b) const {
    int x = block_of(a), y = block_of(b);
    return x >= 0 && x == y;
  }
};

class PartitionRefiner {
 public:
  PartitionRefiner(const HoGsosLaw& law, OperationalModel& model, const TermProbes& probes,
                   size_t universe_cap = 20000)
      : law_(law), model_(model), probes_(probes), cap_(universe_cap) {}

  Partition refine(const std::vector<Term>& seeds, int depth) {
    std::vector<Term> uni;
    std::vector<int> level;
    std::map<const TermNode*, size_t> pos;
    auto admit = [&](const Term& t, int l) {
      auto it = pos.find(t.get());
      if (it != pos.end()) return;
      if (uni.size() >= cap_)
        fail(errc::universe_explosion,
             "universe exceeds " + std::to_string(cap_) + " terms during closure");
      pos.emplace(t.get(), uni.size());
      uni.push_back(t);
      level.push_back(l);
    };
    for (const Term& s : seeds) admit(s, 0);
    for (size_t i = 0; i < uni.size(); ++i) {
      if (level[i] >= depth) continue;
      Term t = uni[i];
      int l = level[i] + 1;
      const Behavior<Term>& b = model_(t);
      if (b.tag == StepTag::reduct)
        for (const auto& [w, u] : b.bag.items) admit(u, l);
      if (b.tag == StepTag::function)
        for (const Term& pr : probes_.pool_for(law_.hooks.fun_arg_sort(t->sort()))) admit(b.fun(pr), l);
      if (law_.with_subst && b.subst)
        for (const auto& [env, target] : probes_.envs_for(t->sort())) admit(b.subst(env, target), l);
    }

    // Initial blocks: (sort, root tag), in deterministic order.
    std::vector<int> block(uni.size());
    {
      std::map<std::pair<std::string, int>, int> ids;
      std::vector<std::pair<std::string, int>> keys(uni.size());
      for (size_t i = 0; i < uni.size(); ++i)
        keys[i] = {uni[i]->sort().name(), static_cast<int>(model_(uni[i]).tag)};
      std::vector<std::pair<std::string, int>> sorted_keys = keys;
      std::sort(sorted_keys.begin(), sorted_keys.end());
      for (const auto& k : sorted_keys) ids.emplace(k, static_cast<int>(ids.size()));
      for (size_t i = 0; i < uni.size(); ++i) block[i] = ids[keys[i]];
    }

    for (int round = 1; round <= depth; ++round) {
      std::vector<std::string> key(uni.size());
      for (size_t i = 0; i < uni.size(); ++i) {
        std::ostringstream os;
        os << block[i];
        if (level[i] + round <= depth) signature(uni[i], block, pos, os);
        key[i] = os.str();
      }
      std::map<std::string, int> ids;
      std::vector<std::string> sorted_keys = key;
      std::sort(sorted_keys.begin(), sorted_keys.end());
      sorted_keys.erase(std::unique(sorted_keys.begin(), sorted_keys.end()), sorted_keys.end());
      for (const std::string& k : sorted_keys) ids.emplace(k, static_cast<int>(ids.size()));
      bool changed = ids.size() != count_blocks(block);
      for (size_t i = 0; i < uni.size(); ++i) block[i] = ids[key[i]];
      if (!changed) break;
    }

    Partition out;
    out.blocks.resize(count_blocks(block));
    for (size_t i = 0; i < uni.size(); ++i) {
      out.blocks[block[i]].push_back(uni[i]);
      out.index.emplace(uni[i].get(), block[i]);
    }
    for (auto& blk : out.blocks) std::sort(blk.begin(), blk.end(), term_less);
    return out;
  }

 private:
  static size_t count_blocks(const std::vector<int>& block) {
    return std::set<int>(block.begin(), block.end()).size();
  }

  void signature(const Term& t, const std::vector<int>& block,
                 const std::map<const TermNode*, size_t>& pos, std::ostringstream& os) {
    auto blk = [&](const Term& u) {
      auto it = pos.find(u.get());
      if (it == pos.end())
        fail(errc::universe_explosion, "universe not closed under successors");
      return block[it->second];
    };
    const Behavior<Term>& b = model_(t);
    if (b.tag == StepTag::reduct) {
      switch (law_.effect) {
        case Effect::deterministic:
          os << "|d" << blk(b.bag.items.front().second);
          break;
        case Effect::distribution: {
          std::map<int, Rational> mass;
          for (const auto& [w, u] : b.bag.items) mass[blk(u)] += w;
          os << "|p";
          for (const auto& [c, m] : mass) os << " " << c << ":" << rational_str(m);
          break;
        }
        case Effect::powerset: {
          std::set<int> cs;
          for (const auto& [w, u] : b.bag.items) cs.insert(blk(u));
          os << "|s";
          for (int c : cs) os << " " << c;
          break;
        }
      }
    }
    if (b.tag == StepTag::function) {
      os << "|f";
      for (const Term& pr : probes_.pool_for(law_.hooks.fun_arg_sort(t->sort())))
        os << " " << blk(b.fun(pr));
    }
    if (law_.with_subst && b.subst) {
      os << "|n";
      for (const auto& [env, target] : probes_.envs_for(t->sort()))
        os << " " << blk(b.subst(env, target));
    }
  }

  const HoGsosLaw& law_;
  OperationalModel& model_;
  const TermProbes& probes_;
  size_t cap_;
};

inline Partition effect_partition(const HoGsosLaw& law, OperationalModel& model,
                                  const TermProbes& probes, const std::vector<Term>& universe,
                                  int depth, size_t cap = 20000) {
  return PartitionRefiner(law, model, probes, cap).refine(universe, depth);
}

}  // namespace hogsos
