#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hogsos/bisim.hpp"
#include "hogsos/lang.hpp"
#include "hogsos/stages.hpp"
#include "nlohmann/json.hpp"

namespace hogsos {

using json = nlohmann::json;

// splitmix64. std::uniform_int_distribution is not bit-stable across standard
// libraries, and golden outputs are pinned per seed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t below(uint64_t n) {
    if (n == 0) fail(errc::config_error, "sampling from an empty range");
    uint64_t lim = std::numeric_limits<uint64_t>::max() -
                   std::numeric_limits<uint64_t>::max() % n;
    uint64_t x;
    do {
      x = next();
    } while (x >= lim);
    return x % n;
  }

 private:
  uint64_t state_;
};

// Exact-size counting and unranking over the producer-closed term space, so
// sampling is uniform over all terms of size <= max. Counts saturate at kCap;
// a saturated space refuses to sample rather than sample non-uniformly.
class TermSampler {
 public:
  static constexpr uint64_t kCap = uint64_t(1) << 62;

  explicit TermSampler(ProducerFn producers) : producers_(std::move(producers)) {}

  // terms of exactly size n
  uint64_t count(const Sort& s, int n) {
    if (n <= 0) return 0;
    auto key = std::make_pair(s, n);
    auto it = count_memo_.find(key);
    if (it != count_memo_.end()) return it->second;
    uint64_t total = 0;
    for (const OperatorDecl* op : ops_for(s)) total = sat_add(total, count_op(op, n));
    count_memo_.emplace(key, total);
    return total;
  }

  uint64_t total_upto(const Sort& s, int max_size) {
    uint64_t total = 0;
    for (int n = 1; n <= max_size; ++n) total = sat_add(total, count(s, n));
    return total;
  }

  bool saturated() const { return saturated_; }

  Term sample(const Sort& s, int max_size, Rng& rng) {
    uint64_t tot = total_upto(s, max_size);
    if (tot == 0)
      fail(errc::uninhabited_at_size,
           "no closed terms of sort " + s.name() + " up to size " + std::to_string(max_size));
    if (saturated_)
      fail(errc::unsupported, "term space of sort " + s.name() + " at size " +
                                  std::to_string(max_size) + " is too large to sample exactly");
    uint64_t r = rng.below(tot);
    int n = 1;
    while (r >= count(s, n)) {
      r -= count(s, n);
      ++n;
    }
    return unrank(s, n, r);
  }

 private:
  uint64_t sat_add(uint64_t a, uint64_t b) {
    if (a >= kCap - b) {
      saturated_ = true;
      return kCap;
    }
    return a + b;
  }
  uint64_t sat_mul(uint64_t a, uint64_t b) {
    if (a != 0 && b > kCap / a) {
      saturated_ = true;
      return kCap;
    }
    return a * b;
  }

  const std::vector<const OperatorDecl*>& ops_for(const Sort& s) {
    auto it = ops_memo_.find(s);
    if (it != ops_memo_.end()) return it->second;
    std::vector<const OperatorDecl*> ops;
    for (const OperatorDecl* op : producers_(s))
      if (op->result_sort == s) ops.push_back(op);
    return ops_memo_.emplace(s, std::move(ops)).first->second;
  }

  uint64_t count_op(const OperatorDecl* op, int n) {
    int k = op->arity();
    if (k == 0) return n == 1 ? 1 : 0;
    if (n - 1 < k) return 0;
    return split_count(op, 0, n - 1);
  }

  // ways to fill arguments i.. with total size rem, each child nonempty
  uint64_t split_count(const OperatorDecl* op, size_t i, int rem) {
    int left = op->arity() - static_cast<int>(i);
    if (left == 0) return rem == 0 ? 1 : 0;
    auto key = std::make_tuple(op, i, rem);
    auto it = split_memo_.find(key);
    if (it != split_memo_.end()) return it->second;
    uint64_t total = 0;
    for (int sz = 1; sz <= rem - (left - 1); ++sz)
      total = sat_add(total, sat_mul(count(op->arg_sorts[i], sz), split_count(op, i + 1, rem - sz)));
    split_memo_.emplace(key, total);
    return total;
  }

  Term unrank(const Sort& s, int n, uint64_t r) {
    for (const OperatorDecl* op : ops_for(s)) {
      uint64_t c = count_op(op, n);
      if (r < c) return unrank_op(op, n, r);
      r -= c;
    }
    fail(errc::unsupported, "internal: rank out of range for sort " + s.name());
  }

  Term unrank_op(const OperatorDecl* op, int n, uint64_t r) {
    std::vector<Term> kids;
    int rem = n - 1;
    for (size_t i = 0; i < static_cast<size_t>(op->arity()); ++i) {
      int left = op->arity() - static_cast<int>(i) - 1;
      for (int sz = 1; sz <= rem - left; ++sz) {
        uint64_t rest = split_count(op, i + 1, rem - sz);
        uint64_t block = sat_mul(count(op->arg_sorts[i], sz), rest);
        if (r < block) {
          kids.push_back(unrank(op->arg_sorts[i], sz, r / rest));
          r %= rest;
          rem -= sz;
          goto next_child;
        }
        r -= block;
      }
      fail(errc::unsupported, "internal: split rank out of range");
    next_child:;
    }
    return make_term(op, std::move(kids));
  }

  ProducerFn producers_;
  bool saturated_ = false;
  std::map<std::pair<Sort, int>, uint64_t> count_memo_;
  std::map<std::tuple<const OperatorDecl*, size_t, int>, uint64_t> split_memo_;
  std::map<Sort, std::vector<const OperatorDecl*>> ops_memo_;
};

// Distinct pseudo-random closed terms; identical output for identical seed.
// When the whole space is no bigger than the request, returns it exhaustively.
inline std::vector<Term> gen_terms(const Language& lang, const Sort& sort, int max_size,
                                   int count, uint64_t seed) {
  if (count == 0) return {};
  TermSampler sampler(lang.producers);
  uint64_t avail = sampler.total_upto(sort, max_size);
  if (avail == 0)
    fail(errc::uninhabited_at_size,
         "no closed terms of sort " + sort.name() + " up to size " + std::to_string(max_size));
  if (!sampler.saturated() && avail <= static_cast<uint64_t>(count))
    return enumerate_terms(lang.producers, sort, max_size);
  Rng rng(seed);
  std::vector<Term> out;
  std::set<const TermNode*> seen;
  long long budget = 200ll * count + 10000;
  while (static_cast<int>(out.size()) < count && budget-- > 0) {
    Term t = sampler.sample(sort, max_size, rng);
    if (seen.insert(t.get()).second) out.push_back(t);
  }
  if (static_cast<int>(out.size()) < count)
    fail(errc::unsupported, "collision retry budget exhausted for sort " + sort.name());
  return out;
}

// Same-sort pairs, sorts drawn round-robin from the language's sample sorts.
inline std::vector<std::pair<Term, Term>> gen_term_pairs(const Language& lang, int max_size,
                                                         int count, uint64_t seed) {
  Rng rng(seed);
  TermSampler sampler(lang.producers);
  std::vector<std::pair<Term, Term>> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const Sort& s = lang.sample_sorts[i % lang.sample_sorts.size()];
    out.emplace_back(sampler.sample(s, max_size, rng), sampler.sample(s, max_size, rng));
  }
  return out;
}

// Mixed-sort sample vector, the sample sorts sharing the count evenly.
inline std::vector<Term> gen_samples(const Language& lang, int max_size, int count,
                                     uint64_t seed) {
  std::vector<Term> out;
  out.reserve(count);
  size_t ns = lang.sample_sorts.size();
  for (size_t i = 0; i < ns; ++i) {
    int want = count / static_cast<int>(ns) + (i < static_cast<size_t>(count) % ns ? 1 : 0);
    std::vector<Term> v = gen_terms(lang, lang.sample_sorts[i], max_size, want, seed + 7919 * i);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

inline TermProbes cap_pools(TermProbes p, size_t max_per_sort) {
  for (auto& [s, pool] : p.pool)
    if (pool.size() > max_per_sort) pool.resize(max_per_sort);
  return p;
}

// ---------------------------------------------------------------------------
// Suite reports: JSON lines, one record per check, then a summary record.
// Suites run sequentially so the records are deterministic for a fixed seed.

struct SuiteReport {
  std::string suite;
  std::string lang;
  uint64_t seed = 0;
  json params = json::object();
  int checked = 0;
  int failed = 0;
  std::vector<json> records;

  bool ok() const { return failed == 0; }

  json summary() const {
    return json{{"record", "summary"}, {"suite", suite},     {"lang", lang},
                {"seed", seed},        {"params", params},   {"checked", checked},
                {"failed", failed},    {"ok", failed == 0}};
  }

  std::string jsonl() const {
    std::ostringstream os;
    for (const json& r : records) os << r.dump() << "\n";
    os << summary().dump() << "\n";
    return os.str();
  }
};

inline json witness_json(const BisimReport& r,
                         const std::function<std::string(const Term&)>& pr) {
  json steps = json::array();
  for (const BisimStep& s : r.witness) {
    json j{{"kind", s.kind}, {"depth", s.depth}};
    if (s.index >= 0) j["index"] = s.index;
    if (!s.left.empty()) j["left"] = s.left;
    if (!s.right.empty()) j["right"] = s.right;
    if (s.kind == "probe" && s.probe_term) j["probe"] = pr(s.probe_term);
    if (s.kind == "subst") {
      json env = json::array();
      for (const Term& e : s.env) env.push_back(pr(e));
      j["env"] = env;
      j["target"] = s.env_target.name();
    }
    if (s.elem) j["element"] = pr(s.elem);
    steps.push_back(std::move(j));
  }
  return json{{"related", r.related}, {"depth", r.depth}, {"steps", steps}};
}

// ---------------------------------------------------------------------------
// Adequacy: obs-equal denotations must be bisimilar; every distinguished pair
// additionally gets a denotational distinguishing depth (the contrapositive
// witness). Both sides use the same probe pools, the calibration under which
// the depth-indexed theorem statement holds.

inline SuiteReport check_adequacy(const Language& lang,
                                  const std::vector<std::pair<Term, Term>>& pairs, int depth,
                                  const TermProbes& probes, uint64_t seed = 0) {
  SuiteReport rep{"adequacy", lang.name, seed};
  rep.params = json{{"depth", depth}, {"pairs", pairs.size()}};
  OperationalModel model(*lang.law);
  DenotationalModel den(*lang.law);
  ProbeSet ps = denote_probes(den, probes);
  Observer obs(*lang.law, ps);
  BisimChecker checker(*lang.law, model, probes);
  int distinguished = 0, with_witness = 0;
  for (const auto& [p, q] : pairs) {
    ++rep.checked;
    Denotation dp = den.denote(p), dq = den.denote(q);
    bool oeq = obs.equal(dp, dq, depth);
    BisimReport br = checker.check(p, q, depth);
    json rec{{"record", "pair"},   {"p", lang.print(p)},   {"q", lang.print(q)},
             {"obs_equal", oeq},   {"related", br.related}};
    if (oeq && !br.related) {
      ++rep.failed;
      rec["verdict"] = "violation";
      rec["witness"] = witness_json(br, lang.print);
    } else {
      rec["verdict"] = "ok";
    }
    if (!br.related) {
      ++distinguished;
      int d = 0;
      while (d <= depth && obs.equal(dp, dq, d)) ++d;
      if (d <= depth) {
        ++with_witness;
        rec["denot_witness_depth"] = d;
        rec["denot_mismatch"] = obs.mismatch(dp, dq, d);
      }
    }
    rep.records.push_back(std::move(rec));
  }
  rep.params["distinguished"] = distinguished;
  rep.params["denot_witnesses"] = with_witness;
  return rep;
}

namespace detail_harness {

inline void walk_paths(const Term& t, int depth, std::vector<int>& path,
                       const std::function<void(const Term&, const std::vector<int>&, int)>& fn) {
  fn(t, path, depth);
  for (size_t i = 0; i < t->kids().size(); ++i) {
    path.push_back(static_cast<int>(i));
    walk_paths(t->kids()[i], depth + 1, path, fn);
    path.pop_back();
  }
}

inline Term replace_at(const Term& t, const std::vector<int>& path, size_t i, const Term& r) {
  if (i == path.size()) return r;
  std::vector<Term> kids = t->kids();
  kids[path[i]] = replace_at(kids[path[i]], path, i + 1, r);
  return make_term(t->op(), std::move(kids));
}

}  // namespace detail_harness

// ---------------------------------------------------------------------------
// Compositionality. The algebra-morphism leg compares denote(f(args)) in one
// model against the algebra applied to denotations from an independent model
// (within one model the two sides are the same memo entry, which would test
// nothing). The substitution-of-equals leg replaces a depth-k subterm by an
// obs-equal one and requires the whole to stay obs-equal, to full depth for
// the ungarded typed languages and to depth - k for the guarded ones.

inline SuiteReport check_compositionality(const Language& lang, const std::vector<Term>& samples,
                                          int depth, const TermProbes& probes, uint64_t seed = 0) {
  SuiteReport rep{"compositionality", lang.name, seed};
  rep.params = json{{"depth", depth}, {"samples", samples.size()}};
  DenotationalModel whole(*lang.law);
  DenotationalModel parts(*lang.law);
  ProbeSet ps = denote_probes(whole, probes);
  Observer obs(*lang.law, ps);

  for (const Term& t : samples) {
    ++rep.checked;
    std::vector<Denotation> kids;
    for (const Term& k : t->kids()) kids.push_back(parts.denote(k));
    Denotation lhs = whole.denote(t);
    Denotation rhs = parts.apply(t->op(), std::move(kids));
    bool eq = obs.equal(lhs, rhs, depth);
    json rec{{"record", "algebra"}, {"term", lang.print(t)}, {"verdict", eq ? "ok" : "violation"}};
    if (!eq) {
      ++rep.failed;
      rec["mismatch"] = obs.mismatch(lhs, rhs, depth);
    }
    rep.records.push_back(std::move(rec));
  }

  int replacements = 0;
  for (const Term& t : samples) {
    struct Site {
      Term sub;
      std::vector<int> path;
      int depth;
    };
    std::optional<Site> site;
    Term replacement;
    std::vector<int> path;
    detail_harness::walk_paths(t, 0, path, [&](const Term& sub, const std::vector<int>& p, int k) {
      if (site || k == 0 || k > depth) return;
      for (const Term& r : probes.pool_for(sub->sort())) {
        if (term_eq(r, sub)) continue;
        if (obs.equal(whole.denote(sub), whole.denote(r), depth)) {
          site = Site{sub, p, k};
          replacement = r;
          return;
        }
      }
    });
    if (!site) continue;
    ++rep.checked;
    ++replacements;
    Term swapped = detail_harness::replace_at(t, site->path, 0, replacement);
    int want = lang.law->guarded ? depth - site->depth : depth;
    bool eq = obs.equal(whole.denote(t), whole.denote(swapped), want);
    json rec{{"record", "substitution"},
             {"term", lang.print(t)},
             {"subterm", lang.print(site->sub)},
             {"replacement", lang.print(replacement)},
             {"site_depth", site->depth},
             {"required_depth", want},
             {"verdict", eq ? "ok" : "violation"}};
    if (!eq) {
      ++rep.failed;
      rec["mismatch"] = obs.mismatch(whole.denote(t), whole.denote(swapped), want);
    }
    rep.records.push_back(std::move(rec));
  }
  rep.params["replacements"] = replacements;
  return rep;
}

// ---------------------------------------------------------------------------
// Pentagon law, both legs: on the term carrier exactly, on the denotational
// carrier observationally.

inline SuiteReport check_bialgebra(const Language& lang, const std::vector<Term>& op_samples,
                                   const std::vector<Term>& den_samples, int depth,
                                   const TermProbes& probes, uint64_t seed = 0) {
  SuiteReport rep{"bialgebra", lang.name, seed};
  rep.params = json{{"depth", depth},
                    {"operational_samples", op_samples.size()},
                    {"denotational_samples", den_samples.size()}};
  OperationalModel model(*lang.law);
  for (const PentagonViolation& v : check_bialgebra_law(*lang.law, model, op_samples, probes)) {
    ++rep.failed;
    rep.records.push_back(
        json{{"record", "operational"}, {"term", lang.print(v.term)}, {"detail", v.detail}});
  }
  rep.checked += static_cast<int>(op_samples.size());
  DenotationalModel den(*lang.law);
  ProbeSet ps = denote_probes(den, probes);
  Observer obs(*lang.law, ps);
  for (const PentagonViolation& v :
       check_bialgebra_denotational(*lang.law, den, obs, den_samples, depth)) {
    ++rep.failed;
    rep.records.push_back(
        json{{"record", "denotational"}, {"term", lang.print(v.term)}, {"detail", v.detail}});
  }
  rep.checked += static_cast<int>(den_samples.size());
  return rep;
}

// ---------------------------------------------------------------------------
// Tower convergence. Guarded combinator languages: the n-th Cauchy-tower
// approximant has exactly the stage-k sets of the locally final coalgebra for
// k < n. Typed languages: truncations computed with probe pools frozen at
// type complexity <= k agree, on terms whose type has complexity <= k, with
// pools extended to k+1 (the computable shadow of tower stabilization).
// Lambda: the same freezing over the context ceiling.

inline SuiteReport check_tower(const Language& lang, int bound, int probe_size,
                               uint64_t seed = 0) {
  SuiteReport rep{"tower", lang.name, seed};
  rep.params = json{{"bound", bound}, {"probe_size", probe_size}};

  if (std::optional<GuardedShape> shape = guarded_shape(lang.name)) {
    int top = *shape == GuardedShape::powerset ? std::min(bound, 1) : bound;
    rep.params["iterations"] = top;
    StageTower z = enumerate_stages(*shape, std::max(top - 1, 0));
    for (int n = 1; n <= top; ++n) {
      StageTower ap = approximant(*shape, n);
      for (int k = 0; k < n; ++k) {
        ++rep.checked;
        bool eq = ap.stages[k].elems == z.stages[k].elems;
        if (!eq) ++rep.failed;
        rep.records.push_back(json{{"record", "stage"},
                                   {"iteration", n},
                                   {"stage", k},
                                   {"approximant_size", ap.stages[k].size()},
                                   {"limit_size", z.stages[k].size()},
                                   {"verdict", eq ? "ok" : "violation"}});
      }
    }
    return rep;
  }

  DenotationalModel den(*lang.law);
  auto truncations_agree = [&](const TermProbes& frozen, const TermProbes& wider,
                               const std::vector<Term>& terms, int depth, json tag) {
    ProbeSet a = denote_probes(den, frozen);
    ProbeSet b = denote_probes(den, wider);
    Observer oa(*lang.law, a), ob(*lang.law, b);
    for (const Term& t : terms) {
      ++rep.checked;
      FiniteTree ta = oa.truncate(den.denote(t), depth);
      FiniteTree tb = ob.truncate(den.denote(t), depth);
      bool eq = tree_equal(ta, tb);
      if (!eq) ++rep.failed;
      json rec = tag;
      rec["record"] = "freeze";
      rec["term"] = lang.print(t);
      rec["depth"] = depth;
      rec["verdict"] = eq ? "ok" : "violation";
      rep.records.push_back(std::move(rec));
    }
  };

  if (lang.typed) {
    TermProbes full = lang.term_probes(probe_size, {});
    for (int k = 1; k <= bound; ++k) {
      TermProbes frozen, wider;
      for (const auto& [s, pool] : full.pool) {
        int c = tcl::ty_of_sort(s)->complexity;
        if (c <= k) frozen.pool[s] = pool;
        if (c <= k + 1) wider.pool[s] = pool;
      }
      std::vector<Term> terms;
      for (const auto& [s, pool] : frozen.pool)
        for (const Term& t : pool) terms.push_back(t);
      truncations_agree(frozen, wider, terms, k, json{{"complexity", k}});
    }
    return rep;
  }

  // lambda
  auto impl = std::static_pointer_cast<lam::LambdaLang>(lang.keep);
  for (int m = 0; m <= std::min(bound, 2); ++m) {
    TermProbes frozen = impl->term_probes(probe_size, m);
    TermProbes wider = impl->term_probes(probe_size, m + 1);
    std::vector<Term> terms;
    for (const auto& [s, pool] : frozen.pool)
      for (const Term& t : pool) terms.push_back(t);
    truncations_agree(frozen, wider, terms, bound, json{{"context", m}});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Ultrametric axioms on the truncation distance, exact rationals.

inline SuiteReport check_ultrametric(const Language& lang, int count, int max_depth,
                                     const TermProbes& probes, int term_size, uint64_t seed) {
  SuiteReport rep{"ultrametric", lang.name, seed};
  rep.params = json{{"count", count}, {"max_depth", max_depth}, {"term_size", term_size}};
  DenotationalModel den(*lang.law);
  ProbeSet ps = denote_probes(den, probes);
  Observer obs(*lang.law, ps);
  Rng rng(seed);
  TermSampler sampler(lang.producers);
  for (int i = 0; i < count; ++i) {
    const Sort& s = lang.sample_sorts[i % lang.sample_sorts.size()];
    Term tx = sampler.sample(s, term_size, rng);
    Term ty = sampler.sample(s, term_size, rng);
    Term tz = sampler.sample(s, term_size, rng);
    Denotation x = den.denote(tx), y = den.denote(ty), z = den.denote(tz);
    Rational dxx = obs.distance(x, x, max_depth);
    Rational dxy = obs.distance(x, y, max_depth);
    Rational dyx = obs.distance(y, x, max_depth);
    Rational dyz = obs.distance(y, z, max_depth);
    Rational dxz = obs.distance(x, z, max_depth);
    bool ok_id = dxx == Rational(0);
    bool ok_sym = dxy == dyx;
    bool ok_tri = dxz <= std::max(dxy, dyz);
    ++rep.checked;
    if (!(ok_id && ok_sym && ok_tri)) {
      ++rep.failed;
      rep.records.push_back(json{{"record", "triple"},
                                 {"x", lang.print(tx)},
                                 {"y", lang.print(ty)},
                                 {"z", lang.print(tz)},
                                 {"d_xx", rational_str(dxx)},
                                 {"d_xy", rational_str(dxy)},
                                 {"d_yx", rational_str(dyx)},
                                 {"d_yz", rational_str(dyz)},
                                 {"d_xz", rational_str(dxz)},
                                 {"identity", ok_id},
                                 {"symmetry", ok_sym},
                                 {"triangle", ok_tri}});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Guardedness: a function node observed to depth n applies its argument only
// at stages <= n-1 one level down, so arguments at distance exactly
// 2^-(n+1) (constructed: k+n+1 vs k+n+2 step chains) must give results that
// agree to depth n. Only meaningful for the guarded languages.

inline SuiteReport check_guardedness(const Language& lang, int count, int probe_size,
                                     uint64_t seed = 0) {
  SuiteReport rep{"guardedness", lang.name, seed};
  rep.params = json{{"count", count}, {"probe_size", probe_size}};
  if (!lang.law->guarded) {
    rep.params["skipped"] = "not a guarded language";
    return rep;
  }
  DenotationalModel den(*lang.law);
  const Sort base_sort = lang.sample_sorts.front();
  TermProbes probes = lang.term_probes(probe_size, {});
  ProbeSet ps = denote_probes(den, probes);
  Observer obs(*lang.law, ps);

  bool is_lambda = lang.name == "lambda";
  std::vector<std::string> bases =
      is_lambda ? std::vector<std::string>{"\\y. y", "\\y. \\z. z", "\\y. y y"}
                : std::vector<std::string>{"K", "S", "S'(I)"};
  auto chain = [&](const std::string& base, int k) {
    std::string s = base;
    for (int i = 0; i < k; ++i) s = is_lambda ? "(\\x. x) (" + s + ")" : "I (" + s + ")";
    return lang.parse(s);
  };

  std::vector<Denotation> funs;
  for (const Term& t : enumerate_terms(lang.producers, base_sort, 4)) {
    Denotation d = den.denote(t);
    if (d.force().tag == StepTag::function) funs.push_back(d);
    if (funs.size() >= 12) break;
  }
  if (funs.empty()) fail(errc::probe_set_empty, "no function-rooted denotations at size 4");

  int n = 1;
  size_t bi = 0, fi = 0;
  while (rep.checked < count) {
    const std::string& base = bases[bi];
    Denotation f = funs[fi];
    Denotation a = den.denote(chain(base, n + 1));
    Denotation b = den.denote(chain(base, n + 2));
    bool pre_near = obs.equal(a, b, n);
    bool pre_far = !obs.equal(a, b, n + 1);
    Denotation fa = f.force().fun(a);
    Denotation fb = f.force().fun(b);
    bool post = obs.equal(fa, fb, n);
    ++rep.checked;
    if (!(pre_near && pre_far && post)) {
      ++rep.failed;
      rep.records.push_back(json{{"record", "pair"},
                                 {"base", base},
                                 {"stage", n},
                                 {"argument_distance_ok", pre_near && pre_far},
                                 {"outputs_agree", post}});
    }
    fi = (fi + 1) % funs.size();
    if (fi == 0) bi = (bi + 1) % bases.size();
    if (fi == 0 && bi == 0) n = n % 4 + 1;
  }
  return rep;
}

}  // namespace hogsos
