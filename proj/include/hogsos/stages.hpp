#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hogsos/error.hpp"

namespace hogsos {

// ---------------------------------------------------------------------------
// Exact finite stage sets for the guarded untyped languages. The behavior
// functor of xcl is D(X,Y) = >Y + (>Y)^(>X) and of xnccl is
// P(X,Y) = Pow(>Y) + (>Y)^(>X), where > is the later modality. Stage sets of
// the locally final coalgebra satisfy
//
//   Z_0     = 1 + 1            (xcl)      Pow(1) + 1            (xnccl)
//   Z_{k+1} = Z_k + T_k        (xcl)      Pow(Z_k) + T_k        (xnccl)
//
// with T_k the set of tuples (f_0 : Z_0 -> Z_0, ..., f_k : Z_k -> Z_k) that
// commute with the restriction maps. The same recursion with separate domain
// and codomain towers computes the Cauchy-tower approximants of the fixed
// point of X |-> nu D(X,-), seeded at the terminal object.

enum class GuardedShape { deterministic, powerset };

inline std::optional<GuardedShape> guarded_shape(const std::string& lang) {
  if (lang == "xcl") return GuardedShape::deterministic;
  if (lang == "xnccl") return GuardedShape::powerset;
  return std::nullopt;
}

// One element of a stage set: either the step summand (`reduct` holds indices
// into the previous stage set; a single index for deterministic languages, a
// sorted and possibly empty set for powerset ones; at stage 0 the "previous
// set" is the singleton later-modality payload, written {0}), or a
// restriction-compatible function tuple (fs[j][x] indexes the codomain
// tower's stage-j set, x the domain tower's stage-j set).
struct StageElement {
  bool is_fun = false;
  std::vector<int> reduct;
  std::vector<std::vector<int>> fs;
  bool operator==(const StageElement&) const = default;
};

inline bool stage_elem_less(const StageElement& a, const StageElement& b) {
  if (a.is_fun != b.is_fun) return !a.is_fun;
  if (a.reduct != b.reduct) return a.reduct < b.reduct;
  return a.fs < b.fs;
}

struct StageSet {
  std::vector<StageElement> elems;  // sorted by stage_elem_less, duplicate-free
  std::vector<int> down;            // restriction to the previous stage set; empty at stage 0

  int size() const { return static_cast<int>(elems.size()); }

  int find(const StageElement& e) const {
    auto it = std::lower_bound(elems.begin(), elems.end(), e, stage_elem_less);
    if (it == elems.end() || !(*it == e))
      fail(errc::unsupported, "internal: restricted stage element not found");
    return static_cast<int>(it - elems.begin());
  }
};

struct StageTower {
  std::vector<StageSet> stages;  // stages[k] is stage k
};

struct StageLimits {
  int max_stage = 2;           // xcl stage 3 and xnccl stage 2 are astronomical
  long long max_elems = 200000;
};

namespace detail_stages {

inline long long capped_mul(long long a, long long b, long long cap) {
  if (a == 0 || b == 0) return 0;
  if (a > cap / b) return cap + 1;
  return a * b;
}

inline StageSet stage_zero(GuardedShape shape) {
  StageSet s;
  if (shape == GuardedShape::deterministic) {
    s.elems.push_back({false, {0}, {}});
  } else {
    s.elems.push_back({false, {}, {}});
    s.elems.push_back({false, {0}, {}});
  }
  s.elems.push_back({true, {}, {}});
  return s;
}

// Restriction-compatible tuples (f_0..f_k) with f_j : dom_j -> cod_j. The
// exact count is computed first so oversized sets abort before allocation.
inline std::vector<std::vector<std::vector<int>>> compat_tuples(const StageTower& dom,
                                                                const StageTower& cod, int k,
                                                                long long cap) {
  using Tuple = std::vector<std::vector<int>>;
  int d0 = dom.stages[0].size();
  int c0 = cod.stages[0].size();
  long long count = 1;
  for (int i = 0; i < d0; ++i) count = capped_mul(count, c0, cap);
  if (count > cap)
    fail(errc::stage_too_large, "stage function space exceeds the element limit");
  std::vector<Tuple> tuples;
  std::vector<int> f0(d0, 0);
  while (true) {
    tuples.push_back({f0});
    int i = d0 - 1;
    while (i >= 0 && f0[i] == c0 - 1) f0[i--] = 0;
    if (i < 0) break;
    ++f0[i];
  }
  for (int j = 1; j <= k; ++j) {
    std::vector<std::vector<int>> cls(cod.stages[j - 1].size());
    for (int y = 0; y < cod.stages[j].size(); ++y) cls[cod.stages[j].down[y]].push_back(y);
    const std::vector<int>& rdom = dom.stages[j].down;
    int dj = dom.stages[j].size();
    long long total = 0;
    for (const Tuple& tp : tuples) {
      long long p = 1;
      for (int x = 0; x < dj; ++x)
        p = capped_mul(p, static_cast<long long>(cls[tp[j - 1][rdom[x]]].size()), cap);
      total += p;
      if (total > cap)
        fail(errc::stage_too_large, "stage function space exceeds the element limit");
    }
    std::vector<Tuple> next;
    next.reserve(static_cast<size_t>(total));
    for (const Tuple& tp : tuples) {
      std::vector<const std::vector<int>*> cand(dj);
      bool empty = false;
      for (int x = 0; x < dj; ++x) {
        cand[x] = &cls[tp[j - 1][rdom[x]]];
        empty = empty || cand[x]->empty();
      }
      if (empty) continue;
      std::vector<int> pick(dj, 0);
      while (true) {
        Tuple ext = tp;
        std::vector<int> fj(dj);
        for (int x = 0; x < dj; ++x) fj[x] = (*cand[x])[pick[x]];
        ext.push_back(std::move(fj));
        next.push_back(std::move(ext));
        int x = dj - 1;
        while (x >= 0 && pick[x] + 1 == static_cast<int>(cand[x]->size())) pick[x--] = 0;
        if (x < 0) break;
        ++pick[x];
      }
    }
    tuples = std::move(next);
  }
  return tuples;
}

// Stage k+1 of the codomain tower, with function tuples drawn from
// dom -> cod. Stage enumeration uses dom = cod = Z; approximants feed the
// previous Cauchy iterate as the domain.
inline StageSet next_stage(GuardedShape shape, const StageTower& dom, const StageTower& cod,
                           int k, const StageLimits& lim) {
  const StageSet& prev = cod.stages[k];
  StageSet out;
  if (shape == GuardedShape::deterministic) {
    for (int i = 0; i < prev.size(); ++i) out.elems.push_back({false, {i}, {}});
  } else {
    if (prev.size() >= 40 || (1LL << prev.size()) > lim.max_elems)
      fail(errc::stage_too_large, "powerset of a stage set exceeds the element limit");
    for (long long mask = 0; mask < (1LL << prev.size()); ++mask) {
      StageElement e;
      for (int i = 0; i < prev.size(); ++i)
        if ((mask >> i) & 1) e.reduct.push_back(i);
      out.elems.push_back(std::move(e));
    }
  }
  for (auto& tp : compat_tuples(dom, cod, k, lim.max_elems)) {
    StageElement e;
    e.is_fun = true;
    e.fs = std::move(tp);
    out.elems.push_back(std::move(e));
  }
  if (static_cast<long long>(out.elems.size()) > lim.max_elems)
    fail(errc::stage_too_large, "stage set exceeds the element limit");
  std::sort(out.elems.begin(), out.elems.end(), stage_elem_less);
  for (const StageElement& e : out.elems) {
    StageElement r;
    if (e.is_fun) {
      r.is_fun = true;
      r.fs.assign(e.fs.begin(), e.fs.end() - 1);
    } else if (k == 0) {
      if (!e.reduct.empty()) r.reduct = {0};
    } else {
      for (int i : e.reduct) r.reduct.push_back(prev.down[i]);
      std::sort(r.reduct.begin(), r.reduct.end());
      r.reduct.erase(std::unique(r.reduct.begin(), r.reduct.end()), r.reduct.end());
    }
    out.down.push_back(prev.find(r));
  }
  return out;
}

inline StageTower terminal_tower(int upto) {
  StageTower t;
  for (int k = 0; k <= upto; ++k) {
    StageSet s;
    s.elems.push_back({false, {}, {}});
    if (k > 0) s.down.push_back(0);
    t.stages.push_back(std::move(s));
  }
  return t;
}

}  // namespace detail_stages

inline StageTower enumerate_stages(GuardedShape shape, int n, const StageLimits& lim = {}) {
  if (n < 0) fail(errc::stage_too_large, "negative stage");
  if (n > lim.max_stage)
    fail(errc::stage_too_large,
         "stage " + std::to_string(n) + " exceeds the bound " + std::to_string(lim.max_stage));
  StageTower z;
  z.stages.push_back(detail_stages::stage_zero(shape));
  for (int k = 0; k < n; ++k) {
    StageSet s = detail_stages::next_stage(shape, z, z, k, lim);
    z.stages.push_back(std::move(s));
  }
  return z;
}

inline std::vector<StageElement> enumerate_stage(GuardedShape shape, int n,
                                                 const StageLimits& lim = {}) {
  return enumerate_stages(shape, n, lim).stages.at(n).elems;
}

// F^n 1 for F(X) = nu D(X,-), computed stage-wise up to presheaf stage
// `upto_stage` (default n-1: everything below the iteration index, where the
// tower has already converged to Z). Iterate i only ever feeds stages below
// upto_stage - (n - i), so earlier iterates stay small.
inline StageTower approximant(GuardedShape shape, int n, int upto_stage = -1,
                              const StageLimits& lim = {}) {
  if (n < 0) fail(errc::stage_too_large, "negative iteration index");
  if (upto_stage < 0) upto_stage = n > 0 ? n - 1 : 0;
  if (upto_stage > lim.max_stage)
    fail(errc::stage_too_large, "presheaf stage " + std::to_string(upto_stage) +
                                    " exceeds the bound " + std::to_string(lim.max_stage));
  StageTower prev = detail_stages::terminal_tower(upto_stage);
  for (int i = 1; i <= n; ++i) {
    int need = upto_stage - (n - i);
    if (need < 0) need = 0;
    StageTower cur;
    cur.stages.push_back(detail_stages::stage_zero(shape));
    for (int k = 0; k < need; ++k) {
      StageSet s = detail_stages::next_stage(shape, prev, cur, k, lim);
      cur.stages.push_back(std::move(s));
    }
    prev = std::move(cur);
  }
  return prev;
}

inline bool restriction_surjective(const StageSet& s, int prev_size) {
  std::vector<char> hit(prev_size, 0);
  for (int d : s.down) {
    if (d < 0 || d >= prev_size) return false;
    hit[d] = 1;
  }
  for (char h : hit)
    if (!h) return false;
  return true;
}

inline std::string stage_elem_str(const StageElement& e) {
  std::ostringstream os;
  if (!e.is_fun) {
    os << "red{";
    for (size_t i = 0; i < e.reduct.size(); ++i) os << (i ? "," : "") << e.reduct[i];
    os << "}";
  } else {
    os << "fun(";
    for (size_t j = 0; j < e.fs.size(); ++j) {
      if (j) os << ", ";
      os << "f" << j << "=[";
      for (size_t x = 0; x < e.fs[j].size(); ++x) os << (x ? "," : "") << e.fs[j][x];
      os << "]";
    }
    os << ")";
  }
  return os.str();
}

}  // namespace hogsos
