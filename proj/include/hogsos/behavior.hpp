#pragma once

#include <algorithm>
#include <functional>
#include <utility>
#include <vector>

#include "hogsos/error.hpp"
#include "hogsos/kernel.hpp"
#include "hogsos/rational.hpp"

namespace hogsos {

enum class Effect { deterministic, distribution, powerset };
enum class StepTag { terminal, reduct, function };

inline const char* effect_name(Effect e) {
  switch (e) {
    case Effect::deterministic: return "det";
    case Effect::distribution: return "dist";
    case Effect::powerset: return "pow";
  }
  return "?";
}

inline const char* step_tag_name(StepTag t) {
  switch (t) {
    case StepTag::terminal: return "terminal";
    case StepTag::reduct: return "reduct";
    case StepTag::function: return "function";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Effect bags: one reduct (deterministic), a finite distribution with exact
// rational weights summing to 1, or a finite duplicate-free set. Items are
// kept sorted by the supplied order so bags compare and print deterministically.

template <typename Y>
struct EffectBag {
  Effect effect = Effect::deterministic;
  std::vector<std::pair<Rational, Y>> items;  // powerset entries carry weight 1

  bool empty() const { return items.empty(); }
};

template <typename Y>
EffectBag<Y> make_deterministic(Y y) {
  EffectBag<Y> b;
  b.effect = Effect::deterministic;
  b.items.emplace_back(Rational(1), std::move(y));
  return b;
}

// Less: strict weak order on Y; equal-by-order items get merged.
template <typename Y, typename Less>
EffectBag<Y> make_distribution(std::vector<std::pair<Rational, Y>> items, Less less) {
  std::stable_sort(items.begin(), items.end(),
                   [&](const auto& a, const auto& b) { return less(a.second, b.second); });
  EffectBag<Y> b;
  b.effect = Effect::distribution;
  Rational total(0);
  for (auto& [w, y] : items) {
    if (w <= 0) fail(errc::malformed_distribution, "non-positive weight " + rational_str(w));
    total += w;
    if (!b.items.empty() && !less(b.items.back().second, y) && !less(y, b.items.back().second))
      b.items.back().first += w;
    else
      b.items.emplace_back(w, std::move(y));
  }
  if (total != 1)
    fail(errc::malformed_distribution, "weights sum to " + rational_str(total) + ", expected 1");
  return b;
}

template <typename Y, typename Less>
EffectBag<Y> make_powerset(std::vector<Y> items, Less less) {
  std::stable_sort(items.begin(), items.end(), less);
  EffectBag<Y> b;
  b.effect = Effect::powerset;
  for (auto& y : items) {
    if (!b.items.empty() && !less(b.items.back().second, y) && !less(y, b.items.back().second))
      continue;
    b.items.emplace_back(Rational(1), std::move(y));
  }
  return b;
}

// ---------------------------------------------------------------------------
// One layer of behavior: the branching step (terminal / reduct under the
// language's effect / function) plus, for languages with binders, the
// substitution observable. X is the contravariant payload (arguments fed in),
// Y the covariant one (states read off). A function node built at stage n+1
// of a guarded language inspects its argument only one stage down; that
// discipline is maintained by construction in the engine and checked
// observationally in the test suite.

template <typename X, typename Y>
struct BehaviorNode {
  StepTag tag = StepTag::terminal;
  EffectBag<Y> bag;                // tag == reduct
  std::function<Y(const X&)> fun;  // tag == function
  // Optional, independent of the tag: applies an environment (one entry per
  // variable of the source context) and lands in the given target sort. The
  // target is explicit because the entries alone do not determine it, e.g. an
  // environment of closed entries can substitute into any context.
  std::function<Y(const std::vector<X>&, const Sort&)> subst;

  bool has_subst() const { return static_cast<bool>(subst); }

  static BehaviorNode terminal() { return BehaviorNode{}; }

  static BehaviorNode reduct(EffectBag<Y> bag) {
    BehaviorNode b;
    b.tag = StepTag::reduct;
    b.bag = std::move(bag);
    return b;
  }

  static BehaviorNode function(std::function<Y(const X&)> f) {
    BehaviorNode b;
    b.tag = StepTag::function;
    b.fun = std::move(f);
    return b;
  }
};

template <typename A>
using Behavior = BehaviorNode<A, A>;

// Covariant action: rewrite the states a behavior exposes. Weights of items
// identified by the new order are merged (a constant map on a distribution
// yields a point mass).
template <typename X, typename Y, typename F, typename Less,
          typename Y2 = std::invoke_result_t<F, const Y&>>
BehaviorNode<X, Y2> map_cov(const BehaviorNode<X, Y>& b, F f, Less less) {
  BehaviorNode<X, Y2> out;
  out.tag = b.tag;
  if (b.tag == StepTag::reduct) {
    switch (b.bag.effect) {
      case Effect::deterministic:
        out.bag = make_deterministic<Y2>(f(b.bag.items.front().second));
        break;
      case Effect::distribution: {
        std::vector<std::pair<Rational, Y2>> items;
        for (const auto& [w, y] : b.bag.items) items.emplace_back(w, f(y));
        out.bag = make_distribution<Y2>(std::move(items), less);
        break;
      }
      case Effect::powerset: {
        std::vector<Y2> items;
        for (const auto& [w, y] : b.bag.items) items.push_back(f(y));
        out.bag = make_powerset<Y2>(std::move(items), less);
        break;
      }
    }
  }
  if (b.fun) out.fun = [f, g = b.fun](const X& x) { return f(g(x)); };
  if (b.subst)
    out.subst = [f, g = b.subst](const std::vector<X>& env, const Sort& target) {
      return f(g(env, target));
    };
  return out;
}

// Contravariant action: precompose the argument side; reducts are untouched.
template <typename X, typename Y, typename G, typename X2>
BehaviorNode<X2, Y> map_contra(const BehaviorNode<X, Y>& b, G g) {
  BehaviorNode<X2, Y> out;
  out.tag = b.tag;
  out.bag = b.bag;
  if (b.fun) out.fun = [g, f = b.fun](const X2& x) { return f(g(x)); };
  if (b.subst)
    out.subst = [g, f = b.subst](const std::vector<X2>& env, const Sort& target) {
      std::vector<X> mapped;
      mapped.reserve(env.size());
      for (const X2& x : env) mapped.push_back(g(x));
      return f(mapped, target);
    };
  return out;
}

// ---------------------------------------------------------------------------
// Effect-aware bag equality modulo a given state equivalence:
//   deterministic: the unique reducts are equivalent;
//   distribution:  equal total mass on every equivalence class (the exact-
//                  rational probabilistic matching condition);
//   powerset:      mutual coverage (Egli-Milner on the identity relation).

template <typename Y, typename Eq>
bool effect_equal(const EffectBag<Y>& a, const EffectBag<Y>& b, Eq eq) {
  if (a.effect != b.effect) return false;
  switch (a.effect) {
    case Effect::deterministic:
      if (a.items.size() != 1 || b.items.size() != 1) return false;
      return eq(a.items.front().second, b.items.front().second);
    case Effect::distribution: {
      Rational ta(0), tb(0);
      for (const auto& [w, y] : a.items) ta += w;
      for (const auto& [w, y] : b.items) tb += w;
      if (ta != 1 || tb != 1)
        fail(errc::malformed_distribution, "weights sum to " + rational_str(ta != 1 ? ta : tb));
      // Greedy class construction over the union of supports.
      std::vector<const Y*> reps;
      std::vector<Rational> mass_a, mass_b;
      auto account = [&](const Y& y, const Rational& w, bool left) {
        for (size_t i = 0; i < reps.size(); ++i) {
          if (eq(*reps[i], y)) {
            (left ? mass_a[i] : mass_b[i]) += w;
            return;
          }
        }
        reps.push_back(&y);
        mass_a.push_back(left ? w : Rational(0));
        mass_b.push_back(left ? Rational(0) : w);
      };
      for (const auto& [w, y] : a.items) account(y, w, true);
      for (const auto& [w, y] : b.items) account(y, w, false);
      for (size_t i = 0; i < reps.size(); ++i)
        if (mass_a[i] != mass_b[i]) return false;
      return true;
    }
    case Effect::powerset: {
      auto covered = [&](const auto& xs, const auto& ys) {
        for (const auto& [wx, x] : xs) {
          bool hit = false;
          for (const auto& [wy, y] : ys)
            if (eq(x, y)) {
              hit = true;
              break;
            }
          if (!hit) return false;
        }
        return true;
      };
      return covered(a.items, b.items) && covered(b.items, a.items);
    }
  }
  return false;
}

}  // namespace hogsos
