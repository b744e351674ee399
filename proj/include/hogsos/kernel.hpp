#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hogsos/error.hpp"

namespace hogsos {

// ---------------------------------------------------------------------------
// Sorts: interned symbols. Typed languages render their types into sort names
// and keep their own structured view; the kernel only needs equality, a
// deterministic order and printing.

class Sort {
 public:
  Sort() : s_(intern("")) {}
  explicit Sort(std::string_view name) : s_(intern(name)) {}

  const std::string& name() const { return *s_; }
  bool empty() const { return s_->empty(); }

  bool operator==(const Sort& o) const { return s_ == o.s_; }
  bool operator!=(const Sort& o) const { return s_ != o.s_; }
  bool operator<(const Sort& o) const { return s_ != o.s_ && *s_ < *o.s_; }

  size_t hash() const { return std::hash<const void*>()(s_); }

 private:
  static const std::string* intern(std::string_view name) {
    static std::mutex m;
    static std::map<std::string, std::unique_ptr<std::string>, std::less<>> table;
    std::lock_guard<std::mutex> lock(m);
    auto it = table.find(name);
    if (it == table.end())
      it = table.emplace(std::string(name), std::make_unique<std::string>(name)).first;
    return it->second.get();
  }

  const std::string* s_;
};

// ---------------------------------------------------------------------------
// Operators. `name` is the full identity including any family parameters
// (type subscripts, context indices); `family` names the schematic operator a
// rule table talks about. `rank` drives the relative-flatness stratification:
// rule conclusions may mention same-rank operators only in head position.

struct OperatorDecl {
  std::string name;
  std::string family;
  std::vector<std::string> params;
  std::vector<Sort> arg_sorts;
  Sort result_sort;
  int rank = 0;

  int arity() const { return static_cast<int>(arg_sorts.size()); }
};

class Signature {
 public:
  const OperatorDecl* find(std::string_view name) const {
    std::lock_guard<std::mutex> lock(m_);
    auto it = ops_.find(name);
    return it == ops_.end() ? nullptr : it->second.get();
  }

  const OperatorDecl* require(std::string_view name) const {
    const OperatorDecl* d = find(name);
    if (!d) fail(errc::sort_mismatch, "unknown operator '" + std::string(name) + "'");
    return d;
  }

  // Idempotent: re-adding an identical declaration returns the existing one.
  const OperatorDecl* add(OperatorDecl d) {
    std::lock_guard<std::mutex> lock(m_);
    auto it = ops_.find(d.name);
    if (it != ops_.end()) {
      const OperatorDecl& old = *it->second;
      if (old.family != d.family || old.arg_sorts != d.arg_sorts ||
          old.result_sort != d.result_sort || old.rank != d.rank)
        fail(errc::rule_table_invalid, "conflicting redeclaration of '" + d.name + "'");
      return it->second.get();
    }
    auto owned = std::make_unique<OperatorDecl>(std::move(d));
    const OperatorDecl* raw = owned.get();
    ops_.emplace(raw->name, std::move(owned));
    return raw;
  }

  std::vector<const OperatorDecl*> all() const {
    std::lock_guard<std::mutex> lock(m_);
    std::vector<const OperatorDecl*> out;
    out.reserve(ops_.size());
    for (auto& [k, v] : ops_) out.push_back(v.get());
    return out;  // map order: deterministic by name
  }

 private:
  mutable std::mutex m_;
  std::map<std::string, std::unique_ptr<OperatorDecl>, std::less<>> ops_;
};

// ---------------------------------------------------------------------------
// Terms: immutable, hash-consed. Structural equality is pointer equality.

class TermNode;
using Term = std::shared_ptr<const TermNode>;

class TermNode {
 public:
  const OperatorDecl* op() const { return op_; }
  const std::vector<Term>& kids() const { return kids_; }
  const Sort& sort() const { return op_->result_sort; }
  size_t hash() const { return hash_; }
  int size() const { return size_; }

  TermNode(const OperatorDecl* op, std::vector<Term> kids, size_t hash, int size)
      : op_(op), kids_(std::move(kids)), hash_(hash), size_(size) {}

 private:
  const OperatorDecl* op_;
  std::vector<Term> kids_;
  size_t hash_;
  int size_;
};

namespace detail {

struct TermKey {
  const OperatorDecl* op;
  std::vector<const TermNode*> kids;
  bool operator==(const TermKey& o) const { return op == o.op && kids == o.kids; }
};

struct TermKeyHash {
  size_t operator()(const TermKey& k) const {
    size_t h = std::hash<const void*>()(k.op);
    for (const TermNode* n : k.kids) h = h * 1000003u ^ std::hash<const void*>()(n);
    return h;
  }
};

}  // namespace detail

inline Term make_term(const OperatorDecl* op, std::vector<Term> kids = {}) {
  if (!op) fail(errc::sort_mismatch, "null operator");
  if (static_cast<int>(kids.size()) != op->arity())
    fail(errc::arity_mismatch, op->name + " expects " + std::to_string(op->arity()) +
                                   " arguments, got " + std::to_string(kids.size()));
  for (size_t i = 0; i < kids.size(); ++i) {
    if (!kids[i]) fail(errc::sort_mismatch, "null argument to " + op->name);
    if (kids[i]->sort() != op->arg_sorts[i])
      fail(errc::sort_mismatch, op->name + " argument " + std::to_string(i) + " has sort " +
                                    kids[i]->sort().name() + ", expected " +
                                    op->arg_sorts[i].name());
  }

  static std::mutex m;
  static std::unordered_map<detail::TermKey, Term, detail::TermKeyHash> table;

  detail::TermKey key{op, {}};
  key.kids.reserve(kids.size());
  for (const Term& k : kids) key.kids.push_back(k.get());

  std::lock_guard<std::mutex> lock(m);
  auto it = table.find(key);
  if (it != table.end()) return it->second;

  size_t h = detail::TermKeyHash()(key);
  int size = 1;
  for (const Term& k : kids) size += k->size();
  Term t = std::make_shared<const TermNode>(op, std::move(kids), h, size);
  table.emplace(std::move(key), t);
  return t;
}

inline bool term_eq(const Term& a, const Term& b) { return a.get() == b.get(); }

// Deterministic total order: by size, then operator name, then children.
inline int term_cmp(const Term& a, const Term& b) {
  if (a.get() == b.get()) return 0;
  if (a->size() != b->size()) return a->size() < b->size() ? -1 : 1;
  if (a->op() != b->op()) {
    int c = a->op()->name.compare(b->op()->name);
    if (c != 0) return c < 0 ? -1 : 1;
  }
  for (size_t i = 0; i < a->kids().size(); ++i) {
    int c = term_cmp(a->kids()[i], b->kids()[i]);
    if (c != 0) return c;
  }
  return 0;
}

inline bool term_less(const Term& a, const Term& b) { return term_cmp(a, b) < 0; }

// Generic prefix rendering, independent of any surface syntax.
inline std::string term_debug(const Term& t) {
  std::ostringstream os;
  os << t->op()->name;
  if (!t->kids().empty()) {
    os << "(";
    for (size_t i = 0; i < t->kids().size(); ++i) {
      if (i) os << ", ";
      os << term_debug(t->kids()[i]);
    }
    os << ")";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Folds. `fold` is the initial-algebra recursion; `primitive_recursion` also
// hands each node its original subterms (the paired-algebra scheme the
// operational model is built with).

template <typename T, typename F>
T fold(const Term& t, F&& alg) {
  std::vector<T> kids;
  kids.reserve(t->kids().size());
  for (const Term& k : t->kids()) kids.push_back(fold<T>(k, alg));
  return alg(t->op(), kids);
}

template <typename T, typename F>
T primitive_recursion(const Term& t, F&& alg) {
  std::vector<std::pair<Term, T>> kids;
  kids.reserve(t->kids().size());
  for (const Term& k : t->kids()) kids.emplace_back(k, primitive_recursion<T>(k, alg));
  return alg(t->op(), kids);
}

// Rebuilding a term through fold with make_term is the identity; useful as a
// sanity check and as the default algebra.
inline Term rebuild(const Term& t) {
  return fold<Term>(t, [](const OperatorDecl* op, const std::vector<Term>& kids) {
    return make_term(op, kids);
  });
}

// ---------------------------------------------------------------------------
// Bounded enumeration of closed well-sorted terms. The producer callback
// lists, deterministically, the operator instances with a given result sort
// that the language admits for the enumeration at hand (typed languages cap
// the complexity of mentioned sorts there; see lang headers).

using ProducerFn = std::function<std::vector<const OperatorDecl*>(const Sort&)>;

namespace detail {

class TermEnumerator {
 public:
  explicit TermEnumerator(const ProducerFn& producers) : producers_(producers) {}

  // Exactly n nodes.
  const std::vector<Term>& of_size(const Sort& s, int n) {
    auto key = std::make_pair(s, n);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    std::vector<Term> out;
    if (n >= 1) {
      std::vector<const OperatorDecl*> ops = producers_(s);
      std::sort(ops.begin(), ops.end(),
                [](const OperatorDecl* a, const OperatorDecl* b) { return a->name < b->name; });
      for (const OperatorDecl* op : ops) {
        if (op->result_sort != s) continue;
        int k = op->arity();
        if (k == 0) {
          if (n == 1) out.push_back(make_term(op));
          continue;
        }
        std::vector<Term> acc(k);
        splits(op, 0, n - 1, acc, out);
      }
    }
    return memo_.emplace(std::move(key), std::move(out)).first->second;
  }

 private:
  void splits(const OperatorDecl* op, int i, int budget, std::vector<Term>& acc,
              std::vector<Term>& out) {
    int k = op->arity();
    int remaining = k - i;
    if (remaining == 0) {
      if (budget == 0) out.push_back(make_term(op, acc));
      return;
    }
    // Each remaining child needs at least one node.
    for (int n_i = 1; n_i <= budget - (remaining - 1); ++n_i) {
      for (const Term& t : of_size(op->arg_sorts[i], n_i)) {
        acc[i] = t;
        splits(op, i + 1, budget - n_i, acc, out);
      }
    }
  }

  const ProducerFn& producers_;
  std::map<std::pair<Sort, int>, std::vector<Term>> memo_;
};

}  // namespace detail

// All closed well-sorted terms of sort s with at most max_size nodes, ordered
// by size, then operator name, then children lexicographically.
inline std::vector<Term> enumerate_terms(const ProducerFn& producers, const Sort& s,
                                         int max_size) {
  detail::TermEnumerator en(producers);
  std::vector<Term> out;
  for (int n = 1; n <= max_size; ++n) {
    const std::vector<Term>& layer = en.of_size(s, n);
    out.insert(out.end(), layer.begin(), layer.end());
  }
  return out;
}

}  // namespace hogsos
