#include <catch2/catch_amalgamated.hpp>

#include "hogsos/kernel.hpp"
#include "hogsos/lang.hpp"

using namespace hogsos;

namespace {

// tiny two-sorted signature: naturals and a pairing into bools
struct NatSig {
  Sort nat{"nat"}, boolean{"bool"};
  Signature sig;
  const OperatorDecl* z;
  const OperatorDecl* s;
  const OperatorDecl* tt;
  const OperatorDecl* pair;

  NatSig() {
    z = sig.add({"z", "z", {}, {}, nat, 0});
    s = sig.add({"s", "s", {}, {nat}, nat, 0});
    tt = sig.add({"tt", "tt", {}, {}, boolean, 0});
    pair = sig.add({"pair", "pair", {}, {nat, boolean}, boolean, 1});
  }
};

}  // namespace

TEST_CASE("sorts intern by name") {
  Sort a("unit"), b("unit"), c("tm");
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a.name() == "unit");
  CHECK((a < c || c < a));
  CHECK_FALSE(a < b);
  CHECK(Sort().empty());
  CHECK_FALSE(a.empty());
}

TEST_CASE("signature add is idempotent and rejects conflicts") {
  NatSig ns;
  CHECK(ns.sig.find("z") == ns.z);
  CHECK(ns.sig.find("nope") == nullptr);
  CHECK_THROWS_AS(ns.sig.require("nope"), error);

  const OperatorDecl* again = ns.sig.add({"z", "z", {}, {}, ns.nat, 0});
  CHECK(again == ns.z);
  CHECK_THROWS_AS(ns.sig.add({"z", "z", {}, {}, ns.boolean, 0}), error);

  auto all = ns.sig.all();
  CHECK(all.size() == 4);
  CHECK(std::is_sorted(all.begin(), all.end(), [](auto* a, auto* b) { return a->name < b->name; }));
}

TEST_CASE("make_term validates arity and sorts") {
  NatSig ns;
  Term zero = make_term(ns.z);
  CHECK_THROWS_AS(make_term(ns.s), error);               // arity
  CHECK_THROWS_AS(make_term(ns.s, {zero, zero}), error);  // arity
  Term one = make_term(ns.s, {zero});
  CHECK_THROWS_AS(make_term(ns.pair, {make_term(ns.tt), zero}), error);  // sorts flipped
  Term p = make_term(ns.pair, {one, make_term(ns.tt)});
  CHECK(p->sort() == ns.boolean);
  CHECK(p->size() == 4);

  try {
    make_term(ns.s, {});
  } catch (const error& e) {
    CHECK(e.code() == errc::arity_mismatch);
  }
  try {
    make_term(ns.pair, {make_term(ns.tt), zero});
  } catch (const error& e) {
    CHECK(e.code() == errc::sort_mismatch);
  }
}

TEST_CASE("terms are hash-consed: structural equality is pointer equality") {
  NatSig ns;
  Term a = make_term(ns.s, {make_term(ns.s, {make_term(ns.z)})});
  Term b = make_term(ns.s, {make_term(ns.s, {make_term(ns.z)})});
  CHECK(a.get() == b.get());
  CHECK(term_eq(a, b));
  CHECK(a->kids()[0].get() == b->kids()[0].get());

  Term c = make_term(ns.s, {make_term(ns.z)});
  CHECK_FALSE(term_eq(a, c));
  CHECK(term_cmp(a, a) == 0);
  CHECK(term_cmp(c, a) < 0);  // smaller first
  CHECK(term_cmp(a, c) > 0);
  CHECK(term_less(c, a));

  // same size, different operator: ordered by name
  Term one = make_term(ns.s, {make_term(ns.z)});
  Term p = make_term(ns.pair, {make_term(ns.z), make_term(ns.tt)});
  CHECK(term_cmp(one, p) != 0);
  CHECK(term_debug(p) == "pair(z, tt)");
  CHECK(term_debug(make_term(ns.z)) == "z");
}

TEST_CASE("rebuild reproduces the identical interned node") {
  NatSig ns;
  Term a = make_term(ns.pair, {make_term(ns.s, {make_term(ns.z)}), make_term(ns.tt)});
  CHECK(rebuild(a).get() == a.get());
}

TEST_CASE("enumeration: counts, order, duplicates") {
  Language xcl = make_language("xcl");
  const Sort tm = xcl.sample_sorts[0];

  // |terms of size <= n| for the S/K/I signature with S', K', S'', app:
  // 3 constants, then 6 of size 2, 30 of size 3, 132 of size 4
  CHECK(enumerate_terms(xcl.producers, tm, 1).size() == 3);
  CHECK(enumerate_terms(xcl.producers, tm, 2).size() == 9);
  CHECK(enumerate_terms(xcl.producers, tm, 3).size() == 39);
  CHECK(enumerate_terms(xcl.producers, tm, 4).size() == 171);

  std::vector<Term> ts = enumerate_terms(xcl.producers, tm, 4);
  for (size_t i = 1; i < ts.size(); ++i) CHECK(ts[i - 1]->size() <= ts[i]->size());
  std::set<const TermNode*> seen;
  for (const Term& t : ts) CHECK(seen.insert(t.get()).second);
  for (const Term& t : ts) CHECK(t->sort() == tm);

  std::vector<Term> again = enumerate_terms(xcl.producers, tm, 4);
  REQUIRE(again.size() == ts.size());
  for (size_t i = 0; i < ts.size(); ++i) CHECK(term_eq(ts[i], again[i]));
}

TEST_CASE("enumeration respects sorts and contexts") {
  Language xt = make_language("xtcl");
  std::vector<Term> units = enumerate_terms(xt.producers, Sort("unit"), 3);
  REQUIRE(units.size() == 2);  // e and I e
  CHECK(xt.print(units[0]) == "e");
  CHECK(xt.print(units[1]) == "I e");

  Language lam = make_language("lambda");
  CHECK(enumerate_terms(lam.producers, lam.sample_sorts[0], 1).empty());
  CHECK(enumerate_terms(lam.producers, lam.sample_sorts[0], 2).size() == 1);
  CHECK(enumerate_terms(lam.producers, lam.sample_sorts[0], 5).size() == 20);
  // open context has variables at size 1
  CHECK(enumerate_terms(lam.producers, lam.sample_sorts[1], 1).size() == 1);
}
