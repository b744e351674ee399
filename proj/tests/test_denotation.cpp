#include <catch2/catch_amalgamated.hpp>

#include "hogsos/harness.hpp"
#include "hogsos/lang.hpp"
#include "hogsos/rules_io.hpp"

using namespace hogsos;

namespace {

struct Setup {
  Language lang;
  DenotationalModel dm;
  Observer obs;

  Setup(const std::string& name, int probe_size, const std::vector<Term>& roots = {})
      : lang(make_language(name)),
        dm(*lang.law),
        obs(*lang.law, denote_probes(dm, lang.term_probes(probe_size, roots))) {}
};

}  // namespace

TEST_CASE("unit denotations classify by step count") {
  Language xt = make_language("xtcl");
  DenotationalModel dm(*xt.law);

  UnitShape s = classify_shape(dm.denote(xt.parse("e")), 100);
  CHECK_FALSE(s.divergent);
  CHECK(s.steps == 0);

  s = classify_shape(dm.denote(xt.parse("I e")), 100);
  CHECK_FALSE(s.divergent);
  CHECK(s.steps == 1);

  s = classify_shape(dm.denote(xt.parse("K e (I e)")), 100);
  CHECK(s.steps == 2);

  // denotational step counts agree with operational trace lengths
  OperationalModel om(*xt.law);
  for (const Term& t : enumerate_terms(xt.producers, xt.sample_sorts[0], 6)) {
    Trace tr = run_trace(om, t, 100);
    if (tr.stop != TraceStop::terminal) continue;
    UnitShape u = classify_shape(dm.denote(t), 100);
    CHECK_FALSE(u.divergent);
    CHECK(u.steps == static_cast<int>(tr.entries.size()) - 1);
  }

  Language xc = make_language("xcl");
  DenotationalModel dc(*xc.law);
  s = classify_shape(dc.denote(xc.parse("S I I (S I I)")), 100);
  CHECK(s.divergent);
  CHECK(s.steps == 100);

  // value-rooted and branching denotations have no unit shape
  try {
    classify_shape(dc.denote(xc.parse("S")), 100);
    FAIL("expected unsupported");
  } catch (const error& err) {
    CHECK(err.code() == errc::unsupported);
  }
  Language xp = make_language("xptcl");
  DenotationalModel dp(*xp.law);
  try {
    classify_shape(dp.denote(xp.parse("e + e")), 100);
    FAIL("expected unsupported");
  } catch (const error& err) {
    CHECK(err.code() == errc::unsupported);
  }
}

TEST_CASE("truncation cuts exactly at the horizon") {
  Setup s("xtcl", 3);
  Denotation d = s.dm.denote(s.lang.parse("I e"));

  FiniteTree leaf;  // terminal, nothing hidden below
  FiniteTree expect;
  expect.tag = StepTag::reduct;
  expect.kids.emplace_back(rat(1), leaf);
  CHECK(tree_equal(s.obs.truncate(d, 2), expect));
  CHECK(tree_equal(s.obs.truncate(d, 1), expect));

  FiniteTree cut0;
  cut0.tag = StepTag::reduct;
  cut0.cut = true;
  CHECK(tree_equal(s.obs.truncate(d, 0), cut0));

  // a terminal node is complete even at depth 0
  FiniteTree t0 = s.obs.truncate(s.dm.denote(s.lang.parse("e")), 0);
  CHECK(t0.tag == StepTag::terminal);
  CHECK_FALSE(t0.cut);

  // an open lambda variable still hides its substitution behavior at depth 0
  Language lam = make_language("lambda");
  DenotationalModel dl(*lam.law);
  Observer ol(*lam.law, denote_probes(dl, lam.term_probes(3, {})));
  FiniteTree v0 = ol.truncate(dl.denote(lam.parse_open("x", {"x"})), 0);
  CHECK(v0.tag == StepTag::terminal);
  CHECK(v0.cut);
}

TEST_CASE("observational equality is depth-indexed") {
  Setup s("xtcl", 3);
  Denotation a = s.dm.denote(s.lang.parse("K e e"));
  Denotation b = s.dm.denote(s.lang.parse("I e"));

  CHECK(s.obs.equal(a, b, 0));  // both take a deterministic step
  CHECK_FALSE(s.obs.equal(a, b, 2));
  CHECK(s.obs.mismatch(a, b, 2).size() >= 1);
  CHECK(s.obs.mismatch(a, b, 0).empty());

  // distinct terms with the same abstract behavior stay equal at every depth
  Denotation c = s.dm.denote(s.lang.parse("K e (I e)"));
  for (int d = 0; d <= 8; ++d) CHECK(s.obs.equal(a, c, d));

  // equality at depth k+1 implies equality at depth k
  auto terms = enumerate_terms(s.lang.producers, s.lang.sample_sorts[0], 5);
  for (size_t i = 0; i < terms.size(); ++i)
    for (size_t j = i + 1; j < terms.size(); ++j) {
      Denotation x = s.dm.denote(terms[i]);
      Denotation y = s.dm.denote(terms[j]);
      for (int d = 0; d < 4; ++d)
        if (s.obs.equal(x, y, d + 1)) CHECK(s.obs.equal(x, y, d));
    }
}

TEST_CASE("distances are exact powers of two") {
  Setup s("xtcl", 3);
  Denotation e = s.dm.denote(s.lang.parse("e"));
  Denotation ie = s.dm.denote(s.lang.parse("I e"));
  Denotation iie = s.dm.denote(s.lang.parse("I (I e)"));

  CHECK(s.obs.distance(e, e, 8) == rat(0));
  CHECK(s.obs.distance(e, ie, 8) == rat(1));
  CHECK(s.obs.distance(ie, iie, 8) == rat(1, 2));
  CHECK(s.obs.distance(iie, s.dm.denote(s.lang.parse("I (I (I e))")), 8) == rat(1, 4));

  // symmetric, and the strong triangle inequality holds on this triple
  CHECK(s.obs.distance(ie, e, 8) == rat(1));
  Rational ac = s.obs.distance(e, iie, 8);
  CHECK(ac <= std::max(s.obs.distance(e, ie, 8), s.obs.distance(ie, iie, 8)));

  // behaviorally equal denotations are at distance zero
  CHECK(s.obs.distance(s.dm.denote(s.lang.parse("K e e")),
                       s.dm.denote(s.lang.parse("K e (I e)")), 8) == rat(0));
}

TEST_CASE("finite trees serialize to json and back") {
  struct Case {
    std::string lang, term;
  };
  std::vector<Case> cases = {{"xtcl", "K e (I e)"}, {"xptcl", "I e + e"}, {"xcl", "S''(K, I)"},
                             {"xnccl", "(K + I) || K"}, {"lambda", "\\x. x x"}};
  for (const Case& c : cases) {
    DYNAMIC_SECTION(c.lang) {
      Setup s(c.lang, 3);
      FiniteTree t = s.obs.truncate(s.dm.denote(s.lang.parse(c.term)), 3);
      nlohmann::json j = tree_to_json(t);
      CHECK(tree_equal(tree_from_json(j), t));

      nlohmann::json full = truncation_to_json(t);
      CHECK(full["schema"] == "finite-tree/1");
      CHECK(tree_equal(tree_from_json(full["tree"]), t));

      std::string dot = tree_to_dot(t);
      CHECK(dot.find("digraph") != std::string::npos);
    }
  }

  // distribution weights survive the round trip verbatim
  Setup sp("xptcl", 3);
  FiniteTree t = sp.obs.truncate(sp.dm.denote(sp.lang.parse("I e + e")), 2);
  std::string dumped = tree_to_json(t).dump();
  CHECK(dumped.find("\"1/2\"") != std::string::npos);
}

TEST_CASE("the denotational algebra agrees with the inductive extension") {
  for (const std::string& name : std::vector<std::string>{"xtcl", "xptcl", "xnccl"}) {
    DYNAMIC_SECTION(name) {
      Setup s(name, 3);
      for (const Term& t : gen_samples(s.lang, 5, 20, 3)) {
        if (t->kids().empty()) continue;
        std::vector<Denotation> kids;
        for (const Term& k : t->kids()) kids.push_back(s.dm.denote(k));
        CHECK(s.obs.equal(s.dm.apply(t->op(), kids), s.dm.denote(t), 4));
      }
    }
  }
}

TEST_CASE("weakening embeds a context into a larger one") {
  Language lam = make_language("lambda");
  DenotationalModel dm(*lam.law);
  Observer obs(*lam.law, denote_probes(dm, lam.term_probes(4, {})));

  Denotation x1 = dm.denote(lam.parse_open("x", {"x"}));
  Denotation w = dm.weaken(x1);
  CHECK(w.sort().name() == "tm@2");
  // the fresh variable lands last, so existing indices keep their meaning
  CHECK(obs.equal(w, dm.denote(lam.parse_open("x", {"x", "y"})), 3));
  CHECK_FALSE(obs.equal(w, dm.denote(lam.parse_open("y", {"x", "y"})), 3));

  Denotation app = dm.denote(lam.parse_open("x x", {"x"}));
  CHECK(obs.equal(dm.weaken(app), dm.denote(lam.parse_open("x x", {"x", "y"})), 3));

  // languages without context sorts cannot be weakened
  Language xt = make_language("xtcl");
  DenotationalModel dt(*xt.law);
  try {
    dt.weaken(dt.denote(xt.parse("e")));
    FAIL("expected sort_mismatch");
  } catch (const error& err) {
    CHECK(err.code() == errc::sort_mismatch);
  }
}

TEST_CASE("divergent denotations are lazy and memoized") {
  Language xc = make_language("xcl");
  DenotationalModel dm(*xc.law);
  Observer obs(*xc.law, denote_probes(dm, xc.term_probes(3, {})));

  Denotation omega = dm.denote(xc.parse("S I I (S I I)"));
  FiniteTree t = obs.truncate(omega, 4);
  int depth = 0;
  const FiniteTree* cur = &t;
  while (!cur->kids.empty()) {
    CHECK(cur->tag == StepTag::reduct);
    REQUIRE(cur->kids.size() == 1);
    cur = &cur->kids[0].second;
    ++depth;
  }
  CHECK(depth == 4);
  CHECK(cur->cut);

  // forcing is computed once and shared
  const Behavior<Denotation>& b1 = omega.force();
  const Behavior<Denotation>& b2 = omega.force();
  CHECK(&b1 == &b2);

  // the canonical non-termination point is indistinguishable from the loop
  Denotation loop = Denotation::looping(xc.sample_sorts[0]);
  CHECK(obs.equal(loop, omega, 10));
  CHECK(obs.distance(loop, omega, 10) == rat(0));
  CHECK_FALSE(obs.equal(loop, dm.denote(xc.parse("I I")), 10));
}

TEST_CASE("the denotational model satisfies the pentagon on random samples") {
  for (const std::string& name : language_names()) {
    DYNAMIC_SECTION(name) {
      Language lang = make_language(name);
      DenotationalModel dm(*lang.law);
      auto samples = gen_samples(lang, 5, 30, 11);
      TermProbes tp = cap_pools(lang.term_probes(3, samples), 8);
      Observer obs(*lang.law, denote_probes(dm, tp));
      auto violations = check_bialgebra_denotational(*lang.law, dm, obs, samples, 3);
      CHECK(violations.empty());
    }
  }
}

TEST_CASE("the denotational pentagon detects a mismatched rule table") {
  Language xc = make_language("xcl");
  std::string table = print_rule_table(*xc.law);
  std::string from = "rule K'(x) |- fun t -> x";
  auto pos = table.find(from);
  REQUIRE(pos != std::string::npos);
  table.replace(pos, from.size(), "rule K'(x) |- fun t -> t");
  ParsedTable mutated = parse_rule_table(table);
  Language mc = make_language("xcl", &mutated);

  DenotationalModel dm(*mc.law);
  std::vector<Term> samples = {xc.parse("K'(K)"), xc.parse("K'(I) S"), xc.parse("K K")};
  Observer obs(*xc.law, denote_probes(dm, xc.term_probes(3, samples)));
  auto violations = check_bialgebra_denotational(*xc.law, dm, obs, samples, 3);
  CHECK_FALSE(violations.empty());
}
