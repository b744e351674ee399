#include <catch2/catch_amalgamated.hpp>

#include "hogsos/harness.hpp"
#include "hogsos/lang.hpp"
#include "hogsos/rules_io.hpp"

using namespace hogsos;

namespace {

std::vector<std::string> trace_strings(const Language& lang, const std::string& src, int fuel,
                                       TraceStop* stop = nullptr) {
  OperationalModel m(*lang.law);
  Trace tr = run_trace(m, lang.parse(src), fuel);
  if (stop) *stop = tr.stop;
  std::vector<std::string> out;
  for (const TraceEntry& e : tr.entries) out.push_back(lang.print(e.term));
  return out;
}

}  // namespace

TEST_CASE("typed combinator chain reduces step by step") {
  Language xt = make_language("xtcl");
  TraceStop stop;
  auto got = trace_strings(xt, "S K I e", 100, &stop);
  std::vector<std::string> want = {"S K I e",   "S'(K) I e",     "S''(K, I) e",
                                   "K e (I e)", "K'(e) (I e)", "e"};
  CHECK(stop == TraceStop::terminal);
  REQUIRE(got == want);

  OperationalModel m(*xt.law);
  Trace tr = run_trace(m, xt.parse("S K I e"), 100);
  for (size_t i = 0; i + 1 < tr.entries.size(); ++i) CHECK(tr.entries[i].steps);
  CHECK_FALSE(tr.entries.back().steps);
}

TEST_CASE("traces stop at values and at fuel exhaustion") {
  Language xt = make_language("xtcl");
  TraceStop stop;
  auto got = trace_strings(xt, "S", 100, &stop);
  CHECK(stop == TraceStop::value);
  CHECK(got == std::vector<std::string>{"S"});

  Language xc = make_language("xcl");
  got = trace_strings(xc, "S I I (S I I)", 10, &stop);
  CHECK(stop == TraceStop::fuel);
  CHECK(got.size() == 11);
  // call-by-name self-application keeps growing instead of terminating
  CHECK(got[4] == "S I I (I (S I I))");
}

TEST_CASE("a singleton branch is followed, a real branch stops the trace") {
  Language xp = make_language("xptcl");
  TraceStop stop;
  // both branches of e + e merge into one outcome of mass 1
  auto got = trace_strings(xp, "e + e", 100, &stop);
  CHECK(stop == TraceStop::terminal);
  CHECK(got == std::vector<std::string>{"e + e", "e"});

  got = trace_strings(xp, "I e + e", 100, &stop);
  CHECK(stop == TraceStop::branch);
  CHECK(got == std::vector<std::string>{"I e + e"});
}

TEST_CASE("distribution weights are exact rationals") {
  Language xp = make_language("xptcl");
  OperationalModel m(*xp.law);

  Behavior<Term> b = m(xp.parse("I e + e"));
  REQUIRE(b.tag == StepTag::reduct);
  REQUIRE(b.bag.effect == Effect::distribution);
  REQUIRE(b.bag.items.size() == 2);
  CHECK(xp.print(b.bag.items[0].second) == "e");
  CHECK(xp.print(b.bag.items[1].second) == "I e");
  CHECK(b.bag.items[0].first == rat(1, 2));
  CHECK(b.bag.items[1].first == rat(1, 2));

  // choice does not evaluate under itself: the successors are the raw arguments
  b = m(xp.parse("(e + I e) + e"));
  REQUIRE(b.bag.items.size() == 2);
  CHECK(xp.print(b.bag.items[0].second) == "e");
  CHECK(xp.print(b.bag.items[1].second) == "e + I e");

  // the application rule lifts a branching argument with its weights intact
  b = m(xp.parse("I (e + e)"));
  REQUIRE(b.bag.items.size() == 1);
  CHECK(b.bag.items[0].first == rat(1));
  CHECK(xp.print(b.bag.items[0].second) == "e + e");
}

TEST_CASE("powerset successors form a canonical set") {
  Language xn = make_language("xnccl");
  OperationalModel m(*xn.law);

  Behavior<Term> b = m(xn.parse("K + I"));
  REQUIRE(b.bag.effect == Effect::powerset);
  REQUIRE(b.bag.items.size() == 2);
  CHECK(xn.print(b.bag.items[0].second) == "I");
  CHECK(xn.print(b.bag.items[1].second) == "K");

  b = m(xn.parse("K + K"));
  REQUIRE(b.bag.items.size() == 1);
  CHECK(xn.print(b.bag.items[0].second) == "K");

  // lockstep parallel rule: the branching side steps, the value side waits
  b = m(xn.parse("(K + I) || K"));
  REQUIRE(b.bag.items.size() == 2);
  CHECK(xn.print(b.bag.items[0].second) == "I || K");
  CHECK(xn.print(b.bag.items[1].second) == "K || K");
}

TEST_CASE("function behaviors apply probes by substitution into the conclusion") {
  Language xc = make_language("xcl");
  OperationalModel m(*xc.law);

  Behavior<Term> b = m(xc.parse("S''(K, K)"));
  REQUIRE(b.tag == StepTag::function);
  CHECK(xc.print(b.fun(xc.parse("I"))) == "K I (K I)");
  CHECK(xc.print(b.fun(xc.parse("S K"))) == "K (S K) (K (S K))");

  b = m(xc.parse("K'(S)"));
  CHECK(xc.print(b.fun(xc.parse("I"))) == "S");
}

TEST_CASE("one-step behavior comparison looks at tags, effects, and successors") {
  Language xt = make_language("xtcl");
  OperationalModel m(*xt.law);
  TermProbes probes = xt.term_probes(3, {});

  std::string why;
  CHECK_FALSE(behavior_equal(*xt.law, m(xt.parse("e")), m(xt.parse("I e")), xt.sample_sorts[0],
                             probes, &why));
  CHECK(why == "tag terminal vs reduct");

  // same tag, but the one-step successors are different terms
  CHECK_FALSE(behavior_equal(*xt.law, m(xt.parse("K e e")), m(xt.parse("K e (I e)")),
                             xt.sample_sorts[0], probes, &why));
  CHECK(behavior_equal(*xt.law, m(xt.parse("I e")), m(xt.parse("I e")), xt.sample_sorts[0],
                       probes, nullptr));

  // functions are compared by applying every probe of the argument sort
  Language xc = make_language("xcl");
  OperationalModel mc(*xc.law);
  TermProbes pc = xc.term_probes(2, {});
  CHECK(behavior_equal(*xc.law, mc(xc.parse("K'(K)")), mc(xc.parse("K'(K)")), xc.sample_sorts[0],
                       pc, nullptr));
  CHECK_FALSE(behavior_equal(*xc.law, mc(xc.parse("K'(K)")), mc(xc.parse("K'(I)")),
                             xc.sample_sorts[0], pc, &why));
}

TEST_CASE("the operational model satisfies the pentagon on random samples") {
  for (const std::string& name : language_names()) {
    DYNAMIC_SECTION(name) {
      Language lang = make_language(name);
      auto samples = gen_samples(lang, 6, 120, 7);
      TermProbes probes = cap_pools(lang.term_probes(3, samples), 12);
      OperationalModel model(*lang.law);
      auto violations = check_bialgebra_law(*lang.law, model, samples, probes);
      CHECK(violations.empty());
    }
  }
}

TEST_CASE("the pentagon check detects a model that follows different rules") {
  Language xc = make_language("xcl");
  std::string table = print_rule_table(*xc.law);
  std::string from = "rule K'(x) |- fun t -> x";
  auto pos = table.find(from);
  REQUIRE(pos != std::string::npos);
  table.replace(pos, from.size(), "rule K'(x) |- fun t -> t");
  ParsedTable mutated = parse_rule_table(table);
  Language mc = make_language("xcl", &mutated);

  std::vector<Term> samples = {xc.parse("K K S"), xc.parse("K'(K) S"), xc.parse("K'(I)")};
  TermProbes probes = xc.term_probes(3, samples);
  OperationalModel model(*mc.law);
  auto violations = check_bialgebra_law(*xc.law, model, samples, probes);
  REQUIRE_FALSE(violations.empty());
  CHECK_FALSE(violations.front().detail.empty());
}

TEST_CASE("repeated evaluation returns identical successor terms") {
  Language xt = make_language("xtcl");
  OperationalModel m(*xt.law);
  Term t = xt.parse("K e (I e)");
  Behavior<Term> b1 = m(t);
  Behavior<Term> b2 = m(t);
  REQUIRE(b1.tag == StepTag::reduct);
  REQUIRE(b2.tag == StepTag::reduct);
  // hash-consing makes the shared successor literally the same node
  CHECK(b1.bag.items[0].second == b2.bag.items[0].second);
}

TEST_CASE("running a table with a missing rule reports the stuck operator") {
  Language xc = make_language("xcl");
  std::string table = print_rule_table(*xc.law);
  std::string line = "rule app(x, y) [x => g] |- red g(y)";
  auto pos = table.find(line);
  REQUIRE(pos != std::string::npos);
  table.erase(pos, line.size() + 1);
  ParsedTable pruned = parse_rule_table(table);
  Language pc = make_language("xcl", &pruned);
  OperationalModel m(*pc.law);
  try {
    m(pc.parse("I K"));
    FAIL("expected no_rule_applies");
  } catch (const error& err) {
    CHECK(err.code() == errc::no_rule_applies);
  }
}
