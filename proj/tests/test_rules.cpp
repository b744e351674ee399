#include <catch2/catch_amalgamated.hpp>

#include "hogsos/engine.hpp"
#include "hogsos/lang.hpp"
#include "hogsos/rules_io.hpp"

using namespace hogsos;

namespace {

std::string builtin_table(const std::string& lang) {
  return print_rule_table(*make_language(lang).law);
}

std::string replace_line(std::string text, const std::string& from, const std::string& to) {
  auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), to);
  return text;
}

errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return errc::unsupported;
}

}  // namespace

TEST_CASE("every builtin table prints to a parse/print fixpoint") {
  for (const std::string& name : language_names()) {
    std::string once = builtin_table(name);
    ParsedTable t = parse_rule_table(once);
    CHECK(print_rule_table(t) == once);
    CHECK(t.lang == name);
  }
}

TEST_CASE("parsed tables rebuild working languages") {
  ParsedTable t = parse_rule_table(builtin_table("xtcl"));
  Language lang = make_language("xtcl", &t);
  OperationalModel model(*lang.law);
  Trace tr = run_trace(model, lang.parse("S K I e"), 50);
  REQUIRE(tr.entries.size() == 6);
  CHECK(tr.stop == TraceStop::terminal);
  CHECK(lang.print(tr.entries.back().term) == "e");
}

TEST_CASE("table parser rejects malformed input") {
  CHECK(code_of([] { parse_rule_table("effect det\n"); }) == errc::parse_error);
  CHECK(code_of([] { parse_rule_table("lang x\n"); }) == errc::parse_error);
  CHECK(code_of([] { parse_rule_table("lang x\neffect det\nbogus directive\n"); }) ==
        errc::parse_error);
  CHECK(code_of([] { parse_rule_table("lang x\neffect wat\n"); }) == errc::parse_error);
  // rules before the effect directive have no bag syntax to parse against
  CHECK(code_of([] { parse_rule_table("lang x\nrule I |- fun t -> t\neffect det\n"); }) ==
        errc::parse_error);
}

TEST_CASE("missing rank is rejected") {
  std::string text = replace_line(builtin_table("xcl"), "rank app 0\n", "");
  CHECK(code_of([&] { parse_rule_table(text); }) == errc::rule_table_invalid);
}

TEST_CASE("substitution clauses must match the subst directive") {
  std::string text = replace_line(builtin_table("lambda"), " ; nu(u) -> u[j]", "");
  CHECK(code_of([&] { parse_rule_table(text); }) == errc::rule_table_invalid);

  std::string off = replace_line(builtin_table("xcl"), "rule I |- fun t -> t",
                                 "rule I |- fun t -> t ; nu(u) -> t");
  CHECK(code_of([&] { parse_rule_table(off); }) == errc::rule_table_invalid);
}

TEST_CASE("assembly rejects overlapping rules") {
  std::string text = replace_line(builtin_table("xcl"), "rule I |- fun t -> t\n",
                                  "rule I |- fun t -> t\nrule I |- fun t -> I\n");
  ParsedTable t = parse_rule_table(text);
  CHECK(code_of([&] { make_language("xcl", &t); }) == errc::rule_table_invalid);
}

TEST_CASE("assembly rejects arity disagreements") {
  std::string text = replace_line(builtin_table("xcl"), "rule K'(x) |- fun t -> x\n",
                                  "rule K'(x) |- fun t -> x\nrule K'(x, y) |- fun t -> x\n");
  ParsedTable t = parse_rule_table(text);
  CHECK(code_of([&] { make_language("xcl", &t); }) == errc::rule_table_invalid);
}

TEST_CASE("assembly rejects bad distribution weights") {
  std::string text = replace_line(builtin_table("xptcl"), "red 1/2: x, 1/2: y",
                                  "red 1/3: x, 1/3: y");
  ParsedTable t = parse_rule_table(text);
  CHECK(code_of([&] { make_language("xptcl", &t); }) == errc::malformed_distribution);
}

TEST_CASE("assembly rejects unbound metavariables") {
  // a free identifier in a conclusion is an operator with no declared rank
  std::string text =
      replace_line(builtin_table("xcl"), "rule app(x, y) [x -> x'] |- red x' y",
                   "rule app(x, y) [x -> x'] |- red x' z");
  ParsedTable t = parse_rule_table(text);
  CHECK(code_of([&] { make_language("xcl", &t); }) == errc::rule_table_invalid);

  // an unbound type parameter in a family subscript fires at instantiation
  std::string ty = replace_line(builtin_table("xtcl"), "rule K[a,b] |- fun t -> K'[a,b](t)",
                                "rule K[a,b] |- fun t -> K'[a,c](t)");
  ParsedTable t2 = parse_rule_table(ty);
  Language l2 = make_language("xtcl", &t2);
  OperationalModel m2(*l2.law);
  CHECK(code_of([&] { m2(l2.parse("K")).fun(l2.parse("e")); }) == errc::unbound_metavariable);

  // an unbound environment index fires when the substitution observable runs
  std::string ix = replace_line(builtin_table("lambda"), "rule var[m,j] |- ! ; nu(u) -> u[j]",
                                "rule var[m,j] |- ! ; nu(u) -> u[k]");
  ParsedTable t3 = parse_rule_table(ix);
  Language l3 = make_language("lambda", &t3);
  OperationalModel m3(*l3.law);
  Term v = l3.parse_open("x", {"x"});
  CHECK(code_of([&] {
          m3(v).subst({l3.parse("\\y. y")}, l3.sample_sorts[0]);
        }) == errc::unbound_metavariable);
}

TEST_CASE("assembly enforces relative flatness") {
  // K (rank 1, same as K') in a non-head position of K's conclusion
  std::string text = replace_line(builtin_table("xcl"), "rule K'(x) |- fun t -> x",
                                  "rule K'(x) |- fun t -> K (I t)");
  ParsedTable t = parse_rule_table(text);
  CHECK(code_of([&] { make_language("xcl", &t); }) == errc::flatness_violation);
}

TEST_CASE("a dropped rule surfaces as no_rule_applies at run time") {
  std::string text =
      replace_line(builtin_table("xcl"), "rule app(x, y) [x => g] |- red g(y)\n", "");
  ParsedTable t = parse_rule_table(text);
  Language lang = make_language("xcl", &t);
  OperationalModel model(*lang.law);
  CHECK(code_of([&] { model(lang.parse("I K")); }) == errc::no_rule_applies);
}

TEST_CASE("semantic mutations change behavior observably") {
  // the projection combinator K' returning its probe instead of its payload
  std::string text = replace_line(builtin_table("xcl"), "rule K'(x) |- fun t -> x",
                                  "rule K'(x) |- fun t -> t");
  ParsedTable t = parse_rule_table(text);
  Language mut = make_language("xcl", &t);
  Language base = make_language("xcl");

  OperationalModel mm(*mut.law), bm(*base.law);
  Term kks = base.parse("K K S");
  Trace tb = run_trace(bm, kks, 10);
  Trace tm = run_trace(mm, kks, 10);
  REQUIRE(tb.stop == TraceStop::value);
  REQUIRE(tm.stop == TraceStop::value);
  // builtin K' projects the stored argument K, the mutation projects the probe S
  CHECK(base.print(tb.entries.back().term) == "K");
  CHECK(base.print(tm.entries.back().term) == "S");
}

TEST_CASE("assembled laws keep their schematic table printable") {
  Language lang = make_language("xtcl");
  CHECK(print_rule_table(*lang.law) == builtin_table("xtcl"));
}
