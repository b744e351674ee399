#include <catch2/catch_amalgamated.hpp>

#include "hogsos/behavior.hpp"

using namespace hogsos;

namespace {
const auto int_less = [](int a, int b) { return a < b; };
const auto int_eq = [](int a, int b) { return a == b; };
}  // namespace

TEST_CASE("rational helpers stay exact") {
  CHECK(rat(1, 2) + rat(1, 3) == rat(5, 6));
  CHECK(rat(2, 4) == rat(1, 2));
  CHECK(pow2_inv(0) == 1);
  CHECK(pow2_inv(3) == rat(1, 8));
  CHECK(rational_str(rat(5, 6)) == "5/6");
  CHECK(rational_str(rat(4, 2)) == "2");
  CHECK(parse_rational("7/21") == rat(1, 3));
  CHECK(parse_rational("3") == 3);
  CHECK_THROWS_AS(parse_rational("x/2"), error);
  CHECK_THROWS_AS(parse_rational("1/0"), error);
  CHECK_THROWS_AS(rat(1, 0), error);
}

TEST_CASE("deterministic bags hold exactly one successor") {
  EffectBag<int> b = make_deterministic(7);
  CHECK(b.effect == Effect::deterministic);
  REQUIRE(b.items.size() == 1);
  CHECK(b.items[0].first == 1);
  CHECK(b.items[0].second == 7);
}

TEST_CASE("distributions normalize, merge and validate") {
  EffectBag<int> b =
      make_distribution<int>({{rat(1, 4), 3}, {rat(1, 2), 1}, {rat(1, 4), 3}}, int_less);
  REQUIRE(b.items.size() == 2);
  CHECK(b.items[0].second == 1);
  CHECK(b.items[0].first == rat(1, 2));
  CHECK(b.items[1].second == 3);
  CHECK(b.items[1].first == rat(1, 2));  // the two quarters merged

  CHECK_THROWS_AS(make_distribution<int>({{rat(1, 2), 1}}, int_less), error);
  CHECK_THROWS_AS(make_distribution<int>({{rat(3, 2), 1}, {rat(-1, 2), 2}}, int_less), error);
}

TEST_CASE("powerset bags deduplicate and sort") {
  EffectBag<int> b = make_powerset<int>({5, 1, 5, 3, 1}, int_less);
  REQUIRE(b.items.size() == 3);
  CHECK(b.items[0].second == 1);
  CHECK(b.items[1].second == 3);
  CHECK(b.items[2].second == 5);
}

TEST_CASE("behavior factories carry one variant") {
  Behavior<int> t = Behavior<int>::terminal();
  CHECK(t.tag == StepTag::terminal);
  CHECK_FALSE(t.has_subst());

  Behavior<int> r = Behavior<int>::reduct(make_deterministic(1));
  CHECK(r.tag == StepTag::reduct);

  Behavior<int> f = Behavior<int>::function([](const int& x) { return x + 1; });
  CHECK(f.tag == StepTag::function);
  CHECK(f.fun(4) == 5);

  f.subst = [](const std::vector<int>& env, const Sort&) { return env.empty() ? 0 : env[0]; };
  CHECK(f.has_subst());
  CHECK(f.subst({9}, Sort("tm")) == 9);
}

TEST_CASE("covariant map merges weights of identified states") {
  Behavior<int> r = Behavior<int>::reduct(
      make_distribution<int>({{rat(1, 2), 1}, {rat(1, 2), 2}}, int_less));
  auto constant = map_cov(r, [](const int&) { return 0; }, int_less);
  REQUIRE(constant.bag.items.size() == 1);
  CHECK(constant.bag.items[0].first == 1);  // point mass

  Behavior<int> f = Behavior<int>::function([](const int& x) { return 2 * x; });
  auto g = map_cov(f, [](const int& y) { return y + 1; }, int_less);
  CHECK(g.fun(10) == 21);
}

TEST_CASE("contravariant map precomposes the argument side") {
  Behavior<int> f = Behavior<int>::function([](const int& x) { return x * x; });
  BehaviorNode<std::string, int> g =
      map_contra<int, int, std::function<int(const std::string&)>, std::string>(
          f, [](const std::string& s) { return static_cast<int>(s.size()); });
  CHECK(g.fun("abcd") == 16);
}

TEST_CASE("effect_equal: deterministic") {
  auto a = make_deterministic(1);
  auto b = make_deterministic(1);
  auto c = make_deterministic(2);
  CHECK(effect_equal(a, b, int_eq));
  CHECK_FALSE(effect_equal(a, c, int_eq));
}

TEST_CASE("effect_equal: exact class masses for distributions") {
  auto ab = make_distribution<int>({{rat(1, 2), 1}, {rat(1, 2), 2}}, int_less);
  auto ba = make_distribution<int>({{rat(1, 2), 2}, {rat(1, 2), 1}}, int_less);
  auto skew = make_distribution<int>({{rat(1, 3), 1}, {rat(2, 3), 2}}, int_less);
  CHECK(effect_equal(ab, ba, int_eq));
  CHECK_FALSE(effect_equal(ab, skew, int_eq));

  // classes induced by a coarser equivalence: everything mod 2
  auto mod2 = [](int a, int b) { return a % 2 == b % 2; };
  auto x = make_distribution<int>({{rat(1, 2), 1}, {rat(1, 2), 2}}, int_less);
  auto y = make_distribution<int>({{rat(1, 2), 3}, {rat(1, 2), 4}}, int_less);
  CHECK(effect_equal(x, y, mod2));

  auto det = make_deterministic(1);
  CHECK_FALSE(effect_equal(det, ab, int_eq));  // effect mismatch
}

TEST_CASE("effect_equal: mutual coverage for powersets") {
  auto ab = make_powerset<int>({1, 2}, int_less);
  auto ba = make_powerset<int>({2, 1}, int_less);
  auto abc = make_powerset<int>({1, 2, 3}, int_less);
  CHECK(effect_equal(ab, ba, int_eq));
  CHECK_FALSE(effect_equal(ab, abc, int_eq));
  CHECK_FALSE(effect_equal(abc, ab, int_eq));
}

TEST_CASE("tag and effect names are serialization-stable") {
  CHECK(std::string(step_tag_name(StepTag::terminal)) == "terminal");
  CHECK(std::string(step_tag_name(StepTag::reduct)) == "reduct");
  CHECK(std::string(step_tag_name(StepTag::function)) == "function");
  CHECK(std::string(effect_name(Effect::deterministic)) == "det");
  CHECK(std::string(effect_name(Effect::distribution)) == "dist");
  CHECK(std::string(effect_name(Effect::powerset)) == "pow");
}
