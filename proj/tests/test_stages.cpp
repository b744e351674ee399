#include <catch2/catch_amalgamated.hpp>

#include "hogsos/stages.hpp"

using namespace hogsos;

namespace {

std::vector<std::string> stage_strings(GuardedShape shape, int n) {
  std::vector<std::string> out;
  for (const StageElement& e : enumerate_stage(shape, n)) out.push_back(stage_elem_str(e));
  return out;
}

}  // namespace

TEST_CASE("only the effect-guarded deterministic and powerset languages have a stage shape") {
  CHECK(guarded_shape("xcl") == GuardedShape::deterministic);
  CHECK(guarded_shape("xnccl") == GuardedShape::powerset);
  CHECK_FALSE(guarded_shape("xtcl").has_value());
  CHECK_FALSE(guarded_shape("xptcl").has_value());
  CHECK_FALSE(guarded_shape("lambda").has_value());
}

TEST_CASE("stage zero splits into a guarded step and a bare function") {
  CHECK(stage_strings(GuardedShape::deterministic, 0) ==
        std::vector<std::string>{"red{0}", "fun()"});
  CHECK(stage_strings(GuardedShape::powerset, 0) ==
        std::vector<std::string>{"red{}", "red{0}", "fun()"});
}

TEST_CASE("stage one lists every step target and every unary function table") {
  // below stage one there is nothing to be compatible with, so all maps count
  CHECK(stage_strings(GuardedShape::deterministic, 1) ==
        std::vector<std::string>{"red{0}", "red{1}", "fun(f0=[0,0])", "fun(f0=[0,1])",
                                 "fun(f0=[1,0])", "fun(f0=[1,1])"});

  auto pow1 = enumerate_stage(GuardedShape::powerset, 1);
  CHECK(pow1.size() == 35);
  int funs = 0;
  for (const StageElement& e : pow1) funs += e.is_fun;
  CHECK(funs == 27);              // all maps on the 3-element stage zero
  CHECK(pow1.size() - funs == 8); // all subsets of stage zero
}

TEST_CASE("stage two keeps only restriction-compatible function tuples") {
  StageTower z = enumerate_stages(GuardedShape::deterministic, 2);
  REQUIRE(z.stages.size() == 3);
  CHECK(z.stages[0].size() == 2);
  CHECK(z.stages[1].size() == 6);
  CHECK(z.stages[2].size() == 5446);

  int funs = 0;
  for (const StageElement& e : z.stages[2].elems) funs += e.is_fun;
  CHECK(z.stages[2].size() - funs == 6);  // one step target per stage-one element

  // every retained tuple commutes with the restriction maps
  const std::vector<int>& d1 = z.stages[1].down;
  for (const StageElement& e : z.stages[2].elems) {
    if (!e.is_fun) continue;
    REQUIRE(e.fs.size() == 2);
    REQUIRE(e.fs[0].size() == 2);
    REQUIRE(e.fs[1].size() == 6);
    for (int x = 0; x < 6; ++x) CHECK(d1[e.fs[1][x]] == e.fs[0][d1[x]]);
  }
}

TEST_CASE("restriction maps are total, surjective, and forgetful") {
  StageTower z = enumerate_stages(GuardedShape::deterministic, 2);
  for (int k = 1; k <= 2; ++k) {
    CHECK(z.stages[k].down.size() == z.stages[k].elems.size());
    CHECK(restriction_surjective(z.stages[k], z.stages[k - 1].size()));
  }
  // stage one: both step elements restrict to the lone step, functions forget
  // their tables
  CHECK(z.stages[1].down == std::vector<int>{0, 0, 1, 1, 1, 1});

  StageTower p = enumerate_stages(GuardedShape::powerset, 1);
  CHECK(restriction_surjective(p.stages[1], p.stages[0].size()));
}

TEST_CASE("iterated approximants agree with the stage limit below the iteration index") {
  StageTower z = enumerate_stages(GuardedShape::deterministic, 2);
  for (int n = 1; n <= 3; ++n) {
    StageTower ap = approximant(GuardedShape::deterministic, n);
    REQUIRE(ap.stages.size() == static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
      CHECK(ap.stages[k].elems == z.stages[k].elems);
      CHECK(ap.stages[k].down == z.stages[k].down);
    }
  }

  StageTower zp = enumerate_stages(GuardedShape::powerset, 1);
  StageTower app = approximant(GuardedShape::powerset, 2);
  CHECK(app.stages[1].elems == zp.stages[1].elems);

  // the zeroth iterate is the terminal seed
  CHECK(approximant(GuardedShape::deterministic, 0).stages[0].size() == 1);
}

TEST_CASE("stage enumeration refuses astronomical requests") {
  auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const error& e) {
      return e.code();
    }
    return errc::unsupported;
  };

  CHECK(code_of([] { enumerate_stage(GuardedShape::deterministic, 3); }) ==
        errc::stage_too_large);
  CHECK(code_of([] { enumerate_stage(GuardedShape::deterministic, -1); }) ==
        errc::stage_too_large);
  StageLimits wide;
  wide.max_stage = 5;
  CHECK(code_of([&] { enumerate_stage(GuardedShape::powerset, 2, wide); }) ==
        errc::stage_too_large);
  CHECK(code_of([] { approximant(GuardedShape::deterministic, 4); }) == errc::stage_too_large);

  // raising the element limit is not enough: the powerset mask still overflows
  wide.max_elems = 1000000000;
  CHECK(code_of([&] { enumerate_stage(GuardedShape::powerset, 2, wide); }) ==
        errc::stage_too_large);
}
