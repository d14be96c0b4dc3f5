#include <catch2/catch_amalgamated.hpp>

#include "litegui/guidance.hpp"
#include "oracles.hpp"

using namespace litegui;
using Catch::Approx;

namespace {

ParseResult make_output(GuiAction action) {
  StructuredOutput o;
  o.reasoning = "r";
  o.subtasks = {Subtask{"s", false}};
  o.action = std::move(action);
  o.raw_text = canonical_serialize(o);
  return ParseResult(std::move(o));
}

ValidActionSet two_click_set() {
  GuiAction a;
  a.type = ActionType::click;
  a.position = Position::box(100, 100, 200, 160);
  GuiAction b;
  b.type = ActionType::click;
  b.position = Position::box(800, 500, 900, 560);
  return ValidActionSet({a, b});
}

}  // namespace

TEST_CASE("single-GT guidance samples uniformly under a seed") {
  SECTION("K=1 returns the only action for any seed") {
    GuiAction only;
    only.type = ActionType::key;
    only.value = "Enter";
    const ValidActionSet set({only});
    for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
      const Guidance g = select_single_gt(set, seed);
      REQUIRE(g.reference_actions.size() == 1);
      CHECK(g.reference_actions[0] == only);
    }
  }
  SECTION("fixed seed selects a stable index") {
    Rng rng(3);
    const ValidActionSet set = oracles::random_action_set(rng, 3);
    const Guidance first = select_single_gt(set, 12345);
    const Guidance second = select_single_gt(set, 12345);
    CHECK(first.matched_index == second.matched_index);
    CHECK(first.reference_actions[0] == second.reference_actions[0]);
  }
  SECTION("empirical frequencies over 30000 seeded draws are uniform") {
    GuiAction a, b, c;
    a.type = ActionType::key;
    a.value = "a";
    b.type = ActionType::key;
    b.value = "b";
    c.type = ActionType::key;
    c.value = "c";
    const ValidActionSet set({a, b, c});
    int counts[3] = {0, 0, 0};
    const int n = 30000;
    for (int i = 0; i < n; ++i)
      counts[*select_single_gt(set, mix_seed(900, i)).matched_index] += 1;
    for (int k = 0; k < 3; ++k)
      CHECK(double(counts[k]) / n == Approx(1.0 / 3).margin(0.02));
  }
  SECTION("empty sets are impossible by construction") {
    CHECK_THROWS(ValidActionSet({}));
  }
}

TEST_CASE("multi-GT guidance is the whole set in annotation order") {
  Rng rng(4);
  const ValidActionSet set = oracles::random_action_set(rng, 4);
  const Guidance g = select_multi_gt(set);
  REQUIRE(g.reference_actions.size() == set.size());
  for (std::size_t i = 0; i < set.size(); ++i)
    CHECK(g.reference_actions[i] == set[i]);
}

TEST_CASE("most-matched guidance follows the matcher argmax") {
  const MatchConfig cfg;

  SECTION("an exact reproduction of annotation #2 selects it with score 1") {
    const ValidActionSet set = two_click_set();
    const Guidance g =
        select_most_matched_gt(make_output([&] {
                                 GuiAction a;
                                 a.type = ActionType::click;
                                 a.position = Position::point(850, 530);
                                 return a;
                               }()),
                               set, cfg);
    CHECK(g.matched_index == 1);
    CHECK(g.matched_score == Approx(1.0));
    CHECK_FALSE(g.fallback);
  }
  SECTION("parse failure falls back to the first annotation") {
    const ValidActionSet set = two_click_set();
    const Guidance g = select_most_matched_gt(
        ParseFailure{ParseErrorKind::malformed_structure, "x"}, set, cfg);
    CHECK(g.matched_index == 0);
    CHECK(g.fallback);
    CHECK(g.reference_actions[0] == set[0]);
  }
  SECTION("the nearer box wins when types agree") {
    const ValidActionSet set = two_click_set();
    // Point (700,450): d to box #1 (100..200 x 100..160) is much larger than
    // d to box #2 (800..900 x 500..560). Hand-evaluate both position scores.
    GuiAction pred;
    pred.type = ActionType::click;
    pred.position = Position::point(700, 450);
    const double d1 = std::hypot(700.0 - 200.0, 450.0 - 160.0);
    const double d2 = std::hypot(800.0 - 700.0, 500.0 - 450.0);
    const double m1 = 0.5 * std::exp(-d1 / 200.0);
    const double m2 = 0.5 * std::exp(-d2 / 200.0);
    REQUIRE(m2 > m1);
    const Guidance g = select_most_matched_gt(make_output(pred), set, cfg);
    CHECK(g.matched_index == 1);
    CHECK(*g.matched_score == Approx((1.0 + m2) / 2.0).margin(1e-12));
  }
  SECTION("ties break toward the lowest annotation index") {
    GuiAction a;
    a.type = ActionType::key;
    a.value = "x";
    GuiAction b;
    b.type = ActionType::key;
    b.value = "y";
    const ValidActionSet set({a, b});
    GuiAction pred;
    pred.type = ActionType::scroll_up;
    pred.position = Position::point(1, 1);
    const Guidance g = select_most_matched_gt(make_output(pred), set, cfg);
    CHECK(g.matched_index == 0);
  }
  SECTION("argmax attains the multi-solution reward") {
    Rng rng(8);
    for (int i = 0; i < 500; ++i) {
      const ParseResult out = make_output(oracles::random_action(rng));
      const ValidActionSet set = oracles::random_action_set(rng);
      const Guidance g = select_most_matched_gt(out, set, cfg);
      CHECK(*g.matched_score ==
            Approx(multi_solution_reward(out, set, cfg)).margin(1e-12));
    }
  }
  SECTION("weight scaling does not change the argmax") {
    Rng rng(13);
    for (int i = 0; i < 300; ++i) {
      const ParseResult out = make_output(oracles::random_action(rng));
      const ValidActionSet set = oracles::random_action_set(rng);
      MatchConfig scaled;
      scaled.weights.w_type *= 10.0;
      scaled.weights.w_position *= 10.0;
      scaled.weights.w_value *= 10.0;
      CHECK(select_most_matched_gt(out, set, cfg).matched_index ==
            select_most_matched_gt(out, set, scaled).matched_index);
    }
  }
}

TEST_CASE("with K=1 every variant yields the same reference action") {
  GuiAction only;
  only.type = ActionType::text_input;
  only.value = "ls -la";
  const ValidActionSet set({only});
  const ParseResult out = make_output(only);
  CHECK(select_single_gt(set, 7).reference_actions[0] == only);
  CHECK(select_multi_gt(set).reference_actions ==
        std::vector<GuiAction>{only});
  CHECK(select_most_matched_gt(out, set).reference_actions[0] == only);
}
