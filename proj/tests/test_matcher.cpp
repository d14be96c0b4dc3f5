#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "litegui/matcher.hpp"
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

GuiAction click_at(int x, int y) {
  GuiAction a;
  a.type = ActionType::click;
  a.position = Position::point(x, y);
  return a;
}

GuiAction click_box(int x0, int y0, int x1, int y1) {
  GuiAction a;
  a.type = ActionType::click;
  a.position = Position::box(x0, y0, x1, y1);
  return a;
}

}  // namespace

TEST_CASE("match_type is the equality indicator") {
  CHECK(match_type(ActionType::click, ActionType::click) == 1);
  CHECK(match_type(ActionType::click, ActionType::double_click) == 0);
  CHECK(match_type(ActionType::key, ActionType::text_input) == 0);
}

TEST_CASE("match_position geometry") {
  const Box box{100, 100, 300, 200};  // center (200,150), half 100x50

  SECTION("center scores 1.0") {
    CHECK(match_position(Position::point(200, 150), box) == 1.0);
  }
  SECTION("central region scores 1.0") {
    // Central region at factor 0.5: |dx| <= 50, |dy| <= 25.
    CHECK(match_position(Position::point(250, 175), box) == 1.0);
    CHECK(match_position(Position::point(151, 126), box) == 1.0);
  }
  SECTION("inside the box interpolates linearly toward 0.5 at the edge") {
    // rho = 0.75 along x: dx = 75 -> 1 - 0.5*(0.75-0.5)/0.5 = 0.75.
    CHECK(match_position(Position::point(275, 150), box) ==
          Approx(0.75).margin(1e-12));
    // On the boundary itself: rho = 1 -> 0.5.
    CHECK(match_position(Position::point(300, 150), box) ==
          Approx(0.5).margin(1e-12));
  }
  SECTION("outside decays exponentially from 0.5") {
    // d = 200 to the right edge.
    CHECK(match_position(Position::point(500, 150), box) ==
          Approx(0.5 * std::exp(-1.0)).margin(1e-9));
    // Diagonal distance from the corner.
    const double d = std::hypot(60.0, 80.0);
    CHECK(match_position(Position::point(360, 280), box) ==
          Approx(0.5 * std::exp(-d / 200.0)).margin(1e-12));
  }
  SECTION("continuity across the boundary") {
    const double inside = match_position(Position::point(300, 150), box);
    const double outside = match_position(Position::point(301, 150), box);
    CHECK(inside == Approx(0.5).margin(1e-9));
    CHECK(outside == Approx(0.5 * std::exp(-1.0 / 200.0)).margin(1e-12));
    CHECK(std::abs(inside - 0.5 * std::exp(0.0)) < 1e-9);
  }
  SECTION("absent prediction scores 0") {
    CHECK(match_position(std::nullopt, box) == 0.0);
  }
  SECTION("box predictions reduce to their center") {
    CHECK(match_position(Position::box(190, 140, 210, 160), box) == 1.0);
  }
  SECTION("degenerate target box still behaves") {
    const Box point_box{50, 50, 50, 50};
    CHECK(match_position(Position::point(50, 50), point_box) == 1.0);
    CHECK(match_position(Position::point(50, 250), point_box) ==
          Approx(0.5 * std::exp(-1.0)).margin(1e-12));
  }
}

TEST_CASE("match_value levels") {
  CHECK(match_value(std::string("www.example.com"), "www.example.com") == 1.0);
  CHECK(match_value(std::string("example.com"), "www.example.com") == 0.5);
  CHECK(match_value(std::string("hello"), "goodbye") == 0.0);
  CHECK(match_value(std::nullopt, "anything") == 0.0);
  CHECK(match_value(std::string("  Enter "), "enter") == 1.0);

  SECTION("partial rule agrees with a brute-force containment oracle") {
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
      const std::string a = oracles::random_word(rng);
      const std::string b = oracles::random_word(rng);
      const std::string na = detail::normalize_value(a);
      const std::string nb = detail::normalize_value(b);
      double expected;
      if (na == nb)
        expected = 1.0;
      else if (!na.empty() && !nb.empty() &&
               (na.find(nb) != std::string::npos ||
                nb.find(na) != std::string::npos))
        expected = 0.5;
      else
        expected = 0.0;
      CHECK(match_value(a, b) == expected);
    }
  }
}

TEST_CASE("phi_gui combines components as a normalized weighted mean") {
  GuiAction target;
  target.type = ActionType::click;
  target.position = Position::box(100, 100, 300, 200);

  SECTION("exact reproduction scores 1.0") {
    const MatchScore s = phi_gui(make_output(click_at(200, 150)), target);
    CHECK(s.total == 1.0);
    CHECK(s.m_type == 1);
    CHECK(s.m_position == 1.0);
    CHECK_FALSE(s.m_value.has_value());
  }
  SECTION("worked example: correct type, point at d=200 outside") {
    const MatchScore s = phi_gui(make_output(click_at(500, 150)), target);
    const double expect = (1.0 + 0.5 * std::exp(-1.0)) / 2.0;
    CHECK(s.total == Approx(expect).margin(1e-9));
    CHECK(s.total == Approx(0.59197).margin(1e-5));
  }
  SECTION("parse failure scores zero with zeroed components") {
    GuiAction with_value = target;
    with_value.value = "ok";
    const ParseResult fail =
        ParseFailure{ParseErrorKind::malformed_structure, "x"};
    const MatchScore s = phi_gui(fail, with_value);
    CHECK(s.total == 0.0);
    CHECK(s.m_type == 0);
    CHECK(s.m_position == 0.0);
    CHECK(s.m_value == 0.0);
  }
  SECTION("components are absent exactly when annotations are absent") {
    GuiAction value_only;
    value_only.type = ActionType::text_input;
    value_only.value = "laptop";
    GuiAction pred;
    pred.type = ActionType::text_input;
    pred.value = "laptop";
    const MatchScore s = phi_gui(make_output(pred), value_only);
    CHECK_FALSE(s.m_position.has_value());
    REQUIRE(s.m_value.has_value());
    CHECK(s.total == 1.0);
  }
  SECTION("weight scaling leaves the total unchanged") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
      const ParseResult out = make_output(oracles::random_action(rng));
      const GuiAction tgt = oracles::random_action(rng, true);
      for (double c : {0.1, 1.0, 10.0}) {
        MatchConfig base, scaled;
        scaled.weights.w_type = base.weights.w_type * c;
        scaled.weights.w_position = base.weights.w_position * c;
        scaled.weights.w_value = base.weights.w_value * c;
        CHECK(std::abs(phi_gui(out, tgt, base).total -
                       phi_gui(out, tgt, scaled).total) < 1e-12);
      }
    }
  }
  SECTION("total is bounded in [0,1] for random inputs") {
    Rng rng(6);
    for (int i = 0; i < 500; ++i) {
      MatchConfig cfg;
      cfg.weights.w_type = 0.1 + rng.next_double() * 5;
      cfg.weights.w_position = rng.next_double() * 5;
      cfg.weights.w_value = rng.next_double() * 5;
      const double t = phi_gui(make_output(oracles::random_action(rng)),
                               oracles::random_action(rng, true), cfg)
                           .total;
      CHECK(t >= 0.0);
      CHECK(t <= 1.0);
    }
  }
}

TEST_CASE("multi_solution_reward is the max over the valid set") {
  const MatchConfig cfg;

  SECTION("an exact match anywhere in the set yields 1.0") {
    GuiAction a1 = click_box(10, 10, 50, 50);
    GuiAction a2 = click_box(200, 200, 260, 240);
    GuiAction a3 = click_box(500, 500, 560, 540);
    const ValidActionSet set({a1, a2, a3});
    CHECK(multi_solution_reward(make_output(click_at(230, 220)), set, cfg) ==
          1.0);
  }
  SECTION("singleton set equals phi_gui") {
    Rng rng(9);
    for (int i = 0; i < 100; ++i) {
      const GuiAction tgt = oracles::random_action(rng, true);
      const ParseResult out = make_output(oracles::random_action(rng));
      const ValidActionSet set({tgt});
      CHECK(multi_solution_reward(out, set, cfg) ==
            phi_gui(out, tgt, cfg).total);
    }
  }
  SECTION("two-path file-open example: the matched variant dominates") {
    // Open a file either by double-clicking it or by selecting it and
    // pressing Enter; the output plays the select+Enter variant.
    GuiAction dbl;
    dbl.type = ActionType::double_click;
    dbl.position = Position::box(200, 200, 360, 260);
    GuiAction enter;
    enter.type = ActionType::key;
    enter.value = "Enter";
    const ValidActionSet both({dbl, enter});
    const ValidActionSet only_enter({enter});
    GuiAction played;
    played.type = ActionType::key;
    played.value = "Enter";
    const ParseResult out = make_output(played);
    CHECK(multi_solution_reward(out, both, cfg) ==
          multi_solution_reward(out, only_enter, cfg));
    CHECK(multi_solution_reward(out, both, cfg) ==
          oracles::brute_force_max_reward(out, both, cfg));
  }
  SECTION("oracle equivalence on random instances") {
    Rng rng(10);
    for (int i = 0; i < 1000; ++i) {
      const ParseResult out = make_output(oracles::random_action(rng));
      const ValidActionSet set = oracles::random_action_set(rng);
      CHECK(std::abs(multi_solution_reward(out, set, cfg) -
                     oracles::brute_force_max_reward(out, set, cfg)) <
            1e-12);
    }
  }
  SECTION("monotone in the set: supersets never reduce the reward") {
    Rng rng(12);
    for (int i = 0; i < 1000; ++i) {
      const ParseResult out = make_output(oracles::random_action(rng));
      const ValidActionSet big = oracles::random_action_set(rng, 5);
      std::vector<GuiAction> subset(big.actions().begin(),
                                    big.actions().begin() +
                                        1 + rng.uniform_below(big.size()));
      const ValidActionSet small(std::move(subset));
      CHECK(multi_solution_reward(out, small, cfg) <=
            multi_solution_reward(out, big, cfg) + 1e-15);
    }
  }
}
