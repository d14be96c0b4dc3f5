#include <catch2/catch_amalgamated.hpp>

#include "litegui/action.hpp"
#include "litegui/rng.hpp"
#include "oracles.hpp"

using namespace litegui;

TEST_CASE("parse_output accepts a well-formed CLICK record") {
  const std::string text =
      R"({"action":{"position":[521,41],"type":"CLICK"},)"
      R"("reasoning":"the address bar is visible","subtasks":["[ ] open the site"]})";
  const ParseResult r = parse_output(text);
  REQUIRE(r.ok());
  CHECK(r.output().action.type == ActionType::click);
  REQUIRE(r.output().action.position.has_value());
  CHECK(r.output().action.position->form == Position::Form::point);
  CHECK(r.output().action.position->x0 == 521);
  CHECK(r.output().action.position->y0 == 41);
  CHECK(r.output().raw_text == text);
  CHECK(r.output().subtasks.size() == 1);
  CHECK_FALSE(r.output().subtasks[0].done);
}

TEST_CASE("parse_output failure causes are enumerated") {
  SECTION("empty string is malformed structure") {
    const ParseResult r = parse_output("");
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure().kind == ParseErrorKind::malformed_structure);
  }
  SECTION("unknown action type") {
    const ParseResult r = parse_output(
        R"({"action":{"position":[1,2],"type":"HOVER"},"reasoning":"x","subtasks":["[ ] a"]})");
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure().kind == ParseErrorKind::unknown_action_type);
  }
  SECTION("missing required fields are schema violations") {
    const char* cases[] = {
        R"({"reasoning":"x","subtasks":["[ ] a"]})",
        R"({"action":{"type":"WAIT"},"subtasks":["[ ] a"]})",
        R"({"action":{"type":"WAIT"},"reasoning":"x"})",
        R"({"action":{"type":"WAIT"},"reasoning":"x","subtasks":[]})",
        R"({"action":{"type":"TEXT_INPUT"},"reasoning":"x","subtasks":["[ ] a"]})",
        R"({"action":{"type":"CLICK"},"reasoning":"x","subtasks":["[ ] a"]})",
    };
    for (const char* text : cases) {
      const ParseResult r = parse_output(text);
      INFO(text);
      REQUIRE_FALSE(r.ok());
      CHECK(r.failure().kind == ParseErrorKind::schema_violation);
    }
  }
  SECTION("WAIT must not carry position or value") {
    const ParseResult r = parse_output(
        R"({"action":{"position":[1,2],"type":"WAIT"},"reasoning":"x","subtasks":["[ ] a"]})");
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure().kind == ParseErrorKind::schema_violation);
  }
  SECTION("DRAG requires position_end and nothing else may carry it") {
    CHECK_FALSE(parse_output(
        R"({"action":{"position":[1,2],"type":"DRAG"},"reasoning":"x","subtasks":["[ ] a"]})")
        .ok());
    CHECK_FALSE(parse_output(
        R"({"action":{"position":[1,2],"position_end":[3,4],"type":"CLICK"},"reasoning":"x","subtasks":["[ ] a"]})")
        .ok());
    CHECK(parse_output(
        R"({"action":{"position":[1,2],"position_end":[3,4],"type":"DRAG"},"reasoning":"x","subtasks":["[ ] a"]})")
        .ok());
  }
  SECTION("coordinates must be non-negative integers in valid boxes") {
    CHECK_FALSE(parse_output(
        R"({"action":{"position":[-1,2],"type":"CLICK"},"reasoning":"x","subtasks":["[ ] a"]})")
        .ok());
    CHECK_FALSE(parse_output(
        R"({"action":{"position":[1.5,2],"type":"CLICK"},"reasoning":"x","subtasks":["[ ] a"]})")
        .ok());
    CHECK_FALSE(parse_output(
        R"({"action":{"position":[9,2,3,4],"type":"CLICK"},"reasoning":"x","subtasks":["[ ] a"]})")
        .ok());
  }
  SECTION("unknown keys are rejected") {
    CHECK_FALSE(parse_output(
        R"({"action":{"type":"WAIT"},"reasoning":"x","subtasks":["[ ] a"],"extra":1})")
        .ok());
    CHECK_FALSE(parse_output(
        R"({"action":{"type":"WAIT","speed":2},"reasoning":"x","subtasks":["[ ] a"]})")
        .ok());
  }
  SECTION("subtask entries need a completion marker") {
    CHECK_FALSE(parse_output(
        R"({"action":{"type":"WAIT"},"reasoning":"x","subtasks":["open the file"]})")
        .ok());
    const ParseResult r = parse_output(
        R"({"action":{"type":"WAIT"},"reasoning":"x","subtasks":["[X] done part","[ ] open part"]})");
    REQUIRE(r.ok());
    CHECK(r.output().subtasks[0].done);
    CHECK_FALSE(r.output().subtasks[1].done);
  }
}

TEST_CASE("canonical serialization is deterministic and order-insensitive") {
  StructuredOutput o;
  o.reasoning = "waiting for the loader";
  o.subtasks = {Subtask{"wait for the page", false}};
  o.action.type = ActionType::wait;

  const std::string a = canonical_serialize(o);
  const std::string b = canonical_serialize(o);
  CHECK(a == b);

  const std::string shuffled =
      R"({"subtasks":["[ ] wait for the page"],"action":{"type":"WAIT"},"reasoning":"waiting for the loader"})";
  const ParseResult r = parse_output(shuffled);
  REQUIRE(r.ok());
  CHECK(canonical_serialize(r.output()) == a);
}

TEST_CASE("round-trip: parse(canonical_serialize(o)) == o for random outputs") {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const StructuredOutput o = oracles::random_output(rng);
    const std::string text = canonical_serialize(o);
    const ParseResult r = parse_output(text);
    REQUIRE(r.ok());
    CHECK(r.output() == o);
    CHECK(canonical_serialize(r.output()) == text);
  }
}

TEST_CASE("parse_output is total over fuzzed inputs") {
  Rng rng(77);
  for (int i = 0; i < 2000; ++i) {
    std::string text;
    if (rng.bernoulli(0.5)) {
      text = canonical_serialize(oracles::random_output(rng));
      const std::size_t pos = rng.uniform_below(text.size());
      text[pos] = char('!' + rng.uniform_below(90));
    } else {
      const std::size_t n = rng.uniform_below(60);
      for (std::size_t k = 0; k < n; ++k)
        text.push_back(char(32 + rng.uniform_below(95)));
    }
    CHECK_NOTHROW(parse_output(text));
  }
}

TEST_CASE("ValidActionSet enforces K >= 1 and canonical distinctness") {
  CHECK_THROWS(ValidActionSet({}));

  GuiAction a;
  a.type = ActionType::click;
  a.position = Position::box(10, 10, 30, 30);
  GuiAction b = a;
  CHECK_THROWS(ValidActionSet({a, b}));

  GuiAction c = a;
  c.position = Position::box(10, 10, 30, 31);
  const ValidActionSet set({a, c});
  CHECK(set.size() == 2);
  CHECK(set.first_only().size() == 1);
  CHECK(set.first_only()[0] == a);
}
