#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace litegui {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Action schema
//
// Canonical record format (one record per line, documented bit-exactly):
//
//   {"action":{"position":[x,y] or [x0,y0,x1,y1],
//              "position_end":[...]   (DRAG only),
//              "type":"CLICK",
//              "value":"..."          (optional)},
//    "reasoning":"...",
//    "subtasks":["[x] done entry","[ ] open entry", ...]}
//
// Keys are emitted in sorted order with no whitespace. Coordinates are
// non-negative integers. A two-element position array is a point, a
// four-element array is a box [x_min,y_min,x_max,y_max]. Subtask entries
// carry a leading completion marker: "[x] " done, "[ ] " not done.
// ---------------------------------------------------------------------------

enum class ActionType {
  click,
  right_click,
  double_click,
  drag,
  scroll_up,
  scroll_down,
  text_input,
  key,
  wait,
};

inline constexpr std::array<std::pair<ActionType, std::string_view>, 9>
    kActionTypeNames = {{
        {ActionType::click, "CLICK"},
        {ActionType::right_click, "RIGHT_CLICK"},
        {ActionType::double_click, "DOUBLE_CLICK"},
        {ActionType::drag, "DRAG"},
        {ActionType::scroll_up, "SCROLL_UP"},
        {ActionType::scroll_down, "SCROLL_DOWN"},
        {ActionType::text_input, "TEXT_INPUT"},
        {ActionType::key, "KEY"},
        {ActionType::wait, "WAIT"},
    }};

inline std::string_view to_string(ActionType t) {
  for (const auto& [k, name] : kActionTypeNames)
    if (k == t) return name;
  throw std::logic_error("unreachable action type");
}

inline std::optional<ActionType> action_type_from_string(std::string_view s) {
  for (const auto& [k, name] : kActionTypeNames)
    if (name == s) return k;
  return std::nullopt;
}

inline bool is_pointer_action(ActionType t) {
  switch (t) {
    case ActionType::click:
    case ActionType::right_click:
    case ActionType::double_click:
    case ActionType::drag:
    case ActionType::scroll_up:
    case ActionType::scroll_down:
      return true;
    default:
      return false;
  }
}

struct PointD {
  double x = 0.0;
  double y = 0.0;
};

// Axis-aligned rectangle in screen pixels, inclusive bounds.
struct Box {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  bool valid() const {
    return x_min >= 0 && y_min >= 0 && x_min <= x_max && y_min <= y_max;
  }
  PointD center() const {
    return {(x_min + x_max) / 2.0, (y_min + y_max) / 2.0};
  }
  bool contains(PointD p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  friend bool operator==(const Box&, const Box&) = default;
};

// Either a point or a box. Predictions are typically points; annotations
// carry boxes. The matcher reduces box predictions to their center.
struct Position {
  enum class Form { point, box };

  Form form = Form::point;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  static Position point(int x, int y) {
    if (x < 0 || y < 0)
      throw std::invalid_argument("Position: coordinates must be >= 0");
    Position p;
    p.form = Form::point;
    p.x0 = x;
    p.y0 = y;
    return p;
  }

  static Position box(int x_min, int y_min, int x_max, int y_max) {
    Position p;
    p.form = Form::box;
    p.x0 = x_min;
    p.y0 = y_min;
    p.x1 = x_max;
    p.y1 = y_max;
    if (!p.as_box().valid())
      throw std::invalid_argument("Position: invalid box bounds");
    return p;
  }

  static Position from_box(const Box& b) {
    return box(b.x_min, b.y_min, b.x_max, b.y_max);
  }

  Box as_box() const {
    if (form == Form::point) return Box{x0, y0, x0, y0};
    return Box{x0, y0, x1, y1};
  }

  // Point predictions map to themselves, boxes to their center.
  PointD reduced_point() const {
    if (form == Form::point) return {double(x0), double(y0)};
    return as_box().center();
  }

  friend bool operator==(const Position&, const Position&) = default;
};

struct Subtask {
  std::string description;
  bool done = false;

  friend bool operator==(const Subtask&, const Subtask&) = default;
};

// Executable GUI action: type, optional position(s), optional value.
struct GuiAction {
  ActionType type = ActionType::wait;
  std::optional<Position> position;
  std::optional<Position> position_end;  // DRAG destination
  std::optional<std::string> value;

  friend bool operator==(const GuiAction&, const GuiAction&) = default;
};

// Returns an empty string when the action satisfies the schema invariants,
// otherwise a description of the violation.
inline std::string validate_action(const GuiAction& a) {
  const bool needs_value =
      a.type == ActionType::text_input || a.type == ActionType::key;
  if (needs_value && (!a.value || a.value->empty()))
    return "action type " + std::string(to_string(a.type)) +
           " requires a non-empty value";
  if (a.type == ActionType::wait) {
    if (a.position || a.position_end) return "WAIT must not carry a position";
    if (a.value) return "WAIT must not carry a value";
  }
  if (is_pointer_action(a.type) && !a.position)
    return "pointer action " + std::string(to_string(a.type)) +
           " requires a position";
  if (a.type == ActionType::drag && !a.position_end)
    return "DRAG requires position_end";
  if (a.type != ActionType::drag && a.position_end)
    return "position_end is only valid for DRAG";
  return {};
}

struct StructuredOutput {
  std::string reasoning;
  std::vector<Subtask> subtasks;
  GuiAction action;
  std::string raw_text;  // exact text the policy emitted; not compared

  bool all_subtasks_done() const {
    for (const auto& s : subtasks)
      if (!s.done) return false;
    return !subtasks.empty();
  }

  friend bool operator==(const StructuredOutput& a, const StructuredOutput& b) {
    return a.reasoning == b.reasoning && a.subtasks == b.subtasks &&
           a.action == b.action;
  }
};

enum class ParseErrorKind {
  malformed_structure,
  unknown_action_type,
  schema_violation,
};

inline std::string_view to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::malformed_structure: return "malformed_structure";
    case ParseErrorKind::unknown_action_type: return "unknown_action_type";
    case ParseErrorKind::schema_violation: return "schema_violation";
  }
  return "?";
}

struct ParseFailure {
  ParseErrorKind kind = ParseErrorKind::malformed_structure;
  std::string detail;
};

// parse_output is total: every input maps to an output or an enumerated
// failure value, never an exception.
class ParseResult {
 public:
  ParseResult(StructuredOutput out) : value_(std::move(out)) {}
  ParseResult(ParseFailure f) : value_(std::move(f)) {}

  bool ok() const { return std::holds_alternative<StructuredOutput>(value_); }
  const StructuredOutput& output() const {
    return std::get<StructuredOutput>(value_);
  }
  const ParseFailure& failure() const { return std::get<ParseFailure>(value_); }

 private:
  std::variant<StructuredOutput, ParseFailure> value_;
};

namespace detail {

inline Json position_to_json(const Position& p) {
  if (p.form == Position::Form::point) return Json::array({p.x0, p.y0});
  return Json::array({p.x0, p.y0, p.x1, p.y1});
}

// Coordinates must be plain non-negative JSON integers.
inline std::optional<int> coord_from_json(const Json& j) {
  if (!j.is_number_integer()) return std::nullopt;
  const auto v = j.get<std::int64_t>();
  if (v < 0 || v > 1'000'000'000) return std::nullopt;
  return static_cast<int>(v);
}

inline std::optional<Position> position_from_json(const Json& j,
                                                  std::string& err) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 4)) {
    err = "position must be an array of 2 or 4 integers";
    return std::nullopt;
  }
  std::array<int, 4> c{};
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto v = coord_from_json(j[i]);
    if (!v) {
      err = "position coordinates must be non-negative integers";
      return std::nullopt;
    }
    c[i] = *v;
  }
  if (j.size() == 2) return Position::point(c[0], c[1]);
  if (c[0] > c[2] || c[1] > c[3]) {
    err = "box must satisfy x_min<=x_max and y_min<=y_max";
    return std::nullopt;
  }
  return Position::box(c[0], c[1], c[2], c[3]);
}

}  // namespace detail

inline Json action_to_json(const GuiAction& a) {
  Json j = Json::object();
  if (a.position) j["position"] = detail::position_to_json(*a.position);
  if (a.position_end)
    j["position_end"] = detail::position_to_json(*a.position_end);
  j["type"] = std::string(to_string(a.type));
  if (a.value) j["value"] = *a.value;
  return j;
}

// Canonical single-line serialization of an action: sorted keys, no spaces.
inline std::string canonical_action_serial(const GuiAction& a) {
  return action_to_json(a).dump();
}

inline std::string subtask_to_entry(const Subtask& s) {
  return (s.done ? std::string("[x] ") : std::string("[ ] ")) + s.description;
}

inline Json output_to_json(const StructuredOutput& o) {
  Json j = Json::object();
  j["action"] = action_to_json(o.action);
  j["reasoning"] = o.reasoning;
  Json subs = Json::array();
  for (const auto& s : o.subtasks) subs.push_back(subtask_to_entry(s));
  j["subtasks"] = std::move(subs);
  return j;
}

// Deterministic text form: equal outputs serialize byte-identically.
inline std::string canonical_serialize(const StructuredOutput& o) {
  return output_to_json(o).dump();
}

inline ParseResult parse_output(const std::string& text) {
  const Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object())
    return ParseFailure{ParseErrorKind::malformed_structure,
                        "input is not a JSON object"};

  for (const auto& [key, _] : j.items()) {
    if (key != "action" && key != "reasoning" && key != "subtasks")
      return ParseFailure{ParseErrorKind::schema_violation,
                          "unknown field: " + key};
  }
  if (!j.contains("action") || !j["action"].is_object())
    return ParseFailure{ParseErrorKind::schema_violation,
                        "missing required field: action"};
  if (!j.contains("reasoning") || !j["reasoning"].is_string())
    return ParseFailure{ParseErrorKind::schema_violation,
                        "missing required field: reasoning"};
  if (!j.contains("subtasks") || !j["subtasks"].is_array())
    return ParseFailure{ParseErrorKind::schema_violation,
                        "missing required field: subtasks"};

  const Json& ja = j["action"];
  for (const auto& [key, _] : ja.items()) {
    if (key != "position" && key != "position_end" && key != "type" &&
        key != "value")
      return ParseFailure{ParseErrorKind::schema_violation,
                          "unknown action field: " + key};
  }
  if (!ja.contains("type") || !ja["type"].is_string())
    return ParseFailure{ParseErrorKind::schema_violation,
                        "missing required field: action.type"};
  const auto type = action_type_from_string(ja["type"].get<std::string>());
  if (!type)
    return ParseFailure{ParseErrorKind::unknown_action_type,
                        "unknown action type: " + ja["type"].get<std::string>()};

  GuiAction action;
  action.type = *type;
  std::string err;
  if (ja.contains("position")) {
    auto p = detail::position_from_json(ja["position"], err);
    if (!p) return ParseFailure{ParseErrorKind::schema_violation, err};
    action.position = *p;
  }
  if (ja.contains("position_end")) {
    auto p = detail::position_from_json(ja["position_end"], err);
    if (!p) return ParseFailure{ParseErrorKind::schema_violation, err};
    action.position_end = *p;
  }
  if (ja.contains("value")) {
    if (!ja["value"].is_string())
      return ParseFailure{ParseErrorKind::schema_violation,
                          "action.value must be a string"};
    action.value = ja["value"].get<std::string>();
  }
  if (std::string v = validate_action(action); !v.empty())
    return ParseFailure{ParseErrorKind::schema_violation, v};

  StructuredOutput out;
  out.action = std::move(action);
  out.reasoning = j["reasoning"].get<std::string>();
  if (j["subtasks"].empty())
    return ParseFailure{ParseErrorKind::schema_violation,
                        "subtasks must be non-empty"};
  for (const Json& entry : j["subtasks"]) {
    if (!entry.is_string())
      return ParseFailure{ParseErrorKind::schema_violation,
                          "subtask entries must be strings"};
    const std::string s = entry.get<std::string>();
    Subtask sub;
    if (s.rfind("[x] ", 0) == 0 || s.rfind("[X] ", 0) == 0) {
      sub.done = true;
    } else if (s.rfind("[ ] ", 0) == 0) {
      sub.done = false;
    } else {
      return ParseFailure{ParseErrorKind::schema_violation,
                          "subtask entry missing completion marker: " + s};
    }
    sub.description = s.substr(4);
    out.subtasks.push_back(std::move(sub));
  }
  out.raw_text = text;
  return out;
}

// Finite human-verified multi-solution set (K >= 1), entries pairwise
// distinct under canonical serialization.
class ValidActionSet {
 public:
  explicit ValidActionSet(std::vector<GuiAction> actions)
      : actions_(std::move(actions)) {
    if (actions_.empty())
      throw std::invalid_argument("ValidActionSet: K must be >= 1");
    for (std::size_t i = 0; i < actions_.size(); ++i) {
      if (std::string v = validate_action(actions_[i]); !v.empty())
        throw std::invalid_argument("ValidActionSet: invalid action: " + v);
      for (std::size_t k = i + 1; k < actions_.size(); ++k) {
        if (canonical_action_serial(actions_[i]) ==
            canonical_action_serial(actions_[k]))
          throw std::invalid_argument(
              "ValidActionSet: duplicate action under canonical "
              "serialization");
      }
    }
  }

  const std::vector<GuiAction>& actions() const { return actions_; }
  std::size_t size() const { return actions_.size(); }
  const GuiAction& operator[](std::size_t i) const { return actions_.at(i); }

  // Single-annotation view: the first annotated action only.
  ValidActionSet first_only() const { return ValidActionSet({actions_[0]}); }

 private:
  std::vector<GuiAction> actions_;
};

}  // namespace litegui
