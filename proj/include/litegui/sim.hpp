#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "litegui/action.hpp"
#include "litegui/matcher.hpp"

namespace litegui {

// ---------------------------------------------------------------------------
// Deterministic simulated GUI micro-environment. Observations are symbolic
// entity lists on a 1920x1080 virtual screen. A scenario is a small stage
// graph: each stage exposes transitions (annotated valid alternatives plus
// optional unannotated routes such as terminal shortcuts or error traps);
// actions that match no transition leave progress unchanged and may raise
// flags. Multi-step alternatives are encoded as separate staged paths, so
// every stage exposes a flat single-step valid action set.
// ---------------------------------------------------------------------------

inline constexpr int kScreenWidth = 1920;
inline constexpr int kScreenHeight = 1080;

enum class Domain { file_system, web, terminal };

inline std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::file_system: return "file_system";
    case Domain::web: return "web";
    case Domain::terminal: return "terminal";
  }
  return "?";
}

inline std::optional<Domain> domain_from_string(std::string_view s) {
  if (s == "file_system") return Domain::file_system;
  if (s == "web") return Domain::web;
  if (s == "terminal") return Domain::terminal;
  return std::nullopt;
}

struct Flags {
  bool stuck = false;
  bool error = false;
  bool loop = false;

  bool any() const { return stuck || error || loop; }
  friend bool operator==(const Flags&, const Flags&) = default;
};

struct Entity {
  std::string name;
  std::string kind;  // e.g. "file", "button", "field", "terminal", "decoy"
  Box box;

  friend bool operator==(const Entity&, const Entity&) = default;
};

struct SimState {
  Domain domain = Domain::file_system;
  int stage = 0;
  std::vector<Entity> entities;
  Flags flags;
  int clock_seconds = 0;
  // Consecutive-identical ineffective action bookkeeping (loop detection).
  std::string last_ineffective;
  int ineffective_repeat = 0;

  bool has_entity(const std::string& name) const {
    for (const auto& e : entities)
      if (e.name == name) return true;
    return false;
  }
};

enum class Modality { gui, terminal };

// One edge of the stage graph. `proto` carries the annotation: the target
// box (position, box form) and/or target value the action must hit.
struct Transition {
  GuiAction proto;
  int next_stage = 0;
  bool annotated = true;       // part of the human-verified valid set
  Modality modality = Modality::gui;
  bool sets_error = false;
  bool clears_error = false;
};

struct Stage {
  std::string name;
  std::vector<Entity> entities;
  std::vector<Transition> transitions;
  Flags entry_flags;
  std::string reasoning;  // canonical reasoning text for this stage
};

// Plan entry i counts as done once the current stage index reaches
// done_at_stage.
struct PlanEntry {
  std::string description;
  int done_at_stage = 0;
};

struct Scenario {
  std::string id;
  Domain domain = Domain::file_system;
  std::string instruction;
  std::vector<Stage> stages;
  int success_stage = 0;
  int step_cap = 18;
  bool gui_only = false;  // file-system tasks forbid the terminal route
  std::vector<PlanEntry> plan;
  std::vector<std::string> corrective_steps;

  SimState initial_state() const {
    SimState s;
    s.domain = domain;
    s.stage = 0;
    s.entities = stages.at(0).entities;
    s.flags = stages.at(0).entry_flags;
    return s;
  }

  bool success(const SimState& s) const { return s.stage == success_stage; }

  const Stage& stage_at(int idx) const {
    if (idx < 0 || idx >= static_cast<int>(stages.size()))
      throw std::out_of_range("Scenario: unknown stage " + std::to_string(idx));
    return stages[idx];
  }

  std::vector<bool> done_flags_at(int stage) const {
    std::vector<bool> flags;
    flags.reserve(plan.size());
    for (const auto& e : plan) flags.push_back(stage >= e.done_at_stage);
    return flags;
  }

  void validate() const {
    if (id.empty()) throw std::invalid_argument("Scenario: empty id");
    if (stages.empty()) throw std::invalid_argument("Scenario: no stages");
    if (success_stage < 0 || success_stage >= static_cast<int>(stages.size()))
      throw std::invalid_argument("Scenario: success_stage out of range");
    if (step_cap < 1) throw std::invalid_argument("Scenario: step_cap < 1");
    if (plan.size() < 2 || plan.size() > 8)
      throw std::invalid_argument("Scenario: plan must have 2..8 entries");
    const Box screen{0, 0, kScreenWidth - 1, kScreenHeight - 1};
    for (const auto& st : stages) {
      std::set<std::string> names;
      for (const auto& e : st.entities) {
        if (!names.insert(e.name).second)
          throw std::invalid_argument("Scenario: duplicate entity " + e.name);
        if (!e.box.valid() || e.box.x_max > screen.x_max ||
            e.box.y_max > screen.y_max)
          throw std::invalid_argument("Scenario: entity box off-screen: " +
                                      e.name);
      }
      for (const auto& t : st.transitions) {
        if (std::string v = validate_action(t.proto); !v.empty())
          throw std::invalid_argument("Scenario: bad transition proto: " + v);
        if (t.next_stage < 0 ||
            t.next_stage >= static_cast<int>(stages.size()))
          throw std::invalid_argument("Scenario: transition target missing");
      }
    }
  }
};

// True iff the concrete action satisfies a transition's annotation: equal
// type, point inside each annotated box (closed boundary), and value equal
// after trimming and case folding.
inline bool action_matches(const GuiAction& action, const Transition& t) {
  if (action.type != t.proto.type) return false;
  if (t.proto.position) {
    if (!action.position) return false;
    if (!t.proto.position->as_box().contains(action.position->reduced_point()))
      return false;
  }
  if (t.proto.position_end) {
    if (!action.position_end) return false;
    if (!t.proto.position_end->as_box().contains(
            action.position_end->reduced_point()))
      return false;
  }
  if (t.proto.value) {
    if (!action.value) return false;
    if (detail::normalize_value(*action.value) !=
        detail::normalize_value(*t.proto.value))
      return false;
  }
  return true;
}

struct StepOutcome {
  SimState state;
  bool advanced = false;
  // Index of the taken transition in the source stage, -1 if none.
  int transition_index = -1;
  Modality modality = Modality::gui;
  bool annotated = false;
};

// Progress-unchanged bookkeeping for actions (or unparseable outputs) that
// match no transition.
inline SimState absorb_ineffective(const SimState& state,
                                   const std::string& serial) {
  SimState next = state;
  if (serial == next.last_ineffective) {
    next.ineffective_repeat += 1;
  } else {
    next.last_ineffective = serial;
    next.ineffective_repeat = 1;
  }
  if (next.ineffective_repeat >= 3) next.flags.loop = true;
  return next;
}

inline StepOutcome step_detailed(const Scenario& scenario, const SimState& state,
                                 const GuiAction& action) {
  StepOutcome out;
  out.state = state;
  SimState& next = out.state;
  if (action.type == ActionType::wait) next.clock_seconds += 1;

  const Stage& stage = scenario.stage_at(state.stage);
  for (std::size_t i = 0; i < stage.transitions.size(); ++i) {
    const Transition& t = stage.transitions[i];
    if (!action_matches(action, t)) continue;
    const Stage& target = scenario.stage_at(t.next_stage);
    next.stage = t.next_stage;
    next.entities = target.entities;
    next.flags = target.entry_flags;
    if (t.sets_error) next.flags.error = true;
    if (t.clears_error) next.flags.error = false;
    next.last_ineffective.clear();
    next.ineffective_repeat = 0;
    out.advanced = true;
    out.transition_index = static_cast<int>(i);
    out.modality = t.modality;
    out.annotated = t.annotated;
    return out;
  }

  // Ineffective: progress unchanged; three identical actions in a row flag a
  // loop.
  next = absorb_ineffective(next, canonical_action_serial(action));
  return out;
}

inline SimState step(const Scenario& scenario, const SimState& state,
                     const GuiAction& action) {
  return step_detailed(scenario, state, action).state;
}

// The annotated multi-solution set for the state's current stage.
inline ValidActionSet valid_actions(const Scenario& scenario,
                                    const SimState& state) {
  const Stage& stage = scenario.stage_at(state.stage);
  std::vector<GuiAction> actions;
  for (const Transition& t : stage.transitions)
    if (t.annotated) actions.push_back(t.proto);
  if (actions.empty())
    throw std::runtime_error("valid_actions: stage has no annotated actions: " +
                             stage.name);
  return ValidActionSet(std::move(actions));
}

// Grounding probe: true iff the point lies inside the box, boundary closed.
inline bool grounding_eval(PointD predicted, const Box& target) {
  if (!target.valid())
    throw std::invalid_argument("grounding_eval: invalid box");
  return target.contains(predicted);
}

// --------------------------- scenario file format ---------------------------
// One JSON document per scenario, versioned. This is the on-disk schema the
// CLI loads; builtin scenarios round-trip through it.

inline Json entity_to_json(const Entity& e) {
  Json j = Json::object();
  j["box"] = Json::array({e.box.x_min, e.box.y_min, e.box.x_max, e.box.y_max});
  j["kind"] = e.kind;
  j["name"] = e.name;
  return j;
}

inline Entity entity_from_json(const Json& j) {
  Entity e;
  e.name = j.at("name").get<std::string>();
  e.kind = j.at("kind").get<std::string>();
  const auto& b = j.at("box");
  e.box = Box{b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(),
              b.at(3).get<int>()};
  return e;
}

inline Json scenario_to_json(const Scenario& s) {
  Json j = Json::object();
  j["format"] = "litegui.scenario";
  j["version"] = 1;
  j["id"] = s.id;
  j["domain"] = std::string(to_string(s.domain));
  j["instruction"] = s.instruction;
  j["success_stage"] = s.success_stage;
  j["step_cap"] = s.step_cap;
  j["gui_only"] = s.gui_only;
  Json plan = Json::array();
  for (const auto& e : s.plan) {
    Json pe = Json::object();
    pe["description"] = e.description;
    pe["done_at_stage"] = e.done_at_stage;
    plan.push_back(std::move(pe));
  }
  j["plan"] = std::move(plan);
  j["corrective_steps"] = s.corrective_steps;
  Json stages = Json::array();
  for (const auto& st : s.stages) {
    Json js = Json::object();
    js["name"] = st.name;
    js["reasoning"] = st.reasoning;
    Json ents = Json::array();
    for (const auto& e : st.entities) ents.push_back(entity_to_json(e));
    js["entities"] = std::move(ents);
    Json flags = Json::object();
    flags["error"] = st.entry_flags.error;
    flags["loop"] = st.entry_flags.loop;
    flags["stuck"] = st.entry_flags.stuck;
    js["entry_flags"] = std::move(flags);
    Json trans = Json::array();
    for (const auto& t : st.transitions) {
      Json jt = Json::object();
      jt["action"] = action_to_json(t.proto);
      jt["annotated"] = t.annotated;
      jt["clears_error"] = t.clears_error;
      jt["modality"] = t.modality == Modality::gui ? "gui" : "terminal";
      jt["next_stage"] = t.next_stage;
      jt["sets_error"] = t.sets_error;
      trans.push_back(std::move(jt));
    }
    js["transitions"] = std::move(trans);
    stages.push_back(std::move(js));
  }
  j["stages"] = std::move(stages);
  return j;
}

inline GuiAction action_from_json(const Json& j) {
  ParseResult r = parse_output(
      Json{{"action", j}, {"reasoning", ""}, {"subtasks", Json::array({"[ ] x"})}}
          .dump());
  if (!r.ok())
    throw std::runtime_error("action_from_json: " + r.failure().detail);
  return r.output().action;
}

inline Scenario scenario_from_json(const Json& j) {
  if (j.value("format", "") != "litegui.scenario")
    throw std::runtime_error("scenario: unrecognized format");
  if (j.value("version", -1) != 1)
    throw std::runtime_error("scenario: unsupported version");
  Scenario s;
  s.id = j.at("id").get<std::string>();
  auto dom = domain_from_string(j.at("domain").get<std::string>());
  if (!dom) throw std::runtime_error("scenario: unknown domain");
  s.domain = *dom;
  s.instruction = j.at("instruction").get<std::string>();
  s.success_stage = j.at("success_stage").get<int>();
  s.step_cap = j.at("step_cap").get<int>();
  s.gui_only = j.at("gui_only").get<bool>();
  for (const auto& pe : j.at("plan"))
    s.plan.push_back(PlanEntry{pe.at("description").get<std::string>(),
                               pe.at("done_at_stage").get<int>()});
  s.corrective_steps =
      j.at("corrective_steps").get<std::vector<std::string>>();
  for (const auto& js : j.at("stages")) {
    Stage st;
    st.name = js.at("name").get<std::string>();
    st.reasoning = js.at("reasoning").get<std::string>();
    for (const auto& e : js.at("entities"))
      st.entities.push_back(entity_from_json(e));
    const auto& fl = js.at("entry_flags");
    st.entry_flags.error = fl.at("error").get<bool>();
    st.entry_flags.loop = fl.at("loop").get<bool>();
    st.entry_flags.stuck = fl.at("stuck").get<bool>();
    for (const auto& jt : js.at("transitions")) {
      Transition t;
      t.proto = action_from_json(jt.at("action"));
      t.annotated = jt.at("annotated").get<bool>();
      t.clears_error = jt.at("clears_error").get<bool>();
      t.modality = jt.at("modality").get<std::string>() == "terminal"
                       ? Modality::terminal
                       : Modality::gui;
      t.next_stage = jt.at("next_stage").get<int>();
      t.sets_error = jt.at("sets_error").get<bool>();
      st.transitions.push_back(std::move(t));
    }
    s.stages.push_back(std::move(st));
  }
  s.validate();
  return s;
}

}  // namespace litegui
