#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "litegui/judge.hpp"
#include "litegui/policy.hpp"
#include "litegui/sim.hpp"

namespace litegui {

// ---------------------------------------------------------------------------
// Shipped scenario catalog and the training setup derived from it: candidate
// outputs per state, a shared chunk vocabulary, the scripted near-expert
// teacher, and an expert playback policy.
//
// Output text is chunked into two tokens (action part, reasoning+subtasks
// part) followed by end-of-sequence, so valid sequences are three tokens
// long and the full autoregressive tree stays enumerable.
// ---------------------------------------------------------------------------

inline std::string state_context_id(const Scenario& scenario,
                                    const SimState& state) {
  return "scn=" + scenario.id + "|s=" + std::to_string(state.stage);
}

inline std::string stage_context_id(const Scenario& scenario, int stage) {
  return "scn=" + scenario.id + "|s=" + std::to_string(stage);
}

// Concrete executable action for an annotated proto: boxes collapse to their
// center point, values are copied verbatim.
inline GuiAction concretize_action(const GuiAction& proto) {
  GuiAction a;
  a.type = proto.type;
  if (proto.position) {
    const Box b = proto.position->as_box();
    a.position = Position::point((b.x_min + b.x_max) / 2, (b.y_min + b.y_max) / 2);
  }
  if (proto.position_end) {
    const Box b = proto.position_end->as_box();
    a.position_end =
        Position::point((b.x_min + b.x_max) / 2, (b.y_min + b.y_max) / 2);
  }
  if (proto.value) a.value = *proto.value;
  return a;
}

// First-annotated-transition playback from a stage; empty when the stage has
// no annotated continuation.
inline std::vector<std::pair<GuiAction, int>> expert_path_from(
    const Scenario& scenario, int stage, int budget) {
  std::vector<std::pair<GuiAction, int>> path;
  int cur = stage;
  while (cur != scenario.success_stage && budget-- > 0) {
    const Stage& st = scenario.stage_at(cur);
    const Transition* first = nullptr;
    for (const Transition& t : st.transitions)
      if (t.annotated) {
        first = &t;
        break;
      }
    if (!first) return {};  // dead end
    path.emplace_back(concretize_action(first->proto), first->next_stage);
    cur = first->next_stage;
  }
  if (cur != scenario.success_stage) return {};
  return path;
}

// Machine check of the annotation invariants: every annotated action path
// from the initial stage reaches success within the step cap, stepping each
// action through the simulator, and every stage that carries annotations can
// still reach success via the first-annotated path.
inline void check_scenario_soundness(const Scenario& scenario) {
  scenario.validate();

  // DFS over all annotated paths from the initial state.
  struct Frame {
    SimState state;
    int depth;
  };
  std::vector<Frame> stack{{scenario.initial_state(), 0}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (scenario.success(f.state)) continue;
    if (f.depth >= scenario.step_cap)
      throw std::runtime_error(scenario.id +
                               ": annotated path exceeds the step cap");
    const Stage& st = scenario.stage_at(f.state.stage);
    bool any = false;
    for (const Transition& t : st.transitions) {
      if (!t.annotated) continue;
      any = true;
      StepOutcome out =
          step_detailed(scenario, f.state, concretize_action(t.proto));
      if (!out.advanced || out.state.stage != t.next_stage)
        throw std::runtime_error(scenario.id +
                                 ": annotated action does not advance: " +
                                 canonical_action_serial(t.proto));
      stack.push_back({out.state, f.depth + 1});
    }
    if (!any)
      throw std::runtime_error(scenario.id + ": stage " + st.name +
                               " is annotated-path reachable but offers no "
                               "annotated action");
  }

  // Stages with annotations (including off-path corrective stages) must be
  // recoverable via the first-annotated path.
  for (int s = 0; s < static_cast<int>(scenario.stages.size()); ++s) {
    bool has_annotated = false;
    for (const Transition& t : scenario.stages[s].transitions)
      if (t.annotated) has_annotated = true;
    if (!has_annotated) continue;
    if (expert_path_from(scenario, s, scenario.step_cap).empty())
      throw std::runtime_error(scenario.id + ": stage " +
                               scenario.stages[s].name +
                               " cannot recover to success");
  }
}

// ------------------------------ suite setup --------------------------------

struct Candidate {
  StructuredOutput output;
  std::string text;          // canonical serialization
  std::vector<int> tokens;   // [action chunk, tail chunk, eos]
  std::string action_serial;
  bool valid = false;        // annotated-valid vs hallucination
};

struct StateInfo {
  int scenario_index = 0;
  int stage = 0;
  std::string context_id;
  std::vector<Candidate> candidates;
};

struct SuiteOptions {
  double valid_logit = 4.0;    // teacher boost for annotated-valid outputs
  double guided_logit = 7.0;   // teacher boost when guidance references the action
  int l_max = 3;
  bool hallucinations = true;  // decoy clicks and premature-done plans
};

class Suite {
 public:
  explicit Suite(std::vector<Scenario> scenarios, SuiteOptions opts = {})
      : scenarios_(std::move(scenarios)), opts_(opts) {
    if (scenarios_.empty()) throw std::invalid_argument("Suite: no scenarios");
    for (const auto& s : scenarios_) check_scenario_soundness(s);
    build();
  }

  const std::vector<Scenario>& scenarios() const { return scenarios_; }
  const Scenario& scenario(int i) const { return scenarios_.at(i); }
  std::shared_ptr<const Vocabulary> vocab() const { return vocab_; }
  int l_max() const { return opts_.l_max; }
  const SuiteOptions& options() const { return opts_; }

  const std::vector<StateInfo>& training_states() const { return states_; }

  const StateInfo* state_by_context(const std::string& base_context) const {
    auto it = by_context_->find(base_context);
    return it == by_context_->end() ? nullptr : &it->second;
  }

  // Stable identity for snapshot compatibility checks.
  std::string signature() const {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    const auto mix = [&h](std::string_view s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
      }
      h ^= 0x1f;
      h *= 1099511628211ull;
    };
    for (const auto& s : scenarios_) mix(s.id);
    for (const auto& t : vocab_->tokens()) mix(t);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
  }

  TokenPolicy make_student() const {
    return TokenPolicy(vocab_, TokenPolicy::Role::student, opts_.l_max);
  }

  // Scripted near-expert teacher. It concentrates probability on candidate
  // output serializations for the state named by the context id, more
  // sharply on actions referenced by the guidance suffix ("||g=[...]"), and
  // drops candidates whose action serial appears in the feedback suffix
  // ("||fb=[...]"). Without guidance, hallucinated candidates receive the
  // same boost as valid ones.
  TokenPolicy make_teacher() const {
    auto table = by_context_;
    const double base = opts_.valid_logit;
    const double guided = opts_.guided_logit;
    const int vsize = vocab_->size();
    auto fn = [table, base, guided, vsize](const ContextKey& ctx) {
      std::vector<double> logits(vsize, 0.0);
      std::string base_id = ctx.context_id;
      std::vector<GuiAction> referenced;
      std::set<std::string> suppressed;
      if (const auto cut = base_id.find("||"); cut != std::string::npos) {
        std::string extras = base_id.substr(cut);
        base_id.resize(cut);
        std::size_t pos = 0;
        while ((pos = extras.find("||")) != std::string::npos) {
          extras = extras.substr(pos + 2);
          std::size_t end = extras.find("||");
          const std::string seg = extras.substr(0, end);
          if (seg.rfind("g=", 0) == 0) {
            const Json refs =
                Json::parse(seg.substr(2), nullptr, /*allow_exceptions=*/false);
            if (refs.is_array())
              for (const auto& r : refs) referenced.push_back(action_from_json(r));
          } else if (seg.rfind("fb=", 0) == 0) {
            const Json rej =
                Json::parse(seg.substr(3), nullptr, /*allow_exceptions=*/false);
            if (rej.is_array())
              for (const auto& r : rej)
                if (r.is_string()) suppressed.insert(r.get<std::string>());
          }
          if (end == std::string::npos) break;
          extras = extras.substr(end);
          pos = 0;
        }
      }
      auto it = table->find(base_id);
      if (it == table->end()) return logits;
      for (const Candidate& c : it->second.candidates) {
        if (suppressed.count(c.action_serial)) continue;
        if (ctx.prefix.size() >= c.tokens.size()) continue;
        if (!std::equal(ctx.prefix.begin(), ctx.prefix.end(),
                        c.tokens.begin()))
          continue;
        // A candidate counts as referenced when its concrete action satisfies
        // the reference annotation (type, point-in-box, value).
        bool is_ref = false;
        for (const GuiAction& ref : referenced) {
          Transition probe;
          probe.proto = ref;
          if (action_matches(c.output.action, probe)) {
            is_ref = true;
            break;
          }
        }
        const double boost = c.valid && is_ref ? guided : base;
        const int next = c.tokens[ctx.prefix.size()];
        logits[next] = std::max(logits[next], boost);
      }
      return logits;
    };
    return TokenPolicy::scripted(vocab_, TokenPolicy::Role::teacher,
                                 std::move(fn), opts_.l_max);
  }

  // Deterministic expert: plays the first valid candidate of each state.
  TokenPolicy make_expert() const {
    auto table = by_context_;
    const int vsize = vocab_->size();
    auto fn = [table, vsize](const ContextKey& ctx) {
      std::vector<double> logits(vsize, 0.0);
      std::string base_id = ctx.context_id;
      if (const auto cut = base_id.find("||"); cut != std::string::npos)
        base_id.resize(cut);
      auto it = table->find(base_id);
      if (it == table->end()) return logits;
      for (const Candidate& c : it->second.candidates) {
        if (!c.valid) continue;
        if (ctx.prefix.size() >= c.tokens.size()) break;
        if (!std::equal(ctx.prefix.begin(), ctx.prefix.end(),
                        c.tokens.begin()))
          break;
        logits[c.tokens[ctx.prefix.size()]] = 50.0;
        break;  // first valid candidate only
      }
      return logits;
    };
    return TokenPolicy::scripted(vocab_, TokenPolicy::Role::teacher,
                                 std::move(fn), opts_.l_max);
  }

  SimState state_for(const StateInfo& info) const {
    const Scenario& sc = scenarios_.at(info.scenario_index);
    SimState s;
    s.domain = sc.domain;
    s.stage = info.stage;
    s.entities = sc.stage_at(info.stage).entities;
    s.flags = sc.stage_at(info.stage).entry_flags;
    return s;
  }

  ValidActionSet action_set_for(const StateInfo& info) const {
    return valid_actions(scenarios_.at(info.scenario_index), state_for(info));
  }

  // Minimal judge window for group-sampled training candidates: the current
  // state plus the candidate's plan.
  JudgeInput judge_input_for(const StateInfo& info,
                             std::vector<Subtask> plan) const {
    JudgeInput in;
    in.instruction = scenarios_.at(info.scenario_index).instruction;
    in.states = {state_for(info)};
    in.plan = std::move(plan);
    return in;
  }

  double judge_candidate(const StateInfo& info, const ParseResult& parsed) const {
    if (!parsed.ok()) return 0.0;
    RuleBasedJudge judge(scenarios_.at(info.scenario_index));
    return judge
        .judge_plan(judge_input_for(info, parsed.output().subtasks))
        .score;
  }

 private:
  // Subtask plan for a stage: corrective first entry on flagged stages, then
  // the canonical plan with ground-truth done flags.
  std::vector<Subtask> plan_for_stage(const Scenario& sc, int stage) const {
    std::vector<Subtask> plan;
    if (sc.stage_at(stage).entry_flags.any() && !sc.corrective_steps.empty())
      plan.push_back(Subtask{sc.corrective_steps.front(), false});
    const std::vector<bool> done = sc.done_flags_at(stage);
    for (std::size_t i = 0; i < sc.plan.size(); ++i)
      plan.push_back(Subtask{sc.plan[i].description, done[i]});
    return plan;
  }

  StructuredOutput make_output(const Scenario& sc, int stage,
                               const GuiAction& action,
                               bool premature_done) const {
    StructuredOutput out;
    out.reasoning = sc.stage_at(stage).reasoning;
    out.subtasks = plan_for_stage(sc, stage);
    if (premature_done)
      for (auto& s : out.subtasks) s.done = true;
    out.action = action;
    out.raw_text = canonical_serialize(out);
    return out;
  }

  void build() {
    // Candidate texts per state, in deterministic suite order.
    struct PendingCandidate {
      StructuredOutput output;
      bool valid;
    };
    std::vector<StateInfo> states;
    std::vector<std::vector<PendingCandidate>> pending;

    for (int si = 0; si < static_cast<int>(scenarios_.size()); ++si) {
      const Scenario& sc = scenarios_[si];
      for (int stage = 0; stage < static_cast<int>(sc.stages.size());
           ++stage) {
        if (stage == sc.success_stage) continue;
        const Stage& st = sc.stage_at(stage);
        std::vector<PendingCandidate> cands;
        const GuiAction* first_valid = nullptr;
        for (const Transition& t : st.transitions) {
          if (!t.annotated) continue;
          GuiAction a = concretize_action(t.proto);
          if (!first_valid) first_valid = &t.proto;
          cands.push_back({make_output(sc, stage, a, false), true});
        }
        if (cands.empty()) continue;
        if (opts_.hallucinations) {
          for (const Entity& e : st.entities) {
            if (e.kind != "decoy") continue;
            GuiAction a;
            a.type = ActionType::click;
            a.position = Position::point((e.box.x_min + e.box.x_max) / 2,
                                         (e.box.y_min + e.box.y_max) / 2);
            cands.push_back({make_output(sc, stage, a, false), false});
          }
          // Premature completion: a valid action paired with an all-done plan.
          cands.push_back(
              {make_output(sc, stage, concretize_action(*first_valid), true),
               false});
        }
        StateInfo info;
        info.scenario_index = si;
        info.stage = stage;
        info.context_id = stage_context_id(sc, stage);
        states.push_back(std::move(info));
        pending.push_back(std::move(cands));
      }
    }

    // Chunk vocabulary: EOS first, then action/tail chunks in first-seen
    // order, then a few schema-breaking distractor tokens.
    std::vector<std::string> tokens{""};
    std::map<std::string, int> token_id{{"", 0}};
    const auto intern = [&](const std::string& chunk) {
      auto [it, inserted] =
          token_id.try_emplace(chunk, static_cast<int>(tokens.size()));
      if (inserted) tokens.push_back(chunk);
      return it->second;
    };

    struct Split {
      int action_chunk;
      int tail_chunk;
    };
    std::vector<std::vector<Split>> splits(pending.size());
    for (std::size_t i = 0; i < pending.size(); ++i) {
      for (const auto& pc : pending[i]) {
        const std::string text = canonical_serialize(pc.output);
        const auto cut = text.find(",\"reasoning\"");
        if (cut == std::string::npos)
          throw std::logic_error("candidate text missing reasoning field");
        splits[i].push_back(Split{intern(text.substr(0, cut + 1)),
                                  intern(text.substr(cut + 1))});
      }
    }
    for (const char* g : {"click the button", "{\"action\":null}", "# retry"})
      intern(g);

    vocab_ = std::make_shared<Vocabulary>(tokens, /*eos_id=*/0);

    auto by_context = std::make_shared<std::map<std::string, StateInfo>>();
    for (std::size_t i = 0; i < states.size(); ++i) {
      StateInfo& info = states[i];
      for (std::size_t k = 0; k < pending[i].size(); ++k) {
        Candidate c;
        c.output = std::move(pending[i][k].output);
        c.valid = pending[i][k].valid;
        c.text = canonical_serialize(c.output);
        c.tokens = {splits[i][k].action_chunk, splits[i][k].tail_chunk,
                    vocab_->eos_id()};
        c.action_serial = canonical_action_serial(c.output.action);
        info.candidates.push_back(std::move(c));
      }
      (*by_context)[info.context_id] = info;
    }
    states_ = std::move(states);
    by_context_ = std::move(by_context);
  }

  std::vector<Scenario> scenarios_;
  SuiteOptions opts_;
  std::shared_ptr<const Vocabulary> vocab_;
  std::vector<StateInfo> states_;
  std::shared_ptr<std::map<std::string, StateInfo>> by_context_;
};

// ---------------------------- scenario catalog -----------------------------

namespace builders {

inline Entity entity(std::string name, std::string kind, int x0, int y0,
                     int x1, int y1) {
  return Entity{std::move(name), std::move(kind), Box{x0, y0, x1, y1}};
}

inline GuiAction pointer(ActionType type, const Box& box) {
  GuiAction a;
  a.type = type;
  a.position = Position::from_box(box);
  return a;
}

inline GuiAction drag(const Box& from, const Box& to) {
  GuiAction a;
  a.type = ActionType::drag;
  a.position = Position::from_box(from);
  a.position_end = Position::from_box(to);
  return a;
}

inline GuiAction typed(std::string value) {
  GuiAction a;
  a.type = ActionType::text_input;
  a.value = std::move(value);
  return a;
}

inline GuiAction key(std::string value) {
  GuiAction a;
  a.type = ActionType::key;
  a.value = std::move(value);
  return a;
}

inline GuiAction wait_action() {
  GuiAction a;
  a.type = ActionType::wait;
  return a;
}

inline Transition go(GuiAction proto, int next) {
  Transition t;
  t.proto = std::move(proto);
  t.next_stage = next;
  return t;
}

inline Transition side(GuiAction proto, int next, Modality m = Modality::gui) {
  Transition t;
  t.proto = std::move(proto);
  t.next_stage = next;
  t.annotated = false;
  t.modality = m;
  return t;
}

}  // namespace builders

inline Scenario scenario_fs_open_report() {
  using namespace builders;
  const Box file{200, 200, 360, 260};
  const Box term{1700, 900, 1800, 980};
  const Box trash{1500, 200, 1600, 300};
  const Box viewer{400, 100, 1500, 900};

  Scenario s;
  s.id = "fs_open_report";
  s.domain = Domain::file_system;
  s.gui_only = true;
  s.instruction = "Open the file report.txt from the desktop";
  s.plan = {{"locate report.txt on the desktop", 2},
            {"open report.txt in the viewer", 3}};
  s.corrective_steps = {"close the unexpected dialog and retry"};

  Stage desktop;
  desktop.name = "desktop";
  desktop.reasoning =
      "The desktop shows report.txt; opening it is the next step.";
  desktop.entities = {entity("report.txt file", "file", 200, 200, 360, 260),
                      entity("terminal icon", "terminal", 1700, 900, 1800, 980),
                      entity("trash can", "decoy", 1500, 200, 1600, 300)};
  desktop.transitions = {
      go(pointer(ActionType::double_click, file), 3),
      go(pointer(ActionType::click, file), 2),
      side(pointer(ActionType::click, term), 1, Modality::terminal),
  };
  (void)trash;

  Stage terminal_open;
  terminal_open.name = "terminal_open";
  terminal_open.reasoning = "A terminal is open on the desktop.";
  terminal_open.entities = {
      entity("terminal window", "terminal", 200, 200, 1700, 1000)};
  terminal_open.transitions = {
      side(typed("xdg-open report.txt"), 3, Modality::terminal)};

  Stage selected;
  selected.name = "file_selected";
  selected.reasoning =
      "report.txt is selected; pressing Enter opens it.";
  selected.entities = desktop.entities;
  selected.transitions = {go(key("Enter"), 3)};

  Stage opened;
  opened.name = "file_opened";
  opened.reasoning = "report.txt is open in the viewer.";
  opened.entities = {entity("viewer window", "window", viewer.x_min,
                            viewer.y_min, viewer.x_max, viewer.y_max)};

  s.stages = {desktop, terminal_open, selected, opened};
  s.success_stage = 3;
  return s;
}

inline Scenario scenario_fs_rename_notes() {
  using namespace builders;
  const Box file{400, 300, 560, 360};
  const Box term{1700, 900, 1800, 980};
  const Box rename_opt{420, 380, 560, 420};

  Scenario s;
  s.id = "fs_rename_notes";
  s.domain = Domain::file_system;
  s.gui_only = true;
  s.instruction = "Rename notes.txt to notes_final using the file manager";
  s.plan = {{"open the context menu of notes.txt", 2},
            {"choose the rename option", 3},
            {"type the new name notes_final", 4}};

  Stage desktop;
  desktop.name = "desktop";
  desktop.reasoning = "notes.txt is on the desktop; right-click to rename.";
  desktop.entities = {entity("notes.txt file", "file", 400, 300, 560, 360),
                      entity("terminal icon", "terminal", 1700, 900, 1800, 980)};
  desktop.transitions = {
      go(pointer(ActionType::right_click, file), 2),
      side(pointer(ActionType::click, term), 1, Modality::terminal),
  };

  Stage terminal_open;
  terminal_open.name = "terminal_open";
  terminal_open.reasoning = "A terminal is open.";
  terminal_open.entities = {
      entity("terminal window", "terminal", 200, 200, 1700, 1000)};
  terminal_open.transitions = {
      side(typed("mv notes.txt notes_final"), 4, Modality::terminal)};

  Stage menu;
  menu.name = "context_menu";
  menu.reasoning = "The context menu is open; pick the rename option.";
  menu.entities = {entity("notes.txt file", "file", 400, 300, 560, 360),
                   entity("rename option", "menu_item", 420, 380, 560, 420)};
  menu.transitions = {go(pointer(ActionType::click, rename_opt), 3)};

  Stage edit;
  edit.name = "rename_edit";
  edit.reasoning = "The name field is editable; type the new name.";
  edit.entities = {entity("name edit field", "field", 400, 300, 560, 360)};
  edit.transitions = {go(typed("notes_final"), 4)};

  Stage done;
  done.name = "renamed";
  done.reasoning = "The file is renamed.";
  done.entities = {entity("notes_final file", "file", 400, 300, 560, 360)};

  s.stages = {desktop, terminal_open, menu, edit, done};
  s.success_stage = 4;
  return s;
}

inline Scenario scenario_fs_delete_temp() {
  using namespace builders;
  const Box file{300, 500, 460, 560};
  const Box trash{1600, 800, 1760, 920};
  const Box term{1700, 100, 1800, 180};
  const Box delete_opt{320, 580, 460, 620};

  Scenario s;
  s.id = "fs_delete_temp";
  s.domain = Domain::file_system;
  s.gui_only = true;
  s.instruction = "Delete temp.log using the graphical file manager";
  s.plan = {{"select temp.log for removal", 2}, {"remove temp.log", 3}};

  Stage desktop;
  desktop.name = "desktop";
  desktop.reasoning =
      "temp.log sits on the desktop; drag it to the trash or use the menu.";
  desktop.entities = {entity("temp.log file", "file", 300, 500, 460, 560),
                      entity("trash can", "container", 1600, 800, 1760, 920),
                      entity("terminal icon", "terminal", 1700, 100, 1800, 180)};
  desktop.transitions = {
      go(drag(file, trash), 3),
      go(pointer(ActionType::right_click, file), 2),
      side(pointer(ActionType::click, term), 1, Modality::terminal),
  };

  Stage terminal_open;
  terminal_open.name = "terminal_open";
  terminal_open.reasoning = "A terminal is open.";
  terminal_open.entities = {
      entity("terminal window", "terminal", 200, 200, 1700, 1000)};
  terminal_open.transitions = {side(typed("rm temp.log"), 3, Modality::terminal)};

  Stage menu;
  menu.name = "context_menu";
  menu.reasoning = "The context menu is open; pick delete.";
  menu.entities = {entity("temp.log file", "file", 300, 500, 460, 560),
                   entity("delete option", "menu_item", 320, 580, 460, 620)};
  menu.transitions = {go(pointer(ActionType::click, delete_opt), 3)};

  Stage done;
  done.name = "deleted";
  done.reasoning = "temp.log is gone.";
  done.entities = {entity("empty desktop", "window", 0, 0, 1919, 1079)};

  s.stages = {desktop, terminal_open, menu, done};
  s.success_stage = 3;
  return s;
}

inline Scenario scenario_fs_new_folder() {
  using namespace builders;
  const Box background{800, 400, 1000, 600};
  const Box broken{100, 100, 200, 160};
  const Box new_folder_opt{820, 620, 980, 660};
  const Box dismiss{860, 500, 1060, 560};

  Scenario s;
  s.id = "fs_new_folder";
  s.domain = Domain::file_system;
  s.gui_only = true;
  s.instruction = "Create a folder named projects on the desktop";
  s.plan = {{"open the desktop context menu", 2},
            {"choose the new folder option", 3},
            {"type the folder name projects", 4}};
  s.corrective_steps = {"click the dismiss button to close the error dialog"};

  Stage desktop;
  desktop.name = "desktop";
  desktop.reasoning =
      "The desktop background is visible; right-click to open the menu.";
  desktop.entities = {
      entity("desktop background", "window", 800, 400, 1000, 600),
      entity("broken shortcut", "decoy", 100, 100, 200, 160),
      entity("terminal icon", "terminal", 1700, 900, 1800, 980)};
  desktop.transitions = {
      go(pointer(ActionType::right_click, background), 2),
      side(pointer(ActionType::click, broken), 1),
  };

  Stage error_dialog;
  error_dialog.name = "error_dialog";
  error_dialog.reasoning =
      "An error dialog blocks the desktop; dismiss it first.";
  error_dialog.entry_flags.error = true;
  error_dialog.entities = {
      entity("dismiss button", "button", 860, 500, 1060, 560),
      entity("desktop background", "window", 800, 400, 1000, 600)};
  error_dialog.transitions = {go(pointer(ActionType::click, dismiss), 0)};

  Stage menu;
  menu.name = "context_menu";
  menu.reasoning = "The context menu is open; pick new folder.";
  menu.entities = {
      entity("desktop background", "window", 800, 400, 1000, 600),
      entity("new folder option", "menu_item", 820, 620, 980, 660)};
  menu.transitions = {go(pointer(ActionType::click, new_folder_opt), 3)};

  Stage name_edit;
  name_edit.name = "name_edit";
  name_edit.reasoning = "The folder name field is editable.";
  name_edit.entities = {entity("name edit field", "field", 820, 620, 980, 660)};
  name_edit.transitions = {go(typed("projects"), 4)};

  Stage done;
  done.name = "folder_created";
  done.reasoning = "The projects folder exists.";
  done.entities = {entity("projects folder", "folder", 800, 400, 1000, 600)};

  s.stages = {desktop, error_dialog, menu, name_edit, done};
  s.success_stage = 4;
  return s;
}

inline Scenario scenario_fs_copy_file() {
  using namespace builders;
  const Box file{500, 400, 660, 460};
  const Box term{1700, 900, 1800, 980};
  const Box copy_opt{520, 480, 660, 520};

  Scenario s;
  s.id = "fs_copy_file";
  s.domain = Domain::file_system;
  s.gui_only = true;
  s.instruction = "Duplicate document.txt on the desktop";
  s.plan = {{"select document.txt", 2},
            {"copy the file", 4},
            {"paste the copy", 5}};

  Stage desktop;
  desktop.name = "desktop";
  desktop.reasoning = "document.txt is on the desktop; select it first.";
  desktop.entities = {entity("document.txt file", "file", 500, 400, 660, 460),
                      entity("terminal icon", "terminal", 1700, 900, 1800, 980)};
  desktop.transitions = {
      go(pointer(ActionType::click, file), 2),
      side(pointer(ActionType::click, term), 1, Modality::terminal),
  };

  Stage terminal_open;
  terminal_open.name = "terminal_open";
  terminal_open.reasoning = "A terminal is open.";
  terminal_open.entities = {
      entity("terminal window", "terminal", 200, 200, 1700, 1000)};
  terminal_open.transitions = {
      side(typed("cp document.txt copy.txt"), 5, Modality::terminal)};

  Stage selected;
  selected.name = "file_selected";
  selected.reasoning =
      "document.txt is selected; copy it with the keyboard or the menu.";
  selected.entities = desktop.entities;
  selected.transitions = {
      go(key("Ctrl+C"), 4),
      go(pointer(ActionType::right_click, file), 3),
  };

  Stage menu;
  menu.name = "context_menu";
  menu.reasoning = "The context menu is open; pick copy.";
  menu.entities = {entity("document.txt file", "file", 500, 400, 660, 460),
                   entity("copy option", "menu_item", 520, 480, 660, 520)};
  menu.transitions = {go(pointer(ActionType::click, copy_opt), 4)};

  Stage copied;
  copied.name = "copied";
  copied.reasoning = "The file is on the clipboard; paste it.";
  copied.entities = desktop.entities;
  copied.transitions = {go(key("Ctrl+V"), 5)};

  Stage done;
  done.name = "duplicated";
  done.reasoning = "A copy of document.txt exists.";
  done.entities = {entity("copy of document.txt", "file", 700, 400, 860, 460)};

  s.stages = {desktop, terminal_open, selected, menu, copied, done};
  s.success_stage = 5;
  return s;
}

inline Scenario scenario_web_open_site() {
  using namespace builders;
  const Box bookmark{300, 80, 460, 120};
  const Box address{500, 40, 1400, 90};

  Scenario s;
  s.id = "web_open_site";
  s.domain = Domain::web;
  s.instruction = "Open www.example.com in the browser";
  s.plan = {{"navigate to www.example.com", 2},
            {"confirm the page loaded", 2}};

  Stage home;
  home.name = "browser_home";
  home.reasoning =
      "The browser shows the home view; use the bookmark or type the URL.";
  home.entities = {entity("example bookmark", "button", 300, 80, 460, 120),
                   entity("address bar", "field", 500, 40, 1400, 90),
                   entity("ads banner", "decoy", 600, 600, 1000, 800)};
  home.transitions = {
      go(pointer(ActionType::click, bookmark), 2),
      go(pointer(ActionType::click, address), 1),
  };

  Stage focused;
  focused.name = "address_focused";
  focused.reasoning = "The address bar is focused; type the URL.";
  focused.entities = {entity("address bar", "field", 500, 40, 1400, 90)};
  focused.transitions = {go(typed("www.example.com"), 2)};

  Stage loaded;
  loaded.name = "site_loaded";
  loaded.reasoning = "example.com is loaded.";
  loaded.entities = {entity("page body", "window", 200, 150, 1700, 1000)};

  s.stages = {home, focused, loaded};
  s.success_stage = 2;
  return s;
}

inline Scenario scenario_web_search_laptop() {
  using namespace builders;
  const Box search{700, 100, 1200, 150};

  Scenario s;
  s.id = "web_search_laptop";
  s.domain = Domain::web;
  s.instruction = "Search the shop for a laptop";
  s.plan = {{"click the search box", 1},
            {"type the query laptop", 2},
            {"submit the search", 3}};

  Stage home;
  home.name = "shop_home";
  home.reasoning = "The shop home page is open; focus the search box.";
  home.entities = {entity("search box", "field", 700, 100, 1200, 150),
                   entity("ads banner", "decoy", 600, 700, 1000, 860)};
  home.transitions = {go(pointer(ActionType::click, search), 1)};

  Stage focused;
  focused.name = "search_focused";
  focused.reasoning = "The search box is focused; type the query.";
  focused.entities = {entity("search box", "field", 700, 100, 1200, 150)};
  focused.transitions = {go(typed("laptop"), 2)};

  Stage typed_q;
  typed_q.name = "query_typed";
  typed_q.reasoning = "The query is typed; submit it.";
  typed_q.entities = {entity("search box", "field", 700, 100, 1200, 150)};
  typed_q.transitions = {go(key("Enter"), 3)};

  Stage done;
  done.name = "results_shown";
  done.reasoning = "Search results are visible.";
  done.entities = {entity("results list", "window", 300, 200, 1600, 1000)};

  s.stages = {home, focused, typed_q, done};
  s.success_stage = 3;
  return s;
}

inline Scenario scenario_web_scroll_article() {
  using namespace builders;
  const Box body{200, 200, 1700, 1000};
  const Box subscribe{800, 900, 1100, 960};

  Scenario s;
  s.id = "web_scroll_article";
  s.domain = Domain::web;
  s.instruction = "Scroll to the end of the article and subscribe";
  s.plan = {{"scroll to the end of the article", 1},
            {"click the subscribe button", 2}};

  Stage top;
  top.name = "article_top";
  top.reasoning = "The article starts at the top; scroll down.";
  top.entities = {entity("article body", "window", 200, 200, 1700, 1000)};
  top.transitions = {go(pointer(ActionType::scroll_down, body), 1)};

  Stage bottom;
  bottom.name = "article_bottom";
  bottom.reasoning = "The end of the article shows the subscribe button.";
  bottom.entities = {entity("article body", "window", 200, 200, 1700, 1000),
                     entity("subscribe button", "button", 800, 900, 1100, 960)};
  bottom.transitions = {go(pointer(ActionType::click, subscribe), 2)};

  Stage done;
  done.name = "subscribed";
  done.reasoning = "The subscription is confirmed.";
  done.entities = {entity("confirmation banner", "window", 700, 400, 1300, 500)};

  s.stages = {top, bottom, done};
  s.success_stage = 2;
  return s;
}

inline Scenario scenario_web_login() {
  using namespace builders;
  const Box username{700, 300, 1200, 350};
  const Box password{700, 400, 1200, 450};
  const Box login{850, 650, 1050, 710};
  const Box dismiss{860, 500, 1060, 560};

  Scenario s;
  s.id = "web_login";
  s.domain = Domain::web;
  s.instruction = "Log into the account as alice";
  s.plan = {{"enter the username alice", 3},
            {"enter the password", 5},
            {"press the login button", 6}};
  s.corrective_steps = {"dismiss the login error dialog"};

  Stage page;
  page.name = "login_page";
  page.reasoning = "The login form is empty; focus the username field first.";
  page.entities = {entity("username field", "field", 700, 300, 1200, 350),
                   entity("password field", "field", 700, 400, 1200, 450),
                   entity("login button", "button", 850, 650, 1050, 710)};
  page.transitions = {
      go(pointer(ActionType::click, username), 2),
      side(pointer(ActionType::click, login), 1),
  };

  Stage error_dialog;
  error_dialog.name = "error_dialog";
  error_dialog.reasoning =
      "Submitting an empty form raised an error dialog; dismiss it.";
  error_dialog.entry_flags.error = true;
  error_dialog.entities = {
      entity("dismiss button", "button", 860, 500, 1060, 560)};
  error_dialog.transitions = {go(pointer(ActionType::click, dismiss), 0)};

  Stage user_focus;
  user_focus.name = "username_focused";
  user_focus.reasoning = "The username field is focused; type the name.";
  user_focus.entities = page.entities;
  user_focus.transitions = {go(typed("alice"), 3)};

  Stage user_typed;
  user_typed.name = "username_typed";
  user_typed.reasoning = "The username is set; focus the password field.";
  user_typed.entities = page.entities;
  user_typed.transitions = {go(pointer(ActionType::click, password), 4)};

  Stage pass_focus;
  pass_focus.name = "password_focused";
  pass_focus.reasoning = "The password field is focused; type the password.";
  pass_focus.entities = page.entities;
  pass_focus.transitions = {go(typed("hunter2"), 5)};

  Stage complete;
  complete.name = "form_complete";
  complete.reasoning = "Both fields are filled; press login.";
  complete.entities = page.entities;
  complete.transitions = {go(pointer(ActionType::click, login), 6)};

  Stage done;
  done.name = "logged_in";
  done.reasoning = "The account dashboard is visible.";
  done.entities = {entity("dashboard", "window", 200, 150, 1700, 1000)};

  s.stages = {page,       error_dialog, user_focus, user_typed,
              pass_focus, complete,     done};
  s.success_stage = 6;
  return s;
}

inline Scenario scenario_term_list_files() {
  using namespace builders;
  const Box termwin{200, 200, 1700, 1000};

  Scenario s;
  s.id = "term_list_files";
  s.domain = Domain::terminal;
  s.instruction = "List all files in the home directory from the terminal";
  s.plan = {{"focus the terminal window", 1}, {"run ls -la", 3}};

  Stage desktop;
  desktop.name = "desktop_with_terminal";
  desktop.reasoning = "A terminal window is visible; focus it.";
  desktop.entities = {entity("terminal window", "terminal", 200, 200, 1700, 1000)};
  desktop.transitions = {go(pointer(ActionType::click, termwin), 1)};

  Stage focused;
  focused.name = "terminal_focused";
  focused.reasoning = "The terminal is focused; type the command.";
  focused.entities = desktop.entities;
  focused.transitions = {go(typed("ls -la"), 2)};

  Stage typed_cmd;
  typed_cmd.name = "command_typed";
  typed_cmd.reasoning = "The command is typed; execute it.";
  typed_cmd.entities = desktop.entities;
  typed_cmd.transitions = {go(key("Enter"), 3)};

  Stage done;
  done.name = "listing_shown";
  done.reasoning = "The file listing is printed.";
  done.entities = desktop.entities;

  s.stages = {desktop, focused, typed_cmd, done};
  s.success_stage = 3;
  return s;
}

inline Scenario scenario_term_update_package() {
  using namespace builders;

  Scenario s;
  s.id = "term_update_package";
  s.domain = Domain::terminal;
  s.instruction = "Refresh the package index in the terminal";
  s.plan = {{"type the update command", 1},
            {"execute and wait for completion", 3}};

  Stage focused;
  focused.name = "terminal_focused";
  focused.reasoning = "The terminal is ready; type the update command.";
  focused.entities = {entity("terminal window", "terminal", 200, 200, 1700, 1000)};
  focused.transitions = {go(typed("sudo apt update"), 1)};

  Stage typed_cmd;
  typed_cmd.name = "command_typed";
  typed_cmd.reasoning = "The command is typed; execute it.";
  typed_cmd.entities = focused.entities;
  typed_cmd.transitions = {go(key("Enter"), 2)};

  Stage running;
  running.name = "command_running";
  running.reasoning = "The update is running; wait for it to finish.";
  running.entities = focused.entities;
  running.transitions = {go(wait_action(), 3)};

  Stage done;
  done.name = "index_refreshed";
  done.reasoning = "The package index is up to date.";
  done.entities = focused.entities;

  s.stages = {focused, typed_cmd, running, done};
  s.success_stage = 3;
  return s;
}

inline Scenario scenario_term_edit_config() {
  using namespace builders;

  Scenario s;
  s.id = "term_edit_config";
  s.domain = Domain::terminal;
  s.instruction = "Set mode=fast in config.txt using the terminal editor";
  s.plan = {{"open config.txt in the editor", 2},
            {"write the setting mode=fast", 4}};

  Stage focused;
  focused.name = "terminal_focused";
  focused.reasoning = "The terminal is ready; open the editor.";
  focused.entities = {entity("terminal window", "terminal", 200, 200, 1700, 1000)};
  focused.transitions = {go(typed("nano config.txt"), 1)};

  Stage typed_cmd;
  typed_cmd.name = "command_typed";
  typed_cmd.reasoning = "The editor command is typed; run it.";
  typed_cmd.entities = focused.entities;
  typed_cmd.transitions = {go(key("Enter"), 2)};

  Stage editor;
  editor.name = "editor_open";
  editor.reasoning = "The editor is open; type the setting.";
  editor.entities = focused.entities;
  editor.transitions = {go(typed("mode=fast"), 3)};

  Stage entered;
  entered.name = "text_entered";
  entered.reasoning = "The setting is typed; save the file.";
  entered.entities = focused.entities;
  entered.transitions = {go(key("Ctrl+O"), 4)};

  Stage done;
  done.name = "config_saved";
  done.reasoning = "config.txt now contains mode=fast.";
  done.entities = focused.entities;

  s.stages = {focused, typed_cmd, editor, entered, done};
  s.success_stage = 4;
  return s;
}

inline Scenario scenario_term_service_status() {
  using namespace builders;

  Scenario s;
  s.id = "term_service_status";
  s.domain = Domain::terminal;
  s.instruction = "Check the status of the app service";
  s.plan = {{"query the app service status", 1},
            {"confirm the status output", 2}};

  Stage focused;
  focused.name = "terminal_focused";
  focused.reasoning =
      "The terminal is ready; either status command works here.";
  focused.entities = {entity("terminal window", "terminal", 200, 200, 1700, 1000)};
  focused.transitions = {
      go(typed("systemctl status app"), 1),
      go(typed("service app status"), 1),
  };

  Stage typed_cmd;
  typed_cmd.name = "command_typed";
  typed_cmd.reasoning = "The status command is typed; execute it.";
  typed_cmd.entities = focused.entities;
  typed_cmd.transitions = {go(key("Enter"), 2)};

  Stage done;
  done.name = "status_shown";
  done.reasoning = "The service status is printed.";
  done.entities = focused.entities;

  s.stages = {focused, typed_cmd, done};
  s.success_stage = 2;
  return s;
}

inline std::vector<Scenario> builtin_scenarios() {
  return {
      scenario_fs_open_report(),  scenario_fs_rename_notes(),
      scenario_fs_delete_temp(),  scenario_fs_new_folder(),
      scenario_fs_copy_file(),    scenario_web_open_site(),
      scenario_web_search_laptop(), scenario_web_scroll_article(),
      scenario_web_login(),       scenario_term_list_files(),
      scenario_term_update_package(), scenario_term_edit_config(),
      scenario_term_service_status(),
  };
}

// Multi-solution subset used for the qualitative-ordering runs.
inline std::vector<Scenario> multipath_scenarios() {
  return {scenario_fs_open_report(), scenario_fs_delete_temp(),
          scenario_web_open_site(), scenario_term_service_status()};
}

// Small two-solution pair for distillation convergence runs.
inline std::vector<Scenario> two_solution_scenarios() {
  return {scenario_fs_open_report(), scenario_web_open_site()};
}

inline std::vector<Scenario> scenario_set_by_name(const std::string& name) {
  if (name == "core") return builtin_scenarios();
  if (name == "multipath") return multipath_scenarios();
  if (name == "two-solution") return two_solution_scenarios();
  throw std::invalid_argument("unknown scenario set: " + name);
}

}  // namespace litegui
