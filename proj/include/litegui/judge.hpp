#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "litegui/action.hpp"
#include "litegui/matcher.hpp"
#include "litegui/sim.hpp"

namespace litegui {

// ---------------------------------------------------------------------------
// Long-horizon planning reward. The judge scores a subtask plan along four
// dimensions (task relevance, visual grounding, decomposition granularity,
// state consistency) and maps the pass count onto the discrete score set
// {0.0, 0.3, 0.5, 0.8, 1.0}. When the latest state is stuck, in error, or
// looping, the first unfinished subtask must describe a registered corrective
// action; otherwise relevance and consistency fail and the score is capped
// below 0.5. The reference implementation is a deterministic rule set over
// the simulator's ground truth; external backends plug in through a text
// protocol and the same verdict parser.
// ---------------------------------------------------------------------------

inline constexpr std::array<double, 5> kJudgeScoreSet = {0.0, 0.3, 0.5, 0.8,
                                                         1.0};

struct JudgeInput {
  std::string instruction;
  std::vector<SimState> states;             // window, oldest first, <= w
  std::vector<StructuredOutput> outputs;    // |outputs| == |states| - 1
  std::vector<Subtask> plan;                // current subtask plan c_t

  void validate() const {
    if (states.empty())
      throw std::invalid_argument("JudgeInput: needs at least one state");
    if (outputs.size() + 1 != states.size())
      throw std::invalid_argument(
          "JudgeInput: |outputs| must equal |states| - 1");
  }
};

struct JudgeVerdict {
  double score = 0.0;
  bool relevance = false;
  bool grounding = false;
  bool granularity = false;
  bool consistency = false;
  std::string rationale;
  bool anomaly = false;  // set by the response parser on malformed replies

  int passes() const {
    return int(relevance) + int(grounding) + int(granularity) +
           int(consistency);
  }
};

inline double snap_to_score_set(double raw) {
  double best = kJudgeScoreSet[0];
  double best_d = std::abs(raw - best);
  for (double s : kJudgeScoreSet) {
    const double d = std::abs(raw - s);
    // Ties resolve toward the lower grid value; the set is ascending.
    if (d < best_d - 1e-12) {
      best = s;
      best_d = d;
    }
  }
  return best;
}

inline double pass_count_score(int passes) {
  switch (passes) {
    case 4: return 1.0;
    case 3: return 0.8;
    case 2: return 0.5;
    case 1: return 0.3;
    default: return 0.0;
  }
}

class RuleBasedJudge {
 public:
  explicit RuleBasedJudge(const Scenario& scenario) : scenario_(&scenario) {}

  JudgeVerdict judge_plan(const JudgeInput& input) const {
    input.validate();
    JudgeVerdict v;
    if (input.plan.empty()) {
      v.rationale = "empty or unparsed plan";
      return v;  // score 0.0
    }
    const SimState& current = input.states.back();
    const bool abnormal = current.flags.any();
    const bool corrective_first = abnormal && first_unfinished_is_corrective(
                                                  input.plan);

    v.granularity = input.plan.size() >= 2 && input.plan.size() <= 8;
    v.relevance = all_unfinished_recognized(input.plan);
    v.grounding = grounded(input.plan, current);
    v.consistency = consistent_done_flags(input.plan, current.stage);

    std::string notes;
    if (abnormal && !corrective_first) {
      // Stuck-state rule: the plan ignores the obstacle.
      v.relevance = false;
      v.consistency = false;
      v.score = std::min(pass_count_score(v.passes()), 0.3);
      notes = "abnormal state without corrective first step; ";
    } else {
      if (abnormal && corrective_first) {
        // A corrective-first plan adapts to the abnormal state.
        v.relevance = true;
        notes = "corrective step addresses abnormal state; ";
      }
      v.score = pass_count_score(v.passes());
    }
    v.rationale = notes + dimension_summary(v);
    return v;
  }

 private:
  bool is_canonical_entry(const std::string& desc, int* index = nullptr) const {
    const std::string n = detail::normalize_value(desc);
    for (std::size_t i = 0; i < scenario_->plan.size(); ++i) {
      if (detail::normalize_value(scenario_->plan[i].description) == n) {
        if (index) *index = static_cast<int>(i);
        return true;
      }
    }
    return false;
  }

  bool is_corrective_entry(const std::string& desc) const {
    const std::string n = detail::normalize_value(desc);
    for (const auto& c : scenario_->corrective_steps)
      if (detail::normalize_value(c) == n) return true;
    return false;
  }

  bool first_unfinished_is_corrective(const std::vector<Subtask>& plan) const {
    for (const auto& s : plan) {
      if (s.done) continue;
      return is_corrective_entry(s.description);
    }
    return false;
  }

  bool all_unfinished_recognized(const std::vector<Subtask>& plan) const {
    for (const auto& s : plan) {
      if (s.done) continue;
      if (!is_canonical_entry(s.description) &&
          !is_corrective_entry(s.description))
        return false;
    }
    return true;
  }

  // Entity names mentioned anywhere in the plan must exist in the scenario;
  // the first unfinished entry's entity must be visible right now.
  bool grounded(const std::vector<Subtask>& plan,
                const SimState& current) const {
    bool first_unfinished_seen = false;
    for (const auto& s : plan) {
      const std::string n = detail::normalize_value(s.description);
      std::vector<std::string> mentioned;
      for (const auto& st : scenario_->stages) {
        for (const auto& e : st.entities) {
          if (n.find(detail::normalize_value(e.name)) != std::string::npos)
            mentioned.push_back(e.name);
        }
      }
      if (!s.done && !first_unfinished_seen) {
        first_unfinished_seen = true;
        for (const auto& name : mentioned)
          if (!current.has_entity(name)) return false;
      }
    }
    return true;
  }

  bool consistent_done_flags(const std::vector<Subtask>& plan,
                             int stage) const {
    const std::vector<bool> truth = scenario_->done_flags_at(stage);
    for (const auto& s : plan) {
      int idx = -1;
      if (!is_canonical_entry(s.description, &idx)) continue;
      if (s.done != truth.at(idx)) return false;
    }
    return true;
  }

  static std::string dimension_summary(const JudgeVerdict& v) {
    std::string s = "relevance=";
    s += v.relevance ? "pass" : "fail";
    s += " grounding=";
    s += v.grounding ? "pass" : "fail";
    s += " granularity=";
    s += v.granularity ? "pass" : "fail";
    s += " consistency=";
    s += v.consistency ? "pass" : "fail";
    return s;
  }

  const Scenario* scenario_;
};

// Parses an external backend's reply: a JSON object with a numeric "score"
// field. Off-grid values snap to the nearest member of the discrete set
// (ties toward the lower value); anything malformed scores 0.0 and raises
// the anomaly flag.
inline JudgeVerdict parse_judge_response(const std::string& text) {
  JudgeVerdict v;
  const Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object() || !j.contains("score") ||
      !j["score"].is_number()) {
    v.anomaly = true;
    v.rationale = "malformed judge response";
    return v;
  }
  v.score = snap_to_score_set(j["score"].get<double>());
  v.rationale = "external backend";
  return v;
}

// Prompt template shipped with the artifact (assets/judge_prompt.txt mirrors
// this text). Placeholders: {instruction}, {history}, {plan}.
inline const std::string& judge_prompt_template() {
  static const std::string kTemplate = R"(You are evaluating the subtask plan of a GUI agent.

Task instruction:
{instruction}

Recent interaction history (oldest first):
{history}

Current subtask plan ("[x]" = marked done, "[ ]" = not done):
{plan}

Score the plan along four dimensions:
1. Task relevance and adaptability: the plan reflects the task instruction and adapts to the current UI state.
2. Visual grounding: the plan refers to UI elements that actually exist in the current observation.
3. Decomposition granularity: the plan breaks the task into actionable subtasks at a reasonable granularity.
4. State consistency: completion markers agree with the latest observation.

If the latest observation indicates the agent is stuck, in an error state, or in a loop, the first unfinished subtask must explicitly describe a corrective action. If the plan ignores the obstacle, stays overly high-level, or carries completion markers inconsistent with the latest observation, assign a score below 0.5.

Answer with a single JSON object containing a score from the set {0.0, 0.3, 0.5, 0.8, 1.0}, for example:
{"score": 0.8}
)";
  return kTemplate;
}

inline std::string render_judge_request(const JudgeInput& input) {
  input.validate();
  std::string history;
  for (std::size_t i = 0; i < input.states.size(); ++i) {
    const SimState& s = input.states[i];
    history += "state " + std::to_string(i) + ": stage=" +
               std::to_string(s.stage) + " flags(stuck=" +
               (s.flags.stuck ? "1" : "0") + ",error=" +
               (s.flags.error ? "1" : "0") + ",loop=" +
               (s.flags.loop ? "1" : "0") + ") entities=[";
    for (std::size_t k = 0; k < s.entities.size(); ++k) {
      if (k) history += ", ";
      history += s.entities[k].name;
    }
    history += "]\n";
    if (i < input.outputs.size())
      history += "output " + std::to_string(i) + ": " +
                 canonical_serialize(input.outputs[i]) + "\n";
  }
  std::string plan;
  for (const auto& s : input.plan) plan += subtask_to_entry(s) + "\n";

  std::string req = judge_prompt_template();
  const auto replace = [&req](const std::string& key, const std::string& val) {
    const auto pos = req.find(key);
    if (pos != std::string::npos) req.replace(pos, key.size(), val);
  };
  replace("{instruction}", input.instruction);
  replace("{history}", history);
  replace("{plan}", plan);
  return req;
}

// Pluggable backend boundary: transport is a plain request->response text
// callback, so model-backed judges can be wired in without touching the
// reward code.
class TextJudgeBackend {
 public:
  using Transport = std::function<std::string(const std::string&)>;

  explicit TextJudgeBackend(Transport t) : transport_(std::move(t)) {}

  JudgeVerdict judge_plan(const JudgeInput& input) const {
    return parse_judge_response(transport_(render_judge_request(input)));
  }

 private:
  Transport transport_;
};

}  // namespace litegui
