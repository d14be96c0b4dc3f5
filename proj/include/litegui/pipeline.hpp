#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "litegui/policy.hpp"
#include "litegui/scenarios.hpp"
#include "litegui/sim.hpp"

namespace litegui {

// ---------------------------------------------------------------------------
// Automated trajectory generation: a generation-verification-correction loop
// with three-vote majority consensus, recency fallback, sliding-window
// truncation, multi-solution exploration, and file-based audit. Datasets are
// line-delimited JSON with a versioned header line.
// ---------------------------------------------------------------------------

struct Verdict {
  bool yes = false;
  std::string reasoning;
};

struct IterationRecord {
  int iteration = 1;  // 1-based
  std::string raw_output;
  std::optional<StructuredOutput> parsed;
  std::vector<Verdict> verdicts;  // exactly three
  int yes_count = 0;

  void validate() const {
    if (verdicts.size() != 3)
      throw std::invalid_argument("IterationRecord: exactly three verdicts");
    int n = 0;
    for (const auto& v : verdicts) n += v.yes ? 1 : 0;
    if (n != yes_count)
      throw std::invalid_argument("IterationRecord: yes_count mismatch");
  }
};

enum class CommitRule { consensus, recency_fallback };

struct CommitDecision {
  std::size_t index = 0;  // into the iteration list
  CommitRule rule = CommitRule::consensus;
};

// First iteration reaching a two-vote majority wins; without consensus, the
// latest iteration among those with the highest yes count is committed.
inline CommitDecision commit_action(const std::vector<IterationRecord>& iters,
                                    int n_max = 3) {
  if (iters.empty())
    throw std::invalid_argument("commit_action: empty iteration list");
  if (static_cast<int>(iters.size()) > n_max)
    throw std::invalid_argument("commit_action: more iterations than N_max");
  for (std::size_t i = 0; i < iters.size(); ++i) {
    iters[i].validate();
    if (iters[i].yes_count >= 2) return {i, CommitRule::consensus};
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < iters.size(); ++i)
    if (iters[i].yes_count >= iters[best].yes_count) best = i;
  return {best, CommitRule::recency_fallback};
}

// True iff the action matches some annotated transition of the state's stage.
inline bool matches_annotation(const Scenario& scenario, const SimState& state,
                               const GuiAction& action) {
  for (const Transition& t : scenario.stage_at(state.stage).transitions)
    if (t.annotated && action_matches(action, t)) return true;
  return false;
}

struct GenerateConfig {
  int votes = 3;
  int n_max = 3;             // correction iterations per step
  double verifier_noise = 0.0;  // per-vote flip probability
  double temperature = 1.0;
  double top_p = 0.98;
  int window = 3;
};

// One generation-verification iteration. Feedback from earlier iterations is
// appended to the generator's context key as rejected action serials, which
// scripted generators honor as negative constraints.
inline IterationRecord generate_step(const TokenPolicy& generator,
                                     const Scenario& scenario,
                                     const SimState& state,
                                     const std::vector<IterationRecord>& history,
                                     std::uint64_t seed,
                                     const GenerateConfig& cfg = {}) {
  IterationRecord rec;
  rec.iteration = static_cast<int>(history.size()) + 1;

  ContextKey ctx(state_context_id(scenario, state));
  if (!history.empty()) {
    Json rejected = Json::array();
    for (const IterationRecord& h : history)
      if (h.parsed)
        rejected.push_back(canonical_action_serial(h.parsed->action));
    ctx.context_id += "||fb=" + rejected.dump();
  }

  const SampledSequence seq =
      sample_sequence(generator, ctx, cfg.temperature, cfg.top_p,
                      mix_seed(seed, 101 + rec.iteration));
  rec.raw_output = seq.text;
  const ParseResult parsed = parse_output(seq.text);
  if (!parsed.ok()) {
    for (int v = 0; v < cfg.votes; ++v)
      rec.verdicts.push_back({false, "candidate is not a parseable action"});
    rec.yes_count = 0;
    return rec;
  }
  rec.parsed = parsed.output();

  const bool correct =
      matches_annotation(scenario, state, parsed.output().action);
  for (int v = 0; v < cfg.votes; ++v) {
    Rng vote_rng(mix_seed(seed, 1000 + rec.iteration * 16 + v));
    bool yes = correct;
    if (cfg.verifier_noise > 0.0 && vote_rng.bernoulli(cfg.verifier_noise))
      yes = !yes;
    rec.verdicts.push_back({yes, yes ? "the action advances the task"
                                     : "the action does not advance the task"});
    rec.yes_count += yes ? 1 : 0;
  }
  return rec;
}

// ------------------------------- trajectories -------------------------------

struct StateSnapshot {
  int stage = 0;
  Flags flags;
  int clock_seconds = 0;

  static StateSnapshot of(const SimState& s) {
    return {s.stage, s.flags, s.clock_seconds};
  }
  friend bool operator==(const StateSnapshot&, const StateSnapshot&) = default;
};

struct TrajectoryStep {
  StateSnapshot state;
  std::string raw_output;
  std::optional<StructuredOutput> parsed;
  std::vector<IterationRecord> iterations;
  bool error_label = false;  // committed action is not annotated-valid
};

enum class Terminal { success, step_cap, declared_done };

inline std::string_view to_string(Terminal t) {
  switch (t) {
    case Terminal::success: return "success";
    case Terminal::step_cap: return "step_cap";
    case Terminal::declared_done: return "declared_done";
  }
  return "?";
}

struct TrajectoryRecord {
  std::string scenario_id;
  std::uint64_t seed = 0;
  std::vector<TrajectoryStep> steps;
  Terminal terminal = Terminal::step_cap;
  bool success = false;
  bool compliance = true;
};

inline Json flags_to_json(const Flags& f) {
  return Json{{"error", f.error}, {"loop", f.loop}, {"stuck", f.stuck}};
}

inline Flags flags_from_json(const Json& j) {
  return Flags{j.at("stuck").get<bool>(), j.at("error").get<bool>(),
               j.at("loop").get<bool>()};
}

inline Json snapshot_to_json(const StateSnapshot& s) {
  return Json{{"clock", s.clock_seconds},
              {"flags", flags_to_json(s.flags)},
              {"stage", s.stage}};
}

inline StateSnapshot snapshot_from_json(const Json& j) {
  return StateSnapshot{j.at("stage").get<int>(),
                       flags_from_json(j.at("flags")),
                       j.at("clock").get<int>()};
}

inline Json iteration_to_json(const IterationRecord& r) {
  Json verdicts = Json::array();
  for (const auto& v : r.verdicts)
    verdicts.push_back(Json{{"reasoning", v.reasoning}, {"yes", v.yes}});
  Json j = Json::object();
  j["index"] = r.iteration;
  j["parsed"] = r.parsed ? output_to_json(*r.parsed) : Json();
  j["raw_output"] = r.raw_output;
  j["verdicts"] = std::move(verdicts);
  j["yes_count"] = r.yes_count;
  return j;
}

inline IterationRecord iteration_from_json(const Json& j) {
  IterationRecord r;
  r.iteration = j.at("index").get<int>();
  r.raw_output = j.at("raw_output").get<std::string>();
  if (!j.at("parsed").is_null()) {
    ParseResult p = parse_output(j.at("parsed").dump());
    if (!p.ok())
      throw std::runtime_error("iteration record: unparseable candidate");
    r.parsed = p.output();
  }
  for (const auto& v : j.at("verdicts"))
    r.verdicts.push_back(
        {v.at("yes").get<bool>(), v.at("reasoning").get<std::string>()});
  r.yes_count = j.at("yes_count").get<int>();
  r.validate();
  return r;
}

inline Json trajectory_to_json(const TrajectoryRecord& t) {
  Json steps = Json::array();
  for (const auto& s : t.steps) {
    Json js = Json::object();
    js["error_label"] = s.error_label;
    Json iters = Json::array();
    for (const auto& it : s.iterations) iters.push_back(iteration_to_json(it));
    js["iterations"] = std::move(iters);
    js["parsed"] = s.parsed ? output_to_json(*s.parsed) : Json();
    js["raw_output"] = s.raw_output;
    js["state"] = snapshot_to_json(s.state);
    steps.push_back(std::move(js));
  }
  Json j = Json::object();
  j["compliance"] = t.compliance;
  j["scenario_id"] = t.scenario_id;
  j["seed"] = t.seed;
  j["steps"] = std::move(steps);
  j["success"] = t.success;
  j["terminal"] = std::string(to_string(t.terminal));
  return j;
}

inline TrajectoryRecord trajectory_from_json(const Json& j) {
  TrajectoryRecord t;
  t.compliance = j.at("compliance").get<bool>();
  t.scenario_id = j.at("scenario_id").get<std::string>();
  t.seed = j.at("seed").get<std::uint64_t>();
  const std::string term = j.at("terminal").get<std::string>();
  if (term == "success") t.terminal = Terminal::success;
  else if (term == "step_cap") t.terminal = Terminal::step_cap;
  else if (term == "declared_done") t.terminal = Terminal::declared_done;
  else throw std::runtime_error("trajectory: unknown terminal " + term);
  t.success = j.at("success").get<bool>();
  for (const auto& js : j.at("steps")) {
    TrajectoryStep s;
    s.error_label = js.at("error_label").get<bool>();
    for (const auto& it : js.at("iterations"))
      s.iterations.push_back(iteration_from_json(it));
    if (!js.at("parsed").is_null()) {
      ParseResult p = parse_output(js.at("parsed").dump());
      if (!p.ok()) throw std::runtime_error("trajectory: unparseable output");
      s.parsed = p.output();
    }
    s.raw_output = js.at("raw_output").get<std::string>();
    s.state = snapshot_from_json(js.at("state"));
    t.steps.push_back(std::move(s));
  }
  return t;
}

// ------------------------------- dataset files ------------------------------

inline constexpr int kDatasetVersion = 1;

inline void dataset_write(const std::string& path,
                          const std::vector<TrajectoryRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("dataset_write: cannot open " + path);
  out << Json{{"format", "litegui.trajectories"},
              {"version", kDatasetVersion}}
             .dump()
      << '\n';
  for (const auto& r : records) out << trajectory_to_json(r).dump() << '\n';
  if (!out) throw std::runtime_error("dataset_write: write failed: " + path);
}

inline std::vector<TrajectoryRecord> dataset_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("dataset_read: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("dataset_read: missing header line");
  const Json header = Json::parse(line, nullptr, false);
  if (header.is_discarded() ||
      header.value("format", "") != "litegui.trajectories")
    throw std::runtime_error("dataset_read: unrecognized header");
  if (header.value("version", -1) != kDatasetVersion)
    throw std::runtime_error("dataset_read: version mismatch");
  std::vector<TrajectoryRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw std::runtime_error("dataset_read: malformed line " +
                               std::to_string(line_no));
    try {
      records.push_back(trajectory_from_json(j));
    } catch (const std::exception& e) {
      throw std::runtime_error("dataset_read: line " +
                               std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

// ----------------------------- windowed samples -----------------------------

struct WindowedSample {
  std::string scenario_id;
  std::string instruction;
  int step_index = 1;  // 1-based position of the final step
  std::vector<std::pair<StateSnapshot, std::string>> history;
  StateSnapshot current;
  std::vector<GuiAction> candidates;
  std::vector<std::optional<bool>> marks;  // audit accept/reject per candidate
};

// One sample per trajectory step; sample t covers steps max(1, t-w+1)..t,
// i.e. up to w-1 history pairs plus the current state.
inline std::vector<WindowedSample> window_slice(const TrajectoryRecord& record,
                                                const Scenario& scenario,
                                                int w = 3) {
  if (record.steps.empty())
    throw std::invalid_argument("window_slice: empty trajectory");
  if (w < 1) throw std::invalid_argument("window_slice: w must be >= 1");
  std::vector<WindowedSample> samples;
  const int n = static_cast<int>(record.steps.size());
  for (int t = 1; t <= n; ++t) {
    WindowedSample s;
    s.scenario_id = record.scenario_id;
    s.instruction = scenario.instruction;
    s.step_index = t;
    const int first = std::max(1, t - w + 1);
    for (int k = first; k < t; ++k)
      s.history.emplace_back(record.steps[k - 1].state,
                             record.steps[k - 1].raw_output);
    s.current = record.steps[t - 1].state;
    samples.push_back(std::move(s));
  }
  return samples;
}

inline Json windowed_sample_to_json(const WindowedSample& s) {
  Json history = Json::array();
  for (const auto& [snap, raw] : s.history)
    history.push_back(Json{{"output", raw}, {"state", snapshot_to_json(snap)}});
  Json candidates = Json::array();
  for (const auto& a : s.candidates) candidates.push_back(action_to_json(a));
  Json marks = Json::array();
  for (const auto& m : s.marks) marks.push_back(m ? Json(*m) : Json());
  Json j = Json::object();
  j["candidates"] = std::move(candidates);
  j["current"] = snapshot_to_json(s.current);
  j["history"] = std::move(history);
  j["instruction"] = s.instruction;
  j["marks"] = std::move(marks);
  j["scenario_id"] = s.scenario_id;
  j["step_index"] = s.step_index;
  return j;
}

inline WindowedSample windowed_sample_from_json(const Json& j) {
  WindowedSample s;
  s.scenario_id = j.at("scenario_id").get<std::string>();
  s.instruction = j.at("instruction").get<std::string>();
  s.step_index = j.at("step_index").get<int>();
  for (const auto& h : j.at("history"))
    s.history.emplace_back(snapshot_from_json(h.at("state")),
                           h.at("output").get<std::string>());
  s.current = snapshot_from_json(j.at("current"));
  for (const auto& a : j.at("candidates"))
    s.candidates.push_back(action_from_json(a));
  for (const auto& m : j.at("marks"))
    s.marks.push_back(m.is_null() ? std::optional<bool>()
                                  : std::optional<bool>(m.get<bool>()));
  return s;
}

struct ExploreResult {
  std::vector<GuiAction> actions;  // deduplicated, first-occurrence order
  int parsed_count = 0;
  bool all_unparseable = false;
};

// Multi-solution exploration: n temperature samples from the final-step
// context, deduplicated by canonical action serialization.
inline ExploreResult explore_solutions(const TokenPolicy& policy,
                                       const ContextKey& context, int n,
                                       double temperature, std::uint64_t seed,
                                       double top_p = 0.98) {
  if (n < 1) throw std::invalid_argument("explore_solutions: n must be >= 1");
  ExploreResult res;
  std::set<std::string> seen;
  for (int i = 0; i < n; ++i) {
    const SampledSequence seq = sample_sequence(
        policy, context, temperature, top_p, mix_seed(seed, 7000 + i));
    const ParseResult parsed = parse_output(seq.text);
    if (!parsed.ok()) continue;
    res.parsed_count += 1;
    const std::string serial =
        canonical_action_serial(parsed.output().action);
    if (seen.insert(serial).second)
      res.actions.push_back(parsed.output().action);
  }
  res.all_unparseable = res.parsed_count == 0;
  return res;
}

// --------------------------------- auditing ---------------------------------

struct ReviewMark {
  int sample_index = 0;
  int candidate_index = 0;
  bool accept = false;
};

inline void audit_export(const std::string& path,
                         const std::vector<WindowedSample>& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("audit_export: cannot open " + path);
  out << Json{{"format", "litegui.review"}, {"version", 1}}.dump() << '\n';
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t c = 0; c < samples[i].candidates.size(); ++c) {
      Json j = Json::object();
      j["action"] = action_to_json(samples[i].candidates[c]);
      j["candidate"] = c;
      j["mark"] = samples[i].marks.size() > c && samples[i].marks[c]
                      ? Json(*samples[i].marks[c])
                      : Json();
      j["sample"] = i;
      out << j.dump() << '\n';
    }
  }
}

inline std::vector<ReviewMark> audit_import(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("audit_import: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("audit_import: missing header");
  const Json header = Json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "litegui.review")
    throw std::runtime_error("audit_import: unrecognized header");
  std::vector<ReviewMark> marks;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("sample") || !j.contains("candidate"))
      throw std::runtime_error("audit_import: malformed line " +
                               std::to_string(line_no));
    if (j.at("mark").is_null()) continue;  // unreviewed rows pass through
    marks.push_back(ReviewMark{j.at("sample").get<int>(),
                               j.at("candidate").get<int>(),
                               j.at("mark").get<bool>()});
  }
  return marks;
}

// Applies review marks to a sample. Marks referencing unknown candidates and
// duplicate marks are errors.
inline void apply_audit(WindowedSample& sample,
                        const std::vector<ReviewMark>& marks) {
  sample.marks.assign(sample.candidates.size(), std::nullopt);
  for (const ReviewMark& m : marks) {
    if (m.candidate_index < 0 ||
        m.candidate_index >= static_cast<int>(sample.candidates.size()))
      throw std::invalid_argument("apply_audit: unknown candidate index " +
                                  std::to_string(m.candidate_index));
    if (sample.marks[m.candidate_index])
      throw std::invalid_argument("apply_audit: duplicate mark for candidate " +
                                  std::to_string(m.candidate_index));
    sample.marks[m.candidate_index] = m.accept;
  }
}

// Ground-truth auto-auditor: accept exactly the candidates that match an
// annotated transition at the sample's state.
inline std::vector<ReviewMark> auto_audit(const Scenario& scenario,
                                          const SimState& state,
                                          const WindowedSample& sample,
                                          int sample_index = 0) {
  std::vector<ReviewMark> marks;
  for (std::size_t c = 0; c < sample.candidates.size(); ++c)
    marks.push_back(ReviewMark{
        sample_index, static_cast<int>(c),
        matches_annotation(scenario, state, sample.candidates[c])});
  return marks;
}

// Accepted candidates become the sample's valid action set; none accepted
// means the sample stays in the base set only.
inline std::optional<ValidActionSet> accepted_action_set(
    const WindowedSample& sample) {
  std::vector<GuiAction> accepted;
  for (std::size_t c = 0; c < sample.candidates.size(); ++c)
    if (c < sample.marks.size() && sample.marks[c] && *sample.marks[c])
      accepted.push_back(sample.candidates[c]);
  if (accepted.empty()) return std::nullopt;
  return ValidActionSet(std::move(accepted));
}

// --------------------------- pipeline episode loop --------------------------

// Full generation-verification-correction episode: per state, iterate
// generate_step until consensus or N_max, commit, execute the committed
// action, and label steps whose committed action is not annotated-valid.
inline TrajectoryRecord run_pipeline_episode(const Scenario& scenario,
                                             const TokenPolicy& generator,
                                             std::uint64_t seed,
                                             const GenerateConfig& cfg = {}) {
  TrajectoryRecord traj;
  traj.scenario_id = scenario.id;
  traj.seed = seed;
  SimState state = scenario.initial_state();

  for (int t = 0; t < scenario.step_cap; ++t) {
    std::vector<IterationRecord> iterations;
    for (int i = 0; i < cfg.n_max; ++i) {
      iterations.push_back(generate_step(generator, scenario, state,
                                         iterations,
                                         mix_seed(seed, t * 31 + i), cfg));
      if (iterations.back().yes_count >= 2) break;
    }
    const CommitDecision decision = commit_action(iterations, cfg.n_max);
    const IterationRecord& committed = iterations[decision.index];

    TrajectoryStep step;
    step.state = StateSnapshot::of(state);
    step.raw_output = committed.raw_output;
    step.parsed = committed.parsed;
    step.iterations = iterations;

    bool declared_done = false;
    if (committed.parsed) {
      const GuiAction& action = committed.parsed->action;
      step.error_label = !matches_annotation(scenario, state, action);
      const StepOutcome out = step_detailed(scenario, state, action);
      if (out.advanced && out.modality == Modality::terminal &&
          scenario.gui_only)
        traj.compliance = false;
      state = out.state;
      declared_done = committed.parsed->all_subtasks_done();
    } else {
      step.error_label = true;
      state = absorb_ineffective(state, committed.raw_output);
    }
    traj.steps.push_back(std::move(step));

    if (scenario.success(state)) {
      traj.terminal = Terminal::success;
      traj.success = traj.compliance;
      break;
    }
    if (declared_done) {
      traj.terminal = Terminal::declared_done;
      break;
    }
  }
  return traj;
}

}  // namespace litegui
