#pragma once

#include <deque>
#include <vector>

#include "litegui/pipeline.hpp"
#include "litegui/policy.hpp"
#include "litegui/scenarios.hpp"
#include "litegui/sim.hpp"

namespace litegui {

// Closed-loop episode: sample -> parse -> step, keeping a sliding window of
// past (state, output) pairs. Terminates on success, the step cap, or the
// policy declaring every subtask done. Grounding probes count positioned
// actions whose point lands inside any annotated box at the decision state.

struct EpisodeConfig {
  int window = 3;  // states covered by the context window (w-1 pairs + current)
  double temperature = 1.0;
  double top_p = 0.98;
};

struct EpisodeResult {
  bool success = false;
  int steps = 0;
  bool compliance = true;
  TrajectoryRecord trajectory;
  int grounding_hits = 0;
  int grounding_probes = 0;
};

struct WindowEntry {
  SimState state;
  StructuredOutput output;
};

inline JudgeInput make_judge_input(const Scenario& scenario,
                                   const std::deque<WindowEntry>& window,
                                   const SimState& current,
                                   const std::vector<Subtask>& plan) {
  JudgeInput in;
  in.instruction = scenario.instruction;
  for (const auto& e : window) {
    in.states.push_back(e.state);
    in.outputs.push_back(e.output);
  }
  in.states.push_back(current);
  in.plan = plan;
  return in;
}

inline EpisodeResult run_episode(const Scenario& scenario,
                                 const TokenPolicy& policy,
                                 std::uint64_t seed,
                                 const EpisodeConfig& cfg = {}) {
  EpisodeResult res;
  res.trajectory.scenario_id = scenario.id;
  res.trajectory.seed = seed;
  SimState state = scenario.initial_state();
  std::deque<WindowEntry> window;

  for (int t = 0; t < scenario.step_cap; ++t) {
    const ContextKey ctx(state_context_id(scenario, state));
    const SampledSequence seq = sample_sequence(
        policy, ctx, cfg.temperature, cfg.top_p, mix_seed(seed, t));
    const ParseResult parsed = parse_output(seq.text);
    res.steps = t + 1;

    TrajectoryStep step;
    step.state = StateSnapshot::of(state);
    step.raw_output = seq.text;

    bool declared_done = false;
    if (parsed.ok()) {
      const StructuredOutput& out = parsed.output();
      step.parsed = out;
      step.error_label = !matches_annotation(scenario, state, out.action);

      // Grounding probe: any annotated box at this state vs the predicted
      // point.
      bool state_has_box = false, hit = false;
      for (const Transition& tr :
           scenario.stage_at(state.stage).transitions) {
        if (!tr.annotated || !tr.proto.position) continue;
        state_has_box = true;
        if (out.action.position &&
            grounding_eval(out.action.position->reduced_point(),
                           tr.proto.position->as_box()))
          hit = true;
      }
      if (state_has_box) {
        res.grounding_probes += 1;
        if (hit) res.grounding_hits += 1;
      }

      const StepOutcome outcome = step_detailed(scenario, state, out.action);
      if (outcome.advanced && outcome.modality == Modality::terminal &&
          scenario.gui_only)
        res.compliance = false;

      window.push_back(WindowEntry{state, out});
      while (static_cast<int>(window.size()) > cfg.window - 1)
        window.pop_front();
      state = outcome.state;
      declared_done = out.all_subtasks_done();
    } else {
      step.error_label = true;
      state = absorb_ineffective(state, seq.text);
    }
    res.trajectory.steps.push_back(std::move(step));

    if (scenario.success(state)) {
      res.trajectory.terminal = Terminal::success;
      break;
    }
    if (declared_done) {
      res.trajectory.terminal = Terminal::declared_done;
      break;
    }
  }

  res.trajectory.compliance = res.compliance;
  // Off-modality runs are recorded as failures even when the goal state is
  // reached.
  res.success = scenario.success(state) && res.compliance;
  res.trajectory.success = res.success;
  return res;
}

}  // namespace litegui
