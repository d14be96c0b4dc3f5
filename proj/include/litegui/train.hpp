#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "litegui/config.hpp"
#include "litegui/episode.hpp"
#include "litegui/judge.hpp"
#include "litegui/metrics.hpp"
#include "litegui/objectives.hpp"
#include "litegui/pipeline.hpp"
#include "litegui/policy.hpp"
#include "litegui/scenarios.hpp"

namespace litegui {

// ---------------------------------------------------------------------------
// Training loops. The distillation stage walks training states round-robin,
// samples on-policy, builds guidance, and applies the exact distillation
// gradient. The group-relative stage samples G candidates per state, scores
// them with the multi-solution matcher, the rule-based judge, and the format
// term, and applies the clipped surrogate. Two-stage runs seed the second
// stage with the distilled policy.
// ---------------------------------------------------------------------------

inline Guidance build_guidance(GuidanceVariant variant,
                               const ValidActionSet& set,
                               const ParseResult& student_output,
                               const MatchConfig& match, std::uint64_t seed) {
  switch (variant) {
    case GuidanceVariant::none: return Guidance::none();
    case GuidanceVariant::single_gt: return select_single_gt(set, seed);
    case GuidanceVariant::multi_gt: return select_multi_gt(set);
    case GuidanceVariant::most_matched:
      return select_most_matched_gt(student_output, set, match);
  }
  return Guidance::none();
}

// Max total-variation distance between the student and the guided teacher
// over every context of the autoregressive tree, for each training state.
// Guidance is rebuilt from the student's current greedy output, mirroring
// the most-matched training condition.
inline double eval_max_tv(const Suite& suite, const TokenPolicy& student,
                          const TokenPolicy& teacher,
                          const MatchConfig& match = MatchConfig{}) {
  double worst = 0.0;
  const int vsize = suite.vocab()->size();
  for (const StateInfo& info : suite.training_states()) {
    const ContextKey base(info.context_id);
    const SampledSequence greedy =
        sample_sequence(student, base, /*temperature=*/0.0, 1.0, 0);
    const Guidance g = build_guidance(GuidanceVariant::most_matched,
                                      suite.action_set_for(info),
                                      parse_output(greedy.text), match, 0);
    const ContextKey teacher_base = teacher_context(base, g);

    std::vector<std::vector<int>> frontier{{}};
    for (int depth = 0; depth < suite.l_max(); ++depth) {
      std::vector<std::vector<int>> next;
      for (const auto& prefix : frontier) {
        const ContextKey sctx{base.context_id, prefix};
        const ContextKey tctx{teacher_base.context_id, prefix};
        const std::vector<double> p = student.next_distribution(sctx);
        const std::vector<double> q = teacher.next_distribution(tctx);
        double tv = 0.0;
        for (int i = 0; i < vsize; ++i) tv += std::abs(p[i] - q[i]);
        worst = std::max(worst, 0.5 * tv);
        if (depth + 1 < suite.l_max()) {
          for (int tok = 0; tok < vsize; ++tok) {
            if (tok == suite.vocab()->eos_id()) continue;
            auto child = prefix;
            child.push_back(tok);
            next.push_back(std::move(child));
          }
        }
      }
      frontier = std::move(next);
    }
  }
  return worst;
}

struct OpdStepStats {
  double sample_loss = 0.0;
  double expected_divergence = 0.0;
  int teacher_floor_hits = 0;
};

// One guided distillation step on the given state. With probability
// 1 - lambda the demonstration (first valid candidate) replaces the
// on-policy sample, matching the generalized-distillation mixing knob.
inline OpdStepStats opd_train_step(const Suite& suite, TokenPolicy& student,
                                   const TokenPolicy& teacher,
                                   const StateInfo& info, int step,
                                   const OpdConfig& cfg,
                                   const MatchConfig& match,
                                   std::uint64_t seed) {
  const ContextKey base(info.context_id);
  SampledSequence sample;
  Rng mix_rng(mix_seed(seed, 40000 + step));
  if (cfg.on_policy_lambda >= 1.0 || mix_rng.bernoulli(cfg.on_policy_lambda)) {
    sample = sample_sequence(student, base, cfg.temperature, cfg.top_p,
                             mix_seed(seed, step));
  } else {
    for (const Candidate& c : info.candidates)
      if (c.valid) {
        sample.tokens = c.tokens;
        sample.text = c.text;
        for (std::size_t j = 0; j < c.tokens.size(); ++j) {
          ContextKey ctx{base.context_id,
                         {c.tokens.begin(), c.tokens.begin() + j}};
          sample.logprobs.push_back(student.logprob(ctx, c.tokens[j]));
        }
        break;
      }
  }

  const Guidance guidance =
      build_guidance(cfg.guidance, suite.action_set_for(info),
                     parse_output(sample.text), match, mix_seed(seed, step));
  const OpdLossResult res =
      opd_loss(student, teacher, base, guidance, sample, cfg);
  if (!std::isfinite(res.sample_loss) || !std::isfinite(res.expected_divergence))
    throw std::runtime_error("opd training: non-finite loss");
  apply_update(student, res.gradient, cfg.learning_rate);
  return {res.sample_loss, res.expected_divergence, res.teacher_floor_hits};
}

struct TrainOutcome {
  int steps_run = 0;
  double final_max_tv = 0.0;
  int anomalies = 0;
  int skipped_groups = 0;
};

inline TrainOutcome train_opd(const Suite& suite, TokenPolicy& student,
                              const OpdConfig& cfg, const MatchConfig& match,
                              std::uint64_t seed,
                              MetricWriter* writer = nullptr,
                              int tv_eval_every = 100) {
  cfg.validate();
  const TokenPolicy teacher = suite.make_teacher();
  const auto& states = suite.training_states();
  TrainOutcome out;
  for (int step = 0; step < cfg.steps; ++step) {
    const StateInfo& info = states[step % states.size()];
    const OpdStepStats stats =
        opd_train_step(suite, student, teacher, info, step, cfg, match, seed);
    out.anomalies += stats.teacher_floor_hits;
    out.steps_run = step + 1;
    if (writer) {
      Json rec = Json::object();
      rec["stage"] = "opd";
      rec["step"] = step;
      rec["loss"] = stats.sample_loss;
      rec["expected_divergence"] = stats.expected_divergence;
      rec["anomalies"] = stats.teacher_floor_hits;
      if (tv_eval_every > 0 &&
          (step % tv_eval_every == tv_eval_every - 1 || step + 1 == cfg.steps))
        rec["max_tv"] = eval_max_tv(suite, student, teacher, match);
      writer->write(rec);
    }
  }
  out.final_max_tv = eval_max_tv(suite, student, teacher, match);
  return out;
}

struct GrpoStepStats {
  double loss = 0.0;
  double mean_reward = 0.0;
  double clip_fraction = 0.0;
  bool skipped = false;
};

inline GrpoStepStats grpo_train_step(const Suite& suite, TokenPolicy& student,
                                     const StateInfo& info, int step,
                                     const GrpoConfig& cfg,
                                     const MatchConfig& match,
                                     bool multi_solution, bool planning,
                                     std::uint64_t seed,
                                     const TokenPolicy* reference = nullptr) {
  const ContextKey base(info.context_id);
  const ValidActionSet full_set = suite.action_set_for(info);
  const ValidActionSet reward_set =
      multi_solution ? full_set : full_set.first_only();

  // The sampling snapshot doubles as the old policy; with one optimizer step
  // per generation the ratios start at one, as in the reference setup.
  TokenPolicy old_policy = student;

  GroupBatch batch;
  batch.context = base;
  GrpoStepStats stats;
  for (int i = 0; i < cfg.group_size; ++i) {
    SampledSequence seq =
        sample_sequence(old_policy, base, cfg.temperature, cfg.top_p,
                        mix_seed(seed, step * 131 + i));
    const ParseResult parsed = parse_output(seq.text);
    const double judge_score =
        planning ? suite.judge_candidate(info, parsed) : 0.0;
    GrpoConfig reward_cfg = cfg;
    if (!planning) reward_cfg.w_subtask = 0.0;
    const double reward = total_reward(seq, reward_set, judge_score,
                                       reward_cfg, suite.l_max(), match);
    batch.sequences.push_back(std::move(seq));
    batch.rewards.push_back(reward);
    stats.mean_reward += reward;
  }
  stats.mean_reward /= double(cfg.group_size);
  batch.advantages = group_advantages(batch.rewards, cfg.advantage_epsilon);

  if (batch.degenerate()) {
    stats.skipped = true;  // dynamic-sampling: identical rewards carry no signal
    return stats;
  }
  const GrpoLossResult res =
      grpo_loss(student, old_policy, reference, batch, cfg);
  if (!std::isfinite(res.loss))
    throw std::runtime_error("grpo training: non-finite loss");
  apply_update(student, res.gradient, cfg.learning_rate);
  stats.loss = res.loss;
  stats.clip_fraction = res.clip_fraction;
  return stats;
}

inline TrainOutcome train_grpo(const Suite& suite, TokenPolicy& student,
                               const GrpoConfig& cfg, const MatchConfig& match,
                               bool multi_solution, bool planning,
                               std::uint64_t seed,
                               MetricWriter* writer = nullptr) {
  cfg.validate();
  const auto& states = suite.training_states();
  std::optional<TokenPolicy> reference;
  if (cfg.kl_coefficient > 0.0) reference = student;  // stage-start snapshot
  TrainOutcome out;
  for (int step = 0; step < cfg.steps; ++step) {
    const StateInfo& info = states[step % states.size()];
    const GrpoStepStats stats = grpo_train_step(
        suite, student, info, step, cfg, match, multi_solution, planning, seed,
        reference ? &*reference : nullptr);
    out.steps_run = step + 1;
    if (stats.skipped) out.skipped_groups += 1;
    if (writer) {
      Json rec = Json::object();
      rec["stage"] = "grpo";
      rec["step"] = step;
      rec["loss"] = stats.loss;
      rec["mean_reward"] = stats.mean_reward;
      rec["clip_fraction"] = stats.clip_fraction;
      rec["skipped"] = stats.skipped;
      writer->write(rec);
    }
  }
  return out;
}

// Seeded evaluation over a scenario suite: success rate, grounding accuracy,
// compliance, per-domain breakdown.
inline EvalReport evaluate_policy(const Suite& suite, const TokenPolicy& policy,
                                  const std::vector<std::uint64_t>& seeds,
                                  const EpisodeConfig& cfg,
                                  int episodes_per_scenario) {
  EvalReport report;
  for (const Scenario& sc : suite.scenarios()) {
    for (std::uint64_t seed : seeds) {
      for (int e = 0; e < episodes_per_scenario; ++e) {
        const EpisodeResult r =
            run_episode(sc, policy, mix_seed(seed, 90000 + e), cfg);
        EvalRow row;
        row.scenario = sc.id;
        row.domain = std::string(to_string(sc.domain));
        row.seed = seed;
        row.episode = e;
        row.success = r.success;
        row.steps = r.steps;
        row.compliance = r.compliance;
        row.grounding_hits = r.grounding_hits;
        row.grounding_probes = r.grounding_probes;
        report.rows.push_back(row);
      }
    }
  }
  report.aggregates = compute_aggregates(report.rows);
  return report;
}

// Full training run for one seed per the configured stage(s). Returns the
// trained student; the caller owns snapshot/report persistence.
inline TokenPolicy run_training(const Suite& suite, const RunConfig& cfg,
                                std::uint64_t seed,
                                MetricWriter* writer = nullptr,
                                TrainOutcome* outcome = nullptr) {
  cfg.validate();
  TokenPolicy student = suite.make_student();
  TrainOutcome agg;
  if (cfg.stage == "opd" || cfg.stage == "two-stage") {
    OpdConfig opd = cfg.opd;
    opd.guidance = cfg.guidance;
    const TrainOutcome o =
        train_opd(suite, student, opd, cfg.match, seed, writer);
    agg.steps_run += o.steps_run;
    agg.anomalies += o.anomalies;
    agg.final_max_tv = o.final_max_tv;
  }
  if (cfg.stage == "grpo" || cfg.stage == "two-stage") {
    const TrainOutcome o = train_grpo(
        suite, student, cfg.grpo, cfg.match, cfg.reward_mode == "multi",
        cfg.planning_reward, mix_seed(seed, 555), writer);
    agg.steps_run += o.steps_run;
    agg.skipped_groups += o.skipped_groups;
  }
  if (outcome) *outcome = agg;
  return student;
}

}  // namespace litegui
