#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "litegui/config.hpp"
#include "litegui/metrics.hpp"
#include "litegui/pipeline.hpp"
#include "litegui/train.hpp"

namespace litegui {

// Command implementations behind the CLI. Every command is deterministic
// given (config, seeds): outputs carry no timestamps and all JSON is dumped
// with sorted keys, so identical runs produce byte-identical files.

namespace fs = std::filesystem;

inline void write_text_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Json j;
  in >> j;
  return j;
}

inline void save_policy(const TokenPolicy& policy, const Suite& suite,
                        const fs::path& path) {
  write_text_file(path, policy.to_snapshot(suite.signature()).dump() + "\n");
}

inline TokenPolicy load_policy(const fs::path& path, const Suite& suite) {
  const Json j = read_json_file(path);
  if (j.value("suite_signature", "") != suite.signature())
    throw std::runtime_error(
        "snapshot/scenario version mismatch: snapshot was trained on a "
        "different scenario suite");
  return TokenPolicy::from_snapshot(j, TokenPolicy::Role::student);
}

// ----------------------------------- train ----------------------------------

struct TrainSummary {
  Json json = Json::object();
};

inline TrainSummary cmd_train(const RunConfig& cfg) {
  cfg.validate();
  const Suite suite(cfg.load_scenarios(), cfg.suite);
  fs::create_directories(cfg.out_dir);

  Json per_seed = Json::array();
  for (std::uint64_t seed : cfg.seeds) {
    const fs::path metrics_path =
        fs::path(cfg.out_dir) / ("train_seed" + std::to_string(seed) + ".jsonl");
    const fs::path snapshot_path =
        fs::path(cfg.out_dir) / ("policy_seed" + std::to_string(seed) + ".json");
    MetricWriter writer(metrics_path.string());

    TokenPolicy student = suite.make_student();
    TrainOutcome outcome;
    try {
      student = run_training(suite, cfg, seed, &writer, &outcome);
    } catch (const std::exception& e) {
      // The update step validates gradients before mutating, so the policy
      // held here is the last good one.
      const fs::path last_good =
          fs::path(cfg.out_dir) /
          ("policy_seed" + std::to_string(seed) + ".last_good.json");
      save_policy(student, suite, last_good);
      throw std::runtime_error(std::string("training aborted: ") + e.what() +
                               "; last good snapshot at " + last_good.string());
    }
    save_policy(student, suite, snapshot_path);

    EvalReport report = evaluate_policy(suite, student, {seed},
                                        cfg.eval_episode,
                                        cfg.eval_episodes_per_scenario);
    report.config_echo = config_to_json(cfg);
    report.anomalies = Json{{"teacher_floor_hits", outcome.anomalies},
                            {"skipped_groups", outcome.skipped_groups}};
    const fs::path eval_path =
        fs::path(cfg.out_dir) / ("eval_seed" + std::to_string(seed) + ".json");
    write_text_file(eval_path, eval_report_to_json(report).dump() + "\n");

    Json row = Json::object();
    row["seed"] = seed;
    row["final_max_tv"] = outcome.final_max_tv;
    row["success_rate"] = report.aggregates.success_rate;
    row["grounding_accuracy"] = report.aggregates.grounding_accuracy;
    row["compliance_rate"] = report.aggregates.compliance_rate;
    row["steps_run"] = outcome.steps_run;
    per_seed.push_back(std::move(row));
  }

  TrainSummary summary;
  summary.json["config"] = config_to_json(cfg);
  summary.json["per_seed"] = std::move(per_seed);
  write_text_file(fs::path(cfg.out_dir) / "train_summary.json",
                  summary.json.dump() + "\n");
  return summary;
}

// ----------------------------------- eval -----------------------------------

inline EvalReport cmd_eval(const RunConfig& cfg,
                           const std::string& snapshot_path) {
  cfg.validate();
  const Suite suite(cfg.load_scenarios(), cfg.suite);
  const TokenPolicy policy = load_policy(snapshot_path, suite);
  EvalReport report =
      evaluate_policy(suite, policy, cfg.seeds, cfg.eval_episode,
                      cfg.eval_episodes_per_scenario);
  report.config_echo = config_to_json(cfg);
  fs::create_directories(cfg.out_dir);
  write_text_file(fs::path(cfg.out_dir) / "eval_report.json",
                  eval_report_to_json(report).dump() + "\n");
  return report;
}

// --------------------------------- generate ---------------------------------

struct GenerateSummary {
  int trajectories = 0;
  int steps = 0;
  int windows = 0;
  int consensus_commits = 0;
  int fallback_commits = 0;
  int multi_solution_samples = 0;
};

inline GenerateSummary cmd_generate(const RunConfig& cfg) {
  cfg.validate();
  const Suite suite(cfg.load_scenarios(), cfg.suite);
  const TokenPolicy generator = suite.make_teacher();
  fs::create_directories(cfg.out_dir);

  GenerateSummary sum;
  std::vector<TrajectoryRecord> trajectories;
  std::vector<WindowedSample> samples;

  for (int si = 0; si < static_cast<int>(suite.scenarios().size()); ++si) {
    const Scenario& sc = suite.scenario(si);
    for (std::uint64_t seed : cfg.seeds) {
      TrajectoryRecord traj =
          run_pipeline_episode(sc, generator, seed, cfg.pipeline);
      sum.trajectories += 1;
      sum.steps += static_cast<int>(traj.steps.size());
      for (const TrajectoryStep& step : traj.steps) {
        const CommitDecision d = commit_action(step.iterations, cfg.pipeline.n_max);
        if (d.rule == CommitRule::consensus)
          sum.consensus_commits += 1;
        else
          sum.fallback_commits += 1;
      }

      std::vector<WindowedSample> ws =
          window_slice(traj, sc, cfg.pipeline.window);
      for (WindowedSample& sample : ws) {
        // Rebuild the final-step state, explore alternatives, and audit them
        // against the simulator's annotations.
        SimState state;
        state.domain = sc.domain;
        state.stage = sample.current.stage;
        state.entities = sc.stage_at(state.stage).entities;
        state.flags = sample.current.flags;
        if (state.stage != sc.success_stage) {
          const ContextKey ctx(state_context_id(sc, state));
          const ExploreResult explored = explore_solutions(
              generator, ctx, cfg.explore_n, cfg.pipeline.temperature,
              mix_seed(seed, 3000 + sample.step_index), cfg.pipeline.top_p);
          sample.candidates = explored.actions;
          apply_audit(sample, auto_audit(sc, state, sample));
          if (accepted_action_set(sample)) sum.multi_solution_samples += 1;
        }
        samples.push_back(std::move(sample));
      }
      trajectories.push_back(std::move(traj));
    }
  }
  sum.windows = static_cast<int>(samples.size());

  dataset_write((fs::path(cfg.out_dir) / "trajectories.jsonl").string(),
                trajectories);
  {
    std::ofstream out(fs::path(cfg.out_dir) / "samples.jsonl",
                      std::ios::binary | std::ios::trunc);
    out << Json{{"format", "litegui.samples"}, {"version", 1}}.dump() << '\n';
    for (const WindowedSample& s : samples)
      out << windowed_sample_to_json(s).dump() << '\n';
  }
  audit_export((fs::path(cfg.out_dir) / "review.jsonl").string(), samples);

  Json j = Json::object();
  j["consensus_commits"] = sum.consensus_commits;
  j["fallback_commits"] = sum.fallback_commits;
  j["multi_solution_samples"] = sum.multi_solution_samples;
  j["steps"] = sum.steps;
  j["trajectories"] = sum.trajectories;
  j["windows"] = sum.windows;
  write_text_file(fs::path(cfg.out_dir) / "generate_summary.json",
                  j.dump() + "\n");
  return sum;
}

// ---------------------------------- ablate ----------------------------------

struct AblateCell {
  std::string name;
  std::string stage;
  GuidanceVariant guidance;
  std::string reward_mode;
  bool planning;
};

inline std::vector<AblateCell> default_ablation_matrix() {
  return {
      {"opd-none", "opd", GuidanceVariant::none, "multi", true},
      {"opd-single", "opd", GuidanceVariant::single_gt, "multi", true},
      {"opd-multi", "opd", GuidanceVariant::multi_gt, "multi", true},
      {"opd-most-matched", "opd", GuidanceVariant::most_matched, "multi", true},
      {"grpo-single", "two-stage", GuidanceVariant::most_matched, "single",
       false},
      {"grpo-multi", "two-stage", GuidanceVariant::most_matched, "multi",
       false},
      {"grpo-dual", "two-stage", GuidanceVariant::most_matched, "multi", true},
  };
}

struct AblateResult {
  // cell -> seed -> success rate
  std::map<std::string, std::map<std::uint64_t, double>> success;
  std::map<std::string, std::map<std::uint64_t, double>> grounding;
  Json table = Json::array();
  std::string table_text;
};

inline AblateResult cmd_ablate(const RunConfig& base_cfg,
                               const std::vector<AblateCell>& cells =
                                   default_ablation_matrix(),
                               std::ostream* log = nullptr) {
  base_cfg.validate();
  const Suite suite(base_cfg.load_scenarios(), base_cfg.suite);
  fs::create_directories(base_cfg.out_dir);
  MetricWriter rows(
      (fs::path(base_cfg.out_dir) / "ablate_rows.jsonl").string());

  AblateResult result;
  for (const AblateCell& cell : cells) {
    RunConfig cfg = base_cfg;
    cfg.stage = cell.stage;
    cfg.guidance = cell.guidance;
    cfg.reward_mode = cell.reward_mode;
    cfg.planning_reward = cell.planning;
    for (std::uint64_t seed : cfg.seeds) {
      const TokenPolicy student = run_training(suite, cfg, seed);
      const EvalReport report =
          evaluate_policy(suite, student, {seed}, cfg.eval_episode,
                          cfg.eval_episodes_per_scenario);
      result.success[cell.name][seed] = report.aggregates.success_rate;
      result.grounding[cell.name][seed] = report.aggregates.grounding_accuracy;
      Json rec = Json::object();
      rec["cell"] = cell.name;
      rec["seed"] = seed;
      rec["success_rate"] = report.aggregates.success_rate;
      rec["grounding_accuracy"] = report.aggregates.grounding_accuracy;
      rec["compliance_rate"] = report.aggregates.compliance_rate;
      rows.write(rec);
      if (log)
        *log << "cell=" << cell.name << " seed=" << seed
             << " sr=" << report.aggregates.success_rate << "\n";
    }
  }

  // Mean and standard error per cell, human-readable table.
  std::string text =
      "cell                 mean_SR   stderr    mean_Acc  seeds\n";
  for (const AblateCell& cell : cells) {
    const auto& per_seed = result.success[cell.name];
    double mean = 0.0;
    for (const auto& [_, sr] : per_seed) mean += sr;
    mean /= double(per_seed.size());
    double var = 0.0;
    for (const auto& [_, sr] : per_seed) var += (sr - mean) * (sr - mean);
    const double stderr_v =
        per_seed.size() > 1
            ? std::sqrt(var / double(per_seed.size() - 1)) /
                  std::sqrt(double(per_seed.size()))
            : 0.0;
    double acc = 0.0;
    for (const auto& [_, a] : result.grounding[cell.name]) acc += a;
    acc /= double(per_seed.size());

    Json row = Json::object();
    row["cell"] = cell.name;
    row["mean_success_rate"] = mean;
    row["stderr"] = stderr_v;
    row["mean_grounding_accuracy"] = acc;
    row["seeds"] = per_seed.size();
    result.table.push_back(row);

    char buf[160];
    std::snprintf(buf, sizeof buf, "%-20s %-9.4f %-9.4f %-9.4f %zu\n",
                  cell.name.c_str(), mean, stderr_v, acc, per_seed.size());
    text += buf;
  }
  result.table_text = text;
  write_text_file(fs::path(base_cfg.out_dir) / "ablate_table.txt", text);
  write_text_file(fs::path(base_cfg.out_dir) / "ablate_table.json",
                  result.table.dump() + "\n");
  return result;
}

// Seed-wise ordering check between two cells: in how many seeds does `a`
// reach at least `b`'s success rate?
inline int ordering_holds_count(const AblateResult& r, const std::string& a,
                                const std::string& b) {
  int count = 0;
  for (const auto& [seed, sr_a] : r.success.at(a)) {
    const double sr_b = r.success.at(b).at(seed);
    if (sr_a >= sr_b - 1e-12) ++count;
  }
  return count;
}

}  // namespace litegui
