// Command-line harness: train / generate / eval / ablate over the simulated
// GUI scenario suites. See README.md for the config file schema.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "litegui/harness.hpp"

namespace {

litegui::RunConfig make_config(const std::string& config_path,
                               const std::string& seed_csv,
                               const std::string& out_dir) {
  litegui::RunConfig cfg = config_path.empty()
                               ? litegui::config_from_json(litegui::Json::object())
                               : litegui::load_config(config_path);
  if (!seed_csv.empty()) {
    cfg.seeds.clear();
    std::size_t pos = 0;
    while (pos <= seed_csv.size()) {
      const std::size_t comma = seed_csv.find(',', pos);
      const std::string tok =
          seed_csv.substr(pos, comma == std::string::npos ? std::string::npos
                                                          : comma - pos);
      if (!tok.empty()) cfg.seeds.push_back(std::stoull(tok));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (cfg.seeds.empty())
      throw std::invalid_argument("--seed: no seeds parsed");
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale laboratory for guided on-policy distillation and "
               "multi-solution dual-level GRPO on simulated GUI tasks"};
  app.require_subcommand(1);

  std::string config_path, seed_csv, out_dir, snapshot_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--seed", seed_csv, "comma-separated seed list");
    cmd->add_option("--out", out_dir, "output directory");
  };

  CLI::App* train = app.add_subcommand(
      "train", "run the configured training stage(s) and evaluate");
  add_common(train);

  CLI::App* generate = app.add_subcommand(
      "generate", "produce verified trajectories and windowed samples");
  add_common(generate);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a policy snapshot");
  add_common(eval);
  eval->add_option("--snapshot", snapshot_path, "policy snapshot file")
      ->required();

  CLI::App* ablate = app.add_subcommand(
      "ablate", "run the guidance/reward/planning ablation matrix");
  add_common(ablate);

  CLI::App* scenarios = app.add_subcommand(
      "scenarios", "export the builtin scenario files");
  add_common(scenarios);

  CLI::App* judge_prompt = app.add_subcommand(
      "judge-prompt", "print the planning-reward prompt template");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const litegui::RunConfig cfg = make_config(config_path, seed_csv, out_dir);
      const litegui::TrainSummary summary = litegui::cmd_train(cfg);
      for (const auto& row : summary.json["per_seed"])
        std::cout << "seed=" << row["seed"] << " sr=" << row["success_rate"]
                  << " acc=" << row["grounding_accuracy"]
                  << " max_tv=" << row["final_max_tv"] << "\n";
      std::cout << "outputs in " << cfg.out_dir << "\n";
    } else if (*generate) {
      const litegui::RunConfig cfg = make_config(config_path, seed_csv, out_dir);
      const litegui::GenerateSummary s = litegui::cmd_generate(cfg);
      std::cout << "trajectories=" << s.trajectories << " steps=" << s.steps
                << " windows=" << s.windows
                << " consensus=" << s.consensus_commits
                << " fallback=" << s.fallback_commits
                << " multi_solution_samples=" << s.multi_solution_samples
                << "\n";
    } else if (*eval) {
      const litegui::RunConfig cfg = make_config(config_path, seed_csv, out_dir);
      const litegui::EvalReport report = litegui::cmd_eval(cfg, snapshot_path);
      std::cout << "episodes=" << report.aggregates.episodes
                << " sr=" << report.aggregates.success_rate
                << " acc=" << report.aggregates.grounding_accuracy
                << " compliance=" << report.aggregates.compliance_rate << "\n";
      for (const auto& [domain, sr] : report.aggregates.domain_success)
        std::cout << "  " << domain << ": sr=" << sr << "\n";
    } else if (*ablate) {
      const litegui::RunConfig cfg = make_config(config_path, seed_csv, out_dir);
      const litegui::AblateResult r =
          litegui::cmd_ablate(cfg, litegui::default_ablation_matrix(),
                              &std::cout);
      std::cout << r.table_text;
    } else if (*scenarios) {
      const litegui::RunConfig cfg = make_config(config_path, seed_csv, out_dir);
      namespace fs = std::filesystem;
      fs::create_directories(cfg.out_dir);
      for (const litegui::Scenario& sc : cfg.load_scenarios()) {
        const fs::path path = fs::path(cfg.out_dir) / (sc.id + ".json");
        litegui::write_text_file(path,
                                 litegui::scenario_to_json(sc).dump(2) + "\n");
        std::cout << path.string() << "\n";
      }
    } else if (*judge_prompt) {
      std::cout << litegui::judge_prompt_template();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
