#pragma once

#include <cstdlib>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "litegui/episode.hpp"
#include "litegui/guidance.hpp"
#include "litegui/matcher.hpp"
#include "litegui/objectives.hpp"
#include "litegui/pipeline.hpp"
#include "litegui/scenarios.hpp"

namespace litegui {

// ---------------------------------------------------------------------------
// Harness configuration. The config file is a JSON document; every knob has
// a default matching the paper-scale profile (G=16, clip 0.2/0.28, KL 0,
// reward profile 0.60/0.30/0.10, lambda 1.0, beta 1.0, temperature 1.0,
// top-p 0.98, window 3, exploration N=5, three votes, step cap 18). The
// "fast" profile shrinks group size and step counts for desk runs.
// Environment variables with the LITEGUI_ prefix override scalar keys;
// double underscores descend into nested objects, e.g.
// LITEGUI_GRPO__GROUP_SIZE=8.
// ---------------------------------------------------------------------------

struct RunConfig {
  std::string stage = "two-stage";  // opd | grpo | two-stage
  GuidanceVariant guidance = GuidanceVariant::most_matched;
  std::string scenario_set = "multipath";  // core | multipath | two-solution
  std::vector<std::string> scenario_files;  // overrides scenario_set if set
  OpdConfig opd;
  GrpoConfig grpo;
  MatchConfig match;
  SuiteOptions suite;
  std::string reward_mode = "multi";  // multi | single
  bool planning_reward = true;        // dual-level on/off
  EpisodeConfig eval_episode;
  int eval_episodes_per_scenario = 8;
  GenerateConfig pipeline;
  int explore_n = 5;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string out_dir = "out";

  void validate() const {
    if (stage != "opd" && stage != "grpo" && stage != "two-stage")
      throw std::invalid_argument("config: unknown stage " + stage);
    if (reward_mode != "multi" && reward_mode != "single")
      throw std::invalid_argument("config: unknown reward_mode " + reward_mode);
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
    if (eval_episodes_per_scenario < 1)
      throw std::invalid_argument("config: eval episodes must be >= 1");
    opd.validate();
    grpo.validate();
    match.validate();
  }

  std::vector<Scenario> load_scenarios() const {
    if (!scenario_files.empty()) {
      std::vector<Scenario> out;
      for (const std::string& path : scenario_files) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("config: cannot open " + path);
        Json j;
        in >> j;
        out.push_back(scenario_from_json(j));
      }
      return out;
    }
    return scenario_set_by_name(scenario_set);
  }
};

inline Json config_to_json(const RunConfig& c) {
  Json j = Json::object();
  j["stage"] = c.stage;
  j["guidance"] = std::string(to_string(c.guidance));
  j["scenario_set"] = c.scenario_set;
  j["scenario_files"] = c.scenario_files;
  j["reward_mode"] = c.reward_mode;
  j["planning_reward"] = c.planning_reward;
  j["out_dir"] = c.out_dir;
  j["seeds"] = c.seeds;
  j["explore_n"] = c.explore_n;
  j["eval"] = Json{{"episodes_per_scenario", c.eval_episodes_per_scenario},
                   {"temperature", c.eval_episode.temperature},
                   {"top_p", c.eval_episode.top_p},
                   {"window", c.eval_episode.window}};
  j["opd"] = Json{{"guidance", std::string(to_string(c.guidance))},
                  {"lambda", c.opd.on_policy_lambda},
                  {"beta", c.opd.beta_divergence},
                  {"learning_rate", c.opd.learning_rate},
                  {"steps", c.opd.steps},
                  {"temperature", c.opd.temperature},
                  {"top_p", c.opd.top_p},
                  {"teacher_logprob_floor", c.opd.teacher_logprob_floor}};
  j["grpo"] = Json{{"group_size", c.grpo.group_size},
                   {"clip_low", c.grpo.clip_low},
                   {"clip_high", c.grpo.clip_high},
                   {"kl_coefficient", c.grpo.kl_coefficient},
                   {"advantage_epsilon", c.grpo.advantage_epsilon},
                   {"w_gui", c.grpo.w_gui},
                   {"w_subtask", c.grpo.w_subtask},
                   {"w_format", c.grpo.w_format},
                   {"ratio_level", c.grpo.ratio_level == RatioLevel::token
                                       ? "token"
                                       : "sequence"},
                   {"learning_rate", c.grpo.learning_rate},
                   {"steps", c.grpo.steps},
                   {"temperature", c.grpo.temperature},
                   {"top_p", c.grpo.top_p}};
  j["match"] = Json{{"w_type", c.match.weights.w_type},
                    {"w_position", c.match.weights.w_position},
                    {"w_value", c.match.weights.w_value},
                    {"central_region_factor", c.match.central_region_factor},
                    {"position_decay_pixels", c.match.position_decay_pixels}};
  j["teacher"] = Json{{"valid_logit", c.suite.valid_logit},
                      {"guided_logit", c.suite.guided_logit},
                      {"hallucinations", c.suite.hallucinations}};
  j["pipeline"] = Json{{"votes", c.pipeline.votes},
                       {"n_max", c.pipeline.n_max},
                       {"verifier_noise", c.pipeline.verifier_noise},
                       {"temperature", c.pipeline.temperature},
                       {"top_p", c.pipeline.top_p},
                       {"window", c.pipeline.window}};
  return j;
}

namespace detail {

// LITEGUI_GRPO__GROUP_SIZE=8 overrides j["grpo"]["group_size"]. Values parse
// as JSON when possible and fall back to strings.
inline void apply_env_overrides(Json& j, const std::string& prefix) {
  for (auto& [key, value] : j.items()) {
    std::string name = prefix;
    for (char c : key)
      name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (value.is_object()) {
      apply_env_overrides(value, name + "__");
      continue;
    }
    if (const char* env = std::getenv(name.c_str())) {
      Json parsed = Json::parse(env, nullptr, /*allow_exceptions=*/false);
      value = parsed.is_discarded() ? Json(std::string(env)) : parsed;
    }
  }
}

}  // namespace detail

inline RunConfig config_from_json(Json j) {
  // Profiles first, then explicit keys, then environment overrides.
  RunConfig c;
  if (j.value("profile", "") == "fast") {
    c.grpo.group_size = 8;
    c.opd.steps = 400;
    c.grpo.steps = 200;
  }
  Json echo = config_to_json(c);
  for (auto& [key, value] : j.items()) {
    if (key == "profile") continue;
    if (!echo.contains(key))
      throw std::invalid_argument("config: unknown key " + key);
    if (echo[key].is_object()) {
      for (auto& [k2, v2] : value.items()) {
        if (!echo[key].contains(k2))
          throw std::invalid_argument("config: unknown key " + key + "." + k2);
        echo[key][k2] = v2;
      }
    } else {
      echo[key] = value;
    }
  }
  detail::apply_env_overrides(echo, "LITEGUI_");

  c.stage = echo.at("stage").get<std::string>();
  const auto gv =
      guidance_variant_from_string(echo.at("guidance").get<std::string>());
  if (!gv) throw std::invalid_argument("config: unknown guidance variant");
  c.guidance = *gv;
  c.opd.guidance = *gv;
  c.scenario_set = echo.at("scenario_set").get<std::string>();
  c.scenario_files = echo.at("scenario_files").get<std::vector<std::string>>();
  c.reward_mode = echo.at("reward_mode").get<std::string>();
  c.planning_reward = echo.at("planning_reward").get<bool>();
  c.out_dir = echo.at("out_dir").get<std::string>();
  c.seeds = echo.at("seeds").get<std::vector<std::uint64_t>>();
  c.explore_n = echo.at("explore_n").get<int>();

  const Json& je = echo.at("eval");
  c.eval_episodes_per_scenario = je.at("episodes_per_scenario").get<int>();
  c.eval_episode.temperature = je.at("temperature").get<double>();
  c.eval_episode.top_p = je.at("top_p").get<double>();
  c.eval_episode.window = je.at("window").get<int>();

  const Json& jo = echo.at("opd");
  c.opd.on_policy_lambda = jo.at("lambda").get<double>();
  c.opd.beta_divergence = jo.at("beta").get<double>();
  c.opd.learning_rate = jo.at("learning_rate").get<double>();
  c.opd.steps = jo.at("steps").get<int>();
  c.opd.temperature = jo.at("temperature").get<double>();
  c.opd.top_p = jo.at("top_p").get<double>();
  c.opd.teacher_logprob_floor = jo.at("teacher_logprob_floor").get<double>();

  const Json& jg = echo.at("grpo");
  c.grpo.group_size = jg.at("group_size").get<int>();
  c.grpo.clip_low = jg.at("clip_low").get<double>();
  c.grpo.clip_high = jg.at("clip_high").get<double>();
  c.grpo.kl_coefficient = jg.at("kl_coefficient").get<double>();
  c.grpo.advantage_epsilon = jg.at("advantage_epsilon").get<double>();
  c.grpo.w_gui = jg.at("w_gui").get<double>();
  c.grpo.w_subtask = jg.at("w_subtask").get<double>();
  c.grpo.w_format = jg.at("w_format").get<double>();
  c.grpo.ratio_level = jg.at("ratio_level").get<std::string>() == "sequence"
                           ? RatioLevel::sequence
                           : RatioLevel::token;
  c.grpo.learning_rate = jg.at("learning_rate").get<double>();
  c.grpo.steps = jg.at("steps").get<int>();
  c.grpo.temperature = jg.at("temperature").get<double>();
  c.grpo.top_p = jg.at("top_p").get<double>();

  const Json& jm = echo.at("match");
  c.match.weights.w_type = jm.at("w_type").get<double>();
  c.match.weights.w_position = jm.at("w_position").get<double>();
  c.match.weights.w_value = jm.at("w_value").get<double>();
  c.match.central_region_factor = jm.at("central_region_factor").get<double>();
  c.match.position_decay_pixels = jm.at("position_decay_pixels").get<double>();

  const Json& jt = echo.at("teacher");
  c.suite.valid_logit = jt.at("valid_logit").get<double>();
  c.suite.guided_logit = jt.at("guided_logit").get<double>();
  c.suite.hallucinations = jt.at("hallucinations").get<bool>();

  const Json& jp = echo.at("pipeline");
  c.pipeline.votes = jp.at("votes").get<int>();
  c.pipeline.n_max = jp.at("n_max").get<int>();
  c.pipeline.verifier_noise = jp.at("verifier_noise").get<double>();
  c.pipeline.temperature = jp.at("temperature").get<double>();
  c.pipeline.top_p = jp.at("top_p").get<double>();
  c.pipeline.window = jp.at("window").get<int>();

  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  Json j;
  in >> j;
  return config_from_json(j);
}

}  // namespace litegui
