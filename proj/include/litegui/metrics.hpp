#pragma once

#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace litegui {

// Line-delimited metric records plus evaluation reports whose aggregates are
// always recomputable from the rows (and are checked on load).

class MetricWriter {
 public:
  MetricWriter() = default;
  explicit MetricWriter(const std::string& path)
      : out_(std::make_unique<std::ofstream>(path, std::ios::binary |
                                                       std::ios::trunc)) {
    if (!*out_) throw std::runtime_error("MetricWriter: cannot open " + path);
  }

  void write(const Json& record) {
    if (out_) *out_ << record.dump() << '\n';
    records_.push_back(record);
  }

  const std::vector<Json>& records() const { return records_; }

 private:
  std::unique_ptr<std::ofstream> out_;
  std::vector<Json> records_;
};

struct EvalRow {
  std::string scenario;
  std::string domain;
  std::uint64_t seed = 0;
  int episode = 0;
  bool success = false;
  int steps = 0;
  bool compliance = true;
  int grounding_hits = 0;
  int grounding_probes = 0;
};

struct EvalAggregates {
  int episodes = 0;
  double success_rate = 0.0;
  double grounding_accuracy = 0.0;
  double compliance_rate = 0.0;
  std::map<std::string, double> domain_success;

  friend bool operator==(const EvalAggregates&, const EvalAggregates&) = default;
};

inline EvalAggregates compute_aggregates(const std::vector<EvalRow>& rows) {
  EvalAggregates agg;
  agg.episodes = static_cast<int>(rows.size());
  if (rows.empty()) return agg;
  int succ = 0, comp = 0, hits = 0, probes = 0;
  std::map<std::string, std::pair<int, int>> by_domain;
  for (const EvalRow& r : rows) {
    succ += r.success ? 1 : 0;
    comp += r.compliance ? 1 : 0;
    hits += r.grounding_hits;
    probes += r.grounding_probes;
    auto& d = by_domain[r.domain];
    d.first += r.success ? 1 : 0;
    d.second += 1;
  }
  agg.success_rate = double(succ) / double(rows.size());
  agg.compliance_rate = double(comp) / double(rows.size());
  agg.grounding_accuracy = probes > 0 ? double(hits) / double(probes) : 0.0;
  for (const auto& [dom, counts] : by_domain)
    agg.domain_success[dom] = double(counts.first) / double(counts.second);
  return agg;
}

inline Json eval_row_to_json(const EvalRow& r) {
  Json j = Json::object();
  j["compliance"] = r.compliance;
  j["domain"] = r.domain;
  j["episode"] = r.episode;
  j["grounding_hits"] = r.grounding_hits;
  j["grounding_probes"] = r.grounding_probes;
  j["scenario"] = r.scenario;
  j["seed"] = r.seed;
  j["steps"] = r.steps;
  j["success"] = r.success;
  return j;
}

inline EvalRow eval_row_from_json(const Json& j) {
  EvalRow r;
  r.compliance = j.at("compliance").get<bool>();
  r.domain = j.at("domain").get<std::string>();
  r.episode = j.at("episode").get<int>();
  r.grounding_hits = j.at("grounding_hits").get<int>();
  r.grounding_probes = j.at("grounding_probes").get<int>();
  r.scenario = j.at("scenario").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.steps = j.at("steps").get<int>();
  r.success = j.at("success").get<bool>();
  return r;
}

struct EvalReport {
  std::vector<EvalRow> rows;
  EvalAggregates aggregates;
  Json config_echo = Json::object();
  Json anomalies = Json::object();
};

inline Json aggregates_to_json(const EvalAggregates& a) {
  Json j = Json::object();
  j["compliance_rate"] = a.compliance_rate;
  j["domain_success"] = a.domain_success;
  j["episodes"] = a.episodes;
  j["grounding_accuracy"] = a.grounding_accuracy;
  j["success_rate"] = a.success_rate;
  return j;
}

inline Json eval_report_to_json(const EvalReport& r) {
  Json rows = Json::array();
  for (const EvalRow& row : r.rows) rows.push_back(eval_row_to_json(row));
  Json j = Json::object();
  j["aggregates"] = aggregates_to_json(r.aggregates);
  j["anomalies"] = r.anomalies;
  j["config"] = r.config_echo;
  j["format"] = "litegui.eval_report";
  j["rows"] = std::move(rows);
  j["version"] = 1;
  return j;
}

// Loading recomputes the aggregates from the rows and rejects reports whose
// stored aggregates disagree.
inline EvalReport eval_report_from_json(const Json& j) {
  if (j.value("format", "") != "litegui.eval_report" ||
      j.value("version", -1) != 1)
    throw std::runtime_error("eval report: unrecognized format");
  EvalReport r;
  for (const auto& row : j.at("rows")) r.rows.push_back(eval_row_from_json(row));
  r.aggregates = compute_aggregates(r.rows);
  const Json stored = j.at("aggregates");
  const Json recomputed = aggregates_to_json(r.aggregates);
  if (stored != recomputed)
    throw std::runtime_error(
        "eval report: stored aggregates do not match the rows");
  r.config_echo = j.at("config");
  r.anomalies = j.at("anomalies");
  return r;
}

}  // namespace litegui
