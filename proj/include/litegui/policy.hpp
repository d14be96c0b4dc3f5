#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "litegui/action.hpp"
#include "litegui/guidance.hpp"
#include "litegui/rng.hpp"

namespace litegui {

// ---------------------------------------------------------------------------
// Toy autoregressive token policies. A policy maps a context (input context
// identifier plus generated prefix) to logits over a small shared vocabulary.
// Student policies are tabular (one logit row per visited context, lazily
// materialized at uniform); teachers are scripted rules over the same
// interface. Sequences decode to structured-output text by concatenating
// token strings; the end-of-sequence token is the empty string.
// ---------------------------------------------------------------------------

class Vocabulary {
 public:
  static constexpr int kMaxSize = 256;

  Vocabulary(std::vector<std::string> tokens, int eos_id)
      : tokens_(std::move(tokens)), eos_id_(eos_id) {
    if (tokens_.empty() || tokens_.size() > kMaxSize)
      throw std::invalid_argument("Vocabulary: size must be in [1, 256]");
    if (eos_id_ < 0 || eos_id_ >= static_cast<int>(tokens_.size()))
      throw std::invalid_argument("Vocabulary: eos_id out of range");
    for (std::size_t i = 0; i < tokens_.size(); ++i)
      for (std::size_t k = i + 1; k < tokens_.size(); ++k)
        if (tokens_[i] == tokens_[k])
          throw std::invalid_argument("Vocabulary: tokens must be distinct");
  }

  int size() const { return static_cast<int>(tokens_.size()); }
  int eos_id() const { return eos_id_; }
  const std::string& token(int id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::string decode(std::span<const int> ids) const {
    std::string out;
    for (int id : ids) out += token(id);
    return out;
  }

  std::optional<int> find(const std::string& tok) const {
    for (std::size_t i = 0; i < tokens_.size(); ++i)
      if (tokens_[i] == tok) return static_cast<int>(i);
    return std::nullopt;
  }

 private:
  std::vector<std::string> tokens_;
  int eos_id_;
};

// (input context identifier, generated prefix). The identifier must not
// contain U+001F, which separates the prefix in table keys.
struct ContextKey {
  std::string context_id;
  std::vector<int> prefix;

  ContextKey() = default;
  ContextKey(std::string id, std::vector<int> pfx = {})
      : context_id(std::move(id)), prefix(std::move(pfx)) {
    if (context_id.find('\x1f') != std::string::npos)
      throw std::invalid_argument("ContextKey: id must not contain U+001F");
  }

  ContextKey child(int token) const {
    ContextKey c = *this;
    c.prefix.push_back(token);
    return c;
  }

  std::string table_key() const {
    std::string key;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
      if (i) key += ',';
      key += std::to_string(prefix[i]);
    }
    key += '\x1f';
    key += context_id;
    return key;
  }

  friend bool operator==(const ContextKey&, const ContextKey&) = default;
};

namespace detail {

inline std::vector<double> softmax(std::span<const double> logits) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : logits) mx = std::max(mx, v);
  std::vector<double> p(logits.size(), 0.0);
  if (!std::isfinite(mx)) {
    // All logits -inf: degenerate row, treat as uniform.
    std::fill(p.begin(), p.end(), 1.0 / p.size());
    return p;
  }
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

}  // namespace detail

class TokenPolicy {
 public:
  enum class Role { student, teacher, reference, old_policy };
  using LogitFn = std::function<std::vector<double>(const ContextKey&)>;
  using Table = std::map<std::string, std::vector<double>>;

  TokenPolicy(std::shared_ptr<const Vocabulary> vocab, Role role,
              int l_max = 64)
      : vocab_(std::move(vocab)), role_(role), l_max_(l_max) {
    if (!vocab_) throw std::invalid_argument("TokenPolicy: null vocabulary");
    if (l_max_ < 1) throw std::invalid_argument("TokenPolicy: l_max must be >= 1");
  }

  static TokenPolicy scripted(std::shared_ptr<const Vocabulary> vocab,
                              Role role, LogitFn fn, int l_max = 64) {
    TokenPolicy p(std::move(vocab), role, l_max);
    p.logit_fn_ = std::move(fn);
    return p;
  }

  const Vocabulary& vocab() const { return *vocab_; }
  std::shared_ptr<const Vocabulary> vocab_ptr() const { return vocab_; }
  Role role() const { return role_; }
  int l_max() const { return l_max_; }
  bool tabular() const { return !logit_fn_; }

  std::vector<double> logits(const ContextKey& ctx) const {
    check_prefix(ctx);
    if (logit_fn_) {
      std::vector<double> l = logit_fn_(ctx);
      if (static_cast<int>(l.size()) != vocab_->size())
        throw std::logic_error("scripted policy returned wrong logit size");
      return l;
    }
    auto it = rows_.find(ctx.table_key());
    if (it == rows_.end())
      return std::vector<double>(vocab_->size(), 0.0);  // uniform
    return it->second;
  }

  std::vector<double> next_distribution(const ContextKey& ctx) const {
    const std::vector<double> l = logits(ctx);
    return detail::softmax(l);
  }

  double logprob(const ContextKey& ctx, int token) const {
    if (token < 0 || token >= vocab_->size())
      throw std::invalid_argument("logprob: unknown token id");
    const std::vector<double> l = logits(ctx);
    double mx = *std::max_element(l.begin(), l.end());
    if (!std::isfinite(mx)) return -std::log(double(vocab_->size()));
    double z = 0.0;
    for (double v : l) z += std::exp(v - mx);
    return l[token] - mx - std::log(z);
  }

  // Tabular parameter access.
  Table& rows() {
    require_tabular();
    return rows_;
  }
  const Table& rows() const {
    require_tabular();
    return rows_;
  }
  std::vector<double>& row(const ContextKey& ctx) {
    require_tabular();
    check_prefix(ctx);
    auto [it, inserted] =
        rows_.try_emplace(ctx.table_key(), vocab_->size(), 0.0);
    (void)inserted;
    return it->second;
  }

  Json to_snapshot(const std::string& suite_signature) const {
    require_tabular();
    Json j = Json::object();
    j["format"] = "litegui.policy";
    j["version"] = 1;
    j["l_max"] = l_max_;
    j["suite_signature"] = suite_signature;
    j["vocab"] = vocab_->tokens();
    j["eos_id"] = vocab_->eos_id();
    Json rows = Json::object();
    for (const auto& [k, v] : rows_) rows[k] = v;
    j["rows"] = std::move(rows);
    return j;
  }

  static TokenPolicy from_snapshot(const Json& j, Role role) {
    if (!j.is_object() || j.value("format", "") != "litegui.policy")
      throw std::runtime_error("policy snapshot: unrecognized format");
    if (j.value("version", -1) != 1)
      throw std::runtime_error("policy snapshot: unsupported version");
    auto vocab = std::make_shared<Vocabulary>(
        j.at("vocab").get<std::vector<std::string>>(), j.at("eos_id").get<int>());
    TokenPolicy p(vocab, role, j.at("l_max").get<int>());
    for (const auto& [k, v] : j.at("rows").items()) {
      auto row = v.get<std::vector<double>>();
      if (static_cast<int>(row.size()) != vocab->size())
        throw std::runtime_error("policy snapshot: row size mismatch");
      p.rows_[k] = std::move(row);
    }
    return p;
  }

  std::string snapshot_signature(const Json& j) const;

 private:
  void require_tabular() const {
    if (logit_fn_)
      throw std::logic_error("operation requires a tabular policy");
  }
  void check_prefix(const ContextKey& ctx) const {
    if (static_cast<int>(ctx.prefix.size()) > l_max_)
      throw std::invalid_argument("ContextKey: prefix exceeds l_max");
  }

  std::shared_ptr<const Vocabulary> vocab_;
  Role role_;
  int l_max_;
  LogitFn logit_fn_;  // empty for tabular policies
  Table rows_;
};

struct SampledSequence {
  std::vector<int> tokens;
  std::vector<double> logprobs;  // under the sampling policy, untruncated
  std::string text;

  double total_logprob() const {
    return std::accumulate(logprobs.begin(), logprobs.end(), 0.0);
  }
  int length() const { return static_cast<int>(tokens.size()); }
};

// Autoregressive sampling until end-of-sequence or l_max tokens. temperature
// and top_p shape the sampler only; recorded log-probabilities are always the
// policy's own (untruncated, temperature-free), which is what ratio and loss
// computations require. temperature == 0 selects the argmax.
inline SampledSequence sample_sequence(const TokenPolicy& policy,
                                       const ContextKey& base,
                                       double temperature, double top_p,
                                       std::uint64_t seed) {
  if (temperature < 0.0)
    throw std::invalid_argument("sample: temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0))
    throw std::invalid_argument("sample: top_p must be in (0, 1]");

  Rng rng(seed);
  const Vocabulary& vocab = policy.vocab();
  SampledSequence seq;
  ContextKey ctx = base;

  while (static_cast<int>(ctx.prefix.size()) < policy.l_max()) {
    const std::vector<double> logits = policy.logits(ctx);
    int chosen;
    if (temperature == 0.0) {
      chosen = static_cast<int>(std::distance(
          logits.begin(), std::max_element(logits.begin(), logits.end())));
    } else {
      std::vector<double> scaled(logits.size());
      for (std::size_t i = 0; i < logits.size(); ++i)
        scaled[i] = logits[i] / temperature;
      std::vector<double> p = detail::softmax(scaled);

      std::vector<int> order(p.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return p[a] > p[b]; });
      // Smallest prefix of the sorted distribution with mass >= top_p.
      double kept = 0.0;
      std::size_t cut = 0;
      while (cut < order.size()) {
        kept += p[order[cut]];
        ++cut;
        if (kept >= top_p - 1e-12) break;
      }
      double u = rng.next_double() * kept;
      chosen = order[cut - 1];
      double acc = 0.0;
      for (std::size_t i = 0; i < cut; ++i) {
        acc += p[order[i]];
        if (u < acc) {
          chosen = order[i];
          break;
        }
      }
    }
    seq.tokens.push_back(chosen);
    seq.logprobs.push_back(policy.logprob(ctx, chosen));
    ctx.prefix.push_back(chosen);
    if (chosen == vocab.eos_id()) break;
  }
  seq.text = vocab.decode(seq.tokens);
  return seq;
}

// Teacher context: the base context with the guidance's reference actions
// appended to the context identifier. No guidance leaves the key unchanged.
inline ContextKey teacher_context(const ContextKey& base,
                                  const Guidance& guidance) {
  if (guidance.variant == GuidanceVariant::none) return base;
  Json refs = Json::array();
  for (const GuiAction& a : guidance.reference_actions)
    refs.push_back(action_to_json(a));
  ContextKey ctx = base;
  ctx.context_id += "||g=";
  ctx.context_id += refs.dump();
  return ctx;
}

}  // namespace litegui
