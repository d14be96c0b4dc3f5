#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "litegui/action.hpp"
#include "litegui/guidance.hpp"
#include "litegui/matcher.hpp"
#include "litegui/policy.hpp"

namespace litegui {

// ---------------------------------------------------------------------------
// Training objectives for the tabular student: the guided on-policy
// distillation loss (reverse KL against the teacher under its privileged
// context) and the group-relative clipped policy objective. Distributions
// are enumerable at this scale, so distillation gradients are exact: the
// autoregressive tree under the training context is walked once, per-context
// divergences are differentiated analytically, and visitation probabilities
// are propagated in the same pass.
// ---------------------------------------------------------------------------

struct OpdConfig {
  GuidanceVariant guidance = GuidanceVariant::most_matched;
  double on_policy_lambda = 1.0;   // probability of distilling a student sample
  double beta_divergence = 1.0;    // 1.0 = reverse KL, 0.0 = forward KL
  double learning_rate = 2.0;
  int steps = 600;
  double temperature = 1.0;
  double top_p = 0.98;
  double teacher_logprob_floor = -30.0;
  std::size_t node_budget = 2'000'000;

  void validate() const {
    if (on_policy_lambda < 0.0 || on_policy_lambda > 1.0)
      throw std::invalid_argument("OpdConfig: lambda must be in [0,1]");
    if (beta_divergence < 0.0 || beta_divergence > 1.0)
      throw std::invalid_argument("OpdConfig: beta must be in [0,1]");
    if (!(learning_rate > 0.0))
      throw std::invalid_argument("OpdConfig: learning_rate must be > 0");
    if (steps < 0) throw std::invalid_argument("OpdConfig: steps must be >= 0");
  }
};

enum class RatioLevel { token, sequence };

struct GrpoConfig {
  int group_size = 16;
  double clip_low = 0.2;
  double clip_high = 0.28;
  double kl_coefficient = 0.0;
  double advantage_epsilon = 1e-6;
  // Reward profile weights (GUI action, subtask plan, format/length). The
  // additive form R_ms + lambda_sub * R_sub is the profile (1, lambda_sub, 0).
  double w_gui = 0.60;
  double w_subtask = 0.30;
  double w_format = 0.10;
  RatioLevel ratio_level = RatioLevel::token;
  double learning_rate = 0.5;
  int steps = 300;
  double temperature = 1.0;
  double top_p = 0.98;
  // Soft length cap for the format score; defaults to l_max (no penalty).
  std::optional<int> soft_length_cap;

  static GrpoConfig additive(double lambda_sub) {
    GrpoConfig c;
    c.w_gui = 1.0;
    c.w_subtask = lambda_sub;
    c.w_format = 0.0;
    return c;
  }

  void validate() const {
    if (group_size < 2)
      throw std::invalid_argument("GrpoConfig: group_size must be >= 2");
    if (clip_low < 0.0 || clip_high < 0.0)
      throw std::invalid_argument("GrpoConfig: clip bounds must be >= 0");
    if (kl_coefficient < 0.0)
      throw std::invalid_argument("GrpoConfig: kl_coefficient must be >= 0");
    if (!(advantage_epsilon > 0.0))
      throw std::invalid_argument("GrpoConfig: advantage_epsilon must be > 0");
    if (w_gui < 0.0 || w_subtask < 0.0 || w_format < 0.0)
      throw std::invalid_argument("GrpoConfig: reward weights must be >= 0");
  }
};

// Sparse gradient over tabular rows, keyed like the policy table.
struct Gradient {
  std::map<std::string, std::vector<double>> rows;

  std::vector<double>& row(const std::string& key, int size) {
    auto [it, inserted] = rows.try_emplace(key, size, 0.0);
    (void)inserted;
    return it->second;
  }

  bool finite() const {
    for (const auto& [k, v] : rows)
      for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
  }
};

struct OpdLossResult {
  double sample_loss = 0.0;          // sum_j log pi_theta - log pi_T on the sample
  double expected_divergence = 0.0;  // enumerated expectation of the objective
  Gradient gradient;
  int teacher_floor_hits = 0;        // clamped teacher log-probs on the sample
  std::size_t nodes = 0;
};

namespace detail {

// Per-context divergence D_beta(p||q) and its gradient with respect to p.
// beta=1 is KL(p||q) (clamped teacher support), beta=0 is KL(q||p), and
// intermediate values interpolate through the mixture m = (1-beta)p + beta*q.
struct DivergenceTerm {
  double value = 0.0;
  std::vector<double> dp;  // d value / d p_b
};

inline DivergenceTerm divergence_beta(const std::vector<double>& p,
                                      const std::vector<double>& q,
                                      double beta, double floor) {
  const std::size_t n = p.size();
  DivergenceTerm out;
  out.dp.assign(n, 0.0);
  if (beta == 1.0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (p[i] <= 0.0) continue;
      const double logq = std::max(q[i] > 0.0 ? std::log(q[i])
                                              : -std::numeric_limits<double>::infinity(),
                                   floor);
      const double d = std::log(p[i]) - logq;
      out.value += p[i] * d;
      out.dp[i] = d + 1.0;
    }
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double m = (1.0 - beta) * p[i] + beta * q[i];
    if (beta > 0.0 && p[i] > 0.0 && m > 0.0)
      out.value += beta * p[i] * (std::log(p[i]) - std::log(m));
    if (q[i] > 0.0 && m > 0.0)
      out.value += (1.0 - beta) * q[i] * (std::log(q[i]) - std::log(m));
    if (m > 0.0) {
      double g = 0.0;
      if (beta > 0.0 && p[i] > 0.0)
        g += beta * (std::log(p[i]) - std::log(m)) + beta -
             beta * (1.0 - beta) * p[i] / m;
      g -= (1.0 - beta) * (1.0 - beta) * q[i] / m;
      out.dp[i] = g;
    }
  }
  return out;
}

struct OpdTreeWalker {
  const TokenPolicy& student;
  const TokenPolicy& teacher;
  const ContextKey& student_base;
  const ContextKey& teacher_base;
  const OpdConfig& cfg;
  Gradient* grad;
  std::size_t nodes = 0;

  // Returns the divergence-to-go from this prefix and accumulates gradient
  // rows scaled by the reach probability.
  double walk(std::vector<int>& prefix, double reach) {
    if (static_cast<int>(prefix.size()) >= student.l_max()) return 0.0;
    if (++nodes > cfg.node_budget)
      throw std::runtime_error(
          "opd_loss: enumeration exceeded the node budget; shrink the "
          "vocabulary or l_max");

    ContextKey sctx{student_base.context_id, prefix};
    ContextKey tctx{teacher_base.context_id, prefix};
    const std::vector<double> p = student.next_distribution(sctx);
    const std::vector<double> q = teacher.next_distribution(tctx);
    const int eos = student.vocab().eos_id();

    DivergenceTerm div =
        divergence_beta(p, q, cfg.beta_divergence, cfg.teacher_logprob_floor);

    std::vector<double> to_go(p.size(), 0.0);
    double mean_to_go = 0.0;
    for (int a = 0; a < static_cast<int>(p.size()); ++a) {
      if (a != eos && p[a] > 0.0) {
        prefix.push_back(a);
        to_go[a] = walk(prefix, reach * p[a]);
        prefix.pop_back();
      }
      mean_to_go += p[a] * to_go[a];
    }
    const double value = div.value + mean_to_go;

    // d/dz_b [ D(p) + sum_a p_a V_a ] with softmax jacobian:
    //   p_b * (dD/dp_b - sum_a p_a dD/dp_a) + p_b * (V_b - mean V)
    double inner = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) inner += p[a] * div.dp[a];
    std::vector<double>& row =
        grad->row(sctx.table_key(), static_cast<int>(p.size()));
    for (std::size_t b = 0; b < p.size(); ++b)
      row[b] += reach * p[b] * (div.dp[b] - inner + to_go[b] - mean_to_go);
    return value;
  }
};

}  // namespace detail

// Loss and exact gradient for one distillation step. The returned loss is
// the per-sample token sum log pi_theta - log pi_T (teacher under the guided
// context); the gradient is the exact derivative of the enumerated expected
// objective, which for beta=1 is the expected reverse KL that the sample
// loss estimates.
inline OpdLossResult opd_loss(const TokenPolicy& student,
                              const TokenPolicy& teacher,
                              const ContextKey& context,
                              const Guidance& guidance,
                              const SampledSequence& sample,
                              const OpdConfig& cfg = OpdConfig{}) {
  cfg.validate();
  if (!student.tabular())
    throw std::invalid_argument("opd_loss: student must be tabular");

  const ContextKey teacher_base = teacher_context(context, guidance);

  OpdLossResult res;
  ContextKey sctx = context;
  ContextKey tctx = teacher_base;
  for (int tok : sample.tokens) {
    const double lp_s = student.logprob(sctx, tok);
    double lp_t = teacher.logprob(tctx, tok);
    if (lp_t < cfg.teacher_logprob_floor) {
      lp_t = cfg.teacher_logprob_floor;
      res.teacher_floor_hits += 1;
    }
    res.sample_loss += lp_s - lp_t;
    sctx.prefix.push_back(tok);
    tctx.prefix.push_back(tok);
  }

  detail::OpdTreeWalker walker{student, teacher, context, teacher_base, cfg,
                               &res.gradient};
  std::vector<int> prefix = context.prefix;
  res.expected_divergence = walker.walk(prefix, 1.0);
  res.nodes = walker.nodes;
  return res;
}

// Format/length score: 1 for parseable output within the soft cap, linearly
// decaying to 0 at l_max, 0 for unparseable output.
inline double format_score(bool parsed_ok, int length, int l_max,
                           std::optional<int> soft_cap = std::nullopt) {
  if (!parsed_ok) return 0.0;
  const int soft = soft_cap.value_or(l_max);
  if (length <= soft) return 1.0;
  if (length >= l_max || soft >= l_max) return 0.0;
  return double(l_max - length) / double(l_max - soft);
}

inline double combine_reward(double r_ms, double judge_score,
                             double format_val, const GrpoConfig& cfg) {
  cfg.validate();
  if (judge_score < 0.0 || judge_score > 1.0)
    throw std::invalid_argument("combine_reward: judge_score outside [0,1]");
  if (format_val < 0.0 || format_val > 1.0)
    throw std::invalid_argument("combine_reward: format_score outside [0,1]");
  return cfg.w_gui * r_ms + cfg.w_subtask * judge_score +
         cfg.w_format * format_val;
}

// Total reward for one candidate against a state's valid action set.
inline double total_reward(const SampledSequence& candidate,
                           const ValidActionSet& action_set,
                           double judge_score, const GrpoConfig& cfg,
                           int l_max, const MatchConfig& match = MatchConfig{}) {
  const ParseResult parsed = parse_output(candidate.text);
  const double r_ms = multi_solution_reward(parsed, action_set, match);
  const double fmt =
      format_score(parsed.ok(), candidate.length(), l_max, cfg.soft_length_cap);
  return combine_reward(r_ms, judge_score, fmt, cfg);
}

// Group-relative advantages with population standard deviation.
inline std::vector<double> group_advantages(const std::vector<double>& rewards,
                                            double epsilon) {
  if (rewards.size() < 2)
    throw std::invalid_argument("group_advantages: need at least 2 rewards");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("group_advantages: epsilon must be > 0");
  double mean = 0.0;
  for (double r : rewards) {
    if (!std::isfinite(r))
      throw std::invalid_argument("group_advantages: non-finite reward");
    mean += r;
  }
  mean /= double(rewards.size());
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= double(rewards.size());
  const double std_dev = std::sqrt(var);
  std::vector<double> adv(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i)
    adv[i] = (rewards[i] - mean) / (std_dev + epsilon);
  return adv;
}

struct GroupBatch {
  ContextKey context;
  std::vector<SampledSequence> sequences;
  std::vector<double> rewards;
  std::vector<double> advantages;

  bool degenerate() const {
    for (double a : advantages)
      if (a != 0.0) return false;
    return true;
  }
};

struct GrpoLossResult {
  double loss = 0.0;
  Gradient gradient;
  double clip_fraction = 0.0;  // tokens (or sequences) where the clip engaged
  double kl_penalty = 0.0;
};

// Clipped surrogate over a sampled group. The ratio is token-level by
// default (sequence-level importance sampling is the configurable
// alternative); clipped terms contribute no gradient where the clipped
// branch wins the min.
inline GrpoLossResult grpo_loss(const TokenPolicy& student,
                                const TokenPolicy& old_policy,
                                const TokenPolicy* reference,
                                const GroupBatch& batch,
                                const GrpoConfig& cfg = GrpoConfig{}) {
  cfg.validate();
  if (!student.tabular())
    throw std::invalid_argument("grpo_loss: student must be tabular");
  const std::size_t g = batch.sequences.size();
  if (g < 2 || batch.advantages.size() != g)
    throw std::invalid_argument("grpo_loss: malformed batch");
  if (cfg.kl_coefficient > 0.0 && !reference)
    throw std::invalid_argument("grpo_loss: kl term needs a reference policy");

  GrpoLossResult res;
  const double lo = 1.0 - cfg.clip_low;
  const double hi = 1.0 + cfg.clip_high;
  std::size_t clip_count = 0, term_count = 0;

  for (std::size_t i = 0; i < g; ++i) {
    const SampledSequence& seq = batch.sequences[i];
    const double adv = batch.advantages[i];
    ContextKey ctx = batch.context;

    struct TokenInfo {
      ContextKey ctx;
      int token;
      double ratio;
      std::vector<double> p;
    };
    std::vector<TokenInfo> infos;
    infos.reserve(seq.tokens.size());
    double seq_ratio = 1.0;
    for (int tok : seq.tokens) {
      const double lp_old = old_policy.logprob(ctx, tok);
      if (!std::isfinite(lp_old))
        throw std::runtime_error(
            "grpo_loss: sampled token has zero probability under the old "
            "policy (inconsistent batch)");
      const double lp_new = student.logprob(ctx, tok);
      const double ratio = std::exp(lp_new - lp_old);
      infos.push_back(
          {ctx, tok, ratio, student.next_distribution(ctx)});
      seq_ratio *= ratio;
      ctx.prefix.push_back(tok);
    }

    const auto surrogate = [&](double ratio) {
      const double clipped = std::clamp(ratio, lo, hi);
      const bool clip_selected = clipped * adv < ratio * adv;
      return std::pair<double, bool>{std::min(ratio * adv, clipped * adv),
                                     clip_selected};
    };

    if (cfg.ratio_level == RatioLevel::sequence) {
      auto [value, clipped] = surrogate(seq_ratio);
      res.loss -= value / double(g);
      term_count += 1;
      if (clipped) {
        clip_count += 1;
      } else {
        for (const TokenInfo& ti : infos) {
          std::vector<double>& row = res.gradient.row(
              ti.ctx.table_key(), static_cast<int>(ti.p.size()));
          const double coeff = -adv * seq_ratio / double(g);
          for (std::size_t b = 0; b < ti.p.size(); ++b)
            row[b] += coeff * ((int(b) == ti.token ? 1.0 : 0.0) - ti.p[b]);
        }
      }
    } else {
      for (const TokenInfo& ti : infos) {
        auto [value, clipped] = surrogate(ti.ratio);
        res.loss -= value / double(g);
        term_count += 1;
        if (clipped) {
          clip_count += 1;
          continue;
        }
        std::vector<double>& row = res.gradient.row(
            ti.ctx.table_key(), static_cast<int>(ti.p.size()));
        const double coeff = -adv * ti.ratio / double(g);
        for (std::size_t b = 0; b < ti.p.size(); ++b)
          row[b] += coeff * ((int(b) == ti.token ? 1.0 : 0.0) - ti.p[b]);
      }
    }

    // Exact per-context KL regularization toward the reference policy.
    if (cfg.kl_coefficient > 0.0) {
      ContextKey kctx = batch.context;
      for (int tok : seq.tokens) {
        const std::vector<double> p = student.next_distribution(kctx);
        const std::vector<double> q = reference->next_distribution(kctx);
        double kl = 0.0;
        std::vector<double> dlog(p.size(), 0.0);
        for (std::size_t b = 0; b < p.size(); ++b) {
          if (p[b] <= 0.0) continue;
          const double lq = std::max(
              q[b] > 0.0 ? std::log(q[b])
                         : -std::numeric_limits<double>::infinity(),
              -30.0);
          dlog[b] = std::log(p[b]) - lq;
          kl += p[b] * dlog[b];
        }
        res.kl_penalty += cfg.kl_coefficient * kl / double(g);
        std::vector<double>& row = res.gradient.row(
            kctx.table_key(), static_cast<int>(p.size()));
        const double c = cfg.kl_coefficient / double(g);
        for (std::size_t b = 0; b < p.size(); ++b)
          row[b] += c * p[b] * (dlog[b] - kl);
        kctx.prefix.push_back(tok);
      }
    }
  }
  res.loss += res.kl_penalty;
  res.clip_fraction =
      term_count == 0 ? 0.0 : double(clip_count) / double(term_count);
  return res;
}

// Plain gradient-descent step on the loss. Aborts on non-finite gradients.
inline void apply_update(TokenPolicy& policy, const Gradient& gradient,
                         double learning_rate) {
  if (!policy.tabular())
    throw std::invalid_argument("apply_update: policy must be tabular");
  if (!std::isfinite(learning_rate))
    throw std::invalid_argument("apply_update: non-finite learning rate");
  if (!gradient.finite())
    throw std::runtime_error("apply_update: non-finite gradient");
  auto& rows = policy.rows();
  for (const auto& [key, g] : gradient.rows) {
    auto [it, inserted] = rows.try_emplace(key, g.size(), 0.0);
    (void)inserted;
    std::vector<double>& row = it->second;
    if (row.size() != g.size())
      throw std::runtime_error("apply_update: row size mismatch");
    for (std::size_t b = 0; b < g.size(); ++b) row[b] -= learning_rate * g[b];
  }
}

}  // namespace litegui
