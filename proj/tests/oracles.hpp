#pragma once

// Test-only oracles and generators, kept independent of the implementation
// paths they check: brute-force matching, path-enumerated expected losses,
// and central finite differences.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "litegui/action.hpp"
#include "litegui/matcher.hpp"
#include "litegui/objectives.hpp"
#include "litegui/policy.hpp"
#include "litegui/rng.hpp"

namespace oracles {

using namespace litegui;

// ------------------------------- generators ---------------------------------

inline Position random_point(Rng& rng) {
  return Position::point(int(rng.uniform_below(1920)),
                         int(rng.uniform_below(1080)));
}

inline Position random_box(Rng& rng) {
  const int x0 = int(rng.uniform_below(1700));
  const int y0 = int(rng.uniform_below(900));
  const int w = 1 + int(rng.uniform_below(200));
  const int h = 1 + int(rng.uniform_below(120));
  return Position::box(x0, y0, x0 + w, y0 + h);
}

inline std::string random_word(Rng& rng) {
  static const char* words[] = {"open",  "file", "www.example.com", "Enter",
                                "laptop", "status", "ls -la", "Ctrl+C",
                                "notes", "projects"};
  return words[rng.uniform_below(std::size(words))];
}

inline GuiAction random_action(Rng& rng, bool annotation_boxes = false) {
  static const ActionType kinds[] = {
      ActionType::click,      ActionType::right_click, ActionType::double_click,
      ActionType::drag,       ActionType::scroll_up,   ActionType::scroll_down,
      ActionType::text_input, ActionType::key,         ActionType::wait};
  GuiAction a;
  a.type = kinds[rng.uniform_below(std::size(kinds))];
  const auto pos = [&] {
    return annotation_boxes ? random_box(rng) : random_point(rng);
  };
  if (is_pointer_action(a.type)) a.position = pos();
  if (a.type == ActionType::drag) a.position_end = pos();
  if (a.type == ActionType::text_input || a.type == ActionType::key)
    a.value = random_word(rng);
  else if (a.type != ActionType::wait && rng.bernoulli(0.3))
    a.value = random_word(rng);
  return a;
}

inline StructuredOutput random_output(Rng& rng) {
  StructuredOutput o;
  o.reasoning = random_word(rng) + " then " + random_word(rng);
  const std::size_t n = 1 + rng.uniform_below(4);
  for (std::size_t i = 0; i < n; ++i)
    o.subtasks.push_back(Subtask{random_word(rng) + " step " +
                                     std::to_string(i),
                                 rng.bernoulli(0.4)});
  o.action = random_action(rng);
  o.raw_text = canonical_serialize(o);
  return o;
}

inline ValidActionSet random_action_set(Rng& rng, std::size_t max_k = 4) {
  std::vector<GuiAction> actions;
  const std::size_t k = 1 + rng.uniform_below(max_k);
  for (std::size_t i = 0; i < k && actions.size() < k; ++i) {
    GuiAction a = random_action(rng, /*annotation_boxes=*/true);
    bool dup = false;
    for (const auto& b : actions)
      if (canonical_action_serial(a) == canonical_action_serial(b)) dup = true;
    if (!dup) actions.push_back(std::move(a));
  }
  return ValidActionSet(std::move(actions));
}

// --------------------------- brute-force matching ----------------------------

inline double brute_force_max_reward(const ParseResult& output,
                                     const ValidActionSet& set,
                                     const MatchConfig& cfg) {
  double best = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double s = phi_gui(output, set[i], cfg).total;
    if (s > best) best = s;
  }
  return best;
}

// ----------------------- random tabular policy fixtures ----------------------

inline std::shared_ptr<Vocabulary> tiny_vocab(int v) {
  std::vector<std::string> toks{""};
  for (int i = 1; i < v; ++i) toks.push_back(std::string(1, char('a' + i - 1)));
  return std::make_shared<Vocabulary>(toks, 0);
}

// Materializes and randomizes every row of the full prefix tree.
inline void randomize_tree(TokenPolicy& policy, const ContextKey& base,
                           Rng& rng, double scale = 2.0) {
  const int v = policy.vocab().size();
  std::vector<std::vector<int>> frontier{{}};
  for (int depth = 0; depth < policy.l_max(); ++depth) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : frontier) {
      auto& row = policy.row(ContextKey{base.context_id, prefix});
      for (double& x : row) x = rng.next_double() * 2 * scale - scale;
      if (depth + 1 < policy.l_max())
        for (int t = 0; t < v; ++t) {
          if (t == policy.vocab().eos_id()) continue;
          auto child = prefix;
          child.push_back(t);
          next.push_back(std::move(child));
        }
    }
    frontier = std::move(next);
  }
}

// Deterministic pseudo-random scripted teacher over the same vocabulary.
inline TokenPolicy hashed_teacher(std::shared_ptr<const Vocabulary> vocab,
                                  int l_max, std::uint64_t salt = 0) {
  const int v = vocab->size();
  auto fn = [v, salt](const ContextKey& ctx) {
    std::vector<double> logits(v, 0.0);
    std::uint64_t h = 14695981039346656037ull ^ salt;
    for (char c : ctx.table_key()) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    for (int i = 0; i < v; ++i) {
      h = h * 6364136223846793005ull + 1442695040888963407ull;
      logits[i] = double((h >> 33) % 1000) / 250.0;
    }
    return logits;
  };
  return TokenPolicy::scripted(std::move(vocab), TokenPolicy::Role::teacher,
                               fn, l_max);
}

// -------------------- enumerated expected distillation loss ------------------

// E_{y ~ pi_theta} [ sum_j log pi_theta(y_j) - max(log pi_T(y_j), floor) ]
// by explicit path enumeration; independent of the DP in opd_loss.
inline double enum_expected_opd_loss(const TokenPolicy& student,
                                     const TokenPolicy& teacher,
                                     const ContextKey& base,
                                     const ContextKey& teacher_base,
                                     double floor) {
  const int v = student.vocab().size();
  const int eos = student.vocab().eos_id();
  double total = 0.0;
  struct Node {
    std::vector<int> prefix;
    double logp;
    double loss;
  };
  std::vector<Node> stack{{{}, 0.0, 0.0}};
  while (!stack.empty()) {
    Node n = stack.back();
    stack.pop_back();
    if (static_cast<int>(n.prefix.size()) == student.l_max()) {
      total += std::exp(n.logp) * n.loss;
      continue;
    }
    for (int a = 0; a < v; ++a) {
      const ContextKey sctx{base.context_id, n.prefix};
      const ContextKey tctx{teacher_base.context_id, n.prefix};
      const double lps = student.logprob(sctx, a);
      const double lpt = std::max(teacher.logprob(tctx, a), floor);
      Node c = n;
      c.prefix.push_back(a);
      c.logp += lps;
      c.loss += lps - lpt;
      if (a == eos)
        total += std::exp(c.logp) * c.loss;
      else
        stack.push_back(std::move(c));
    }
  }
  return total;
}

// --------------------------- finite differences ------------------------------

// Central finite differences of an arbitrary scalar function of the policy
// parameters, evaluated at the rows/entries named by the analytic gradient.
// Returns the max relative error against the analytic gradient.
inline double fd_max_rel_error(TokenPolicy& policy, const Gradient& analytic,
                               const std::function<double()>& loss_fn,
                               double step = 1e-5) {
  double worst = 0.0;
  for (const auto& [key, grad_row] : analytic.rows) {
    auto it = policy.rows().find(key);
    if (it == policy.rows().end())
      it = policy.rows().emplace(key, std::vector<double>(grad_row.size(), 0.0))
               .first;
    std::vector<double>& row = it->second;
    for (std::size_t b = 0; b < grad_row.size(); ++b) {
      const double orig = row[b];
      row[b] = orig + step;
      const double up = loss_fn();
      row[b] = orig - step;
      const double down = loss_fn();
      row[b] = orig;
      const double fd = (up - down) / (2.0 * step);
      const double denom = std::max({1e-6, std::abs(fd), std::abs(grad_row[b])});
      worst = std::max(worst, std::abs(fd - grad_row[b]) / denom);
    }
  }
  return worst;
}

}  // namespace oracles
