#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "litegui/policy.hpp"
#include "oracles.hpp"

using namespace litegui;
using Catch::Approx;

TEST_CASE("vocabulary invariants") {
  CHECK_THROWS(Vocabulary({}, 0));
  CHECK_THROWS(Vocabulary({"a", "a"}, 0));
  CHECK_THROWS(Vocabulary({"", "a"}, 5));
  std::vector<std::string> too_many;
  for (int i = 0; i < 257; ++i) too_many.push_back(std::to_string(i));
  CHECK_THROWS(Vocabulary(too_many, 0));

  const Vocabulary v({"", "ab", "c"}, 0);
  const std::vector<int> ids{1, 2, 1, 0};
  CHECK(v.decode(ids) == "abcab");
  CHECK(v.find("c") == 2);
  CHECK_FALSE(v.find("zz").has_value());
}

TEST_CASE("context keys") {
  CHECK_THROWS(ContextKey(std::string("bad\x1fid")));
  const ContextKey a("ctx", {1, 2});
  const ContextKey b = a.child(3);
  CHECK(b.prefix == std::vector<int>{1, 2, 3});
  CHECK(a.table_key() != b.table_key());

  TokenPolicy p(oracles::tiny_vocab(3), TokenPolicy::Role::student, 2);
  CHECK_THROWS(p.logits(ContextKey("ctx", {1, 2, 1})));  // beyond l_max
}

TEST_CASE("logprob is the exact log-softmax") {
  auto vocab = oracles::tiny_vocab(4);
  TokenPolicy policy(vocab, TokenPolicy::Role::student, 4);
  const ContextKey ctx("c");

  SECTION("uniform initialization gives log(1/V)") {
    CHECK(policy.logprob(ctx, 2) == Approx(std::log(0.25)).margin(1e-12));
  }
  SECTION("probabilities sum to one") {
    Rng rng(1);
    auto& row = policy.row(ctx);
    for (double& x : row) x = rng.next_double() * 8 - 4;
    double sum = 0.0;
    for (int t = 0; t < 4; ++t) sum += std::exp(policy.logprob(ctx, t));
    CHECK(sum == Approx(1.0).margin(1e-9));
    const auto dist = policy.next_distribution(ctx);
    double dsum = 0.0;
    for (double p : dist) dsum += p;
    CHECK(dsum == Approx(1.0).margin(1e-9));
  }
  SECTION("shifting all logits leaves log-probs unchanged") {
    auto& row = policy.row(ctx);
    row = {0.3, -1.2, 2.0, 0.7};
    std::vector<double> before;
    for (int t = 0; t < 4; ++t) before.push_back(policy.logprob(ctx, t));
    for (double& x : row) x += 17.5;
    for (int t = 0; t < 4; ++t)
      CHECK(policy.logprob(ctx, t) == Approx(before[t]).margin(1e-9));
  }
  SECTION("unknown token ids are rejected") {
    CHECK_THROWS(policy.logprob(ctx, 4));
    CHECK_THROWS(policy.logprob(ctx, -1));
  }
}

TEST_CASE("logprob gradient matches finite differences") {
  auto vocab = oracles::tiny_vocab(5);
  TokenPolicy policy(vocab, TokenPolicy::Role::student, 2);
  const ContextKey ctx("g");
  Rng rng(2);
  auto& row = policy.row(ctx);
  for (double& x : row) x = rng.next_double() * 4 - 2;

  const int token = 3;
  const auto p = policy.next_distribution(ctx);
  for (int b = 0; b < 5; ++b) {
    const double analytic = (b == token ? 1.0 : 0.0) - p[b];
    const double h = 1e-5;
    const double orig = row[b];
    row[b] = orig + h;
    const double up = policy.logprob(ctx, token);
    row[b] = orig - h;
    const double down = policy.logprob(ctx, token);
    row[b] = orig;
    CHECK((up - down) / (2 * h) == Approx(analytic).epsilon(1e-4));
  }
}

TEST_CASE("sampling") {
  auto vocab = oracles::tiny_vocab(4);
  TokenPolicy policy(vocab, TokenPolicy::Role::student, 6);
  const ContextKey base("s");
  auto& row = policy.row(base);
  row = {0.0, 2.0, 1.0, -1.0};

  SECTION("temperature zero is greedy and deterministic") {
    const SampledSequence a = sample_sequence(policy, base, 0.0, 1.0, 1);
    const SampledSequence b = sample_sequence(policy, base, 0.0, 1.0, 999);
    CHECK(a.tokens == b.tokens);
    CHECK(a.tokens.front() == 1);  // argmax of the first row
  }
  SECTION("identical seeds give identical sequences") {
    const SampledSequence a = sample_sequence(policy, base, 1.0, 0.98, 42);
    const SampledSequence b = sample_sequence(policy, base, 1.0, 0.98, 42);
    CHECK(a.tokens == b.tokens);
    CHECK(a.logprobs == b.logprobs);
    CHECK(a.text == b.text);
  }
  SECTION("recorded log-probs are the policy's own, not the sampler's") {
    const SampledSequence s = sample_sequence(policy, base, 3.0, 0.5, 7);
    ContextKey ctx = base;
    for (std::size_t j = 0; j < s.tokens.size(); ++j) {
      CHECK(s.logprobs[j] ==
            Approx(policy.logprob(ctx, s.tokens[j])).margin(1e-12));
      ctx.prefix.push_back(s.tokens[j]);
    }
  }
  SECTION("text decodes the sampled ids") {
    const SampledSequence s = sample_sequence(policy, base, 1.0, 1.0, 5);
    CHECK(s.text == policy.vocab().decode(s.tokens));
  }
  SECTION("sequences stop at EOS or l_max") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      const SampledSequence s =
          sample_sequence(policy, base, 1.0, 1.0, rng.next_u64());
      CHECK(s.tokens.size() <= 6);
      for (std::size_t j = 0; j + 1 < s.tokens.size(); ++j)
        CHECK(s.tokens[j] != 0);
      if (s.tokens.size() < 6) CHECK(s.tokens.back() == 0);
    }
  }
  SECTION("full-distribution sampling matches probabilities empirically") {
    TokenPolicy flat(vocab, TokenPolicy::Role::student, 1);
    const ContextKey c("mc");
    auto& r = flat.row(c);
    r = {0.5, 1.5, -0.3, 0.9};
    const auto p = flat.next_distribution(c);
    std::map<int, int> counts;
    const int n = 20000;
    for (int i = 0; i < n; ++i)
      counts[sample_sequence(flat, c, 1.0, 1.0, mix_seed(88, i)).tokens[0]] +=
          1;
    for (int t = 0; t < 4; ++t)
      CHECK(double(counts[t]) / n == Approx(p[t]).margin(0.02));
  }
  SECTION("top-p truncation removes the improbable tail") {
    TokenPolicy peaked(vocab, TokenPolicy::Role::student, 1);
    const ContextKey c("tp");
    auto& r = peaked.row(c);
    r = {6.0, 5.0, -6.0, -6.0};  // tail tokens are far below any 0.9 cutoff
    for (int i = 0; i < 2000; ++i) {
      const int tok =
          sample_sequence(peaked, c, 1.0, 0.9, mix_seed(17, i)).tokens[0];
      CHECK((tok == 0 || tok == 1));
    }
  }
  SECTION("mean sampled log-prob estimates negative sequence entropy") {
    TokenPolicy tiny(vocab, TokenPolicy::Role::student, 2);
    const ContextKey c("h");
    Rng rng(4);
    oracles::randomize_tree(tiny, c, rng, 1.5);
    // Exact sequence entropy by enumeration.
    double entropy = 0.0;
    struct Node {
      std::vector<int> prefix;
      double logp;
    };
    std::vector<Node> stack{{{}, 0.0}};
    while (!stack.empty()) {
      Node n = stack.back();
      stack.pop_back();
      if (n.prefix.size() == 2) {
        entropy -= std::exp(n.logp) * n.logp;
        continue;
      }
      for (int t = 0; t < 4; ++t) {
        Node child = n;
        child.logp += tiny.logprob(ContextKey{"h", n.prefix}, t);
        child.prefix.push_back(t);
        if (t == 0)
          entropy -= std::exp(child.logp) * child.logp;
        else
          stack.push_back(std::move(child));
      }
    }
    double mean_logp = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i)
      mean_logp +=
          sample_sequence(tiny, c, 1.0, 1.0, mix_seed(5, i)).total_logprob();
    mean_logp /= n;
    CHECK(mean_logp == Approx(-entropy).margin(0.03));
  }
  SECTION("parameter validation") {
    CHECK_THROWS(sample_sequence(policy, base, -0.5, 1.0, 1));
    CHECK_THROWS(sample_sequence(policy, base, 1.0, 0.0, 1));
    CHECK_THROWS(sample_sequence(policy, base, 1.0, 1.5, 1));
  }
}

TEST_CASE("teacher_context keys") {
  const ContextKey base("scn=x|s=0", {1});
  CHECK(teacher_context(base, Guidance::none()) == base);

  GuiAction a;
  a.type = ActionType::key;
  a.value = "Enter";
  GuiAction b;
  b.type = ActionType::double_click;
  b.position = Position::box(0, 0, 10, 10);
  const ValidActionSet set({a, b});

  const ContextKey single = teacher_context(base, select_single_gt(set, 1));
  const ContextKey multi = teacher_context(base, select_multi_gt(set));
  CHECK(single.context_id != base.context_id);
  CHECK(single.context_id != multi.context_id);
  CHECK(single.prefix == base.prefix);
  CHECK(teacher_context(base, select_multi_gt(set)) == multi);
}

TEST_CASE("snapshots round-trip and enforce versioning") {
  auto vocab = oracles::tiny_vocab(5);
  TokenPolicy policy(vocab, TokenPolicy::Role::student, 3);
  Rng rng(6);
  oracles::randomize_tree(policy, ContextKey("snap"), rng);

  const Json snap = policy.to_snapshot("sig123");
  const TokenPolicy loaded =
      TokenPolicy::from_snapshot(snap, TokenPolicy::Role::student);
  CHECK(loaded.l_max() == 3);
  CHECK(loaded.rows() == policy.rows());
  CHECK(loaded.to_snapshot("sig123") == snap);

  Json bad_version = snap;
  bad_version["version"] = 2;
  CHECK_THROWS(TokenPolicy::from_snapshot(bad_version,
                                          TokenPolicy::Role::student));
  Json bad_format = snap;
  bad_format["format"] = "something.else";
  CHECK_THROWS(TokenPolicy::from_snapshot(bad_format,
                                          TokenPolicy::Role::student));
}
