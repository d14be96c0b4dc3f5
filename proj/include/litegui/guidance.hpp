#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "litegui/action.hpp"
#include "litegui/matcher.hpp"
#include "litegui/rng.hpp"

namespace litegui {

// Teacher-side guidance construction: how the valid action set is turned into
// the reference information the teacher is conditioned on.

enum class GuidanceVariant {
  none,          // plain on-policy distillation, no reference actions
  single_gt,     // one uniformly sampled annotated action
  multi_gt,      // the full valid action set
  most_matched,  // the annotated action closest to the student's output
};

inline std::string_view to_string(GuidanceVariant v) {
  switch (v) {
    case GuidanceVariant::none: return "none";
    case GuidanceVariant::single_gt: return "single";
    case GuidanceVariant::multi_gt: return "multi";
    case GuidanceVariant::most_matched: return "most-matched";
  }
  return "?";
}

inline std::optional<GuidanceVariant> guidance_variant_from_string(
    std::string_view s) {
  if (s == "none") return GuidanceVariant::none;
  if (s == "single") return GuidanceVariant::single_gt;
  if (s == "multi") return GuidanceVariant::multi_gt;
  if (s == "most-matched") return GuidanceVariant::most_matched;
  return std::nullopt;
}

struct Guidance {
  GuidanceVariant variant = GuidanceVariant::none;
  std::vector<GuiAction> reference_actions;
  // Provenance for most-matched selection.
  std::optional<std::size_t> matched_index;
  std::optional<double> matched_score;
  bool fallback = false;  // parse-failure fallback to the first annotation

  static Guidance none() { return Guidance{}; }
};

inline Guidance select_single_gt(const ValidActionSet& set,
                                 std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  const std::size_t k = rng.uniform_below(set.size());
  Guidance g;
  g.variant = GuidanceVariant::single_gt;
  g.reference_actions = {set[k]};
  g.matched_index = k;
  return g;
}

inline Guidance select_multi_gt(const ValidActionSet& set) {
  Guidance g;
  g.variant = GuidanceVariant::multi_gt;
  g.reference_actions = set.actions();
  return g;
}

// Argmax of phi_gui over the set; ties break toward the lowest annotation
// index. An unparseable student output scores zero everywhere and falls back
// to the first annotated action (deterministic reference).
inline Guidance select_most_matched_gt(const ParseResult& student_output,
                                       const ValidActionSet& set,
                                       const MatchConfig& cfg = MatchConfig{}) {
  Guidance g;
  g.variant = GuidanceVariant::most_matched;
  if (!student_output.ok()) {
    g.reference_actions = {set[0]};
    g.matched_index = 0;
    g.matched_score = 0.0;
    g.fallback = true;
    return g;
  }
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double s = phi_gui(student_output, set[i], cfg).total;
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  g.reference_actions = {set[best]};
  g.matched_index = best;
  g.matched_score = best_score;
  return g;
}

}  // namespace litegui
