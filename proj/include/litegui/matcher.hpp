#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "litegui/action.hpp"

namespace litegui {

// ---------------------------------------------------------------------------
// Unified GUI action matching.
//
// A predicted output is scored against an annotated action as a normalized
// weighted mean of three components:
//   m_type     1 iff the action types are equal
//   m_position continuous in [0,1], scored only when the annotation has a box
//   m_value    {0, 0.5, 1},          scored only when the annotation has a value
// Unparseable outputs score zero everywhere.
// ---------------------------------------------------------------------------

struct MatchWeights {
  double w_type = 1.0;
  double w_position = 1.0;
  double w_value = 1.0;
};

struct MatchConfig {
  MatchWeights weights;
  // The central region is the target box scaled by this factor about its
  // center; predictions inside it score 1.0.
  double central_region_factor = 0.5;
  // Exponential decay constant, in pixels, for predictions outside the box.
  double position_decay_pixels = 200.0;

  void validate() const {
    if (!(weights.w_type > 0.0))
      throw std::invalid_argument("MatchConfig: w_type must be > 0");
    if (weights.w_position < 0.0 || weights.w_value < 0.0)
      throw std::invalid_argument("MatchConfig: weights must be >= 0");
    if (!(central_region_factor >= 0.0 && central_region_factor < 1.0))
      throw std::invalid_argument(
          "MatchConfig: central_region_factor must be in [0,1)");
    if (!(position_decay_pixels > 0.0))
      throw std::invalid_argument(
          "MatchConfig: position_decay_pixels must be > 0");
  }
};

struct MatchScore {
  double total = 0.0;
  int m_type = 0;
  std::optional<double> m_position;  // absent iff annotation has no box
  std::optional<double> m_value;     // absent iff annotation has no value
};

inline int match_type(ActionType predicted, ActionType target) {
  return predicted == target ? 1 : 0;
}

inline double match_position(const std::optional<Position>& predicted,
                             const Box& target,
                             const MatchConfig& cfg = MatchConfig{}) {
  if (!target.valid())
    throw std::invalid_argument("match_position: invalid target box");
  if (!predicted) return 0.0;

  const PointD p = predicted->reduced_point();
  const PointD c = target.center();
  const double hw = (target.x_max - target.x_min) / 2.0;
  const double hh = (target.y_max - target.y_min) / 2.0;
  const double dx = std::abs(p.x - c.x);
  const double dy = std::abs(p.y - c.y);

  // Normalized radial coordinate: 0 at the center, 1 on the box boundary.
  const auto ratio = [](double d, double h) {
    if (h > 0.0) return d / h;
    return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  };
  const double rho = std::max(ratio(dx, hw), ratio(dy, hh));
  const double f = cfg.central_region_factor;

  if (rho <= f) return 1.0;
  if (rho <= 1.0) {
    // Linear along the ray from the central-region boundary (score 1) to the
    // box boundary (score 0.5), continuous with the outside branch at d=0.
    return 1.0 - 0.5 * (rho - f) / (1.0 - f);
  }
  const double ox = std::max({double(target.x_min) - p.x, 0.0,
                              p.x - double(target.x_max)});
  const double oy = std::max({double(target.y_min) - p.y, 0.0,
                              p.y - double(target.y_max)});
  const double d = std::hypot(ox, oy);
  return 0.5 * std::exp(-d / cfg.position_decay_pixels);
}

namespace detail {

inline std::string normalize_value(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out;
  out.reserve(e - b);
  for (std::size_t i = b; i < e; ++i)
    out.push_back(
        static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
  return out;
}

}  // namespace detail

// 1 exact match, 0.5 partial match (containment in either direction after
// trimming and case folding), 0 otherwise.
inline double match_value(const std::optional<std::string>& predicted,
                          const std::string& target) {
  if (!predicted) return 0.0;
  const std::string a = detail::normalize_value(*predicted);
  const std::string b = detail::normalize_value(target);
  if (a == b) return 1.0;
  if (!a.empty() && !b.empty() &&
      (a.find(b) != std::string::npos || b.find(a) != std::string::npos))
    return 0.5;
  return 0.0;
}

// Annotated target: a GuiAction whose position (if any) is read as the target
// box b* and whose value (if any) is the target value v*.
inline MatchScore phi_gui(const ParseResult& output, const GuiAction& target,
                          const MatchConfig& cfg = MatchConfig{}) {
  cfg.validate();
  if (std::string v = validate_action(target); !v.empty())
    throw std::invalid_argument("phi_gui: invalid target action: " + v);

  const bool has_box = target.position.has_value();
  const bool has_value = target.value.has_value();

  MatchScore score;
  if (has_box) score.m_position = 0.0;
  if (has_value) score.m_value = 0.0;
  if (!output.ok()) return score;  // all components zero, total zero

  const GuiAction& a = output.output().action;
  score.m_type = match_type(a.type, target.type);
  if (has_box)
    score.m_position = match_position(a.position, target.position->as_box(),
                                      cfg);
  if (has_value) score.m_value = match_value(a.value, *target.value);

  const MatchWeights& w = cfg.weights;
  double num = w.w_type * score.m_type;
  double den = w.w_type;
  if (has_box) {
    num += w.w_position * *score.m_position;
    den += w.w_position;
  }
  if (has_value) {
    num += w.w_value * *score.m_value;
    den += w.w_value;
  }
  score.total = num / den;
  return score;
}

inline MatchScore phi_gui(const StructuredOutput& output,
                          const GuiAction& target,
                          const MatchConfig& cfg = MatchConfig{}) {
  return phi_gui(ParseResult(output), target, cfg);
}

// Multi-solution action reward: best match over the valid action set.
inline double multi_solution_reward(const ParseResult& output,
                                    const ValidActionSet& action_set,
                                    const MatchConfig& cfg = MatchConfig{}) {
  double best = 0.0;
  for (const GuiAction& a : action_set.actions())
    best = std::max(best, phi_gui(output, a, cfg).total);
  return best;
}

inline double multi_solution_reward(const StructuredOutput& output,
                                    const ValidActionSet& action_set,
                                    const MatchConfig& cfg = MatchConfig{}) {
  return multi_solution_reward(ParseResult(output), action_set, cfg);
}

}  // namespace litegui
