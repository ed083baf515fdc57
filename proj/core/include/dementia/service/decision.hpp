#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dementia/fusion/fusion.hpp"
#include "dementia/game/engine.hpp"

namespace dementia::service {

enum class DecisionKind {
  Passed,       // both levels cleared, no model was consulted
  SingleModel,  // only one prediction was gathered
  Fused,        // both predictions, combined by the fusion rule
};

std::string_view to_string(DecisionKind kind) noexcept;

struct ScreeningDecision {
  DecisionKind kind;
  std::optional<fusion::Outcome> outcome;  // absent for Passed
  std::optional<double> weighted_score;    // Fused only
  std::string basis;                       // "none", "health", "face" or "health+face"
  std::string message;
};

/// The session is still collecting input.
class DecisionNotReady : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The session failed before any prediction was gathered.
class DecisionUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ready once both predictions exist or the session is terminal.
ScreeningDecision decision_flow(const game::GameSession& session);

}  // namespace dementia::service
