#include "dementia/service/decision.hpp"

namespace dementia::service {

std::string_view to_string(DecisionKind kind) noexcept {
  switch (kind) {
    case DecisionKind::Passed: return "passed";
    case DecisionKind::SingleModel: return "single_model";
    case DecisionKind::Fused: return "fused";
  }
  return "?";
}

ScreeningDecision decision_flow(const game::GameSession& s) {
  const bool terminal = game::is_terminal(s.phase);
  if (s.health && s.face) {
    const auto fused = fusion::fuse({s.health->label, s.face->label});
    return {DecisionKind::Fused, fused.outcome, fused.weighted_score, "health+face",
            std::string(fusion::describe(fused.outcome))};
  }
  if (!terminal)
    throw DecisionNotReady("decision not ready: session is in phase " + std::string(game::to_string(s.phase)));

  if (s.health || s.face) {
    const bool face = s.face.has_value();
    const int label = face ? s.face->label : s.health->label;
    const fusion::Outcome outcome = label == 1 ? fusion::Outcome::Demented : fusion::Outcome::NonDemented;
    return {DecisionKind::SingleModel, outcome, std::nullopt, face ? "face" : "health",
            std::string(fusion::describe(outcome)) + " (single-model result: only the " +
                (face ? "facial image" : "health metrics") + " model was consulted)"};
  }
  if (s.phase == game::Phase::Completed)
    return {DecisionKind::Passed, std::nullopt, std::nullopt, "none", "Passed: no dementia indication"};
  throw DecisionUnavailable("the session failed before any prediction was gathered");
}

}  // namespace dementia::service
