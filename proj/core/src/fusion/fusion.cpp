#include "dementia/fusion/fusion.hpp"

namespace dementia::fusion {

std::string_view to_string(Outcome outcome) noexcept {
  switch (outcome) {
    case Outcome::Demented: return "Demented";
    case Outcome::DementedHighProbability: return "DementedHighProbability";
    case Outcome::NonDementedHighProbability: return "NonDementedHighProbability";
    case Outcome::NonDemented: return "NonDemented";
  }
  return "Unknown";
}

std::string_view describe(Outcome outcome) noexcept {
  switch (outcome) {
    case Outcome::Demented: return "Demented";
    case Outcome::DementedHighProbability: return "Demented with a high probability";
    case Outcome::NonDementedHighProbability: return "Non-Demented with a high probability";
    case Outcome::NonDemented: return "Non-Demented";
  }
  return "Unknown";
}

FusionDecision fuse(const FusionInput& input) {
  if (!input.health_pred || !input.face_pred) throw MissingPrediction("fusion needs both the health and face predictions");
  const int p1 = *input.health_pred, p2 = *input.face_pred;
  if ((p1 != 0 && p1 != 1) || (p2 != 0 && p2 != 1)) throw std::invalid_argument("fusion predictions must be 0 or 1");

  Outcome outcome;
  if (p1 == 1 && p2 == 1) outcome = Outcome::Demented;
  else if (p1 == 0 && p2 == 1) outcome = Outcome::DementedHighProbability;
  else if (p1 == 1) outcome = Outcome::NonDementedHighProbability;
  else outcome = Outcome::NonDemented;
  return {outcome, kHealthWeight * p1 + kFaceWeight * p2};
}

}  // namespace dementia::fusion
