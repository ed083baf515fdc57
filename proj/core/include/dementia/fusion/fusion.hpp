#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>

namespace dementia::fusion {

enum class Outcome : std::uint8_t {
  Demented,
  DementedHighProbability,
  NonDementedHighProbability,
  NonDemented,
};

std::string_view to_string(Outcome outcome) noexcept;
/// Human-readable phrase for reports and the UI.
std::string_view describe(Outcome outcome) noexcept;

inline constexpr double kHealthWeight = 0.30;
inline constexpr double kFaceWeight = 0.70;

struct FusionInput {
  std::optional<int> health_pred;  // MOD-1D, 0 or 1
  std::optional<int> face_pred;    // MOD-2D, 0 or 1
};

struct FusionDecision {
  Outcome outcome;
  double weighted_score;  // display only; never changes the outcome
};

class MissingPrediction : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The face prediction sets the polarity; disagreement between the two
/// models adds the "high probability" qualifier.
FusionDecision fuse(const FusionInput& input);

}  // namespace dementia::fusion
