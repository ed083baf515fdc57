#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dementia/nn/rng.hpp"

namespace dementia::game {

/// Server time in milliseconds on a monotonic clock. Time only ever enters
/// the engine through Tick events and session creation.
using TimeMs = std::int64_t;

enum class Phase : std::uint8_t {
  Created,
  Memorizing,
  Playing,
  AwaitingHealthInput,
  AwaitingFaceCapture,
  LevelPassed,
  Completed,
  Failed,
};

std::string_view to_string(Phase phase) noexcept;
constexpr bool is_terminal(Phase p) noexcept { return p == Phase::Completed || p == Phase::Failed; }

/// The declared phase graph. Level 1 Playing may end in LevelPassed or
/// AwaitingHealthInput, Level 2 Playing in Completed or AwaitingFaceCapture.
bool is_declared_transition(Phase from, Phase to, int level) noexcept;

struct LevelConfig {
  int level = 1;
  std::size_t click_threshold = 36;
  TimeMs countdown_ms = 120'000;
  TimeMs show_ms = 5'000;
  std::size_t rows = 4;
  std::size_t cols = 4;
  TimeMs swap_interval_ms = 0;  // 0 disables the periodic swap

  static LevelConfig level1();
  static LevelConfig level2();
  std::size_t pairs() const noexcept { return rows * cols / 2; }
  void validate() const;
  bool operator==(const LevelConfig&) const = default;
};

struct GameConfig {
  LevelConfig level1 = LevelConfig::level1();
  LevelConfig level2 = LevelConfig::level2();
  TimeMs submission_timeout_ms = 15 * 60'000;

  const LevelConfig& for_level(int level) const;
  void validate() const;
  bool operator==(const GameConfig&) const = default;
};

/// A model output as recorded by the engine.
struct Verdict {
  double score = 0.0;
  int label = 0;
  bool operator==(const Verdict&) const = default;
};

enum class EventKind : std::uint8_t { Flip, Tick, HealthSubmitted, FaceSubmitted };

std::string_view to_string(EventKind kind) noexcept;

struct GameEvent {
  EventKind kind = EventKind::Tick;
  std::size_t card_index = 0;  // Flip
  TimeMs now = 0;              // Tick
  Verdict verdict;             // HealthSubmitted / FaceSubmitted

  static GameEvent flip(std::size_t index) { return {EventKind::Flip, index, 0, {}}; }
  static GameEvent tick(TimeMs now) { return {EventKind::Tick, 0, now, {}}; }
  static GameEvent health(Verdict v) { return {EventKind::HealthSubmitted, 0, 0, v}; }
  static GameEvent face(Verdict v) { return {EventKind::FaceSubmitted, 0, 0, v}; }
  bool operator==(const GameEvent&) const = default;
};

/// One accepted event. Rejected events are never logged.
struct LoggedEvent {
  std::uint64_t seq = 0;
  GameEvent event;
  TimeMs server_time = 0;
  bool operator==(const LoggedEvent&) const = default;
};

struct Card {
  int value = 0;
  bool face_up = false;
  bool matched = false;
  bool operator==(const Card&) const = default;
};

struct GameSession {
  GameConfig config;
  std::uint64_t seed = 0;
  TimeMs created_at = 0;

  Phase phase = Phase::Created;
  int level = 1;
  std::size_t click_count = 0;   // current level; the threshold applies here
  std::size_t total_clicks = 0;  // whole session
  std::size_t matched_pairs = 0;
  std::vector<Card> cards;
  std::optional<std::size_t> open_card;                            // face-up, waiting for a partner
  std::optional<std::pair<std::size_t, std::size_t>> mismatched;  // hidden again on the next flip

  TimeMs now = 0;
  TimeMs deadline = 0;   // end of the current timed phase
  TimeMs next_swap = 0;  // Level 2 only
  nn::Rng rng;

  std::optional<Verdict> health;
  std::optional<Verdict> face;
  bool level1_passed = false;
  bool level2_passed = false;

  std::uint64_t next_seq = 1;
  std::vector<LoggedEvent> log;

  const LevelConfig& level_config() const { return config.for_level(level); }
  bool operator==(const GameSession&) const = default;
};

struct Transition {
  Phase from;
  Phase to;
  int level;  // level in effect before the change
  std::string reason;
};

struct ApplyResult {
  bool accepted = false;
  std::uint64_t seq = 0;  // 0 when rejected
  // Elementary phase changes in order; one Tick can cross several deadlines.
  std::vector<Transition> transitions;
  std::string rejection;
};

/// The event is not allowed in the current phase, or is malformed.
class EventConflict : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class TerminalSession : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Shuffles the level's grid from `seed` and enters Memorizing with every
/// card revealed until `now + show_ms`.
GameSession create_session(const GameConfig& config, int level, std::uint64_t seed, TimeMs now);

/// Applies one event. Flips on face-up or matched cards and Ticks that move
/// time backwards are rejected without touching state. Throws
/// TerminalSession on Completed/Failed sessions and EventConflict for events
/// the current phase does not accept.
ApplyResult apply_event(GameSession& session, const GameEvent& event);

/// Rebuilds a session from its creation parameters and event log.
GameSession replay(const GameConfig& config, int level, std::uint64_t seed, TimeMs created_at,
                   const std::vector<LoggedEvent>& log);

struct CardView {
  std::optional<int> value;  // absent while face-down
  bool face_up = false;
  bool matched = false;
};

struct SessionView {
  Phase phase;
  int level;
  std::size_t rows, cols;
  std::vector<CardView> cards;
  std::size_t click_count, click_threshold, total_clicks;
  std::size_t matched_pairs, total_pairs;
  TimeMs remaining_ms;
  bool has_health, has_face;
};

/// Client-facing state. Face-down values are withheld except during
/// memorization, when every card is shown.
SessionView session_view(const GameSession& session);

/// Line format `seq,kind,payload,server_time`; kinds are flip, tick, health
/// and face. Verdict payloads are `label:score` with a round-trip score.
void write_event_log(std::ostream& out, const std::vector<LoggedEvent>& log);
std::vector<LoggedEvent> read_event_log(std::istream& in);

}  // namespace dementia::game
