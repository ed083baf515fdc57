#include "dementia/game/engine.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace dementia::game {

std::string_view to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::Created: return "Created";
    case Phase::Memorizing: return "Memorizing";
    case Phase::Playing: return "Playing";
    case Phase::AwaitingHealthInput: return "AwaitingHealthInput";
    case Phase::AwaitingFaceCapture: return "AwaitingFaceCapture";
    case Phase::LevelPassed: return "LevelPassed";
    case Phase::Completed: return "Completed";
    case Phase::Failed: return "Failed";
  }
  return "Unknown";
}

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::Flip: return "flip";
    case EventKind::Tick: return "tick";
    case EventKind::HealthSubmitted: return "health";
    case EventKind::FaceSubmitted: return "face";
  }
  return "unknown";
}

bool is_declared_transition(Phase from, Phase to, int level) noexcept {
  switch (from) {
    case Phase::Created: return to == Phase::Memorizing;
    case Phase::Memorizing: return to == Phase::Playing;
    case Phase::Playing:
      return level == 1 ? (to == Phase::LevelPassed || to == Phase::AwaitingHealthInput)
                        : (to == Phase::Completed || to == Phase::AwaitingFaceCapture);
    case Phase::LevelPassed: return level == 1 && to == Phase::Memorizing;
    case Phase::AwaitingHealthInput: return to == Phase::Memorizing || to == Phase::Failed;
    case Phase::AwaitingFaceCapture: return to == Phase::Completed || to == Phase::Failed;
    case Phase::Completed:
    case Phase::Failed: return false;
  }
  return false;
}

LevelConfig LevelConfig::level1() { return {1, 36, 120'000, 5'000, 4, 4, 0}; }
LevelConfig LevelConfig::level2() { return {2, 70, 300'000, 10'000, 4, 5, 15'000}; }

void LevelConfig::validate() const {
  const std::string at = "level " + std::to_string(level) + ": ";
  if (level != 1 && level != 2) throw std::invalid_argument("level must be 1 or 2");
  if (rows == 0 || cols == 0 || (rows * cols) % 2 != 0) throw std::invalid_argument(at + "grid must have an even, positive card count");
  if (click_threshold == 0) throw std::invalid_argument(at + "click threshold must be positive");
  if (countdown_ms <= 0 || show_ms < 0 || swap_interval_ms < 0) throw std::invalid_argument(at + "timers must be positive");
}

const LevelConfig& GameConfig::for_level(int level) const {
  if (level == 1) return level1;
  if (level == 2) return level2;
  throw std::invalid_argument("level must be 1 or 2");
}

void GameConfig::validate() const {
  level1.validate();
  level2.validate();
  if (level1.level != 1 || level2.level != 2) throw std::invalid_argument("level configs are out of order");
  if (submission_timeout_ms <= 0) throw std::invalid_argument("submission timeout must be positive");
}

namespace {

class Stepper {
 public:
  Stepper(GameSession& s, ApplyResult& r) : s_(s), r_(r) {}

  void move(Phase to, std::string reason) {
    r_.transitions.push_back({s_.phase, to, s_.level, std::move(reason)});
    s_.phase = to;
  }

  void start_level(int level) {
    const LevelConfig& cfg = s_.config.for_level(level);
    move(Phase::Memorizing, "level " + std::to_string(level) + " memorization");
    s_.level = level;
    s_.click_count = 0;
    s_.matched_pairs = 0;
    s_.open_card.reset();
    s_.mismatched.reset();
    s_.cards.assign(cfg.rows * cfg.cols, Card{});
    for (std::size_t i = 0; i < s_.cards.size(); ++i) {
      s_.cards[i].value = static_cast<int>(i / 2);
      s_.cards[i].face_up = true;
    }
    s_.rng.shuffle(s_.cards.begin(), s_.cards.end());
    s_.deadline = s_.now + cfg.show_ms;
    s_.next_swap = 0;
  }

  // `at` is when the budget ran out; the submission window starts there.
  void over_budget(TimeMs at, const char* why) {
    s_.deadline = at + s_.config.submission_timeout_ms;
    move(s_.level == 1 ? Phase::AwaitingHealthInput : Phase::AwaitingFaceCapture, why);
  }

  // Swaps the positions of two unmatched face-down cards, if there are two.
  void swap_cards() {
    std::vector<std::size_t> hidden;
    for (std::size_t i = 0; i < s_.cards.size(); ++i)
      if (!s_.cards[i].face_up && !s_.cards[i].matched) hidden.push_back(i);
    if (hidden.size() < 2) return;
    const std::size_t a = s_.rng.below(hidden.size());
    std::size_t b = s_.rng.below(hidden.size() - 1);
    if (b >= a) ++b;
    std::swap(s_.cards[hidden[a]], s_.cards[hidden[b]]);
  }

  void advance_clock() {
    for (;;) {
      switch (s_.phase) {
        case Phase::Memorizing:
          if (s_.now < s_.deadline) return;
          for (auto& c : s_.cards) c.face_up = false;
          {
            const LevelConfig& cfg = s_.level_config();
            const TimeMs play_start = s_.deadline;
            s_.deadline = play_start + cfg.countdown_ms;
            s_.next_swap = cfg.swap_interval_ms > 0 ? play_start + cfg.swap_interval_ms : 0;
          }
          move(Phase::Playing, "memorization over");
          break;
        case Phase::Playing: {
          const TimeMs interval = s_.level_config().swap_interval_ms;
          for (; interval > 0 && s_.next_swap <= s_.now && s_.next_swap < s_.deadline; s_.next_swap += interval)
            swap_cards();
          if (s_.now < s_.deadline) return;
          over_budget(s_.deadline, "countdown expired");
          break;
        }
        case Phase::LevelPassed:
          start_level(2);
          break;
        case Phase::AwaitingHealthInput:
        case Phase::AwaitingFaceCapture:
          if (s_.now < s_.deadline) return;
          move(Phase::Failed, "submission timed out");
          return;
        default:
          return;
      }
    }
  }

 private:
  GameSession& s_;
  ApplyResult& r_;
};

void validate_verdict(const Verdict& v) {
  if (!std::isfinite(v.score) || v.score < 0.0 || v.score > 1.0)
    throw EventConflict("verdict score must lie in [0, 1]");
  if (v.label != (v.score > 0.5 ? 1 : 0)) throw EventConflict("verdict label must equal score > 0.5");
}

void require_phase(const GameSession& s, Phase expected, EventKind kind) {
  if (s.phase != expected)
    throw EventConflict(std::string(to_string(kind)) + " not accepted in phase " + std::string(to_string(s.phase)));
}

}  // namespace

GameSession create_session(const GameConfig& config, int level, std::uint64_t seed, TimeMs now) {
  config.validate();
  GameSession s;
  s.config = config;
  s.seed = seed;
  s.created_at = now;
  s.now = now;
  s.rng = nn::Rng(nn::mix_seed(seed, 0x6A3E));
  ApplyResult ignored;
  Stepper(s, ignored).start_level(config.for_level(level).level);
  return s;
}

ApplyResult apply_event(GameSession& s, const GameEvent& event) {
  if (is_terminal(s.phase))
    throw TerminalSession("session is " + std::string(to_string(s.phase)) + " and accepts no events");

  ApplyResult result;
  // Work on a copy so a throwing or rejected event leaves the session
  // untouched. The log is detached first so it is not copied.
  struct LogGuard {
    GameSession& s;
    std::vector<LoggedEvent> log;
    ~LogGuard() { s.log = std::move(log); }
  } guard{s, std::move(s.log)};
  GameSession next = s;
  Stepper step(next, result);

  switch (event.kind) {
    case EventKind::Tick:
      if (event.now < next.now) {
        result.rejection = "time moved backwards";
        return result;
      }
      next.now = event.now;
      step.advance_clock();
      break;

    case EventKind::Flip: {
      require_phase(next, Phase::Playing, event.kind);
      if (event.card_index >= next.cards.size()) throw EventConflict("card index out of range");
      Card& card = next.cards[event.card_index];
      // A shown mismatch goes face-down before the new click is judged.
      if (next.mismatched) {
        next.cards[next.mismatched->first].face_up = false;
        next.cards[next.mismatched->second].face_up = false;
        next.mismatched.reset();
      }
      if (card.matched || card.face_up) {
        result.rejection = card.matched ? "card already matched" : "card already face-up";
        return result;
      }
      ++next.click_count;
      ++next.total_clicks;
      card.face_up = true;
      if (next.open_card) {
        Card& other = next.cards[*next.open_card];
        if (other.value == card.value) {
          other.matched = card.matched = true;
          ++next.matched_pairs;
        } else {
          next.mismatched = std::make_pair(*next.open_card, event.card_index);
        }
        next.open_card.reset();
      } else {
        next.open_card = event.card_index;
      }

      const LevelConfig& cfg = next.level_config();
      if (next.matched_pairs == cfg.pairs()) {
        if (next.level == 1) {
          next.level1_passed = true;
          step.move(Phase::LevelPassed, "all pairs matched");
        } else {
          next.level2_passed = true;
          step.move(Phase::Completed, "all pairs matched");
        }
      } else if (next.click_count > cfg.click_threshold) {
        step.over_budget(next.now, "click threshold exceeded");
      }
      break;
    }

    case EventKind::HealthSubmitted:
      require_phase(next, Phase::AwaitingHealthInput, event.kind);
      validate_verdict(event.verdict);
      next.health = event.verdict;
      step.start_level(2);
      break;

    case EventKind::FaceSubmitted:
      require_phase(next, Phase::AwaitingFaceCapture, event.kind);
      validate_verdict(event.verdict);
      next.face = event.verdict;
      step.move(Phase::Completed, "face prediction recorded");
      break;
  }

  result.accepted = true;
  result.seq = next.next_seq++;
  guard.log.push_back({result.seq, event, next.now});
  s = std::move(next);
  return result;
}

GameSession replay(const GameConfig& config, int level, std::uint64_t seed, TimeMs created_at,
                   const std::vector<LoggedEvent>& log) {
  GameSession s = create_session(config, level, seed, created_at);
  for (const auto& entry : log) {
    const ApplyResult r = apply_event(s, entry.event);
    if (!r.accepted || r.seq != entry.seq || s.now != entry.server_time)
      throw std::runtime_error("replay diverged at seq " + std::to_string(entry.seq));
  }
  return s;
}

SessionView session_view(const GameSession& s) {
  const LevelConfig& cfg = s.level_config();
  SessionView v;
  v.phase = s.phase;
  v.level = s.level;
  v.rows = cfg.rows;
  v.cols = cfg.cols;
  const bool reveal_all = s.phase == Phase::Memorizing;
  for (const Card& c : s.cards) {
    CardView cv;
    cv.face_up = c.face_up;
    cv.matched = c.matched;
    if (reveal_all || c.face_up || c.matched) cv.value = c.value;
    v.cards.push_back(cv);
  }
  v.click_count = s.click_count;
  v.click_threshold = cfg.click_threshold;
  v.total_clicks = s.total_clicks;
  v.matched_pairs = s.matched_pairs;
  v.total_pairs = cfg.pairs();
  const bool timed = s.phase == Phase::Memorizing || s.phase == Phase::Playing ||
                     s.phase == Phase::AwaitingHealthInput || s.phase == Phase::AwaitingFaceCapture;
  v.remaining_ms = timed ? std::max<TimeMs>(0, s.deadline - s.now) : 0;
  v.has_health = s.health.has_value();
  v.has_face = s.face.has_value();
  return v;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename N>
N parse_number(std::string_view text, std::size_t line) {
  N v{};
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc{} || r.ptr != text.data() + text.size())
    throw std::runtime_error("event log line " + std::to_string(line) + ": bad number '" + std::string(text) + "'");
  return v;
}

}  // namespace

void write_event_log(std::ostream& out, const std::vector<LoggedEvent>& log) {
  for (const auto& e : log) {
    out << e.seq << ',' << to_string(e.event.kind) << ',';
    switch (e.event.kind) {
      case EventKind::Flip: out << e.event.card_index; break;
      case EventKind::Tick: out << e.event.now; break;
      case EventKind::HealthSubmitted:
      case EventKind::FaceSubmitted: out << e.event.verdict.label << ':' << format_double(e.event.verdict.score); break;
    }
    out << ',' << e.server_time << '\n';
  }
}

std::vector<LoggedEvent> read_event_log(std::istream& in) {
  std::vector<LoggedEvent> log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
      f.push_back(rest.substr(0, pos));
    f.push_back(rest);
    if (f.size() != 4) throw std::runtime_error("event log line " + std::to_string(line_no) + ": expected 4 fields");

    LoggedEvent e;
    e.seq = parse_number<std::uint64_t>(f[0], line_no);
    e.server_time = parse_number<TimeMs>(f[3], line_no);
    if (f[1] == "flip") {
      e.event = GameEvent::flip(parse_number<std::size_t>(f[2], line_no));
    } else if (f[1] == "tick") {
      e.event = GameEvent::tick(parse_number<TimeMs>(f[2], line_no));
    } else if (f[1] == "health" || f[1] == "face") {
      const auto colon = f[2].find(':');
      if (colon == std::string_view::npos)
        throw std::runtime_error("event log line " + std::to_string(line_no) + ": verdict must be label:score");
      const Verdict v{parse_number<double>(f[2].substr(colon + 1), line_no), parse_number<int>(f[2].substr(0, colon), line_no)};
      e.event = f[1] == "health" ? GameEvent::health(v) : GameEvent::face(v);
    } else {
      throw std::runtime_error("event log line " + std::to_string(line_no) + ": unknown kind '" + std::string(f[1]) + "'");
    }
    log.push_back(e);
  }
  return log;
}

}  // namespace dementia::game
