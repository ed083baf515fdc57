#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "dementia/game/engine.hpp"
#include "support/game_fuzz.hpp"

using namespace dementia::game;

namespace {

constexpr TimeMs kStart = 10'000;

GameSession playing(int level, std::uint64_t seed = 1) {
  GameSession s = create_session(GameConfig{}, level, seed, kStart);
  apply_event(s, GameEvent::tick(kStart + s.level_config().show_ms));
  EXPECT_EQ(s.phase, Phase::Playing);
  return s;
}

// Two positions holding different values.
std::pair<std::size_t, std::size_t> mismatching(const GameSession& s) {
  for (std::size_t j = 1; j < s.cards.size(); ++j)
    if (s.cards[j].value != s.cards[0].value) return {0, j};
  return {0, 0};
}

std::size_t partner(const GameSession& s, std::size_t i) {
  for (std::size_t j = 0; j < s.cards.size(); ++j)
    if (j != i && s.cards[j].value == s.cards[i].value) return j;
  return i;
}

void match_all(GameSession& s) {
  for (std::size_t i = 0; i < s.cards.size(); ++i) {
    if (s.cards[i].matched) continue;
    apply_event(s, GameEvent::flip(i));
    apply_event(s, GameEvent::flip(partner(s, i)));
  }
}

}  // namespace

TEST(GameConfig, Defaults) {
  const GameConfig c;
  EXPECT_EQ(c.level1.click_threshold, 36u);
  EXPECT_EQ(c.level1.countdown_ms, 120'000);
  EXPECT_EQ(c.level1.show_ms, 5'000);
  EXPECT_EQ(c.level1.pairs(), 8u);
  EXPECT_EQ(c.level2.click_threshold, 70u);
  EXPECT_EQ(c.level2.countdown_ms, 300'000);
  EXPECT_EQ(c.level2.show_ms, 10'000);
  EXPECT_EQ(c.level2.pairs(), 10u);
  GameConfig odd;
  odd.level1.cols = 3;
  odd.level1.rows = 3;
  EXPECT_THROW(create_session(odd, 1, 1, 0), std::invalid_argument);
}

TEST(Session, SeededGridAndMemorization) {
  const GameSession a = create_session(GameConfig{}, 1, 42, kStart);
  const GameSession b = create_session(GameConfig{}, 1, 42, kStart);
  const GameSession c = create_session(GameConfig{}, 1, 43, kStart);
  EXPECT_EQ(a.cards, b.cards);
  EXPECT_NE(a.cards, c.cards);
  EXPECT_EQ(a.phase, Phase::Memorizing);
  EXPECT_EQ(a.deadline, kStart + 5'000);
  for (const auto& cv : session_view(a).cards) EXPECT_TRUE(cv.value.has_value());
  std::vector<int> values;
  for (const auto& card : a.cards) values.push_back(card.value);
  std::sort(values.begin(), values.end());
  for (std::size_t i = 0; i < values.size(); ++i) EXPECT_EQ(values[i], static_cast<int>(i / 2));
}

TEST(Session, TickBeforeDeadlineChangesNothing) {
  GameSession s = create_session(GameConfig{}, 1, 1, kStart);
  const auto r = apply_event(s, GameEvent::tick(kStart + 4'999));
  EXPECT_TRUE(r.accepted);
  EXPECT_TRUE(r.transitions.empty());
  EXPECT_EQ(s.phase, Phase::Memorizing);
  EXPECT_THROW(apply_event(s, GameEvent::flip(0)), EventConflict);

  const GameSession before = s;
  EXPECT_FALSE(apply_event(s, GameEvent::tick(kStart)).accepted);
  EXPECT_EQ(s, before);
}

TEST(Session, PlayingViewHidesFaceDownCards) {
  GameSession s = playing(1);
  const auto view = session_view(s);
  EXPECT_EQ(view.remaining_ms, 120'000);
  for (const auto& cv : view.cards) EXPECT_FALSE(cv.value.has_value());
  apply_event(s, GameEvent::flip(3));
  const auto after = session_view(s);
  EXPECT_EQ(after.cards[3].value, s.cards[3].value);
  EXPECT_EQ(std::count_if(after.cards.begin(), after.cards.end(), [](const CardView& c) { return c.value.has_value(); }), 1);
  EXPECT_EQ(after.click_count, 1u);
}

TEST(Flip, MatchLocksAndMismatchHidesOnNextFlip) {
  GameSession s = playing(1);
  const std::size_t p = partner(s, 0);
  apply_event(s, GameEvent::flip(0));
  apply_event(s, GameEvent::flip(p));
  EXPECT_TRUE(s.cards[0].matched && s.cards[p].matched);
  EXPECT_EQ(s.matched_pairs, 1u);

  const GameSession locked = s;
  const auto r = apply_event(s, GameEvent::flip(0));
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(s, locked);

  std::size_t a = 1;
  while (s.cards[a].matched) ++a;
  std::size_t b = a + 1;
  while (s.cards[b].matched || s.cards[b].value == s.cards[a].value) ++b;
  apply_event(s, GameEvent::flip(a));
  EXPECT_FALSE(apply_event(s, GameEvent::flip(a)).accepted);  // face-up
  apply_event(s, GameEvent::flip(b));
  EXPECT_TRUE(s.cards[a].face_up && s.cards[b].face_up);
  std::size_t c = 0;
  while (c == a || c == b || s.cards[c].matched) ++c;
  apply_event(s, GameEvent::flip(c));
  EXPECT_FALSE(s.cards[a].face_up);
  EXPECT_FALSE(s.cards[b].face_up);
  EXPECT_TRUE(s.cards[c].face_up);
  EXPECT_EQ(s.click_count, 5u);
  EXPECT_THROW(apply_event(s, GameEvent::flip(99)), EventConflict);
}

TEST(Threshold, Level1FiresOnClick37) {
  GameSession s = playing(1);
  const auto [a, b] = mismatching(s);
  for (std::size_t click = 1; click <= 36; ++click) {
    apply_event(s, GameEvent::flip(click % 2 ? a : b));
    ASSERT_EQ(s.phase, Phase::Playing) << click;
  }
  const auto r = apply_event(s, GameEvent::flip(a));
  EXPECT_EQ(s.click_count, 37u);
  EXPECT_EQ(s.phase, Phase::AwaitingHealthInput);
  ASSERT_EQ(r.transitions.size(), 1u);
  EXPECT_EQ(r.transitions[0].reason, "click threshold exceeded");

  EXPECT_THROW(apply_event(s, GameEvent::face({0.9, 1})), EventConflict);
  EXPECT_THROW(apply_event(s, GameEvent::health({0.9, 0})), EventConflict);
  apply_event(s, GameEvent::health({0.8, 1}));
  EXPECT_EQ(s.phase, Phase::Memorizing);
  EXPECT_EQ(s.level, 2);
  EXPECT_EQ(s.click_count, 0u);
  EXPECT_EQ(s.total_clicks, 37u);
  EXPECT_EQ(s.cards.size(), 20u);
  EXPECT_EQ(s.health, (Verdict{0.8, 1}));
}

TEST(Threshold, Level2FiresOnClick71ThenFaceCompletes) {
  GameSession s = playing(2);
  const auto [a, b] = mismatching(s);
  for (std::size_t click = 1; click <= 70; ++click) apply_event(s, GameEvent::flip(click % 2 ? a : b));
  EXPECT_EQ(s.phase, Phase::Playing);
  apply_event(s, GameEvent::flip(a));
  EXPECT_EQ(s.phase, Phase::AwaitingFaceCapture);
  apply_event(s, GameEvent::face({0.2, 0}));
  EXPECT_EQ(s.phase, Phase::Completed);
  EXPECT_THROW(apply_event(s, GameEvent::tick(s.now + 1)), TerminalSession);
}

TEST(Levels, CleanRunPassesBothLevels) {
  GameSession s = playing(1);
  match_all(s);
  EXPECT_EQ(s.phase, Phase::LevelPassed);
  EXPECT_TRUE(s.level1_passed);
  const auto r = apply_event(s, GameEvent::tick(s.now));
  ASSERT_EQ(r.transitions.size(), 1u);
  EXPECT_EQ(s.phase, Phase::Memorizing);
  EXPECT_EQ(s.level, 2);
  apply_event(s, GameEvent::tick(s.now + 10'000));
  match_all(s);
  EXPECT_EQ(s.phase, Phase::Completed);
  EXPECT_TRUE(s.level2_passed);
  EXPECT_FALSE(s.health || s.face);
}

TEST(Timers, CountdownExpiryRoutesToPredictionThenFails) {
  GameSession s = playing(1);
  apply_event(s, GameEvent::flip(0));
  apply_event(s, GameEvent::tick(s.deadline - 1));
  EXPECT_EQ(s.phase, Phase::Playing);
  apply_event(s, GameEvent::tick(s.deadline));
  EXPECT_EQ(s.phase, Phase::AwaitingHealthInput);
  EXPECT_EQ(session_view(s).remaining_ms, 15 * 60'000);
  apply_event(s, GameEvent::tick(s.deadline));
  EXPECT_EQ(s.phase, Phase::Failed);
  EXPECT_THROW(apply_event(s, GameEvent::flip(0)), TerminalSession);
}

TEST(Timers, OneTickCanCrossSeveralDeadlines) {
  GameSession s = create_session(GameConfig{}, 2, 5, kStart);
  const auto r = apply_event(s, GameEvent::tick(kStart + 10'000 + 300'000 + 15 * 60'000));
  ASSERT_EQ(r.transitions.size(), 3u);
  EXPECT_EQ(r.transitions[0].to, Phase::Playing);
  EXPECT_EQ(r.transitions[1].to, Phase::AwaitingFaceCapture);
  EXPECT_EQ(r.transitions[2].to, Phase::Failed);
}

TEST(Level2, PeriodicSwapMovesOnlyHiddenUnmatchedCards) {
  GameSession s = playing(2, 9);
  const std::size_t p = partner(s, 0);
  apply_event(s, GameEvent::flip(0));
  apply_event(s, GameEvent::flip(p));
  const auto before = s.cards;
  apply_event(s, GameEvent::tick(s.now + 14'999));
  EXPECT_EQ(s.cards, before);
  apply_event(s, GameEvent::tick(s.now + 1));
  std::size_t moved = 0;
  for (std::size_t i = 0; i < s.cards.size(); ++i) moved += !(s.cards[i] == before[i]);
  EXPECT_EQ(moved, 2u);
  EXPECT_EQ(s.cards[0], before[0]);
  EXPECT_EQ(s.cards[p], before[p]);
}

TEST(EventLog, TextRoundTripAndReplay) {
  GameSession s = playing(1, 77);
  const auto [a, b] = mismatching(s);
  for (int i = 0; i < 37; ++i) apply_event(s, GameEvent::flip(i % 2 ? b : a));
  apply_event(s, GameEvent::health({0.1 + 0.2, 0}));
  apply_event(s, GameEvent::tick(s.now + 12'345));

  std::stringstream text;
  write_event_log(text, s.log);
  EXPECT_EQ(text.str().substr(0, 14), "1,tick,15000,1");
  EXPECT_NE(text.str().find(",health,0:0.30000000000000004,"), std::string::npos);
  const auto parsed = read_event_log(text);
  EXPECT_EQ(parsed, s.log);
  EXPECT_EQ(replay(GameConfig{}, 1, 77, kStart, parsed), s);

  for (std::size_t i = 1; i < s.log.size(); ++i) EXPECT_GT(s.log[i].seq, s.log[i - 1].seq);
  std::istringstream bad("1,jump,3,0\n");
  EXPECT_THROW(read_event_log(bad), std::runtime_error);
}

TEST(Fuzz, SmallCampaignPerLevel) {
  for (int level : {1, 2}) {
    dementia::test::GameFuzzer fuzzer(GameConfig{}, level);
    const auto stats = fuzzer.run(300, 1234 + level);
    EXPECT_EQ(stats.violations, 0u) << stats.first_violation;
    EXPECT_GT(stats.threshold_crossings, 0u);
    EXPECT_GT(stats.final_phase[static_cast<std::size_t>(Phase::Completed)], 0u);
    EXPECT_GT(stats.final_phase[static_cast<std::size_t>(Phase::Failed)], 0u);
  }
}
