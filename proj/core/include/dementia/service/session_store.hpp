#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>

#include "dementia/game/engine.hpp"
#include "dementia/health/record.hpp"

namespace dementia::service {

/// Milliseconds from some fixed origin; must never go backwards.
using Clock = std::function<game::TimeMs()>;
game::TimeMs steady_now_ms();

/// 32 lowercase hex digits drawn from the OS entropy source.
std::string random_session_id();

struct SessionEntry {
  std::mutex mutex;  // serializes this session's events
  game::GameSession game;
  // Accepted submissions, kept so an identical retry gets the same answer.
  std::optional<health::HealthRecord> health_request;
  std::optional<std::pair<std::size_t, std::size_t>> face_request;  // (size, hash) of the image bytes
};

/// Sessions keyed by unguessable ids, evicted after `ttl_ms` without access.
class SessionStore {
 public:
  SessionStore(game::TimeMs ttl_ms, Clock clock);

  std::pair<std::string, std::shared_ptr<SessionEntry>> create(const game::GameConfig& config, int level);
  /// Refreshes the idle timer. Null when unknown or expired.
  std::shared_ptr<SessionEntry> find(const std::string& id);
  std::size_t evict_expired();
  std::size_t size() const;
  game::TimeMs now() const { return clock_(); }

 private:
  struct Slot {
    std::shared_ptr<SessionEntry> entry;
    game::TimeMs last_access;
  };
  std::size_t evict_locked(game::TimeMs now);

  game::TimeMs ttl_ms_;
  Clock clock_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, Slot> slots_;
};

}  // namespace dementia::service
