#include "dementia/service/session_store.hpp"

#include <chrono>
#include <random>

namespace dementia::service {

game::TimeMs steady_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string random_session_id() {
  static constexpr char kHex[] = "0123456789abcdef";
  std::random_device entropy;
  std::string id;
  id.reserve(32);
  for (int word = 0; word < 4; ++word) {
    std::uint32_t bits = entropy();
    for (int nibble = 0; nibble < 8; ++nibble, bits >>= 4) id.push_back(kHex[bits & 0xF]);
  }
  return id;
}

SessionStore::SessionStore(game::TimeMs ttl_ms, Clock clock) : ttl_ms_(ttl_ms), clock_(std::move(clock)) {
  if (ttl_ms_ <= 0) throw std::invalid_argument("session TTL must be positive");
  if (!clock_) throw std::invalid_argument("session store needs a clock");
}

std::pair<std::string, std::shared_ptr<SessionEntry>> SessionStore::create(const game::GameConfig& config, int level) {
  std::random_device entropy;
  const std::uint64_t seed = (static_cast<std::uint64_t>(entropy()) << 32) | entropy();
  const game::TimeMs now = clock_();
  auto entry = std::make_shared<SessionEntry>();
  entry->game = game::create_session(config, level, seed, now);

  std::lock_guard lock(mutex_);
  evict_locked(now);
  std::string id = random_session_id();
  while (slots_.contains(id)) id = random_session_id();
  slots_.emplace(id, Slot{entry, now});
  return {std::move(id), std::move(entry)};
}

std::shared_ptr<SessionEntry> SessionStore::find(const std::string& id) {
  const game::TimeMs now = clock_();
  std::lock_guard lock(mutex_);
  const auto it = slots_.find(id);
  if (it == slots_.end()) return nullptr;
  if (now - it->second.last_access >= ttl_ms_) {
    slots_.erase(it);
    return nullptr;
  }
  it->second.last_access = now;
  return it->second.entry;
}

std::size_t SessionStore::evict_expired() {
  const game::TimeMs now = clock_();
  std::lock_guard lock(mutex_);
  return evict_locked(now);
}

std::size_t SessionStore::evict_locked(game::TimeMs now) {
  return std::erase_if(slots_, [&](const auto& kv) { return now - kv.second.last_access >= ttl_ms_; });
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return slots_.size();
}

}  // namespace dementia::service
