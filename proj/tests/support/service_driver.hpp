#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "dementia/service/api.hpp"
#include "json.hpp"

namespace dementia::test {

using nlohmann::json;

/// A clock the test moves by hand.
struct ManualClock {
  std::shared_ptr<std::atomic<game::TimeMs>> t = std::make_shared<std::atomic<game::TimeMs>>(1'000'000);
  service::Clock clock() const {
    return [t = t] { return t->load(); };
  }
  void advance(game::TimeMs ms) const { *t += ms; }
};

/// method, path, body, content type -> response
using Transport = std::function<service::HttpResponse(const std::string&, const std::string&, const std::string&,
                                                      const std::string&)>;

inline Transport in_process(service::ScreeningService& svc) {
  return [&svc](const std::string& m, const std::string& p, const std::string& b, const std::string& ct) {
    return svc.handle(m, p, b, ct);
  };
}

struct Reply {
  int status;
  json body;
};

/// Plays the game the way a browser client would: it only sees redacted
/// views and posts events.
class ScriptedPlayer {
 public:
  ScriptedPlayer(Transport transport, ManualClock clock) : send_(std::move(transport)), clock_(std::move(clock)) {}

  Reply call(const std::string& method, const std::string& path, const json& body = nullptr,
             const std::string& content_type = "application/json") {
    const service::HttpResponse r = send_(method, path, body.is_null() ? "" : body.dump(), content_type);
    json parsed = json::parse(r.body, nullptr, false);
    if (parsed.is_discarded()) throw std::runtime_error("non-JSON reply: " + r.body);
    return {r.status, std::move(parsed)};
  }

  Reply expect(int status, const std::string& method, const std::string& path, const json& body = nullptr) {
    Reply r = call(method, path, body);
    if (r.status != status)
      throw std::runtime_error(method + " " + path + " returned " + std::to_string(r.status) + ": " + r.body.dump());
    return r;
  }

  std::string base() const { return "/api/sessions/" + id_; }
  const std::string& id() const { return id_; }
  const json& view() const { return view_; }
  std::string phase() const { return view_.at("phase"); }

  void create(int level = 1) {
    const Reply r = expect(201, "POST", "/api/sessions", {{"level", level}});
    id_ = r.body.at("session_id");
    view_ = r.body.at("view");
    memorize();
  }

  // Reads every card during memorization, then lets the show timer run out.
  void memorize() {
    if (phase() != "Memorizing") throw std::runtime_error("not memorizing: " + phase());
    values_.clear();
    for (const auto& c : view_.at("cards")) values_.push_back(c.at("value").get<int>());
    clock_.advance(view_.at("remaining_ms").get<game::TimeMs>());
    tick();
    if (phase() != "Playing") throw std::runtime_error("memorization did not end: " + phase());
  }

  Reply tick() { return event({{"kind", "tick"}}); }

  // From LevelPassed, the next tick opens Level 2.
  void enter_level2() {
    tick();
    memorize();
  }

  Reply flip(std::size_t index) { return event({{"kind", "flip"}, {"card_index", index}}); }

  // Alternates two cards of different value until the phase changes.
  std::size_t exceed_threshold() {
    std::size_t a = 0, b = 1;
    while (values_[b] == values_[a]) ++b;
    std::size_t clicks = 0;
    while (phase() == "Playing") {
      flip(clicks % 2 ? b : a);
      ++clicks;
    }
    return clicks;
  }

  // Matches every pair from memory.
  void clear_level() {
    std::map<int, std::vector<std::size_t>> where;
    for (std::size_t i = 0; i < values_.size(); ++i) where[values_[i]].push_back(i);
    for (const auto& [value, pos] : where) {
      flip(pos[0]);
      flip(pos[1]);
    }
  }

  Reply submit_health(const json& metrics) {
    Reply r = call("POST", base() + "/health", metrics);
    if (r.status == 200) {
      view_ = r.body.at("view");
      if (phase() == "Memorizing") memorize();
    }
    return r;
  }

  Reply submit_face(const std::string& base64_image) {
    Reply r = call("POST", base() + "/face", {{"image", base64_image}});
    if (r.status == 200) view_ = r.body.at("view");
    return r;
  }

  Reply decision() { return call("GET", base() + "/decision"); }

  ManualClock& clock() { return clock_; }

 private:
  Reply event(const json& body) {
    Reply r = expect(200, "POST", base() + "/events", body);
    view_ = r.body.at("view");
    return r;
  }

  Transport send_;
  ManualClock clock_;
  std::string id_;
  json view_;
  std::vector<int> values_;
};

inline std::string encode_base64(const std::vector<std::uint8_t>& bytes) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    for (int s = 18; s >= 0; s -= 6) out.push_back(kAlphabet[(v >> s) & 63]);
  }
  if (i + 1 == bytes.size()) {
    const std::uint32_t v = bytes[i] << 16;
    out += {kAlphabet[(v >> 18) & 63], kAlphabet[(v >> 12) & 63], '=', '='};
  } else if (i + 2 == bytes.size()) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += {kAlphabet[(v >> 18) & 63], kAlphabet[(v >> 12) & 63], kAlphabet[(v >> 6) & 63], '='};
  }
  return out;
}

}  // namespace dementia::test
