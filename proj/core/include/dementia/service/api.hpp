#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dementia/service/config.hpp"
#include "dementia/service/registry.hpp"
#include "dementia/service/session_store.hpp"

namespace dementia::service {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// The JSON API, independent of any transport.
///
///   POST /api/sessions                  {level?}
///   GET  /api/sessions/{id}
///   POST /api/sessions/{id}/events      {kind: flip|tick, card_index?}
///   POST /api/sessions/{id}/health      {age, blood_oxygen, heart_rate, body_temp, weight, diabetic}
///   POST /api/sessions/{id}/face        {image: base64} or a raw image/png, image/jpeg body
///   GET  /api/sessions/{id}/decision
///   GET  /api/healthz
///
/// Every session request first advances the session to the server clock, so
/// timers never depend on the client.
class ScreeningService {
 public:
  ScreeningService(std::shared_ptr<const ModelRegistry> models, ServiceConfig config, Clock clock = steady_now_ms);

  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body,
                      std::string_view content_type = "application/json");

  SessionStore& sessions() noexcept { return sessions_; }
  const ServiceConfig& config() const noexcept { return config_; }

 private:
  HttpResponse create_session(std::string_view body);
  HttpResponse get_session(const std::string& id);
  HttpResponse post_event(const std::string& id, std::string_view body);
  HttpResponse post_health(const std::string& id, std::string_view body);
  HttpResponse post_face(const std::string& id, std::string_view body, std::string_view content_type);
  HttpResponse get_decision(const std::string& id);
  HttpResponse healthz();

  std::shared_ptr<const ModelRegistry> models_;
  ServiceConfig config_;
  SessionStore sessions_;
};

/// Standard alphabet, padding optional, whitespace ignored. Nullopt on any
/// other character.
std::optional<std::vector<std::uint8_t>> decode_base64(std::string_view text);

}  // namespace dementia::service
