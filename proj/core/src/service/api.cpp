#include "dementia/service/api.hpp"

#include <array>
#include <cstdio>
#include <functional>
#include "json.hpp"

#include "dementia/image/dataset.hpp"
#include "dementia/service/decision.hpp"

#ifndef DEMENTIA_VERSION
#define DEMENTIA_VERSION "unknown"
#endif

namespace dementia::service {

using json = nlohmann::json;

namespace {

// Carries an HTTP status out of a handler.
struct ApiError {
  int status;
  std::string message;
  std::vector<std::string> fields;
};

HttpResponse respond(int status, const json& body) { return {status, body.dump(), "application/json"}; }

HttpResponse error_response(const ApiError& e) {
  json body{{"error", e.message}};
  if (!e.fields.empty()) body["fields"] = e.fields;
  return respond(e.status, body);
}

json parse_object(std::string_view body, bool allow_empty) {
  if (allow_empty && body.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ApiError{400, "request body must be a JSON object", {}};
  return doc;
}

json card_json(const game::CardView& c) {
  json j{{"face_up", c.face_up}, {"matched", c.matched}};
  j["value"] = c.value ? json(*c.value) : json(nullptr);
  return j;
}

json view_json(const game::GameSession& s) {
  const game::SessionView v = game::session_view(s);
  json cards = json::array();
  for (const auto& c : v.cards) cards.push_back(card_json(c));
  return {{"phase", game::to_string(v.phase)},
          {"level", v.level},
          {"rows", v.rows},
          {"cols", v.cols},
          {"cards", std::move(cards)},
          {"click_count", v.click_count},
          {"click_threshold", v.click_threshold},
          {"total_clicks", v.total_clicks},
          {"matched_pairs", v.matched_pairs},
          {"total_pairs", v.total_pairs},
          {"remaining_ms", v.remaining_ms},
          {"has_health", v.has_health},
          {"has_face", v.has_face},
          {"seq", s.next_seq - 1}};
}

json transition_json(const game::Transition& t) {
  return {{"from", game::to_string(t.from)}, {"to", game::to_string(t.to)}, {"level", t.level}, {"reason", t.reason}};
}

json prediction_json(const game::Verdict& v, models::Architecture arch) {
  return {{"score", v.score},
          {"label", v.label},
          {"label_name", models::to_string(models::label_for_score(v.score))},
          {"model", models::to_string(arch)}};
}

std::string hex32(std::uint32_t v) {
  std::array<char, 9> buf{};
  std::snprintf(buf.data(), buf.size(), "%08x", v);
  return buf.data();
}

// Brings the session up to the server clock. Terminal sessions stay put.
void sync_clock(game::GameSession& s, game::TimeMs now, std::vector<game::Transition>* transitions = nullptr) {
  if (game::is_terminal(s.phase) || now < s.now) return;
  auto r = game::apply_event(s, game::GameEvent::tick(now));
  if (transitions) transitions->insert(transitions->end(), r.transitions.begin(), r.transitions.end());
}

void require_phase(const game::GameSession& s, game::Phase phase, const char* what) {
  if (s.phase != phase)
    throw ApiError{409, std::string(what) + " is accepted only in phase " + std::string(game::to_string(phase)) +
                            "; session is in " + std::string(game::to_string(s.phase)),
                   {}};
}

health::HealthRecord parse_health(const json& body) {
  static constexpr std::array<const char*, 5> kNumeric = {"age", "blood_oxygen", "heart_rate", "body_temp", "weight"};
  health::HealthRecord r;
  std::array<double*, 5> slots = {&r.age, &r.blood_oxygen, &r.heart_rate, &r.body_temp, &r.weight};
  std::vector<std::string> bad;
  for (std::size_t i = 0; i < kNumeric.size(); ++i) {
    const auto it = body.find(kNumeric[i]);
    if (it == body.end() || !it->is_number()) {
      bad.emplace_back(kNumeric[i]);
      continue;
    }
    *slots[i] = it->get<double>();
  }
  const auto d = body.find("diabetic");
  if (d != body.end() && d->is_boolean()) {
    r.diabetic = d->get<bool>() ? 1 : 0;
  } else if (d != body.end() && d->is_number_integer() && (*d == 0 || *d == 1)) {
    r.diabetic = d->get<int>();
  } else {
    bad.emplace_back("diabetic");
  }
  if (!bad.empty()) throw ApiError{400, "missing or invalid health fields", bad};
  try {
    (void)health::categorize(r);
  } catch (const health::FieldError& e) {
    throw ApiError{400, e.what(), {e.field()}};
  }
  return r;
}

bool looks_like_png(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t kSig[] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  return b.size() >= sizeof kSig && std::equal(std::begin(kSig), std::end(kSig), b.begin());
}

bool looks_like_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

std::vector<std::uint8_t> extract_image(std::string_view body, std::string_view content_type) {
  const auto raw = [&](std::string_view type) { return content_type.substr(0, type.size()) == type; };
  std::vector<std::uint8_t> bytes;
  if (raw("image/png") || raw("image/jpeg")) {
    bytes.assign(body.begin(), body.end());
  } else {
    const json doc = parse_object(body, false);
    const auto it = doc.find("image");
    if (it == doc.end() || !it->is_string()) throw ApiError{400, "image must be a base64 string", {"image"}};
    std::string_view text = it->get_ref<const std::string&>();
    if (text.starts_with("data:")) {
      const auto comma = text.find(',');
      if (comma == std::string_view::npos) throw ApiError{400, "malformed data URL", {"image"}};
      text.remove_prefix(comma + 1);
    }
    auto decoded = decode_base64(text);
    if (!decoded) throw ApiError{400, "image is not valid base64", {"image"}};
    bytes = std::move(*decoded);
  }
  if (bytes.size() > image::kMaxImageBytes) throw ApiError{413, "image exceeds 10 MB", {"image"}};
  if (!looks_like_png(bytes) && !looks_like_jpeg(bytes))
    throw ApiError{415, "image must be PNG or JPEG", {"image"}};
  return bytes;
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  if (const auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
  while (!path.empty()) {
    const auto slash = path.find('/');
    const std::string_view head = path.substr(0, slash);
    if (!head.empty()) parts.push_back(head);
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
  }
  return parts;
}

}  // namespace

std::optional<std::vector<std::uint8_t>> decode_base64(std::string_view text) {
  const auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  std::uint32_t acc = 0;
  int bits = 0;
  bool padding = false;
  for (const char c : text) {
    if (c == ' ' || c == '\n' || c == '\r' || c == '\t') continue;
    if (c == '=') {
      padding = true;
      continue;
    }
    const int v = value(c);
    if (v < 0 || padding) return std::nullopt;
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>(acc >> bits));
      acc &= (1u << bits) - 1;
    }
  }
  if (bits >= 6) return std::nullopt;  // a lone trailing sextet
  return out;
}

ScreeningService::ScreeningService(std::shared_ptr<const ModelRegistry> models, ServiceConfig config, Clock clock)
    : models_(std::move(models)),
      config_(std::move(config)),
      sessions_(config_.session_ttl_s * 1000, std::move(clock)) {
  if (!models_) throw std::invalid_argument("screening service needs a model registry");
  config_.validate();
}

HttpResponse ScreeningService::handle(std::string_view method, std::string_view path, std::string_view body,
                                      std::string_view content_type) {
  const auto parts = split_path(path);
  const auto not_found = [&] { return error_response({404, "no route for " + std::string(path), {}}); };
  const auto wrong_method = [&] { return error_response({405, "method " + std::string(method) + " not allowed", {}}); };
  const bool get = method == "GET", post = method == "POST";
  try {
    if (parts.size() < 2 || parts[0] != "api") return not_found();
    if (parts.size() == 2 && parts[1] == "healthz") return get ? healthz() : wrong_method();
    if (parts[1] != "sessions") return not_found();
    if (parts.size() == 2) return post ? create_session(body) : wrong_method();
    const std::string id(parts[2]);
    if (parts.size() == 3) return get ? get_session(id) : wrong_method();
    if (parts.size() != 4) return not_found();
    const std::string_view action = parts[3];
    if (action == "decision") return get ? get_decision(id) : wrong_method();
    if (!post) return (action == "events" || action == "health" || action == "face") ? wrong_method() : not_found();
    if (action == "events") return post_event(id, body);
    if (action == "health") return post_health(id, body);
    if (action == "face") return post_face(id, body, content_type);
    return not_found();
  } catch (const ApiError& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return error_response({500, std::string("internal error: ") + e.what(), {}});
  }
}

namespace {

std::shared_ptr<SessionEntry> require_session(SessionStore& store, const std::string& id) {
  auto entry = store.find(id);
  if (!entry) throw ApiError{404, "unknown or expired session", {}};
  return entry;
}

}  // namespace

HttpResponse ScreeningService::create_session(std::string_view body) {
  const json doc = parse_object(body, true);
  int level = 1;
  if (const auto it = doc.find("level"); it != doc.end()) {
    if (!it->is_number_integer() || (*it != 1 && *it != 2)) throw ApiError{400, "level must be 1 or 2", {"level"}};
    level = it->get<int>();
  }
  auto [id, entry] = sessions_.create(config_.game, level);
  std::lock_guard lock(entry->mutex);
  return respond(201, {{"session_id", id}, {"view", view_json(entry->game)}});
}

HttpResponse ScreeningService::get_session(const std::string& id) {
  auto entry = require_session(sessions_, id);
  std::lock_guard lock(entry->mutex);
  sync_clock(entry->game, sessions_.now());
  return respond(200, {{"session_id", id}, {"view", view_json(entry->game)}});
}

HttpResponse ScreeningService::post_event(const std::string& id, std::string_view body) {
  const json doc = parse_object(body, false);
  const auto kind = doc.find("kind");
  if (kind == doc.end() || !kind->is_string() || (*kind != "flip" && *kind != "tick"))
    throw ApiError{400, "kind must be \"flip\" or \"tick\"", {"kind"}};
  const bool flip = *kind == "flip";
  std::size_t card_index = 0;
  if (flip) {
    const auto idx = doc.find("card_index");
    if (idx == doc.end() || !idx->is_number_unsigned())
      throw ApiError{400, "card_index must be a non-negative integer", {"card_index"}};
    card_index = idx->get<std::size_t>();
  }

  auto entry = require_session(sessions_, id);
  std::lock_guard lock(entry->mutex);
  game::GameSession& s = entry->game;
  if (game::is_terminal(s.phase))
    throw ApiError{409, "session is " + std::string(game::to_string(s.phase)) + " and accepts no events", {}};

  std::vector<game::Transition> transitions;
  sync_clock(s, sessions_.now(), &transitions);
  json out{{"accepted", true}};
  if (flip) {
    if (s.phase != game::Phase::Playing)
      throw ApiError{409, "flip is accepted only in phase Playing; session is in " + std::string(game::to_string(s.phase)), {}};
    game::ApplyResult r;
    try {
      r = game::apply_event(s, game::GameEvent::flip(card_index));
    } catch (const game::EventConflict& e) {
      throw ApiError{409, e.what(), {"card_index"}};
    }
    transitions.insert(transitions.end(), r.transitions.begin(), r.transitions.end());
    out["accepted"] = r.accepted;
    if (!r.accepted) out["rejection"] = r.rejection;
  }
  json list = json::array();
  for (const auto& t : transitions) list.push_back(transition_json(t));
  out["transition"] = transitions.empty() ? json(nullptr) : transition_json(transitions.back());
  out["transitions"] = std::move(list);
  out["view"] = view_json(s);
  return respond(200, out);
}

HttpResponse ScreeningService::post_health(const std::string& id, std::string_view body) {
  auto entry = require_session(sessions_, id);
  std::lock_guard lock(entry->mutex);
  game::GameSession& s = entry->game;
  sync_clock(s, sessions_.now());

  const json doc = parse_object(body, false);
  if (entry->health_request && s.health) {
    // A retried submission gets the recorded answer.
    if (parse_health(doc) == *entry->health_request) {
      json out = prediction_json(*s.health, models::Architecture::Mod1D);
      out["view"] = view_json(s);
      return respond(200, out);
    }
    throw ApiError{409, "health metrics were already submitted for this session", {}};
  }
  require_phase(s, game::Phase::AwaitingHealthInput, "health input");
  const health::HealthRecord record = parse_health(doc);
  const models::PredictionResult p = models_->predict_health(record);
  const game::Verdict verdict{p.score, p.label == models::PredictedLabel::Demented ? 1 : 0};
  game::apply_event(s, game::GameEvent::health(verdict));
  entry->health_request = record;

  const auto c = health::categorize(record);
  json out = prediction_json(verdict, models::Architecture::Mod1D);
  out["categorized"] = {{"age", c.age},         {"blood_oxygen", c.blood_oxygen}, {"heart_rate", c.heart_rate},
                        {"body_temp", c.body_temp}, {"weight", c.weight},          {"diabetic", c.diabetic}};
  out["view"] = view_json(s);
  return respond(200, out);
}

HttpResponse ScreeningService::post_face(const std::string& id, std::string_view body, std::string_view content_type) {
  auto entry = require_session(sessions_, id);
  std::lock_guard lock(entry->mutex);
  game::GameSession& s = entry->game;
  sync_clock(s, sessions_.now());

  const std::vector<std::uint8_t> bytes = extract_image(body, content_type);
  const std::pair<std::size_t, std::size_t> digest{
      bytes.size(), std::hash<std::string_view>{}({reinterpret_cast<const char*>(bytes.data()), bytes.size()})};
  if (entry->face_request && s.face) {
    if (digest == *entry->face_request) {
      json out = prediction_json(*s.face, models::Architecture::Mod2D);
      out["view"] = view_json(s);
      return respond(200, out);
    }
    throw ApiError{409, "a face image was already submitted for this session", {}};
  }
  require_phase(s, game::Phase::AwaitingFaceCapture, "face capture");
  models::PredictionResult p;
  try {
    p = models_->predict_face(bytes);
  } catch (const image::ImageDecodeError& e) {
    throw ApiError{400, e.what(), {"image"}};
  }
  const game::Verdict verdict{p.score, p.label == models::PredictedLabel::Demented ? 1 : 0};
  game::apply_event(s, game::GameEvent::face(verdict));
  entry->face_request = digest;

  json out = prediction_json(verdict, models::Architecture::Mod2D);
  out["view"] = view_json(s);
  return respond(200, out);
}

HttpResponse ScreeningService::get_decision(const std::string& id) {
  auto entry = require_session(sessions_, id);
  std::lock_guard lock(entry->mutex);
  game::GameSession& s = entry->game;
  sync_clock(s, sessions_.now());
  ScreeningDecision d;
  try {
    d = decision_flow(s);
  } catch (const DecisionNotReady& e) {
    throw ApiError{404, e.what(), {}};
  } catch (const DecisionUnavailable& e) {
    throw ApiError{409, e.what(), {}};
  }
  json out{{"kind", to_string(d.kind)}, {"basis", d.basis}, {"message", d.message}};
  out["outcome"] = d.outcome ? json(fusion::to_string(*d.outcome)) : json(nullptr);
  out["weighted_score"] = d.weighted_score ? json(*d.weighted_score) : json(nullptr);
  out["health"] = s.health ? prediction_json(*s.health, models::Architecture::Mod1D) : json(nullptr);
  out["face"] = s.face ? prediction_json(*s.face, models::Architecture::Mod2D) : json(nullptr);
  out["view"] = view_json(s);
  return respond(200, out);
}

HttpResponse ScreeningService::healthz() {
  const auto info = [](const ModelInfo& m) {
    return json{{"architecture", models::to_string(m.architecture)}, {"params", m.params}, {"crc32", hex32(m.checksum)}};
  };
  return respond(200, {{"status", "ok"},
                       {"version", DEMENTIA_VERSION},
                       {"compiler", __VERSION__},
                       {"models", {{"mod1d", info(models_->health_info())}, {"mod2d", info(models_->face_info())}}},
                       {"sessions", sessions_.size()}});
}

}  // namespace dementia::service
