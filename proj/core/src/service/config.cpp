#include "dementia/service/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>

namespace dementia::service {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename Int>
Int parse_int(std::string_view text, const std::string& where) {
  Int v{};
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size() || text.empty())
    throw ConfigError(where + ": expected an integer, got '" + std::string(text) + "'");
  return v;
}

constexpr game::TimeMs kMsPerSecond = 1000;

void set_level_key(game::LevelConfig& level, std::string_view key, std::string_view value, const std::string& where) {
  if (key == "click_threshold") {
    level.click_threshold = parse_int<std::size_t>(value, where);
  } else if (key == "countdown_s") {
    level.countdown_ms = parse_int<game::TimeMs>(value, where) * kMsPerSecond;
  } else if (key == "show_s") {
    level.show_ms = parse_int<game::TimeMs>(value, where) * kMsPerSecond;
  } else if (key == "rows") {
    level.rows = parse_int<std::size_t>(value, where);
  } else if (key == "cols") {
    level.cols = parse_int<std::size_t>(value, where);
  } else if (key == "swap_interval_s") {
    level.swap_interval_ms = parse_int<game::TimeMs>(value, where) * kMsPerSecond;
  } else {
    throw ConfigError(where + ": unknown key");
  }
}

}  // namespace

void ServiceConfig::validate() const {
  if (session_ttl_s <= 0) throw ConfigError("session_ttl_s must be positive");
  try {
    game.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ServiceConfig parse_config(std::istream& in, ServiceConfig cfg) {
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    const std::string_view key = trim(text.substr(0, eq));
    const std::string_view value = trim(text.substr(eq + 1));
    const std::string where = "line " + std::to_string(number) + " (" + std::string(key) + ")";

    if (key == "port") {
      const int port = parse_int<int>(value, where);
      if (port < 0 || port > std::numeric_limits<std::uint16_t>::max()) throw ConfigError(where + ": port out of range");
      cfg.port = static_cast<std::uint16_t>(port);
    } else if (key == "host") {
      cfg.host = value;
    } else if (key == "weights_1d") {
      cfg.weights_1d = std::string(value);
    } else if (key == "weights_2d") {
      cfg.weights_2d = std::string(value);
    } else if (key == "static_dir") {
      cfg.static_dir = std::string(value);
    } else if (key == "session_ttl_s") {
      cfg.session_ttl_s = parse_int<std::int64_t>(value, where);
    } else if (key == "submission_timeout_s") {
      cfg.game.submission_timeout_ms = parse_int<game::TimeMs>(value, where) * kMsPerSecond;
    } else if (key.starts_with("level1.")) {
      set_level_key(cfg.game.level1, key.substr(7), value, where);
    } else if (key.starts_with("level2.")) {
      set_level_key(cfg.game.level2, key.substr(7), value, where);
    } else {
      throw ConfigError(where + ": unknown key");
    }
  }
  cfg.validate();
  return cfg;
}

ServiceConfig load_config_file(const std::filesystem::path& path, ServiceConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, std::move(base));
}

}  // namespace dementia::service
