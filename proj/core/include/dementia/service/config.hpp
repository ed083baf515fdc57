#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "dementia/game/engine.hpp"

namespace dementia::service {

/// Runtime settings. Durations in the config file are seconds.
///
/// Recognized keys: port, host, weights_1d, weights_2d, static_dir,
/// session_ttl_s, submission_timeout_s and, for N in {1, 2},
/// levelN.click_threshold, levelN.countdown_s, levelN.show_s, levelN.rows,
/// levelN.cols, levelN.swap_interval_s.
struct ServiceConfig {
  std::string host = "0.0.0.0";
  std::uint16_t port = 8080;
  std::filesystem::path weights_1d;
  std::filesystem::path weights_2d;
  std::filesystem::path static_dir;  // optional game-ui bundle
  std::int64_t session_ttl_s = 30 * 60;
  game::GameConfig game;

  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `key = value` lines; `#` starts a comment. Unknown keys and malformed
/// values throw ConfigError naming the line.
ServiceConfig parse_config(std::istream& in, ServiceConfig base = {});
ServiceConfig load_config_file(const std::filesystem::path& path, ServiceConfig base = {});

}  // namespace dementia::service
