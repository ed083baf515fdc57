#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "dementia/service/api.hpp"

namespace dementia::service {

/// HTTP front end for a ScreeningService. Requests on different sessions
/// run concurrently on the server's worker pool.
class HttpServer {
 public:
  explicit HttpServer(ScreeningService& service, std::filesystem::path static_dir = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds (port 0 picks a free port), serves on a background thread and
  /// returns the bound port.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dementia::service
