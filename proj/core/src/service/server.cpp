#include "dementia/service/server.hpp"

#include <thread>

#include "httplib.h"

namespace dementia::service {

namespace {

// A base64 face image of the largest accepted size, plus JSON framing.
constexpr std::size_t kMaxRequestBytes = 16u * 1024u * 1024u;

}  // namespace

struct HttpServer::Impl {
  ScreeningService& service;
  httplib::Server server;
  std::thread worker;

  explicit Impl(ScreeningService& s) : service(s) {}
};

HttpServer::HttpServer(ScreeningService& service, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  srv.set_payload_max_length(kMaxRequestBytes);
  if (!static_dir.empty() && !srv.set_mount_point("/", static_dir.string()))
    throw std::invalid_argument("static directory not found: " + static_dir.string());

  const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse out =
        impl_->service.handle(req.method, req.path, req.body, req.get_header_value("Content-Type"));
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  srv.Get(R"(/api/.*)", forward);
  srv.Post(R"(/api/.*)", forward);
  srv.Put(R"(/api/.*)", forward);
  srv.Delete(R"(/api/.*)", forward);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  auto& srv = impl_->server;
  const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->worker = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  return bound;
}

void HttpServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw std::runtime_error("cannot serve on " + host + ":" + std::to_string(port));
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace dementia::service
