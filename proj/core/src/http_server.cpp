#include <httplib.h>

#include <atomic>

#include "facelve/service.hpp"

namespace facelve {

struct HttpServer::Impl {
  CompositeService& service;
  httplib::Server server;

  explicit Impl(CompositeService& s) : service(s) {
    auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
      HttpRequest request{req.method, req.path, req.body, {}};
      for (const auto& [name, value] : req.headers) request.headers.emplace(name, value);
      const HttpResponse response = service.handle(request);
      res.status = response.status;
      res.set_content(response.body, response.content_type);
    };
    server.Get(R"(/.*)", dispatch);
    server.Post(R"(/.*)", dispatch);
  }
};

HttpServer::HttpServer(CompositeService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int HttpServer::bind_any_port(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool HttpServer::serve() { return impl_->server.listen_after_bind(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace facelve
