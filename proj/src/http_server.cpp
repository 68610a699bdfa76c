#include "openeye/http_server.hpp"

#include <httplib.h>

namespace openeye::service {

struct HttpServer::Impl {
  StudyService& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(StudyService& s) : service(s) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
      HttpRequest request{req.method, req.path, req.body, req.get_header_value("Authorization")};
      const HttpResponse response = service.handle(request);
      res.status = response.status;
      if (response.status != 204) res.set_content(response.body, response.content_type);
    };
    const std::string any = R"(/.*)";
    server.Get(any, route);
    server.Post(any, route);
    server.Put(any, route);
    server.Delete(any, route);
  }
};

HttpServer::HttpServer(StudyService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) return -1;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace openeye::service
