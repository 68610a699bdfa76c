#pragma once

#include <memory>
#include <string>
#include <thread>

#include "openeye/service.hpp"

namespace openeye::service {

/// Serves a StudyService over HTTP/1.1. Every request is routed through
/// StudyService::handle.
class HttpServer {
 public:
  explicit HttpServer(StudyService& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Returns the bound port.
  int start(const std::string& host, int port);
  /// Blocks serving on the calling thread.
  bool listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace openeye::service
