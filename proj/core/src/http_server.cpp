#include <httplib.h>

#include "wxrec/error.hpp"
#include "wxrec/service.hpp"

namespace wxrec::service {

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) {}

  void dispatch(const httplib::Request& req, httplib::Response& res) {
    ApiRequest api;
    api.method = req.method;
    api.path = req.path;
    // Repeated keys: the first value wins; anything unknown is ignored later.
    for (const auto& [k, v] : req.params) api.query.emplace(k, v);
    api.body = req.body;
    const ApiResponse out = service.handle(api);
    res.status = out.status;
    res.set_header("X-Snapshot-Version", std::to_string(out.snapshot_version));
    if (out.status != 204) res.set_content(out.body, out.content_type);
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    impl_->dispatch(req, res);
  };
  for (const char* path : {"/healthz", "/v1/forecast", "/v1/route", "/v1/recommendations",
                           "/v1/grid", "/v1/clusters", "/v1/interactions"}) {
    impl_->server.Get(path, handler);
    impl_->server.Post(path, handler);
  }
  const auto& ui = service.config().ui_dir;
  if (!ui.empty()) impl_->server.set_mount_point("/ui", ui.string());
  impl_->server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) {
      res.set_content(error_json("not_found", "no such endpoint: " + req.path), "application/json");
    }
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(Errc::bad_config, "cannot listen on " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace wxrec::service
