#include <httplib.h>

#include "climatekb/service.hpp"
#include "climatekb/text.hpp"

namespace climatekb {

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) {
    auto dispatch = [this](const httplib::Request& in, httplib::Response& out) {
      HttpRequest req;
      req.method = in.method;
      req.path = in.path;
      for (const auto& [k, v] : in.params) req.query.emplace(k, v);
      for (const auto& [k, v] : in.headers) req.headers.emplace(text::to_lower(k), v);
      req.body = in.body;
      HttpResponse resp = service.handle(req);
      out.status = resp.status;
      for (const auto& [k, v] : resp.headers) out.set_header(k, v);
      if (!resp.content_type.empty()) out.set_content(resp.body, resp.content_type.c_str());
    };
    server.Get(".*", dispatch);
    server.Post(".*", dispatch);
    server.Put(".*", dispatch);
    server.Delete(".*", dispatch);
    server.Options(".*", dispatch);
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    int bound = impl_->server.bind_to_any_port(host.c_str());
    if (bound < 0) throw IoError("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host.c_str(), port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace climatekb
