#include <httplib.h>

#include "phonosearch/errors.hpp"
#include "phonosearch/service.hpp"

namespace phonosearch::service {

namespace {

constexpr std::size_t kMaxBodyBytes = 1 << 20;

}  // namespace

struct Server::Impl {
  explicit Impl(const Api& a) : api(a) {}

  const Api& api;
  httplib::Server http;
  std::function<void(const std::string&)> logger;
};

Server::Server(const Api& api) : impl_(std::make_unique<Impl>(api)) {
  auto& http = impl_->http;
  http.set_payload_max_length(kMaxBodyBytes);

  const auto& config = api.config();
  if (config.web_root && !http.set_mount_point("/", config.web_root->string())) {
    throw ConfigError("web root " + config.web_root->string() + " is not a directory");
  }

  // Static files are matched before these handlers, so anything not found
  // on disk falls through to the API and gets a JSON 404.
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest request;
    request.method = req.method;
    request.path = req.path;
    for (const auto& [key, value] : req.params) request.params.emplace(key, value);
    request.authorization = req.get_header_value("Authorization");
    request.body = req.body;

    const auto response = impl_->api.handle(request);
    res.status = response.status;
    for (const auto& [name, value] : response.headers) {
      if (name != "Content-Type") res.set_header(name, value);
    }
    if (!response.body.empty()) {
      const auto type = response.headers.find("Content-Type");
      res.set_content(response.body, type == response.headers.end() ? "application/json" : type->second);
    }
  };
  http.Get(".*", dispatch);
  http.Post(".*", dispatch);
  http.Put(".*", dispatch);
  http.Delete(".*", dispatch);
  http.Patch(".*", dispatch);

  http.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
    if (impl_->logger) impl_->logger(req.method + " " + req.path + " " + std::to_string(res.status));
  });
}

Server::~Server() { stop(); }

int Server::bind() {
  const auto& config = impl_->api.config();
  if (config.port == 0) {
    const int port = impl_->http.bind_to_any_port(config.host);
    if (port < 0) throw ConfigError("cannot bind " + config.host);
    return port;
  }
  if (!impl_->http.bind_to_port(config.host, config.port)) {
    throw ConfigError("cannot bind " + config.host + ":" + std::to_string(config.port));
  }
  return config.port;
}

void Server::run() { impl_->http.listen_after_bind(); }

void Server::stop() { impl_->http.stop(); }

void Server::set_logger(std::function<void(const std::string&)> logger) { impl_->logger = std::move(logger); }

}  // namespace phonosearch::service
