#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "phonosearch/database.hpp"
#include "phonosearch/query.hpp"

namespace phonosearch::service {

struct ApiConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8080;
  std::filesystem::path data_dir = "data";
  // Mutations need "Authorization: Bearer <token>" when set.
  std::optional<std::string> api_token;
  bool search_requires_token = false;
  std::size_t default_limit = kDefaultResultLimit;
  // Static files served at "/". Nothing is served there when unset.
  std::optional<std::filesystem::path> web_root;
};

// Reads BIND_ADDR (host:port), DATA_DIR, API_TOKEN and DEFAULT_LIMIT on top
// of `base`. `getenv` is injectable for tests. Throws ConfigError.
ApiConfig config_from_env(ApiConfig base, const std::function<const char*(const char*)>& getenv = nullptr);

// "host:port", "host" or ":port". Throws ConfigError.
void parse_bind_address(std::string_view text, ApiConfig& config);

// Creates the directory if needed and checks it is writable. Throws ConfigError.
void prepare_data_dir(const std::filesystem::path& dir);

enum class ErrorKind { kValidation, kNotFound, kAuth, kStorage, kInternal };

std::string_view to_string(ErrorKind kind);

struct ApiError {
  int status = 500;
  ErrorKind kind = ErrorKind::kInternal;
  std::string message;
  // Finer grained cause, e.g. "no_searchable_terms". Empty when none.
  std::string reason;
};

// Transport-free request and response, so the routing can be driven
// without sockets.
struct ApiRequest {
  std::string method;
  std::string path;  // already percent-decoded
  std::map<std::string, std::string> params;
  std::string authorization;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON, empty for 204
  std::map<std::string, std::string> headers;
};

class Api {
 public:
  Api(SearchDatabase& db, ApiConfig config);

  ApiResponse handle(const ApiRequest& request) const;

  const ApiConfig& config() const noexcept { return config_; }

 private:
  ApiResponse route(const ApiRequest& request) const;
  ApiResponse list_tables() const;
  ApiResponse insert(const TableInfo& table, const ApiRequest& request) const;
  ApiResponse get(const TableInfo& table, std::uint64_t p_value) const;
  ApiResponse update(const TableInfo& table, std::uint64_t p_value, const ApiRequest& request) const;
  ApiResponse remove(const TableInfo& table, std::uint64_t p_value, const ApiRequest& request) const;
  ApiResponse search(const ApiRequest& request) const;
  void authorize(const ApiRequest& request) const;

  SearchDatabase& db_;
  ApiConfig config_;
};

// Database config matching an ApiConfig: durable, citizen table only.
DatabaseConfig database_config(const ApiConfig& config);

// cpp-httplib front end. One thread pool; searches run concurrently, the
// database serializes mutations.
class Server {
 public:
  explicit Server(const Api& api);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds to the configured address; port 0 picks a free one. Returns the
  // bound port. Throws ConfigError when binding fails.
  int bind();
  // Blocks until stop().
  void run();
  void stop();

  // Called once per request with "METHOD path status".
  void set_logger(std::function<void(const std::string&)> logger);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace phonosearch::service
