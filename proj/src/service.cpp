#include "phonosearch/service.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <json.hpp>
#include <system_error>
#include <vector>

#include "phonosearch/errors.hpp"

namespace phonosearch::service {

namespace {

using json = nlohmann::ordered_json;

constexpr std::size_t kMaxLimit = 10000;

ApiError error(int status, ErrorKind kind, std::string message, std::string reason = {}) {
  return ApiError{status, kind, std::move(message), std::move(reason)};
}

ApiResponse json_response(int status, const json& body) {
  ApiResponse response;
  response.status = status;
  response.body = body.dump(-1, ' ', false, json::error_handler_t::replace);
  return response;
}

ApiResponse error_response(const ApiError& e) {
  json body;
  body["kind"] = to_string(e.kind);
  body["message"] = e.message;
  if (!e.reason.empty()) body["reason"] = e.reason;
  auto response = json_response(e.status, body);
  if (e.kind == ErrorKind::kAuth) response.headers["WWW-Authenticate"] = "Bearer";
  return response;
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto end = std::min(path.find('/', start), path.size());
    if (end > start) parts.push_back(path.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

// Digits only, so "-1", "1e3" and " 7" are refused rather than half parsed.
std::optional<std::uint64_t> parse_unsigned(std::string_view text) {
  if (text.empty() || text.size() > 20) return std::nullopt;
  for (char c : text) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  std::uint64_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
  return value;
}

bool same_secret(std::string_view a, std::string_view b) {
  unsigned char diff = a.size() == b.size() ? 0 : 1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff |= static_cast<unsigned char>(a[i] ^ (i < b.size() ? b[i] : 0));
  }
  return diff == 0;
}

json record_object(const TableInfo& table, const std::vector<std::string>& fields) {
  json out = json::object();
  for (std::size_t i = 0; i < table.arity(); ++i) out[table.field_names[i]] = fields[i];
  return out;
}

std::string matched_info(const std::vector<std::string>& fields) {
  std::string out;
  for (const auto& field : fields) {
    if (field.empty()) continue;
    if (!out.empty()) out += ", ";
    out += field;
  }
  return out;
}

// Accepts an array in schema order or an object with exactly the schema's
// field names. Values must be strings.
std::vector<std::string> parse_values(const TableInfo& table, const std::string& body) {
  const json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw error(400, ErrorKind::kValidation, "request body is not valid JSON");
  std::vector<std::string> values;
  if (doc.is_array()) {
    if (doc.size() != table.arity()) {
      throw error(400, ErrorKind::kValidation,
                  "table '" + table.table.name + "' expects " + std::to_string(table.arity()) + " fields, got " +
                      std::to_string(doc.size()));
    }
    for (const auto& v : doc) {
      if (!v.is_string()) throw error(400, ErrorKind::kValidation, "field values must be strings");
      values.push_back(v.get<std::string>());
    }
    return values;
  }
  if (!doc.is_object()) {
    throw error(400, ErrorKind::kValidation, "request body must be a JSON object or array of field values");
  }
  for (const auto& [key, value] : doc.items()) {
    if (std::find(table.field_names.begin(), table.field_names.end(), key) == table.field_names.end()) {
      throw error(400, ErrorKind::kValidation, "unknown field '" + key + "'");
    }
  }
  for (const auto& name : table.field_names) {
    const auto it = doc.find(name);
    if (it == doc.end()) throw error(400, ErrorKind::kValidation, "missing field '" + name + "'");
    if (!it->is_string()) throw error(400, ErrorKind::kValidation, "field '" + name + "' must be a string");
    values.push_back(it->get<std::string>());
  }
  return values;
}

std::size_t parse_limit(std::string_view text, std::string_view what) {
  const auto value = parse_unsigned(text);
  if (!value || *value == 0 || *value > kMaxLimit) {
    throw ConfigError(std::string(what) + " must be an integer from 1 to " + std::to_string(kMaxLimit));
  }
  return *value;
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation:
      return "validation";
    case ErrorKind::kNotFound:
      return "not_found";
    case ErrorKind::kAuth:
      return "auth";
    case ErrorKind::kStorage:
      return "storage";
    case ErrorKind::kInternal:
      break;
  }
  return "internal";
}

void parse_bind_address(std::string_view text, ApiConfig& config) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    if (text.empty()) throw ConfigError("empty bind address");
    config.host = std::string(text);
    return;
  }
  const auto port = parse_unsigned(text.substr(colon + 1));
  if (!port || *port > 65535) throw ConfigError("bad port in bind address '" + std::string(text) + "'");
  if (colon > 0) config.host = std::string(text.substr(0, colon));
  config.port = static_cast<std::uint16_t>(*port);
}

ApiConfig config_from_env(ApiConfig base, const std::function<const char*(const char*)>& getenv) {
  const auto get = [&](const char* name) -> const char* {
    return getenv ? getenv(name) : std::getenv(name);
  };
  if (const char* v = get("BIND_ADDR"); v && *v) parse_bind_address(v, base);
  if (const char* v = get("DATA_DIR"); v && *v) base.data_dir = v;
  if (const char* v = get("API_TOKEN"); v && *v) base.api_token = v;
  if (const char* v = get("DEFAULT_LIMIT"); v && *v) base.default_limit = parse_limit(v, "DEFAULT_LIMIT");
  return base;
}

void prepare_data_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create data directory " + dir.string() + ": " + ec.message());
  if (!std::filesystem::is_directory(dir)) throw ConfigError(dir.string() + " is not a directory");
  if (::access(dir.c_str(), W_OK | X_OK) != 0) throw ConfigError("data directory " + dir.string() + " is not writable");
}

DatabaseConfig database_config(const ApiConfig& config) {
  DatabaseConfig db;
  db.data_dir = config.data_dir;
  return db;
}

Api::Api(SearchDatabase& db, ApiConfig config) : db_(db), config_(std::move(config)) {
  if (config_.default_limit == 0 || config_.default_limit > kMaxLimit) {
    throw ConfigError("default limit must be from 1 to " + std::to_string(kMaxLimit));
  }
}

ApiResponse Api::handle(const ApiRequest& request) const {
  ApiResponse response;
  try {
    response = route(request);
  } catch (const ApiError& e) {
    response = error_response(e);
  } catch (const ValidationError& e) {
    response = error_response(error(400, ErrorKind::kValidation, e.what()));
  } catch (const NotFoundError& e) {
    response = error_response(error(404, ErrorKind::kNotFound, e.what()));
  } catch (const StorageError& e) {
    response = error_response(error(500, ErrorKind::kStorage, e.what()));
  } catch (const std::exception& e) {
    response = error_response(error(500, ErrorKind::kInternal, e.what()));
  }
  if (!response.body.empty()) response.headers["Content-Type"] = "application/json; charset=utf-8";
  return response;
}

ApiResponse Api::route(const ApiRequest& request) const {
  const auto parts = split_path(request.path);
  const auto& method = request.method;
  const auto not_allowed = [&](const char* allow) {
    auto response = error_response(error(405, ErrorKind::kValidation, method + " not allowed on " + request.path));
    response.headers["Allow"] = allow;
    return response;
  };

  if (parts.size() == 1 && parts[0] == "search") {
    if (method != "GET") return not_allowed("GET");
    return search(request);
  }
  if (parts.size() == 1 && parts[0] == "tables") {
    if (method != "GET") return not_allowed("GET");
    return list_tables();
  }
  if ((parts.size() == 3 || parts.size() == 4) && parts[0] == "tables" && parts[2] == "records") {
    const auto table = db_.table(parts[1]);
    if (!table) throw error(404, ErrorKind::kNotFound, "unknown table '" + std::string(parts[1]) + "'");
    if (parts.size() == 3) {
      if (method != "POST") return not_allowed("POST");
      return insert(*table, request);
    }
    if (method != "GET" && method != "PUT" && method != "DELETE") return not_allowed("GET, PUT, DELETE");
    const auto p_value = parse_unsigned(parts[3]);
    if (!p_value) {
      throw error(400, ErrorKind::kValidation, "record id must be a non-negative integer, got '" +
                                                   std::string(parts[3]) + "'");
    }
    if (method == "GET") return get(*table, *p_value);
    if (method == "PUT") return update(*table, *p_value, request);
    return remove(*table, *p_value, request);
  }
  throw error(404, ErrorKind::kNotFound, "no route for " + request.path);
}

void Api::authorize(const ApiRequest& request) const {
  if (!config_.api_token) return;
  constexpr std::string_view kScheme = "Bearer ";
  const std::string_view header = request.authorization;
  if (header.size() <= kScheme.size() || header.substr(0, kScheme.size()) != kScheme ||
      !same_secret(header.substr(kScheme.size()), *config_.api_token)) {
    throw error(401, ErrorKind::kAuth, "missing or invalid bearer token");
  }
}

ApiResponse Api::list_tables() const {
  json out = json::array();
  for (const auto& table : db_.tables()) {
    out.push_back(json{{"table_id", table.table.id},
                       {"name", table.table.name},
                       {"description", table.description},
                       {"fields", table.field_names}});
  }
  return json_response(200, out);
}

ApiResponse Api::insert(const TableInfo& table, const ApiRequest& request) const {
  authorize(request);
  const auto pointer = db_.insert(table.table.id, parse_values(table, request.body));
  auto response = json_response(201, json{{"table_id", pointer.table_id}, {"p_value", pointer.p_value}});
  response.headers["Location"] = "/tables/" + table.table.name + "/records/" + std::to_string(pointer.p_value);
  return response;
}

ApiResponse Api::get(const TableInfo& table, std::uint64_t p_value) const {
  const auto record = db_.retrieve(DataPointer{table.table.id, p_value});
  if (!record) {
    throw error(404, ErrorKind::kNotFound, "no record " + std::to_string(p_value) + " in '" + table.table.name + "'");
  }
  return json_response(200, record_object(table, record->fields));
}

ApiResponse Api::update(const TableInfo& table, std::uint64_t p_value, const ApiRequest& request) const {
  authorize(request);
  auto values = parse_values(table, request.body);
  const auto body = record_object(table, values);
  db_.update(DataPointer{table.table.id, p_value}, std::move(values));
  return json_response(200, body);
}

ApiResponse Api::remove(const TableInfo& table, std::uint64_t p_value, const ApiRequest& request) const {
  authorize(request);
  db_.remove(DataPointer{table.table.id, p_value});
  ApiResponse response;
  response.status = 204;
  return response;
}

ApiResponse Api::search(const ApiRequest& request) const {
  if (config_.search_requires_token) authorize(request);
  const auto param = [&](const char* name) -> const std::string* {
    const auto it = request.params.find(name);
    return it == request.params.end() ? nullptr : &it->second;
  };

  std::size_t limit = config_.default_limit;
  if (const auto* v = param("limit")) {
    const auto parsed = parse_unsigned(*v);
    if (!parsed || *parsed == 0 || *parsed > kMaxLimit) {
      throw error(400, ErrorKind::kValidation, "limit must be an integer from 1 to " + std::to_string(kMaxLimit));
    }
    limit = *parsed;
  }
  int min_score = 0;
  if (const auto* v = param("min_score")) {
    const auto parsed = parse_unsigned(*v);
    if (!parsed || *parsed > 100) throw error(400, ErrorKind::kValidation, "min_score must be an integer from 0 to 100");
    min_score = static_cast<int>(*parsed);
  }

  const auto* q = param("q");
  const auto result = db_.search(Query::parse(q ? *q : std::string(), limit, min_score));
  if (result.no_searchable_terms) {
    throw error(400, ErrorKind::kValidation, "query has no searchable terms", "no_searchable_terms");
  }

  json out = json::array();
  std::size_t serial = 0;
  for (const auto& hit : result.hits) {
    out.push_back(json{{"serial_no", ++serial},
                       {"matched_info", matched_info(hit.matched_record.fields)},
                       {"matched_percent", hit.score_percent},
                       {"pointer", {{"table_id", hit.pointer.table_id}, {"p_value", hit.pointer.p_value}}}});
  }
  return json_response(200, out);
}

}  // namespace phonosearch::service
