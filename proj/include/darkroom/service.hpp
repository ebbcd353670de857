#pragma once

#include "darkroom/cinema_db.hpp"
#include "darkroom/error.hpp"
#include "darkroom/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace darkroom {

int http_status(ErrorCode code);
// 2 input/parse, 3 pipeline validation, 4 IO.
int exit_code(ErrorCode code);

enum class OutputFormat { Png8, Gbuf };

struct ExecuteRequest {
  std::string database;
  std::vector<std::pair<std::string, double>> select;
  nlohmann::json pipeline;
  Endpoint sink;
  OutputFormat format = OutputFormat::Png8;
};

// Throws Error(Schema) with a JSON pointer for malformed requests.
ExecuteRequest parse_execute_request(const nlohmann::json& body);

// "phi=0,theta=45". Throws Error(Parse).
std::vector<std::pair<std::string, double>> parse_selector(const std::string& text);

// First row whose axes equal every selected value. Throws Error(Lookup) for
// an unknown axis and Error(NotFound) when nothing matches.
std::size_t select_row(const CinemaDatabase& db, const std::vector<std::pair<std::string, double>>& select);

struct EncodedOutput {
  std::string content_type;
  std::vector<std::uint8_t> bytes;
};

// Images become 8-bit RGBA PNGs; channels become the auto-ranged grayscale
// preview (identical to export_png_preview). With Gbuf the value is written
// as a one-channel .gbuf carrying `camera`.
EncodedOutput encode_value(const Value& value, const Endpoint& sink, OutputFormat format, const Camera& camera);

// The whole shade path shared by the CLI and the service: load the selected
// row, build the graph, execute the sink, encode.
EncodedOutput run_pipeline(const CinemaDatabase& db, const ExecuteRequest& request,
                           const FilterRegistry& registry = default_registry(), Exec exec = Exec::Parallel);

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

// Request handlers, independent of the HTTP transport. Databases are the
// subdirectories of `root` holding a data.csv; they are opened read-only per
// request, so handlers may run concurrently.
class Service {
 public:
  explicit Service(std::filesystem::path root, const FilterRegistry& registry = default_registry());

  HttpResponse filters(const std::string& if_none_match = {}) const;
  HttpResponse databases() const;
  HttpResponse database_index(const std::string& id) const;
  // Query: channel (default depth), optional lo/hi, and axis=value selectors.
  HttpResponse preview(const std::string& id, const std::multimap<std::string, std::string>& query) const;
  HttpResponse execute(const std::string& body) const;

  const std::filesystem::path& root() const { return root_; }

 private:
  CinemaDatabase open(const std::string& id) const;

  std::filesystem::path root_;
  const FilterRegistry* registry_;
  std::string filters_body_;
  std::string filters_etag_;
};

HttpResponse error_response(const Error& error);

// Thin cpp-httplib wrapper around Service.
class HttpServer {
 public:
  explicit HttpServer(const Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds without serving; port 0 picks a free port. Returns the bound port.
  // Throws Error(Io) when the address is taken.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace darkroom
