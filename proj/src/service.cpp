#include "darkroom/service.hpp"

#include "darkroom/gbuf_io.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <mutex>

namespace darkroom {

namespace fs = std::filesystem;

namespace {

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double parse_number(const std::string& text, const std::string& what) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw Error(ErrorCode::Parse, "'" + text + "' is not a number (" + what + ")", {{"value", text}});
  }
  return value;
}

Rgba8Image to_rgba8(const RgbaImage& image) {
  Rgba8Image out{image.width, image.height, {}};
  out.pixels.resize(image.pixels.size() * 4);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const auto& p = image.pixels[i];
    out.pixels[4 * i + 0] = to_unorm8(p.r);
    out.pixels[4 * i + 1] = to_unorm8(p.g);
    out.pixels[4 * i + 2] = to_unorm8(p.b);
    out.pixels[4 * i + 3] = to_unorm8(p.a);
  }
  return out;
}

bool valid_id(const std::string& id) {
  return !id.empty() && id != "." && id != ".." && id.find('/') == std::string::npos &&
         id.find('\\') == std::string::npos;
}

HttpResponse json_response(int status, const nlohmann::json& body) {
  HttpResponse r;
  r.status = status;
  r.body = body.dump();
  return r;
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Schema:
    case ErrorCode::Cycle:
    case ErrorCode::TypeMismatch:
    case ErrorCode::OutOfRange:
    case ErrorCode::UnknownFilter:
    case ErrorCode::Parse:
    case ErrorCode::InvalidArgument:
      return 400;
    case ErrorCode::NotFound:
    case ErrorCode::Lookup:
      return 404;
    case ErrorCode::UnconnectedInput:
    case ErrorCode::MissingChannel:
      return 422;
    default:
      return 500;
  }
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse:
    case ErrorCode::Lookup:
    case ErrorCode::InvalidArgument:
    case ErrorCode::NotFound:
      return 2;
    case ErrorCode::Schema:
    case ErrorCode::UnknownFilter:
    case ErrorCode::TypeMismatch:
    case ErrorCode::Cycle:
    case ErrorCode::UnconnectedInput:
    case ErrorCode::OutOfRange:
    case ErrorCode::MissingChannel:
      return 3;
    case ErrorCode::Io:
    case ErrorCode::CorruptPayload:
    case ErrorCode::VersionMismatch:
    case ErrorCode::DanglingReference:
      return 4;
  }
  return 1;
}

std::vector<std::pair<std::string, double>> parse_selector(const std::string& text) {
  std::vector<std::pair<std::string, double>> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::Parse, "selector item '" + item + "' is not axis=value", {{"value", item}});
    }
    out.emplace_back(item.substr(0, eq), parse_number(item.substr(eq + 1), item.substr(0, eq)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::size_t select_row(const CinemaDatabase& db, const std::vector<std::pair<std::string, double>>& select) {
  Predicate predicate;
  for (const auto& [axis, value] : select) predicate[axis] = value;
  const auto rows = query(db, predicate);
  if (rows.empty()) {
    nlohmann::json sel = nlohmann::json::object();
    for (const auto& [axis, value] : select) sel[axis] = value;
    throw Error(ErrorCode::NotFound, "no sample matches " + sel.dump(), {{"select", sel}});
  }
  return rows.front();
}

ExecuteRequest parse_execute_request(const nlohmann::json& body) {
  auto fail = [](const std::string& path, const std::string& message) {
    return Error(ErrorCode::Schema, path + ": " + message, {{"path", path}});
  };
  if (!body.is_object()) throw fail("", "request must be an object");
  ExecuteRequest r;
  if (!body.contains("database") || !body["database"].is_string()) throw fail("/database", "expected a string");
  r.database = body["database"].get<std::string>();
  if (body.contains("select")) {
    if (!body["select"].is_object()) throw fail("/select", "expected an object");
    for (const auto& [axis, value] : body["select"].items()) {
      if (value.is_number()) {
        r.select.emplace_back(axis, value.get<double>());
      } else if (value.is_string()) {
        r.select.emplace_back(axis, parse_number(value.get<std::string>(), axis));
      } else {
        throw fail("/select/" + axis, "expected a number");
      }
    }
  }
  if (!body.contains("pipeline")) throw fail("/pipeline", "missing");
  r.pipeline = body["pipeline"];
  if (!body.contains("sink")) throw fail("/sink", "missing");
  const auto& sink = body["sink"];
  if (sink.is_string()) {
    r.sink = parse_endpoint(sink.get<std::string>());
  } else if (sink.is_object() && sink.contains("node") && sink["node"].is_string() && sink.contains("port") &&
             sink["port"].is_string()) {
    r.sink = {sink["node"].get<std::string>(), sink["port"].get<std::string>()};
  } else {
    throw fail("/sink", "expected \"node:port\" or {node, port}");
  }
  if (body.contains("format")) {
    if (body["format"] == "png8") {
      r.format = OutputFormat::Png8;
    } else if (body["format"] == "gbuf") {
      r.format = OutputFormat::Gbuf;
    } else {
      throw fail("/format", "expected \"png8\" or \"gbuf\"");
    }
  }
  return r;
}

EncodedOutput encode_value(const Value& value, const Endpoint& sink, OutputFormat format, const Camera& camera) {
  const std::string where = sink.node + ":" + sink.port;
  if (const auto* image = std::get_if<RgbaImage>(&value)) {
    if (format == OutputFormat::Png8) return {"image/png", encode_png(to_rgba8(*image))};
    Plane r(image->width, image->height), g = r, b = r, a = r;
    for (std::size_t i = 0; i < image->pixels.size(); ++i) {
      r.data[i] = image->pixels[i].r;
      g.data[i] = image->pixels[i].g;
      b.data[i] = image->pixels[i].b;
      a.data[i] = image->pixels[i].a;
    }
    GBuffer out(image->width, image->height, camera);
    out.set_channel("color", {r, g, b, a});
    return {"application/octet-stream", encode_gbuf(out)};
  }
  if (const auto* channel = std::get_if<ChannelValue>(&value)) {
    if (format == OutputFormat::Png8) return {"image/png", encode_png(channel_preview(channel->plane))};
    GBuffer out(channel->plane.width, channel->plane.height, channel->camera.value_or(camera));
    out.set_channel(sink.port, {channel->plane});
    return {"application/octet-stream", encode_gbuf(out)};
  }
  if (const auto* gb = std::get_if<std::shared_ptr<const GBuffer>>(&value)) {
    if (format == OutputFormat::Gbuf) return {"application/octet-stream", encode_gbuf(**gb)};
  }
  throw Error(ErrorCode::TypeMismatch,
              "sink " + where + " carries a " + std::string(to_string(type_of(value))) + " which cannot be encoded as " +
                  (format == OutputFormat::Png8 ? "png8" : "gbuf"),
              {{"node", sink.node}, {"port", sink.port}, {"type", to_string(type_of(value))}});
}

EncodedOutput run_pipeline(const CinemaDatabase& db, const ExecuteRequest& request, const FilterRegistry& registry,
                           Exec exec) {
  PipelineGraph graph = PipelineGraph::from_json(request.pipeline, registry);
  const std::size_t row = select_row(db, request.select);
  auto gbuffer = std::make_shared<const GBuffer>(load_gbuffer(db, row));
  ExecutionContext ctx{{gbuffer}, exec};
  const ValuePtr value = graph.execute(request.sink, ctx);
  return encode_value(*value, request.sink, request.format, gbuffer->camera());
}

HttpResponse error_response(const Error& error) { return json_response(http_status(error.code()), error.to_json()); }

Service::Service(fs::path root, const FilterRegistry& registry) : root_(std::move(root)), registry_(&registry) {
  filters_body_ = registry_->to_json().dump();
  filters_etag_ = "\"" + fnv1a_hex(filters_body_) + "\"";
}

HttpResponse Service::filters(const std::string& if_none_match) const {
  HttpResponse r;
  r.headers["ETag"] = filters_etag_;
  if (if_none_match == filters_etag_) {
    r.status = 304;
    return r;
  }
  r.body = filters_body_;
  return r;
}

HttpResponse Service::databases() const {
  std::vector<std::string> ids;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_, ec)) {
    if (entry.is_directory() && fs::exists(entry.path() / kIndexFile)) ids.push_back(entry.path().filename().string());
  }
  if (ec) return error_response(Error(ErrorCode::Io, "cannot list " + root_.string() + ": " + ec.message()));
  std::sort(ids.begin(), ids.end());
  return json_response(200, ids);
}

CinemaDatabase Service::open(const std::string& id) const {
  if (!valid_id(id) || !fs::exists(root_ / id / kIndexFile)) {
    throw Error(ErrorCode::NotFound, "no database '" + id + "'", {{"database", id}});
  }
  return read_database(root_ / id);
}

HttpResponse Service::database_index(const std::string& id) const {
  try {
    const CinemaDatabase db = open(id);
    nlohmann::ordered_json values = nlohmann::ordered_json::object();
    for (const auto& axis : db.axes) values[axis] = db.distinct_values(axis);
    nlohmann::ordered_json body{{"id", id}, {"axes", db.axes}, {"values", values}, {"rows", db.rows.size()}};
    HttpResponse r;
    r.body = body.dump();
    return r;
  } catch (const Error& e) {
    return error_response(e);
  }
}

HttpResponse Service::preview(const std::string& id, const std::multimap<std::string, std::string>& query) const {
  try {
    const CinemaDatabase db = open(id);
    std::string channel = "depth";
    std::optional<double> lo, hi;
    std::vector<std::pair<std::string, double>> select;
    for (const auto& [key, value] : query) {
      if (key == "channel") {
        channel = value;
      } else if (key == "lo") {
        lo = parse_number(value, key);
      } else if (key == "hi") {
        hi = parse_number(value, key);
      } else {
        select.emplace_back(key, parse_number(value, key));
      }
    }
    if (lo.has_value() != hi.has_value()) {
      throw Error(ErrorCode::InvalidArgument, "lo and hi must be given together");
    }
    std::optional<ValueRange> range;
    if (lo) range = ValueRange{*lo, *hi};
    const GBuffer gb = load_gbuffer(db, select_row(db, select));
    if (!gb.has(channel)) {
      throw Error(ErrorCode::MissingChannel, "no channel '" + channel + "'", {{"channel", channel}});
    }
    const auto png = export_png_preview(gb, channel, range);
    HttpResponse r;
    r.content_type = "image/png";
    r.body.assign(png.begin(), png.end());
    return r;
  } catch (const Error& e) {
    return error_response(e);
  }
}

HttpResponse Service::execute(const std::string& body) const {
  try {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::Schema, std::string("request is not valid JSON: ") + e.what(), {{"path", ""}});
    }
    const ExecuteRequest request = parse_execute_request(doc);
    // Validate the pipeline before touching the database so graph errors
    // win over sample lookups.
    PipelineGraph::from_json(request.pipeline, *registry_);
    const CinemaDatabase db = open(request.database);
    const EncodedOutput out = run_pipeline(db, request, *registry_);
    HttpResponse r;
    r.content_type = out.content_type;
    r.body.assign(out.bytes.begin(), out.bytes.end());
    return r;
  } catch (const Error& e) {
    return error_response(e);
  }
}

struct HttpServer::Impl {
  const Service& service;
  httplib::Server server;
  std::mutex log_mutex;

  explicit Impl(const Service& s) : service(s) {}

  static void apply(const HttpResponse& from, httplib::Response& to) {
    to.status = from.status;
    for (const auto& [k, v] : from.headers) to.set_header(k, v);
    if (from.status != 304) to.set_content(from.body, from.content_type);
  }
};

HttpServer::HttpServer(const Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto& s = impl_->server;
  Impl* impl = impl_.get();
  // The library default adds SO_REUSEPORT, which would let a second server
  // share a port that is already being served.
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  s.Get("/api/filters", [impl](const httplib::Request& req, httplib::Response& res) {
    Impl::apply(impl->service.filters(req.get_header_value("If-None-Match")), res);
  });
  s.Get("/api/databases", [impl](const httplib::Request&, httplib::Response& res) {
    Impl::apply(impl->service.databases(), res);
  });
  s.Get(R"(/api/databases/([^/]+)/index)", [impl](const httplib::Request& req, httplib::Response& res) {
    Impl::apply(impl->service.database_index(req.matches[1]), res);
  });
  s.Get(R"(/api/databases/([^/]+)/preview)", [impl](const httplib::Request& req, httplib::Response& res) {
    std::multimap<std::string, std::string> query(req.params.begin(), req.params.end());
    Impl::apply(impl->service.preview(req.matches[1], query), res);
  });
  s.Post("/api/execute", [impl](const httplib::Request& req, httplib::Response& res) {
    Impl::apply(impl->service.execute(req.body), res);
  });
  s.set_logger([impl](const httplib::Request& req, const httplib::Response& res) {
    std::lock_guard lock(impl->log_mutex);
    std::fprintf(stderr, "%s %s -> %d\n", req.method.c_str(), req.path.c_str(), res.status);
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& s = impl_->server;
  if (port == 0) {
    const int bound = s.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host + " to a free port");
    return bound;
  }
  if (!s.bind_to_port(host, port)) {
    throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port) + " (address in use?)",
                {{"host", host}, {"port", port}});
  }
  return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace darkroom
