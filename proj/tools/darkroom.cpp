// darkroom: render Cinema databases, shade them headless, serve them.

#include "darkroom/cinema_db.hpp"
#include "darkroom/error.hpp"
#include "darkroom/gbuf_io.hpp"
#include "darkroom/mesh_io.hpp"
#include "darkroom/primitives.hpp"
#include "darkroom/service.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace darkroom;

namespace {

// Unreadable inputs are input errors (exit 2), like a missing mesh.
std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Parse, "cannot read " + path.string(), {{"path", path.string()}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string(), {{"path", path.string()}});
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "short write to " + path.string(), {{"path", path.string()}});
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot write " + path.string() + ": " + ec.message(), {{"path", path.string()}});
}

std::pair<int, int> parse_resolution(const std::string& text) {
  int w = 0, h = 0;
  char x = 0, extra = 0;
  if (std::sscanf(text.c_str(), "%d%c%d%c", &w, &x, &h, &extra) != 3 || (x != 'x' && x != 'X') || w < 1 || h < 1) {
    throw Error(ErrorCode::Parse, "--resolution expects WxH, got '" + text + "'", {{"value", text}});
  }
  return {w, h};
}

// "fibonacci:N[:radius]" around the mesh, inline JSON, or a JSON file.
SamplingGrid load_grid(const std::string& spec, const TriangleMesh& mesh, std::pair<int, int> resolution) {
  if (spec.rfind("fibonacci:", 0) == 0) {
    std::istringstream in(spec.substr(10));
    std::string n_text, r_text;
    std::getline(in, n_text, ':');
    std::getline(in, r_text);
    char* end = nullptr;
    const long n = std::strtol(n_text.c_str(), &end, 10);
    if (n_text.empty() || *end != '\0' || n < 1) {
      throw Error(ErrorCode::Parse, "--grid fibonacci:N needs a positive N, got '" + spec + "'");
    }
    const Aabb box = bounds(mesh);
    const Vec3 center = box.center();
    double radius = 3.0 * length(box.hi - center);
    if (!r_text.empty()) {
      radius = std::strtod(r_text.c_str(), &end);
      if (*end != '\0' || !(radius > 0.0)) throw Error(ErrorCode::Parse, "--grid radius must be > 0, got '" + r_text + "'");
    }
    return fibonacci_sphere_grid(center, radius, static_cast<int>(n), resolution.first, resolution.second);
  }
  const std::string text = (!spec.empty() && spec.front() == '{') ? spec : read_text(spec);
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Parse, "grid is not valid JSON: " + std::string(e.what()));
  }
  try {
    return grid_from_json(doc);
  } catch (const Error& e) {
    // A bad grid file is an input error, not a pipeline error.
    throw Error(e.code() == ErrorCode::Schema ? ErrorCode::Parse : e.code(), std::string("grid: ") + e.what(),
                e.details());
  }
}

struct RenderArgs {
  std::string mesh;
  std::string fields;
  std::string grid;
  std::string out;
  std::string resolution;
  bool emit_normals = false;
  bool emit_positions = false;
  std::optional<std::uint64_t> seed;
};

int run_render(const RenderArgs& args) {
  TriangleMesh mesh = read_obj(args.mesh);
  if (!args.fields.empty()) read_fields_json(args.fields, mesh);
  mesh.validate();

  std::pair<int, int> resolution{256, 256};
  if (!args.resolution.empty()) resolution = parse_resolution(args.resolution);
  SamplingGrid grid = load_grid(args.grid, mesh, resolution);
  if (!args.resolution.empty()) {
    for (auto& cam : grid.cameras) {
      cam.width = resolution.first;
      cam.height = resolution.second;
    }
  }
  grid.validate();

  std::vector<std::string> fields;
  for (const auto& [name, values] : mesh.scalar_fields) fields.push_back(name);

  const auto build_start = std::chrono::steady_clock::now();
  const Bvh bvh = build_bvh(mesh);
  const double build_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - build_start).count();
  std::printf("mesh %s: %zu vertices, %zu triangles, bvh %zu nodes in %.1f ms\n", args.mesh.c_str(),
              mesh.vertices.size(), mesh.triangles.size(), bvh.nodes.size(), build_ms);

  RenderOptions options;
  options.emit_normal = args.emit_normals;
  options.emit_position = args.emit_positions;
  options.jitter_seed = args.seed;
  // Cameras run in parallel, each one serially over its rows.
  options.exec = Exec::Serial;

  const int n = static_cast<int>(grid.size());
  std::vector<GBuffer> buffers(grid.size());
  std::vector<double> millis(grid.size());
  const auto start = std::chrono::steady_clock::now();
  for_rows(n, Exec::Parallel, [&](int i) {
    const auto t0 = std::chrono::steady_clock::now();
    buffers[i] = render_gbuffer(mesh, bvh, grid.cameras[i], fields, options);
    millis[i] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  });
  const double total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  const CinemaDatabase db = write_database(args.out, grid, buffers);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    const std::uint64_t size = gbuf_size(buffers[i]);
    total += size;
    std::string axes;
    for (std::size_t a = 0; a < db.axes.size(); ++a) {
      axes += (a ? " " : "") + db.axes[a] + "=" + format_axis_value(db.rows[i].values[a]);
    }
    std::printf("camera %3zu  %-28s %8.1f ms  %llu bytes\n", i, axes.c_str(), millis[i],
                static_cast<unsigned long long>(size));
  }
  total += fs::file_size(fs::path(args.out) / kIndexFile);
  std::printf("rendered %zu cameras at %dx%d in %.1f ms (%d threads)\n", buffers.size(), grid.cameras[0].width,
              grid.cameras[0].height, total_ms, thread_count());
  std::printf("database %s: %llu bytes (%.2f MiB)\n", args.out.c_str(), static_cast<unsigned long long>(total),
              static_cast<double>(total) / (1024.0 * 1024.0));
  return 0;
}

struct ShadeArgs {
  std::string db;
  std::string pipeline;
  std::string select;
  std::string sink;
  std::string out;
  std::string format = "png8";
};

int run_shade(const ShadeArgs& args) {
  ExecuteRequest request;
  request.database = args.db;
  request.select = parse_selector(args.select);
  request.sink = parse_endpoint(args.sink);
  request.format = args.format == "gbuf" ? OutputFormat::Gbuf : OutputFormat::Png8;
  const std::string text = read_text(args.pipeline);
  try {
    request.pipeline = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Schema, "pipeline is not valid JSON: " + std::string(e.what()), {{"path", ""}});
  }
  PipelineGraph::from_json(request.pipeline);
  const CinemaDatabase db = read_database(args.db);
  const EncodedOutput out = run_pipeline(db, request);
  write_bytes(args.out, out.bytes);
  std::printf("wrote %s (%zu bytes)\n", args.out.c_str(), out.bytes.size());
  return 0;
}

int run_serve(const std::string& root, const std::string& host, int port) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::NotFound, "database root " + root + " is not a directory", {{"path", root}});
  }
  const Service service(root);
  HttpServer server(service);
  const int bound = server.bind(host, port);
  std::printf("serving %s on http://%s:%d\n", root.c_str(), host.c_str(), bound);
  std::fflush(stdout);
  server.run();
  return 0;
}

struct PrimitiveArgs {
  std::string shape = "torus";
  std::string out;
  std::string fields;
  double major = 1.0;
  double minor = 0.35;
  int major_segments = 64;
  int minor_segments = 32;
  int subdivisions = 4;
};

int run_primitive(const PrimitiveArgs& args) {
  TriangleMesh mesh = args.shape == "torus"
                          ? make_torus(args.major, args.minor, args.major_segments, args.minor_segments)
                          : make_icosphere(args.subdivisions, args.major);
  write_obj(args.out, mesh);
  if (!args.fields.empty()) write_fields_json(args.fields, mesh);
  std::printf("wrote %s: %zu vertices, %zu triangles\n", args.out.c_str(), mesh.vertices.size(),
              mesh.triangles.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"darkroom: deferred rendering and post hoc shading of Cinema image databases"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (overrides DARKROOM_THREADS)")->check(CLI::NonNegativeNumber);

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "render G-buffers for a camera grid into a Cinema database");
  render_cmd->add_option("--mesh", render.mesh, "triangle mesh (OBJ)")->required();
  render_cmd->add_option("--fields", render.fields, "per-vertex scalar fields (JSON sidecar)");
  render_cmd->add_option("--grid", render.grid, "grid JSON file, inline JSON, or fibonacci:N[:radius]")->required();
  render_cmd->add_option("--out", render.out, "database directory (must not exist or be empty)")->required();
  render_cmd->add_option("--resolution", render.resolution, "WxH, default 256x256");
  render_cmd->add_flag("--emit-normals", render.emit_normals, "store the normal channel");
  render_cmd->add_flag("--emit-positions", render.emit_positions, "store the position channel");
  render_cmd->add_option("--seed", render.seed, "jitter primary rays with this seed");

  ShadeArgs shade;
  auto* shade_cmd = app.add_subcommand("shade", "execute a pipeline on one database sample");
  shade_cmd->add_option("--db", shade.db, "database directory")->required();
  shade_cmd->add_option("--pipeline", shade.pipeline, "pipeline JSON file")->required();
  shade_cmd->add_option("--select", shade.select, "axis=value[,axis=value...]; first match is used");
  shade_cmd->add_option("--sink", shade.sink, "node:port to output")->required();
  shade_cmd->add_option("--out", shade.out, "output file")->required();
  shade_cmd->add_option("--format", shade.format, "png8 or gbuf")->check(CLI::IsMember({"png8", "gbuf"}));

  std::string root;
  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "serve the HTTP API over a directory of databases");
  serve_cmd->add_option("--root", root, "directory holding databases")->required();
  serve_cmd->add_option("--port", port, "TCP port, 0 picks a free one")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", host, "bind address");

  PrimitiveArgs prim;
  auto* prim_cmd = app.add_subcommand("primitive", "write a torus or icosphere OBJ for testing");
  prim_cmd->add_option("shape", prim.shape, "torus or icosphere")->check(CLI::IsMember({"torus", "icosphere"}));
  prim_cmd->add_option("--out", prim.out, "OBJ path")->required();
  prim_cmd->add_option("--fields", prim.fields, "write the scalar fields sidecar here");
  prim_cmd->add_option("--major", prim.major, "torus major radius / sphere radius");
  prim_cmd->add_option("--minor", prim.minor, "torus minor radius");
  prim_cmd->add_option("--major-segments", prim.major_segments, "torus segments around the axis");
  prim_cmd->add_option("--minor-segments", prim.minor_segments, "torus segments around the tube");
  prim_cmd->add_option("--subdivisions", prim.subdivisions, "icosphere refinement level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    apply_thread_env();
    if (threads > 0) set_thread_limit(threads);
    if (*render_cmd) return run_render(render);
    if (*shade_cmd) return run_shade(shade);
    if (*serve_cmd) return run_serve(root, host, port);
    if (*prim_cmd) return run_primitive(prim);
  } catch (const Error& e) {
    std::fprintf(stderr, "darkroom: %s\n", e.what());
    if (!e.details().empty()) std::fprintf(stderr, "%s\n", e.to_json().dump().c_str());
    return exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "darkroom: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "darkroom: %s\n", e.what());
    return 1;
  }
  return 0;
}
