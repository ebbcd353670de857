#include "darkroom/mesh_io.hpp"

#include "darkroom/error.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string_view>

namespace darkroom {

namespace {

Error parse_error(const std::string& source, int line, const std::string& what) {
  return Error(ErrorCode::Parse, source + ":" + std::to_string(line) + ": " + what,
               {{"source", source}, {"line", line}});
}

double parse_double(std::string_view token, const std::string& source, int line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw parse_error(source, line, "bad number '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

TriangleMesh parse_obj(std::istream& in, const std::string& source_name) {
  TriangleMesh mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream tokens(line);
    std::string tag;
    if (!(tokens >> tag) || tag[0] == '#') continue;

    if (tag == "v") {
      std::string x, y, z;
      if (!(tokens >> x >> y >> z)) throw parse_error(source_name, line_no, "vertex needs 3 coordinates");
      mesh.vertices.push_back({parse_double(x, source_name, line_no), parse_double(y, source_name, line_no),
                               parse_double(z, source_name, line_no)});
    } else if (tag == "f") {
      std::vector<std::uint32_t> polygon;
      std::string ref;
      while (tokens >> ref) {
        const std::string_view index_text = std::string_view(ref).substr(0, ref.find('/'));
        long long index = 0;
        auto [ptr, ec] = std::from_chars(index_text.data(), index_text.data() + index_text.size(), index);
        if (ec != std::errc() || ptr != index_text.data() + index_text.size() || index == 0) {
          throw parse_error(source_name, line_no, "bad face index '" + ref + "'");
        }
        const auto count = static_cast<long long>(mesh.vertices.size());
        const long long resolved = index > 0 ? index - 1 : count + index;
        if (resolved < 0 || resolved >= count) {
          throw parse_error(source_name, line_no, "face index " + std::to_string(index) + " out of range");
        }
        polygon.push_back(static_cast<std::uint32_t>(resolved));
      }
      if (polygon.size() < 3) throw parse_error(source_name, line_no, "face needs at least 3 vertices");
      for (std::size_t k = 1; k + 1 < polygon.size(); ++k) {
        mesh.triangles.push_back({polygon[0], polygon[k], polygon[k + 1]});
      }
    }
  }
  if (mesh.triangles.empty()) throw Error(ErrorCode::Parse, source_name + ": no faces", {{"source", source_name}});
  return mesh;
}

TriangleMesh read_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::Parse, "cannot open mesh '" + path.string() + "'", {{"path", path.string()}});
  }
  return parse_obj(in, path.string());
}

void read_fields_json(const std::filesystem::path& path, TriangleMesh& mesh) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::Parse, "cannot open fields file '" + path.string() + "'", {{"path", path.string()}});
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what(), {{"path", path.string()}});
  }
  if (!doc.is_object() || !doc.contains("fields") || !doc["fields"].is_object()) {
    throw Error(ErrorCode::Parse, path.string() + ": expected {\"fields\": {...}}", {{"pointer", "/fields"}});
  }
  for (const auto& [name, values] : doc["fields"].items()) {
    if (!values.is_array()) {
      throw Error(ErrorCode::Parse, path.string() + ": field '" + name + "' is not an array",
                  {{"pointer", "/fields/" + name}});
    }
    std::vector<float> field;
    field.reserve(values.size());
    for (const auto& v : values) {
      if (!v.is_number()) {
        throw Error(ErrorCode::Parse, path.string() + ": field '" + name + "' holds a non-number",
                    {{"pointer", "/fields/" + name}});
      }
      field.push_back(v.get<float>());
    }
    if (field.size() != mesh.vertices.size()) {
      throw Error(ErrorCode::Parse,
                  path.string() + ": field '" + name + "' has " + std::to_string(field.size()) + " values for " +
                      std::to_string(mesh.vertices.size()) + " vertices",
                  {{"pointer", "/fields/" + name}});
    }
    mesh.scalar_fields[name] = std::move(field);
  }
}

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'", {{"path", path.string()}});
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_fields_json(const std::filesystem::path& path, const TriangleMesh& mesh) {
  nlohmann::json fields = nlohmann::json::object();
  for (const auto& [name, values] : mesh.scalar_fields) fields[name] = values;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'", {{"path", path.string()}});
  out << nlohmann::json{{"fields", fields}}.dump() << '\n';
}

}  // namespace darkroom
