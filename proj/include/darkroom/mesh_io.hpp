#pragma once

#include "darkroom/geometry.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace darkroom {

// OBJ subset: `v x y z` and `f i j k ...` records (1-based or negative
// indices, `i/t/n` forms accepted, polygons fan-triangulated). Everything
// else is ignored. See docs/formats.md.
TriangleMesh parse_obj(std::istream& in, const std::string& source_name = "<obj>");
TriangleMesh read_obj(const std::filesystem::path& path);

// Sidecar `{"fields": {"name": [floats...]}}`, one value per vertex.
void read_fields_json(const std::filesystem::path& path, TriangleMesh& mesh);

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh);
void write_fields_json(const std::filesystem::path& path, const TriangleMesh& mesh);

}  // namespace darkroom
