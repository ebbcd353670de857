#pragma once

#include "darkroom/camera.hpp"
#include "darkroom/imaging.hpp"
#include "darkroom/png.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace darkroom {

struct DbRow {
  std::vector<double> values;  // one per axis, in axis order
  std::string file;            // relative to the database root
  bool operator==(const DbRow&) const = default;
};

// Directory with `data.csv` (axis columns, then FILE) and one .gbuf per row
// under `image/`. Pixel data is loaded on demand.
struct CinemaDatabase {
  std::filesystem::path root;
  std::vector<std::string> axes;
  std::vector<DbRow> rows;

  // Throws Error(Lookup) for an unknown axis.
  std::size_t axis_index(const std::string& name) const;
  // Sorted distinct values of one axis.
  std::vector<double> distinct_values(const std::string& axis) const;
};

inline constexpr const char* kIndexFile = "data.csv";

// Writes the database atomically (temp directory + rename). `extra_axes`
// add columns after the grid axes, one value per buffer. Throws Error(Io) if
// `root` exists and is not empty, Error(InvalidArgument) on count or
// resolution mismatch.
CinemaDatabase write_database(const std::filesystem::path& root, const SamplingGrid& grid,
                              const std::vector<GBuffer>& gbuffers, const std::vector<GridAxis>& extra_axes = {});

// Parses the index only. Error(Parse) names the offending line and row;
// Error(DanglingReference) lists referenced files that do not exist.
CinemaDatabase read_database(const std::filesystem::path& root);

struct ValueRange {
  double lo;
  double hi;
};
using AxisConstraint = std::variant<double, ValueRange>;
using Predicate = std::map<std::string, AxisConstraint>;

// Indices of rows matching every constraint (exact value, or inclusive
// range), in index order. Throws Error(Lookup) for an unknown axis.
std::vector<std::size_t> query(const CinemaDatabase& db, const Predicate& predicate);

GBuffer load_gbuffer(const CinemaDatabase& db, std::size_t row);

// Grayscale mapping of [lo, hi] to [0, 255] with round-half-up; non-finite
// pixels get alpha 0. Without a range the finite min/max of the plane is
// used (a constant plane maps to 0).
Rgba8Image channel_preview(const Plane& plane, std::optional<ValueRange> range = std::nullopt);
std::vector<std::uint8_t> export_png_preview(const GBuffer& gbuffer, const std::string& channel,
                                             std::optional<ValueRange> range = std::nullopt);

// Shortest text that parses back to the same double.
std::string format_axis_value(double value);

}  // namespace darkroom
