#include "darkroom/cinema_db.hpp"

#include "darkroom/error.hpp"
#include "darkroom/gbuf_io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

namespace darkroom {

namespace fs = std::filesystem;

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

struct CsvRecord {
  std::vector<std::string> fields;
  int line = 0;  // physical line the record starts on, 1-based
};

// RFC 4180: quoted fields may hold commas, doubled quotes and line breaks.
std::vector<CsvRecord> parse_csv(const std::string& text) {
  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  int line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = current.fields.size() == 1 && current.fields[0].empty();
    if (!blank) records.push_back(std::move(current));
    current = CsvRecord{};
    current.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      if (field_started || !field.empty()) {
        throw Error(ErrorCode::Parse, std::string(kIndexFile) + ": line " + std::to_string(line) +
                                          ": stray quote inside unquoted field",
                    {{"line", line}});
      }
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      continue;
    } else if (c == '\n') {
      ++line;
      end_record();
    } else {
      field += c;
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::Parse, std::string(kIndexFile) + ": unterminated quoted field at end of file",
                {{"line", line}});
  }
  if (!field.empty() || field_started || !current.fields.empty()) end_record();
  return records;
}

Error row_error(int line, std::size_t row, const std::string& what) {
  return Error(ErrorCode::Parse,
               std::string(kIndexFile) + ": line " + std::to_string(line) + " (row " + std::to_string(row) +
                   "): " + what,
               {{"line", line}, {"row", row}});
}

fs::path temp_sibling(const fs::path& root) {
  static std::atomic<unsigned> counter{0};
  const auto parent = root.parent_path().empty() ? fs::path(".") : root.parent_path();
  return parent / ("." + root.filename().string() + ".tmp-" + std::to_string(::getpid()) + "-" +
                   std::to_string(counter.fetch_add(1)));
}

}  // namespace

std::string format_axis_value(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::size_t CinemaDatabase::axis_index(const std::string& name) const {
  const auto it = std::find(axes.begin(), axes.end(), name);
  if (it == axes.end()) throw Error(ErrorCode::Lookup, "unknown axis '" + name + "'", {{"axis", name}});
  return static_cast<std::size_t>(it - axes.begin());
}

std::vector<double> CinemaDatabase::distinct_values(const std::string& axis) const {
  const auto a = axis_index(axis);
  std::set<double> values;
  for (const auto& row : rows) values.insert(row.values[a]);
  return {values.begin(), values.end()};
}

CinemaDatabase write_database(const fs::path& root, const SamplingGrid& grid, const std::vector<GBuffer>& gbuffers,
                              const std::vector<GridAxis>& extra_axes) {
  grid.validate();
  if (gbuffers.size() != grid.size()) {
    throw Error(ErrorCode::InvalidArgument, std::to_string(gbuffers.size()) + " buffers for " +
                                                std::to_string(grid.size()) + " cameras");
  }
  for (const auto& g : gbuffers) {
    if (g.width() != gbuffers.front().width() || g.height() != gbuffers.front().height()) {
      throw Error(ErrorCode::InvalidArgument, "G-buffers differ in resolution");
    }
  }
  CinemaDatabase db;
  db.root = root;
  std::vector<const GridAxis*> columns;
  for (const auto& a : grid.axes) columns.push_back(&a);
  for (const auto& a : extra_axes) {
    if (a.values.size() != gbuffers.size()) {
      throw Error(ErrorCode::InvalidArgument, "extra axis '" + a.name + "' needs one value per buffer");
    }
    columns.push_back(&a);
  }
  for (const auto* a : columns) {
    if (a->name.empty() || a->name == "FILE" || std::count(db.axes.begin(), db.axes.end(), a->name) > 0) {
      throw Error(ErrorCode::InvalidArgument, "bad or duplicate axis name '" + a->name + "'");
    }
    db.axes.push_back(a->name);
  }

  std::error_code ec;
  if (fs::exists(root, ec)) {
    if (!fs::is_directory(root, ec) || !fs::is_empty(root, ec)) {
      throw Error(ErrorCode::Io, "'" + root.string() + "' already exists and is not an empty directory",
                  {{"path", root.string()}});
    }
  }

  const fs::path staging = temp_sibling(root);
  try {
    fs::create_directories(staging / "image");
    std::ostringstream csv;
    for (const auto& name : db.axes) csv << csv_field(name) << ',';
    csv << "FILE\r\n";
    for (std::size_t i = 0; i < gbuffers.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "image/%06zu.gbuf", i);
      DbRow row;
      row.file = name;
      for (const auto* a : columns) row.values.push_back(a->values[i]);
      write_gbuf(staging / row.file, gbuffers[i]);
      for (double v : row.values) csv << format_axis_value(v) << ',';
      csv << csv_field(row.file) << "\r\n";
      db.rows.push_back(std::move(row));
    }
    std::ofstream out(staging / kIndexFile, std::ios::binary);
    out << csv.str();
    out.close();
    if (!out) throw Error(ErrorCode::Io, "cannot write index in '" + staging.string() + "'");

    if (fs::exists(root)) fs::remove(root);
    fs::rename(staging, root);
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(staging, ec);
    throw Error(ErrorCode::Io, std::string("cannot write database: ") + e.what(), {{"path", root.string()}});
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
  return db;
}

CinemaDatabase read_database(const fs::path& root) {
  const fs::path index = root / kIndexFile;
  std::ifstream in(index, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Parse, "missing " + index.string(), {{"path", index.string()}, {"line", 0}});
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto records = parse_csv(buffer.str());
  if (records.empty()) throw Error(ErrorCode::Parse, std::string(kIndexFile) + ": empty index", {{"line", 1}});

  CinemaDatabase db;
  db.root = root;
  const auto& header = records.front().fields;
  if (header.empty() || header.back() != "FILE") {
    throw Error(ErrorCode::Parse, std::string(kIndexFile) + ": line 1: last column must be FILE", {{"line", 1}});
  }
  db.axes.assign(header.begin(), header.end() - 1);
  for (const auto& a : db.axes) {
    if (a.empty() || std::count(db.axes.begin(), db.axes.end(), a) > 1) {
      throw Error(ErrorCode::Parse, std::string(kIndexFile) + ": line 1: empty or duplicate axis '" + a + "'",
                  {{"line", 1}});
    }
  }

  std::set<std::string> files;
  db.rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      throw row_error(rec.line, r,
                      "expected " + std::to_string(header.size()) + " columns, got " +
                          std::to_string(rec.fields.size()));
    }
    DbRow row;
    row.values.reserve(db.axes.size());
    for (std::size_t c = 0; c < db.axes.size(); ++c) {
      const auto& text = rec.fields[c];
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw row_error(rec.line, r, "column '" + db.axes[c] + "' is not a number: '" + text + "'");
      }
      row.values.push_back(value);
    }
    row.file = rec.fields.back();
    if (row.file.empty() || fs::path(row.file).is_absolute()) {
      throw row_error(rec.line, r, "FILE must be a non-empty relative path");
    }
    if (!files.insert(row.file).second) throw row_error(rec.line, r, "duplicate FILE '" + row.file + "'");
    db.rows.push_back(std::move(row));
  }

  std::vector<std::string> dangling;
  for (const auto& row : db.rows) {
    std::error_code ec;
    if (!fs::is_regular_file(root / row.file, ec)) dangling.push_back(row.file);
  }
  if (!dangling.empty()) {
    throw Error(ErrorCode::DanglingReference,
                "index references missing file '" + dangling.front() + "'" +
                    (dangling.size() > 1 ? " and " + std::to_string(dangling.size() - 1) + " more" : ""),
                {{"paths", dangling}});
  }
  return db;
}

std::vector<std::size_t> query(const CinemaDatabase& db, const Predicate& predicate) {
  std::vector<std::pair<std::size_t, const AxisConstraint*>> checks;
  for (const auto& [axis, constraint] : predicate) checks.emplace_back(db.axis_index(axis), &constraint);

  std::vector<std::size_t> matches;
  for (std::size_t r = 0; r < db.rows.size(); ++r) {
    const auto& values = db.rows[r].values;
    const bool ok = std::all_of(checks.begin(), checks.end(), [&](const auto& check) {
      const double v = values[check.first];
      if (const auto* exact = std::get_if<double>(check.second)) return v == *exact;
      const auto& range = std::get<ValueRange>(*check.second);
      return v >= range.lo && v <= range.hi;
    });
    if (ok) matches.push_back(r);
  }
  return matches;
}

GBuffer load_gbuffer(const CinemaDatabase& db, std::size_t row) {
  if (row >= db.rows.size()) {
    throw Error(ErrorCode::NotFound, "row " + std::to_string(row) + " out of range", {{"row", row}});
  }
  return read_gbuf(db.root / db.rows[row].file);
}

Rgba8Image channel_preview(const Plane& plane, std::optional<ValueRange> range) {
  double lo = 0.0;
  double hi = 0.0;
  if (range) {
    if (!(range->lo < range->hi)) throw Error(ErrorCode::InvalidArgument, "preview range needs lo < hi");
    lo = range->lo;
    hi = range->hi;
  } else {
    bool any = false;
    for (float v : plane.data) {
      if (!std::isfinite(v)) continue;
      lo = any ? std::min(lo, static_cast<double>(v)) : v;
      hi = any ? std::max(hi, static_cast<double>(v)) : v;
      any = true;
    }
  }
  const double span = hi - lo;

  Rgba8Image image;
  image.width = plane.width;
  image.height = plane.height;
  image.pixels.resize(plane.data.size() * 4);
  for (std::size_t i = 0; i < plane.data.size(); ++i) {
    const float v = plane.data[i];
    auto* px = &image.pixels[i * 4];
    if (!std::isfinite(v)) {
      px[0] = px[1] = px[2] = px[3] = 0;
      continue;
    }
    const std::uint8_t g = span > 0.0 ? to_unorm8(static_cast<float>((v - lo) / span)) : 0;
    px[0] = px[1] = px[2] = g;
    px[3] = 255;
  }
  return image;
}

std::vector<std::uint8_t> export_png_preview(const GBuffer& gbuffer, const std::string& channel,
                                             std::optional<ValueRange> range) {
  const auto& c = gbuffer.channel(channel);
  if (c.planes.size() != 1) {
    throw Error(ErrorCode::InvalidArgument, "preview needs a single-plane channel, '" + channel + "' has " +
                                                std::to_string(c.planes.size()),
                {{"channel", channel}});
  }
  return encode_png(channel_preview(c.planes.front(), range));
}

}  // namespace darkroom
