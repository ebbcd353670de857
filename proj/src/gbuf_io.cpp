#include "darkroom/gbuf_io.hpp"

#include "darkroom/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace darkroom {

namespace {

static_assert(std::endian::native == std::endian::little, ".gbuf I/O assumes a little-endian host");

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}
  template <typename T>
  void put(T value) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    out_.insert(out_.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  template <typename T>
  T get(const char* what) {
    T value;
    std::memcpy(&value, take(sizeof(T), what), sizeof(T));
    return value;
  }
  const std::uint8_t* take(std::size_t n, const char* what) {
    if (in_.size() - pos_ < n) {
      throw Error(ErrorCode::CorruptPayload, std::string("truncated .gbuf while reading ") + what,
                  {{"offset", pos_}, {"needed", n}, {"available", in_.size() - pos_}});
    }
    const auto* p = in_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::span<const std::uint8_t> rest() const { return in_.subspan(pos_); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_gbuf(const GBuffer& g) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(gbuf_size(g));
  Writer w(bytes);
  w.put_bytes("CDGB", 4);
  w.put<std::uint32_t>(kGbufVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.width()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.height()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.channels().size()));
  for (const auto& c : g.channels()) {
    w.put<std::uint16_t>(static_cast<std::uint16_t>(c.name.size()));
    w.put_bytes(c.name.data(), c.name.size());
    w.put<std::uint8_t>(static_cast<std::uint8_t>(c.planes.size()));
    for (const auto& p : c.planes) w.put_bytes(p.data.data(), p.data.size() * sizeof(float));
  }
  const std::string camera = camera_to_json(g.camera()).dump();
  w.put_bytes(camera.data(), camera.size());
  return bytes;
}

GBuffer decode_gbuf(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (std::memcmp(r.take(4, "magic"), "CDGB", 4) != 0) {
    throw Error(ErrorCode::CorruptPayload, "not a .gbuf file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kGbufVersion) {
    throw Error(ErrorCode::VersionMismatch,
                ".gbuf version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(kGbufVersion) + ")",
                {{"version", version}});
  }
  const auto width = r.get<std::uint32_t>("width");
  const auto height = r.get<std::uint32_t>("height");
  const auto count = r.get<std::uint32_t>("channel count");
  if (width == 0 || height == 0 || width > (1u << 16) || height > (1u << 16)) {
    throw Error(ErrorCode::CorruptPayload, "implausible .gbuf resolution");
  }

  struct Pending {
    std::string name;
    std::vector<Plane> planes;
  };
  std::vector<Pending> channels;
  const std::size_t plane_bytes = std::size_t{width} * height * sizeof(float);
  for (std::uint32_t c = 0; c < count; ++c) {
    const auto name_len = r.get<std::uint16_t>("channel name length");
    const auto* name = r.take(name_len, "channel name");
    Pending ch{std::string(reinterpret_cast<const char*>(name), name_len), {}};
    const auto planes = r.get<std::uint8_t>("plane count");
    for (std::uint8_t p = 0; p < planes; ++p) {
      Plane plane(static_cast<int>(width), static_cast<int>(height));
      std::memcpy(plane.data.data(), r.take(plane_bytes, "plane data"), plane_bytes);
      ch.planes.push_back(std::move(plane));
    }
    channels.push_back(std::move(ch));
  }

  Camera camera;
  const auto tail = r.rest();
  try {
    camera = camera_from_json(nlohmann::json::parse(tail.begin(), tail.end()));
  } catch (const Error&) {
    throw Error(ErrorCode::CorruptPayload, "malformed camera JSON in .gbuf");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptPayload, std::string("malformed camera JSON in .gbuf: ") + e.what());
  }

  GBuffer g(static_cast<int>(width), static_cast<int>(height), camera);
  for (auto& ch : channels) g.set_channel(std::move(ch.name), std::move(ch.planes));
  return g;
}

void write_gbuf(const std::filesystem::path& path, const GBuffer& gbuffer) {
  const auto bytes = encode_gbuf(gbuffer);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'", {{"path", path.string()}});
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to '" + path.string() + "'", {{"path", path.string()}});
}

GBuffer read_gbuf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'", {{"path", path.string()}});
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_gbuf(bytes);
}

std::uint64_t gbuf_size(const GBuffer& g) {
  std::uint64_t size = 4 + 4 * 4;
  const std::uint64_t plane_bytes = std::uint64_t(g.width()) * std::uint64_t(g.height()) * sizeof(float);
  for (const auto& c : g.channels()) size += 2 + c.name.size() + 1 + c.planes.size() * plane_bytes;
  return size + camera_to_json(g.camera()).dump().size();
}

}  // namespace darkroom
