#include "casegment/raster.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>

#include "casegment/errors.hpp"
#include "json.hpp"

namespace casegment {

namespace fs = std::filesystem;

namespace {

void check_geometry(std::size_t width, std::size_t height, std::size_t bands, unsigned depth) {
  if (width == 0 || height == 0 || bands == 0)
    throw ContractError("image dimensions must be nonzero");
  if (depth != 8 && depth != 16)
    throw ContractError("image depth must be 8 or 16 bits, got " + std::to_string(depth));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// `key = value` pairs; brace-delimited values may span lines.
std::map<std::string, std::string> parse_envi_header(const std::string& text) {
  std::map<std::string, std::string> keys;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (first) {
      first = false;
      if (t == "ENVI") continue;
    }
    if (t.empty() || t[0] == ';') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw FormatError("malformed ENVI header line: " + t);
    std::string key = lower(trim(std::string_view(t).substr(0, eq)));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (!value.empty() && value.front() == '{') {
      while (value.find('}') == std::string::npos && std::getline(in, line)) value += " " + trim(line);
      if (value.find('}') == std::string::npos)
        throw FormatError("unterminated brace value for key '" + key + "'");
    }
    keys[key] = value;
  }
  return keys;
}

std::size_t header_uint(const std::map<std::string, std::string>& keys, const std::string& key,
                        std::optional<std::size_t> fallback = std::nullopt) {
  auto it = keys.find(key);
  if (it == keys.end()) {
    if (fallback) return *fallback;
    throw FormatError("ENVI header is missing '" + key + "'");
  }
  const std::string& v = it->second;
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw FormatError("ENVI header key '" + key + "' is not a non-negative integer: " + v);
  return std::stoull(v);
}

struct EnviPaths {
  fs::path header;
  fs::path payload;
};

EnviPaths resolve_envi_paths(const fs::path& path) {
  if (path.extension() == ".hdr") {
    fs::path stem = path;
    stem.replace_extension();
    for (const char* ext : {"", ".img", ".bsq", ".raw", ".dat"}) {
      fs::path candidate = stem;
      candidate += ext;
      if (fs::is_regular_file(candidate)) return {path, candidate};
    }
    throw IoError("no payload found next to header " + path.string());
  }
  fs::path header = path;
  header += ".hdr";
  if (fs::is_regular_file(header)) return {header, path};
  header = path;
  header.replace_extension(".hdr");
  if (fs::is_regular_file(header)) return {header, path};
  throw IoError("no ENVI header found for " + path.string());
}

// PPM header tokens are separated by whitespace; '#' starts a comment.
std::size_t next_ppm_token(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t start = pos;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
  if (start == pos) throw FormatError("malformed PPM header");
  if (pos - start > 9) throw FormatError("PPM header value out of range");
  return std::stoull(bytes.substr(start, pos - start));
}

}  // namespace

MultibandImage::MultibandImage(std::size_t width, std::size_t height, std::size_t bands,
                               unsigned depth)
    : width_(width), height_(height), bands_(bands), depth_(depth) {
  check_geometry(width, height, bands, depth);
  samples_.assign(width * height * bands, 0);
}

MultibandImage::MultibandImage(std::size_t width, std::size_t height, std::size_t bands,
                               unsigned depth, std::vector<Sample> samples)
    : width_(width), height_(height), bands_(bands), depth_(depth), samples_(std::move(samples)) {
  check_geometry(width, height, bands, depth);
  if (samples_.size() != width * height * bands)
    throw ContractError("sample buffer length " + std::to_string(samples_.size()) +
                        " does not match " + std::to_string(width) + "x" +
                        std::to_string(height) + "x" + std::to_string(bands));
  const Sample limit = max_value();
  if (std::any_of(samples_.begin(), samples_.end(), [limit](Sample s) { return s > limit; }))
    throw ContractError("sample exceeds " + std::to_string(depth) + "-bit range");
}

void MultibandImage::set(std::size_t index, std::size_t band, Sample value) {
  if (value > max_value()) throw ContractError("sample exceeds image depth");
  samples_[index * bands_ + band] = value;
}

LabelRaster::LabelRaster(std::size_t w, std::size_t h, std::vector<LabelId> ids)
    : width(w), height(h), labels(std::move(ids)) {
  if (labels.size() != w * h) throw ContractError("label buffer does not match raster size");
}

std::size_t LabelRaster::label_count() const {
  std::unordered_set<LabelId> seen;
  for (LabelId id : labels)
    if (id != kNullLabel) seen.insert(id);
  return seen.size();
}

MultibandImage load_image(const fs::path& path, ImageFormat format) {
  switch (format) {
    case ImageFormat::EnviBsq:
      return load_envi(path);
    case ImageFormat::Ppm:
      return load_ppm(path);
  }
  throw UnsupportedError("unknown image format");
}

MultibandImage load_envi(const fs::path& path) {
  const EnviPaths paths = resolve_envi_paths(path);
  const auto keys = parse_envi_header(read_file(paths.header));

  const std::size_t width = header_uint(keys, "samples");
  const std::size_t height = header_uint(keys, "lines");
  const std::size_t bands = header_uint(keys, "bands");
  const std::size_t data_type = header_uint(keys, "data type");
  const std::size_t byte_order = header_uint(keys, "byte order", 0);
  const std::size_t offset = header_uint(keys, "header offset", 0);
  if (width == 0 || height == 0 || bands == 0)
    throw FormatError("ENVI header declares an empty image");

  if (auto it = keys.find("interleave"); it != keys.end() && lower(it->second) != "bsq")
    throw UnsupportedError("unsupported interleave '" + it->second + "', only bsq is read");
  if (byte_order > 1) throw FormatError("byte order must be 0 or 1");

  unsigned depth = 0;
  if (data_type == 1)
    depth = 8;
  else if (data_type == 12)
    depth = 16;
  else
    throw UnsupportedError("unsupported ENVI data type " + std::to_string(data_type) +
                           " (supported: 1 = u8, 12 = u16)");

  const std::size_t bytes_per_sample = depth / 8;
  const std::size_t plane = width * height;
  const std::size_t expected = plane * bands * bytes_per_sample;
  const std::string payload = read_file(paths.payload);
  if (payload.size() != offset + expected)
    throw FormatError("ENVI payload is " + std::to_string(payload.size()) + " bytes, header implies " +
                      std::to_string(offset + expected));

  std::vector<Sample> samples(plane * bands);
  const auto* raw = reinterpret_cast<const unsigned char*>(payload.data()) + offset;
  for (std::size_t b = 0; b < bands; ++b) {
    for (std::size_t i = 0; i < plane; ++i) {
      const unsigned char* p = raw + (b * plane + i) * bytes_per_sample;
      Sample v = p[0];
      if (depth == 16)
        v = byte_order == 0 ? static_cast<Sample>(p[0] | (p[1] << 8))
                            : static_cast<Sample>((p[0] << 8) | p[1]);
      samples[i * bands + b] = v;
    }
  }
  return MultibandImage(width, height, bands, depth, std::move(samples));
}

void save_envi(const MultibandImage& image, const fs::path& path) {
  const std::size_t plane = image.pixel_count();
  const std::size_t bands = image.bands();
  const std::size_t bytes_per_sample = image.depth() / 8;
  std::string payload(plane * bands * bytes_per_sample, '\0');
  for (std::size_t b = 0; b < bands; ++b) {
    for (std::size_t i = 0; i < plane; ++i) {
      const Sample v = image.at(i, b);
      char* p = payload.data() + (b * plane + i) * bytes_per_sample;
      p[0] = static_cast<char>(v & 0xFF);
      if (bytes_per_sample == 2) p[1] = static_cast<char>(v >> 8);
    }
  }
  write_file(path, payload);

  std::ostringstream hdr;
  hdr << "ENVI\n"
      << "samples = " << image.width() << "\n"
      << "lines = " << image.height() << "\n"
      << "bands = " << bands << "\n"
      << "header offset = 0\n"
      << "file type = ENVI Standard\n"
      << "data type = " << (image.depth() == 8 ? 1 : 12) << "\n"
      << "interleave = bsq\n"
      << "byte order = 0\n";
  fs::path header = path;
  header += ".hdr";
  write_file(header, hdr.str());
}

MultibandImage load_ppm(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
    throw FormatError(path.string() + " is not a binary PPM (P6)");
  std::size_t pos = 2;
  const std::size_t width = next_ppm_token(bytes, pos);
  const std::size_t height = next_ppm_token(bytes, pos);
  const std::size_t maxval = next_ppm_token(bytes, pos);
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw FormatError("PPM header not terminated by whitespace");
  ++pos;
  if (width == 0 || height == 0) throw FormatError("PPM declares an empty image");
  if (maxval == 0) throw FormatError("PPM maxval must be positive");
  if (maxval > 255) throw UnsupportedError("16-bit PPM is not supported");

  const std::size_t expected = width * height * 3;
  if (bytes.size() - pos != expected)
    throw FormatError("PPM payload is " + std::to_string(bytes.size() - pos) +
                      " bytes, header implies " + std::to_string(expected));
  std::vector<Sample> samples(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    samples[i] = static_cast<unsigned char>(bytes[pos + i]);
    if (samples[i] > maxval) throw FormatError("PPM sample exceeds declared maxval");
  }
  return MultibandImage(width, height, 3, 8, std::move(samples));
}

void save_ppm(const MultibandImage& image, const fs::path& path) {
  if (image.bands() != 3 || image.depth() != 8)
    throw ContractError("PPM output requires a 3-band 8-bit image");
  std::string out = "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) +
                    "\n255\n";
  out.reserve(out.size() + image.samples().size());
  for (Sample s : image.samples()) out.push_back(static_cast<char>(s));
  write_file(path, out);
}

void save_label_raster(const LabelRaster& labels, const fs::path& path) {
  if (labels.labels.size() != labels.width * labels.height)
    throw ContractError("label buffer does not match raster size");
  std::string payload(labels.labels.size() * 4, '\0');
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    const LabelId id = labels.labels[i];
    for (int k = 0; k < 4; ++k) payload[i * 4 + k] = static_cast<char>((id >> (8 * k)) & 0xFF);
  }
  write_file(path, payload);

  nlohmann::json sidecar = {
      {"width", labels.width}, {"height", labels.height}, {"label_count", labels.label_count()}};
  fs::path json_path = path;
  json_path += ".json";
  write_file(json_path, sidecar.dump(2) + "\n");
}

LabelRaster load_label_raster(const fs::path& path) {
  fs::path json_path = path;
  json_path += ".json";
  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(read_file(json_path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad label sidecar " + json_path.string() + ": " + e.what());
  }
  std::size_t width = 0, height = 0, label_count = 0;
  try {
    width = sidecar.at("width").get<std::size_t>();
    height = sidecar.at("height").get<std::size_t>();
    label_count = sidecar.at("label_count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad label sidecar " + json_path.string() + ": " + e.what());
  }

  const std::string payload = read_file(path);
  if (payload.size() != width * height * 4)
    throw FormatError("label payload is " + std::to_string(payload.size()) +
                      " bytes, sidecar implies " + std::to_string(width * height * 4));
  std::vector<LabelId> ids(width * height);
  const auto* raw = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t i = 0; i < ids.size(); ++i)
    ids[i] = static_cast<LabelId>(raw[i * 4]) | (static_cast<LabelId>(raw[i * 4 + 1]) << 8) |
             (static_cast<LabelId>(raw[i * 4 + 2]) << 16) |
             (static_cast<LabelId>(raw[i * 4 + 3]) << 24);
  LabelRaster raster(width, height, std::move(ids));
  if (raster.label_count() != label_count)
    throw FormatError("label sidecar declares " + std::to_string(label_count) +
                      " labels, payload has " + std::to_string(raster.label_count()));
  return raster;
}

std::uint8_t to_8bit(Sample value, unsigned depth) noexcept {
  const std::uint32_t maxv = (1u << depth) - 1u;
  return static_cast<std::uint8_t>((static_cast<std::uint32_t>(value) * 255u + maxv / 2) / maxv);
}

MultibandImage render_preview(const MultibandImage& image, const LabelRaster& labels,
                              const SignatureTable& signatures,
                              std::array<std::size_t, 3> band_triple) {
  if (labels.width != image.width() || labels.height != image.height())
    throw ContractError("label raster and image dimensions differ");
  for (std::size_t b : band_triple)
    if (b >= image.bands())
      throw ContractError("preview band " + std::to_string(b) + " out of range");

  MultibandImage rgb(image.width(), image.height(), 3, 8);
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    const LabelId id = labels.labels[i];
    if (id == kNullLabel) continue;
    auto it = signatures.find(id);
    if (it == signatures.end() || it->second.size() != image.bands())
      throw ContractError("no signature for label " + std::to_string(id));
    for (std::size_t c = 0; c < 3; ++c)
      rgb.set(i, c, to_8bit(it->second[band_triple[c]], image.depth()));
  }
  return rgb;
}

void save_preview(const MultibandImage& image, const LabelRaster& labels,
                  const SignatureTable& signatures, std::array<std::size_t, 3> band_triple,
                  const fs::path& path) {
  save_ppm(render_preview(image, labels, signatures, band_triple), path);
}

}  // namespace casegment
