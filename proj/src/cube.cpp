#include "hsiclass/cube.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hsiclass/errors.hpp"

namespace hsiclass {

namespace {

std::string shape_str(int rows, int cols, int bands) {
  std::ostringstream os;
  os << rows << "x" << cols << "x" << bands;
  return os.str();
}

// Strip ASCII whitespace from both ends.
std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

int parse_positive_int(const std::string& value, const std::string& key,
                       const std::string& path) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || v < 1 || v > 1'000'000)
    throw FormatError(path + ": bad value for " + key + ": '" + value + "'");
  return static_cast<int>(v);
}

void byteswap_samples(std::vector<float>& data) {
  for (float& f : data) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    u = ((u & 0x000000FFu) << 24) | ((u & 0x0000FF00u) << 8) |
        ((u & 0x00FF0000u) >> 8) | ((u & 0xFF000000u) >> 24);
    std::memcpy(&f, &u, 4);
  }
}

}  // namespace

const char* layout_name(Layout layout) {
  return layout == Layout::BandMajor ? "bsq" : "bip";
}

Layout parse_layout(const std::string& text) {
  if (text == "bsq") return Layout::BandMajor;
  if (text == "bip") return Layout::PixelMajor;
  throw FormatError("unknown layout '" + text + "' (expected bsq or bip)");
}

void CubeHeader::validate() const {
  if (rows < 1 || cols < 1 || bands < 1)
    throw ValidationError("cube shape must be positive, got " +
                          shape_str(rows, cols, bands));
}

void HsCube::validate() const {
  if (rows < 1 || cols < 1 || bands < 1)
    throw ValidationError("cube shape must be positive, got " +
                          shape_str(rows, cols, bands));
  const auto expected = static_cast<std::size_t>(pixel_count() * bands);
  if (data.size() != expected)
    throw ValidationError("cube data length " + std::to_string(data.size()) +
                          " does not match shape " +
                          shape_str(rows, cols, bands));
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!std::isfinite(data[i]))
      throw ValidationError("cube sample " + std::to_string(i) +
                            " is not finite");
}

HsCube make_cube(int rows, int cols, int bands, Layout layout) {
  if (rows < 1 || cols < 1 || bands < 1)
    throw ParameterError("cube shape must be positive, got " +
                         shape_str(rows, cols, bands));
  HsCube cube;
  cube.rows = rows;
  cube.cols = cols;
  cube.bands = bands;
  cube.layout = layout;
  cube.data.assign(static_cast<std::size_t>(cube.pixel_count()) * bands, 0.0f);
  return cube;
}

std::pair<std::string, std::string> cube_paths(const std::string& stem_or_hdr) {
  std::string stem = stem_or_hdr;
  if (stem.size() > 4 && stem.ends_with(".hdr")) stem.resize(stem.size() - 4);
  return {stem + ".hdr", stem + ".raw"};
}

CubeHeader read_cube_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open header " + path);
  CubeHeader h;
  bool have_rows = false, have_cols = false, have_bands = false,
       have_layout = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": expected key=value, got '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key == "rows") {
      h.rows = parse_positive_int(value, key, path);
      have_rows = true;
    } else if (key == "cols") {
      h.cols = parse_positive_int(value, key, path);
      have_cols = true;
    } else if (key == "bands") {
      h.bands = parse_positive_int(value, key, path);
      have_bands = true;
    } else if (key == "layout") {
      h.layout = parse_layout(value);
      have_layout = true;
    } else if (key == "format") {
      if (value != "float32le")
        throw FormatError(path + ": unsupported format '" + value +
                          "' (only float32le)");
    } else if (key == "image_id") {
      h.image_id = value;
    }
    // Unknown keys are ignored so sidecars can carry extra metadata.
  }
  if (!have_rows || !have_cols || !have_bands || !have_layout)
    throw FormatError(path + ": missing required key(s); need rows, cols, "
                      "bands, layout");
  h.validate();
  return h;
}

void write_cube_header(const std::string& path, const CubeHeader& header) {
  header.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write header " + path);
  out << "rows=" << header.rows << "\n";
  out << "cols=" << header.cols << "\n";
  out << "bands=" << header.bands << "\n";
  out << "layout=" << layout_name(header.layout) << "\n";
  out << "format=float32le\n";
  if (!header.image_id.empty()) out << "image_id=" << header.image_id << "\n";
  if (!out) throw IoError("short write on header " + path);
}

HsCube load_cube(const std::string& header_path,
                 const std::string& data_path) {
  const CubeHeader h = read_cube_header(header_path);
  std::ifstream in(data_path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open data " + data_path);
  const std::int64_t size = static_cast<std::int64_t>(in.tellg());
  const std::int64_t expected = h.sample_count() * 4;
  if (size != expected)
    throw FormatError(data_path + ": size " + std::to_string(size) +
                      " bytes, header implies " + std::to_string(expected));
  in.seekg(0);
  HsCube cube;
  cube.rows = h.rows;
  cube.cols = h.cols;
  cube.bands = h.bands;
  cube.layout = h.layout;
  cube.image_id = h.image_id;
  cube.data.resize(static_cast<std::size_t>(h.sample_count()));
  in.read(reinterpret_cast<char*>(cube.data.data()), expected);
  if (!in) throw IoError("short read on data " + data_path);
  if constexpr (std::endian::native == std::endian::big)
    byteswap_samples(cube.data);
  cube.validate();
  return cube;
}

HsCube load_cube(const std::string& stem_or_hdr) {
  const auto [hdr, raw] = cube_paths(stem_or_hdr);
  return load_cube(hdr, raw);
}

void save_cube(const HsCube& cube, const std::string& stem_or_hdr) {
  cube.validate();
  const auto [hdr, raw] = cube_paths(stem_or_hdr);
  CubeHeader h;
  h.rows = cube.rows;
  h.cols = cube.cols;
  h.bands = cube.bands;
  h.layout = cube.layout;
  h.image_id = cube.image_id;
  write_cube_header(hdr, h);
  std::ofstream out(raw, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write data " + raw);
  if constexpr (std::endian::native == std::endian::big) {
    std::vector<float> swapped = cube.data;
    byteswap_samples(swapped);
    out.write(reinterpret_cast<const char*>(swapped.data()),
              static_cast<std::streamsize>(swapped.size() * 4));
  } else {
    out.write(reinterpret_cast<const char*>(cube.data.data()),
              static_cast<std::streamsize>(cube.data.size() * 4));
  }
  if (!out) throw IoError("short write on data " + raw);
}

HsCube convert_layout(const HsCube& cube, Layout target) {
  cube.validate();
  if (cube.layout == target) return cube;
  HsCube out = make_cube(cube.rows, cube.cols, cube.bands, target);
  out.image_id = cube.image_id;
  const std::int64_t pixels = cube.pixel_count();
  for (std::int64_t p = 0; p < pixels; ++p)
    for (int b = 0; b < cube.bands; ++b)
      out.data[out.sample_index(p, b)] = cube.data[cube.sample_index(p, b)];
  return out;
}

std::int64_t raw_data_bytes(int rows, int cols, int bands) {
  return static_cast<std::int64_t>(rows) * cols * bands * 4;
}

// ---------------------------------------------------------------------------
// PGM / PPM
// ---------------------------------------------------------------------------

namespace {

void write_pnm(const std::string& path, const char* magic, int rows, int cols,
               std::span<const std::uint8_t> bytes, int channels) {
  if (rows < 1 || cols < 1)
    throw ParameterError("image shape must be positive");
  const auto expected =
      static_cast<std::size_t>(rows) * cols * static_cast<std::size_t>(channels);
  if (bytes.size() != expected)
    throw DimensionError("pixel buffer length " + std::to_string(bytes.size()) +
                         " does not match " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write image " + path);
  out << magic << "\n" << cols << " " << rows << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write on image " + path);
}

std::vector<std::uint8_t> read_pnm(const std::string& path, const char* magic,
                                   int* rows, int* cols, int channels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path);
  std::string m;
  in >> m;
  if (m != magic)
    throw FormatError(path + ": expected " + magic + ", got '" + m + "'");
  // Header tokens may be separated by whitespace and '#' comments.
  auto next_int = [&](const char* what) {
    for (;;) {
      int c = in.peek();
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    long v = 0;
    if (!(in >> v) || v < 1 || v > 1'000'000)
      throw FormatError(path + ": bad " + std::string(what));
    return static_cast<int>(v);
  };
  const int w = next_int("width");
  const int h = next_int("height");
  const int maxval = next_int("maxval");
  if (maxval != 255)
    throw FormatError(path + ": unsupported maxval " + std::to_string(maxval));
  in.get();  // single whitespace after maxval
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!in) throw IoError("short read on image " + path);
  *rows = h;
  *cols = w;
  return bytes;
}

}  // namespace

void write_pgm(const std::string& path, int rows, int cols,
               std::span<const std::uint8_t> gray) {
  write_pnm(path, "P5", rows, cols, gray, 1);
}

void write_ppm(const std::string& path, int rows, int cols,
               std::span<const std::uint8_t> rgb) {
  write_pnm(path, "P6", rows, cols, rgb, 3);
}

std::vector<std::uint8_t> read_pgm(const std::string& path, int* rows,
                                   int* cols) {
  return read_pnm(path, "P5", rows, cols, 1);
}

std::vector<std::uint8_t> read_ppm(const std::string& path, int* rows,
                                   int* cols) {
  return read_pnm(path, "P6", rows, cols, 3);
}

}  // namespace hsiclass
