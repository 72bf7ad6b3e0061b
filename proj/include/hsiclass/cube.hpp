#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hsiclass {

// Sample order of a cube buffer.
//   BandMajor  (bsq): data[b * pixels + p], one full band plane at a time.
//   PixelMajor (bip): data[p * bands + b], one full spectrum at a time.
// Flat pixel index p = r * cols + c throughout.
enum class Layout { BandMajor, PixelMajor };

const char* layout_name(Layout layout);
Layout parse_layout(const std::string& text);

// Text sidecar describing a raw sample file. Samples are always little-endian
// binary32 on disk, whatever the host does in memory.
struct CubeHeader {
  int rows = 0;
  int cols = 0;
  int bands = 0;
  Layout layout = Layout::BandMajor;
  std::string image_id;  // optional

  std::int64_t pixel_count() const {
    return static_cast<std::int64_t>(rows) * cols;
  }
  std::int64_t sample_count() const { return pixel_count() * bands; }
  void validate() const;
};

struct HsCube {
  int rows = 0;
  int cols = 0;
  int bands = 0;
  Layout layout = Layout::BandMajor;
  std::string image_id;
  std::vector<float> data;

  std::int64_t pixel_count() const {
    return static_cast<std::int64_t>(rows) * cols;
  }
  std::size_t sample_index(std::int64_t pixel, int band) const {
    return layout == Layout::BandMajor
               ? static_cast<std::size_t>(band) * pixel_count() + pixel
               : static_cast<std::size_t>(pixel) * bands + band;
  }
  float sample(std::int64_t pixel, int band) const {
    return data[sample_index(pixel, band)];
  }
  // Shape sanity plus a full finite-sample scan.
  void validate() const;
};

HsCube make_cube(int rows, int cols, int bands, Layout layout);

// File pair convention: <stem>.hdr next to <stem>.raw. Accepts either the
// stem or the .hdr path and returns {header, data} paths.
std::pair<std::string, std::string> cube_paths(const std::string& stem_or_hdr);

CubeHeader read_cube_header(const std::string& path);
void write_cube_header(const std::string& path, const CubeHeader& header);

HsCube load_cube(const std::string& header_path, const std::string& data_path);
HsCube load_cube(const std::string& stem_or_hdr);
void save_cube(const HsCube& cube, const std::string& stem_or_hdr);

// Returns a copy reordered to `target`; a no-op copy when already there.
HsCube convert_layout(const HsCube& cube, Layout target);

// Size in bytes of the raw sample file for a given shape.
std::int64_t raw_data_bytes(int rows, int cols, int bands);

// Grayscale (P5) and RGB (P6) writers for label and legend images,
// binary, maxval 255. rgb holds 3 bytes per pixel.
void write_pgm(const std::string& path, int rows, int cols,
               std::span<const std::uint8_t> gray);
void write_ppm(const std::string& path, int rows, int cols,
               std::span<const std::uint8_t> rgb);
std::vector<std::uint8_t> read_pgm(const std::string& path, int* rows,
                                   int* cols);
std::vector<std::uint8_t> read_ppm(const std::string& path, int* rows,
                                   int* cols);

}  // namespace hsiclass
