#include "hsiclass/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <thread>

#include "hsiclass/errors.hpp"
#include "hsiclass/serial_ref.hpp"

namespace hsiclass {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void stage_delay(int ms) {
  if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
}

void maybe_dump(const PipelineResult& result, const PipelineConfig& config) {
  if (config.dump_intermediates) dump_intermediates(result, config.dump_prefix);
}

std::ofstream open_neighbor_dump(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write neighbor dump " + path);
  return out;
}

void dump_pca_debug(const PcaDebug& debug, const std::string& prefix) {
  write_band_means(debug.means, prefix + ".means.txt");
  write_sym_matrix(debug.cov, prefix + ".cov.txt");
  write_eigenvalues(debug.eigenvalues, prefix + ".eigenvalues.txt");
}

}  // namespace

void PipelineConfig::validate() const {
  knn.validate();
  if (repetitions < 1)
    throw ParameterError("repetitions must be >= 1, got " +
                         std::to_string(repetitions));
  if (stage_delays.svm_ms < 0 || stage_delays.pca_ms < 0 ||
      stage_delays.knn_ms < 0)
    throw ParameterError("stage delays must be >= 0");
  if (dump_intermediates && dump_prefix.empty())
    throw ParameterError("dump_intermediates needs a dump_prefix");
}

PipelineResult run_ss_pipeline(const HsCube& cube, const SvmModel& model,
                               const PipelineConfig& config) {
  config.validate();
  if (config.serial_reference) return run_serial_reference(cube, model, config);
  cube.validate();
  model.validate();
  if (cube.bands != model.bands)
    throw DimensionError("cube has " + std::to_string(cube.bands) +
                         " bands, model expects " +
                         std::to_string(model.bands));

  PipelineResult result;
  const Clock::time_point start = Clock::now();

  // Level 1: PCA on a helper thread, SVM on this one. The join is the
  // barrier; KNN must never see a partially built I or P.
  PcaDebug pca_debug;
  std::exception_ptr pca_error;
  std::thread pca_thread([&] {
    try {
      const Clock::time_point t0 = Clock::now();
      stage_delay(config.stage_delays.pca_ms);
      result.one_band = pca_one_band(
          cube, config.workers,
          config.pca_debug_prefix.empty() ? nullptr : &pca_debug);
      result.timings.pca_s = seconds_since(t0);
    } catch (...) {
      pca_error = std::current_exception();
    }
  });
  try {
    const Clock::time_point t0 = Clock::now();
    stage_delay(config.stage_delays.svm_ms);
    result.raw = svm_probability_maps(cube, model, config.workers);
    result.timings.svm_s = seconds_since(t0);
  } catch (...) {
    pca_thread.join();
    throw;
  }
  pca_thread.join();
  if (pca_error) std::rethrow_exception(pca_error);

  // Level 2: KNN filter and argmax.
  {
    const Clock::time_point t0 = Clock::now();
    stage_delay(config.stage_delays.knn_ms);
    if (config.neighbor_dump_path.empty()) {
      auto [map, filtered] = knn_classify(result.raw, result.one_band,
                                          config.knn, config.workers, nullptr);
      result.map = std::move(map);
      result.filtered = std::move(filtered);
    } else {
      std::ofstream dump = open_neighbor_dump(config.neighbor_dump_path);
      auto [map, filtered] = knn_classify(result.raw, result.one_band,
                                          config.knn, config.workers, &dump);
      result.map = std::move(map);
      result.filtered = std::move(filtered);
    }
    result.timings.knn_s = seconds_since(t0);
  }
  result.timings.total_s = seconds_since(start);

  if (!config.pca_debug_prefix.empty())
    dump_pca_debug(pca_debug, config.pca_debug_prefix);
  maybe_dump(result, config);
  return result;
}

PipelineResult run_serial_reference(const HsCube& cube, const SvmModel& model,
                                    const PipelineConfig& config) {
  config.validate();
  cube.validate();
  model.validate();
  if (cube.bands != model.bands)
    throw DimensionError("cube has " + std::to_string(cube.bands) +
                         " bands, model expects " +
                         std::to_string(model.bands));

  PipelineResult result;
  const Clock::time_point start = Clock::now();
  PcaDebug pca_debug;
  {
    const Clock::time_point t0 = Clock::now();
    stage_delay(config.stage_delays.pca_ms);
    result.one_band = serial::pca_one_band(
        cube, config.pca_debug_prefix.empty() ? nullptr : &pca_debug);
    result.timings.pca_s = seconds_since(t0);
  }
  {
    const Clock::time_point t0 = Clock::now();
    stage_delay(config.stage_delays.svm_ms);
    result.raw = serial::svm_probability_maps(cube, model);
    result.timings.svm_s = seconds_since(t0);
  }
  {
    const Clock::time_point t0 = Clock::now();
    stage_delay(config.stage_delays.knn_ms);
    auto [map, filtered] =
        serial::knn_classify(result.raw, result.one_band, config.knn);
    result.map = std::move(map);
    result.filtered = std::move(filtered);
    result.timings.knn_s = seconds_since(t0);
    if (!config.neighbor_dump_path.empty()) {
      // The serial path selects with a full sort; dump the same lists it used.
      std::ofstream dump = open_neighbor_dump(config.neighbor_dump_path);
      std::vector<std::int32_t> neighbors(
          static_cast<std::size_t>(config.knn.k));
      for (std::int64_t p = 0; p < result.one_band.pixel_count(); ++p) {
        serial::nearest_neighbors_sorted(result.one_band, p, config.knn,
                                         neighbors);
        for (int i = 0; i < config.knn.k; ++i)
          dump << neighbors[static_cast<std::size_t>(i)]
               << (i + 1 == config.knn.k ? "\n" : " ");
      }
    }
  }
  result.timings.total_s = seconds_since(start);

  if (!config.pca_debug_prefix.empty())
    dump_pca_debug(pca_debug, config.pca_debug_prefix);
  maybe_dump(result, config);
  return result;
}

// ---------------------------------------------------------------------------
// Intermediate files
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

void write_prob_maps(const ProbabilityMaps& maps, const std::string& stem) {
  maps.validate();
  {
    std::ofstream hdr(stem + ".hdr", std::ios::trunc);
    if (!hdr) throw IoError("cannot write header " + stem + ".hdr");
    hdr << "rows=" << maps.rows << "\n";
    hdr << "cols=" << maps.cols << "\n";
    hdr << "classes=" << maps.n_classes << "\n";
    hdr << "role=" << (maps.role == MapRole::Raw ? "raw" : "filtered") << "\n";
    hdr << "format=float32le\n";
    if (!hdr) throw IoError("short write on header " + stem + ".hdr");
  }
  std::ofstream raw(stem + ".raw", std::ios::binary | std::ios::trunc);
  if (!raw) throw IoError("cannot write data " + stem + ".raw");
  raw.write(reinterpret_cast<const char*>(maps.values.data()),
            static_cast<std::streamsize>(maps.values.size() * 4));
  if (!raw) throw IoError("short write on data " + stem + ".raw");
}

ProbabilityMaps read_prob_maps(const std::string& stem) {
  const std::string hdr_path = stem + ".hdr";
  std::ifstream hdr(hdr_path);
  if (!hdr) throw IoError("cannot open header " + hdr_path);
  ProbabilityMaps maps;
  bool have_role = false;
  std::string line;
  int lineno = 0;
  while (std::getline(hdr, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw FormatError(hdr_path + ":" + std::to_string(lineno) +
                        ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key == "rows") maps.rows = std::stoi(value);
    else if (key == "cols") maps.cols = std::stoi(value);
    else if (key == "classes") maps.n_classes = std::stoi(value);
    else if (key == "role") {
      if (value == "raw") maps.role = MapRole::Raw;
      else if (value == "filtered") maps.role = MapRole::Filtered;
      else throw FormatError(hdr_path + ": unknown role '" + value + "'");
      have_role = true;
    } else if (key == "format") {
      if (value != "float32le")
        throw FormatError(hdr_path + ": unsupported format '" + value + "'");
    }
  }
  if (maps.rows < 1 || maps.cols < 1 || maps.n_classes < 2 || !have_role)
    throw FormatError(hdr_path + ": missing or bad keys (need rows, cols, "
                      "classes, role)");
  const std::string raw_path = stem + ".raw";
  std::ifstream raw(raw_path, std::ios::binary | std::ios::ate);
  if (!raw) throw IoError("cannot open data " + raw_path);
  const std::int64_t size = static_cast<std::int64_t>(raw.tellg());
  const std::int64_t expected =
      maps.pixel_count() * maps.n_classes * 4;
  if (size != expected)
    throw FormatError(raw_path + ": size " + std::to_string(size) +
                      " bytes, header implies " + std::to_string(expected));
  raw.seekg(0);
  maps.values.resize(static_cast<std::size_t>(expected / 4));
  raw.read(reinterpret_cast<char*>(maps.values.data()), expected);
  if (!raw) throw IoError("short read on data " + raw_path);
  maps.validate();
  return maps;
}

void write_one_band(const OneBandImage& image, const std::string& stem) {
  image.validate();
  HsCube cube = make_cube(image.rows, image.cols, 1, Layout::BandMajor);
  cube.data = image.values;
  save_cube(cube, stem);
}

OneBandImage read_one_band(const std::string& stem) {
  const HsCube cube = load_cube(stem);
  if (cube.bands != 1)
    throw FormatError(stem + ": expected a one-band cube, got " +
                      std::to_string(cube.bands) + " bands");
  OneBandImage image;
  image.rows = cube.rows;
  image.cols = cube.cols;
  image.values = cube.data;
  image.validate();
  return image;
}

void dump_intermediates(const PipelineResult& result,
                        const std::string& prefix) {
  if (prefix.empty()) throw ParameterError("dump prefix is empty");
  write_one_band(result.one_band, prefix + ".I");
  write_prob_maps(result.raw, prefix + ".P");
  write_prob_maps(result.filtered, prefix + ".O");
}

}  // namespace hsiclass
