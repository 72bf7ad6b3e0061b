#include "hsiclass/synth.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "hsiclass/errors.hpp"
#include "hsiclass/rng.hpp"

namespace hsiclass {

namespace {

// Smallest g with g*g >= n: side of the blob grid.
int grid_side(int n_classes) {
  int g = 1;
  while (g * g < n_classes) ++g;
  return g;
}

std::uint8_t blob_label(int r, int c, int rows, int cols, int n_classes) {
  const int g = grid_side(n_classes);
  const int gr = std::min(g - 1, r * g / rows);
  const int gc = std::min(g - 1, c * g / cols);
  return static_cast<std::uint8_t>((gr * g + gc) % n_classes);
}

void check_distinct(const std::vector<std::vector<double>>& means) {
  for (std::size_t a = 0; a < means.size(); ++a)
    for (std::size_t b = a + 1; b < means.size(); ++b)
      if (means[a] == means[b])
        throw ParameterError("class means " + std::to_string(a) + " and " +
                             std::to_string(b) + " are identical");
}

}  // namespace

void SyntheticScene::validate() const {
  if (rows < 1 || cols < 1 || bands < 1)
    throw ParameterError("scene shape must be positive");
  if (n_classes < 2)
    throw ParameterError("scene needs at least 2 classes, got " +
                         std::to_string(n_classes));
  if (n_classes > 255)
    throw ParameterError("scene class count exceeds the 255 label limit");
  if (!(sigma >= 0.0))
    throw ParameterError("sigma must be >= 0, got " + std::to_string(sigma));
  const int g = grid_side(n_classes);
  if (rows < g || cols < g)
    throw ParameterError("scene " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " cannot hold a " +
                         std::to_string(g) + "x" + std::to_string(g) +
                         " blob grid for " + std::to_string(n_classes) +
                         " classes");
  if (!class_means.empty()) {
    if (static_cast<int>(class_means.size()) != n_classes)
      throw ParameterError("scene lists " +
                           std::to_string(class_means.size()) +
                           " mean spectra for " + std::to_string(n_classes) +
                           " classes");
    for (const auto& mean : class_means)
      if (static_cast<int>(mean.size()) != bands)
        throw ParameterError("mean spectrum length " +
                             std::to_string(mean.size()) +
                             " does not match " + std::to_string(bands) +
                             " bands");
    check_distinct(class_means);
  }
}

std::vector<std::vector<double>> default_class_means(int n_classes,
                                                     int bands) {
  std::vector<std::vector<double>> means(n_classes,
                                         std::vector<double>(bands));
  for (int c = 0; c < n_classes; ++c)
    for (int b = 0; b < bands; ++b)
      means[c][b] =
          0.5 + 0.4 * std::sin(2.0 * M_PI *
                               (static_cast<double>(b) / bands +
                                static_cast<double>(c) / n_classes));
  return means;
}

std::vector<SvmClass> default_class_table(int n_classes) {
  std::vector<SvmClass> classes(n_classes);
  if (n_classes == 4) {
    classes[0] = {0, "tumor", {255, 0, 0}};
    classes[1] = {1, "healthy", {0, 255, 0}};
    classes[2] = {2, "hypervascularized", {0, 0, 255}};
    classes[3] = {3, "background", {0, 0, 0}};
    return classes;
  }
  for (int i = 0; i < n_classes; ++i) {
    classes[i].id = i;
    classes[i].name = "class" + std::to_string(i);
    classes[i].color = {static_cast<std::uint8_t>((i * 97 + 31) % 256),
                        static_cast<std::uint8_t>((i * 57 + 101) % 256),
                        static_cast<std::uint8_t>((i * 173 + 7) % 256)};
  }
  return classes;
}

std::pair<HsCube, ClassificationMap> generate_scene(
    const SyntheticScene& scene) {
  scene.validate();
  const auto means = scene.class_means.empty()
                         ? default_class_means(scene.n_classes, scene.bands)
                         : scene.class_means;
  check_distinct(means);

  ClassificationMap truth;
  truth.rows = scene.rows;
  truth.cols = scene.cols;
  truth.labels.resize(static_cast<std::size_t>(truth.pixel_count()));
  for (int r = 0; r < scene.rows; ++r)
    for (int c = 0; c < scene.cols; ++c)
      truth.labels[static_cast<std::size_t>(r) * scene.cols + c] =
          blob_label(r, c, scene.rows, scene.cols, scene.n_classes);

  HsCube cube = make_cube(scene.rows, scene.cols, scene.bands,
                          Layout::BandMajor);
  const std::int64_t pixels = cube.pixel_count();
  // Noise is indexed by (pixel, band) alone, so the cube is a pure function
  // of the seed whatever the generation or storage order.
  for (int b = 0; b < scene.bands; ++b) {
    float* plane = cube.data.data() + static_cast<std::size_t>(b) * pixels;
    for (std::int64_t p = 0; p < pixels; ++p) {
      const double mean = means[truth.labels[static_cast<std::size_t>(p)]][b];
      const double noise =
          scene.sigma == 0.0
              ? 0.0
              : scene.sigma *
                    rng::gaussian(scene.seed,
                                  static_cast<std::uint64_t>(p) * scene.bands +
                                      static_cast<std::uint64_t>(b));
      plane[p] = static_cast<float>(mean + noise);
    }
  }
  return {std::move(cube), std::move(truth)};
}

SvmModel analytic_model(const std::vector<std::vector<double>>& means,
                        double sigma) {
  static_cast<void>(sigma);
  const int C = static_cast<int>(means.size());
  if (C < 2)
    throw ParameterError("analytic model needs at least 2 class means");
  const int bands = static_cast<int>(means[0].size());
  for (const auto& mean : means)
    if (static_cast<int>(mean.size()) != bands)
      throw ParameterError("class means have mixed lengths");
  check_distinct(means);

  SvmModel model;
  model.n_classes = C;
  model.bands = bands;
  model.classes = default_class_table(C);
  model.pairs.reserve(static_cast<std::size_t>(model.n_pairs()));
  for (int a = 0; a < C; ++a) {
    for (int b = a + 1; b < C; ++b) {
      SvmPair pair;
      pair.a = a;
      pair.b = b;
      pair.weights.resize(bands);
      double norm_sq = 0.0;
      double dot_mid = 0.0;
      for (int k = 0; k < bands; ++k) {
        const double w = means[a][k] - means[b][k];
        pair.weights[k] = w;
        norm_sq += w * w;
        dot_mid += w * (means[a][k] + means[b][k]) / 2.0;
      }
      pair.bias = -dot_mid;
      pair.sigmoid_a = -4.0 / std::max(norm_sq, 1e-12);
      pair.sigmoid_b = 0.0;
      model.pairs.push_back(std::move(pair));
    }
  }
  model.validate();
  return model;
}

void corrupt_probability_maps(ProbabilityMaps& maps, double fraction,
                              std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw ParameterError("corruption fraction must be in [0,1], got " +
                         std::to_string(fraction));
  maps.validate();
  const std::int64_t pixels = maps.pixel_count();
  const int C = maps.n_classes;
  for (std::int64_t p = 0; p < pixels; ++p) {
    const std::uint64_t pc = static_cast<std::uint64_t>(p);
    if (rng::uniform01(seed, 2 * pc) >= fraction) continue;
    float* row = maps.values.data() + static_cast<std::size_t>(p) * C;
    int best = 0;
    for (int t = 1; t < C; ++t)
      if (row[t] > row[best]) best = t;
    // One-hot row for a uniformly chosen class other than the argmax.
    int wrong = static_cast<int>(
        rng::uniform_below(seed, 2 * pc + 1, static_cast<std::uint32_t>(C - 1)));
    if (wrong >= best) ++wrong;
    for (int t = 0; t < C; ++t) row[t] = (t == wrong) ? 1.0f : 0.0f;
  }
}

double map_accuracy(const ClassificationMap& predicted,
                    const ClassificationMap& truth) {
  if (predicted.rows != truth.rows || predicted.cols != truth.cols)
    throw DimensionError("maps are " + std::to_string(predicted.rows) + "x" +
                         std::to_string(predicted.cols) + " vs " +
                         std::to_string(truth.rows) + "x" +
                         std::to_string(truth.cols));
  const std::size_t n = predicted.labels.size();
  std::size_t hits = 0;
  for (std::size_t p = 0; p < n; ++p)
    if (predicted.labels[p] == truth.labels[p]) ++hits;
  return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Scene spec files
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

SyntheticScene load_scene_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene spec " + path);
  SyntheticScene scene;
  std::map<int, std::vector<double>> means;
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
    const std::string where = path + ":" + std::to_string(lineno);
    try {
      if (key == "seed") {
        scene.seed = std::stoull(value);
      } else if (key == "rows") {
        scene.rows = std::stoi(value);
      } else if (key == "cols") {
        scene.cols = std::stoi(value);
      } else if (key == "bands") {
        scene.bands = std::stoi(value);
      } else if (key == "classes") {
        scene.n_classes = std::stoi(value);
      } else if (key == "sigma") {
        scene.sigma = std::stod(value);
      } else if (key.starts_with("mean_")) {
        const int c = std::stoi(key.substr(5));
        std::istringstream vs(value);
        std::vector<double> spectrum;
        double v;
        while (vs >> v) spectrum.push_back(v);
        if (!vs.eof())
          throw FormatError(where + ": bad spectrum value in '" + value + "'");
        means[c] = std::move(spectrum);
      }
      // Unknown keys are ignored, matching the cube header convention.
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception&) {
      throw FormatError(where + ": bad value for " + key + ": '" + value +
                        "'");
    }
  }
  if (!means.empty()) {
    scene.class_means.resize(scene.n_classes);
    for (int c = 0; c < scene.n_classes; ++c) {
      const auto it = means.find(c);
      if (it == means.end())
        throw FormatError(path + ": mean_" + std::to_string(c) +
                          " missing (means must cover every class)");
      scene.class_means[c] = it->second;
    }
    if (static_cast<int>(means.size()) != scene.n_classes)
      throw FormatError(path + ": mean_<c> keys exceed the class count");
  }
  scene.validate();
  return scene;
}

void save_scene_spec(const SyntheticScene& scene, const std::string& path) {
  scene.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write scene spec " + path);
  char buf[32];
  out << "seed=" << scene.seed << "\n";
  out << "rows=" << scene.rows << "\n";
  out << "cols=" << scene.cols << "\n";
  out << "bands=" << scene.bands << "\n";
  out << "classes=" << scene.n_classes << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", scene.sigma);
  out << "sigma=" << buf << "\n";
  for (std::size_t c = 0; c < scene.class_means.size(); ++c) {
    out << "mean_" << c << "=";
    for (std::size_t b = 0; b < scene.class_means[c].size(); ++b) {
      std::snprintf(buf, sizeof buf, "%.17g", scene.class_means[c][b]);
      out << buf << (b + 1 == scene.class_means[c].size() ? "\n" : " ");
    }
  }
  if (!out) throw IoError("short write on scene spec " + path);
}

}  // namespace hsiclass
