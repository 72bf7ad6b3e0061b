#include "hsiclass/svm.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hsiclass/errors.hpp"
#include "hsiclass/parallel.hpp"

namespace hsiclass {

int pair_index(int a, int b, int n_classes) {
  return a * (2 * n_classes - a - 1) / 2 + (b - a - 1);
}

void SvmModel::validate() const {
  if (n_classes < 2)
    throw ValidationError("model needs at least 2 classes, got " +
                          std::to_string(n_classes));
  if (n_classes > 255)
    throw ValidationError("model class count " + std::to_string(n_classes) +
                          " exceeds the 255 label limit");
  if (bands < 1)
    throw ValidationError("model band count must be positive, got " +
                          std::to_string(bands));
  if (static_cast<int>(classes.size()) != n_classes)
    throw ValidationError("model declares " + std::to_string(n_classes) +
                          " classes but lists " +
                          std::to_string(classes.size()));
  for (int i = 0; i < n_classes; ++i) {
    if (classes[i].id != i)
      throw ValidationError("class ids must be 0.." +
                            std::to_string(n_classes - 1) + " in order; slot " +
                            std::to_string(i) + " has id " +
                            std::to_string(classes[i].id));
    if (classes[i].name.empty())
      throw ValidationError("class " + std::to_string(i) + " has empty name");
    if (classes[i].name.find_first_of(" \t\r\n") != std::string::npos)
      throw ValidationError("class name '" + classes[i].name +
                            "' contains whitespace");
  }
  if (static_cast<int>(pairs.size()) != n_pairs())
    throw ValidationError("model needs " + std::to_string(n_pairs()) +
                          " pairs, got " + std::to_string(pairs.size()));
  int q = 0;
  for (int a = 0; a < n_classes; ++a) {
    for (int b = a + 1; b < n_classes; ++b, ++q) {
      const SvmPair& pr = pairs[q];
      if (pr.a != a || pr.b != b)
        throw ValidationError("pair " + std::to_string(q) + " must be (" +
                              std::to_string(a) + "," + std::to_string(b) +
                              "), got (" + std::to_string(pr.a) + "," +
                              std::to_string(pr.b) + ")");
      if (static_cast<int>(pr.weights.size()) != bands)
        throw ValidationError("pair (" + std::to_string(a) + "," +
                              std::to_string(b) + ") has " +
                              std::to_string(pr.weights.size()) +
                              " weights, model has " + std::to_string(bands) +
                              " bands");
      if (!std::isfinite(pr.sigmoid_a) || !std::isfinite(pr.sigmoid_b) ||
          !std::isfinite(pr.bias))
        throw ValidationError("pair (" + std::to_string(a) + "," +
                              std::to_string(b) + ") has non-finite scalars");
      for (double w : pr.weights)
        if (!std::isfinite(w))
          throw ValidationError("pair (" + std::to_string(a) + "," +
                                std::to_string(b) +
                                ") has non-finite weight");
    }
  }
}

// ---------------------------------------------------------------------------
// Model file
// ---------------------------------------------------------------------------

namespace {

// Pull one whitespace-separated token or fail with context.
std::string need_token(std::istream& in, const std::string& path,
                       const char* what) {
  std::string tok;
  if (!(in >> tok))
    throw FormatError(path + ": unexpected end of file, expected " +
                      std::string(what));
  return tok;
}

long need_long(std::istream& in, const std::string& path, const char* what) {
  const std::string tok = need_token(in, path, what);
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size())
    throw FormatError(path + ": expected integer " + std::string(what) +
                      ", got '" + tok + "'");
  return v;
}

double need_double(std::istream& in, const std::string& path,
                   const char* what) {
  const std::string tok = need_token(in, path, what);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size())
    throw FormatError(path + ": expected number " + std::string(what) +
                      ", got '" + tok + "'");
  return v;
}

void need_keyword(std::istream& in, const std::string& path,
                  const char* keyword) {
  const std::string tok = need_token(in, path, keyword);
  if (tok != keyword)
    throw FormatError(path + ": expected '" + keyword + "', got '" + tok +
                      "'");
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SvmModel load_svm_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model " + path);
  SvmModel m;
  need_keyword(in, path, "classes");
  m.n_classes = static_cast<int>(need_long(in, path, "class count"));
  need_keyword(in, path, "bands");
  m.bands = static_cast<int>(need_long(in, path, "band count"));
  if (m.n_classes < 2 || m.bands < 1)
    throw FormatError(path + ": bad counts (classes " +
                      std::to_string(m.n_classes) + ", bands " +
                      std::to_string(m.bands) + ")");
  m.classes.resize(m.n_classes);
  for (int i = 0; i < m.n_classes; ++i) {
    need_keyword(in, path, "class");
    SvmClass& c = m.classes[i];
    c.id = static_cast<int>(need_long(in, path, "class id"));
    c.name = need_token(in, path, "class name");
    for (int ch = 0; ch < 3; ++ch) {
      const long v = need_long(in, path, "color component");
      if (v < 0 || v > 255)
        throw FormatError(path + ": color component " + std::to_string(v) +
                          " out of [0,255]");
      c.color[ch] = static_cast<std::uint8_t>(v);
    }
  }
  const int np = m.n_pairs();
  m.pairs.resize(np);
  for (int q = 0; q < np; ++q) {
    need_keyword(in, path, "pair");
    SvmPair& pr = m.pairs[q];
    pr.a = static_cast<int>(need_long(in, path, "pair a"));
    pr.b = static_cast<int>(need_long(in, path, "pair b"));
    pr.sigmoid_a = need_double(in, path, "sigmoid A");
    pr.sigmoid_b = need_double(in, path, "sigmoid B");
    pr.bias = need_double(in, path, "bias");
    pr.weights.resize(m.bands);
    for (int k = 0; k < m.bands; ++k)
      pr.weights[k] = need_double(in, path, "weight");
  }
  std::string trailing;
  if (in >> trailing)
    throw FormatError(path + ": trailing content '" + trailing + "'");
  m.validate();
  return m;
}

void save_svm_model(const SvmModel& model, const std::string& path) {
  model.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write model " + path);
  out << "classes " << model.n_classes << " bands " << model.bands << "\n";
  for (const SvmClass& c : model.classes)
    out << "class " << c.id << " " << c.name << " " << int(c.color[0]) << " "
        << int(c.color[1]) << " " << int(c.color[2]) << "\n";
  for (const SvmPair& pr : model.pairs) {
    out << "pair " << pr.a << " " << pr.b << " " << fmt_double(pr.sigmoid_a)
        << " " << fmt_double(pr.sigmoid_b) << " " << fmt_double(pr.bias)
        << "\n";
    for (int k = 0; k < model.bands; ++k)
      out << fmt_double(pr.weights[k]) << (k + 1 == model.bands ? "\n" : " ");
  }
  if (!out) throw IoError("short write on model " + path);
}

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

void ProbabilityMaps::validate() const {
  if (rows < 1 || cols < 1)
    throw ValidationError("probability map shape must be positive");
  if (n_classes < 2)
    throw ValidationError("probability map needs at least 2 classes");
  const auto expected = static_cast<std::size_t>(pixel_count()) * n_classes;
  if (values.size() != expected)
    throw ValidationError("probability map length " +
                          std::to_string(values.size()) + " does not match " +
                          std::to_string(pixel_count()) + " pixels x " +
                          std::to_string(n_classes) + " classes");
  const std::int64_t pixels = pixel_count();
  for (std::int64_t p = 0; p < pixels; ++p) {
    double sum = 0.0;
    for (int t = 0; t < n_classes; ++t) {
      const float v = values[static_cast<std::size_t>(p) * n_classes + t];
      if (!(v >= 0.0f && v <= 1.0f))
        throw ValidationError("probability out of [0,1] at pixel " +
                              std::to_string(p) + " class " +
                              std::to_string(t));
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-4)
      throw ValidationError("probability row " + std::to_string(p) +
                            " sums to " + std::to_string(sum));
  }
}

double sigmoid_probability(double decision, double a, double b) {
  double z = a * decision + b;
  if (z > 500.0) z = 500.0;
  if (z < -500.0) z = -500.0;
  double r = 1.0 / (1.0 + std::exp(z));
  if (r < kProbFloor) r = kProbFloor;
  if (r > kProbCeil) r = kProbCeil;
  return r;
}

DecisionValues decision_values(const HsCube& cube, const SvmModel& model,
                               int workers) {
  cube.validate();
  model.validate();
  if (cube.bands != model.bands)
    throw DimensionError("cube has " + std::to_string(cube.bands) +
                         " bands, model expects " +
                         std::to_string(model.bands));
  DecisionValues out;
  out.pixels = cube.pixel_count();
  out.n_pairs = model.n_pairs();
  out.values.resize(static_cast<std::size_t>(out.pixels) * out.n_pairs);
  const std::int64_t spectrum_stride =
      cube.layout == Layout::BandMajor ? out.pixels : 1;
  const int np = out.n_pairs;
  const int bands = cube.bands;
#pragma omp parallel for num_threads(resolve_workers(workers)) schedule(static)
  for (std::int64_t p = 0; p < out.pixels; ++p) {
    const float* spectrum =
        cube.data.data() +
        (cube.layout == Layout::BandMajor ? p
                                          : p * static_cast<std::int64_t>(bands));
    double* row = out.values.data() + static_cast<std::size_t>(p) * np;
    for (int q = 0; q < np; ++q) {
      const SvmPair& pr = model.pairs[q];
      double acc = 0.0;
      for (int k = 0; k < bands; ++k)
        acc += pr.weights[k] *
               static_cast<double>(spectrum[k * spectrum_stride]);
      row[q] = acc + pr.bias;
    }
  }
  return out;
}

PairProbabilities binary_probabilities(const DecisionValues& decisions,
                                       const SvmModel& model, int workers) {
  model.validate();
  if (decisions.n_pairs != model.n_pairs())
    throw DimensionError("decision pair count " +
                         std::to_string(decisions.n_pairs) +
                         " does not match model (" +
                         std::to_string(model.n_pairs()) + ")");
  PairProbabilities out;
  out.pixels = decisions.pixels;
  out.n_pairs = decisions.n_pairs;
  out.values.resize(decisions.values.size());
  const int np = out.n_pairs;
#pragma omp parallel for num_threads(resolve_workers(workers)) schedule(static)
  for (std::int64_t p = 0; p < out.pixels; ++p) {
    const std::size_t base = static_cast<std::size_t>(p) * np;
    for (int q = 0; q < np; ++q)
      out.values[base + q] =
          sigmoid_probability(decisions.values[base + q],
                              model.pairs[q].sigmoid_a,
                              model.pairs[q].sigmoid_b);
  }
  return out;
}

std::vector<double> couple_probabilities(std::span<const double> pair_probs,
                                         int n_classes, bool* converged) {
  if (n_classes < 2)
    throw ParameterError("coupling needs at least 2 classes, got " +
                         std::to_string(n_classes));
  const int np = n_classes * (n_classes - 1) / 2;
  if (static_cast<int>(pair_probs.size()) != np)
    throw DimensionError("coupling expects " + std::to_string(np) +
                         " pair probabilities, got " +
                         std::to_string(pair_probs.size()));
  for (double r : pair_probs)
    if (!(r > 0.0 && r < 1.0))
      throw ParameterError("pair probability " + std::to_string(r) +
                           " outside (0,1)");
  if (converged) *converged = true;

  // Two classes: the fixed point is the binary probability itself.
  if (n_classes == 2)
    return {pair_probs[0], 1.0 - pair_probs[0]};

  const int C = n_classes;
  // rr(i, j) = probability of class i within pair {i, j}.
  auto rr = [&](int i, int j) {
    return i < j ? pair_probs[pair_index(i, j, C)]
                 : 1.0 - pair_probs[pair_index(j, i, C)];
  };
  std::vector<double> Q(static_cast<std::size_t>(C) * C, 0.0);
  for (int t = 0; t < C; ++t) {
    for (int j = 0; j < C; ++j) {
      if (j == t) continue;
      Q[static_cast<std::size_t>(t) * C + t] += rr(j, t) * rr(j, t);
      Q[static_cast<std::size_t>(t) * C + j] = -rr(j, t) * rr(t, j);
    }
  }

  std::vector<double> p(C, 1.0 / C), Qp(C, 0.0), prev(C);
  double pQp = 0.0;
  for (int t = 0; t < C; ++t) {
    double acc = 0.0;
    for (int j = 0; j < C; ++j) acc += Q[static_cast<std::size_t>(t) * C + j] * p[j];
    Qp[t] = acc;
    pQp += p[t] * acc;
  }

  const double eps = 0.005 / C;
  const int max_sweeps = 100 * C;
  bool ok = false;
  for (int sweep = 0; sweep < max_sweeps && !ok; ++sweep) {
    prev = p;
    for (int t = 0; t < C; ++t) {
      const double qtt = Q[static_cast<std::size_t>(t) * C + t];
      const double diff = (-Qp[t] + pQp) / qtt;
      p[t] += diff;
      // Incremental renormalization keeps sum(p) = 1 after every component.
      pQp = (pQp + diff * (diff * qtt + 2.0 * Qp[t])) /
            ((1.0 + diff) * (1.0 + diff));
      for (int j = 0; j < C; ++j) {
        Qp[j] = (Qp[j] + diff * Q[static_cast<std::size_t>(t) * C + j]) /
                (1.0 + diff);
        p[j] /= (1.0 + diff);
      }
    }
    double max_change = 0.0;
    for (int t = 0; t < C; ++t)
      max_change = std::max(max_change, std::abs(p[t] - prev[t]));
    ok = max_change < eps;
  }
  if (!ok && converged) *converged = false;
  return p;
}

namespace detail {

void pixel_probabilities(const float* spectrum, std::int64_t stride,
                         const SvmModel& model, std::span<double> pair_buf,
                         float* out_row) {
  const int np = model.n_pairs();
  for (int q = 0; q < np; ++q) {
    const SvmPair& pr = model.pairs[q];
    double acc = 0.0;
    for (int k = 0; k < model.bands; ++k)
      acc += pr.weights[k] * static_cast<double>(spectrum[k * stride]);
    pair_buf[q] =
        sigmoid_probability(acc + pr.bias, pr.sigmoid_a, pr.sigmoid_b);
  }
  const std::vector<double> p =
      couple_probabilities(pair_buf.subspan(0, np), model.n_classes, nullptr);
  for (int t = 0; t < model.n_classes; ++t)
    out_row[t] = static_cast<float>(p[t]);
}

}  // namespace detail

ProbabilityMaps svm_probability_maps(const HsCube& cube, const SvmModel& model,
                                     int workers) {
  cube.validate();
  model.validate();
  if (cube.bands != model.bands)
    throw DimensionError("cube has " + std::to_string(cube.bands) +
                         " bands, model expects " +
                         std::to_string(model.bands));
  ProbabilityMaps maps;
  maps.rows = cube.rows;
  maps.cols = cube.cols;
  maps.n_classes = model.n_classes;
  maps.role = MapRole::Raw;
  maps.values.resize(static_cast<std::size_t>(maps.pixel_count()) *
                     maps.n_classes);
  const std::int64_t pixels = cube.pixel_count();
  const std::int64_t stride =
      cube.layout == Layout::BandMajor ? pixels : 1;
  const std::int64_t pixel_step =
      cube.layout == Layout::BandMajor ? 1 : cube.bands;
#pragma omp parallel num_threads(resolve_workers(workers))
  {
    std::vector<double> pair_buf(model.n_pairs());
#pragma omp for schedule(static)
    for (std::int64_t p = 0; p < pixels; ++p)
      detail::pixel_probabilities(
          cube.data.data() + p * pixel_step, stride, model, pair_buf,
          maps.values.data() + static_cast<std::size_t>(p) * maps.n_classes);
  }
  return maps;
}

ClassificationMap classify_argmax(const ProbabilityMaps& maps) {
  ClassificationMap map;
  map.rows = maps.rows;
  map.cols = maps.cols;
  const std::int64_t pixels = maps.pixel_count();
  map.labels.resize(static_cast<std::size_t>(pixels));
  for (std::int64_t p = 0; p < pixels; ++p) {
    const float* row =
        maps.values.data() + static_cast<std::size_t>(p) * maps.n_classes;
    int best = 0;
    for (int t = 1; t < maps.n_classes; ++t)
      if (row[t] > row[best]) best = t;
    map.labels[static_cast<std::size_t>(p)] = static_cast<std::uint8_t>(best);
  }
  return map;
}

std::vector<std::uint8_t> colorize_labels(
    const ClassificationMap& map, const std::vector<SvmClass>& classes) {
  std::vector<std::uint8_t> rgb(map.labels.size() * 3);
  for (std::size_t p = 0; p < map.labels.size(); ++p) {
    const std::uint8_t label = map.labels[p];
    if (label >= classes.size())
      throw ValidationError("label " + std::to_string(label) + " at pixel " +
                            std::to_string(p) + " has no class entry");
    const auto& color = classes[label].color;
    rgb[3 * p + 0] = color[0];
    rgb[3 * p + 1] = color[1];
    rgb[3 * p + 2] = color[2];
  }
  return rgb;
}

}  // namespace hsiclass
