#include "hsiclass/serial_ref.hpp"

#include <algorithm>
#include <cmath>

#include "hsiclass/errors.hpp"
#include "hsiclass/reduce.hpp"

namespace hsiclass::serial {

ProbabilityMaps svm_probability_maps(const HsCube& cube,
                                     const SvmModel& model) {
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
  const std::int64_t stride = cube.layout == Layout::BandMajor ? pixels : 1;
  const std::int64_t pixel_step =
      cube.layout == Layout::BandMajor ? 1 : cube.bands;
  std::vector<double> pair_buf(static_cast<std::size_t>(model.n_pairs()));
  for (std::int64_t p = 0; p < pixels; ++p)
    detail::pixel_probabilities(
        cube.data.data() + p * pixel_step, stride, model, pair_buf,
        maps.values.data() + static_cast<std::size_t>(p) * maps.n_classes);
  return maps;
}

OneBandImage pca_one_band(const HsCube& cube, PcaDebug* debug) {
  cube.validate();
  const std::int64_t pixels = cube.pixel_count();
  const int bands = cube.bands;

  // Means and covariance use the same fixed-chunk summation tree as the
  // parallel kernels; only the scheduling is straight-line here.
  BandMeans means;
  means.values.resize(bands);
  for (int b = 0; b < bands; ++b)
    means.values[b] =
        chunked_sum_serial(static_cast<std::size_t>(pixels),
                           [&](std::size_t p) {
                             return static_cast<double>(
                                 cube.sample(static_cast<std::int64_t>(p), b));
                           }) /
        static_cast<double>(pixels);

  CenteredCube centered;
  centered.rows = cube.rows;
  centered.cols = cube.cols;
  centered.bands = bands;
  centered.data.resize(static_cast<std::size_t>(pixels) * bands);
  for (int b = 0; b < bands; ++b) {
    const double mean = means.values[b];
    double* out = centered.data.data() + static_cast<std::size_t>(b) * pixels;
    for (std::int64_t p = 0; p < pixels; ++p)
      out[p] = static_cast<double>(cube.sample(p, b)) - mean;
  }

  SymMatrix cov = make_sym_matrix(bands);
  for (int a = 0; a < bands; ++a) {
    const double* pa =
        centered.data.data() + static_cast<std::size_t>(a) * pixels;
    for (int b = a; b < bands; ++b) {
      const double* pb =
          centered.data.data() + static_cast<std::size_t>(b) * pixels;
      const double sum = chunked_sum_serial(
          static_cast<std::size_t>(pixels),
          [&](std::size_t p) { return pa[p] * pb[p]; });
      const double value = sum / static_cast<double>(pixels);
      cov.at(a, b) = value;
      cov.at(b, a) = value;
    }
  }

  EigenPairs pairs = jacobi_eigen(cov);

  const double* v1 = pairs.vectors.data();
  std::vector<double> scores(static_cast<std::size_t>(pixels), 0.0);
  const std::size_t nchunks = chunk_count(static_cast<std::size_t>(pixels));
  for (std::size_t ci = 0; ci < nchunks; ++ci) {
    const std::size_t begin = ci * kReduceChunk;
    const std::size_t end =
        std::min(begin + kReduceChunk, static_cast<std::size_t>(pixels));
    for (int b = 0; b < bands; ++b) {
      const double wb = v1[b];
      const double* band =
          centered.data.data() + static_cast<std::size_t>(b) * pixels;
      for (std::size_t p = begin; p < end; ++p) scores[p] += wb * band[p];
    }
  }

  if (debug) {
    debug->means = means;
    debug->cov = cov;
    debug->eigenvalues = pairs.eigenvalues;
  }

  OneBandImage image;
  image.rows = cube.rows;
  image.cols = cube.cols;
  image.values.assign(scores.size(), 0.0f);
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) return image;
  const double range = hi - lo;
  for (std::size_t p = 0; p < scores.size(); ++p)
    image.values[p] = static_cast<float>((scores[p] - lo) / range);
  return image;
}

void nearest_neighbors_sorted(const OneBandImage& image, std::int64_t pixel,
                              const KnnParams& params,
                              std::span<std::int32_t> out_indices) {
  params.validate();
  const int cols = image.cols;
  const int r = static_cast<int>(pixel / cols);
  const int c = static_cast<int>(pixel % cols);
  const WindowBounds wb = window_bounds(r, image.rows, params.window_rows);
  const std::int64_t n =
      static_cast<std::int64_t>(wb.last_row - wb.first_row + 1) * cols;
  if (n < params.k)
    throw ParameterError("window of row " + std::to_string(r) + " holds " +
                         std::to_string(n) + " pixels, K = " +
                         std::to_string(params.k));
  if (static_cast<int>(out_indices.size()) != params.k)
    throw DimensionError("output span does not hold K slots");

  std::vector<std::pair<float, std::int32_t>> candidates;
  candidates.reserve(static_cast<std::size_t>(n));
  for (int i = wb.first_row; i <= wb.last_row; ++i)
    for (int j = 0; j < cols; ++j)
      candidates.emplace_back(
          pixel_distance(image, r, c, i, j, params.lambda),
          static_cast<std::int32_t>(static_cast<std::int64_t>(i) * cols + j));
  std::sort(candidates.begin(), candidates.end());
  for (int i = 0; i < params.k; ++i)
    out_indices[static_cast<std::size_t>(i)] =
        candidates[static_cast<std::size_t>(i)].second;
}

std::pair<ClassificationMap, ProbabilityMaps> knn_classify(
    const ProbabilityMaps& raw, const OneBandImage& image,
    const KnnParams& params) {
  raw.validate();
  image.validate();
  if (raw.rows != image.rows || raw.cols != image.cols)
    throw DimensionError("probability maps and one-band image differ in shape");
  params.validate_for_image(image.rows, image.cols);

  const std::int64_t pixels = raw.pixel_count();
  const int nc = raw.n_classes;
  ProbabilityMaps filtered;
  filtered.rows = raw.rows;
  filtered.cols = raw.cols;
  filtered.n_classes = nc;
  filtered.role = MapRole::Filtered;
  filtered.values.resize(raw.values.size());

  std::vector<std::int32_t> neighbors(static_cast<std::size_t>(params.k));
  for (std::int64_t p = 0; p < pixels; ++p) {
    nearest_neighbors_sorted(image, p, params, neighbors);
    detail::filter_row(raw.values.data(), neighbors.data(), params.k, nc,
                       filtered.values.data() +
                           static_cast<std::size_t>(p) * nc);
  }
  return {classify_argmax(filtered), std::move(filtered)};
}

}  // namespace hsiclass::serial
