#include "hsiclass/knn.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hsiclass/errors.hpp"
#include "hsiclass/parallel.hpp"

namespace hsiclass {

void KnnParams::validate() const {
  if (k < 1) throw ParameterError("K must be >= 1, got " + std::to_string(k));
  if (!(lambda >= 0.0f))
    throw ParameterError("lambda must be >= 0, got " + std::to_string(lambda));
  if (window_rows < 1)
    throw ParameterError("window_rows must be >= 1, got " +
                         std::to_string(window_rows));
  if (batch_rows < 1)
    throw ParameterError("batch_rows must be >= 1, got " +
                         std::to_string(batch_rows));
}

void KnnParams::validate_for_image(int rows, int cols) const {
  validate();
  (void)rows;
  const std::int64_t window_cap =
      static_cast<std::int64_t>(window_rows) * cols;
  if (k > window_cap)
    throw ParameterError("K = " + std::to_string(k) +
                         " exceeds the window capacity " +
                         std::to_string(window_cap) + " (window_rows x cols)");
}

WindowBounds window_bounds(int r, int rows, int window_rows) {
  // window_rows/2 rows above (ceil of (window_rows-1)/2), the floor below.
  const int above = window_rows / 2;
  const int below = (window_rows - 1) / 2;
  WindowBounds w;
  w.first_row = std::max(0, r - above);
  w.last_row = std::min(rows - 1, r + below);
  return w;
}

float pixel_distance(const OneBandImage& image, int r, int c, int i, int j,
                     float lambda) {
  const float di =
      image.values[static_cast<std::size_t>(r) * image.cols + c] -
      image.values[static_cast<std::size_t>(i) * image.cols + j];
  const float dr = static_cast<float>(r - i);
  const float dc = static_cast<float>(c - j);
  return di * di + lambda * (dr * dr + dc * dc);
}

namespace {

// true when (d1, i1) sorts after (d2, i2) under the ascending
// (distance, flat index) rule.
inline bool key_worse(float d1, std::int32_t i1, float d2, std::int32_t i2) {
  return d1 > d2 || (d1 == d2 && i1 > i2);
}

}  // namespace

void nearest_neighbors(const OneBandImage& image, std::int64_t pixel,
                       const KnnParams& params,
                       std::span<std::int32_t> out_indices,
                       NeighborSearchStats* stats) {
  params.validate();
  const int rows = image.rows;
  const int cols = image.cols;
  if (pixel < 0 || pixel >= image.pixel_count())
    throw ParameterError("pixel index " + std::to_string(pixel) +
                         " out of range");
  const int k = params.k;
  if (static_cast<int>(out_indices.size()) != k)
    throw DimensionError("output span holds " +
                         std::to_string(out_indices.size()) +
                         " slots, K = " + std::to_string(k));
  const int r = static_cast<int>(pixel / cols);
  const int c = static_cast<int>(pixel % cols);
  const WindowBounds wb = window_bounds(r, rows, params.window_rows);
  const std::int64_t n_candidates =
      static_cast<std::int64_t>(wb.last_row - wb.first_row + 1) * cols;
  if (n_candidates < k)
    throw ParameterError("window of row " + std::to_string(r) + " holds " +
                         std::to_string(n_candidates) + " pixels, K = " +
                         std::to_string(k));

  // Bounded max-heap keyed (distance, flat index): root is the current worst
  // of the best K. Candidates arrive in ascending flat index.
  std::vector<float> heap_d(static_cast<std::size_t>(k));
  std::vector<std::int32_t> heap_i(static_cast<std::size_t>(k));
  int heap_size = 0;
  std::uint64_t comparisons = 0;

  for (int i = wb.first_row; i <= wb.last_row; ++i) {
    for (int j = 0; j < cols; ++j) {
      const std::int32_t idx = static_cast<std::int32_t>(
          static_cast<std::int64_t>(i) * cols + j);
      const float d = pixel_distance(image, r, c, i, j, params.lambda);
      if (heap_size < k) {
        int slot = heap_size++;
        while (slot > 0) {
          const int parent = (slot - 1) / 2;
          ++comparisons;
          if (key_worse(d, idx, heap_d[parent], heap_i[parent])) {
            heap_d[slot] = heap_d[parent];
            heap_i[slot] = heap_i[parent];
            slot = parent;
          } else {
            break;
          }
        }
        heap_d[slot] = d;
        heap_i[slot] = idx;
      } else {
        ++comparisons;
        if (key_worse(d, idx, heap_d[0], heap_i[0])) continue;
        int slot = 0;
        for (;;) {
          const int left = 2 * slot + 1;
          if (left >= k) break;
          int child = left;
          const int right = left + 1;
          if (right < k &&
              key_worse(heap_d[right], heap_i[right], heap_d[left],
                        heap_i[left]))
            child = right;
          ++comparisons;
          if (key_worse(heap_d[child], heap_i[child], d, idx)) {
            heap_d[slot] = heap_d[child];
            heap_i[slot] = heap_i[child];
            slot = child;
          } else {
            break;
          }
        }
        heap_d[slot] = d;
        heap_i[slot] = idx;
      }
    }
  }

  std::vector<int> order(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return key_worse(heap_d[y], heap_i[y], heap_d[x], heap_i[x]);
  });
  for (int i = 0; i < k; ++i)
    out_indices[static_cast<std::size_t>(i)] =
        heap_i[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];

  if (stats) {
    stats->candidates += static_cast<std::uint64_t>(n_candidates);
    stats->comparisons += comparisons;
  }
}

NeighborSet build_neighbor_set(const OneBandImage& image,
                               const KnnParams& params, int workers) {
  image.validate();
  params.validate_for_image(image.rows, image.cols);
  NeighborSet set;
  set.pixels = image.pixel_count();
  set.k = params.k;
  set.indices.resize(static_cast<std::size_t>(set.pixels) * params.k);
#pragma omp parallel for num_threads(resolve_workers(workers)) schedule(static)
  for (std::int64_t p = 0; p < set.pixels; ++p)
    nearest_neighbors(image, p, params,
                      std::span<std::int32_t>(
                          set.indices.data() +
                              static_cast<std::size_t>(p) * params.k,
                          static_cast<std::size_t>(params.k)));
  return set;
}

namespace detail {

void filter_row(const float* raw, const std::int32_t* neighbors, int k,
                int n_classes, float* out) {
  for (int t = 0; t < n_classes; ++t) {
    double acc = 0.0;
    for (int i = 0; i < k; ++i)
      acc += static_cast<double>(
          raw[static_cast<std::size_t>(neighbors[i]) * n_classes + t]);
    out[t] = static_cast<float>(acc / k);
  }
}

}  // namespace detail

using detail::filter_row;

ProbabilityMaps filter_probabilities(const ProbabilityMaps& raw,
                                     const NeighborSet& neighbors, int k,
                                     int workers) {
  raw.validate();
  if (neighbors.k != k)
    throw ParameterError("neighbor set holds K = " +
                         std::to_string(neighbors.k) + ", requested " +
                         std::to_string(k));
  if (neighbors.pixels != raw.pixel_count())
    throw DimensionError("neighbor set covers " +
                         std::to_string(neighbors.pixels) +
                         " pixels, maps have " +
                         std::to_string(raw.pixel_count()));
  const std::int64_t pixels = raw.pixel_count();
  for (std::int32_t idx : neighbors.indices)
    if (idx < 0 || idx >= pixels)
      throw ValidationError("neighbor index " + std::to_string(idx) +
                            " out of range");
  ProbabilityMaps out;
  out.rows = raw.rows;
  out.cols = raw.cols;
  out.n_classes = raw.n_classes;
  out.role = MapRole::Filtered;
  out.values.resize(raw.values.size());
#pragma omp parallel for num_threads(resolve_workers(workers)) schedule(static)
  for (std::int64_t p = 0; p < pixels; ++p)
    filter_row(raw.values.data(),
               neighbors.indices.data() + static_cast<std::size_t>(p) * k, k,
               raw.n_classes,
               out.values.data() + static_cast<std::size_t>(p) * out.n_classes);
  return out;
}

std::pair<ClassificationMap, ProbabilityMaps> knn_classify(
    const ProbabilityMaps& raw, const OneBandImage& image,
    const KnnParams& params, int workers, std::ostream* neighbor_dump) {
  raw.validate();
  image.validate();
  if (raw.rows != image.rows || raw.cols != image.cols)
    throw DimensionError("probability maps are " + std::to_string(raw.rows) +
                         "x" + std::to_string(raw.cols) + ", one-band image " +
                         std::to_string(image.rows) + "x" +
                         std::to_string(image.cols));
  params.validate_for_image(image.rows, image.cols);

  const int rows = image.rows;
  const int cols = image.cols;
  const int k = params.k;
  const int nc = raw.n_classes;
  const int w = resolve_workers(workers);

  ProbabilityMaps filtered;
  filtered.rows = rows;
  filtered.cols = cols;
  filtered.n_classes = nc;
  filtered.role = MapRole::Filtered;
  filtered.values.resize(raw.values.size());

  // The neighbor matrix is bounded by one batch of rows; batching never
  // changes any output value.
  std::vector<std::int32_t> batch(
      static_cast<std::size_t>(params.batch_rows) * cols * k);
  for (int row0 = 0; row0 < rows; row0 += params.batch_rows) {
    const int row1 = std::min(rows, row0 + params.batch_rows);
    const std::int64_t first = static_cast<std::int64_t>(row0) * cols;
    const std::int64_t count =
        static_cast<std::int64_t>(row1 - row0) * cols;
#pragma omp parallel for num_threads(w) schedule(static)
    for (std::int64_t local = 0; local < count; ++local)
      nearest_neighbors(
          image, first + local, params,
          std::span<std::int32_t>(
              batch.data() + static_cast<std::size_t>(local) * k,
              static_cast<std::size_t>(k)));
#pragma omp parallel for num_threads(w) schedule(static)
    for (std::int64_t local = 0; local < count; ++local)
      filter_row(raw.values.data(),
                 batch.data() + static_cast<std::size_t>(local) * k, k, nc,
                 filtered.values.data() +
                     static_cast<std::size_t>(first + local) * nc);
    if (neighbor_dump) {
      for (std::int64_t local = 0; local < count; ++local) {
        const std::int32_t* list =
            batch.data() + static_cast<std::size_t>(local) * k;
        for (int i = 0; i < k; ++i)
          (*neighbor_dump) << list[i] << (i + 1 == k ? "\n" : " ");
      }
    }
  }

  return {classify_argmax(filtered), std::move(filtered)};
}

}  // namespace hsiclass
