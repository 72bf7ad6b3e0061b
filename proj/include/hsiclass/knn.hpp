#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>

#include "hsiclass/pca.hpp"
#include "hsiclass/svm.hpp"

namespace hsiclass {

struct KnnParams {
  int k = 40;
  float lambda = 1.0f;
  int window_rows = 14;
  int batch_rows = 10;  // memory bound only, never changes results

  void validate() const;
  // K must fit in every pixel's window: K <= window_rows * cols.
  void validate_for_image(int rows, int cols) const;
};

// Inclusive row range of the search window around row r: ceil((wr-1)/2) rows
// above, floor((wr-1)/2) below, clipped at the borders. All columns.
struct WindowBounds {
  int first_row = 0;
  int last_row = 0;
};
WindowBounds window_bounds(int r, int rows, int window_rows);

// d = (I_rc - I_ij)^2 + lambda * ((r-i)^2 + (c-j)^2), all in binary32.
float pixel_distance(const OneBandImage& image, int r, int c, int i, int j,
                     float lambda);

// Scan-phase instrumentation. `comparisons` counts key comparisons between an
// incoming candidate and a resident heap entry (the root gate plus at most
// one per heap level); sibling-vs-sibling bookkeeping is not charged.
struct NeighborSearchStats {
  std::uint64_t candidates = 0;
  std::uint64_t comparisons = 0;
};

// K nearest window pixels of `pixel` (self included at distance 0), written
// to out_indices in ascending (distance, flat index) order. Partial max-heap
// selection; equals a full sort under the same tie rule.
void nearest_neighbors(const OneBandImage& image, std::int64_t pixel,
                       const KnnParams& params,
                       std::span<std::int32_t> out_indices,
                       NeighborSearchStats* stats = nullptr);

// All pixels' neighbor lists, indices[p * k + i].
struct NeighborSet {
  std::int64_t pixels = 0;
  int k = 0;
  std::vector<std::int32_t> indices;
};

NeighborSet build_neighbor_set(const OneBandImage& image,
                               const KnnParams& params, int workers = 0);

// O[p][class] = mean over p's K neighbors of P[neighbor][class].
// Accumulated in binary64, stored as binary32.
ProbabilityMaps filter_probabilities(const ProbabilityMaps& raw,
                                     const NeighborSet& neighbors, int k,
                                     int workers = 0);

// window -> neighbor search -> filter -> argmax, processing batch_rows rows
// of neighbors at a time so the neighbor matrix never exceeds the batch.
// Optional text dump of each pixel's K flat indices, one pixel per line.
std::pair<ClassificationMap, ProbabilityMaps> knn_classify(
    const ProbabilityMaps& raw, const OneBandImage& image,
    const KnnParams& params, int workers = 0,
    std::ostream* neighbor_dump = nullptr);

namespace detail {
// One filtered row: binary64 accumulation over the K neighbor rows in list
// order, cast to binary32 on store. Shared with the serial reference.
void filter_row(const float* raw, const std::int32_t* neighbors, int k,
                int n_classes, float* out);
}  // namespace detail

}  // namespace hsiclass
