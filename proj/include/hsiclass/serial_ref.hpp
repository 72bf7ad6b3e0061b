#pragma once

#include <utility>

#include "hsiclass/knn.hpp"
#include "hsiclass/pca.hpp"
#include "hsiclass/svm.hpp"

// Single-worker straight-line implementations of the heavy kernels. Same
// arithmetic as the parallel paths (per-pixel math and reduction trees are
// shared), but plain loops and full-sort neighbor selection. These are the
// comparison targets for determinism and parallel-correctness checks.
namespace hsiclass::serial {

ProbabilityMaps svm_probability_maps(const HsCube& cube, const SvmModel& model);

OneBandImage pca_one_band(const HsCube& cube, PcaDebug* debug = nullptr);

// Full std::sort selection over each window, identical tie rule.
void nearest_neighbors_sorted(const OneBandImage& image, std::int64_t pixel,
                              const KnnParams& params,
                              std::span<std::int32_t> out_indices);

std::pair<ClassificationMap, ProbabilityMaps> knn_classify(
    const ProbabilityMaps& raw, const OneBandImage& image,
    const KnnParams& params);

}  // namespace hsiclass::serial
