#pragma once

#include <string>
#include <vector>

#include "hsiclass/knn.hpp"
#include "hsiclass/pca.hpp"
#include "hsiclass/svm.hpp"

namespace hsiclass {

// Test-only scheduling perturbation: sleep this long at each stage entry.
// Zero in production; the stress suite randomizes it to shake out barrier
// bugs, which must not change any output byte.
struct StageDelays {
  int svm_ms = 0;
  int pca_ms = 0;
  int knn_ms = 0;
};

struct PipelineConfig {
  int workers = 0;  // 0 = all available
  KnnParams knn;
  bool serial_reference = false;
  bool dump_intermediates = false;
  std::string dump_prefix;  // stem for .I/.P/.O files when dumping
  int repetitions = 20;     // used by the bench driver, not by single runs
  StageDelays stage_delays;
  std::string neighbor_dump_path;  // empty -> no neighbor dump
  std::string pca_debug_prefix;    // empty -> no means/cov/eigenvalue dump

  void validate() const;
};

// Wall-clock seconds per stage for one run. svm and pca overlap, so
// total >= max(svm, pca) + knn. io_and_setup is filled by callers that own
// the file loading; stage times never include it.
struct StageTimings {
  double svm_s = 0.0;
  double pca_s = 0.0;
  double knn_s = 0.0;
  double io_and_setup_s = 0.0;
  double total_s = 0.0;
};

struct PipelineResult {
  ClassificationMap map;
  ProbabilityMaps raw;       // P
  ProbabilityMaps filtered;  // O
  OneBandImage one_band;     // I
  StageTimings timings;
};

// {PCA || SVM} -> KNN -> argmax with a barrier between the levels. Outputs
// are bit-identical to run_serial_reference for any worker count.
PipelineResult run_ss_pipeline(const HsCube& cube, const SvmModel& model,
                               const PipelineConfig& config);

// Straight-line single-worker execution of the same math; the canonical
// comparison target.
PipelineResult run_serial_reference(const HsCube& cube, const SvmModel& model,
                                    const PipelineConfig& config);

// P/O matrix files: <stem>.hdr text sidecar + <stem>.raw binary32 LE,
// pixel-major rows of n_classes values.
void write_prob_maps(const ProbabilityMaps& maps, const std::string& stem);
ProbabilityMaps read_prob_maps(const std::string& stem);

// Writes <prefix>.I.{hdr,raw}, <prefix>.P.{hdr,raw}, <prefix>.O.{hdr,raw}.
void dump_intermediates(const PipelineResult& result,
                        const std::string& prefix);

// One-band image stored as a bands=1 cube file pair.
void write_one_band(const OneBandImage& image, const std::string& stem);
OneBandImage read_one_band(const std::string& stem);

}  // namespace hsiclass
