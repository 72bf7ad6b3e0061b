#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hsiclass/cube.hpp"

namespace hsiclass {

struct BandMeans {
  std::vector<double> values;  // length = bands
};

// Band-centered samples in binary64, band-major: data[b * pixels + p].
// Kept in double until normalization so covariance keeps its headroom.
struct CenteredCube {
  int rows = 0;
  int cols = 0;
  int bands = 0;
  std::vector<double> data;

  std::int64_t pixel_count() const {
    return static_cast<std::int64_t>(rows) * cols;
  }
  double at(std::int64_t pixel, int band) const {
    return data[static_cast<std::size_t>(band) * pixel_count() + pixel];
  }
};

// Dense symmetric matrix, row-major n x n with both triangles stored.
struct SymMatrix {
  int n = 0;
  std::vector<double> values;

  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * n + j];
  }
  // Symmetry within 1e-9 absolute, all entries finite.
  void validate() const;
};

SymMatrix make_sym_matrix(int n);

// Eigenvalues descending; vectors[j * n + i] = component i of the unit
// eigenvector paired with eigenvalues[j].
struct EigenPairs {
  int n = 0;
  std::vector<double> eigenvalues;
  std::vector<double> vectors;
};

// Normalized PC1 score per pixel, all values in [0, 1].
struct OneBandImage {
  int rows = 0;
  int cols = 0;
  std::vector<float> values;

  std::int64_t pixel_count() const {
    return static_cast<std::int64_t>(rows) * cols;
  }
  void validate() const;
};

// Per-band mean removal. Means come from the fixed-chunk tree reduction, so
// the result is identical for any worker count.
std::pair<CenteredCube, BandMeans> center_bands(const HsCube& cube,
                                                int workers = 0);

// Population covariance (divisor N). Upper triangle computed, mirrored.
SymMatrix covariance(const CenteredCube& centered, int workers = 0);

// Classical Jacobi: zero the largest off-diagonal element per rotation until
// max |off-diagonal| < 1e-10 * max(1, max |diagonal|), capped at
// 100 * n(n-1)/2 rotations. Single-worker by design.
EigenPairs jacobi_eigen(const SymMatrix& m);

// score[p] = sum_b centered[p][b] * v1[b], bands left to right.
std::vector<double> project_first_pc(const CenteredCube& centered,
                                     const EigenPairs& pairs, int workers = 0);

// Min-max to [0, 1]; a degenerate range maps to all zeros.
OneBandImage normalize_one_band(const std::vector<double>& scores, int rows,
                                int cols, int workers = 0);

// Optional debug capture of the intermediate products.
struct PcaDebug {
  BandMeans means;
  SymMatrix cov;
  std::vector<double> eigenvalues;
};

OneBandImage pca_one_band(const HsCube& cube, int workers = 0,
                          PcaDebug* debug = nullptr);

// Text dumps (one row per line, whitespace-separated) for the CLI debug flag.
void write_band_means(const BandMeans& means, const std::string& path);
void write_sym_matrix(const SymMatrix& m, const std::string& path);
void write_eigenvalues(const std::vector<double>& eigenvalues,
                       const std::string& path);

}  // namespace hsiclass
