#include "hsiclass/pca.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "hsiclass/errors.hpp"
#include "hsiclass/parallel.hpp"
#include "hsiclass/reduce.hpp"

namespace hsiclass {

void SymMatrix::validate() const {
  if (n < 1) throw ValidationError("matrix order must be positive");
  if (values.size() != static_cast<std::size_t>(n) * n)
    throw ValidationError("matrix storage length " +
                          std::to_string(values.size()) +
                          " does not match order " + std::to_string(n));
  for (double v : values)
    if (!std::isfinite(v))
      throw ValidationError("matrix entry is not finite");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(at(i, j) - at(j, i)) > 1e-9)
        throw ValidationError("matrix not symmetric at (" + std::to_string(i) +
                              "," + std::to_string(j) + "): " +
                              std::to_string(at(i, j)) + " vs " +
                              std::to_string(at(j, i)));
}

SymMatrix make_sym_matrix(int n) {
  if (n < 1) throw ParameterError("matrix order must be positive");
  SymMatrix m;
  m.n = n;
  m.values.assign(static_cast<std::size_t>(n) * n, 0.0);
  return m;
}

void OneBandImage::validate() const {
  if (rows < 1 || cols < 1)
    throw ValidationError("one-band image shape must be positive");
  if (values.size() != static_cast<std::size_t>(pixel_count()))
    throw ValidationError("one-band image length " +
                          std::to_string(values.size()) +
                          " does not match shape");
  for (float v : values)
    if (!(v >= 0.0f && v <= 1.0f))
      throw ValidationError("one-band value " + std::to_string(v) +
                            " outside [0,1]");
}

std::pair<CenteredCube, BandMeans> center_bands(const HsCube& cube,
                                                int workers) {
  cube.validate();
  const std::int64_t pixels = cube.pixel_count();
  const int bands = cube.bands;
  const int w = resolve_workers(workers);

  BandMeans means;
  means.values.resize(bands);
  for (int b = 0; b < bands; ++b)
    means.values[b] =
        chunked_sum(static_cast<std::size_t>(pixels), w,
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
#pragma omp parallel for num_threads(w) schedule(static)
  for (int b = 0; b < bands; ++b) {
    const double mean = means.values[b];
    double* out = centered.data.data() + static_cast<std::size_t>(b) * pixels;
    for (std::int64_t p = 0; p < pixels; ++p)
      out[p] = static_cast<double>(cube.sample(p, b)) - mean;
  }
  return {std::move(centered), std::move(means)};
}

SymMatrix covariance(const CenteredCube& centered, int workers) {
  const int n = centered.bands;
  const std::int64_t pixels = centered.pixel_count();
  if (n < 1 || pixels < 1)
    throw ParameterError("centered cube shape must be positive");
  SymMatrix m = make_sym_matrix(n);
  // Upper triangle (diagonal included), computed entrywise and mirrored.
  std::vector<std::pair<int, int>> entries;
  entries.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) entries.emplace_back(a, b);
  const int w = resolve_workers(workers);
#pragma omp parallel for num_threads(w) schedule(static)
  for (std::ptrdiff_t e = 0; e < static_cast<std::ptrdiff_t>(entries.size());
       ++e) {
    const auto [a, b] = entries[static_cast<std::size_t>(e)];
    const double* pa =
        centered.data.data() + static_cast<std::size_t>(a) * pixels;
    const double* pb =
        centered.data.data() + static_cast<std::size_t>(b) * pixels;
    const double sum = chunked_sum_serial(
        static_cast<std::size_t>(pixels),
        [&](std::size_t p) { return pa[p] * pb[p]; });
    const double cov = sum / static_cast<double>(pixels);
    m.at(a, b) = cov;
    m.at(b, a) = cov;
  }
  return m;
}

EigenPairs jacobi_eigen(const SymMatrix& m) {
  m.validate();
  const int n = m.n;
  std::vector<double> A = m.values;
  std::vector<double> V(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) V[static_cast<std::size_t>(i) * n + i] = 1.0;

  auto a_at = [&](int i, int j) -> double& {
    return A[static_cast<std::size_t>(i) * n + j];
  };

  if (n > 1) {
    // Per-row maxima over the strict upper triangle make the largest-pivot
    // search O(n) per rotation instead of O(n^2).
    std::vector<double> row_max(n, -1.0);
    std::vector<int> row_col(n, 0);
    auto scan_row = [&](int i) {
      double best = -1.0;
      int best_j = i + 1;
      for (int j = i + 1; j < n; ++j) {
        const double v = std::abs(a_at(i, j));
        if (v > best) {
          best = v;
          best_j = j;
        }
      }
      row_max[i] = best;
      row_col[i] = best_j;
    };
    for (int i = 0; i < n; ++i) scan_row(i);

    const long cap = 100L * n * (n - 1) / 2;
    long rotations = 0;
    for (;;) {
      int p = 0;
      for (int i = 1; i < n - 1; ++i)
        if (row_max[i] > row_max[p]) p = i;
      const int q = row_col[p];
      const double apq = a_at(p, q);
      const double off_max = std::abs(apq);
      double diag_max = 0.0;
      for (int i = 0; i < n; ++i)
        diag_max = std::max(diag_max, std::abs(a_at(i, i)));
      if (off_max < 1e-10 * std::max(1.0, diag_max)) break;
      if (rotations >= cap)
        throw ConvergenceError(
            "jacobi did not converge within " + std::to_string(cap) +
            " rotations; max off-diagonal " + std::to_string(off_max));
      ++rotations;

      const double app = a_at(p, p);
      const double aqq = a_at(q, q);
      const double theta = (aqq - app) / (2.0 * apq);
      const double t =
          (theta >= 0.0 ? 1.0 : -1.0) /
          (std::abs(theta) + std::sqrt(theta * theta + 1.0));
      const double c = 1.0 / std::sqrt(t * t + 1.0);
      const double s = t * c;
      const double tau = s / (1.0 + c);

      a_at(p, p) = app - t * apq;
      a_at(q, q) = aqq + t * apq;
      a_at(p, q) = 0.0;
      a_at(q, p) = 0.0;
      for (int i = 0; i < n; ++i) {
        if (i == p || i == q) continue;
        const double aip = a_at(i, p);
        const double aiq = a_at(i, q);
        const double nip = aip - s * (aiq + tau * aip);
        const double niq = aiq + s * (aip - tau * aiq);
        a_at(i, p) = nip;
        a_at(p, i) = nip;
        a_at(i, q) = niq;
        a_at(q, i) = niq;
      }
      for (int i = 0; i < n; ++i) {
        const std::size_t ip = static_cast<std::size_t>(i) * n + p;
        const std::size_t iq = static_cast<std::size_t>(i) * n + q;
        const double vip = V[ip];
        const double viq = V[iq];
        V[ip] = vip - s * (viq + tau * vip);
        V[iq] = viq + s * (vip - tau * viq);
      }

      scan_row(p);
      if (q < n - 1) scan_row(q);
      for (int i = 0; i < n - 1; ++i) {
        if (i == p || i == q) continue;
        if (row_col[i] == p || row_col[i] == q) {
          // The row's recorded maximum sat in a rotated column; rescan.
          scan_row(i);
          continue;
        }
        if (i < p) {
          const double v = std::abs(a_at(i, p));
          if (v > row_max[i]) {
            row_max[i] = v;
            row_col[i] = p;
          }
        }
        if (i < q) {
          const double v = std::abs(a_at(i, q));
          if (v > row_max[i]) {
            row_max[i] = v;
            row_col[i] = q;
          }
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return a_at(x, x) > a_at(y, y);
  });

  EigenPairs out;
  out.n = n;
  out.eigenvalues.resize(n);
  out.vectors.resize(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    const int src = order[j];
    out.eigenvalues[j] = a_at(src, src);
    double* column = out.vectors.data() + static_cast<std::size_t>(j) * n;
    for (int i = 0; i < n; ++i)
      column[i] = V[static_cast<std::size_t>(i) * n + src];
    // Sign convention: the largest-magnitude component (first on ties) ends
    // up positive.
    int lead = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(column[i]) > std::abs(column[lead])) lead = i;
    if (column[lead] < 0.0)
      for (int i = 0; i < n; ++i) column[i] = -column[i];
  }
  return out;
}

std::vector<double> project_first_pc(const CenteredCube& centered,
                                     const EigenPairs& pairs, int workers) {
  const int bands = centered.bands;
  if (pairs.n != bands)
    throw DimensionError("eigenvector length " + std::to_string(pairs.n) +
                         " does not match band count " +
                         std::to_string(bands));
  if (pairs.eigenvalues.empty() ||
      pairs.vectors.size() < static_cast<std::size_t>(bands))
    throw DimensionError("eigen pairs are empty");
  const std::int64_t pixels = centered.pixel_count();
  const double* v1 = pairs.vectors.data();
  std::vector<double> scores(static_cast<std::size_t>(pixels), 0.0);
  const std::size_t nchunks = chunk_count(static_cast<std::size_t>(pixels));
  // Bands ascending inside each pixel chunk: every pixel accumulates in the
  // same left-to-right band order as a plain serial loop would.
#pragma omp parallel for num_threads(resolve_workers(workers)) schedule(static)
  for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(nchunks); ++ci) {
    const std::size_t begin = static_cast<std::size_t>(ci) * kReduceChunk;
    const std::size_t end =
        std::min(begin + kReduceChunk, static_cast<std::size_t>(pixels));
    for (int b = 0; b < bands; ++b) {
      const double wb = v1[b];
      const double* band =
          centered.data.data() + static_cast<std::size_t>(b) * pixels;
      for (std::size_t p = begin; p < end; ++p) scores[p] += wb * band[p];
    }
  }
  return scores;
}

OneBandImage normalize_one_band(const std::vector<double>& scores, int rows,
                                int cols, int workers) {
  if (rows < 1 || cols < 1)
    throw ParameterError("image shape must be positive");
  if (scores.size() != static_cast<std::size_t>(rows) * cols)
    throw DimensionError("score count " + std::to_string(scores.size()) +
                         " does not match " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  for (double s : scores)
    if (!std::isfinite(s))
      throw ValidationError("score is not finite");
  OneBandImage image;
  image.rows = rows;
  image.cols = cols;
  image.values.assign(scores.size(), 0.0f);
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) return image;  // degenerate range maps to all zeros
  const double range = hi - lo;
#pragma omp parallel for num_threads(resolve_workers(workers)) schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(scores.size());
       ++p)
    image.values[static_cast<std::size_t>(p)] = static_cast<float>(
        (scores[static_cast<std::size_t>(p)] - lo) / range);
  return image;
}

OneBandImage pca_one_band(const HsCube& cube, int workers, PcaDebug* debug) {
  auto [centered, means] = center_bands(cube, workers);
  SymMatrix cov = covariance(centered, workers);
  EigenPairs pairs = jacobi_eigen(cov);
  const std::vector<double> scores =
      project_first_pc(centered, pairs, workers);
  if (debug) {
    debug->means = means;
    debug->cov = cov;
    debug->eigenvalues = pairs.eigenvalues;
  }
  return normalize_one_band(scores, cube.rows, cube.cols, workers);
}

// ---------------------------------------------------------------------------
// Debug dumps
// ---------------------------------------------------------------------------

namespace {

void write_rows(const std::string& path, const std::vector<double>& values,
                std::size_t row_len) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", values[i]);
    out << buf << ((i + 1) % row_len == 0 ? "\n" : " ");
  }
  if (!out) throw IoError("short write on " + path);
}

}  // namespace

void write_band_means(const BandMeans& means, const std::string& path) {
  write_rows(path, means.values, means.values.size());
}

void write_sym_matrix(const SymMatrix& m, const std::string& path) {
  write_rows(path, m.values, static_cast<std::size_t>(m.n));
}

void write_eigenvalues(const std::vector<double>& eigenvalues,
                       const std::string& path) {
  write_rows(path, eigenvalues, eigenvalues.size());
}

}  // namespace hsiclass
