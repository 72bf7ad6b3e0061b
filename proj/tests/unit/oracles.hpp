#pragma once

// Independent expected-value computations for the test suite. Everything
// here re-derives results from the definitions with the most direct code
// possible (full sorts, naive double loops, brute-force searches) and never
// calls the library kernels it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// KNN: exhaustive full-sort neighbor selection
// ---------------------------------------------------------------------------

// Distances in binary32 exactly as defined; selection by a full stable sort
// of every window candidate under the ascending (distance, flat index) rule.
inline std::vector<std::int32_t> sorted_neighbors(
    const std::vector<float>& image, int rows, int cols, std::int64_t pixel,
    float lambda, int window_rows, int k) {
  const int r = static_cast<int>(pixel / cols);
  const int c = static_cast<int>(pixel % cols);
  const int above = (window_rows - 1 + 1) / 2;  // ceil((wr - 1) / 2)
  const int below = (window_rows - 1) / 2;
  const int first = std::max(0, r - above);
  const int last = std::min(rows - 1, r + below);

  std::vector<std::pair<float, std::int32_t>> candidates;
  candidates.reserve(static_cast<std::size_t>(last - first + 1) * cols);
  const float irc = image[static_cast<std::size_t>(r) * cols + c];
  for (int i = first; i <= last; ++i) {
    for (int j = 0; j < cols; ++j) {
      const float di = irc - image[static_cast<std::size_t>(i) * cols + j];
      const float dr = static_cast<float>(r - i);
      const float dc = static_cast<float>(c - j);
      const float d = di * di + lambda * (dr * dr + dc * dc);
      candidates.emplace_back(
          d, static_cast<std::int32_t>(static_cast<std::int64_t>(i) * cols + j));
    }
  }
  std::sort(candidates.begin(), candidates.end());
  std::vector<std::int32_t> out(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = candidates[static_cast<std::size_t>(i)].second;
  return out;
}

// ---------------------------------------------------------------------------
// PCA: naive covariance
// ---------------------------------------------------------------------------

// Plain double loop over every (band, band) pair, plain left-to-right sums.
// centered is band-major: centered[b * pixels + p].
inline std::vector<double> covariance_naive(const std::vector<double>& centered,
                                            std::int64_t pixels, int bands) {
  std::vector<double> cov(static_cast<std::size_t>(bands) * bands, 0.0);
  for (int a = 0; a < bands; ++a) {
    for (int b = 0; b < bands; ++b) {
      double acc = 0.0;
      for (std::int64_t p = 0; p < pixels; ++p)
        acc += centered[static_cast<std::size_t>(a) * pixels + p] *
               centered[static_cast<std::size_t>(b) * pixels + p];
      cov[static_cast<std::size_t>(a) * bands + b] =
          acc / static_cast<double>(pixels);
    }
  }
  return cov;
}

// ---------------------------------------------------------------------------
// Pairwise coupling: brute-force simplex grid search
// ---------------------------------------------------------------------------

// r is the full C x C matrix with r[i][j] = probability of class i against
// class j (r[j][i] = 1 - r[i][j], diagonal unused). The coupling objective,
// straight from its definition:
//   f(p) = sum over ordered pairs (t, j), t != j, of (r[j][t] p_t - r[t][j] p_j)^2
inline double coupling_objective(const std::vector<std::vector<double>>& r,
                                 const std::vector<double>& p) {
  const int c = static_cast<int>(p.size());
  double f = 0.0;
  for (int t = 0; t < c; ++t)
    for (int j = 0; j < c; ++j) {
      if (j == t) continue;
      const double e = r[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)] * p[static_cast<std::size_t>(t)] -
                       r[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] * p[static_cast<std::size_t>(j)];
      f += e * e;
    }
  return f;
}

namespace detail {

inline void consider(const std::vector<std::vector<double>>& r,
                     const std::vector<double>& p, double* best_f,
                     std::vector<double>* best_p) {
  const double f = coupling_objective(r, p);
  if (f < *best_f) {
    *best_f = f;
    *best_p = p;
  }
}

}  // namespace detail

// Minimizes the coupling objective over the probability simplex sampled at
// step 1/steps. C = 2 and C = 3 enumerate every grid point. C = 4 walks
// (k0, k1) strips; along a strip the objective is a quadratic in k2 (p is
// affine in k2), strictly convex because its curvature includes the term
// (r[3][2] + r[2][3])^2 > 0, so the strip minimum sits at an integer next to
// the quadratic's vertex. The vertex is fit from three direct evaluations
// and a window of +-2 grid points around it plus both strip endpoints is
// evaluated directly; a non-positive fitted curvature (numerically flat
// strip) falls back to scanning the strip.
inline std::vector<double> coupling_grid_search(
    const std::vector<std::vector<double>>& r, int steps) {
  const int c = static_cast<int>(r.size());
  const double inv = 1.0 / steps;
  double best_f = std::numeric_limits<double>::infinity();
  std::vector<double> best_p;

  if (c == 2) {
    std::vector<double> p(2);
    for (int k0 = 0; k0 <= steps; ++k0) {
      p[0] = k0 * inv;
      p[1] = (steps - k0) * inv;
      detail::consider(r, p, &best_f, &best_p);
    }
    return best_p;
  }
  if (c == 3) {
    std::vector<double> p(3);
    for (int k0 = 0; k0 <= steps; ++k0)
      for (int k1 = 0; k1 + k0 <= steps; ++k1) {
        p[0] = k0 * inv;
        p[1] = k1 * inv;
        p[2] = (steps - k0 - k1) * inv;
        detail::consider(r, p, &best_f, &best_p);
      }
    return best_p;
  }

  std::vector<double> p(4);
  auto eval = [&](int k0, int k1, int k2, int rem) {
    p[0] = k0 * inv;
    p[1] = k1 * inv;
    p[2] = k2 * inv;
    p[3] = rem * inv;
    return coupling_objective(r, p);
  };
  for (int k0 = 0; k0 <= steps; ++k0) {
    for (int k1 = 0; k1 + k0 <= steps; ++k1) {
      const int span = steps - k0 - k1;  // k2 + k3 = span
      if (span <= 2) {
        for (int k2 = 0; k2 <= span; ++k2) {
          const double f = eval(k0, k1, k2, span - k2);
          if (f < best_f) {
            best_f = f;
            best_p = p;
          }
        }
        continue;
      }
      const double f0 = eval(k0, k1, 0, span);
      const double f1 = eval(k0, k1, 1, span - 1);
      const double f2 = eval(k0, k1, 2, span - 2);
      const double curvature = f0 - 2.0 * f1 + f2;  // 2a of a k2^2 + b k2 + c
      int lo = 0;
      int hi = span;
      if (curvature > 0.0) {
        const double b = f1 - f0 - curvature * 0.5;
        const double vertex = -b / curvature;
        const int center =
            std::clamp(static_cast<int>(std::lround(vertex)), 0, span);
        lo = std::max(0, center - 2);
        hi = std::min(span, center + 2);
      }
      for (int k2 = lo; k2 <= hi; ++k2) {
        const double f = eval(k0, k1, k2, span - k2);
        if (f < best_f) {
          best_f = f;
          best_p = p;
        }
      }
      // Endpoints guard the clamp when the vertex window excludes them.
      for (int k2 : {0, span}) {
        if (k2 >= lo && k2 <= hi) continue;
        const double f = eval(k0, k1, k2, span - k2);
        if (f < best_f) {
          best_f = f;
          best_p = p;
        }
      }
    }
  }
  return best_p;
}

// Exhaustive version for C = 4, used at coarse steps to validate the strip
// walk above.
inline std::vector<double> coupling_grid_search_naive4(
    const std::vector<std::vector<double>>& r, int steps) {
  const double inv = 1.0 / steps;
  double best_f = std::numeric_limits<double>::infinity();
  std::vector<double> best_p;
  std::vector<double> p(4);
  for (int k0 = 0; k0 <= steps; ++k0)
    for (int k1 = 0; k1 + k0 <= steps; ++k1)
      for (int k2 = 0; k2 + k1 + k0 <= steps; ++k2) {
        p[0] = k0 * inv;
        p[1] = k1 * inv;
        p[2] = k2 * inv;
        p[3] = (steps - k0 - k1 - k2) * inv;
        detail::consider(r, p, &best_f, &best_p);
      }
  return best_p;
}

// Expands the flat pair array (lexicographic (a, b), a < b, value = prob of
// a against b) into the full matrix the grid oracle consumes.
inline std::vector<std::vector<double>> pair_matrix(
    const std::vector<double>& pair_probs, int c) {
  std::vector<std::vector<double>> r(
      static_cast<std::size_t>(c),
      std::vector<double>(static_cast<std::size_t>(c), 0.0));
  int idx = 0;
  for (int a = 0; a < c; ++a)
    for (int b = a + 1; b < c; ++b) {
      r[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
          pair_probs[static_cast<std::size_t>(idx)];
      r[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] =
          1.0 - pair_probs[static_cast<std::size_t>(idx)];
      ++idx;
    }
  return r;
}

}  // namespace oracle
