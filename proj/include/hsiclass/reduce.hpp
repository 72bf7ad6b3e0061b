#pragma once

#include <cstddef>
#include <vector>

namespace hsiclass {

// Samples per reduction chunk. Fixed so the floating-point summation tree is
// a function of the input length alone, never of the worker count.
inline constexpr std::size_t kReduceChunk = 4096;

inline std::size_t chunk_count(std::size_t n) {
  return n == 0 ? 1 : (n + kReduceChunk - 1) / kReduceChunk;
}

// Combine per-chunk partials pairwise: (p0+p1), (p2+p3), ... repeated until
// one value remains. An odd tail is carried through unchanged. The tree is
// fully determined by partials.size(), so the result is bit-identical however
// the partials were produced.
inline double combine_pairwise(std::vector<double> partials) {
  if (partials.empty()) return 0.0;
  std::size_t n = partials.size();
  while (n > 1) {
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i)
      partials[i] = partials[2 * i] + partials[2 * i + 1];
    if (n % 2 != 0) partials[half] = partials[n - 1];
    n = half + n % 2;
  }
  return partials[0];
}

// Deterministic sum of fn(i) for i in [0, n): serial left-to-right inside
// each fixed-size chunk, chunk partials combined by the pairwise tree. The
// chunk loop is safe to run with any number of OpenMP workers.
template <typename Fn>
double chunked_sum(std::size_t n, int workers, Fn&& fn) {
  const std::size_t nchunks = chunk_count(n);
  std::vector<double> partials(nchunks, 0.0);
#pragma omp parallel for num_threads(workers) schedule(static)
  for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(nchunks); ++ci) {
    const std::size_t begin = static_cast<std::size_t>(ci) * kReduceChunk;
    const std::size_t end = begin + kReduceChunk < n ? begin + kReduceChunk : n;
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += fn(i);
    partials[static_cast<std::size_t>(ci)] = acc;
  }
  return combine_pairwise(std::move(partials));
}

// Serial twin of chunked_sum. Same chunking, same tree, same bits.
template <typename Fn>
double chunked_sum_serial(std::size_t n, Fn&& fn) {
  const std::size_t nchunks = chunk_count(n);
  std::vector<double> partials(nchunks, 0.0);
  for (std::size_t ci = 0; ci < nchunks; ++ci) {
    const std::size_t begin = ci * kReduceChunk;
    const std::size_t end = begin + kReduceChunk < n ? begin + kReduceChunk : n;
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += fn(i);
    partials[ci] = acc;
  }
  return combine_pairwise(std::move(partials));
}

}  // namespace hsiclass
