#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hsiclass/cube.hpp"

namespace hsiclass {

struct SvmClass {
  int id = 0;
  std::string name;
  std::array<std::uint8_t, 3> color{0, 0, 0};
};

// One one-vs-one binary classifier for the unordered pair {a, b}, a < b.
// A positive decision value favors class a. sigmoid_a / sigmoid_b are the
// Platt scaling coefficients of r = 1 / (1 + exp(A*d + B)).
struct SvmPair {
  int a = 0;
  int b = 0;
  double sigmoid_a = 0.0;
  double sigmoid_b = 0.0;
  double bias = 0.0;
  std::vector<double> weights;
};

// Flat index of pair (a, b), a < b, in lexicographic pair order.
int pair_index(int a, int b, int n_classes);

struct SvmModel {
  int n_classes = 0;
  int bands = 0;
  std::vector<SvmClass> classes;  // ids 0..n_classes-1 in order
  std::vector<SvmPair> pairs;     // lexicographic, n_classes*(n_classes-1)/2

  int n_pairs() const { return n_classes * (n_classes - 1) / 2; }
  void validate() const;
};

SvmModel load_svm_model(const std::string& path);
void save_svm_model(const SvmModel& model, const std::string& path);

// Per-pixel decision values, pair-major: values[p * n_pairs + q].
struct DecisionValues {
  std::int64_t pixels = 0;
  int n_pairs = 0;
  std::vector<double> values;
};

// Pairwise class probabilities, same shape as DecisionValues.
struct PairProbabilities {
  std::int64_t pixels = 0;
  int n_pairs = 0;
  std::vector<double> values;
};

enum class MapRole { Raw, Filtered };

// Per-pixel class probability rows, pixel-major: values[p * n_classes + t].
struct ProbabilityMaps {
  int rows = 0;
  int cols = 0;
  int n_classes = 0;
  MapRole role = MapRole::Raw;
  std::vector<float> values;

  std::int64_t pixel_count() const {
    return static_cast<std::int64_t>(rows) * cols;
  }
  void validate() const;
};

struct ClassificationMap {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> labels;

  std::int64_t pixel_count() const {
    return static_cast<std::int64_t>(rows) * cols;
  }
};

// Probability clamp bounds shared by the sigmoid and the coupled outputs.
inline constexpr double kProbFloor = 1e-7;
inline constexpr double kProbCeil = 1.0 - 1e-7;

// Platt sigmoid with the exponent argument clamped to [-500, 500] and the
// result clamped to [kProbFloor, kProbCeil].
double sigmoid_probability(double decision, double a, double b);

// d = sum_k w[k] * x[k] + bias; the sum runs over bands left to right in
// binary64, so the value is identical for both cube layouts.
DecisionValues decision_values(const HsCube& cube, const SvmModel& model,
                               int workers = 0);

PairProbabilities binary_probabilities(const DecisionValues& decisions,
                                       const SvmModel& model, int workers = 0);

// Pairwise coupling of one pixel's pair probabilities into a class
// distribution: p >= 0, sum p = 1. Non-convergence within the sweep cap
// lowers *converged (when given) instead of failing.
std::vector<double> couple_probabilities(std::span<const double> pair_probs,
                                         int n_classes,
                                         bool* converged = nullptr);

// Full per-pixel chain: decisions, sigmoids, coupling. Raw role.
ProbabilityMaps svm_probability_maps(const HsCube& cube, const SvmModel& model,
                                     int workers = 0);

// Highest-probability class per pixel; ties go to the lowest class id.
ClassificationMap classify_argmax(const ProbabilityMaps& maps);

// Expand labels to RGB bytes using the model's class colors.
std::vector<std::uint8_t> colorize_labels(const ClassificationMap& map,
                                          const std::vector<SvmClass>& classes);

namespace detail {
// One pixel's probability row from its spectrum. Shared by the parallel and
// serial drivers so both produce identical bits.
void pixel_probabilities(const float* spectrum, std::int64_t stride,
                         const SvmModel& model, std::span<double> pair_buf,
                         float* out_row);
}  // namespace detail

}  // namespace hsiclass
