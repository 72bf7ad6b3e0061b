#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hsiclass/cube.hpp"
#include "hsiclass/svm.hpp"

namespace hsiclass {

// Deterministic synthetic scene: rectangular class blobs on a grid, one mean
// spectrum per class, isotropic Gaussian noise. Purely a function of seed.
struct SyntheticScene {
  std::uint64_t seed = 1;
  int rows = 64;
  int cols = 64;
  int bands = 16;
  int n_classes = 4;
  double sigma = 0.05;
  // Empty -> default_class_means(n_classes, bands).
  std::vector<std::vector<double>> class_means;

  void validate() const;
};

// Smooth, pairwise-distinct spectra: mean_c(b) = 0.5 + 0.4 sin(2pi(b/B + c/C)).
std::vector<std::vector<double>> default_class_means(int n_classes, int bands);

// Class table with the 4-class clinical legend (tumor red, healthy green,
// hypervascularized blue, background black); other counts get a generated
// palette.
std::vector<SvmClass> default_class_table(int n_classes);

std::pair<HsCube, ClassificationMap> generate_scene(const SyntheticScene& scene);

// Midpoint hyperplanes between class means: w = mu_a - mu_b,
// b0 = -w.(mu_a + mu_b)/2, sigmoid A = -4/max(|w|^2, 1e-12), B = 0.
// The noise level is part of the scene contract but does not enter the
// construction.
SvmModel analytic_model(const std::vector<std::vector<double>>& means,
                        double sigma = 0.0);

// Replace a seeded fraction of rows of P with a one-hot row for a uniformly
// chosen wrong class. Models label noise for filter-benefit tests.
void corrupt_probability_maps(ProbabilityMaps& maps, double fraction,
                              std::uint64_t seed);

double map_accuracy(const ClassificationMap& predicted,
                    const ClassificationMap& truth);

// Scene spec file: key=value lines (seed, rows, cols, bands, classes, sigma,
// mean_<c> = whitespace-separated spectrum). Unknown keys ignored.
SyntheticScene load_scene_spec(const std::string& path);
void save_scene_spec(const SyntheticScene& scene, const std::string& path);

}  // namespace hsiclass
