// Compares the OpenMP kernels against the serial reference on a synthetic
// scene: per-stage wall times, speedups, and a byte-level output check.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hsiclass/pipeline.hpp"
#include "hsiclass/synth.hpp"

namespace {

struct StageAverages {
  double svm_s = 0.0;
  double pca_s = 0.0;
  double knn_s = 0.0;
  double total_s = 0.0;
};

template <typename RunFn>
StageAverages average_runs(RunFn&& run, int reps,
                           hsiclass::PipelineResult* last) {
  StageAverages avg;
  for (int rep = 0; rep < reps; ++rep) {
    hsiclass::PipelineResult result = run();
    avg.svm_s += result.timings.svm_s;
    avg.pca_s += result.timings.pca_s;
    avg.knn_s += result.timings.knn_s;
    avg.total_s += result.timings.total_s;
    if (rep + 1 == reps) *last = std::move(result);
  }
  avg.svm_s /= reps;
  avg.pca_s /= reps;
  avg.knn_s /= reps;
  avg.total_s /= reps;
  return avg;
}

void print_row(const char* stage, double serial_s, double parallel_s) {
  std::printf("%-8s %10.4f %10.4f %9.2fx\n", stage, serial_s, parallel_s,
              parallel_s > 0.0 ? serial_s / parallel_s : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial reference vs OpenMP kernel benchmark"};
  hsiclass::SyntheticScene scene;
  scene.rows = 96;
  scene.cols = 96;
  scene.bands = 24;
  int reps = 3;
  int workers = 0;
  app.add_option("--rows", scene.rows, "Scene rows");
  app.add_option("--cols", scene.cols, "Scene columns");
  app.add_option("--bands", scene.bands, "Scene bands");
  app.add_option("--classes", scene.n_classes, "Scene class count");
  app.add_option("--seed", scene.seed, "Scene seed");
  app.add_option("--reps", reps, "Repetitions to average");
  app.add_option("--workers", workers, "Worker threads, 0 = all available");
  CLI11_PARSE(app, argc, argv);

  try {
    scene.validate();
    const auto [cube, truth] = hsiclass::generate_scene(scene);
    const hsiclass::SvmModel model = hsiclass::analytic_model(
        hsiclass::default_class_means(scene.n_classes, scene.bands),
        scene.sigma);

    hsiclass::PipelineConfig config;
    config.workers = workers;

    hsiclass::PipelineResult serial_out;
    hsiclass::PipelineConfig serial_config = config;
    serial_config.serial_reference = true;
    const StageAverages serial_avg = average_runs(
        [&] { return hsiclass::run_serial_reference(cube, model, serial_config); },
        reps, &serial_out);

    hsiclass::PipelineResult parallel_out;
    const StageAverages parallel_avg = average_runs(
        [&] { return hsiclass::run_ss_pipeline(cube, model, config); }, reps,
        &parallel_out);

    std::printf("scene %dx%dx%d, %d classes, seed %llu, %d reps\n",
                scene.rows, scene.cols, scene.bands, scene.n_classes,
                static_cast<unsigned long long>(scene.seed), reps);
    std::printf("%-8s %10s %10s %10s\n", "stage", "serial_s", "omp_s",
                "speedup");
    print_row("svm", serial_avg.svm_s, parallel_avg.svm_s);
    print_row("pca", serial_avg.pca_s, parallel_avg.pca_s);
    print_row("knn", serial_avg.knn_s, parallel_avg.knn_s);
    print_row("total", serial_avg.total_s, parallel_avg.total_s);

    const bool identical =
        serial_out.map.labels == parallel_out.map.labels &&
        serial_out.raw.values == parallel_out.raw.values &&
        serial_out.filtered.values == parallel_out.filtered.values &&
        serial_out.one_band.values == parallel_out.one_band.values;
    std::printf("outputs bit-identical: %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
