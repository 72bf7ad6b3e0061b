#include "hsiclass/cli.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>
#include <vector>

#include "hsiclass/cube.hpp"
#include "hsiclass/errors.hpp"
#include "hsiclass/pipeline.hpp"
#include "hsiclass/synth.hpp"

namespace hsiclass {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string strip_extension(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return path;
  if (slash != std::string::npos && dot < slash) return path;
  return path.substr(0, dot);
}

std::string basename_stem(const std::string& path) {
  std::string stem = strip_extension(path);
  const auto slash = stem.find_last_of('/');
  if (slash != std::string::npos) stem = stem.substr(slash + 1);
  return stem.empty() ? "cube" : stem;
}

void print_timings(std::ostream& out, const StageTimings& t) {
  char line[192];
  std::snprintf(line, sizeof line,
                "timings: svm=%.3fs pca=%.3fs knn=%.3fs io=%.3fs total=%.3fs\n",
                t.svm_s, t.pca_s, t.knn_s, t.io_and_setup_s, t.total_s);
  out << line;
}

int report_error(std::ostream& err, const std::exception& e) {
  err << "error: " << e.what() << "\n";
  return 1;
}

}  // namespace

int cmd_classify(const ClassifyArgs& args, std::ostream& out,
                 std::ostream& err) {
  try {
    if (args.cube.empty() || args.model.empty() || args.out_map.empty())
      throw ParameterError("classify needs --cube, --model, and --out-map");

    const Clock::time_point load_start = Clock::now();
    const HsCube cube = load_cube(args.cube);
    const SvmModel model = load_svm_model(args.model);
    const double load_s = seconds_since(load_start);

    PipelineConfig config;
    config.workers = args.workers;
    config.knn = args.knn;
    config.serial_reference = args.serial;
    config.dump_intermediates = args.dump_intermediates;
    config.dump_prefix = strip_extension(args.out_map);
    config.neighbor_dump_path = args.dump_neighbors;
    config.pca_debug_prefix = args.dump_pca;

    PipelineResult result = run_ss_pipeline(cube, model, config);

    const Clock::time_point write_start = Clock::now();
    write_pgm(args.out_map, result.map.rows, result.map.cols,
              result.map.labels);
    out << "wrote " << args.out_map << "\n";
    if (!args.out_color.empty()) {
      const std::vector<std::uint8_t> rgb =
          colorize_labels(result.map, model.classes);
      write_ppm(args.out_color, result.map.rows, result.map.cols, rgb);
      out << "wrote " << args.out_color << "\n";
    }
    if (args.dump_intermediates)
      out << "wrote " << config.dump_prefix << ".{I,P,O}.{hdr,raw}\n";
    result.timings.io_and_setup_s = load_s + seconds_since(write_start);
    print_timings(out, result.timings);
    return 0;
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err) {
  try {
    if (args.cube.empty() || args.model.empty())
      throw ParameterError("bench needs --cube and --model");
    if (args.reps < 1)
      throw ParameterError("--reps must be >= 1, got " +
                           std::to_string(args.reps));
    if (args.watts && !args.power_trace.empty())
      throw ParameterError("give --watts or --power-trace, not both");
    if (args.watts && !(*args.watts > 0.0))
      throw ParameterError("--watts must be positive");

    const HsCube cube = load_cube(args.cube);
    const SvmModel model = load_svm_model(args.model);

    PipelineConfig config;
    config.workers = args.workers;
    config.knn = args.knn;
    config.serial_reference = args.serial;
    config.repetitions = args.reps;

    std::vector<double> durations;
    durations.reserve(static_cast<std::size_t>(args.reps));
    for (int rep = 0; rep < args.reps; ++rep) {
      const PipelineResult result = run_ss_pipeline(cube, model, config);
      durations.push_back(result.timings.total_s);
    }
    const RepetitionStats stats = repetition_stats(durations);

    FomReport report;
    report.image_id =
        cube.image_id.empty() ? basename_stem(args.cube) : cube.image_id;
    report.time_s = stats.mean;
    report.repetitions = args.reps;
    report.stddev_fraction = stats.stddev_fraction;
    if (args.watts) {
      report.power_w = *args.watts;
    } else if (!args.power_trace.empty()) {
      const PowerTrace trace = load_power_trace(args.power_trace);
      if (trace.samples.size() < 2)
        throw ParameterError(args.power_trace +
                             ": need at least 2 samples to average");
      report.power_w = average_power(trace, trace.samples.front().t_s,
                                     trace.samples.back().t_s)
                           .watts;
    }
    if (report.power_w)
      report.foms = compute_foms(report.time_s, *report.power_w);

    out << render_report(report, args.format);
    if (!args.out_report.empty()) {
      emit_report(report, args.format, args.out_report);
      out << "wrote " << args.out_report << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

int cmd_foms(const FomsArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const bool have_point = args.time_s.has_value() || args.power_w.has_value();
    if (!args.table.empty() && have_point)
      throw ParameterError("give --time/--power or --table, not both");

    if (!args.table.empty()) {
      const std::vector<PublishedFomRow> rows =
          load_published_fom_table(args.table);
      if (rows.empty()) throw FormatError(args.table + ": no data rows");
      const FomTableCheck check = check_published_fom_table(rows);
      for (const FomCellCheck& cell : check.cells) {
        if (cell.within) continue;
        char line[256];
        std::snprintf(line, sizeof line,
                      "%s cell %s/%s %s: published %g, recomputed %.4f, "
                      "reachable [%.4f, %.4f]\n",
                      cell.source_inconsistent ? "source-inconsistent"
                                               : "failed",
                      cell.image.c_str(), cell.device.c_str(), cell.which,
                      cell.published, cell.computed, cell.reach_lo,
                      cell.reach_hi);
        out << line;
      }
      out << "checked " << check.checked << " cells: " << check.within
          << " within tolerance, " << check.source_inconsistent
          << " inconsistent in source, " << check.failed << " failed\n";
      out << (check.pass ? "pass\n" : "fail\n");
      return check.pass ? 0 : 1;
    }

    if (!args.time_s || !args.power_w)
      throw ParameterError("foms needs --time and --power, or --table");
    const FomValues foms = compute_foms(*args.time_s, *args.power_w);
    char line[128];
    std::snprintf(line, sizeof line, "%.2f / %.2f / %.3f\n", foms.fom1,
                  foms.fom2, foms.fom3);
    out << line;
    return 0;
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
  try {
    if (args.out.empty()) throw ParameterError("synth needs --out");
    SyntheticScene scene;
    if (!args.scene.empty()) scene = load_scene_spec(args.scene);
    if (args.seed) scene.seed = *args.seed;
    if (args.rows) scene.rows = *args.rows;
    if (args.cols) scene.cols = *args.cols;
    if (args.bands) scene.bands = *args.bands;
    if (args.classes) scene.n_classes = *args.classes;
    if (args.sigma) scene.sigma = *args.sigma;
    scene.validate();

    const auto [cube, truth] = generate_scene(scene);
    save_cube(cube, args.out);
    const std::vector<std::vector<double>> means =
        scene.class_means.empty()
            ? default_class_means(scene.n_classes, scene.bands)
            : scene.class_means;
    const SvmModel model = analytic_model(means, scene.sigma);
    save_svm_model(model, args.out + ".model");
    write_pgm(args.out + "_truth.pgm", truth.rows, truth.cols, truth.labels);
    out << "wrote " << args.out << ".hdr " << args.out << ".raw "
        << args.out << ".model " << args.out << "_truth.pgm\n";
    return 0;
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

}  // namespace hsiclass
