#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hsiclass/cli.hpp"

namespace {

void add_knn_flags(CLI::App* cmd, hsiclass::KnnParams& knn) {
  cmd->add_option("--k", knn.k, "Neighbors per pixel");
  cmd->add_option("--lambda", knn.lambda,
                  "Spatial weight in the window distance");
  cmd->add_option("--window-rows", knn.window_rows,
                  "Rows per neighbor search window");
  cmd->add_option("--batch-rows", knn.batch_rows,
                  "Neighbor rows held in memory at once");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperspectral cube classifier and benchmark driver"};
  app.require_subcommand(1);

  hsiclass::ClassifyArgs classify;
  CLI::App* cmd_c =
      app.add_subcommand("classify", "Classify a cube into label maps");
  cmd_c->add_option("--cube", classify.cube, "Cube stem or .hdr path");
  cmd_c->add_option("--model", classify.model, "Model file");
  cmd_c->add_option("--out-map", classify.out_map, "Label map (P5) path");
  cmd_c->add_option("--out-color", classify.out_color,
                    "Color map (P6) path");
  add_knn_flags(cmd_c, classify.knn);
  cmd_c->add_option("--workers", classify.workers,
                    "Worker threads, 0 = all available");
  cmd_c->add_flag("--serial", classify.serial,
                  "Run the serial reference implementation");
  cmd_c->add_flag("--dump-intermediates", classify.dump_intermediates,
                  "Write the one-band image and both probability maps");
  cmd_c->add_option("--dump-neighbors", classify.dump_neighbors,
                    "Write each pixel's neighbor indices to this file");
  cmd_c->add_option("--dump-pca", classify.dump_pca,
                    "Write means/covariance/eigenvalues with this stem");

  hsiclass::BenchArgs bench;
  std::string bench_format = "text";
  CLI::App* cmd_b =
      app.add_subcommand("bench", "Time repeated runs and report FoMs");
  cmd_b->add_option("--cube", bench.cube, "Cube stem or .hdr path");
  cmd_b->add_option("--model", bench.model, "Model file");
  add_knn_flags(cmd_b, bench.knn);
  cmd_b->add_option("--workers", bench.workers,
                    "Worker threads, 0 = all available");
  cmd_b->add_option("--reps", bench.reps, "Repetitions to average");
  cmd_b->add_flag("--serial", bench.serial,
                  "Run the serial reference implementation");
  cmd_b->add_option("--watts", bench.watts, "Constant device power");
  cmd_b->add_option("--power-trace", bench.power_trace,
                    "Power trace CSV (t_ms,watts)");
  cmd_b->add_option("--out-report", bench.out_report,
                    "Also write the report to this file");
  cmd_b->add_option("--format", bench_format, "Report format: text or csv")
      ->check(CLI::IsMember({"text", "csv"}));

  hsiclass::FomsArgs foms;
  CLI::App* cmd_f =
      app.add_subcommand("foms", "Figure-of-merit calculator and table check");
  cmd_f->add_option("--time", foms.time_s, "Execution time in seconds");
  cmd_f->add_option("--power", foms.power_w, "Average power in watts");
  cmd_f->add_option("--table", foms.table,
                    "Published table CSV to recompute and check");

  hsiclass::SynthArgs synth;
  CLI::App* cmd_s =
      app.add_subcommand("synth", "Write a synthetic cube, model, and truth");
  cmd_s->add_option("--scene", synth.scene, "Scene spec file");
  cmd_s->add_option("--out", synth.out, "Output stem");
  cmd_s->add_option("--seed", synth.seed, "Scene seed");
  cmd_s->add_option("--rows", synth.rows, "Scene rows");
  cmd_s->add_option("--cols", synth.cols, "Scene columns");
  cmd_s->add_option("--bands", synth.bands, "Scene bands");
  cmd_s->add_option("--classes", synth.classes, "Scene class count");
  cmd_s->add_option("--sigma", synth.sigma, "Noise standard deviation");

  CLI11_PARSE(app, argc, argv);

  bench.format = bench_format == "csv" ? hsiclass::ReportFormat::Csv
                                       : hsiclass::ReportFormat::TextTable;

  if (app.got_subcommand(cmd_c))
    return hsiclass::cmd_classify(classify, std::cout, std::cerr);
  if (app.got_subcommand(cmd_b))
    return hsiclass::cmd_bench(bench, std::cout, std::cerr);
  if (app.got_subcommand(cmd_f))
    return hsiclass::cmd_foms(foms, std::cout, std::cerr);
  return hsiclass::cmd_synth(synth, std::cout, std::cerr);
}
