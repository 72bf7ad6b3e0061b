#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "hsiclass/fom.hpp"
#include "hsiclass/knn.hpp"

namespace hsiclass {

// Subcommand argument structs mirror the long-form flags one to one; the
// executable's flag parser fills them and the cmd_* functions do the work,
// so tests can drive subcommands in-process.

struct ClassifyArgs {
  std::string cube;      // --cube (stem or .hdr path)
  std::string model;     // --model
  std::string out_map;   // --out-map (P5, one byte per pixel = class id)
  std::string out_color; // --out-color (P6 legend rendering)
  KnnParams knn;         // --k --lambda --window-rows --batch-rows
  int workers = 0;       // --workers
  bool serial = false;   // --serial
  bool dump_intermediates = false;  // --dump-intermediates
  std::string dump_neighbors;       // --dump-neighbors <path>
  std::string dump_pca;             // --dump-pca <stem>
};

struct BenchArgs {
  std::string cube;
  std::string model;
  KnnParams knn;
  int workers = 0;
  int reps = 20;                    // --reps
  bool serial = false;
  std::optional<double> watts;      // --watts (constant power)
  std::string power_trace;          // --power-trace (CSV file)
  std::string out_report;           // --out-report (empty -> stdout only)
  ReportFormat format = ReportFormat::TextTable;  // --format text|csv
};

struct FomsArgs {
  std::optional<double> time_s;  // --time
  std::optional<double> power_w; // --power
  std::string table;             // --table (published-table fixture CSV)
};

struct SynthArgs {
  std::string scene;  // --scene (spec file; empty -> defaults)
  std::string out;    // --out (stem for cube/model/truth files)
  std::optional<std::uint64_t> seed;  // --seed
  std::optional<int> rows, cols, bands, classes;  // --rows --cols ...
  std::optional<double> sigma;  // --sigma
};

int cmd_classify(const ClassifyArgs& args, std::ostream& out,
                 std::ostream& err);
int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err);
int cmd_foms(const FomsArgs& args, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err);

}  // namespace hsiclass
