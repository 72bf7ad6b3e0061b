#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hsiclass {

struct PowerSample {
  double t_s = 0.0;
  double watts = 0.0;
};

// Sampled power over time; timestamps strictly increasing, power >= 0.
struct PowerTrace {
  std::vector<PowerSample> samples;
  void validate() const;
};

// CSV with header line `t_ms,watts`, one sample per line.
PowerTrace load_power_trace(const std::string& path);

struct AveragePower {
  double watts = 0.0;
  // True when [t0, t1] extends past the trace and the integral was computed
  // on the overlap only.
  bool clipped = false;
};

// Time-weighted mean over [t0, t1]: trapezoidal integral / (t1 - t0 within
// the trace). Reduces to the sample mean for a uniform cadence.
AveragePower average_power(const PowerTrace& trace, double t0, double t1);

struct FomValues {
  double fom1 = 0.0;  // s / (T   * P)
  double fom2 = 0.0;  // s / (T^2 * P)
  double fom3 = 0.0;  // s / (T   * P^2)
};

// Uniform report scale applied to all three figures of merit.
inline constexpr double kFomScale = 1000.0;

FomValues compute_foms(double time_s, double power_w);

struct RepetitionStats {
  double mean = 0.0;
  double stddev_fraction = 0.0;  // population stddev / mean; 0 for one sample
};

RepetitionStats repetition_stats(std::span<const double> durations);

// Repeatability criterion: the time stddev fraction should stay under 1%.
inline constexpr double kRepeatabilityLimit = 0.01;

struct FomReport {
  std::string image_id;
  double time_s = 0.0;
  int repetitions = 0;
  double stddev_fraction = 0.0;
  std::optional<double> power_w;  // absent -> FoM columns render "-"
  std::optional<FomValues> foms;
};

enum class ReportFormat { TextTable, Csv };

// Deterministic bytes; columns image, time_s, power_w, fom1, fom2, fom3,
// reps, stddev_pct. The text table appends a note when the repeatability
// criterion fails.
std::string render_report(const FomReport& report, ReportFormat format);
void emit_report(const FomReport& report, ReportFormat format,
                 const std::string& path);

// ---------------------------------------------------------------------------
// Published-table regression
// ---------------------------------------------------------------------------

// One row of a published results table, values kept verbatim as printed so
// the checker knows each cell's print precision.
struct PublishedFomRow {
  std::string image;
  std::string device;
  std::string time_text;
  std::string power_text;
  std::string fom_text[3];
  double time_s = 0.0;
  double power_w = 0.0;
  double fom[3] = {0.0, 0.0, 0.0};
};

// CSV: image,device,time_s,power_w,fom1,fom2,fom3 with one header line.
std::vector<PublishedFomRow> load_published_fom_table(const std::string& path);

struct FomCellCheck {
  std::string image;
  std::string device;
  const char* which = "";  // "fom1" | "fom2" | "fom3"
  double published = 0.0;
  double computed = 0.0;
  double rel_err = 0.0;
  double print_ulp_err = 0.0;  // |computed - published| in last-digit units
  // Interval of values reachable from the printed operands, each within
  // half a unit of its own last printed digit.
  double reach_lo = 0.0;
  double reach_hi = 0.0;
  bool within = false;              // rel <= 2% or print_ulp_err <= 1
  bool source_inconsistent = false; // outside tolerance AND published value
                                    // unreachable from its own printed T, P
                                    // even allowing +-1 last-digit unit
};

struct FomTableCheck {
  std::vector<FomCellCheck> cells;
  int checked = 0;
  int within = 0;
  int source_inconsistent = 0;
  int failed = 0;
  bool pass = false;  // failed == 0
};

// Relative tolerance for recomputed vs published FoM cells. Published T and
// P are rounded to two decimals, so cells are also accepted at one unit of
// their last printed digit.
inline constexpr double kFomRelTolerance = 0.02;

FomTableCheck check_published_fom_table(
    const std::vector<PublishedFomRow>& rows);

}  // namespace hsiclass
