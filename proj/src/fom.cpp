#include "hsiclass/fom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "hsiclass/errors.hpp"

namespace hsiclass {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

double parse_double(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw FormatError(where + ": bad number '" + text + "'");
  }
  if (used != text.size())
    throw FormatError(where + ": bad number '" + text + "'");
  if (!std::isfinite(value))
    throw FormatError(where + ": non-finite number '" + text + "'");
  return value;
}

std::string fmt(const char* spec, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, value);
  return buf;
}

}  // namespace

void PowerTrace::validate() const {
  if (samples.empty()) throw ValidationError("power trace has no samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i].t_s) || !std::isfinite(samples[i].watts))
      throw ValidationError("power trace sample " + std::to_string(i) +
                            " is not finite");
    if (samples[i].watts < 0.0)
      throw ValidationError("power trace sample " + std::to_string(i) +
                            " has negative power");
    if (i > 0 && samples[i].t_s <= samples[i - 1].t_s)
      throw ValidationError("power trace timestamps must strictly increase "
                            "(sample " + std::to_string(i) + ")");
  }
}

PowerTrace load_power_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open power trace " + path);
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line))
    throw FormatError(path + ": empty power trace");
  ++lineno;
  if (trim(line) != "t_ms,watts")
    throw FormatError(path + ":1: expected header 't_ms,watts'");
  PowerTrace trace;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto fields = split_csv(t);
    if (fields.size() != 2)
      throw FormatError(where + ": expected 't_ms,watts'");
    PowerSample sample;
    sample.t_s = parse_double(fields[0], where) / 1000.0;
    sample.watts = parse_double(fields[1], where);
    trace.samples.push_back(sample);
  }
  trace.validate();
  return trace;
}

AveragePower average_power(const PowerTrace& trace, double t0, double t1) {
  trace.validate();
  if (!(t0 < t1))
    throw ParameterError("average_power needs t0 < t1, got [" +
                         std::to_string(t0) + ", " + std::to_string(t1) + "]");
  const double span_lo = trace.samples.front().t_s;
  const double span_hi = trace.samples.back().t_s;
  const double lo = std::max(t0, span_lo);
  const double hi = std::min(t1, span_hi);
  if (!(lo < hi))
    throw ParameterError("power trace [" + std::to_string(span_lo) + ", " +
                         std::to_string(span_hi) +
                         "] does not overlap the query interval");

  // Piecewise-linear power; trapezoid over each segment's overlap with
  // [lo, hi], normalized by the clipped length.
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < trace.samples.size(); ++i) {
    const PowerSample& a = trace.samples[i];
    const PowerSample& b = trace.samples[i + 1];
    const double seg_lo = std::max(a.t_s, lo);
    const double seg_hi = std::min(b.t_s, hi);
    if (seg_lo >= seg_hi) continue;
    const double inv_dt = 1.0 / (b.t_s - a.t_s);
    const double w_lo = a.watts + (b.watts - a.watts) * (seg_lo - a.t_s) * inv_dt;
    const double w_hi = a.watts + (b.watts - a.watts) * (seg_hi - a.t_s) * inv_dt;
    integral += 0.5 * (w_lo + w_hi) * (seg_hi - seg_lo);
  }
  AveragePower result;
  result.watts = integral / (hi - lo);
  result.clipped = t0 < span_lo || t1 > span_hi;
  return result;
}

FomValues compute_foms(double time_s, double power_w) {
  if (!(time_s > 0.0) || !std::isfinite(time_s))
    throw ParameterError("time must be positive, got " +
                         std::to_string(time_s));
  if (!(power_w > 0.0) || !std::isfinite(power_w))
    throw ParameterError("power must be positive, got " +
                         std::to_string(power_w));
  FomValues foms;
  foms.fom1 = kFomScale / (time_s * power_w);
  foms.fom2 = kFomScale / (time_s * time_s * power_w);
  foms.fom3 = kFomScale / (time_s * power_w * power_w);
  return foms;
}

RepetitionStats repetition_stats(std::span<const double> durations) {
  if (durations.empty())
    throw ParameterError("repetition_stats needs at least one duration");
  for (double d : durations)
    if (!(d > 0.0) || !std::isfinite(d))
      throw ParameterError("durations must be positive and finite");
  RepetitionStats stats;
  double sum = 0.0;
  for (double d : durations) sum += d;
  stats.mean = sum / static_cast<double>(durations.size());
  if (durations.size() == 1) return stats;
  double sq = 0.0;
  for (double d : durations) sq += (d - stats.mean) * (d - stats.mean);
  const double variance = sq / static_cast<double>(durations.size());
  stats.stddev_fraction = std::sqrt(variance) / stats.mean;
  return stats;
}

std::string render_report(const FomReport& report, ReportFormat format) {
  const std::string time_text = fmt("%.2f", report.time_s);
  const std::string power_text =
      report.power_w ? fmt("%.2f", *report.power_w) : "-";
  std::string fom_text[3] = {"-", "-", "-"};
  if (report.foms) {
    fom_text[0] = fmt("%.2f", report.foms->fom1);
    fom_text[1] = fmt("%.2f", report.foms->fom2);
    fom_text[2] = fmt("%.3f", report.foms->fom3);
  }
  const std::string stddev_text = fmt("%.2f", report.stddev_fraction * 100.0);

  std::ostringstream out;
  if (format == ReportFormat::Csv) {
    out << "image,time_s,power_w,fom1,fom2,fom3,reps,stddev_pct\n";
    out << report.image_id << ',' << time_text << ',' << power_text << ','
        << fom_text[0] << ',' << fom_text[1] << ',' << fom_text[2] << ','
        << report.repetitions << ',' << stddev_text << '\n';
    return out.str();
  }
  char line[256];
  std::snprintf(line, sizeof line,
                "%-16s %8s %8s %8s %8s %8s %5s %11s\n", "image", "time_s",
                "power_w", "fom1", "fom2", "fom3", "reps", "stddev_pct");
  out << line;
  std::snprintf(line, sizeof line, "%-16s %8s %8s %8s %8s %8s %5d %11s\n",
                report.image_id.c_str(), time_text.c_str(),
                power_text.c_str(), fom_text[0].c_str(), fom_text[1].c_str(),
                fom_text[2].c_str(), report.repetitions, stddev_text.c_str());
  out << line;
  if (report.stddev_fraction > kRepeatabilityLimit)
    out << "note: time stddev " << stddev_text
        << "% exceeds the 1% repeatability limit\n";
  return out.str();
}

void emit_report(const FomReport& report, ReportFormat format,
                 const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write report " + path);
  out << render_report(report, format);
  if (!out) throw IoError("short write on report " + path);
}

std::vector<PublishedFomRow> load_published_fom_table(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open table " + path);
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw FormatError(path + ": empty table");
  ++lineno;
  if (trim(line) != "image,device,time_s,power_w,fom1,fom2,fom3")
    throw FormatError(path +
                      ":1: expected header "
                      "'image,device,time_s,power_w,fom1,fom2,fom3'");
  std::vector<PublishedFomRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto fields = split_csv(t);
    if (fields.size() != 7)
      throw FormatError(where + ": expected 7 fields, got " +
                        std::to_string(fields.size()));
    PublishedFomRow row;
    row.image = fields[0];
    row.device = fields[1];
    if (row.image.empty() || row.device.empty())
      throw FormatError(where + ": empty image or device");
    row.time_text = fields[2];
    row.power_text = fields[3];
    row.time_s = parse_double(fields[2], where);
    row.power_w = parse_double(fields[3], where);
    for (int f = 0; f < 3; ++f) {
      row.fom_text[f] = fields[static_cast<std::size_t>(4 + f)];
      row.fom[f] = parse_double(row.fom_text[f], where);
    }
    if (row.time_s <= 0.0 || row.power_w <= 0.0)
      throw FormatError(where + ": time and power must be positive");
    rows.push_back(row);
  }
  return rows;
}

namespace {

// Unit of a printed value's last digit: "0.45" -> 0.01, "142" -> 1.
double print_unit(const std::string& text) {
  const auto dot = text.find('.');
  if (dot == std::string::npos) return 1.0;
  const int decimals = static_cast<int>(text.size() - dot - 1);
  return std::pow(10.0, -decimals);
}

double fom_of(int which, double time_s, double power_w) {
  const FomValues foms = compute_foms(time_s, power_w);
  return which == 0 ? foms.fom1 : which == 1 ? foms.fom2 : foms.fom3;
}

}  // namespace

FomTableCheck check_published_fom_table(
    const std::vector<PublishedFomRow>& rows) {
  static const char* kNames[3] = {"fom1", "fom2", "fom3"};
  FomTableCheck check;
  for (const PublishedFomRow& row : rows) {
    const double half_t = 0.5 * print_unit(row.time_text);
    const double half_p = 0.5 * print_unit(row.power_text);
    for (int f = 0; f < 3; ++f) {
      FomCellCheck cell;
      cell.image = row.image;
      cell.device = row.device;
      cell.which = kNames[f];
      cell.published = row.fom[f];
      cell.computed = fom_of(f, row.time_s, row.power_w);
      const double diff = std::abs(cell.computed - cell.published);
      cell.rel_err = cell.published != 0.0
                         ? diff / std::abs(cell.published)
                         : (diff == 0.0
                                ? 0.0
                                : std::numeric_limits<double>::infinity());
      const double unit = print_unit(row.fom_text[f]);
      cell.print_ulp_err = diff / unit;
      cell.within = cell.rel_err <= kFomRelTolerance + 1e-9 ||
                    cell.print_ulp_err <= 1.0 + 1e-9;
      // All three figures decrease in both T and P, so the values reachable
      // from operands within half a printed digit of (T, P) form the
      // interval [f(T + h_t, P + h_p), f(T - h_t, P - h_p)].
      cell.reach_lo = fom_of(f, row.time_s + half_t, row.power_w + half_p);
      cell.reach_hi = fom_of(f, row.time_s - half_t, row.power_w - half_p);
      // Granting the printed cell its own half-digit rounding slack, a
      // value disjoint from the reachable interval cannot have come from
      // the printed operands; the cell, not this code, is wrong.
      const double slack = 0.5 * unit;
      cell.source_inconsistent =
          !cell.within && (cell.published + slack < cell.reach_lo ||
                           cell.published - slack > cell.reach_hi);
      ++check.checked;
      if (cell.within) ++check.within;
      else if (cell.source_inconsistent) ++check.source_inconsistent;
      else ++check.failed;
      check.cells.push_back(std::move(cell));
    }
  }
  check.pass = check.failed == 0;
  return check;
}

}  // namespace hsiclass
