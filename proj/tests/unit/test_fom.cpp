#include "doctest.h"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "hsiclass/errors.hpp"
#include "hsiclass/fom.hpp"
#include "tmpdir.hpp"

using namespace hsiclass;

namespace {

const std::string kFixtures = HSICLASS_FIXTURE_DIR;

PowerTrace trace_of(std::initializer_list<PowerSample> samples) {
  PowerTrace t;
  t.samples = samples;
  return t;
}

}  // namespace

TEST_CASE("power trace validation") {
  CHECK_THROWS_AS(PowerTrace{}.validate(), ValidationError);
  CHECK_THROWS_AS(
      trace_of({{0.0, 1.0}, {0.0, 2.0}}).validate(), ValidationError);
  CHECK_THROWS_AS(
      trace_of({{1.0, 1.0}, {0.5, 2.0}}).validate(), ValidationError);
  CHECK_THROWS_AS(trace_of({{0.0, -1.0}}).validate(), ValidationError);
  trace_of({{0.0, 0.0}, {1.0, 10.0}}).validate();
}

TEST_CASE("load_power_trace") {
  TmpDir tmp("fom_trace");
  SUBCASE("parses milliseconds into seconds") {
    std::ofstream out(tmp.file("t.csv"));
    out << "t_ms,watts\n0,30\n500,40\n1000,35\n";
    out.close();
    const PowerTrace trace = load_power_trace(tmp.file("t.csv"));
    REQUIRE(trace.samples.size() == 3);
    CHECK(trace.samples[1].t_s == 0.5);
    CHECK(trace.samples[1].watts == 40.0);
    CHECK(trace.samples[2].t_s == 1.0);
  }
  SUBCASE("rejects a wrong header") {
    std::ofstream out(tmp.file("bad.csv"));
    out << "time,power\n0,30\n";
    out.close();
    CHECK_THROWS_WITH_AS(load_power_trace(tmp.file("bad.csv")),
                         doctest::Contains("t_ms,watts"), FormatError);
  }
  SUBCASE("bad rows carry their line number") {
    std::ofstream out(tmp.file("bad2.csv"));
    out << "t_ms,watts\n0,30\nxyz,40\n";
    out.close();
    CHECK_THROWS_WITH_AS(load_power_trace(tmp.file("bad2.csv")),
                         doctest::Contains(":3"), FormatError);
  }
  SUBCASE("fixture trace loads") {
    const PowerTrace trace =
        load_power_trace(kFixtures + "/k40_pb1c1_trace.csv");
    REQUIRE(trace.samples.size() == 5);
    CHECK(trace.samples.front().t_s == 0.0);
    CHECK(trace.samples.back().t_s == 1.77);
  }
}

TEST_CASE("average_power") {
  SUBCASE("constant trace averages to the constant") {
    const PowerTrace t = trace_of({{0.0, 36.58}, {1.0, 36.58}, {2.0, 36.58}});
    const AveragePower avg = average_power(t, 0.0, 2.0);
    CHECK(avg.watts == doctest::Approx(36.58).epsilon(1e-12));
    CHECK_FALSE(avg.clipped);
  }
  SUBCASE("linear ramp averages to the midpoint") {
    const PowerTrace t = trace_of({{0.0, 0.0}, {1.0, 10.0}});
    const AveragePower avg = average_power(t, 0.0, 1.0);
    CHECK(avg.watts == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("sub-interval of a ramp uses the trapezoid, not the sample mean") {
    // Over [0.5, 1.0] the ramp runs 5 -> 10, mean 7.5.
    const PowerTrace t = trace_of({{0.0, 0.0}, {1.0, 10.0}});
    CHECK(average_power(t, 0.5, 1.0).watts ==
          doctest::Approx(7.5).epsilon(1e-12));
  }
  SUBCASE("interval past the trace clips and says so") {
    const PowerTrace t = trace_of({{0.0, 10.0}, {1.0, 10.0}});
    const AveragePower avg = average_power(t, 0.0, 2.0);
    CHECK(avg.watts == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(avg.clipped);
  }
  SUBCASE("empty overlap is an error") {
    const PowerTrace t = trace_of({{0.0, 10.0}, {1.0, 10.0}});
    CHECK_THROWS_AS(average_power(t, 2.0, 3.0), ParameterError);
  }
  SUBCASE("reversed interval is an error") {
    const PowerTrace t = trace_of({{0.0, 10.0}, {1.0, 10.0}});
    CHECK_THROWS_AS(average_power(t, 1.0, 0.5), ParameterError);
  }
  SUBCASE("triangle fixture averages to the published device power") {
    // Every segment of the triangle wave has trapezoid mean 36.58, so the
    // full-span average lands exactly on the table's power figure.
    const PowerTrace trace =
        load_power_trace(kFixtures + "/k40_pb1c1_trace.csv");
    const AveragePower avg = average_power(trace, 0.0, 1.77);
    CHECK(avg.watts == doctest::Approx(36.58).epsilon(1e-9));
    CHECK_FALSE(avg.clipped);
  }
}

TEST_CASE("compute_foms") {
  SUBCASE("published desktop operating point") {
    const FomValues f = compute_foms(1.77, 36.58);
    CHECK(f.fom1 == doctest::Approx(15.36).epsilon(0.02));
    CHECK(f.fom2 == doctest::Approx(8.63).epsilon(0.02));
    CHECK(f.fom3 == doctest::Approx(0.420).epsilon(0.02));
    // Exact values for the report formatter.
    CHECK(f.fom1 == doctest::Approx(15.4448).epsilon(1e-4));
    CHECK(f.fom2 == doctest::Approx(8.7259).epsilon(1e-4));
    CHECK(f.fom3 == doctest::Approx(0.42222).epsilon(1e-4));
  }
  SUBCASE("second published point") {
    const FomValues f = compute_foms(1.99, 38.79);
    CHECK(f.fom1 == doctest::Approx(12.92).epsilon(0.02));
  }
  SUBCASE("unit values isolate the scale") {
    const FomValues f = compute_foms(1.0, 1000.0);
    CHECK(f.fom1 == 1.0);
    CHECK(f.fom2 == 1.0);
    CHECK(f.fom3 == 0.001);
  }
  SUBCASE("definitions hold as identities") {
    const FomValues f = compute_foms(3.7, 21.4);
    CHECK(f.fom2 == doctest::Approx(f.fom1 / 3.7).epsilon(1e-12));
    CHECK(f.fom3 == doctest::Approx(f.fom1 / 21.4).epsilon(1e-12));
    CHECK(f.fom1 == doctest::Approx(1000.0 / (3.7 * 21.4)).epsilon(1e-12));
  }
  SUBCASE("faster or leaner always scores higher") {
    const FomValues slow = compute_foms(2.0, 30.0);
    const FomValues fast = compute_foms(1.5, 30.0);
    const FomValues lean = compute_foms(2.0, 25.0);
    CHECK(fast.fom1 > slow.fom1);
    CHECK(fast.fom2 > slow.fom2);
    CHECK(fast.fom3 > slow.fom3);
    CHECK(lean.fom1 > slow.fom1);
    CHECK(lean.fom3 > slow.fom3);
  }
  SUBCASE("non-positive operands are rejected") {
    CHECK_THROWS_AS(compute_foms(0.0, 10.0), ParameterError);
    CHECK_THROWS_AS(compute_foms(1.0, 0.0), ParameterError);
    CHECK_THROWS_AS(compute_foms(-1.0, 10.0), ParameterError);
  }
}

TEST_CASE("repetition_stats") {
  SUBCASE("identical runs have zero spread") {
    const double d[] = {2.0, 2.0, 2.0};
    const RepetitionStats s = repetition_stats(d);
    CHECK(s.mean == 2.0);
    CHECK(s.stddev_fraction == 0.0);
  }
  SUBCASE("hand-computed population stddev") {
    // Mean 2, population variance ((1)^2 + (1)^2) / 2 = 1, stddev 1,
    // fraction 0.5.
    const double d[] = {1.0, 3.0};
    const RepetitionStats s = repetition_stats(d);
    CHECK(s.mean == 2.0);
    CHECK(s.stddev_fraction == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("single sample reports zero spread") {
    const double d[] = {1.5};
    const RepetitionStats s = repetition_stats(d);
    CHECK(s.mean == 1.5);
    CHECK(s.stddev_fraction == 0.0);
  }
  SUBCASE("tight spread stays under the repeatability limit") {
    std::vector<double> d(20, 1.0);
    d[3] = 1.01;
    const RepetitionStats s = repetition_stats(d);
    CHECK(s.stddev_fraction < kRepeatabilityLimit);
  }
  SUBCASE("bad inputs are rejected") {
    CHECK_THROWS_AS(repetition_stats({}), ParameterError);
    const double neg[] = {1.0, -2.0};
    CHECK_THROWS_AS(repetition_stats(neg), ParameterError);
  }
}

TEST_CASE("render_report") {
  FomReport report;
  report.image_id = "PB1C1";
  report.time_s = 1.77;
  report.repetitions = 20;
  report.stddev_fraction = 0.004;
  report.power_w = 36.58;
  report.foms = compute_foms(1.77, 36.58);

  SUBCASE("csv row carries the exact printed figures") {
    const std::string csv = render_report(report, ReportFormat::Csv);
    CHECK(csv ==
          "image,time_s,power_w,fom1,fom2,fom3,reps,stddev_pct\n"
          "PB1C1,1.77,36.58,15.44,8.73,0.422,20,0.40\n");
  }
  SUBCASE("text table holds the same numbers") {
    const std::string text = render_report(report, ReportFormat::TextTable);
    CHECK(text.find("PB1C1") != std::string::npos);
    CHECK(text.find("1.77") != std::string::npos);
    CHECK(text.find("36.58") != std::string::npos);
    CHECK(text.find("15.44") != std::string::npos);
    CHECK(text.find("8.73") != std::string::npos);
    CHECK(text.find("0.422") != std::string::npos);
    CHECK(text.find("note:") == std::string::npos);
  }
  SUBCASE("missing power renders dashes and no foms") {
    report.power_w.reset();
    report.foms.reset();
    const std::string csv = render_report(report, ReportFormat::Csv);
    CHECK(csv.find("PB1C1,1.77,-,-,-,-,20,0.40") != std::string::npos);
  }
  SUBCASE("repeatability violations are called out in the text table") {
    report.stddev_fraction = 0.0994;
    const std::string text = render_report(report, ReportFormat::TextTable);
    CHECK(text.find("note: time stddev 9.94% exceeds the 1% repeatability "
                    "limit") != std::string::npos);
    const std::string csv = render_report(report, ReportFormat::Csv);
    CHECK(csv.find("note") == std::string::npos);
    CHECK(csv.find("9.94") != std::string::npos);
  }
  SUBCASE("rendering is deterministic") {
    CHECK(render_report(report, ReportFormat::TextTable) ==
          render_report(report, ReportFormat::TextTable));
  }
  SUBCASE("emit_report writes the same bytes") {
    TmpDir tmp("fom_report");
    emit_report(report, ReportFormat::Csv, tmp.file("r.csv"));
    std::ifstream in(tmp.file("r.csv"));
    const std::string body((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    CHECK(body == render_report(report, ReportFormat::Csv));
  }
}

TEST_CASE("load_published_fom_table") {
  SUBCASE("fixture row count and verbatim texts") {
    const auto rows =
        load_published_fom_table(kFixtures + "/gpu_desktop_foms.csv");
    REQUIRE(rows.size() == 18);
    CHECK(rows[0].image == "PB1C1");
    CHECK(rows[0].device == "Tesla K40");
    CHECK(rows[0].time_text == "1.77");
    CHECK(rows[0].power_text == "36.58");
    CHECK(rows[0].fom_text[0] == "15.36");
    CHECK(rows[0].fom_text[2] == "0.420");
    CHECK(rows[0].time_s == 1.77);
    CHECK(rows[0].fom[1] == 8.63);
  }
  SUBCASE("all three fixtures parse with the expected row counts") {
    CHECK(load_published_fom_table(kFixtures + "/gpu_embedded_foms.csv")
              .size() == 18);
    CHECK(load_published_fom_table(kFixtures + "/manycore_foms.csv").size() ==
          24);
  }
  SUBCASE("wrong header is rejected") {
    TmpDir tmp("fom_table");
    std::ofstream out(tmp.file("bad.csv"));
    out << "image,time_s,power_w,fom1,fom2,fom3\nA,1,2,3,4,5\n";
    out.close();
    CHECK_THROWS_AS(load_published_fom_table(tmp.file("bad.csv")),
                    FormatError);
  }
  SUBCASE("short rows are rejected with their line number") {
    TmpDir tmp("fom_table2");
    std::ofstream out(tmp.file("bad.csv"));
    out << "image,device,time_s,power_w,fom1,fom2,fom3\nA,dev,1,2,3\n";
    out.close();
    CHECK_THROWS_WITH_AS(load_published_fom_table(tmp.file("bad.csv")),
                         doctest::Contains(":2"), FormatError);
  }
  SUBCASE("non-positive time is rejected") {
    TmpDir tmp("fom_table3");
    std::ofstream out(tmp.file("bad.csv"));
    out << "image,device,time_s,power_w,fom1,fom2,fom3\nA,dev,0,2,3,4,5\n";
    out.close();
    CHECK_THROWS_WITH_AS(load_published_fom_table(tmp.file("bad.csv")),
                         doctest::Contains("positive"), FormatError);
  }
}

TEST_CASE("check_published_fom_table") {
  SUBCASE("synthetic rows within tolerance pass") {
    PublishedFomRow row;
    row.image = "X";
    row.device = "dev";
    row.time_text = "2.00";
    row.power_text = "25.00";
    row.fom_text[0] = "20.00";
    row.fom_text[1] = "10.00";
    row.fom_text[2] = "0.800";
    row.time_s = 2.0;
    row.power_w = 25.0;
    row.fom[0] = 20.0;
    row.fom[1] = 10.0;
    row.fom[2] = 0.8;
    const FomTableCheck check = check_published_fom_table({row});
    CHECK(check.checked == 3);
    CHECK(check.within == 3);
    CHECK(check.failed == 0);
    CHECK(check.pass);
  }
  SUBCASE("a cell unreachable from its own operands flags the source") {
    // 30.00 cannot come from T = 2.00, P = 25.00 under any rounding of the
    // operands (the reachable band sits near 20), so the table itself is
    // inconsistent; the check reports that without failing the build.
    PublishedFomRow row;
    row.image = "X";
    row.device = "dev";
    row.time_text = "2.00";
    row.power_text = "25.00";
    row.fom_text[0] = "30.00";
    row.fom_text[1] = "10.00";
    row.fom_text[2] = "0.800";
    row.time_s = 2.0;
    row.power_w = 25.0;
    row.fom[0] = 30.0;
    row.fom[1] = 10.0;
    row.fom[2] = 0.8;
    const FomTableCheck check = check_published_fom_table({row});
    CHECK(check.source_inconsistent == 1);
    CHECK(check.failed == 0);
    CHECK(check.pass);
    CHECK(check.cells[0].source_inconsistent);
    CHECK_FALSE(check.cells[0].within);
  }
  SUBCASE("a reachable cell outside tolerance fails the check") {
    // T printed as 0.05 carries a 10% half-ulp, so its reachable band is far
    // wider than the 2% tolerance; a published figure inside the band but
    // outside the tolerance indicts the recomputation, not the table.
    PublishedFomRow row;
    row.image = "X";
    row.device = "dev";
    row.time_text = "0.05";
    row.power_text = "10.00";
    row.fom_text[0] = "2150.00";  // recomputed: 2000.00
    row.fom_text[1] = "40000.00";
    row.fom_text[2] = "200.000";
    row.time_s = 0.05;
    row.power_w = 10.0;
    row.fom[0] = 2150.0;
    row.fom[1] = 40000.0;
    row.fom[2] = 200.0;
    const FomTableCheck check = check_published_fom_table({row});
    REQUIRE(check.checked == 3);
    CHECK(check.cells[0].rel_err > kFomRelTolerance);
    CHECK(check.cells[0].reach_lo <= 2150.0);
    CHECK(2150.0 <= check.cells[0].reach_hi);
    CHECK_FALSE(check.cells[0].source_inconsistent);
    CHECK(check.failed >= 1);
    CHECK_FALSE(check.pass);
  }
  SUBCASE("coarse printing is accepted through the ulp rule") {
    // fom2 of (192.68 s, 8.47 W) is 0.00318; printed as 0.003 the relative
    // error is 6% but the print-ulp error is under one.
    PublishedFomRow row;
    row.image = "PB1C1";
    row.device = "1-1";
    row.time_text = "192.68";
    row.power_text = "8.47";
    row.fom_text[0] = "0.61";
    row.fom_text[1] = "0.003";
    row.fom_text[2] = "0.072";
    row.time_s = 192.68;
    row.power_w = 8.47;
    row.fom[0] = 0.61;
    row.fom[1] = 0.003;
    row.fom[2] = 0.072;
    const FomTableCheck check = check_published_fom_table({row});
    CHECK(check.within == 3);
    CHECK(check.pass);
  }
  SUBCASE("desktop fixture has exactly one source inconsistency") {
    const FomTableCheck check = check_published_fom_table(
        load_published_fom_table(kFixtures + "/gpu_desktop_foms.csv"));
    CHECK(check.checked == 54);
    CHECK(check.within == 53);
    CHECK(check.source_inconsistent == 1);
    CHECK(check.failed == 0);
    CHECK(check.pass);
    for (const FomCellCheck& cell : check.cells)
      if (cell.source_inconsistent) {
        CHECK(cell.image == "PD1C2");
        CHECK(cell.device == "Tesla K40");
        CHECK(std::string(cell.which) == "fom2");
        CHECK(cell.published == 0.45);
        // The recomputed value and the whole reachable interval sit above
        // the printed figure by more than half its last-digit unit.
        CHECK(cell.computed == doctest::Approx(0.46012).epsilon(1e-4));
        CHECK(cell.reach_lo > 0.455);
      }
  }
  SUBCASE("embedded and manycore fixtures are fully consistent") {
    const FomTableCheck embedded = check_published_fom_table(
        load_published_fom_table(kFixtures + "/gpu_embedded_foms.csv"));
    CHECK(embedded.checked == 54);
    CHECK(embedded.within == 54);
    CHECK(embedded.pass);
    const FomTableCheck manycore = check_published_fom_table(
        load_published_fom_table(kFixtures + "/manycore_foms.csv"));
    CHECK(manycore.checked == 72);
    CHECK(manycore.within == 72);
    CHECK(manycore.pass);
  }
  SUBCASE("every fixture cell stays reachable from its printed operands") {
    for (const char* name : {"/gpu_desktop_foms.csv",
                             "/gpu_embedded_foms.csv",
                             "/manycore_foms.csv"}) {
      const FomTableCheck check =
          check_published_fom_table(load_published_fom_table(kFixtures + name));
      for (const FomCellCheck& cell : check.cells) {
        CHECK(cell.reach_lo <= cell.computed);
        CHECK(cell.computed <= cell.reach_hi);
      }
    }
  }
}
