#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracle_values.hpp"
#include "rps/ensemble.hpp"
#include "rps/ingest.hpp"
#include "rps/io.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using rps::Dataset;
using rps::IngestError;
using rps::IoError;
using rps::Plan;
using rps::PlanMetrics;
using rps::PlanRecord;

namespace {

const fs::path kDataDir = RPS_DATA_DIR;

const Dataset& nc_dataset() {
  static const Dataset d = rps::load_dataset(kDataDir);
  return d;
}

struct TempDir {
  fs::path dir;
  TempDir() {
    static int counter = 0;
    dir = fs::temp_directory_path() / ("rps_io_" + std::to_string(counter++));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

PlanMetrics sample_metrics(bool with_lopsided) {
  PlanMetrics m;
  m.pop_stddev_pp = 0.1 + 0.2;  // deliberately non-representable sum
  m.pp_per_district = {0.5, 0.2847619047619047, 1.0};
  m.pp_avg = 0.594920634920635;
  m.pp_min = 0.2847619047619047;
  m.efficiency_gap = -0.031415926535897931;
  m.mean_median_pp = -5.0;
  if (with_lopsided) m.lopsided_margin_pp = oracle::kLopsidedToy;
  m.seats_dem = 7;
  m.seats_rep = 6;
  m.seats_tie = with_lopsided;
  m.rmspd = 1e-17;
  m.max_pe = 0.001;
  m.hb92_pass = false;
  return m;
}

void check_metrics_equal(const PlanMetrics& a, const PlanMetrics& b) {
  CHECK(a.pop_stddev_pp == b.pop_stddev_pp);
  CHECK(a.pp_per_district == b.pp_per_district);
  CHECK(a.pp_avg == b.pp_avg);
  CHECK(a.pp_min == b.pp_min);
  CHECK(a.efficiency_gap == b.efficiency_gap);
  CHECK(a.mean_median_pp == b.mean_median_pp);
  CHECK(a.lopsided_margin_pp == b.lopsided_margin_pp);
  CHECK(a.seats_dem == b.seats_dem);
  CHECK(a.seats_rep == b.seats_rep);
  CHECK(a.seats_tie == b.seats_tie);
  CHECK(a.rmspd == b.rmspd);
  CHECK(a.max_pe == b.max_pe);
  CHECK(a.hb92_pass == b.hb92_pass);
}

}  // namespace

TEST_CASE("the metric name list is the stable nine") {
  const std::vector<std::string> expected = {
      "pop_stddev",     "pp_avg",          "pp_min",
      "efficiency_gap", "mean_median",     "lopsided_margin",
      "seats_dem",      "rmspd",           "max_pe"};
  CHECK(rps::kMetricKeys == expected);
}

TEST_CASE("ensemble records round-trip through JSONL exactly") {
  TempDir tmp;
  const fs::path file = tmp.dir / "ens.jsonl";

  std::vector<PlanRecord> records(3);
  records[0].run_index = 0;
  records[0].assignment = {1, 2, 3, 1};
  records[0].metrics = sample_metrics(true);
  records[0].good = true;
  records[1].run_index = 7;
  records[1].assignment = {2, 2, 1, 3};
  records[1].metrics = sample_metrics(false);  // lopsided margin null
  records[1].good = false;
  records[2].run_index = 8192;
  records[2].assignment = {3, 1, 2, 2};
  records[2].metrics = sample_metrics(true);
  records[2].metrics.pop_stddev_pp = 2.2250738585072014e-308;
  records[2].good = true;

  {
    std::ofstream out(file);
    for (const PlanRecord& r : records) rps::write_jsonl_record(out, r);
  }

  const std::vector<PlanRecord> back = rps::read_jsonl_records(file);
  REQUIRE(back.size() == records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].run_index == records[i].run_index);
    CHECK(back[i].assignment == records[i].assignment);
    CHECK(back[i].good == records[i].good);
    check_metrics_equal(back[i].metrics, records[i].metrics);
  }

  rps::JsonlStats stats;
  const auto pops = rps::read_jsonl_metric(file, "pop_stddev", &stats);
  CHECK(stats.lines == 3);
  REQUIRE(pops.size() == 3);
  CHECK(pops[0] == records[0].metrics.pop_stddev_pp);
  CHECK(pops[2] == 2.2250738585072014e-308);

  // Null lopsided margins are skipped, not zeroed.
  const auto lops = rps::read_jsonl_metric(file, "lopsided_margin");
  REQUIRE(lops.size() == 2);
  CHECK(lops[0] == oracle::kLopsidedToy);

  // seats_dem is served as a double column.
  const auto seats = rps::read_jsonl_metric(file, "seats_dem");
  REQUIRE(seats.size() == 3);
  CHECK(seats[1] == 7.0);
}

TEST_CASE("JSONL readers reject the right things") {
  TempDir tmp;
  const fs::path file = tmp.dir / "bad.jsonl";

  SUBCASE("unknown metric name lists the valid ones") {
    write_file(file, "");
    CHECK_THROWS_WITH_AS(
        rps::read_jsonl_metric(file, "polsby"),
        doctest::Contains("unknown metric 'polsby'"), std::domain_error);
    CHECK_THROWS_WITH_AS(rps::read_jsonl_metric(file, "polsby"),
                         doctest::Contains("pp_avg"), std::domain_error);
    // seats_rep is derivable from seats_dem and deliberately not a column.
    CHECK_THROWS_AS(rps::read_jsonl_metric(file, "seats_rep"),
                    std::domain_error);
  }
  SUBCASE("missing file is an I/O error") {
    CHECK_THROWS_AS(rps::read_jsonl_metric(tmp.dir / "absent.jsonl",
                                           "pop_stddev"),
                    IoError);
    CHECK_THROWS_AS(rps::read_jsonl_records(tmp.dir / "absent.jsonl"),
                    IoError);
  }
  SUBCASE("malformed record carries file and line") {
    write_file(file, "{\"run_index\":0}\nnot json\n");
    CHECK_THROWS_WITH_AS(rps::read_jsonl_metric(file, "pop_stddev"),
                         doctest::Contains(":1:"), IngestError);
  }
  SUBCASE("record lacking the metric is malformed content") {
    write_file(file,
               "{\"run_index\":0,\"assignment\":[1],\"metrics\":{\"pp_avg\""
               ":0.5},\"good\":true}\n");
    CHECK_THROWS_WITH_AS(rps::read_jsonl_metric(file, "pop_stddev"),
                         doctest::Contains("lacks metric"), IngestError);
  }
}

TEST_CASE("plan CSV round-trips against the dataset") {
  const Dataset& d = nc_dataset();
  const Plan plan =
      rps::read_plan_csv(kDataDir / "plans" / "best_pop_stddev.csv", d);
  CHECK(plan.districts == 13);
  CHECK(plan.n() == d.n());
  CHECK(rps::validate_plan(plan, d).empty());

  TempDir tmp;
  const fs::path copy = tmp.dir / "copy.csv";
  {
    std::ofstream out(copy);
    rps::write_plan_csv(out, plan, d);
  }
  const Plan back = rps::read_plan_csv(copy, d);
  CHECK(back.assignment == plan.assignment);
  CHECK(back.districts == plan.districts);
}

TEST_CASE("plan CSV rejects malformed content") {
  const Dataset& d = nc_dataset();
  TempDir tmp;
  const fs::path file = tmp.dir / "plan.csv";

  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(rps::read_plan_csv(tmp.dir / "absent.csv", d),
                         doctest::Contains("cannot open"), IngestError);
  }
  SUBCASE("wrong header") {
    write_file(file, "county,district\nForsyth,1\n");
    CHECK_THROWS_WITH_AS(rps::read_plan_csv(file, d),
                         doctest::Contains("header"), IngestError);
  }
  SUBCASE("empty file") {
    write_file(file, "");
    CHECK_THROWS_WITH_AS(rps::read_plan_csv(file, d),
                         doctest::Contains("empty"), IngestError);
  }
  SUBCASE("unknown county") {
    write_file(file, "county_name,district_label\nAtlantis,1\n");
    CHECK_THROWS_WITH_AS(rps::read_plan_csv(file, d),
                         doctest::Contains("Atlantis"), IngestError);
  }
  SUBCASE("duplicate assignment") {
    write_file(file,
               "county_name,district_label\nForsyth,1\nForsyth,2\n");
    CHECK_THROWS_WITH_AS(rps::read_plan_csv(file, d),
                         doctest::Contains("assigned twice"), IngestError);
  }
  SUBCASE("label must be a positive integer") {
    write_file(file, "county_name,district_label\nForsyth,0\n");
    CHECK_THROWS_AS(rps::read_plan_csv(file, d), IngestError);
    write_file(file, "county_name,district_label\nForsyth,abc\n");
    CHECK_THROWS_AS(rps::read_plan_csv(file, d), IngestError);
    write_file(file, "county_name,district_label\nForsyth,300\n");
    CHECK_THROWS_AS(rps::read_plan_csv(file, d), IngestError);
  }
  SUBCASE("a missing county surfaces in plan validation, not parsing") {
    std::ostringstream text;
    text << "county_name,district_label\n";
    for (int id = 2; id <= d.n(); ++id)  // drop county 1
      text << d.county(id).name << ',' << (1 + (id % 13)) << '\n';
    write_file(file, text.str());
    const Plan partial = rps::read_plan_csv(file, d);
    CHECK_FALSE(rps::validate_plan(partial, d).empty());
  }
}

TEST_CASE("the single-plan metric report is stable and lossless") {
  // Golden line: field order, shortest-round-trip doubles, null handling.
  PlanMetrics m;
  m.pop_stddev_pp = 1.5;
  m.pp_per_district = {0.5, 0.25};
  m.pp_avg = 0.375;
  m.pp_min = 0.25;
  m.efficiency_gap = 0.15;
  m.mean_median_pp = -5.0;
  m.lopsided_margin_pp = std::nullopt;
  m.seats_dem = 1;
  m.seats_rep = 1;
  m.seats_tie = false;
  m.rmspd = 0.5;
  m.max_pe = 0.5;
  m.hb92_pass = false;
  CHECK(rps::metrics_to_json(m) ==
        "{\"pop_stddev\":1.5,\"pp_per_district\":[0.5,0.25],"
        "\"pp_avg\":0.375,\"pp_min\":0.25,\"efficiency_gap\":0.15,"
        "\"mean_median\":-5,\"lopsided_margin\":null,\"seats_dem\":1,"
        "\"seats_rep\":1,\"seats_tie\":false,\"rmspd\":0.5,\"max_pe\":0.5,"
        "\"hb92_pass\":false}\n");

  // Lossless: every double survives a parse of the report.
  const PlanMetrics full = sample_metrics(true);
  const nlohmann::json j = nlohmann::json::parse(rps::metrics_to_json(full));
  CHECK(j.at("pop_stddev").get<double>() == full.pop_stddev_pp);
  CHECK(j.at("lopsided_margin").get<double>() == *full.lopsided_margin_pp);
  CHECK(j.at("rmspd").get<double>() == full.rmspd);
  CHECK(j.at("max_pe").get<double>() == full.max_pe);
  CHECK(j.at("seats_dem").get<int>() == full.seats_dem);
  CHECK(j.at("hb92_pass").get<bool>() == full.hb92_pass);
  REQUIRE(j.at("pp_per_district").size() == full.pp_per_district.size());
  for (size_t i = 0; i < full.pp_per_district.size(); ++i)
    CHECK(j.at("pp_per_district")[i].get<double>() ==
          full.pp_per_district[i]);
}

TEST_CASE("reference plan records load from the bundled constants") {
  const auto refs = rps::read_refs(kDataDir / "refs.json");
  REQUIRE(refs.size() == 4);
  CHECK(refs[0].name == "2012");
  CHECK(refs[1].name == "2016");
  CHECK(refs[2].name == "2020");
  CHECK(refs[3].name == "judges");
  for (const auto& r : refs) {
    CHECK_FALSE(r.description.empty());
    CHECK(r.metrics.size() == 7);
    // Overlay keys must be valid metric names or compare cannot plot them.
    for (const auto& [key, value] : r.metrics) {
      bool known = false;
      for (const std::string& k : rps::kMetricKeys) known |= (k == key);
      CHECK(known);
    }
  }
  CHECK(refs[2].metrics.at("seats_dem") == 5.0);
  CHECK(refs[3].metrics.at("pp_avg") == 0.32);
  CHECK(refs[0].metrics.at("efficiency_gap") == 0.21);
}

TEST_CASE("reference files are validated") {
  TempDir tmp;
  const fs::path file = tmp.dir / "refs.json";
  SUBCASE("missing file is an I/O error") {
    CHECK_THROWS_AS(rps::read_refs(tmp.dir / "absent.json"), IoError);
  }
  SUBCASE("top level must be an array") {
    write_file(file, "{\"name\":\"x\"}");
    CHECK_THROWS_AS(rps::read_refs(file), IngestError);
  }
  SUBCASE("duplicate names collide") {
    write_file(file,
               "[{\"name\":\"a\",\"metrics\":{}},{\"name\":\"a\"}]");
    CHECK_THROWS_WITH_AS(rps::read_refs(file),
                         doctest::Contains("duplicate"), IngestError);
  }
  SUBCASE("metric values must be numbers") {
    write_file(file, "[{\"name\":\"a\",\"metrics\":{\"pp_avg\":\"hi\"}}]");
    CHECK_THROWS_WITH_AS(rps::read_refs(file),
                         doctest::Contains("not a number"), IngestError);
  }
}

TEST_CASE("histogram export is byte-stable") {
  const std::vector<double> values = {0.0, 1.0, 2.0, 3.0};
  const rps::Summary s = rps::summarize(values, 2);
  std::vector<rps::ReferencePlanRecord> refs(2);
  refs[0].name = "alpha";
  refs[0].metrics = {{"pop_stddev", 2.5}};
  refs[1].name = "beta";
  refs[1].metrics = {{"pp_avg", 1.0}};  // lacks the plotted metric

  std::ostringstream out;
  rps::write_histogram_csv(out, s, "pop_stddev", refs);
  CHECK(out.str() ==
        "bin_low,bin_high,count\n"
        "0,1.5,2\n"
        "1.5,3,2\n"
        "ref,alpha,2.5\n");

  // Degenerate width: one bin covering a single point.
  const std::vector<double> flat = {1.0, 1.0, 1.0};
  std::ostringstream out2;
  rps::write_histogram_csv(out2, rps::summarize(flat, 1), "pp_avg", {});
  CHECK(out2.str() == "bin_low,bin_high,count\n1,1,3\n");

  std::ostringstream out3;
  CHECK_THROWS_AS(rps::write_histogram_csv(out3, s, "bogus", refs),
                  std::domain_error);
}
