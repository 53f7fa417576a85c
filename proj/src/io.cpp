#include "rps/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "rps/ingest.hpp"

namespace rps {

const std::vector<std::string> kMetricKeys = {
    "pop_stddev", "pp_avg",          "pp_min",    "efficiency_gap",
    "mean_median", "lopsided_margin", "seats_dem", "rmspd",
    "max_pe"};

namespace {

// Shortest round-trip formatting; output re-parses to the identical double.
void append_double(std::string& out, double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, p);
}

// The metrics object shared by the JSONL records and the evaluate report.
void append_metrics_object(std::string& out, const PlanMetrics& m) {
  out += "{\"pop_stddev\":";
  append_double(out, m.pop_stddev_pp);
  out += ",\"pp_per_district\":[";
  for (size_t i = 0; i < m.pp_per_district.size(); ++i) {
    if (i) out += ',';
    append_double(out, m.pp_per_district[i]);
  }
  out += "],\"pp_avg\":";
  append_double(out, m.pp_avg);
  out += ",\"pp_min\":";
  append_double(out, m.pp_min);
  out += ",\"efficiency_gap\":";
  append_double(out, m.efficiency_gap);
  out += ",\"mean_median\":";
  append_double(out, m.mean_median_pp);
  out += ",\"lopsided_margin\":";
  if (m.lopsided_margin_pp)
    append_double(out, *m.lopsided_margin_pp);
  else
    out += "null";
  out += ",\"seats_dem\":" + std::to_string(m.seats_dem);
  out += ",\"seats_rep\":" + std::to_string(m.seats_rep);
  out += ",\"seats_tie\":";
  out += m.seats_tie ? "true" : "false";
  out += ",\"rmspd\":";
  append_double(out, m.rmspd);
  out += ",\"max_pe\":";
  append_double(out, m.max_pe);
  out += ",\"hb92_pass\":";
  out += m.hb92_pass ? "true" : "false";
  out += '}';
}

PlanMetrics metrics_from_json(const nlohmann::json& j) {
  PlanMetrics m;
  m.pop_stddev_pp = j.at("pop_stddev").get<double>();
  for (const auto& v : j.at("pp_per_district"))
    m.pp_per_district.push_back(v.get<double>());
  m.pp_avg = j.at("pp_avg").get<double>();
  m.pp_min = j.at("pp_min").get<double>();
  m.efficiency_gap = j.at("efficiency_gap").get<double>();
  m.mean_median_pp = j.at("mean_median").get<double>();
  if (!j.at("lopsided_margin").is_null())
    m.lopsided_margin_pp = j.at("lopsided_margin").get<double>();
  m.seats_dem = j.at("seats_dem").get<int>();
  m.seats_rep = j.at("seats_rep").get<int>();
  m.seats_tie = j.at("seats_tie").get<bool>();
  m.rmspd = j.at("rmspd").get<double>();
  m.max_pe = j.at("max_pe").get<double>();
  m.hb92_pass = j.at("hb92_pass").get<bool>();
  return m;
}

[[noreturn]] void unknown_metric(const std::string& metric) {
  std::string msg = "unknown metric '" + metric + "'; valid names:";
  for (const std::string& k : kMetricKeys) msg += " " + k;
  throw std::domain_error(msg);
}

bool metric_known(const std::string& metric) {
  for (const std::string& k : kMetricKeys)
    if (k == metric) return true;
  return false;
}

}  // namespace

// ------------------------------------------------------------------ JSONL

void write_jsonl_record(std::ostream& out, const PlanRecord& record) {
  std::string line;
  line.reserve(1024);
  line += "{\"run_index\":" + std::to_string(record.run_index);
  line += ",\"assignment\":[";
  for (size_t i = 0; i < record.assignment.size(); ++i) {
    if (i) line += ',';
    line += std::to_string(record.assignment[i]);
  }
  line += "],\"metrics\":";
  append_metrics_object(line, record.metrics);
  line += ",\"good\":";
  line += record.good ? "true" : "false";
  line += "}\n";
  out << line;
}

std::vector<double> read_jsonl_metric(const std::filesystem::path& file,
                                      const std::string& metric,
                                      JsonlStats* stats) {
  if (!metric_known(metric)) unknown_metric(metric);
  std::ifstream in(file);
  if (!in)
    throw IoError("cannot open " + file.string() +
                  ": missing or unreadable file");
  std::vector<double> values;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw IngestError(file.string() + ":" + std::to_string(line_no) +
                        ": malformed record");
    try {
      const auto& metrics = j.at("metrics");
      const auto it = metrics.find(metric);
      if (it == metrics.end())
        throw IngestError(file.string() + ":" + std::to_string(line_no) +
                          ": record lacks metric '" + metric + "'");
      if (it->is_null()) continue;  // undefined for this plan (lopsided)
      values.push_back(it->get<double>());
    } catch (const nlohmann::json::exception&) {
      throw IngestError(file.string() + ":" + std::to_string(line_no) +
                        ": malformed record");
    }
  }
  if (stats) stats->lines = line_no;
  return values;
}

std::vector<PlanRecord> read_jsonl_records(
    const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in)
    throw IoError("cannot open " + file.string() +
                  ": missing or unreadable file");
  std::vector<PlanRecord> records;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw IngestError(file.string() + ":" + std::to_string(line_no) +
                        ": malformed record");
    try {
      PlanRecord r;
      r.run_index = j.at("run_index").get<long long>();
      for (const auto& v : j.at("assignment"))
        r.assignment.push_back(v.get<std::uint8_t>());
      r.metrics = metrics_from_json(j.at("metrics"));
      r.good = j.at("good").get<bool>();
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception&) {
      throw IngestError(file.string() + ":" + std::to_string(line_no) +
                        ": malformed record");
    }
  }
  return records;
}

// --------------------------------------------------------------- plan CSV

Plan read_plan_csv(const std::filesystem::path& file, const Dataset& d) {
  std::ifstream in(file);
  if (!in)
    throw IngestError("cannot open " + file.string() +
                      ": missing or unreadable file");
  Plan plan;
  plan.districts = static_cast<int>(d.seeds.size());
  plan.assignment.assign(static_cast<size_t>(d.n()) + 1, 0);
  std::string line;
  long long line_no = 0;
  bool saw_header = false;
  int max_label = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw IngestError(file.string() + ":" + std::to_string(line_no) +
                        ": " + why);
    };
    if (!saw_header) {
      if (line != "county_name,district_label")
        fail("expected header 'county_name,district_label'");
      saw_header = true;
      continue;
    }
    const size_t comma = line.rfind(',');
    if (comma == std::string::npos) fail("expected 2 fields");
    const std::string name = line.substr(0, comma);
    const std::string label_text = line.substr(comma + 1);
    const int id = d.id_of(name);
    if (id < 0) fail("unknown county name '" + name + "'");
    int label = 0;
    auto [p, ec] = std::from_chars(
        label_text.data(), label_text.data() + label_text.size(), label);
    if (ec != std::errc() || p != label_text.data() + label_text.size() ||
        label < 1)
      fail("district_label: expected a positive integer, got '" +
           label_text + "'");
    if (label > 255) fail("district_label " + label_text + " too large");
    if (plan.assignment[static_cast<size_t>(id)] != 0)
      fail("county '" + name + "' assigned twice");
    plan.assignment[static_cast<size_t>(id)] =
        static_cast<std::uint8_t>(label);
    max_label = std::max(max_label, label);
  }
  if (!saw_header)
    throw IngestError(file.string() + ": empty file (header required)");
  plan.districts = std::max(plan.districts, max_label);
  // seed_of stays empty: an external plan file carries no seed claim.
  return plan;
}

void write_plan_csv(std::ostream& out, const Plan& plan, const Dataset& d) {
  out << "county_name,district_label\n";
  for (int id = 1; id <= plan.n(); ++id)
    out << d.county(id).name << ','
        << static_cast<int>(plan.assignment[static_cast<size_t>(id)]) << '\n';
}

// ------------------------------------------------------------ metric JSON

std::string metrics_to_json(const PlanMetrics& m) {
  std::string out;
  append_metrics_object(out, m);
  out += '\n';
  return out;
}

// --------------------------------------------------------------- refs.json

std::vector<ReferencePlanRecord> read_refs(
    const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in)
    throw IoError("cannot open " + file.string() +
                  ": missing or unreadable file");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_array())
    throw IngestError(file.string() +
                      ": expected a JSON array of reference plan records");
  std::vector<ReferencePlanRecord> refs;
  std::set<std::string> names;
  for (const auto& item : j) {
    ReferencePlanRecord r;
    r.name = item.at("name").get<std::string>();
    if (!names.insert(r.name).second)
      throw IngestError(file.string() +
                        ": duplicate reference plan name '" + r.name + "'");
    if (item.contains("description"))
      r.description = item.at("description").get<std::string>();
    if (item.contains("metrics"))
      for (const auto& [key, value] : item.at("metrics").items()) {
        if (!value.is_number())
          throw IngestError(file.string() + ": reference '" + r.name +
                            "' metric '" + key + "' is not a number");
        r.metrics.emplace(key, value.get<double>());
      }
    refs.push_back(std::move(r));
  }
  return refs;
}

// ----------------------------------------------------------- histogram CSV

void write_histogram_csv(std::ostream& out, const Summary& summary,
                         const std::string& metric,
                         const std::vector<ReferencePlanRecord>& refs) {
  if (!metric_known(metric)) unknown_metric(metric);
  out << "bin_low,bin_high,count\n";
  const auto bins = static_cast<int>(summary.hist.counts.size());
  const double lo = summary.hist.lo, hi = summary.hist.hi;
  for (int i = 0; i < bins; ++i) {
    const double b_lo = lo + (hi - lo) * i / bins;
    const double b_hi = i + 1 == bins ? hi : lo + (hi - lo) * (i + 1) / bins;
    std::string row;
    append_double(row, b_lo);
    row += ',';
    append_double(row, b_hi);
    row += ',' + std::to_string(summary.hist.counts[static_cast<size_t>(i)]);
    out << row << '\n';
  }
  for (const ReferencePlanRecord& r : refs) {
    const auto it = r.metrics.find(metric);
    if (it == r.metrics.end()) continue;
    std::string row = "ref," + r.name + ',';
    append_double(row, it->second);
    out << row << '\n';
  }
}

}  // namespace rps
