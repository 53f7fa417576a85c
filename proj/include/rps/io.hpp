// Serialization: ensemble JSONL records, single-plan metric reports, plan
// CSV files, reference-plan constants, and histogram CSV export.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rps/ensemble.hpp"
#include "rps/metrics.hpp"
#include "rps/model.hpp"

namespace rps {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------------ JSONL
// One record per line:
//   {"run_index":N,"assignment":[l1,...,ln],"metrics":{...},"good":bool}
// assignment is ordered by county id; metrics keys are the stable names
// below. Doubles are shortest-round-trip formatted, so files re-parse
// losslessly.
extern const std::vector<std::string> kMetricKeys;  // valid --metric names

void write_jsonl_record(std::ostream& out, const PlanRecord& record);

struct JsonlStats {
  long long lines = 0;
};
// Extracts one metric column from an ensemble file. Unknown metric names
// throw std::domain_error (message lists the valid names); lopsided-margin
// nulls are skipped.
std::vector<double> read_jsonl_metric(const std::filesystem::path& file,
                                      const std::string& metric,
                                      JsonlStats* stats = nullptr);

// Full record round-trip (tests, small files).
std::vector<PlanRecord> read_jsonl_records(const std::filesystem::path& file);

// --------------------------------------------------------------- plan CSV
// Format: header "county_name,district_label", one row per county.
Plan read_plan_csv(const std::filesystem::path& file, const Dataset& d);
void write_plan_csv(std::ostream& out, const Plan& plan, const Dataset& d);

// ------------------------------------------------------------ metric JSON
// Single-plan metric report (the evaluate output): one JSON object with
// the metric keys plus per-district scores and the equity flags.
std::string metrics_to_json(const PlanMetrics& m);

// --------------------------------------------------------------- refs.json
struct ReferencePlanRecord {
  std::string name;
  std::string description;
  std::map<std::string, double> metrics;  // subset of kMetricKeys
};
std::vector<ReferencePlanRecord> read_refs(const std::filesystem::path& file);

// ----------------------------------------------------------- histogram CSV
// Header "bin_low,bin_high,count", one row per bin, then one
// "ref,<name>,<value>" row per reference record that carries the metric.
void write_histogram_csv(std::ostream& out, const Summary& summary,
                         const std::string& metric,
                         const std::vector<ReferencePlanRecord>& refs);

}  // namespace rps
