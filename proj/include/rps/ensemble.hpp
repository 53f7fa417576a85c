// Ensemble orchestration: run many growth simulations, deduplicate, filter
// "good" plans, and summarize metric distributions.
//
// Determinism contract: for fixed (dataset, runs, master_seed) the result —
// including record order, dedup decisions, and every metric byte — is
// identical regardless of worker count. Runs execute in parallel into a
// slot array indexed by run_index; merging is a serial pass in run_index
// order.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rps/metrics.hpp"
#include "rps/model.hpp"

namespace rps {

struct EnsembleConfig {
  long long runs = 0;
  std::uint64_t master_seed = 0;
  double good_threshold_pp = 1.0;  // "good" = pop_stddev <= this
  int max_rows = 60;
  int workers = 0;  // 0 = all available
  bool keep_all = false;  // retain non-good plans in records/output
};

struct PlanRecord {
  long long run_index = 0;
  std::vector<std::uint8_t> assignment;  // [unit 0-based] -> label 1..k
  PlanMetrics metrics;
  bool good = false;
};

struct Histogram {
  double lo = 0.0, hi = 0.0;  // value range covered
  std::vector<long long> counts;
};

struct Summary {
  double min = 0.0, max = 0.0, mean = 0.0, stddev = 0.0;
  Histogram hist;
};

struct EnsembleResult {
  EnsembleConfig config;
  long long completed = 0;
  long long exhausted = 0;
  long long duplicates_removed = 0;
  long long good = 0;
  // Deduplicated plans ascending by run_index. When keep_all is false only
  // good plans are retained here (counters above still cover everything).
  std::vector<PlanRecord> records;
  // Stable-ordered per-metric summaries over all deduplicated plans.
  std::vector<std::pair<std::string, Summary>> summary;
};

// Canonical text key: per district the member ids sorted ascending and
// joined with ','; districts in label order joined with '|'. Equal plans
// produce equal keys and vice versa.
std::string canonical_key(const Plan& plan);
std::string canonical_key(std::span<const std::uint8_t> labels, int k);

// Inverse of canonical_key: rebuilds the 0-based label array.
std::vector<std::uint8_t> parse_canonical_key(const std::string& key, int n);

// Equal-width histogram over [min(values), max(values)] — left-closed
// bins, the last bin right-closed — plus moments (population stddev).
// Throws std::domain_error on an empty list or bins < 1.
Summary summarize(std::span<const double> values, int bins);

// The OpenMP runner (workers from config) and the serial reference
// implementation. Both produce identical results by construction; the
// serial runner exists to test exactly that and as the baseline for the
// benchmark.
EnsembleResult run_ensemble(const Dataset& d, const EnsembleConfig& config);
EnsembleResult run_ensemble_serial(const Dataset& d,
                                   const EnsembleConfig& config);

// Streaming variant backing the CLI: after each deduplicated chunk is
// merged (in run_index order) `sink` receives the retained records so the
// caller can serialize and discard them; EnsembleResult.records stays
// empty, counters and summaries are complete. Behavior and output are
// byte-identical to run_ensemble modulo record storage.
EnsembleResult run_ensemble_streamed(
    const Dataset& d, const EnsembleConfig& config,
    const std::function<void(std::span<const PlanRecord>)>& sink);

// Pointers into result.records with pop_stddev <= threshold (inclusive).
std::vector<const PlanRecord*> filter_good(const EnsembleResult& result,
                                           double threshold_pp);

}  // namespace rps
