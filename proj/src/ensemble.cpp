#include "rps/ensemble.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

#include "rps/growth.hpp"

namespace rps {

namespace {

constexpr long long kChunkRuns = 8192;  // bounds slot-array memory
constexpr int kSummaryBins = 40;

// The metric columns the result summarizes, in output order. lopsided
// margin is summarized over the plans where it is defined.
struct MetricColumn {
  const char* name;
  double (*get)(const PlanMetrics&);
  bool (*defined)(const PlanMetrics&);
};

double get_lopsided(const PlanMetrics& m) { return *m.lopsided_margin_pp; }
bool always(const PlanMetrics&) { return true; }
bool has_lopsided(const PlanMetrics& m) {
  return m.lopsided_margin_pp.has_value();
}

const MetricColumn kColumns[] = {
    {"pop_stddev", [](const PlanMetrics& m) { return m.pop_stddev_pp; },
     always},
    {"pp_avg", [](const PlanMetrics& m) { return m.pp_avg; }, always},
    {"pp_min", [](const PlanMetrics& m) { return m.pp_min; }, always},
    {"efficiency_gap", [](const PlanMetrics& m) { return m.efficiency_gap; },
     always},
    {"mean_median", [](const PlanMetrics& m) { return m.mean_median_pp; },
     always},
    {"lopsided_margin", get_lopsided, has_lopsided},
    {"seats_dem",
     [](const PlanMetrics& m) { return static_cast<double>(m.seats_dem); },
     always},
    {"rmspd", [](const PlanMetrics& m) { return m.rmspd; }, always},
    {"max_pe", [](const PlanMetrics& m) { return m.max_pe; }, always},
};
constexpr size_t kColumnCount = std::size(kColumns);

void check_config(const EnsembleConfig& config) {
  if (config.runs < 1) throw std::domain_error("ensemble: runs must be >= 1");
  if (!(config.good_threshold_pp > 0.0))
    throw std::domain_error("ensemble: good threshold must be positive");
  if (config.max_rows != kMaxGrowthRows)
    throw std::domain_error("ensemble: the growth matrix is fixed at " +
                            std::to_string(kMaxGrowthRows) + " rows");
  if (config.workers < 0)
    throw std::domain_error("ensemble: workers must be >= 0");
}

std::uint64_t fnv1a(const std::uint8_t* bytes, size_t len) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Identity set over raw assignment arrays. Label arrays are canonical
// already (labels are fixed by seed column), so byte equality here is
// exactly canonical_key equality; the string form exists for the public
// key API and round-trip tests.
class DedupTable {
 public:
  explicit DedupTable(size_t n) : n_(n) {}

  // True when the plan is new (and now recorded).
  bool insert(const std::uint8_t* bytes) {
    const std::uint64_t h = fnv1a(bytes, n_);
    auto [it, fresh] = index_.try_emplace(h);
    if (!fresh) {
      for (std::uint32_t at : it->second)
        if (std::memcmp(arena_.data() + static_cast<size_t>(at) * n_, bytes,
                        n_) == 0)
          return false;
    }
    it->second.push_back(static_cast<std::uint32_t>(count_));
    arena_.insert(arena_.end(), bytes, bytes + n_);
    ++count_;
    return true;
  }

 private:
  size_t n_;
  size_t count_ = 0;
  std::vector<std::uint8_t> arena_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> index_;
};

struct Slot {
  GrowthStatus status = GrowthStatus::Exhausted;
  std::vector<std::uint8_t> labels;  // [unit] -> 1..k; empty when exhausted
  PlanMetrics metrics;
};

void fill_slot(const GrowthContext& gctx, const MetricsContext& mctx,
               std::uint64_t master_seed, long long run_index,
               GrowthScratch& scratch, Slot& slot) {
  const GrowthOutcome outcome =
      run_once(gctx, master_seed, static_cast<std::uint64_t>(run_index),
               scratch);
  slot.status = outcome.status;
  slot.labels.clear();
  if (outcome.status != GrowthStatus::Completed) return;
  slot.labels.assign(gctx.n, 0);
  for (int row = 1; row <= kMaxGrowthRows; ++row)
    for (int col = 1; col <= gctx.k; ++col) {
      const std::int16_t id = outcome.at(row, col, gctx.k);
      if (id != 0)
        slot.labels[static_cast<size_t>(id - 1)] =
            static_cast<std::uint8_t>(col);
    }
  slot.metrics = compute_metrics(slot.labels, mctx);
}

// Shared accumulation state for the merge pass (strictly ascending
// run_index order across chunks).
struct Accumulator {
  explicit Accumulator(size_t n) : dedup(n) {}

  DedupTable dedup;
  EnsembleResult result;
  std::vector<double> columns[kColumnCount];

  void merge(long long run_index, Slot& slot, bool keep_records,
             const EnsembleConfig& config, std::vector<PlanRecord>* chunk_out) {
    if (slot.status != GrowthStatus::Completed) {
      ++result.exhausted;
      return;
    }
    ++result.completed;
    if (!dedup.insert(slot.labels.data())) {
      ++result.duplicates_removed;
      return;
    }
    for (size_t c = 0; c < kColumnCount; ++c)
      if (kColumns[c].defined(slot.metrics))
        columns[c].push_back(kColumns[c].get(slot.metrics));
    const bool good =
        slot.metrics.pop_stddev_pp <= config.good_threshold_pp;
    if (good) ++result.good;
    if (!good && !config.keep_all) return;
    PlanRecord record;
    record.run_index = run_index;
    record.assignment = std::move(slot.labels);
    record.metrics = std::move(slot.metrics);
    record.good = good;
    if (chunk_out)
      chunk_out->push_back(std::move(record));
    else if (keep_records)
      result.records.push_back(std::move(record));
  }

  void finish(const EnsembleConfig& config) {
    result.config = config;
    for (size_t c = 0; c < kColumnCount; ++c)
      if (!columns[c].empty())
        result.summary.emplace_back(kColumns[c].name,
                                    summarize(columns[c], kSummaryBins));
  }
};

EnsembleResult run_ensemble_impl(
    const Dataset& d, const EnsembleConfig& config, bool keep_records,
    const std::function<void(std::span<const PlanRecord>)>* sink) {
  check_config(config);
  const GrowthContext gctx = GrowthContext::from_dataset(d);
  const MetricsContext mctx = MetricsContext::from_dataset(d);

  int threads = config.workers;
#ifdef _OPENMP
  if (threads <= 0) threads = omp_get_max_threads();
#else
  threads = 1;
#endif

  Accumulator acc(static_cast<size_t>(gctx.n));
  std::vector<Slot> slots(static_cast<size_t>(
      std::min<long long>(kChunkRuns, config.runs)));
  std::vector<PlanRecord> chunk_records;
  for (long long chunk = 0; chunk < config.runs; chunk += kChunkRuns) {
    const long long end = std::min(chunk + kChunkRuns, config.runs);
    const long long count = end - chunk;
    // Parallel phase: every slot is a pure function of its run_index.
    // Exceptions (a dataset whose seeds cannot grow) must not escape the
    // parallel region; the first one is captured and rethrown serially.
    std::exception_ptr failure = nullptr;
#ifdef _OPENMP
#pragma omp parallel num_threads(threads)
    {
      GrowthScratch scratch;
#pragma omp for schedule(dynamic, 64)
      for (long long i = 0; i < count; ++i) {
        try {
          fill_slot(gctx, mctx, config.master_seed, chunk + i, scratch,
                    slots[static_cast<size_t>(i)]);
        } catch (...) {
#pragma omp critical(rps_ensemble_failure)
          if (!failure) failure = std::current_exception();
        }
      }
    }
#else
    {
      GrowthScratch scratch;
      for (long long i = 0; i < count; ++i) {
        try {
          fill_slot(gctx, mctx, config.master_seed, chunk + i, scratch,
                    slots[static_cast<size_t>(i)]);
        } catch (...) {
          if (!failure) failure = std::current_exception();
        }
      }
    }
#endif
    if (failure) std::rethrow_exception(failure);
    // Serial merge in run_index order: dedup decisions and record order
    // never depend on scheduling.
    chunk_records.clear();
    for (long long i = 0; i < count; ++i)
      acc.merge(chunk + i, slots[static_cast<size_t>(i)], keep_records,
                config, sink ? &chunk_records : nullptr);
    if (sink && !chunk_records.empty()) (*sink)(chunk_records);
  }
  acc.finish(config);
  return std::move(acc.result);
}

}  // namespace

std::string canonical_key(std::span<const std::uint8_t> labels, int k) {
  std::vector<std::vector<int>> members(static_cast<size_t>(k) + 1);
  for (size_t i = 0; i < labels.size(); ++i) {
    const int label = labels[i];
    if (label < 1 || label > k)
      throw std::domain_error("canonical_key: label outside 1..k");
    members[static_cast<size_t>(label)].push_back(static_cast<int>(i) + 1);
  }
  std::string key;
  for (int label = 1; label <= k; ++label) {
    if (label > 1) key += '|';
    const auto& ids = members[static_cast<size_t>(label)];
    for (size_t j = 0; j < ids.size(); ++j) {
      if (j) key += ',';
      key += std::to_string(ids[j]);
    }
  }
  return key;
}

std::string canonical_key(const Plan& plan) {
  std::span<const std::uint8_t> labels(plan.assignment.data() + 1,
                                       static_cast<size_t>(plan.n()));
  return canonical_key(labels, plan.districts);
}

std::vector<std::uint8_t> parse_canonical_key(const std::string& key, int n) {
  std::vector<std::uint8_t> labels(static_cast<size_t>(n), 0);
  int label = 1;
  size_t pos = 0;
  auto fail = [&](const std::string& why) {
    throw std::domain_error("parse_canonical_key: " + why);
  };
  while (pos <= key.size()) {
    size_t next = key.find_first_of(",|", pos);
    if (next == std::string::npos) next = key.size();
    if (next == pos) fail("empty member id");
    int id = 0;
    for (size_t i = pos; i < next; ++i) {
      if (key[i] < '0' || key[i] > '9') fail("malformed member id");
      id = id * 10 + (key[i] - '0');
    }
    if (id < 1 || id > n) fail("member id outside 1..n");
    if (labels[static_cast<size_t>(id - 1)] != 0) fail("repeated member id");
    labels[static_cast<size_t>(id - 1)] = static_cast<std::uint8_t>(label);
    if (next == key.size()) break;
    if (key[next] == '|') ++label;
    pos = next + 1;
  }
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == 0)
      fail("county " + std::to_string(i + 1) + " missing from key");
  return labels;
}

Summary summarize(std::span<const double> values, int bins) {
  if (values.empty()) throw std::domain_error("summarize: empty value list");
  if (bins < 1) throw std::domain_error("summarize: bins must be >= 1");
  Summary s;
  s.min = values[0];
  s.max = values[0];
  double sum = 0.0;
  for (double v : values) {
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    sum += v;
  }
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  s.hist.lo = s.min;
  s.hist.hi = s.max;
  s.hist.counts.assign(static_cast<size_t>(bins), 0);
  const double width = (s.max - s.min) / static_cast<double>(bins);
  for (double v : values) {
    size_t bin = 0;
    if (width > 0.0) {
      bin = static_cast<size_t>((v - s.min) / width);
      // The last bin is right-closed: v == max (or a rounding overshoot)
      // lands in bin bins-1.
      bin = std::min(bin, static_cast<size_t>(bins) - 1);
    }
    ++s.hist.counts[bin];
  }
  return s;
}

EnsembleResult run_ensemble(const Dataset& d, const EnsembleConfig& config) {
  return run_ensemble_impl(d, config, /*keep_records=*/true, nullptr);
}

EnsembleResult run_ensemble_streamed(
    const Dataset& d, const EnsembleConfig& config,
    const std::function<void(std::span<const PlanRecord>)>& sink) {
  return run_ensemble_impl(d, config, /*keep_records=*/false, &sink);
}

// The reference implementation: one plain loop, no chunking, no slot
// array. Kept deliberately simple so the parallel runner can be tested
// against it byte for byte.
EnsembleResult run_ensemble_serial(const Dataset& d,
                                   const EnsembleConfig& config) {
  check_config(config);
  const GrowthContext gctx = GrowthContext::from_dataset(d);
  const MetricsContext mctx = MetricsContext::from_dataset(d);
  Accumulator acc(static_cast<size_t>(gctx.n));
  GrowthScratch scratch;
  Slot slot;
  for (long long i = 0; i < config.runs; ++i) {
    fill_slot(gctx, mctx, config.master_seed, i, scratch, slot);
    acc.merge(i, slot, /*keep_records=*/true, config, nullptr);
  }
  acc.finish(config);
  return std::move(acc.result);
}

std::vector<const PlanRecord*> filter_good(const EnsembleResult& result,
                                           double threshold_pp) {
  std::vector<const PlanRecord*> out;
  for (const PlanRecord& r : result.records)
    if (r.metrics.pop_stddev_pp <= threshold_pp) out.push_back(&r);
  return out;
}

}  // namespace rps
