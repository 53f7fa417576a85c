// Dataset loading and validation: county table, county splits, the dual
// adjacency table, and growth seeds.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rps/model.hpp"

namespace rps {

// Raised for malformed input files; message carries file/line context.
struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One sub-county of a split parent.
struct SubCountySpec {
  std::string name;
  long long dem_votes = 0;
  long long rep_votes = 0;
  double area_km2 = 0.0;
  double perimeter_km = 0.0;
};

// Instruction to split one county into k equal-population sub-counties.
struct SplitSpec {
  std::string parent;
  std::vector<SubCountySpec> subs;  // k >= 2 entries, file order
};

struct LoadOptions {
  // Used to reconstruct absolute populations when the county table leaves
  // the population column blank (counts = round(share x total) with
  // largest-remainder correction).
  std::optional<long long> state_population;
};

// Splits `parent` into spec.subs.size() sub-counties: population parent/k
// with the remainder going to the lowest-index subs, votes and geometry
// taken from each sub entry. Validates that sub vote totals stay within 0.5% of
// the parent's (when the parent has votes) and that sub areas sum to the
// parent area within 2%. Sub-county ids are left 0; the loader renumbers.
std::vector<County> apply_split(const County& parent, const SplitSpec& spec);

// Removes each named pair from the growth relation (both directions);
// border lengths are untouched. Throws std::domain_error for unknown names
// via the id map, IngestError if a resulting graph is disconnected.
// Idempotent: removing an already-removed pair is a no-op.
Graph apply_adjacency_overrides(
    Graph graph, const std::vector<std::pair<int, int>>& pairs);

// Loads and validates a complete dataset from one directory containing
// counties.csv, adjacency.csv, splits.csv, and seeds.csv. Splits are
// applied before adjacency resolution (the adjacency table speaks
// post-split names); ids are assigned by ascending name. Throws
// IngestError with file/line diagnostics on parse or validation failure.
Dataset load_dataset(const std::filesystem::path& dir,
                     const LoadOptions& options = {});

// Same, with the four files named individually.
Dataset load_dataset_files(const std::filesystem::path& county_file,
                           const std::filesystem::path& adjacency_file,
                           const std::filesystem::path& splits_file,
                           const std::filesystem::path& seeds_file,
                           const LoadOptions& options = {});

struct ValidationReport {
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
};

// Structural checks on an assembled dataset: per-county ranges, share
// consistency, adjacency symmetry/irreflexivity, growth-graph
// connectivity, positive border lengths on growth edges, seed count /
// duplicates / resolution. Report-returning; never throws.
ValidationReport validate_dataset(const Dataset& d);

}  // namespace rps
