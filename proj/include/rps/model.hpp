// Core domain model: generalized counties, the dual adjacency relations,
// and district plans. Everything here is immutable after construction and
// safe to share across ensemble workers.
//
// Conventions used throughout the library:
//   - county ids are 1-based (1..n); id-indexed vectors have size n+1 with
//     slot 0 unused,
//   - district labels are 1-based (1..k); the number of districts k equals
//     the number of seeds (13 for the bundled dataset).
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rps {

struct County {
  int id = 0;
  std::string name;
  long long population = 0;
  double pop_share = 0.0;  // population / state total, derived at load
  long long dem_votes = 0;
  long long rep_votes = 0;
  double area_km2 = 0.0;
  double perimeter_km = 0.0;
};

// One geometric contact between two counties; a < b.
struct BorderSegment {
  int a = 0;
  int b = 0;
  double km = 0.0;
};

// Dual adjacency: `algo_neighbors` is the symmetric, irreflexive relation
// that drives district growth and contiguity (weak corner-touch pairs are
// excluded from it); `borders` lists *every* geometric contact with its
// shared border length, including the excluded pairs, and is what perimeter
// arithmetic uses.
struct Graph {
  int n = 0;
  std::vector<std::vector<int>> algo_neighbors;  // [id] -> sorted ids
  std::vector<BorderSegment> borders;            // each contact once, a < b

  bool algo_adjacent(int a, int b) const;
};

// The ids adjacent to `id` under the growth relation. Throws
// std::domain_error for ids outside 1..n.
const std::vector<int>& neighbors(const Graph& g, int id);

// True iff `members` induces a connected subgraph under the growth
// relation (breadth-first reachability). Throws std::domain_error on an
// empty member list or invalid ids.
bool is_contiguous(const std::vector<int>& members, const Graph& g);

// A complete assignment of every county to one of k districts.
struct Plan {
  int districts = 0;                      // k
  std::vector<std::uint8_t> assignment;   // [id] -> label 1..k, slot 0 unused
  std::vector<int> seed_of;               // [label] -> seed county id

  int n() const { return static_cast<int>(assignment.size()) - 1; }
};

// Member ids of every district, sorted ascending: result[label] (slot 0
// empty).
std::vector<std::vector<int>> district_members(const Plan& plan);

struct Dataset {
  std::vector<County> counties;  // sorted by id; ids are 1..n contiguous
  Graph graph;
  std::vector<int> seeds;        // seed county ids; position = label - 1
  long long state_population = 0;
  std::unordered_map<std::string, int> name_to_id;

  int n() const { return static_cast<int>(counties.size()); }
  const County& county(int id) const;              // throws on bad id
  int id_of(std::string_view name) const;          // -1 when absent
};

// Checks the plan invariants against a dataset: every county assigned a
// label in 1..k, every district non-empty, contains its seed, and is
// contiguous under the growth relation. Returns human-readable violations
// (empty = valid).
std::vector<std::string> validate_plan(const Plan& plan, const Dataset& d);

}  // namespace rps
