// The seeded growth algorithm ("rocks, pebbles, sand"): districts grow from
// pre-selected seed counties, largest-population picks first, then uniform
// draws weighted by shared adjacency, under a row-indexed population cap.
//
// grow_plan is a template over the RNG so tests can drive it with scripted
// draw sequences; production uses Xoshiro256ss streams derived from
// (master_seed, run_index).
#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rps/model.hpp"
#include "rps/rng.hpp"

namespace rps {

inline constexpr int kMaxGrowthRows = 60;

// Population cap for growth row i >= 4, in hundredths of a percent of state
// population: 600 + 45 * floor((i - 3) / 3). Rows 4..5 sit at 6.00%; the
// cap then climbs by 0.45 points every third row (14.55% at row 60).
inline long long cap_hundredths(int row) {
  if (row < 4) throw std::domain_error("cap: row index must be >= 4");
  return 600 + 45LL * ((row - 3) / 3);
}

// Same cap as a fraction of state population.
inline double cap(int row) {
  return static_cast<double>(cap_hundredths(row)) / 10000.0;
}

// Flattened, allocation-free view of the dataset for the growth loop.
// Units are 0-based here; public results are translated back to ids.
struct GrowthContext {
  int n = 0;  // unit count
  int k = 0;  // district count = seed count
  long long state_pop = 0;
  std::vector<long long> pop;     // [unit]
  std::vector<int> adj_start;     // CSR offsets, size n+1
  std::vector<int> adj;           // CSR neighbor lists, each sorted
  std::vector<int> seeds;         // [column] -> unit

  static GrowthContext from_dataset(const Dataset& d);
};

enum class GrowthStatus : std::uint8_t { Completed, Exhausted };

struct GrowthOutcome {
  GrowthStatus status = GrowthStatus::Exhausted;
  int rows_used = 0;
  // The pick matrix, row-major [row][column], rows 0..59 for i = 1..60;
  // entries are county ids (1-based), 0 = no pick that cell.
  std::vector<std::int16_t> sol;

  std::int16_t at(int row, int col, int k) const {
    return sol[static_cast<size_t>(row - 1) * k + (col - 1)];
  }
  // Assignment view of a Completed outcome.
  Plan to_plan(const GrowthContext& ctx) const;
};

// Reusable per-worker buffers so repeated runs allocate nothing.
struct GrowthScratch {
  std::vector<std::uint8_t> assigned;            // [unit]
  std::vector<std::vector<int>> members;         // [column] -> units, pick order
  std::vector<long long> district_pop;           // [column]
  std::vector<int> candidates;                   // set or multiset buffer
  std::vector<int> ties;                         // max-population ties
  std::vector<int> mark;                         // dedup stamps for sets
  int epoch = 0;
};

// Largest-population candidate; exact-population ties are broken uniformly
// at random among the tied ids in ascending order. The RNG is consulted
// only when there is a real tie (two or more tied candidates), so
// deterministic picks never advance the stream. Throws std::domain_error
// on an empty candidate set.
template <class Rng>
int pick_largest_population(const std::vector<int>& candidates,
                            const Dataset& d, Rng& rng) {
  if (candidates.empty())
    throw std::domain_error("pick_largest_population: no candidates");
  long long best = -1;
  for (int id : candidates) best = std::max(best, d.county(id).population);
  std::vector<int> ties;
  for (int id : candidates)
    if (d.county(id).population == best) ties.push_back(id);
  std::sort(ties.begin(), ties.end());
  return ties[uniform_below(rng, ties.size())];
}

// The multiset of unassigned growth-neighbors of `members`, one occurrence
// per (member, neighbor) incidence — a county touching three members
// appears three times, tripling its draw weight. Order is pinned for
// reproducibility: members in pick order, each member's neighbors
// ascending.
std::vector<int> candidate_multiset(const std::vector<int>& members,
                                    const Graph& g,
                                    const std::vector<std::uint8_t>& assigned);

namespace detail {

// Candidate *set* for rows 2..3 (unique unassigned neighbors of the
// column's members), written into scratch.candidates.
void unique_unassigned_neighbors(const GrowthContext& ctx,
                                 const std::vector<int>& members,
                                 GrowthScratch& s);

}  // namespace detail

// One growth run. Row 1 seeds the k columns; rows 2 and 3 take the
// largest-population unassigned neighbor (of the seed, then of the grown
// pair), ties uniform; from row 4 on each column draws uniformly from its
// candidate multiset unless its population share already exceeds the row
// cap (strict >, checked against the share *before* the pick, in exact
// integer arithmetic: pop * 10000 > cap_hundredths * state_pop). Columns
// are processed 1..k within a row and the assigned set updates after every
// single pick, so later columns in the same row see earlier picks.
// Completion is checked after every pick; a run that finishes row 60
// incomplete is Exhausted. An empty candidate set during rows 2..3 means
// the dataset's seeds cannot support growth and throws std::runtime_error.
template <class Rng>
GrowthOutcome grow_plan(const GrowthContext& ctx, Rng& rng,
                        GrowthScratch& s) {
  const int n = ctx.n, k = ctx.k;
  s.assigned.assign(n, 0);
  s.district_pop.assign(k, 0);
  s.members.resize(k);
  for (auto& m : s.members) m.clear();

  GrowthOutcome out;
  out.sol.assign(static_cast<size_t>(kMaxGrowthRows) * k, 0);
  int assigned_count = 0;

  auto place = [&](int row, int col, int unit) {
    s.assigned[unit] = 1;
    s.members[col].push_back(unit);
    s.district_pop[col] += ctx.pop[unit];
    out.sol[static_cast<size_t>(row - 1) * k + col] =
        static_cast<std::int16_t>(unit + 1);
    ++assigned_count;
  };

  // Row 1: seeds.
  for (int col = 0; col < k; ++col) place(1, col, ctx.seeds[col]);
  if (assigned_count == n) {
    out.status = GrowthStatus::Completed;
    out.rows_used = 1;
    return out;
  }

  for (int row = 2; row <= kMaxGrowthRows; ++row) {
    for (int col = 0; col < k; ++col) {
      if (row <= 3) {
        detail::unique_unassigned_neighbors(ctx, s.members[col], s);
        if (s.candidates.empty())
          throw std::runtime_error(
              "grow_plan: a district has no unassigned neighbor during the "
              "deterministic rows; the dataset's seeds cannot support "
              "growth");
        long long best = -1;
        for (int u : s.candidates) best = std::max(best, ctx.pop[u]);
        s.ties.clear();
        for (int u : s.candidates)
          if (ctx.pop[u] == best) s.ties.push_back(u);
        std::sort(s.ties.begin(), s.ties.end());
        place(row, col,
              s.ties[static_cast<size_t>(uniform_below(rng, s.ties.size()))]);
      } else {
        if (s.district_pop[col] * 10000 >
            cap_hundredths(row) * ctx.state_pop)
          continue;  // over cap: no pick this row
        s.candidates.clear();
        for (int m : s.members[col])
          for (int e = ctx.adj_start[m]; e < ctx.adj_start[m + 1]; ++e) {
            const int u = ctx.adj[e];
            if (!s.assigned[u]) s.candidates.push_back(u);
          }
        if (s.candidates.empty()) continue;  // walled in: nothing to draw
        place(row, col,
              s.candidates[static_cast<size_t>(
                  uniform_below(rng, s.candidates.size()))]);
      }
      if (assigned_count == n) {
        out.status = GrowthStatus::Completed;
        out.rows_used = row;
        return out;
      }
    }
  }
  out.status = GrowthStatus::Exhausted;
  out.rows_used = kMaxGrowthRows;
  return out;
}

// Deterministic single run: the RNG stream is derived from
// (master_seed, run_index) and the outcome is a pure function of those plus
// the dataset.
GrowthOutcome run_once(const GrowthContext& ctx, std::uint64_t master_seed,
                       std::uint64_t run_index, GrowthScratch& scratch);

GrowthOutcome run_once(const GrowthContext& ctx, std::uint64_t master_seed,
                       std::uint64_t run_index);

}  // namespace rps
