#include "rps/growth.hpp"

namespace rps {

GrowthContext GrowthContext::from_dataset(const Dataset& d) {
  GrowthContext ctx;
  ctx.n = d.n();
  ctx.k = static_cast<int>(d.seeds.size());
  ctx.state_pop = d.state_population;
  ctx.pop.resize(ctx.n);
  for (int i = 0; i < ctx.n; ++i) ctx.pop[i] = d.counties[i].population;
  ctx.adj_start.assign(ctx.n + 1, 0);
  for (int id = 1; id <= ctx.n; ++id)
    ctx.adj_start[id] = ctx.adj_start[id - 1] +
                        static_cast<int>(d.graph.algo_neighbors[id].size());
  ctx.adj.reserve(ctx.adj_start[ctx.n]);
  for (int id = 1; id <= ctx.n; ++id)
    for (int nb : d.graph.algo_neighbors[id])
      ctx.adj.push_back(nb - 1);  // ids are 1-based, units 0-based
  ctx.seeds.reserve(d.seeds.size());
  for (int s : d.seeds) ctx.seeds.push_back(s - 1);
  return ctx;
}

Plan GrowthOutcome::to_plan(const GrowthContext& ctx) const {
  if (status != GrowthStatus::Completed)
    throw std::logic_error("to_plan: outcome is not Completed");
  Plan plan;
  plan.districts = ctx.k;
  plan.assignment.assign(ctx.n + 1, 0);
  plan.seed_of.assign(ctx.k + 1, 0);
  for (int row = 1; row <= kMaxGrowthRows; ++row)
    for (int col = 1; col <= ctx.k; ++col) {
      const std::int16_t id = at(row, col, ctx.k);
      if (id != 0) plan.assignment[id] = static_cast<std::uint8_t>(col);
    }
  for (int col = 1; col <= ctx.k; ++col)
    plan.seed_of[col] = ctx.seeds[col - 1] + 1;
  for (int id = 1; id <= ctx.n; ++id)
    if (plan.assignment[id] == 0)
      throw std::logic_error("to_plan: county " + std::to_string(id) +
                             " unassigned in a Completed outcome");
  return plan;
}

std::vector<int> candidate_multiset(
    const std::vector<int>& members, const Graph& g,
    const std::vector<std::uint8_t>& assigned) {
  std::vector<int> out;
  for (int m : members)
    for (int nb : neighbors(g, m))
      if (!assigned[nb]) out.push_back(nb);
  return out;
}

namespace detail {

void unique_unassigned_neighbors(const GrowthContext& ctx,
                                 const std::vector<int>& members,
                                 GrowthScratch& s) {
  if (s.mark.size() != static_cast<size_t>(ctx.n)) {
    s.mark.assign(ctx.n, 0);
    s.epoch = 0;
  }
  ++s.epoch;
  if (s.epoch == 0) {  // wrapped: reset stamps
    std::fill(s.mark.begin(), s.mark.end(), 0);
    s.epoch = 1;
  }
  s.candidates.clear();
  for (int m : members)
    for (int e = ctx.adj_start[m]; e < ctx.adj_start[m + 1]; ++e) {
      const int u = ctx.adj[e];
      if (!s.assigned[u] && s.mark[u] != s.epoch) {
        s.mark[u] = s.epoch;
        s.candidates.push_back(u);
      }
    }
}

}  // namespace detail

GrowthOutcome run_once(const GrowthContext& ctx, std::uint64_t master_seed,
                       std::uint64_t run_index, GrowthScratch& scratch) {
  Xoshiro256ss rng = Xoshiro256ss::from_stream(master_seed, run_index);
  return grow_plan(ctx, rng, scratch);
}

GrowthOutcome run_once(const GrowthContext& ctx, std::uint64_t master_seed,
                       std::uint64_t run_index) {
  GrowthScratch scratch;
  return run_once(ctx, master_seed, run_index, scratch);
}

}  // namespace rps
