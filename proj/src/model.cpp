#include "rps/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace rps {

namespace {

void check_id(int id, int n, const char* who) {
  if (id < 1 || id > n)
    throw std::domain_error(std::string(who) + ": county id " +
                            std::to_string(id) + " outside 1.." +
                            std::to_string(n));
}

}  // namespace

bool Graph::algo_adjacent(int a, int b) const {
  check_id(a, n, "algo_adjacent");
  check_id(b, n, "algo_adjacent");
  const auto& adj = algo_neighbors[a];
  return std::binary_search(adj.begin(), adj.end(), b);
}

const std::vector<int>& neighbors(const Graph& g, int id) {
  check_id(id, g.n, "neighbors");
  return g.algo_neighbors[id];
}

bool is_contiguous(const std::vector<int>& members, const Graph& g) {
  if (members.empty())
    throw std::domain_error("is_contiguous: empty member list");
  std::vector<std::uint8_t> in_set(g.n + 1, 0);
  for (int id : members) {
    check_id(id, g.n, "is_contiguous");
    in_set[id] = 1;
  }
  // Breadth-first reachability from the first member, restricted to the set.
  std::vector<int> queue;
  std::vector<std::uint8_t> seen(g.n + 1, 0);
  queue.push_back(members.front());
  seen[members.front()] = 1;
  size_t head = 0, reached = 1;
  while (head < queue.size()) {
    const int cur = queue[head++];
    for (int nb : g.algo_neighbors[cur]) {
      if (in_set[nb] && !seen[nb]) {
        seen[nb] = 1;
        queue.push_back(nb);
        ++reached;
      }
    }
  }
  // Distinct member count (members may repeat ids).
  size_t distinct = 0;
  for (int id = 1; id <= g.n; ++id) distinct += in_set[id];
  return reached == distinct;
}

std::vector<std::vector<int>> district_members(const Plan& plan) {
  std::vector<std::vector<int>> out(plan.districts + 1);
  for (int id = 1; id <= plan.n(); ++id) {
    const int label = plan.assignment[id];
    if (label < 1 || label > plan.districts)
      throw std::domain_error("district_members: county " +
                              std::to_string(id) + " carries label " +
                              std::to_string(label) + " outside 1.." +
                              std::to_string(plan.districts));
    out[label].push_back(id);
  }
  // Ids were visited ascending, so each list is already sorted.
  return out;
}

const County& Dataset::county(int id) const {
  check_id(id, n(), "Dataset::county");
  return counties[id - 1];
}

int Dataset::id_of(std::string_view name) const {
  auto it = name_to_id.find(std::string(name));
  return it == name_to_id.end() ? -1 : it->second;
}

std::vector<std::string> validate_plan(const Plan& plan, const Dataset& d) {
  std::vector<std::string> issues;
  const int k = plan.districts;
  if (k < 1) {
    issues.push_back("plan has no districts");
    return issues;
  }
  if (plan.n() != d.n()) {
    issues.push_back("plan covers " + std::to_string(plan.n()) +
                     " counties, dataset has " + std::to_string(d.n()));
    return issues;
  }
  std::vector<std::vector<int>> members(k + 1);
  for (int id = 1; id <= plan.n(); ++id) {
    const int label = plan.assignment[id];
    if (label < 1 || label > k) {
      issues.push_back("county " + d.county(id).name + " carries label " +
                       std::to_string(label) + " outside 1.." +
                       std::to_string(k));
      continue;
    }
    members[label].push_back(id);
  }
  if (!issues.empty()) return issues;
  for (int label = 1; label <= k; ++label) {
    if (members[label].empty()) {
      issues.push_back("district " + std::to_string(label) + " is empty");
      continue;
    }
    if (plan.seed_of.size() > static_cast<size_t>(label)) {
      const int seed = plan.seed_of[label];
      if (std::find(members[label].begin(), members[label].end(), seed) ==
          members[label].end())
        issues.push_back("district " + std::to_string(label) +
                         " does not contain its seed " +
                         d.county(seed).name);
    }
    if (!is_contiguous(members[label], d.graph)) {
      std::string names;
      for (int id : members[label]) {
        if (!names.empty()) names += ", ";
        names += d.county(id).name;
      }
      issues.push_back("district " + std::to_string(label) +
                       " is not contiguous: {" + names + "}");
    }
  }
  return issues;
}

}  // namespace rps
