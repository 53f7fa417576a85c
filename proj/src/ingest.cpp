#include "rps/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

namespace rps {

namespace {

// ------------------------------------------------------------ CSV reading

struct CsvRow {
  std::string file;
  long long line = 0;
  std::vector<std::string> fields;

  [[noreturn]] void fail(const std::string& message) const {
    throw IngestError(file + ":" + std::to_string(line) + ": " + message);
  }
};

std::string trimmed(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Reads a whole CSV file: header + data rows, fields split on ',' (the
// bundled data never quotes or embeds commas). Blank lines are skipped.
std::vector<CsvRow> read_csv(const std::filesystem::path& path,
                             const std::string& expected_header) {
  std::ifstream in(path);
  if (!in)
    throw IngestError("cannot open " + path.string() +
                      ": missing or unreadable file");
  std::vector<CsvRow> rows;
  std::string line;
  long long line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trimmed(line);
    if (t.empty()) continue;
    CsvRow row{path.string(), line_no, {}};
    std::stringstream ss(t);
    std::string field;
    while (std::getline(ss, field, ',')) row.fields.push_back(trimmed(field));
    if (!t.empty() && t.back() == ',') row.fields.push_back("");
    if (!saw_header) {
      std::string got;
      for (size_t i = 0; i < row.fields.size(); ++i) {
        if (i) got += ',';
        got += row.fields[i];
      }
      if (got != expected_header)
        row.fail("expected header '" + expected_header + "', got '" + got +
                 "'");
      saw_header = true;
      continue;
    }
    rows.push_back(std::move(row));
  }
  if (!saw_header)
    throw IngestError(path.string() + ": empty file (header required)");
  return rows;
}

long long parse_count(const CsvRow& row, size_t idx, const char* what) {
  const std::string& s = row.fields[idx];
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v < 0)
    row.fail(std::string(what) + ": expected a nonnegative integer, got '" +
             s + "'");
  return v;
}

double parse_real(const CsvRow& row, size_t idx, const char* what) {
  const std::string& s = row.fields[idx];
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    row.fail(std::string(what) + ": expected a number, got '" + s + "'");
  return v;
}

void need_fields(const CsvRow& row, size_t count) {
  if (row.fields.size() != count)
    row.fail("expected " + std::to_string(count) + " fields, got " +
             std::to_string(row.fields.size()));
}

// ----------------------------------------------------- county-table stage

// A parsed counties.csv row; population may still be unknown (-1).
struct RawCounty {
  County county;
  double share_pct = 0.0;  // the file's share column, in percent
  bool population_known = false;
  CsvRow source;
};

std::vector<RawCounty> read_county_table(const std::filesystem::path& path) {
  auto rows = read_csv(
      path,
      "id,name,pop_share,population,dem_votes,rep_votes,area_km2,"
      "perimeter_km");
  std::vector<RawCounty> out;
  std::set<std::string> names;
  for (const CsvRow& row : rows) {
    need_fields(row, 8);
    RawCounty rc;
    rc.source = row;
    parse_count(row, 0, "id");  // file-local row id; final ids are assigned
    rc.county.name = row.fields[1];
    if (rc.county.name.empty()) row.fail("name: empty");
    if (!names.insert(rc.county.name).second)
      row.fail("duplicate county name '" + rc.county.name + "'");
    rc.share_pct = parse_real(row, 2, "pop_share");
    if (rc.share_pct <= 0.0) row.fail("pop_share: must be positive");
    if (!row.fields[3].empty()) {
      rc.county.population = parse_count(row, 3, "population");
      if (rc.county.population <= 0) row.fail("population: must be positive");
      rc.population_known = true;
    }
    rc.county.dem_votes = parse_count(row, 4, "dem_votes");
    rc.county.rep_votes = parse_count(row, 5, "rep_votes");
    rc.county.area_km2 = parse_real(row, 6, "area_km2");
    rc.county.perimeter_km = parse_real(row, 7, "perimeter_km");
    if (rc.county.area_km2 <= 0) row.fail("area_km2: must be positive");
    if (rc.county.perimeter_km <= 0)
      row.fail("perimeter_km: must be positive");
    out.push_back(std::move(rc));
  }
  if (out.empty()) throw IngestError(path.string() + ": no county rows");
  return out;
}

// Fills in blank populations by largest-remainder apportionment: the
// remaining state population (total minus the explicitly given counts) is
// distributed over the blank rows proportionally to their share column;
// floor first, then +1 to the largest fractional parts (ties: file order).
void reconstruct_populations(std::vector<RawCounty>& rows,
                             const LoadOptions& options) {
  std::vector<size_t> blank;
  long long given = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].population_known)
      given += rows[i].county.population;
    else
      blank.push_back(i);
  }
  if (blank.empty()) {
    if (options.state_population && *options.state_population != given)
      throw IngestError(
          "county populations sum to " + std::to_string(given) +
          " but the configured state population is " +
          std::to_string(*options.state_population));
    return;
  }
  if (!options.state_population)
    throw IngestError(
        rows[blank.front()].source.file + ":" +
        std::to_string(rows[blank.front()].source.line) +
        ": population column blank but no state population configured to "
        "reconstruct it from");
  const long long target = *options.state_population - given;
  if (target <= 0)
    throw IngestError(
        "given populations already exceed the configured state population");
  double share_sum = 0.0;
  for (size_t i : blank) share_sum += rows[i].share_pct;
  std::vector<double> frac(blank.size());
  long long floored = 0;
  for (size_t j = 0; j < blank.size(); ++j) {
    const double quota =
        rows[blank[j]].share_pct / share_sum * static_cast<double>(target);
    const auto base = static_cast<long long>(std::floor(quota));
    rows[blank[j]].county.population = base;
    frac[j] = quota - static_cast<double>(base);
    floored += base;
  }
  long long leftover = target - floored;
  if (leftover < 0 || leftover > static_cast<long long>(blank.size()))
    throw IngestError("population reconstruction failed: share column is "
                      "inconsistent with the configured state population");
  // +1 to the `leftover` largest fractional parts, file order on ties.
  std::vector<size_t> order(blank.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return frac[a] > frac[b]; });
  for (long long j = 0; j < leftover; ++j)
    ++rows[blank[order[static_cast<size_t>(j)]]].county.population;
  for (size_t i : blank)
    if (rows[i].county.population <= 0)
      rows[i].source.fail("reconstructed population is not positive");
}

// ------------------------------------------------------------ split stage

std::vector<SplitSpec> read_split_table(const std::filesystem::path& path) {
  auto rows = read_csv(
      path, "parent,sub_name,dem_votes,rep_votes,area_km2,perimeter_km");
  std::vector<SplitSpec> specs;  // file order of first appearance
  std::set<std::string> sub_names;
  for (const CsvRow& row : rows) {
    need_fields(row, 6);
    const std::string& parent = row.fields[0];
    if (parent.empty()) row.fail("parent: empty");
    SubCountySpec sub;
    sub.name = row.fields[1];
    if (sub.name.empty()) row.fail("sub_name: empty");
    if (!sub_names.insert(sub.name).second)
      row.fail("duplicate sub-county name '" + sub.name + "'");
    sub.dem_votes = parse_count(row, 2, "dem_votes");
    sub.rep_votes = parse_count(row, 3, "rep_votes");
    sub.area_km2 = parse_real(row, 4, "area_km2");
    sub.perimeter_km = parse_real(row, 5, "perimeter_km");
    if (sub.area_km2 <= 0) row.fail("area_km2: must be positive");
    if (sub.perimeter_km <= 0) row.fail("perimeter_km: must be positive");
    auto it = std::find_if(specs.begin(), specs.end(),
                           [&](const SplitSpec& s) {
                             return s.parent == parent;
                           });
    if (it == specs.end()) {
      specs.push_back(SplitSpec{parent, {}});
      it = std::prev(specs.end());
    }
    it->subs.push_back(std::move(sub));
  }
  for (const SplitSpec& s : specs)
    if (s.subs.size() < 2)
      throw IngestError(path.string() + ": split of '" + s.parent +
                        "' lists fewer than 2 sub-counties");
  return specs;
}

// --------------------------------------------------------- graph building

Graph read_adjacency(const std::filesystem::path& path, const Dataset& d,
                     std::vector<std::pair<int, int>>* override_pairs) {
  auto rows = read_csv(path, "name_a,name_b,border_km,algo_adjacent");
  Graph g;
  g.n = d.n();
  g.algo_neighbors.assign(g.n + 1, {});
  std::set<std::pair<int, int>> seen;
  for (const CsvRow& row : rows) {
    need_fields(row, 4);
    const int a = d.id_of(row.fields[0]);
    const int b = d.id_of(row.fields[1]);
    if (a < 0) row.fail("unknown county name '" + row.fields[0] + "'");
    if (b < 0) row.fail("unknown county name '" + row.fields[1] + "'");
    if (a == b) row.fail("county listed adjacent to itself");
    const double km = parse_real(row, 2, "border_km");
    if (km <= 0) row.fail("border_km: must be positive");
    const long long flag = parse_count(row, 3, "algo_adjacent");
    if (flag != 0 && flag != 1) row.fail("algo_adjacent: must be 0 or 1");
    const auto pair = std::minmax(a, b);
    if (!seen.insert({pair.first, pair.second}).second)
      row.fail("duplicate pair " + row.fields[0] + "/" + row.fields[1]);
    g.borders.push_back({pair.first, pair.second, km});
    // Every contact starts as a growth edge; the 0-flag rows are the
    // override list and are removed as a batch below, through the same
    // operation tests exercise.
    g.algo_neighbors[a].push_back(b);
    g.algo_neighbors[b].push_back(a);
    if (flag == 0) override_pairs->push_back({pair.first, pair.second});
  }
  for (auto& adj : g.algo_neighbors) std::sort(adj.begin(), adj.end());
  std::sort(g.borders.begin(), g.borders.end(),
            [](const BorderSegment& x, const BorderSegment& y) {
              return std::tie(x.a, x.b) < std::tie(y.a, y.b);
            });
  return g;
}

std::vector<int> read_seed_table(const std::filesystem::path& path,
                                 const Dataset& d) {
  auto rows = read_csv(path, "county_name");
  std::vector<int> seeds;
  for (const CsvRow& row : rows) {
    need_fields(row, 1);
    const int id = d.id_of(row.fields[0]);
    if (id < 0) row.fail("unknown county name '" + row.fields[0] + "'");
    seeds.push_back(id);
  }
  return seeds;
}

bool growth_graph_connected(const Graph& g) {
  if (g.n == 0) return false;
  std::vector<std::uint8_t> seen(g.n + 1, 0);
  std::vector<int> queue{1};
  seen[1] = 1;
  size_t head = 0, reached = 1;
  while (head < queue.size()) {
    for (int nb : g.algo_neighbors[queue[head++]]) {
      if (!seen[nb]) {
        seen[nb] = 1;
        queue.push_back(nb);
        ++reached;
      }
    }
  }
  return reached == static_cast<size_t>(g.n);
}

}  // namespace

// ----------------------------------------------------------- public: split

std::vector<County> apply_split(const County& parent, const SplitSpec& spec) {
  const auto k = static_cast<long long>(spec.subs.size());
  if (k < 2)
    throw IngestError("split of '" + parent.name +
                      "': need at least 2 sub-counties");
  // Vote totals must match the parent's within 0.5% (when the parent
  // carries votes at all).
  long long dem = 0, rep = 0;
  double area = 0.0;
  for (const SubCountySpec& sub : spec.subs) {
    dem += sub.dem_votes;
    rep += sub.rep_votes;
    area += sub.area_km2;
  }
  auto within = [](long long got, long long want, double tol) {
    return std::llabs(got - want) <=
           tol * static_cast<double>(std::max<long long>(want, 1));
  };
  if (parent.dem_votes > 0 && !within(dem, parent.dem_votes, 0.005))
    throw IngestError("split of '" + parent.name +
                      "': sub-county dem_votes sum " + std::to_string(dem) +
                      " differs from parent " +
                      std::to_string(parent.dem_votes) + " by more than 0.5%");
  if (parent.rep_votes > 0 && !within(rep, parent.rep_votes, 0.005))
    throw IngestError("split of '" + parent.name +
                      "': sub-county rep_votes sum " + std::to_string(rep) +
                      " differs from parent " +
                      std::to_string(parent.rep_votes) + " by more than 0.5%");
  if (std::abs(area - parent.area_km2) > 0.02 * parent.area_km2)
    throw IngestError("split of '" + parent.name + "': sub-county areas sum " +
                      std::to_string(area) + " differs from parent " +
                      std::to_string(parent.area_km2) + " by more than 2%");

  // Equal-population split; the remainder goes to the first subs so the
  // total is exact.
  const long long base = parent.population / k;
  const long long rem = parent.population % k;
  std::vector<County> out;
  out.reserve(spec.subs.size());
  for (long long i = 0; i < k; ++i) {
    const SubCountySpec& sub = spec.subs[static_cast<size_t>(i)];
    County c;
    c.id = 0;  // the loader renumbers once all units are known
    c.name = sub.name;
    c.population = base + (i < rem ? 1 : 0);
    c.dem_votes = sub.dem_votes;
    c.rep_votes = sub.rep_votes;
    c.area_km2 = sub.area_km2;
    c.perimeter_km = sub.perimeter_km;
    out.push_back(std::move(c));
  }
  return out;
}

// ------------------------------------------------------- public: overrides

Graph apply_adjacency_overrides(
    Graph graph, const std::vector<std::pair<int, int>>& pairs) {
  auto erase_directed = [&](int from, int to) {
    auto& adj = graph.algo_neighbors[from];
    auto it = std::lower_bound(adj.begin(), adj.end(), to);
    if (it != adj.end() && *it == to) adj.erase(it);  // absent: no-op
  };
  for (auto [a, b] : pairs) {
    if (a < 1 || a > graph.n || b < 1 || b > graph.n)
      throw std::domain_error("apply_adjacency_overrides: county id outside 1.." +
                              std::to_string(graph.n));
    erase_directed(a, b);
    erase_directed(b, a);
  }
  if (!growth_graph_connected(graph))
    throw IngestError(
        "adjacency overrides disconnect the growth graph; the dataset is "
        "unusable");
  return graph;
}

// ---------------------------------------------------------- public: loader

Dataset load_dataset_files(const std::filesystem::path& county_file,
                           const std::filesystem::path& adjacency_file,
                           const std::filesystem::path& splits_file,
                           const std::filesystem::path& seeds_file,
                           const LoadOptions& options) {
  std::vector<RawCounty> raw = read_county_table(county_file);
  reconstruct_populations(raw, options);

  // Splits come before adjacency resolution: the adjacency and seed tables
  // speak post-split names.
  std::vector<SplitSpec> splits = read_split_table(splits_file);
  std::vector<County> units;
  std::vector<std::pair<County, double>> unit_share;  // (county, share_pct)
  for (const RawCounty& rc : raw) {
    auto spec = std::find_if(splits.begin(), splits.end(),
                             [&](const SplitSpec& s) {
                               return s.parent == rc.county.name;
                             });
    if (spec == splits.end()) {
      unit_share.emplace_back(rc.county, rc.share_pct);
      continue;
    }
    for (County& sub : apply_split(rc.county, *spec))
      unit_share.emplace_back(std::move(sub),
                              rc.share_pct / static_cast<double>(
                                                 spec->subs.size()));
    spec->parent.clear();  // mark consumed
  }
  for (const SplitSpec& s : splits)
    if (!s.parent.empty())
      throw IngestError(splits_file.string() + ": split parent '" + s.parent +
                        "' not present in the county table");

  // Canonical ids: ascending unit name.
  std::sort(unit_share.begin(), unit_share.end(),
            [](const auto& a, const auto& b) {
              return a.first.name < b.first.name;
            });

  Dataset d;
  d.counties.reserve(unit_share.size());
  long long total = 0;
  for (auto& [county, share] : unit_share) total += county.population;
  d.state_population = total;
  int next_id = 1;
  for (auto& [county, share_pct] : unit_share) {
    county.id = next_id++;
    county.pop_share =
        static_cast<double>(county.population) / static_cast<double>(total);
    // The share column must agree with the (possibly reconstructed) counts.
    // Tolerance: the column's own quantization (2 published decimals), a
    // proportional term because reconstruction renormalizes when the
    // rounded shares do not sum to exactly 100, and one person of integer
    // rounding. This catches misplaced decimals and swapped columns, not
    // fifth-decimal drift.
    const double tol_pp =
        0.006 + share_pct * 0.002 + 150.0 / static_cast<double>(total);
    if (std::abs(county.pop_share * 100.0 - share_pct) > tol_pp)
      throw IngestError("county '" + county.name + "': share column " +
                        std::to_string(share_pct) +
                        "% disagrees with population-derived share " +
                        std::to_string(county.pop_share * 100.0) + "%");
    d.name_to_id.emplace(county.name, county.id);
    d.counties.push_back(std::move(county));
  }

  std::vector<std::pair<int, int>> override_pairs;
  d.graph = read_adjacency(adjacency_file, d, &override_pairs);
  d.graph = apply_adjacency_overrides(std::move(d.graph), override_pairs);
  d.seeds = read_seed_table(seeds_file, d);

  ValidationReport report = validate_dataset(d);
  if (!report.ok()) {
    std::string msg = "dataset validation failed:";
    for (const std::string& issue : report.issues) msg += "\n  - " + issue;
    throw IngestError(msg);
  }
  return d;
}

Dataset load_dataset(const std::filesystem::path& dir,
                     const LoadOptions& options) {
  return load_dataset_files(dir / "counties.csv", dir / "adjacency.csv",
                            dir / "splits.csv", dir / "seeds.csv", options);
}

// ------------------------------------------------------ public: validation

ValidationReport validate_dataset(const Dataset& d) {
  ValidationReport report;
  auto issue = [&](std::string s) { report.issues.push_back(std::move(s)); };

  const int n = d.n();
  if (n == 0) {
    issue("dataset has no counties");
    return report;
  }
  long long total = 0;
  double share_sum = 0.0;
  std::set<std::string> names;
  for (int i = 0; i < n; ++i) {
    const County& c = d.counties[static_cast<size_t>(i)];
    if (c.id != i + 1)
      issue("county ids are not contiguous ascending: position " +
            std::to_string(i) + " holds id " + std::to_string(c.id));
    if (c.name.empty()) issue("county id " + std::to_string(c.id) +
                              " has an empty name");
    if (!names.insert(c.name).second)
      issue("duplicate county name '" + c.name + "'");
    if (c.population <= 0)
      issue("county '" + c.name + "' has nonpositive population");
    if (c.area_km2 <= 0)
      issue("county '" + c.name + "' has nonpositive area");
    if (c.perimeter_km <= 0)
      issue("county '" + c.name + "' has nonpositive perimeter");
    if (c.dem_votes < 0 || c.rep_votes < 0)
      issue("county '" + c.name + "' has negative votes");
    total += c.population;
    share_sum += c.pop_share;
  }
  if (total != d.state_population)
    issue("state population " + std::to_string(d.state_population) +
          " does not equal the county sum " + std::to_string(total));
  if (std::abs(share_sum - 1.0) > 1e-6)
    issue("population shares sum to " + std::to_string(share_sum) +
          ", expected 1 within 1e-6");

  // Graph structure.
  if (d.graph.n != n) {
    issue("graph covers " + std::to_string(d.graph.n) + " nodes, expected " +
          std::to_string(n));
    return report;
  }
  if (d.graph.algo_neighbors.size() != static_cast<size_t>(n) + 1) {
    issue("graph neighbor table has wrong size");
    return report;
  }
  for (int a = 1; a <= n; ++a) {
    const auto& adj = d.graph.algo_neighbors[a];
    if (!std::is_sorted(adj.begin(), adj.end()) ||
        std::adjacent_find(adj.begin(), adj.end()) != adj.end())
      issue("neighbor list of '" + d.county(a).name +
            "' is not sorted-unique");
    for (int b : adj) {
      if (b < 1 || b > n) {
        issue("neighbor list of '" + d.county(a).name +
              "' holds invalid id " + std::to_string(b));
        continue;
      }
      if (b == a)
        issue("county '" + d.county(a).name + "' is adjacent to itself");
      else if (!std::binary_search(d.graph.algo_neighbors[b].begin(),
                                   d.graph.algo_neighbors[b].end(), a))
        issue("asymmetric adjacency: " + d.county(a).name + " -> " +
              d.county(b).name + " has no reverse entry");
    }
  }
  std::map<std::pair<int, int>, double> border_of;
  for (const BorderSegment& s : d.graph.borders) {
    if (s.a < 1 || s.a > n || s.b < 1 || s.b > n || s.a >= s.b) {
      issue("malformed border segment (" + std::to_string(s.a) + "," +
            std::to_string(s.b) + ")");
      continue;
    }
    if (s.km <= 0)
      issue("border " + d.county(s.a).name + "/" + d.county(s.b).name +
            " has nonpositive length");
    if (!border_of.emplace(std::make_pair(s.a, s.b), s.km).second)
      issue("duplicate border entry " + d.county(s.a).name + "/" +
            d.county(s.b).name);
  }
  for (int a = 1; a <= n; ++a)
    for (int b : d.graph.algo_neighbors[a]) {
      if (b <= a || b < 1 || b > n) continue;
      auto it = border_of.find({a, b});
      if (it == border_of.end() || it->second <= 0)
        issue("growth edge " + d.county(a).name + "/" + d.county(b).name +
              " has no positive border length");
    }
  if (!growth_graph_connected(d.graph))
    issue("growth graph is disconnected");

  // Seeds.
  if (d.seeds.size() != 13)
    issue("seed count " + std::to_string(d.seeds.size()) + " != 13");
  std::set<int> seed_set;
  for (int s : d.seeds) {
    if (s < 1 || s > n) {
      issue("seed id " + std::to_string(s) + " not found");
      continue;
    }
    if (!seed_set.insert(s).second)
      issue("duplicate seed '" + d.county(s).name + "'");
  }
  return report;
}

}  // namespace rps
