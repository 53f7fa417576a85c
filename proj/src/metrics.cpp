#include "rps/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rps {

// ------------------------------------------------------------------ cores

double polsby_popper(double area, double perimeter) {
  if (perimeter <= 0.0)
    throw std::domain_error("polsby_popper: perimeter must be positive");
  const double value = 4.0 * std::numbers::pi * area / (perimeter * perimeter);
  if (value > 1.0 + 1e-9)
    throw std::invalid_argument(
        "polsby_popper: score " + std::to_string(value) +
        " exceeds 1; area/perimeter inputs are inconsistent");
  return std::min(value, 1.0);
}

double pop_stddev_from_shares(std::span<const double> shares_pct) {
  if (shares_pct.empty())
    throw std::domain_error("pop_stddev_from_shares: no districts");
  const double ideal = 100.0 / static_cast<double>(shares_pct.size());
  double acc = 0.0;
  for (double s : shares_pct) acc += (s - ideal) * (s - ideal);
  return std::sqrt(acc / static_cast<double>(shares_pct.size()));
}

double efficiency_gap_from_votes(std::span<const DistrictVotes> votes) {
  if (votes.empty())
    throw std::domain_error("efficiency_gap_from_votes: no districts");
  double dem_wasted = 0.0, rep_wasted = 0.0;
  long long statewide = 0;
  for (const DistrictVotes& v : votes) {
    const long long total = v.dem + v.rep;
    if (total <= 0)
      throw std::domain_error(
          "efficiency_gap_from_votes: district with zero two-party votes");
    statewide += total;
    const double half = static_cast<double>(total) / 2.0;
    if (v.dem > v.rep) {
      dem_wasted += static_cast<double>(v.dem) - half;
      rep_wasted += static_cast<double>(v.rep);
    } else if (v.rep > v.dem) {
      dem_wasted += static_cast<double>(v.dem);
      rep_wasted += static_cast<double>(v.rep) - half;
    } else {
      // Exact tie: both parties waste votes - half = half each; net zero.
      dem_wasted += half;
      rep_wasted += half;
    }
  }
  return (dem_wasted - rep_wasted) / static_cast<double>(statewide);
}

double mean_median_from_shares(std::span<const double> dem_shares) {
  if (dem_shares.empty())
    throw std::domain_error("mean_median_from_shares: no districts");
  std::vector<double> sorted(dem_shares.begin(), dem_shares.end());
  std::sort(sorted.begin(), sorted.end());
  double mean = 0.0;
  for (double s : sorted) mean += s;
  mean /= static_cast<double>(sorted.size());
  const size_t half = sorted.size() / 2;
  const double median = sorted.size() % 2
                            ? sorted[half]
                            : (sorted[half - 1] + sorted[half]) / 2.0;
  return (mean - median) * 100.0;
}

std::optional<double> lopsided_margin_from_shares(
    std::span<const double> dem_shares) {
  double dem_sum = 0.0, rep_sum = 0.0;
  int dem_wins = 0, rep_wins = 0;
  for (double s : dem_shares) {
    if (s > 0.5) {
      dem_sum += s;
      ++dem_wins;
    } else {
      // Exact 50/50 goes to the Republican column (the seats tie rule);
      // the Republican winning share there is 1 - s = 0.5.
      rep_sum += 1.0 - s;
      ++rep_wins;
    }
  }
  if (dem_wins == 0 || rep_wins == 0) return std::nullopt;
  return (dem_sum / dem_wins - rep_sum / rep_wins) * 100.0;
}

SeatCount seats_from_votes(std::span<const DistrictVotes> votes) {
  SeatCount out;
  for (const DistrictVotes& v : votes) {
    if (v.dem > v.rep) {
      ++out.dem;
    } else {
      if (v.dem == v.rep) out.tie = true;
      ++out.rep;
    }
  }
  return out;
}

// ------------------------------------------------------------- plan level

namespace {

std::vector<DistrictVotes> district_votes(const Plan& plan,
                                          const Dataset& d) {
  std::vector<DistrictVotes> votes(plan.districts);
  for (int id = 1; id <= plan.n(); ++id) {
    DistrictVotes& v = votes[plan.assignment[id] - 1];
    v.dem += d.county(id).dem_votes;
    v.rep += d.county(id).rep_votes;
  }
  return votes;
}

std::vector<double> district_dem_shares(const Plan& plan, const Dataset& d) {
  std::vector<double> shares;
  for (const DistrictVotes& v : district_votes(plan, d)) {
    const long long total = v.dem + v.rep;
    if (total <= 0)
      throw std::domain_error("district with zero two-party votes");
    shares.push_back(static_cast<double>(v.dem) /
                     static_cast<double>(total));
  }
  return shares;
}

std::vector<long long> district_populations(const Plan& plan,
                                            const Dataset& d) {
  std::vector<long long> pops(plan.districts, 0);
  for (int id = 1; id <= plan.n(); ++id)
    pops[plan.assignment[id] - 1] += d.county(id).population;
  return pops;
}

}  // namespace

std::pair<double, double> district_geometry(const std::vector<int>& members,
                                            const Dataset& d) {
  if (members.empty())
    throw std::domain_error("district_geometry: no members");
  double area = 0.0, perimeter = 0.0;
  std::vector<std::uint8_t> in_set(d.n() + 1, 0);
  for (int id : members) {
    area += d.county(id).area_km2;
    perimeter += d.county(id).perimeter_km;
    in_set[id] = 1;
  }
  // Interior borders vanish: every geometric contact between two members
  // contributed its length once to each member's perimeter.
  for (const BorderSegment& s : d.graph.borders)
    if (in_set[s.a] && in_set[s.b]) perimeter -= 2.0 * s.km;
  return {area, perimeter};
}

std::pair<double, double> pp_summary(const Plan& plan, const Dataset& d) {
  double sum = 0.0, low = 2.0;
  const auto members = district_members(plan);
  for (int label = 1; label <= plan.districts; ++label) {
    const auto [area, perimeter] = district_geometry(members[label], d);
    const double pp = polsby_popper(area, perimeter);
    sum += pp;
    low = std::min(low, pp);
  }
  return {sum / plan.districts, low};
}

double pop_stddev(const Plan& plan, const Dataset& d) {
  std::vector<double> shares;
  for (long long pop : district_populations(plan, d))
    shares.push_back(100.0 * static_cast<double>(pop) /
                     static_cast<double>(d.state_population));
  return pop_stddev_from_shares(shares);
}

double efficiency_gap(const Plan& plan, const Dataset& d) {
  return efficiency_gap_from_votes(district_votes(plan, d));
}

double mean_median(const Plan& plan, const Dataset& d) {
  return mean_median_from_shares(district_dem_shares(plan, d));
}

std::optional<double> lopsided_margin(const Plan& plan, const Dataset& d) {
  return lopsided_margin_from_shares(district_dem_shares(plan, d));
}

SeatCount seats_won(const Plan& plan, const Dataset& d) {
  return seats_from_votes(district_votes(plan, d));
}

std::pair<double, double> population_deviation(const Plan& plan,
                                               const Dataset& d) {
  const double ideal = static_cast<double>(d.state_population) /
                       static_cast<double>(plan.districts);
  double sq = 0.0, max_pe = 0.0;
  for (long long pop : district_populations(plan, d)) {
    const double pe = std::abs(static_cast<double>(pop) - ideal) / ideal;
    sq += pe * pe;
    max_pe = std::max(max_pe, pe);
  }
  return {std::sqrt(sq / plan.districts), max_pe};
}

// ------------------------------------------------------------- batch path

MetricsContext MetricsContext::from_dataset(const Dataset& d) {
  MetricsContext ctx;
  ctx.n = d.n();
  ctx.k = static_cast<int>(d.seeds.size());
  ctx.state_pop = d.state_population;
  ctx.pop.resize(ctx.n);
  ctx.dem.resize(ctx.n);
  ctx.rep.resize(ctx.n);
  ctx.area.resize(ctx.n);
  ctx.perim.resize(ctx.n);
  for (int i = 0; i < ctx.n; ++i) {
    const County& c = d.counties[static_cast<size_t>(i)];
    ctx.pop[i] = c.population;
    ctx.dem[i] = c.dem_votes;
    ctx.rep[i] = c.rep_votes;
    ctx.area[i] = c.area_km2;
    ctx.perim[i] = c.perimeter_km;
  }
  ctx.borders.reserve(d.graph.borders.size());
  for (const BorderSegment& s : d.graph.borders)
    ctx.borders.push_back({s.a - 1, s.b - 1, s.km});
  return ctx;
}

PlanMetrics compute_metrics(std::span<const std::uint8_t> labels,
                            const MetricsContext& ctx) {
  if (labels.size() != static_cast<size_t>(ctx.n))
    throw std::domain_error("compute_metrics: label array size mismatch");
  const int k = ctx.k;
  std::vector<long long> pop(k, 0);
  std::vector<DistrictVotes> votes(k);
  std::vector<double> area(k, 0.0), perim(k, 0.0);
  for (int i = 0; i < ctx.n; ++i) {
    const int j = labels[static_cast<size_t>(i)] - 1;
    if (j < 0 || j >= k)
      throw std::domain_error("compute_metrics: label outside 1..k");
    pop[j] += ctx.pop[i];
    votes[static_cast<size_t>(j)].dem += ctx.dem[i];
    votes[static_cast<size_t>(j)].rep += ctx.rep[i];
    area[j] += ctx.area[i];
    perim[j] += ctx.perim[i];
  }
  for (const MetricsContext::Border& b : ctx.borders)
    if (labels[static_cast<size_t>(b.a)] == labels[static_cast<size_t>(b.b)])
      perim[labels[static_cast<size_t>(b.a)] - 1] -= 2.0 * b.km;

  PlanMetrics m;
  std::vector<double> pop_shares(k), dem_shares(k);
  for (int j = 0; j < k; ++j) {
    pop_shares[j] = 100.0 * static_cast<double>(pop[j]) /
                    static_cast<double>(ctx.state_pop);
    const long long total = votes[static_cast<size_t>(j)].dem +
                            votes[static_cast<size_t>(j)].rep;
    if (total <= 0)
      throw std::domain_error("compute_metrics: zero-vote district");
    dem_shares[j] = static_cast<double>(votes[static_cast<size_t>(j)].dem) /
                    static_cast<double>(total);
  }
  m.pop_stddev_pp = pop_stddev_from_shares(pop_shares);
  m.pp_per_district.resize(k);
  double pp_sum = 0.0, pp_low = 2.0;
  for (int j = 0; j < k; ++j) {
    m.pp_per_district[j] = polsby_popper(area[j], perim[j]);
    pp_sum += m.pp_per_district[j];
    pp_low = std::min(pp_low, m.pp_per_district[j]);
  }
  m.pp_avg = pp_sum / k;
  m.pp_min = pp_low;
  m.efficiency_gap = efficiency_gap_from_votes(votes);
  m.mean_median_pp = mean_median_from_shares(dem_shares);
  m.lopsided_margin_pp = lopsided_margin_from_shares(dem_shares);
  const SeatCount seats = seats_from_votes(votes);
  m.seats_dem = seats.dem;
  m.seats_rep = seats.rep;
  m.seats_tie = seats.tie;
  const double ideal = static_cast<double>(ctx.state_pop) / k;
  double sq = 0.0, max_pe = 0.0;
  for (int j = 0; j < k; ++j) {
    const double pe = std::abs(static_cast<double>(pop[j]) - ideal) / ideal;
    sq += pe * pe;
    max_pe = std::max(max_pe, pe);
  }
  m.rmspd = std::sqrt(sq / k);
  m.max_pe = max_pe;
  m.hb92_pass = max_pe < 0.001;
  return m;
}

PlanMetrics compute_metrics(const Plan& plan, const Dataset& d) {
  std::vector<std::uint8_t> labels(plan.assignment.begin() + 1,
                                   plan.assignment.end());
  MetricsContext ctx = MetricsContext::from_dataset(d);
  if (ctx.k != plan.districts) ctx.k = plan.districts;
  return compute_metrics(labels, ctx);
}

}  // namespace rps
