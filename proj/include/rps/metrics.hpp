// Plan scoring: population equity, Polsby-Popper compactness, and the
// partisan measures (efficiency gap, mean-median, lopsided margin, seats).
//
// The per-measure functions are exposed in two layers:
//   - core functions over plain per-district aggregates (testable with toy
//     vectors of any district count),
//   - plan-level functions over (Plan, Dataset) that aggregate and delegate.
// compute_metrics is the batch path the ensemble uses; it produces the same
// values as the plan-level functions.
#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rps/model.hpp"

namespace rps {

struct PlanMetrics {
  double pop_stddev_pp = 0.0;               // pp of state population
  std::vector<double> pp_per_district;      // k entries, fractions in [0,1]
  double pp_avg = 0.0;
  double pp_min = 0.0;
  double efficiency_gap = 0.0;              // fraction in [-0.5, 0.5]
  double mean_median_pp = 0.0;              // pp
  std::optional<double> lopsided_margin_pp; // pp; empty = undefined
  int seats_dem = 0;
  int seats_rep = 0;
  bool seats_tie = false;        // some district tied exactly (counted R)
  double rmspd = 0.0;            // fraction
  double max_pe = 0.0;           // fraction
  bool hb92_pass = false;        // max_pe < 0.001, strict
};

// ------------------------------------------------------------------ cores

// District dem/rep two-party totals.
struct DistrictVotes {
  long long dem = 0;
  long long rep = 0;
};

// 4*pi*area/perimeter^2. Throws std::domain_error on a nonpositive
// perimeter and std::invalid_argument when the input geometry yields a
// value beyond 1 + 1e-9; values within [1, 1+1e-9] round down to exactly 1.
double polsby_popper(double area, double perimeter);

// Population stddev over district shares given in percent; the ideal share
// is 100/k for k districts. Returns percentage points.
double pop_stddev_from_shares(std::span<const double> shares_pct);

// Efficiency gap over any number of districts: the losing party wastes all
// its votes, the winning party wastes its votes minus half the district
// two-party total (real-valued half; an exact tie wastes half and half,
// contributing zero net). Positive = more Democratic votes wasted. Throws
// std::domain_error on a district with zero two-party votes.
double efficiency_gap_from_votes(std::span<const DistrictVotes> votes);

// Mean minus median of district Democratic two-party shares, in pp.
double mean_median_from_shares(std::span<const double> dem_shares);

// Mean Democratic winning share minus mean Republican winning share, in pp;
// empty when either party won zero districts. An exact 50/50 district
// counts as a Republican win (the seats tie rule).
std::optional<double> lopsided_margin_from_shares(
    std::span<const double> dem_shares);

struct SeatCount {
  int dem = 0;
  int rep = 0;
  bool tie = false;
};
// Strict-majority seats; an exact two-party tie goes to the Republican
// column and sets the flag.
SeatCount seats_from_votes(std::span<const DistrictVotes> votes);

// ------------------------------------------------------------- plan level

// Area and perimeter of a district: sum of member areas; sum of member
// perimeters minus twice every shared border between two members
// (geometric contacts, including pairs excluded from growth adjacency).
std::pair<double, double> district_geometry(const std::vector<int>& members,
                                            const Dataset& d);

// Mean and minimum of the k district Polsby-Popper scores.
std::pair<double, double> pp_summary(const Plan& plan, const Dataset& d);

double pop_stddev(const Plan& plan, const Dataset& d);
double efficiency_gap(const Plan& plan, const Dataset& d);
double mean_median(const Plan& plan, const Dataset& d);
std::optional<double> lopsided_margin(const Plan& plan, const Dataset& d);
SeatCount seats_won(const Plan& plan, const Dataset& d);

// (rmspd, max_pe): per-district population error |pop - ideal|/ideal with
// ideal = state population / k; rmspd is the root mean square.
std::pair<double, double> population_deviation(const Plan& plan,
                                               const Dataset& d);

// ------------------------------------------------------------- batch path

// Flattened dataset view for scoring many plans quickly.
struct MetricsContext {
  int n = 0;
  int k = 0;
  long long state_pop = 0;
  std::vector<long long> pop, dem, rep;  // [unit], 0-based
  std::vector<double> area, perim;       // [unit]
  struct Border {
    int a = 0, b = 0;  // 0-based units
    double km = 0.0;
  };
  std::vector<Border> borders;  // every geometric contact once

  static MetricsContext from_dataset(const Dataset& d);
};

// labels[unit] = district label 1..k for 0-based units (i.e. labels[i] is
// county id i+1's district).
PlanMetrics compute_metrics(std::span<const std::uint8_t> labels,
                            const MetricsContext& ctx);

// Convenience: compute_metrics on a Plan via its dataset.
PlanMetrics compute_metrics(const Plan& plan, const Dataset& d);

}  // namespace rps
