#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "oracle_values.hpp"
#include "rps/growth.hpp"
#include "rps/ingest.hpp"
#include "rps/io.hpp"
#include "rps/metrics.hpp"
#include "test_support.hpp"

using rps::Dataset;
using rps::DistrictVotes;
using rps::Plan;
using rps::PlanMetrics;
using rps::test::make_dataset;
using rps::test::ToySpec;

namespace {

const Dataset& nc_dataset() {
  static const Dataset d = rps::load_dataset(RPS_DATA_DIR);
  return d;
}

const Plan& best_plan() {
  static const Plan p = rps::read_plan_csv(
      std::filesystem::path(RPS_DATA_DIR) / "plans" / "best_pop_stddev.csv",
      nc_dataset());
  return p;
}

// Three unit squares in a row: areas 1, perimeters 4, each contact 1 km.
Dataset squares_row() {
  ToySpec spec;
  spec.n = 3;
  spec.edges = {{1, 2}, {2, 3}};
  spec.seeds = {1};
  return make_dataset(spec);
}

}  // namespace

TEST_CASE("polsby_popper matches closed forms and clamps at one") {
  const double pi = std::numbers::pi;
  // A circle of any radius scores exactly 1.
  CHECK(rps::polsby_popper(pi * 9.0, 6.0 * pi) ==
        doctest::Approx(oracle::kPPCircle).epsilon(1e-12));
  CHECK(rps::polsby_popper(1.0, 4.0) ==
        doctest::Approx(oracle::kPPUnitSquare).epsilon(1e-15));
  CHECK(rps::polsby_popper(2.0, 6.0) ==
        doctest::Approx(oracle::kPPRect2x1).epsilon(1e-15));
  // Scale invariance: scaling lengths by s scales area by s^2.
  CHECK(rps::polsby_popper(8.0, 12.0) ==
        doctest::Approx(rps::polsby_popper(2.0, 6.0)).epsilon(1e-15));

  // Values inside [1, 1 + 1e-9] are geometry noise and round down to 1.
  CHECK(rps::polsby_popper((1.0 + 5e-10) / (4.0 * pi), 1.0) == 1.0);
  // Beyond the tolerance the inputs are inconsistent.
  CHECK_THROWS_AS(rps::polsby_popper((1.0 + 5e-9) / (4.0 * pi), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(rps::polsby_popper(10.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(rps::polsby_popper(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(rps::polsby_popper(1.0, -3.0), std::domain_error);
}

TEST_CASE("district_geometry merges areas and cancels shared borders") {
  const Dataset d = squares_row();
  const auto [area2, perim2] = rps::district_geometry({1, 2}, d);
  CHECK(area2 == doctest::Approx(oracle::kTwoSquaresArea));
  CHECK(perim2 == doctest::Approx(oracle::kTwoSquaresPerim));
  const auto [area3, perim3] = rps::district_geometry({1, 2, 3}, d);
  CHECK(area3 == doctest::Approx(oracle::kThreeSquaresArea));
  CHECK(perim3 == doctest::Approx(oracle::kThreeSquaresPerim));
  // Two merged unit squares score like the 2x1 rectangle.
  CHECK(rps::polsby_popper(area2, perim2) ==
        doctest::Approx(oracle::kPPRect2x1).epsilon(1e-15));
  CHECK_THROWS_AS(rps::district_geometry({}, d), std::domain_error);

  // Contacts excluded from growth adjacency still cancel perimeter: the
  // 2-3 contact below is geometric only.
  ToySpec weak;
  weak.n = 3;
  weak.edges = {{1, 2}};
  weak.borders = {{1, 2, 1.0}, {2, 3, 2.0}};
  weak.seeds = {1};
  const Dataset dw = make_dataset(weak);
  CHECK_FALSE(dw.graph.algo_adjacent(2, 3));
  const auto [wa, wp] = rps::district_geometry({2, 3}, dw);
  CHECK(wa == doctest::Approx(2.0));
  CHECK(wp == doctest::Approx(4.0));  // 4 + 4 - 2*2
}

TEST_CASE("population stddev over percent shares") {
  const std::vector<double> toy = {60.0, 40.0};
  CHECK(rps::pop_stddev_from_shares(toy) == doctest::Approx(10.0));
  const std::vector<double> uniform(13, 100.0 / 13.0);
  CHECK(rps::pop_stddev_from_shares(uniform) ==
        doctest::Approx(0.0).epsilon(1e-12));
  const std::vector<double> best(oracle::kBestPlanRoundedShares.begin(),
                                 oracle::kBestPlanRoundedShares.end());
  CHECK(rps::pop_stddev_from_shares(best) ==
        doctest::Approx(oracle::kBestPlanRoundedStddev).epsilon(1e-12));
  CHECK_THROWS_AS(rps::pop_stddev_from_shares({}), std::domain_error);
}

TEST_CASE("efficiency gap counts wasted votes with a real-valued half") {
  const std::vector<DistrictVotes> toy = {{75, 25}, {40, 60}};
  CHECK(rps::efficiency_gap_from_votes(toy) ==
        doctest::Approx(oracle::kEGToy).epsilon(1e-15));
  // Swapping the parties flips the sign.
  const std::vector<DistrictVotes> swapped = {{25, 75}, {60, 40}};
  CHECK(rps::efficiency_gap_from_votes(swapped) ==
        doctest::Approx(-oracle::kEGToy).epsilon(1e-15));
  // An exact tie wastes half per side: net zero.
  const std::vector<DistrictVotes> tied = {{50, 50}};
  CHECK(rps::efficiency_gap_from_votes(tied) == 0.0);
  const std::vector<DistrictVotes> empty_district = {{0, 0}};
  CHECK_THROWS_AS(rps::efficiency_gap_from_votes(empty_district),
                  std::domain_error);
  // Always within [-1/2, 1/2]: the extreme is a sweep of 50%+1 wins.
  const std::vector<std::vector<DistrictVotes>> cases = {
      {{100, 0}, {100, 0}},
      {{51, 49}, {51, 49}, {51, 49}},
      {{99, 1}, {1, 99}, {60, 40}, {30, 70}},
  };
  for (const auto& votes : cases) {
    const double eg = rps::efficiency_gap_from_votes(votes);
    CHECK(eg >= -0.5);
    CHECK(eg <= 0.5);
  }
}

TEST_CASE("mean-median over fractional shares, in percentage points") {
  const std::vector<double> toy = {0.60, 0.55, 0.35};
  CHECK(rps::mean_median_from_shares(toy) ==
        doctest::Approx(oracle::kMeanMedianToy).epsilon(1e-12));
  // Even district count: the median averages the middle pair.
  const std::vector<double> even = {0.60, 0.50, 0.40, 0.30};
  CHECK(rps::mean_median_from_shares(even) ==
        doctest::Approx(0.0).epsilon(1e-12));
  // A symmetric distribution has no mean-median skew.
  const std::vector<double> sym = {0.40, 0.50, 0.60};
  CHECK(rps::mean_median_from_shares(sym) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(rps::mean_median_from_shares({}), std::domain_error);
}

TEST_CASE("lopsided margin compares mean winning shares") {
  const std::vector<double> toy = {0.70, 0.68, 0.45, 0.43, 0.40};
  auto value = rps::lopsided_margin_from_shares(toy);
  REQUIRE(value.has_value());
  CHECK(*value == doctest::Approx(oracle::kLopsidedToy).epsilon(1e-12));

  // Swapping the parties flips the sign.
  std::vector<double> flipped;
  for (double s : toy) flipped.push_back(1.0 - s);
  auto neg = rps::lopsided_margin_from_shares(flipped);
  REQUIRE(neg.has_value());
  CHECK(*neg == doctest::Approx(-oracle::kLopsidedToy).epsilon(1e-12));

  // Undefined when either party holds no districts.
  CHECK_FALSE(rps::lopsided_margin_from_shares(std::vector<double>{0.6, 0.7})
                  .has_value());
  CHECK_FALSE(rps::lopsided_margin_from_shares(std::vector<double>{0.4})
                  .has_value());

  // An exact 50/50 district counts as a Republican win at share one half.
  auto tied =
      rps::lopsided_margin_from_shares(std::vector<double>{0.75, 0.50});
  REQUIRE(tied.has_value());
  CHECK(*tied == doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("seat counts give exact ties to the Republican column") {
  const std::vector<DistrictVotes> toy = {{75, 25}, {40, 60}, {50, 50}};
  const auto seats = rps::seats_from_votes(toy);
  CHECK(seats.dem == 1);
  CHECK(seats.rep == 2);
  CHECK(seats.tie);
  // One more Democratic vote flips the tied district and clears the flag.
  const std::vector<DistrictVotes> shifted = {{75, 25}, {40, 60}, {51, 49}};
  const auto seats2 = rps::seats_from_votes(shifted);
  CHECK(seats2.dem == 2);
  CHECK(seats2.rep == 1);
  CHECK_FALSE(seats2.tie);
}

TEST_CASE("population deviation and the strict 0.1% equity check") {
  // Two districts, ideal 1000, both off by exactly one person in a
  // thousand: rmspd = max_pe = 0.001 and the strict check FAILS.
  ToySpec spec;
  spec.n = 2;
  spec.edges = {{1, 2}};
  spec.pops = {1001, 999};
  const Dataset d = make_dataset(spec);
  Plan plan;
  plan.districts = 2;
  plan.assignment = {0, 1, 2};
  const auto [rmspd, max_pe] = rps::population_deviation(plan, d);
  CHECK(rmspd == doctest::Approx(oracle::kUniformPE).epsilon(1e-12));
  CHECK(max_pe == doctest::Approx(oracle::kUniformPE).epsilon(1e-12));
  const PlanMetrics m = rps::compute_metrics(plan, d);
  CHECK(m.max_pe == doctest::Approx(oracle::kUniformPE).epsilon(1e-12));
  CHECK_FALSE(m.hb92_pass);  // max_pe < 0.001 is strict

  // Inside the bound the check passes; a perfectly balanced plan has zero
  // deviation on every population measure.
  ToySpec fine;
  fine.n = 2;
  fine.edges = {{1, 2}};
  fine.pops = {2001, 1999};
  const PlanMetrics mf = rps::compute_metrics(plan, make_dataset(fine));
  CHECK(mf.max_pe == doctest::Approx(0.0005).epsilon(1e-12));
  CHECK(mf.hb92_pass);

  ToySpec flat;
  flat.n = 2;
  flat.edges = {{1, 2}};
  flat.pops = {1000, 1000};
  const PlanMetrics mz = rps::compute_metrics(plan, make_dataset(flat));
  CHECK(mz.max_pe == 0.0);
  CHECK(mz.rmspd == 0.0);
  CHECK(mz.pop_stddev_pp == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(mz.hb92_pass);
}

TEST_CASE("compute_metrics rejects malformed label arrays") {
  ToySpec spec;
  spec.n = 3;
  spec.edges = {{1, 2}, {2, 3}};
  spec.seeds = {1, 3};
  const Dataset d = make_dataset(spec);
  const rps::MetricsContext ctx = rps::MetricsContext::from_dataset(d);
  const std::vector<std::uint8_t> short_labels = {1, 2};
  CHECK_THROWS_AS(rps::compute_metrics(short_labels, ctx),
                  std::domain_error);
  const std::vector<std::uint8_t> zero_label = {1, 0, 2};
  CHECK_THROWS_AS(rps::compute_metrics(zero_label, ctx), std::domain_error);
  const std::vector<std::uint8_t> big_label = {1, 2, 3};
  CHECK_THROWS_AS(rps::compute_metrics(big_label, ctx), std::domain_error);
  // An empty district cannot be scored.
  const std::vector<std::uint8_t> empty_second = {1, 1, 1};
  CHECK_THROWS_AS(rps::compute_metrics(empty_second, ctx),
                  std::domain_error);
}

TEST_CASE("the bundled best plan scores inside the pinned window") {
  const Dataset& d = nc_dataset();
  const Plan& plan = best_plan();
  CHECK(rps::validate_plan(plan, d).empty());

  const PlanMetrics m = rps::compute_metrics(plan, d);
  CHECK(m.pop_stddev_pp >= oracle::kBestPlanStddevLo);
  CHECK(m.pop_stddev_pp <= oracle::kBestPlanStddevHi);
  CHECK_FALSE(m.hb92_pass);  // county-grain plans cannot hit 0.1%

  // Its district shares, rounded to one decimal, are the pinned set.
  std::vector<long long> pops(plan.districts, 0);
  for (int id = 1; id <= plan.n(); ++id)
    pops[plan.assignment[id] - 1] += d.county(id).population;
  std::vector<double> rounded;
  for (long long pop : pops)
    rounded.push_back(std::round(1000.0 * pop /
                                 static_cast<double>(d.state_population)) /
                      10.0);
  std::vector<double> expected(oracle::kBestPlanRoundedShares.begin(),
                               oracle::kBestPlanRoundedShares.end());
  std::sort(rounded.begin(), rounded.end());
  std::sort(expected.begin(), expected.end());
  REQUIRE(rounded.size() == expected.size());
  for (size_t i = 0; i < rounded.size(); ++i)
    CHECK(rounded[i] == doctest::Approx(expected[i]).epsilon(1e-9));
}

TEST_CASE("batch scoring equals the plan-level functions") {
  const Dataset& d = nc_dataset();
  const rps::GrowthContext gctx = rps::GrowthContext::from_dataset(d);
  const rps::MetricsContext mctx = rps::MetricsContext::from_dataset(d);
  rps::GrowthScratch scratch;

  int checked = 0;
  for (int i = 0; checked < 25 && i < 100; ++i) {
    const rps::GrowthOutcome out = rps::run_once(gctx, 5150, i, scratch);
    if (out.status != rps::GrowthStatus::Completed) continue;
    ++checked;
    const Plan plan = out.to_plan(gctx);
    const std::vector<std::uint8_t> labels(plan.assignment.begin() + 1,
                                           plan.assignment.end());
    const PlanMetrics m = rps::compute_metrics(labels, mctx);

    CHECK(m.pop_stddev_pp ==
          doctest::Approx(rps::pop_stddev(plan, d)).epsilon(1e-12));
    CHECK(m.efficiency_gap ==
          doctest::Approx(rps::efficiency_gap(plan, d)).epsilon(1e-12));
    CHECK(m.mean_median_pp ==
          doctest::Approx(rps::mean_median(plan, d)).epsilon(1e-12));
    const auto lop = rps::lopsided_margin(plan, d);
    REQUIRE(m.lopsided_margin_pp.has_value() == lop.has_value());
    if (lop)
      CHECK(*m.lopsided_margin_pp == doctest::Approx(*lop).epsilon(1e-12));
    const auto seats = rps::seats_won(plan, d);
    CHECK(m.seats_dem == seats.dem);
    CHECK(m.seats_rep == seats.rep);
    CHECK(m.seats_tie == seats.tie);
    CHECK(m.seats_dem + m.seats_rep == plan.districts);
    const auto [pp_avg, pp_min] = rps::pp_summary(plan, d);
    CHECK(m.pp_avg == doctest::Approx(pp_avg).epsilon(1e-12));
    CHECK(m.pp_min == doctest::Approx(pp_min).epsilon(1e-12));
    const auto [rmspd, max_pe] = rps::population_deviation(plan, d);
    CHECK(m.rmspd == doctest::Approx(rmspd).epsilon(1e-12));
    CHECK(m.max_pe == doctest::Approx(max_pe).epsilon(1e-12));
    CHECK(m.rmspd <= m.max_pe + 1e-15);
    REQUIRE(m.pp_per_district.size() == static_cast<size_t>(plan.districts));
    for (double pp : m.pp_per_district) {
      CHECK(pp > 0.0);
      CHECK(pp <= 1.0);
    }
  }
  CHECK(checked == 25);
}
