// Command-line surface: generate ensembles, evaluate single plans, and
// export comparison histograms against reference-plan constants.
//
// Exit codes (stable scripting contract):
//   0  success
//   1  validation/domain failure: bad flags, malformed or missing dataset
//      files, malformed content, invalid plans, unknown metric names
//   2  I/O failure: unopenable non-dataset inputs, unwritable outputs
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rps/ensemble.hpp"
#include "rps/ingest.hpp"
#include "rps/io.hpp"
#include "rps/metrics.hpp"
#include "rps/model.hpp"

namespace {

struct GenerateOptions {
  std::string data_dir;
  long long runs = 0;
  std::uint64_t seed = 0;
  std::string out_path;
  double good_threshold = 1.0;
  int workers = 0;
  bool keep_all = false;
};

struct EvaluateOptions {
  std::string data_dir;
  std::string plan_path;
  std::string out_path;
};

struct CompareOptions {
  std::string ensemble_path;
  std::string reference_path;
  std::string metric;
  int bins = 40;
  std::string out_path;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rps::IoError("cannot open " + path + " for writing");
  return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw rps::IoError("write failure on " + path);
}

void print_summary_line(const std::string& name, const rps::Summary& s) {
  std::printf("%s: mean %.6g stddev %.6g min %.6g max %.6g\n", name.c_str(),
              s.mean, s.stddev, s.min, s.max);
}

int cmd_generate(const GenerateOptions& opts) {
  rps::Dataset dataset = rps::load_dataset(opts.data_dir);

  rps::EnsembleConfig config;
  config.runs = opts.runs;
  config.master_seed = opts.seed;
  config.good_threshold_pp = opts.good_threshold;
  config.workers = opts.workers;
  config.keep_all = opts.keep_all;

  std::ofstream out = open_output(opts.out_path);
  long long written = 0;
  rps::EnsembleResult result = rps::run_ensemble_streamed(
      dataset, config, [&](std::span<const rps::PlanRecord> records) {
        for (const rps::PlanRecord& record : records) {
          rps::write_jsonl_record(out, record);
          ++written;
        }
        if (!out) throw rps::IoError("write failure on " + opts.out_path);
      });
  finish_output(out, opts.out_path);

  const long long deduplicated = result.completed - result.duplicates_removed;
  std::printf("runs: %lld\n", config.runs);
  std::printf("completed: %lld\n", result.completed);
  std::printf("exhausted: %lld\n", result.exhausted);
  std::printf("duplicates_removed: %lld\n", result.duplicates_removed);
  std::printf("good: %lld (%.2f%% of %lld deduplicated, pop_stddev <= %g pp)\n",
              result.good,
              deduplicated > 0
                  ? 100.0 * static_cast<double>(result.good) /
                        static_cast<double>(deduplicated)
                  : 0.0,
              deduplicated, config.good_threshold_pp);
  for (const auto& [name, summary] : result.summary)
    print_summary_line(name, summary);
  std::printf("records_written: %lld -> %s\n", written,
              opts.out_path.c_str());
  return 0;
}

int cmd_evaluate(const EvaluateOptions& opts) {
  rps::Dataset dataset = rps::load_dataset(opts.data_dir);
  rps::Plan plan = rps::read_plan_csv(opts.plan_path, dataset);

  const std::vector<std::string> violations =
      rps::validate_plan(plan, dataset);
  if (!violations.empty()) {
    std::cerr << "plan " << opts.plan_path << " is invalid:\n";
    for (const std::string& v : violations) std::cerr << "  - " << v << "\n";
    return 1;
  }

  const rps::PlanMetrics metrics = rps::compute_metrics(plan, dataset);
  std::ofstream out = open_output(opts.out_path);
  out << rps::metrics_to_json(metrics);
  finish_output(out, opts.out_path);

  std::printf("pop_stddev: %.6g pp\n", metrics.pop_stddev_pp);
  std::printf("pp_avg: %.6g\n", metrics.pp_avg);
  std::printf("pp_min: %.6g\n", metrics.pp_min);
  std::printf("efficiency_gap: %.6g\n", metrics.efficiency_gap);
  std::printf("mean_median: %.6g pp\n", metrics.mean_median_pp);
  if (metrics.lopsided_margin_pp)
    std::printf("lopsided_margin: %.6g pp\n", *metrics.lopsided_margin_pp);
  else
    std::printf("lopsided_margin: undefined\n");
  std::printf("seats: %d dem, %d rep%s\n", metrics.seats_dem,
              metrics.seats_rep, metrics.seats_tie ? " (tie district)" : "");
  std::printf("rmspd: %.6g\n", metrics.rmspd);
  std::printf("max_pe: %.6g\n", metrics.max_pe);
  std::printf("hb92_pass: %s\n", metrics.hb92_pass ? "true" : "false");
  std::printf("metrics_written: %s\n", opts.out_path.c_str());
  return 0;
}

int cmd_compare(const CompareOptions& opts) {
  const std::vector<double> values =
      rps::read_jsonl_metric(opts.ensemble_path, opts.metric);
  const std::vector<rps::ReferencePlanRecord> refs =
      rps::read_refs(opts.reference_path);
  if (values.empty())
    throw std::domain_error("ensemble " + opts.ensemble_path +
                            " holds no values for metric '" + opts.metric +
                            "'");
  const rps::Summary summary = rps::summarize(values, opts.bins);

  std::ofstream out = open_output(opts.out_path);
  rps::write_histogram_csv(out, summary, opts.metric, refs);
  finish_output(out, opts.out_path);

  std::printf("metric: %s\n", opts.metric.c_str());
  std::printf("plans: %zu\n", values.size());
  print_summary_line("distribution", summary);
  long long overlays = 0;
  for (const rps::ReferencePlanRecord& r : refs)
    if (r.metrics.count(opts.metric)) ++overlays;
  std::printf("reference_overlays: %lld\n", overlays);
  std::printf("histogram_written: %s\n", opts.out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Seeded-growth districting ensembles: generate contiguous plans, "
      "score them, and compare against reference plans"};
  app.require_subcommand(1);

  GenerateOptions gen;
  CLI::App* generate = app.add_subcommand(
      "generate", "Run growth simulations and write plan records as JSONL");
  generate->add_option("--data", gen.data_dir,
                       "Dataset directory (counties/adjacency/splits/seeds)")
      ->required();
  generate->add_option("--runs", gen.runs, "Number of growth simulations")
      ->required()
      ->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "Master RNG seed")->required();
  generate->add_option("--out", gen.out_path, "Output JSONL path")
      ->required();
  generate->add_option("--good-threshold", gen.good_threshold,
                       "pop_stddev cutoff (pp) for 'good' plans")
      ->check(CLI::PositiveNumber);
  generate->add_option("--workers", gen.workers,
                       "Worker threads (0 = all available)")
      ->check(CLI::NonNegativeNumber);
  generate->add_flag("--keep-all", gen.keep_all,
                     "Write every deduplicated plan, not only good ones");

  EvaluateOptions eval;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Score one plan file and write its metrics as JSON");
  evaluate->add_option("--data", eval.data_dir, "Dataset directory")
      ->required();
  evaluate->add_option("--plan", eval.plan_path,
                       "Plan CSV (county_name,district_label)")
      ->required();
  evaluate->add_option("--out", eval.out_path, "Output JSON path")
      ->required();

  CompareOptions cmp;
  CLI::App* compare = app.add_subcommand(
      "compare",
      "Histogram one ensemble metric with reference-plan overlay rows");
  compare->add_option("--ensemble", cmp.ensemble_path,
                      "Ensemble JSONL from 'generate'")
      ->required();
  compare->add_option("--reference", cmp.reference_path,
                      "Reference plan constants (JSON array)")
      ->required();
  compare->add_option("--metric", cmp.metric, "Metric name to histogram")
      ->required();
  compare->add_option("--bins", cmp.bins, "Histogram bin count")
      ->required()
      ->check(CLI::PositiveNumber);
  compare->add_option("--out", cmp.out_path, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the flag error
    return 1;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen);
    if (evaluate->parsed()) return cmd_evaluate(eval);
    if (compare->parsed()) return cmd_compare(cmp);
  } catch (const rps::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;  // unreachable: a subcommand is required
}
