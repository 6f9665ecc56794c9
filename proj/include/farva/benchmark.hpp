#ifndef FARVA_BENCHMARK_HPP
#define FARVA_BENCHMARK_HPP

/// Repeated simulate / split / fit / score runs comparing FARVA, FARVA with
/// covariates suppressed, and the naive Bayes baseline.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "farva/metrics.hpp"
#include "farva/simulate.hpp"

namespace farva {

struct BenchmarkConfig {
  SimConfig sim;
  std::string label = "custom";  // preset name for reports
  int n_datasets = 10;
  std::vector<std::string> models = {"farva", "farva-nocov", "nbc"};
  std::uint64_t seed = 1;
  int jobs = 1;
  int K = 6;
  int L = 5;
  int iterations = 2000;
  int burn_in = 1000;
  int thinning = 10;
  int n_mc = 200;
  double test_fraction = 0.25;

  void validate() const;
};

/// Seed of dataset d under a master seed; shared by simulate and benchmark so
/// a benchmark dataset can be regenerated on its own.
std::uint64_t dataset_seed(std::uint64_t master, int d);

struct DatasetScore {
  int dataset = 0;
  std::string model;
  double acc1 = 0.0;
  double acc_csmf = 0.0;
  double ccc = 0.0;
};

struct ModelSummary {
  std::string model;
  MeanSd acc1;
  MeanSd acc_csmf;
  MeanSd ccc;
};

struct BenchmarkResult {
  std::vector<DatasetScore> scores;  // dataset-major, models in config order
  std::vector<ModelSummary> summary; // one row per model

  /// Scores of one model across datasets, in dataset order.
  std::vector<DatasetScore> model_scores(const std::string& model) const;
};

/// Runs fn(0..n-1) on `jobs` worker threads; the first exception (by index)
/// is rethrown after all workers finish.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

/// Scores every model on one simulated dataset.
std::vector<DatasetScore> benchmark_dataset(const BenchmarkConfig& config, int d);

BenchmarkResult run_benchmark(const BenchmarkConfig& config, std::ostream* progress = nullptr);

/// Table of mean (SD) per metric per model.
std::string format_summary(const BenchmarkConfig& config, const BenchmarkResult& result);

/// dataset,model,acc1,acc_csmf,ccc
std::string format_scores_csv(const BenchmarkResult& result);

}  // namespace farva

#endif  // FARVA_BENCHMARK_HPP
