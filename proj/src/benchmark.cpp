#include "farva/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "farva/data.hpp"
#include "farva/gibbs.hpp"
#include "farva/nbc.hpp"
#include "farva/predict.hpp"

namespace farva {

void BenchmarkConfig::validate() const {
  sim.validate();
  if (n_datasets < 1) throw std::invalid_argument("benchmark: --n-datasets must be at least 1");
  if (jobs < 1) throw std::invalid_argument("benchmark: --jobs must be at least 1");
  if (models.empty()) throw std::invalid_argument("benchmark: no models requested");
  for (const auto& m : models) {
    if (m != "farva" && m != "farva-nocov" && m != "nbc") {
      throw std::invalid_argument("benchmark: unknown model '" + m + "'");
    }
  }
  if (K < 1 || L < 1) throw std::invalid_argument("benchmark: K and L must be positive");
  if (n_mc < 1) throw std::invalid_argument("benchmark: --n-mc must be positive");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("benchmark: test fraction must lie in (0, 1)");
  }
  ChainConfig cc;
  cc.iterations = iterations;
  cc.burn_in = burn_in;
  cc.thinning = thinning;
  cc.validate();
}

std::uint64_t dataset_seed(std::uint64_t master, int d) {
  return mix_seed(mix_seed(master) + static_cast<std::uint64_t>(d));
}

std::vector<DatasetScore> BenchmarkResult::model_scores(const std::string& model) const {
  std::vector<DatasetScore> out;
  for (const auto& s : scores) {
    if (s.model == model) out.push_back(s);
  }
  return out;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(n, 0)));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_threads = std::min(std::max(jobs, 1), std::max(n, 1));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

DatasetScore score(int d, const std::string& model, std::span<const int> truth,
                   std::span<const int> top, const Eigen::VectorXd& csmf, int n_causes) {
  DatasetScore s;
  s.dataset = d;
  s.model = model;
  s.acc1 = acc1(truth, top);
  s.acc_csmf = acc_csmf(empirical_csmf(truth, n_causes), csmf);
  s.ccc = ccc(s.acc1, n_causes);
  return s;
}

DatasetScore score_farva(const BenchmarkConfig& config, int d, const std::string& model,
                         const Dataset& train, const Dataset& test, std::span<const int> truth,
                         std::uint64_t chain_seed, Rng& predict_rng) {
  Hyperparameters hyper = Hyperparameters::defaults(train.n_causes, train.P(), train.B());
  hyper.K = config.K;
  hyper.L = config.L;
  ChainConfig cc;
  cc.iterations = config.iterations;
  cc.burn_in = config.burn_in;
  cc.thinning = config.thinning;
  cc.seed = chain_seed;
  cc.keep_latent = false;
  const PosteriorSamples samples = run_chain(train, hyper, cc);
  const Prediction pred = predict_dataset(samples, test, config.n_mc, predict_rng);
  const CsmfEstimate csmf = estimate_csmf(pred.sampled_labels, train.n_causes);
  return score(d, model, truth, pred.posterior.top, csmf.mean, train.n_causes);
}

DatasetScore score_nbc(int d, const Dataset& train, const Dataset& test, std::span<const int> truth) {
  const NaiveBayesModel nb = nbc_fit(train);
  std::vector<int> top(test.n());
  Eigen::VectorXd csmf = Eigen::VectorXd::Zero(train.n_causes);
  for (int i = 0; i < test.n(); ++i) {
    const Eigen::VectorXd probs = nbc_predict(nb, test.s.row(i).transpose());
    csmf += probs;
    top[i] = top_cause(probs);
  }
  csmf /= csmf.sum();
  return score(d, "nbc", truth, top, csmf, train.n_causes);
}

}  // namespace

std::vector<DatasetScore> benchmark_dataset(const BenchmarkConfig& config, int d) {
  SimConfig sim = config.sim;
  sim.seed = dataset_seed(config.seed, d);
  const SimResult result = generate_dataset(sim);
  const Rng base(sim.seed);
  Rng split_rng = base.split(1);
  const TrainTestSplit split = split_train_test(result.data, config.test_fraction, split_rng);
  const std::uint64_t chain_seed = base.split(2).next_u64();

  std::vector<DatasetScore> out;
  for (std::size_t m = 0; m < config.models.size(); ++m) {
    const std::string& model = config.models[m];
    // Each model gets its own prediction stream so scores do not depend on
    // which other models were requested.
    Rng predict_rng = base.split(3 + (model == "farva-nocov" ? 1 : 0));
    if (model == "farva") {
      out.push_back(score_farva(config, d, model, split.train, split.test, split.test_labels, chain_seed,
                                predict_rng));
    } else if (model == "farva-nocov") {
      out.push_back(score_farva(config, d, model, intercept_only(split.train), intercept_only(split.test),
                                split.test_labels, chain_seed, predict_rng));
    } else {
      out.push_back(score_nbc(d, split.train, split.test, split.test_labels));
    }
  }
  return out;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& config, std::ostream* progress) {
  config.validate();
  std::vector<std::vector<DatasetScore>> per_dataset(config.n_datasets);
  std::mutex progress_mutex;
  parallel_for(config.n_datasets, config.jobs, [&](int d) {
    per_dataset[d] = benchmark_dataset(config, d);
    if (progress) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      *progress << "dataset " << d + 1 << "/" << config.n_datasets << " done\n" << std::flush;
    }
  });
  BenchmarkResult result;
  for (auto& scores : per_dataset) result.scores.insert(result.scores.end(), scores.begin(), scores.end());
  for (const auto& model : config.models) {
    const auto scores = result.model_scores(model);
    std::vector<double> a, c, k;
    for (const auto& s : scores) {
      a.push_back(s.acc1);
      c.push_back(s.acc_csmf);
      k.push_back(s.ccc);
    }
    result.summary.push_back({model, mean_sd(a), mean_sd(c), mean_sd(k)});
  }
  return result;
}

std::string format_summary(const BenchmarkConfig& config, const BenchmarkResult& result) {
  std::ostringstream out;
  char buf[160];
  out << "preset " << config.label << ", " << config.n_datasets << " dataset"
      << (config.n_datasets == 1 ? "" : "s") << ", mean (SD)\n";
  std::snprintf(buf, sizeof(buf), "%-12s %-16s %-16s %-16s\n", "model", "acc1", "acc_csmf", "ccc");
  out << buf;
  auto cell = [](const MeanSd& m) {
    char b[32];
    std::snprintf(b, sizeof(b), "%.3f (%.3f)", m.mean, m.sd);
    return std::string(b);
  };
  for (const auto& row : result.summary) {
    std::snprintf(buf, sizeof(buf), "%-12s %-16s %-16s %-16s\n", row.model.c_str(), cell(row.acc1).c_str(),
                  cell(row.acc_csmf).c_str(), cell(row.ccc).c_str());
    out << buf;
  }
  return out.str();
}

std::string format_scores_csv(const BenchmarkResult& result) {
  std::ostringstream out;
  out << "dataset,model,acc1,acc_csmf,ccc\n";
  for (const auto& s : result.scores) {
    out << s.dataset + 1 << ',' << s.model << ',' << format_double(s.acc1) << ',' << format_double(s.acc_csmf)
        << ',' << format_double(s.ccc) << '\n';
  }
  return out.str();
}

}  // namespace farva
