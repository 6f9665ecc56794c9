#include "farva/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "farva/benchmark.hpp"
#include "farva/gibbs.hpp"
#include "farva/io.hpp"
#include "farva/metrics.hpp"
#include "farva/predict.hpp"
#include "farva/simulate.hpp"

namespace farva {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class usage_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flag validation failures are usage errors, not runtime errors.
template <typename F>
void check_flags(F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw usage_error(e.what());
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw io_error("write failed for '" + path.string() + "'");
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[j] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

std::string vector_line(const Eigen::VectorXd& v) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(3);
  for (Eigen::Index k = 0; k < v.size(); ++k) out << (k ? " " : "") << v(k);
  return out.str();
}

// ---- simulate ----

struct SimulateOptions {
  std::string preset;
  int n_datasets = 1;
  std::uint64_t seed = 1;
  std::string out_dir;
  int n = 928;
  int P = 21;
  int C = 4;
  std::string mean = "S";
  bool mean_covariate = false;
  std::string cov = "C";
  std::string cov_dependence = "I";
  bool cov_covariate = false;
  std::string data_type = "B";
};

SimConfig sim_config(const SimulateOptions& o, bool explicit_flags) {
  SimConfig c;
  if (!o.preset.empty()) {
    if (explicit_flags) throw usage_error("--preset cannot be combined with explicit structure flags");
    c = SimConfig::preset(o.preset);
  } else {
    c.mean_structure = o.mean == "C" ? Structure::common : Structure::specific;
    c.mean_covariate = o.mean_covariate;
    c.cov_structure = o.cov == "C" ? Structure::common : Structure::specific;
    c.cov_dependence = o.cov_dependence == "D" ? Dependence::dependent : Dependence::independent;
    c.cov_covariate = o.cov_covariate;
    c.data_type = o.data_type == "M" ? DataType::mixed : o.data_type == "T" ? DataType::continuous : DataType::binary;
  }
  c.n = o.n;
  c.P = o.P;
  c.C = o.C;
  c.validate();
  return c;
}

void cmd_simulate(const SimulateOptions& o, bool explicit_flags, std::ostream& out) {
  SimConfig config;
  check_flags([&] {
    config = sim_config(o, explicit_flags);
    if (o.n_datasets < 1) throw std::invalid_argument("--n-datasets must be at least 1");
  });
  const fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create '" + dir.string() + "': " + ec.message());
  const std::string prefix = o.preset.empty() ? "custom" : o.preset;
  for (int d = 0; d < o.n_datasets; ++d) {
    config.seed = dataset_seed(o.seed, d);
    const SimResult sim = generate_dataset(config);
    char stem[64];
    std::snprintf(stem, sizeof(stem), "%s_%03d", prefix.c_str(), d + 1);
    write_dataset_csv(dir / (std::string(stem) + ".csv"), sim.data);
    write_schema(dir / (std::string(stem) + ".schema"), SchemaFile{sim.data.schema, sim.data.n_causes});

    json truth;
    truth["seed"] = config.seed;
    truth["preset"] = prefix;
    truth["ids"] = sim.data.ids;
    std::vector<int> labels;
    for (int y : sim.truth.labels) labels.push_back(y + 1);
    truth["cause"] = labels;
    truth["covariate"] = sim.truth.covariate;
    json means = json::array();
    json covs = json::array();
    for (std::size_t c = 0; c < sim.truth.means.size(); ++c) {
      json mc = json::array();
      json cc = json::array();
      for (std::size_t g = 0; g < sim.truth.means[c].size(); ++g) {
        const auto& m = sim.truth.means[c][g];
        mc.push_back(std::vector<double>(m.data(), m.data() + m.size()));
        cc.push_back(matrix_json(sim.truth.covs[c][g]));
      }
      means.push_back(mc);
      covs.push_back(cc);
    }
    truth["means"] = means;
    truth["covs"] = covs;
    truth["z"] = matrix_json(sim.truth.z);
    write_text(dir / (std::string(stem) + ".truth.json"), truth.dump() + "\n");
  }
  out << "wrote " << o.n_datasets << " dataset" << (o.n_datasets == 1 ? "" : "s") << " (" << prefix << ") to "
      << dir.string() << "\n";
}

// ---- train ----

struct TrainOptions {
  std::string data;
  std::string schema;
  std::string out;
  int K = 0;
  int L = 0;
  int iterations = 2000;
  int burn_in = 1000;
  int thinning = 10;
  std::uint64_t seed = 1;
  std::string covariates;
  bool progress = false;
};

void cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  ChainConfig cc;
  cc.iterations = o.iterations;
  cc.burn_in = o.burn_in;
  cc.thinning = o.thinning;
  cc.seed = o.seed;
  cc.keep_latent = false;
  check_flags([&] {
    cc.validate();
    if (o.K < 0 || o.L < 0) throw std::invalid_argument("--k and --l must be positive");
  });
  if (o.progress) cc.progress = &err;

  const SchemaFile schema = read_schema(fs::path(o.schema));
  DatasetInput input = read_dataset_csv(o.data, schema);
  select_covariates(input, split_list(o.covariates));
  const Dataset data = build_dataset(input);

  Hyperparameters hyper = Hyperparameters::defaults(data.n_causes, data.P(), data.B());
  if (o.K > 0) hyper.K = o.K;
  if (o.L > 0) hyper.L = o.L;
  check_flags([&] { hyper.validate(); });

  PosteriorSamples samples = run_chain(data, hyper, cc);
  const TrainedModel model = make_trained_model(std::move(samples), data);
  write_posterior(o.out, model);

  out << "snapshots " << model.samples.snapshots.size() << " (iterations " << cc.iterations << ", burn-in "
      << cc.burn_in << ", thinning " << cc.thinning << ")\n";
  out << "shrinkage: column norms of Delta, l = 1.." << hyper.L << ": " << vector_line(model.shrinkage) << "\n";
  out << "factors: column norms of Lambda at the mean covariate, k = 1.." << hyper.K << ": "
      << vector_line(model.factor_norms) << "\n";
  const double tail_l = model.shrinkage(model.shrinkage.size() - 1) / std::max(model.shrinkage.maxCoeff(), 1e-300);
  if (tail_l > 0.1) out << "note: last Delta column is not shrunk; consider a larger --l\n";
}

// ---- predict ----

struct PredictOptions {
  std::string posterior;
  std::string data;
  std::string schema;
  int n_mc = kDefaultMonteCarloDraws;
  std::uint64_t seed = 1;
  std::string out;
  std::string csmf_out;
};

bool same_schema(const Schema& a, const Schema& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j].name != b[j].name || a[j].kind != b[j].kind || a[j].categories != b[j].categories) return false;
  }
  return true;
}

void cmd_predict(const PredictOptions& o, std::ostream& out) {
  check_flags([&] {
    if (o.n_mc < 1) throw std::invalid_argument("--n-mc must be positive");
  });
  const TrainedModel model = read_posterior(fs::path(o.posterior));
  const int n_causes = model.samples.snapshots.front().C();
  if (!o.schema.empty()) {
    const SchemaFile given = read_schema(fs::path(o.schema));
    if (!same_schema(given.schema, model.schema) || given.n_causes != n_causes) {
      throw data_error("schema mismatch: test schema differs from the training schema");
    }
  }
  DatasetInput input = read_dataset_csv(o.data, SchemaFile{model.schema, n_causes});
  select_covariates(input, model.covariate_names);
  std::fill(input.labels.begin(), input.labels.end(), -1);
  const Dataset data = build_dataset(input, &model.columns);

  Rng rng(o.seed);
  const Prediction pred = predict_dataset(model.samples, data, o.n_mc, rng);
  const CsmfEstimate csmf = estimate_csmf(pred.sampled_labels, n_causes);

  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out, std::ios::trunc);
    if (!file) throw io_error("cannot open '" + o.out + "' for writing");
  }
  write_predictions(o.out.empty() ? out : file, data.ids, pred.posterior);
  if (file.is_open()) {
    file.flush();
    if (!file) throw io_error("write failed for '" + o.out + "'");
  }
  if (!o.csmf_out.empty()) {
    write_text(o.csmf_out, csmf_json(csmf));
  } else if (!o.out.empty()) {
    out << csmf_json(csmf);
  }
}

// ---- evaluate ----

struct EvaluateOptions {
  std::string predictions;
  std::string truth;
  std::string csmf;
  std::string out;
};

Eigen::VectorXd read_csmf_mean(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path.string() + "' for reading");
  try {
    const auto mean = json::parse(in).at("mean").get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  } catch (const json::exception& e) {
    throw data_error("CSMF file '" + path.string() + "' is not valid: " + e.what());
  }
}

void cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  const PredictionTable pred = read_predictions(o.predictions);
  const LabelTable truth = read_labels(o.truth);
  const int n_causes = static_cast<int>(pred.probs.cols());
  std::map<std::string, int> truth_by_id;
  for (std::size_t i = 0; i < truth.ids.size(); ++i) {
    if (!truth_by_id.emplace(truth.ids[i], truth.labels[i]).second) {
      throw data_error("ID mismatch: duplicate id '" + truth.ids[i] + "' in truth file");
    }
  }
  if (pred.ids.empty()) throw data_error("predictions file has no rows");
  if (truth_by_id.size() != pred.ids.size()) {
    throw data_error("ID mismatch: " + std::to_string(pred.ids.size()) + " predictions but " +
                     std::to_string(truth_by_id.size()) + " truth rows");
  }
  std::vector<int> labels;
  for (const auto& id : pred.ids) {
    const auto it = truth_by_id.find(id);
    if (it == truth_by_id.end()) throw data_error("ID mismatch: id '" + id + "' has no truth row");
    if (it->second < 0 || it->second >= n_causes) {
      throw data_error("truth for id '" + id + "' is missing or out of range");
    }
    labels.push_back(it->second);
  }
  const Eigen::VectorXd csmf = o.csmf.empty() ? Eigen::VectorXd(pred.probs.colwise().mean().transpose())
                                              : read_csmf_mean(o.csmf);
  Metrics m;
  m.n = static_cast<int>(labels.size());
  m.acc1 = acc1(labels, pred.top);
  m.acc_csmf = acc_csmf(empirical_csmf(labels, n_causes), csmf / csmf.sum());
  m.ccc = ccc(m.acc1, n_causes);
  const std::string text = metrics_json(m);
  if (!o.out.empty()) write_text(o.out, text);
  out << text;
}

// ---- benchmark ----

struct BenchmarkOptions {
  std::string preset;
  int n_datasets = 10;
  std::string models = "farva,farva-nocov,nbc";
  std::uint64_t seed = 1;
  int jobs = 1;
  int K = 6;
  int L = 5;
  int iterations = 2000;
  int burn_in = 1000;
  int thinning = 10;
  int n_mc = kDefaultMonteCarloDraws;
  std::string scores_out;
  bool progress = false;
};

void cmd_benchmark(const BenchmarkOptions& o, std::ostream& out, std::ostream& err) {
  BenchmarkConfig config;
  check_flags([&] {
    config.sim = SimConfig::preset(o.preset);
    config.label = o.preset;
    config.n_datasets = o.n_datasets;
    config.models = split_list(o.models);
    config.seed = o.seed;
    config.jobs = o.jobs;
    config.K = o.K;
    config.L = o.L;
    config.iterations = o.iterations;
    config.burn_in = o.burn_in;
    config.thinning = o.thinning;
    config.n_mc = o.n_mc;
    config.validate();
  });
  const BenchmarkResult result = run_benchmark(config, o.progress ? &err : nullptr);
  if (!o.scores_out.empty()) write_text(o.scores_out, format_scores_csv(result));
  out << format_summary(config, result);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"farva: covariate-dependent latent factor models for cause-of-death assignment"};
  app.name("farva");
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic datasets");
  simulate->add_option("--preset", sim.preset, "Named configuration: a b c d e f g1 g2 g3");
  simulate->add_option("--n-datasets", sim.n_datasets, "Number of datasets");
  simulate->add_option("--seed", sim.seed, "Master seed");
  simulate->add_option("--out-dir", sim.out_dir, "Output directory")->required();
  simulate->add_option("--n", sim.n, "Rows per dataset");
  simulate->add_option("--P", sim.P, "Symptoms");
  simulate->add_option("--C", sim.C, "Causes");
  auto* f_mean = simulate->add_option("--mean", sim.mean, "Mean structure S|C")->check(CLI::IsMember({"S", "C"}));
  auto* f_mean_v = simulate->add_flag("--mean-covariate", sim.mean_covariate, "Mean depends on the covariate");
  auto* f_cov = simulate->add_option("--cov", sim.cov, "Covariance structure S|C")->check(CLI::IsMember({"S", "C"}));
  auto* f_dep = simulate->add_option("--cov-dependence", sim.cov_dependence, "Covariance I|D")
                    ->check(CLI::IsMember({"I", "D"}));
  auto* f_cov_v = simulate->add_flag("--cov-covariate", sim.cov_covariate, "Covariance depends on the covariate");
  auto* f_type = simulate->add_option("--data-type", sim.data_type, "Observation type B|M|T")
                     ->check(CLI::IsMember({"B", "M", "T"}));

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Fit the model by Gibbs sampling");
  train_cmd->add_option("--data", train.data, "Training dataset CSV")->required();
  train_cmd->add_option("--schema", train.schema, "Schema sidecar")->required();
  train_cmd->add_option("--out", train.out, "Posterior file to write")->required();
  train_cmd->add_option("--k", train.K, "Latent factor bound K (default min(15, P))");
  train_cmd->add_option("--l", train.L, "Basis size bound L (default min(10, P))");
  train_cmd->add_option("--iters", train.iterations, "Gibbs sweeps");
  train_cmd->add_option("--burn", train.burn_in, "Burn-in sweeps");
  train_cmd->add_option("--thin", train.thinning, "Thinning interval");
  train_cmd->add_option("--seed", train.seed, "Random seed");
  train_cmd->add_option("--covariates", train.covariates, "Comma-separated covariate columns");
  train_cmd->add_flag("--progress", train.progress, "Report progress on stderr");

  PredictOptions pred;
  auto* predict_cmd = app.add_subcommand("predict", "Cause probabilities and CSMF for new rows");
  predict_cmd->add_option("--posterior", pred.posterior, "Posterior file")->required();
  predict_cmd->add_option("--data", pred.data, "Dataset CSV to classify")->required();
  predict_cmd->add_option("--schema", pred.schema, "Schema sidecar, checked against the training schema");
  predict_cmd->add_option("--n-mc", pred.n_mc, "Monte Carlo draws per snapshot and cause");
  predict_cmd->add_option("--seed", pred.seed, "Random seed");
  predict_cmd->add_option("--out", pred.out, "Predictions CSV (default stdout)");
  predict_cmd->add_option("--csmf-out", pred.csmf_out, "CSMF report (JSON)");

  EvaluateOptions eval;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against known causes");
  evaluate_cmd->add_option("--predictions", eval.predictions, "Predictions CSV")->required();
  evaluate_cmd->add_option("--truth", eval.truth, "CSV with id and cause columns")->required();
  evaluate_cmd->add_option("--csmf", eval.csmf, "CSMF report from predict (default: mean of row probabilities)");
  evaluate_cmd->add_option("--out", eval.out, "Also write the metrics record here");

  BenchmarkOptions bench;
  auto* benchmark_cmd = app.add_subcommand("benchmark", "Repeated simulation study");
  benchmark_cmd->add_option("--preset", bench.preset, "Named configuration")->required();
  benchmark_cmd->add_option("--n-datasets", bench.n_datasets, "Number of datasets");
  benchmark_cmd->add_option("--models", bench.models, "Comma-separated: farva, farva-nocov, nbc");
  benchmark_cmd->add_option("--seed", bench.seed, "Master seed");
  benchmark_cmd->add_option("--jobs", bench.jobs, "Worker threads");
  benchmark_cmd->add_option("--k", bench.K, "Latent factor bound K");
  benchmark_cmd->add_option("--l", bench.L, "Basis size bound L");
  benchmark_cmd->add_option("--iters", bench.iterations, "Gibbs sweeps per chain");
  benchmark_cmd->add_option("--burn", bench.burn_in, "Burn-in sweeps");
  benchmark_cmd->add_option("--thin", bench.thinning, "Thinning interval");
  benchmark_cmd->add_option("--n-mc", bench.n_mc, "Monte Carlo draws per snapshot and cause");
  benchmark_cmd->add_option("--scores-out", bench.scores_out, "Per-dataset scores CSV");
  benchmark_cmd->add_flag("--progress", bench.progress, "Report progress on stderr");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "farva: usage error: " << one_line(e.what()) << "\n";
    return kExitUsage;
  }

  try {
    if (*simulate) {
      const bool explicit_flags = f_mean->count() || f_mean_v->count() || f_cov->count() || f_dep->count() ||
                                  f_cov_v->count() || f_type->count();
      cmd_simulate(sim, explicit_flags, out);
    } else if (*train_cmd) {
      cmd_train(train, out, err);
    } else if (*predict_cmd) {
      cmd_predict(pred, out);
    } else if (*evaluate_cmd) {
      cmd_evaluate(eval, out);
    } else if (*benchmark_cmd) {
      cmd_benchmark(bench, out, err);
    }
  } catch (const usage_error& e) {
    err << "farva: usage error: " << one_line(e.what()) << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "farva: error: " << one_line(e.what()) << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace farva
