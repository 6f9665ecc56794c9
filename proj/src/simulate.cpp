#include "farva/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace farva {

namespace {

constexpr int kSimRank = 3;
constexpr double kShiftSd = 0.5;
constexpr double kNoise = 0.5;

Eigen::VectorXd normal_vector(int p, double sd, Rng& rng) {
  Eigen::VectorXd v(p);
  for (int j = 0; j < p; ++j) v(j) = sd * rng.normal();
  return v;
}

Eigen::MatrixXd dependent_cov(int p, Rng& rng) {
  Eigen::MatrixXd f(p, kSimRank);
  for (int k = 0; k < kSimRank; ++k) {
    for (int j = 0; j < p; ++j) f(j, k) = rng.normal();
  }
  Eigen::MatrixXd cov = f * f.transpose();
  cov.diagonal().array() += kNoise;
  const Eigen::VectorXd inv_sd = cov.diagonal().cwiseSqrt().cwiseInverse();
  cov = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
  cov.diagonal().setOnes();
  return cov;
}

bool is_binary_column(const SimConfig& config, int j) {
  switch (config.data_type) {
    case DataType::binary: return true;
    case DataType::continuous: return false;
    case DataType::mixed: return j < (config.P + 1) / 2;
  }
  return true;
}

}  // namespace

void SimConfig::validate() const {
  if (n < 1 || P < 1 || C < 1) throw std::invalid_argument("sim config: n, P and C must be positive");
  if (cov_dependence == Dependence::independent && cov_covariate) {
    throw std::invalid_argument("sim config: an independent covariance cannot depend on covariates");
  }
}

const std::vector<std::string>& SimConfig::preset_names() {
  static const std::vector<std::string> names = {"a", "b", "c", "d", "e", "f", "g1", "g2", "g3"};
  return names;
}

SimConfig SimConfig::preset(const std::string& name) {
  SimConfig c;
  const auto S = Structure::specific;
  const auto Cm = Structure::common;
  auto set = [&](Structure mean, bool mean_v, Structure cov, Dependence dep, bool cov_v, DataType t) {
    c.mean_structure = mean;
    c.mean_covariate = mean_v;
    c.cov_structure = cov;
    c.cov_dependence = dep;
    c.cov_covariate = cov_v;
    c.data_type = t;
  };
  const auto I = Dependence::independent;
  const auto D = Dependence::dependent;
  if (name == "a") set(S, false, Cm, I, false, DataType::binary);
  else if (name == "b") set(S, false, Cm, D, false, DataType::binary);
  else if (name == "c") set(Cm, false, S, D, false, DataType::binary);
  else if (name == "d") set(S, false, S, D, false, DataType::binary);
  else if (name == "e") set(S, true, Cm, I, false, DataType::binary);
  else if (name == "f") set(Cm, false, S, D, true, DataType::binary);
  else if (name == "g1") set(S, true, S, D, true, DataType::binary);
  else if (name == "g2") set(S, true, S, D, true, DataType::mixed);
  else if (name == "g3") set(S, true, S, D, true, DataType::continuous);
  else throw std::invalid_argument("unknown simulation preset '" + name + "'");
  return c;
}

SimResult generate_dataset(const SimConfig& config) {
  Rng rng(config.seed);
  return generate_dataset(config, rng);
}

SimResult generate_dataset(const SimConfig& config, Rng& rng) {
  config.validate();
  const int p = config.P;
  const int c_count = config.C;
  const int n = config.n;
  const int levels = config.uses_covariate() ? 2 : 1;

  SimTruth truth;
  truth.means.assign(c_count, std::vector<Eigen::VectorXd>(levels));
  truth.covs.assign(c_count, std::vector<Eigen::MatrixXd>(levels));

  // Means.
  std::vector<Eigen::VectorXd> base(c_count);
  std::vector<Eigen::VectorXd> shift(c_count, Eigen::VectorXd::Zero(p));
  if (config.mean_structure == Structure::common) {
    const Eigen::VectorXd m = normal_vector(p, 1.0, rng);
    std::fill(base.begin(), base.end(), m);
    if (config.mean_covariate) std::fill(shift.begin(), shift.end(), normal_vector(p, kShiftSd, rng));
  } else {
    for (auto& m : base) m = normal_vector(p, 1.0, rng);
    if (config.mean_covariate) {
      for (auto& s : shift) s = normal_vector(p, kShiftSd, rng);
    }
  }
  for (int c = 0; c < c_count; ++c) {
    for (int g = 0; g < levels; ++g) truth.means[c][g] = base[c] + g * shift[c];
  }

  // Covariances.
  const int cov_levels = config.cov_covariate ? 2 : 1;
  auto fill_cov = [&](int c) {
    for (int g = 0; g < cov_levels; ++g) {
      truth.covs[c][g] = config.cov_dependence == Dependence::independent
                             ? Eigen::MatrixXd::Identity(p, p)
                             : dependent_cov(p, rng);
    }
    for (int g = cov_levels; g < levels; ++g) truth.covs[c][g] = truth.covs[c][0];
  };
  if (config.cov_structure == Structure::common) {
    fill_cov(0);
    for (int c = 1; c < c_count; ++c) truth.covs[c] = truth.covs[0];
  } else {
    for (int c = 0; c < c_count; ++c) fill_cov(c);
  }

  std::vector<std::vector<Eigen::MatrixXd>> chol(c_count, std::vector<Eigen::MatrixXd>(levels));
  for (int c = 0; c < c_count; ++c) {
    for (int g = 0; g < levels; ++g) chol[c][g] = robust_cholesky(truth.covs[c][g]);
  }

  // Rows.
  truth.z.resize(n, p);
  truth.labels.resize(n);
  truth.covariate.assign(n, 0);
  Eigen::VectorXd eps(p);
  for (int i = 0; i < n; ++i) {
    if (levels == 2) truth.covariate[i] = rng.uniform() < 0.5 ? 0 : 1;
    truth.labels[i] = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(c_count));
    const int c = truth.labels[i];
    const int g = truth.covariate[i];
    for (int j = 0; j < p; ++j) eps(j) = rng.normal();
    truth.z.row(i) = (truth.means[c][g] + chol[c][g] * eps).transpose();
  }

  // Observation links.
  DatasetInput input;
  input.n_causes = c_count;
  for (int j = 0; j < p; ++j) {
    SymptomSpec spec;
    char name[16];
    std::snprintf(name, sizeof(name), "s%02d", j + 1);
    spec.name = name;
    spec.kind = is_binary_column(config, j) ? SymptomKind::binary : SymptomKind::continuous_identity;
    input.schema.push_back(spec);
  }
  if (levels == 2) input.covariate_names = {"group"};
  input.covariates.resize(n, levels == 2 ? 1 : 0);
  input.symptoms.assign(n, RawRow(p));
  input.labels = truth.labels;
  for (int i = 0; i < n; ++i) {
    input.ids.push_back(std::to_string(i + 1));
    if (levels == 2) input.covariates(i, 0) = truth.covariate[i];
    for (int j = 0; j < p; ++j) {
      const double z = truth.z(i, j);
      input.symptoms[i][j] = is_binary_column(config, j) ? (z > 0.0 ? "1" : "0") : format_double(z);
    }
  }
  return {build_dataset(input), std::move(truth)};
}

TrainTestSplit split_train_test(const Dataset& data, double test_fraction, Rng& rng) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("split_train_test: test fraction must lie in (0, 1)");
  }
  const int n = data.n();
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  const int n_test = static_cast<int>(std::ceil(n * test_fraction - 1e-9));
  TrainTestSplit out;
  out.test_rows.assign(perm.begin(), perm.begin() + n_test);
  out.train_rows.assign(perm.begin() + n_test, perm.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());
  std::sort(out.train_rows.begin(), out.train_rows.end());
  out.train = subset_rows(data, out.train_rows);
  out.test = subset_rows(data, out.test_rows);
  out.test_labels = out.test.y;
  std::fill(out.test.y.begin(), out.test.y.end(), -1);
  return out;
}

}  // namespace farva
