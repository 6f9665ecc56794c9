#ifndef FARVA_TEST_HELPERS_HPP
#define FARVA_TEST_HELPERS_HPP

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "farva/data.hpp"
#include "farva/model.hpp"

namespace farva::test {

struct Summary {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean, iid draws
};

inline Summary summarize(const std::vector<double>& v) {
  Summary s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return s;
}

/// Mean within k standard errors of `expected`.
inline bool within_se(const std::vector<double>& v, double expected, double k = 3.0) {
  const Summary s = summarize(v);
  return std::abs(s.mean - expected) <= k * s.se;
}

/// Batch-means standard error for autocorrelated chains.
inline Summary batch_summary(const std::vector<double>& v, int n_batches = 50) {
  const std::size_t per = v.size() / static_cast<std::size_t>(n_batches);
  std::vector<double> means;
  for (int b = 0; b < n_batches; ++b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < per; ++k) acc += v[b * per + k];
    means.push_back(acc / static_cast<double>(per));
  }
  return summarize(means);
}

/// A state with every parameter zero, unit variances, uniform pi and
/// identity covariance hyper-parameters.
inline ModelState zero_state(int C, int P, int K, int L, int B, int n = 0) {
  ModelState s;
  s.theta.assign(C, Eigen::MatrixXd::Zero(P, L));
  s.delta = Eigen::MatrixXd::Zero(P, L);
  s.phi = Eigen::MatrixXd::Ones(P, L);
  s.delta_mg = Eigen::VectorXd::Ones(L);
  s.refresh_tau();
  s.beta.assign(C, Eigen::MatrixXd::Zero(L * K, B));
  s.mu_beta = Eigen::MatrixXd::Zero(L * K, B);
  s.sigma_beta.assign(L * K, Eigen::MatrixXd::Identity(B, B));
  s.alpha.assign(C, Eigen::MatrixXd::Zero(K, B));
  s.mu_alpha = Eigen::MatrixXd::Zero(K, B);
  s.sigma_alpha.assign(K, Eigen::MatrixXd::Identity(B, B));
  s.sigma2 = Eigen::VectorXd::Ones(P);
  s.z = Eigen::MatrixXd::Zero(n, P);
  s.eta = Eigen::MatrixXd::Zero(n, K);
  s.labels.assign(n, 0);
  s.pi = Eigen::VectorXd::Constant(C, 1.0 / C);
  return s;
}

/// Dataset from explicit model-space values (NaN = missing); all columns of
/// the given kind, intercept-only covariates.
inline Dataset make_dataset(const Eigen::MatrixXd& s, const std::vector<ColumnKind>& kinds,
                            std::vector<int> labels, int n_causes) {
  Dataset d;
  for (std::size_t j = 0; j < kinds.size(); ++j) {
    SymptomSpec spec;
    spec.name = "s" + std::to_string(j + 1);
    spec.kind = kinds[j] == ColumnKind::binary  ? SymptomKind::binary
                : kinds[j] == ColumnKind::count ? SymptomKind::count
                                                : SymptomKind::continuous_identity;
    d.schema.push_back(spec);
  }
  d.columns = expand_schema(d.schema);
  d.s = s;
  d.x = Eigen::MatrixXd::Ones(s.rows(), 1);
  d.y = std::move(labels);
  d.n_causes = n_causes;
  for (Eigen::Index i = 0; i < s.rows(); ++i) d.ids.push_back(std::to_string(i + 1));
  refresh_constraints(d);
  return d;
}

}  // namespace farva::test

#endif  // FARVA_TEST_HELPERS_HPP
