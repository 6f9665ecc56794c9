#ifndef FARVA_PREDICT_HPP
#define FARVA_PREDICT_HPP

/// Out-of-sample cause assignment, CSMF estimation and posterior summaries of
/// the latent mean and covariance structure.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "farva/data.hpp"
#include "farva/model.hpp"
#include "farva/numerics.hpp"

namespace farva {

inline constexpr int kDefaultMonteCarloDraws = 200;

/// log P(s | latent mean, sd) for one cell: probit orthant for binary cells,
/// rounding-interval mass for counts, density for continuous values, 0 when
/// missing.
double log_cell_probability(const Column& column, double value, double mean, double sd);

/// log pi(s | y = c), integrating eta ~ N(psi_c(x), I_K) by Monte Carlo.
double log_likelihood_s_given_c(const ModelState& snapshot, const std::vector<Column>& columns,
                                const Eigen::VectorXd& s, const Eigen::VectorXd& x, int cause,
                                int n_mc, Rng& rng);

/// exp of log_likelihood_s_given_c; may underflow for long symptom vectors.
double likelihood_s_given_c(const ModelState& snapshot, const std::vector<Column>& columns,
                            const Eigen::VectorXd& s, const Eigen::VectorXd& x, int cause,
                            int n_mc, Rng& rng);

/// Per-snapshot Bayes rule with the snapshot's pi, averaged over snapshots.
Eigen::VectorXd cod_posterior(const PosteriorSamples& samples, const std::vector<Column>& columns,
                              const Eigen::VectorXd& s, const Eigen::VectorXd& x, int n_mc, Rng& rng);

/// Index of the largest entry; ties go to the lowest index.
int top_cause(const Eigen::VectorXd& probs);

struct CodPosterior {
  Eigen::MatrixXd probs;  // rows x C, each row on the simplex
  std::vector<int> top;
};

struct Prediction {
  CodPosterior posterior;
  /// labels[s][i]: cause drawn for row i from snapshot s's posterior.
  std::vector<std::vector<int>> sampled_labels;
};

/// cod_posterior for every row of `data`, plus one sampled label per row and
/// snapshot for CSMF estimation.
Prediction predict_dataset(const PosteriorSamples& samples, const Dataset& data, int n_mc, Rng& rng);

struct CsmfEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;  // 2.5% quantile, clamped to <= mean
  Eigen::VectorXd upper;  // 97.5% quantile, clamped to >= mean
};

/// Cause fractions over the unknown set per snapshot, summarized across
/// snapshots.
CsmfEstimate estimate_csmf(const std::vector<std::vector<int>>& labels_per_snapshot, int n_causes);

/// Linear-interpolation sample quantile (type 7).
double quantile(std::vector<double> values, double q);

struct LatentSummary {
  Eigen::VectorXd mean;        // posterior mean of E[z_j]
  Eigen::VectorXd mean_lower;
  Eigen::VectorXd mean_upper;
  Eigen::MatrixXd cov;         // posterior mean of Cov(z_j, z_k)
  Eigen::MatrixXd cov_lower;
  Eigen::MatrixXd cov_upper;
};

/// Marginal latent moments for cause c at covariates x, summarized with
/// posterior means and equal-tailed 95% intervals.
LatentSummary posterior_latent_summaries(const PosteriorSamples& samples, int cause,
                                         const Eigen::VectorXd& x);

}  // namespace farva

#endif  // FARVA_PREDICT_HPP
