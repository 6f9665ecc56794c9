#ifndef FARVA_NBC_HPP
#define FARVA_NBC_HPP

/// Naive Bayes baseline on binary symptoms, assuming symptoms independent
/// given cause.

#include <vector>

#include <Eigen/Dense>

#include "farva/data.hpp"

namespace farva {

struct NaiveBayesModel {
  std::vector<int> columns;  // binary column indices used
  Eigen::MatrixXd rates;     // C x columns.size(), P(s_j = 1 | c)
  Eigen::VectorXd prior;     // training cause frequencies
};

/// Laplace-smoothed Bernoulli rates from labelled rows; missing cells and
/// non-binary columns are ignored.
NaiveBayesModel nbc_fit(const Dataset& train, double smoothing = 1.0);

/// Cause posterior for one full model-space row (length P).
Eigen::VectorXd nbc_predict(const NaiveBayesModel& model, const Eigen::VectorXd& row);

}  // namespace farva

#endif  // FARVA_NBC_HPP
