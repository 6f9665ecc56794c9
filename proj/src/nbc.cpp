#include "farva/nbc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "farva/numerics.hpp"

namespace farva {

NaiveBayesModel nbc_fit(const Dataset& train, double smoothing) {
  if (!(smoothing > 0.0)) throw std::invalid_argument("nbc_fit: smoothing must be positive");
  const auto known = train.known_rows();
  if (known.empty()) throw std::invalid_argument("nbc_fit: no labelled rows");
  NaiveBayesModel model;
  for (int j = 0; j < train.P(); ++j) {
    if (train.columns[j].kind == ColumnKind::binary) model.columns.push_back(j);
  }
  const int c_count = train.n_causes;
  const int m = static_cast<int>(model.columns.size());
  Eigen::MatrixXd ones = Eigen::MatrixXd::Zero(c_count, m);
  Eigen::MatrixXd seen = Eigen::MatrixXd::Zero(c_count, m);
  model.prior = Eigen::VectorXd::Zero(c_count);
  for (int i : known) {
    const int c = train.y[i];
    model.prior(c) += 1.0;
    for (int t = 0; t < m; ++t) {
      const double v = train.s(i, model.columns[t]);
      if (is_missing(v)) continue;
      seen(c, t) += 1.0;
      ones(c, t) += v;
    }
  }
  model.prior /= static_cast<double>(known.size());
  model.rates = (ones.array() + smoothing) / (seen.array() + 2.0 * smoothing);
  return model;
}

Eigen::VectorXd nbc_predict(const NaiveBayesModel& model, const Eigen::VectorXd& row) {
  const int c_count = static_cast<int>(model.prior.size());
  Eigen::VectorXd log_w(c_count);
  for (int c = 0; c < c_count; ++c) {
    if (model.prior(c) <= 0.0) {
      log_w(c) = -std::numeric_limits<double>::infinity();
      continue;
    }
    double acc = std::log(model.prior(c));
    for (std::size_t t = 0; t < model.columns.size(); ++t) {
      const double v = row(model.columns[t]);
      if (is_missing(v)) continue;
      const double r = model.rates(c, static_cast<Eigen::Index>(t));
      acc += v > 0.5 ? std::log(r) : std::log1p(-r);
    }
    log_w(c) = acc;
  }
  return softmax(log_w);
}

}  // namespace farva
