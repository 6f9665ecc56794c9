#include "farva/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace farva {

namespace {

constexpr double kSimplexTol = 1e-6;

Eigen::VectorXd checked_simplex(const Eigen::VectorXd& v, const char* what) {
  if (v.size() < 1) throw std::invalid_argument(std::string(what) + ": empty vector");
  if ((v.array() < -kSimplexTol).any() || std::abs(v.sum() - 1.0) > kSimplexTol) {
    throw std::invalid_argument(std::string(what) + ": not a probability simplex");
  }
  Eigen::VectorXd out = v.cwiseMax(0.0);
  return out / out.sum();
}

}  // namespace

double acc1(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("acc1: length mismatch");
  if (truth.empty()) throw std::invalid_argument("acc1: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double acc_csmf(const Eigen::VectorXd& true_csmf, const Eigen::VectorXd& pred_csmf) {
  if (true_csmf.size() != pred_csmf.size()) throw std::invalid_argument("acc_csmf: length mismatch");
  const Eigen::VectorXd t = checked_simplex(true_csmf, "acc_csmf");
  const Eigen::VectorXd p = checked_simplex(pred_csmf, "acc_csmf");
  const double worst = 2.0 * (1.0 - t.minCoeff());
  if (!(worst > 0.0)) throw std::invalid_argument("acc_csmf: true CSMF puts all mass on one cause");
  return 1.0 - (t - p).cwiseAbs().sum() / worst;
}

double ccc(double acc1_value, int n_causes) {
  if (n_causes < 2) throw std::invalid_argument("ccc: need at least two causes");
  const double chance = 1.0 / n_causes;
  return (acc1_value - chance) / (1.0 - chance);
}

double yules_q(double a, double b, double c, double d) {
  if (a < 0.0 || b < 0.0 || c < 0.0 || d < 0.0) throw std::invalid_argument("yules_q: negative count");
  const double ad = a * d;
  const double bc = b * c;
  if (!(ad + bc > 0.0)) throw std::invalid_argument("yules_q: undefined when ad + bc = 0");
  return (ad - bc) / (ad + bc);
}

Eigen::VectorXd empirical_csmf(std::span<const int> labels, int n_causes) {
  if (labels.empty()) throw std::invalid_argument("empirical_csmf: no labels");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_causes);
  for (int label : labels) {
    if (label < 0 || label >= n_causes) throw std::invalid_argument("empirical_csmf: label out of range");
    out(label) += 1.0;
  }
  return out / static_cast<double>(labels.size());
}

MeanSd mean_sd(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_sd: no values");
  MeanSd out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace farva
