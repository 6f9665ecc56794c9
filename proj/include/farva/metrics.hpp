#ifndef FARVA_METRICS_HPP
#define FARVA_METRICS_HPP

/// Individual- and population-level scores for cause assignment, and Yule's Q
/// for 2x2 symptom association.

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace farva {

/// Fraction of rows whose predicted top cause equals the true cause.
double acc1(std::span<const int> truth, std::span<const int> predicted);

/// 1 - sum|true - pred| / (2 (1 - min(true))). Inputs are validated as
/// simplices with tolerance 1e-6 and renormalized.
double acc_csmf(const Eigen::VectorXd& true_csmf, const Eigen::VectorXd& pred_csmf);

/// Chance-corrected concordance (acc1 - 1/C) / (1 - 1/C).
double ccc(double acc1_value, int n_causes);

/// (ad - bc) / (ad + bc) for the table [[a, b], [c, d]].
double yules_q(double a, double b, double c, double d);

/// Cause fractions of a label vector (0-based labels).
Eigen::VectorXd empirical_csmf(std::span<const int> labels, int n_causes);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample SD; 0 for a single value
};

MeanSd mean_sd(std::span<const double> values);

}  // namespace farva

#endif  // FARVA_METRICS_HPP
