#ifndef FARVA_SIMULATE_HPP
#define FARVA_SIMULATE_HPP

/// Synthetic verbal-autopsy style datasets with controllable cause-specificity
/// and covariate dependence in the latent mean and covariance.
///
/// Generation recipe, for one binary covariate level g in {0, 1} (g = 0 when
/// no covariate flag is set):
///   mean_{c,g} = m_c + g * shift_c        m ~ N(0, 1), shift ~ N(0, 0.5^2)
///   cov_{c,g}  = I                        (independent)
///              = corr(F F' + 0.5 I)       (dependent, F is P x 3 with N(0, 1))
/// "common" structures draw one m / shift / F shared by every cause; a
/// covariate-dependent covariance draws an independent F per level. Dependent
/// covariances are rescaled to unit diagonal so a common mean gives the same
/// symptom prevalence under every cause. Latent rows z ~ N(mean, cov) are then
/// observed through the binary threshold or identity link.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "farva/data.hpp"
#include "farva/numerics.hpp"

namespace farva {

enum class Structure { specific, common };
enum class Dependence { independent, dependent };
enum class DataType { binary, mixed, continuous };

struct SimConfig {
  Structure mean_structure = Structure::specific;
  bool mean_covariate = false;
  Structure cov_structure = Structure::common;
  Dependence cov_dependence = Dependence::independent;
  bool cov_covariate = false;
  DataType data_type = DataType::binary;
  int n = 928;
  int P = 21;
  int C = 4;
  std::uint64_t seed = 1;

  bool uses_covariate() const { return mean_covariate || cov_covariate; }
  void validate() const;

  /// Named configurations a, b, c, d, e, f, g1, g2, g3.
  static SimConfig preset(const std::string& name);
  static const std::vector<std::string>& preset_names();
};

struct SimTruth {
  /// means[c][g], covs[c][g]; g ranges over covariate levels (1 or 2).
  std::vector<std::vector<Eigen::VectorXd>> means;
  std::vector<std::vector<Eigen::MatrixXd>> covs;
  Eigen::MatrixXd z;              // n x P latent draws
  std::vector<int> labels;        // 0-based true causes
  std::vector<int> covariate;     // level per row
};

struct SimResult {
  Dataset data;  // all labels known
  SimTruth truth;
};

SimResult generate_dataset(const SimConfig& config, Rng& rng);

/// generate_dataset with Rng(config.seed).
SimResult generate_dataset(const SimConfig& config);

struct TrainTestSplit {
  Dataset train;
  Dataset test;                // labels hidden
  std::vector<int> train_rows;
  std::vector<int> test_rows;
  std::vector<int> test_labels;  // hidden labels, for scoring only
};

/// ceil(n * test_fraction) rows go to the test set.
TrainTestSplit split_train_test(const Dataset& data, double test_fraction, Rng& rng);

}  // namespace farva

#endif  // FARVA_SIMULATE_HPP
