#ifndef FARVA_GIBBS_HPP
#define FARVA_GIBBS_HPP

/// Gibbs sampler for the hierarchical factor model.
///
/// A sweep is a fixed systematic scan over conjugate full conditionals:
///   1-2. z_i and eta_i per row (truncated normals, K-variate normal)
///   3.   rows of each Theta_c (normal, prior N(Delta_j, diag(1/(phi_j tau))))
///   4-6. Delta, phi, delta (normal, gamma, multiplicative gamma cascade)
///   7-8. beta_{c,lk}, then mu_beta / Sigma_beta (normal, normal / IW)
///   9.   alpha_{c,k}, then mu_alpha / Sigma_alpha
///   10.  sigma_j^2 of free columns (inverse gamma)
///   11.  labels of unknown rows, drawn with eta integrated out, then eta_i
///        redrawn under the new label
///   12.  pi (Dirichlet with raw counts a_c + n_c)
///
/// Each block is exposed on its own so it can be validated in isolation.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "farva/data.hpp"
#include "farva/model.hpp"
#include "farva/numerics.hpp"

namespace farva {

struct ChainConfig {
  int iterations = 2000;
  int burn_in = 1000;
  int thinning = 10;
  std::uint64_t seed = 1;
  /// Keep z and eta in retained snapshots.
  bool keep_latent = true;
  /// Progress lines go here when set; one line per `progress_every` sweeps.
  std::ostream* progress = nullptr;
  int progress_every = 500;

  void validate() const;
  int retained() const { return (iterations - burn_in) / thinning; }
};

/// Floor applied to sampled precisions and variances.
inline constexpr double kPrecisionFloor = 1e-12;

namespace gibbs {

void update_latent(ModelState& state, const Dataset& data, Rng& rng);
void update_theta(ModelState& state, const Dataset& data, Rng& rng);
void update_delta(ModelState& state, Rng& rng);
void update_phi(ModelState& state, const Hyperparameters& hyper, Rng& rng);
void update_delta_mg(ModelState& state, const Hyperparameters& hyper, Rng& rng);
void update_beta(ModelState& state, const Dataset& data, Rng& rng);
void update_beta_hyper(ModelState& state, const Hyperparameters& hyper, Rng& rng);
void update_alpha(ModelState& state, const Dataset& data, Rng& rng);
void update_alpha_hyper(ModelState& state, const Hyperparameters& hyper, Rng& rng);
void update_sigma2(ModelState& state, const Dataset& data, const Hyperparameters& hyper, Rng& rng);
void update_pi(ModelState& state, const Hyperparameters& hyper, Rng& rng);

/// Draws eta_i from its full conditional given z_i and the current label.
void redraw_eta(ModelState& state, const Dataset& data, int row, Rng& rng);

}  // namespace gibbs

/// Posterior over causes for one latent vector: proportional to
/// pi_c N(z; mean_c, cov_c), normalized with log-sum-exp.
Eigen::VectorXd label_probabilities(const Eigen::VectorXd& z, const std::vector<Moments>& moments,
                                    const Eigen::VectorXd& pi);

/// Redraws the label of every unknown-cause row (and its eta).
void update_unknown_cod(ModelState& state, const Dataset& data, const Hyperparameters& hyper,
                        Rng& rng);

void gibbs_sweep(ModelState& state, const Dataset& data, const Hyperparameters& hyper, Rng& rng);

/// init_state followed by config.iterations sweeps. Every thinning-th sweep
/// after burn-in is retained.
PosteriorSamples run_chain(const Dataset& data, const Hyperparameters& hyper,
                           const ChainConfig& config);

/// Posterior mean of the Euclidean norm of each column of Delta. Trailing
/// columns near zero mean L was large enough; trailing columns that stay large
/// suggest increasing L.
Eigen::VectorXd shrinkage_diagnostic(const PosteriorSamples& samples);

/// Analogous check for K: posterior mean norm of each column of Lambda_c(x),
/// averaged over causes. Large trailing entries suggest increasing K.
Eigen::VectorXd factor_diagnostic(const PosteriorSamples& samples, const Eigen::VectorXd& x);

}  // namespace farva

#endif  // FARVA_GIBBS_HPP
