#ifndef FARVA_MODEL_HPP
#define FARVA_MODEL_HPP

/// Parameter containers and the deterministic algebra of the hierarchical
/// covariate-dependent factor model:
///
///   z_i   = Lambda_c(x_i) eta_i + eps_i,      eps_i ~ N(0, diag(sigma2))
///   eta_i ~ N(psi_c(x_i), I_K),               psi_{c,k}(x) = alpha_{c,k}' x
///   Lambda_c(x) = Theta_c xi_c(x),            xi_{c,lk}(x) = beta_{c,lk}' x
///
/// with a multiplicative-gamma shrinkage prior tying every Theta_c to a
/// shared mean Delta, and hierarchical Gaussian / inverse-Wishart priors on
/// the regression coefficients beta and alpha.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "farva/data.hpp"
#include "farva/numerics.hpp"

namespace farva {

struct Hyperparameters {
  Eigen::VectorXd a;          // Dirichlet concentration over causes, length C
  int K = 1;                  // latent factor bound
  int L = 1;                  // basis size bound
  double gamma = 3.0;         // phi_jl ~ Ga(gamma/2, gamma/2)
  double d1 = 2.0;            // delta_1 ~ Ga(d1, 1)
  double d2 = 3.0;            // delta_h ~ Ga(d2, 1), h >= 2
  Eigen::VectorXd mu0;        // mu_beta ~ N(mu0, Lambda0)
  Eigen::MatrixXd Lambda0;
  double nu0 = 3.0;           // Sigma_beta ~ IW(nu0, S0)
  Eigen::MatrixXd S0;
  Eigen::VectorXd A0;         // mu_alpha ~ N(A0, L0)
  Eigen::MatrixXd L0;
  double v0 = 3.0;            // Sigma_alpha ~ IW(v0, D0)
  Eigen::MatrixXd D0;
  double sigma_shape = 1.0;   // free sigma_j^2 ~ IG(shape, rate)
  double sigma_rate = 1.0;

  int C() const { return static_cast<int>(a.size()); }
  int B() const { return static_cast<int>(mu0.size()); }

  /// Weakly informative conjugate defaults: a_c = 1/C, gamma = 3, d1 = 2,
  /// d2 = 3, identity prior covariances, nu0 = v0 = B + 2, IG(1, 1) noise,
  /// K = min(15, P), L = min(10, P).
  static Hyperparameters defaults(int n_causes, int n_columns, int n_covariates);

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

struct ModelState {
  std::vector<Eigen::MatrixXd> theta;        // C x (P x L)
  Eigen::MatrixXd delta;                     // P x L shared mean of theta
  Eigen::MatrixXd phi;                       // P x L local precisions
  Eigen::VectorXd delta_mg;                  // L multiplicative gamma factors
  Eigen::VectorXd tau;                       // L column precisions, cumprod(delta_mg)
  /// beta[c] is (L*K) x B; row l + L*k holds beta_{c,lk}.
  std::vector<Eigen::MatrixXd> beta;
  Eigen::MatrixXd mu_beta;                   // (L*K) x B
  std::vector<Eigen::MatrixXd> sigma_beta;   // L*K matrices, B x B
  std::vector<Eigen::MatrixXd> alpha;        // C x (K x B)
  Eigen::MatrixXd mu_alpha;                  // K x B
  std::vector<Eigen::MatrixXd> sigma_alpha;  // K matrices, B x B
  Eigen::VectorXd sigma2;                    // P noise variances
  Eigen::MatrixXd z;                         // n x P latent symptoms
  Eigen::MatrixXd eta;                       // n x K latent factors
  std::vector<int> labels;                   // n current causes (known ones fixed)
  Eigen::VectorXd pi;                        // C cause probabilities

  int C() const { return static_cast<int>(theta.size()); }
  int P() const { return static_cast<int>(delta.rows()); }
  int L() const { return static_cast<int>(delta.cols()); }
  int K() const { return static_cast<int>(mu_alpha.rows()); }
  int B() const { return static_cast<int>(mu_alpha.cols()); }

  static int basis_row(int l, int k, int L) { return l + L * k; }

  /// Recomputes tau from delta_mg.
  void refresh_tau();
};

struct ChainMetadata {
  int iterations = 0;
  int burn_in = 0;
  int thinning = 1;
  std::uint64_t seed = 0;
};

struct PosteriorSamples {
  std::vector<ModelState> snapshots;
  ChainMetadata meta;
  Hyperparameters hyper;
};

/// xi_c(x), an L x K matrix.
Eigen::MatrixXd compute_xi(const ModelState& state, int cause, const Eigen::VectorXd& x);

/// psi_c(x), length K.
Eigen::VectorXd compute_psi(const ModelState& state, int cause, const Eigen::VectorXd& x);

/// Lambda_c(x) = Theta_c xi_c(x), P x K.
Eigen::MatrixXd compute_loadings(const ModelState& state, int cause, const Eigen::VectorXd& x);

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Latent moments with eta integrated out: mean Lambda psi, covariance
/// Lambda Lambda' + diag(sigma2).
Moments marginal_moments(const ModelState& state, int cause, const Eigen::VectorXd& x);

/// Draws every parameter block from its prior, labels for unknown rows
/// uniformly, eta from its prior and z consistent with each cell's
/// constraint.
ModelState init_state(const Hyperparameters& hyper, const Dataset& data, Rng& rng);

/// Empty string when the state satisfies the structural invariants (tau is
/// the cumulative product of delta_mg, fixed-variance columns have sigma2 = 1,
/// pi on the simplex, z inside every constraint, labels agree with known
/// causes); otherwise a description of the first violation.
std::string check_invariants(const ModelState& state, const Dataset& data);

}  // namespace farva

#endif  // FARVA_MODEL_HPP
