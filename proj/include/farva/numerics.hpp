#ifndef FARVA_NUMERICS_HPP
#define FARVA_NUMERICS_HPP

/// Random-variate generation and densities shared by the sampler, the
/// predictor and the simulation generators.
///
/// Every sampler takes an explicit Rng. Draws are produced by hand-written
/// transforms on top of std::mt19937_64 (whose output sequence is fixed by the
/// standard), so a seed reproduces the same trajectory with any conforming
/// standard library.

#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace farva {

/// Raised when a factorization fails even after the jitter ramp.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();

  /// Independent stream derived from this generator's seed and `stream`.
  /// Does not advance this generator.
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t x);

// Scalar normal helpers.
double normal_pdf(double x);
double log_normal_pdf(double x);
double normal_cdf(double x);
/// log Phi(x), accurate far into both tails.
double log_normal_cdf(double x);
/// Inverse of Phi on (0, 1).
double normal_quantile(double p);

double sample_normal(double mu, double sd, Rng& rng);
double sample_gamma(double shape, double rate, Rng& rng);
/// Inverse-gamma with density proportional to v^{-shape-1} exp(-scale / v).
double sample_inverse_gamma(double shape, double scale, Rng& rng);

/// Normal(mu, sigma^2) restricted to [lo, hi]. Bounds may be infinite.
/// Inverse-CDF in log space, so extreme truncation never stalls.
double sample_truncated_normal(double mu, double sigma, double lo, double hi, Rng& rng);

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& alpha, Rng& rng);

/// Draw from N(mean, cov) for symmetric positive semi-definite cov.
Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng);

/// Draw from N(Q^{-1} b, Q^{-1}) given the precision Q and linear term b.
/// This is the canonical form of every conjugate Gaussian update.
Eigen::VectorXd sample_mvn_canonical(const Eigen::VectorXd& b, const Eigen::MatrixXd& precision,
                                     Rng& rng);

Eigen::MatrixXd sample_inverse_wishart(double df, const Eigen::MatrixXd& scale, Rng& rng);

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                  const Eigen::MatrixXd& cov);

/// Lower Cholesky factor of an SPD matrix. On failure retries with diagonal
/// jitter 1e-10, 1e-9, ..., 1e-6 before throwing numerical_error.
Eigen::MatrixXd robust_cholesky(const Eigen::MatrixXd& a);

/// log(sum(exp(v))) without overflow.
double log_sum_exp(const Eigen::VectorXd& v);

/// Normalizes log-weights into a probability vector.
Eigen::VectorXd softmax(const Eigen::VectorXd& log_weights);

/// Index drawn from a probability vector.
int sample_categorical(const Eigen::VectorXd& probs, Rng& rng);

}  // namespace farva

#endif  // FARVA_NUMERICS_HPP
