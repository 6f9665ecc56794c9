#include "farva/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace farva {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// log of the upper tail 1 - Phi(x).
double log_normal_sf(double x) {
  if (x < 35.0) return std::log(0.5 * std::erfc(x / std::numbers::sqrt2));
  // Asymptotic expansion; erfc underflows beyond this point.
  const double r = 1.0 / (x * x);
  const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
  return -0.5 * x * x - kLogSqrt2Pi - std::log(x) + std::log(series);
}

// Solves log_normal_sf(x) = log_p for x >= 0 (log_p <= log 0.5).
double inverse_log_sf(double log_p) {
  double x;
  if (log_p > -700.0) {
    x = -normal_quantile(std::exp(log_p));
  } else {
    x = std::sqrt(-2.0 * log_p);
  }
  // Newton on the log scale; d/dx log sf(x) = -pdf(x)/sf(x).
  for (int it = 0; it < 50; ++it) {
    const double f = log_normal_sf(x) - log_p;
    const double slope = -std::exp(log_normal_pdf(x) - log_normal_sf(x));
    const double step = f / slope;
    x -= step;
    if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

// Standard normal restricted to [a, b] with 0 <= a < b.
double upper_tail_draw(double a, double b, Rng& rng) {
  const double log_qa = log_normal_sf(a);
  const double log_qb = std::isinf(b) ? -kInf : log_normal_sf(b);
  const double u = rng.uniform();
  // p = qa - u (qa - qb), kept in log space.
  const double width = -std::expm1(log_qb - log_qa);
  const double log_p = log_qa + std::log1p(-u * width);
  return inverse_log_sf(log_p);
}

// Marsaglia-Tsang for shape >= 1; returns a Gamma(shape, 1) draw.
double gamma_unit(double shape, Rng& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

// log of a Gamma(shape, 1) draw; stays finite for tiny shapes.
double log_gamma_unit(double shape, Rng& rng) {
  if (shape >= 1.0) return std::log(gamma_unit(shape, rng));
  return std::log(gamma_unit(shape + 1.0, rng)) + std::log(rng.uniform()) / shape;
}

bool is_symmetric(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(mix_seed(seed)) {}

double Rng::uniform() {
  for (;;) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(mix_seed(seed_ ^ mix_seed(stream + 0x5851f42d4c957f2dULL)));
}

double normal_pdf(double x) { return std::exp(log_normal_pdf(x)); }

double log_normal_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_normal_cdf(double x) {
  if (x < 0.0) return log_normal_sf(-x);
  return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
}

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, "normal_quantile: p must lie in (0, 1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double sample_normal(double mu, double sd, Rng& rng) { return mu + sd * rng.normal(); }

double sample_gamma(double shape, double rate, Rng& rng) {
  require(shape > 0.0 && rate > 0.0, "sample_gamma: shape and rate must be positive");
  double g = std::exp(log_gamma_unit(shape, rng)) / rate;
  // Tiny shapes can underflow; keep the support strictly positive.
  return std::max(g, std::numeric_limits<double>::min());
}

double sample_inverse_gamma(double shape, double scale, Rng& rng) {
  require(shape > 0.0 && scale > 0.0, "sample_inverse_gamma: shape and scale must be positive");
  return 1.0 / sample_gamma(shape, scale, rng);
}

double sample_truncated_normal(double mu, double sigma, double lo, double hi, Rng& rng) {
  require(sigma > 0.0, "sample_truncated_normal: sigma must be positive");
  require(lo < hi, "sample_truncated_normal: lo must be below hi");
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  double x;
  if (a >= 0.0) {
    x = upper_tail_draw(a, b, rng);
  } else if (b <= 0.0) {
    x = -upper_tail_draw(-b, -a, rng);
  } else {
    const double pa = normal_cdf(a);
    const double pb = normal_cdf(b);
    const double p = pa + rng.uniform() * (pb - pa);
    x = (p <= 0.0 || p >= 1.0) ? 0.0 : normal_quantile(p);
  }
  x = std::clamp(x, a, b);
  return std::clamp(mu + sigma * x, lo, hi);
}

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& alpha, Rng& rng) {
  require(alpha.size() >= 1, "sample_dirichlet: empty concentration vector");
  require((alpha.array() > 0.0).all(), "sample_dirichlet: concentrations must be positive");
  Eigen::VectorXd log_g(alpha.size());
  for (Eigen::Index c = 0; c < alpha.size(); ++c) log_g(c) = log_gamma_unit(alpha(c), rng);
  return softmax(log_g);
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng) {
  require(cov.rows() == mean.size() && cov.cols() == mean.size(),
          "sample_mvn: dimension mismatch");
  require(is_symmetric(cov, 1e-10), "sample_mvn: covariance is not symmetric");
  const Eigen::Index d = mean.size();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const Eigen::VectorXd diag = ldlt.vectorD();
  const double scale = std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff());
  if (ldlt.info() != Eigen::Success || (diag.array() < -1e-10 * scale).any()) {
    throw std::invalid_argument("sample_mvn: covariance is not positive semi-definite");
  }
  Eigen::VectorXd z(d);
  for (Eigen::Index k = 0; k < d; ++k) z(k) = rng.normal();
  // cov = P' L D L' P  =>  x = mean + P' L D^{1/2} z.
  Eigen::VectorXd w = diag.cwiseMax(0.0).cwiseSqrt().cwiseProduct(z);
  w = ldlt.matrixL() * w;
  return mean + ldlt.transpositionsP().transpose() * w;
}

Eigen::VectorXd sample_mvn_canonical(const Eigen::VectorXd& b, const Eigen::MatrixXd& precision,
                                     Rng& rng) {
  const Eigen::MatrixXd chol = robust_cholesky(precision);
  const auto lower = chol.triangularView<Eigen::Lower>();
  Eigen::VectorXd mean = lower.solve(b);
  mean = lower.transpose().solve(mean);
  Eigen::VectorXd z(b.size());
  for (Eigen::Index k = 0; k < b.size(); ++k) z(k) = rng.normal();
  return mean + lower.transpose().solve(z);
}

Eigen::MatrixXd sample_inverse_wishart(double df, const Eigen::MatrixXd& scale, Rng& rng) {
  const Eigen::Index p = scale.rows();
  require(p >= 1 && scale.cols() == p, "sample_inverse_wishart: scale must be square");
  require(df > static_cast<double>(p) - 1.0, "sample_inverse_wishart: df must exceed p - 1");
  require(is_symmetric(scale, 1e-10), "sample_inverse_wishart: scale is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("sample_inverse_wishart: scale is not positive definite");
  }
  // Bartlett: W = (L A)(L A)' ~ Wishart(df, scale^{-1}) with L L' = scale^{-1}.
  const Eigen::MatrixXd scale_inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd l = robust_cholesky(0.5 * (scale_inv + scale_inv.transpose()));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(2.0 * sample_gamma(0.5 * (df - static_cast<double>(i)), 1.0, rng));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Eigen::MatrixXd m = l * a;  // lower triangular
  const Eigen::MatrixXd m_inv =
      m.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::MatrixXd out = m_inv.transpose() * m_inv;
  return 0.5 * (out + out.transpose());
}

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                  const Eigen::MatrixXd& cov) {
  require(x.size() == mean.size() && cov.rows() == x.size() && cov.cols() == x.size(),
          "mvn_logpdf: dimension mismatch");
  const Eigen::MatrixXd chol = robust_cholesky(cov);
  const Eigen::VectorXd r = chol.triangularView<Eigen::Lower>().solve(x - mean);
  const double log_det = 2.0 * chol.diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(x.size()) * 2.0 * kLogSqrt2Pi + log_det + r.squaredNorm());
}

Eigen::MatrixXd robust_cholesky(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const Eigen::Index d = a.rows();
  for (double jitter = 1e-10; jitter <= 1.0000001e-6; jitter *= 10.0) {
    llt.compute(a + jitter * Eigen::MatrixXd::Identity(d, d));
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw numerical_error("cholesky factorization failed after jitter ramp");
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

Eigen::VectorXd softmax(const Eigen::VectorXd& log_weights) {
  const double lse = log_sum_exp(log_weights);
  if (!std::isfinite(lse)) {
    throw numerical_error("softmax: no finite log-weight");
  }
  Eigen::VectorXd p(log_weights.size());
  for (Eigen::Index c = 0; c < p.size(); ++c) p(c) = std::exp(log_weights(c) - lse);
  return p / p.sum();
}

int sample_categorical(const Eigen::VectorXd& probs, Rng& rng) {
  const double u = rng.uniform() * probs.sum();
  double acc = 0.0;
  int last_positive = 0;
  for (Eigen::Index c = 0; c < probs.size(); ++c) {
    if (probs(c) <= 0.0) continue;
    acc += probs(c);
    last_positive = static_cast<int>(c);
    if (u < acc) return last_positive;
  }
  return last_positive;
}

}  // namespace farva
