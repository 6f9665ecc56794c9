#include "farva/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace farva {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(Phi(b) - Phi(a)) for a < b.
double log_normal_mass(double a, double b) {
  if (b <= 0.0 || std::isinf(a)) {
    const double lb = log_normal_cdf(b);
    if (std::isinf(a)) return lb;
    const double la = log_normal_cdf(a);
    return lb + std::log1p(-std::exp(la - lb));
  }
  if (a >= 0.0 || std::isinf(b)) {
    // Upper tail: Phi(-a) - Phi(-b).
    const double la = log_normal_cdf(-a);
    if (std::isinf(b)) return la;
    const double lb = log_normal_cdf(-b);
    return la + std::log1p(-std::exp(lb - la));
  }
  return std::log(normal_cdf(b) - normal_cdf(a));
}

}  // namespace

double log_cell_probability(const Column& column, double value, double mean, double sd) {
  if (is_missing(value)) return 0.0;
  switch (column.kind) {
    case ColumnKind::binary:
      return value > 0.5 ? log_normal_cdf(mean / sd) : log_normal_cdf(-mean / sd);
    case ColumnKind::count: {
      if (value == 0.0) return log_normal_cdf(-mean / sd);
      return log_normal_mass((value - 1.0 - mean) / sd, (value - mean) / sd);
    }
    case ColumnKind::continuous:
      return log_normal_pdf((value - mean) / sd) - std::log(sd);
  }
  return 0.0;
}

double log_likelihood_s_given_c(const ModelState& snapshot, const std::vector<Column>& columns,
                                const Eigen::VectorXd& s, const Eigen::VectorXd& x, int cause,
                                int n_mc, Rng& rng) {
  if (n_mc < 1) throw std::invalid_argument("log_likelihood_s_given_c: n_mc must be positive");
  const int p = static_cast<int>(columns.size());
  if (s.size() != p || snapshot.P() != p) {
    throw std::invalid_argument("log_likelihood_s_given_c: symptom vector has the wrong length");
  }
  const Eigen::MatrixXd lambda = compute_loadings(snapshot, cause, x);
  const Eigen::VectorXd psi = compute_psi(snapshot, cause, x);
  const Eigen::VectorXd sd = snapshot.sigma2.cwiseSqrt();
  const Eigen::VectorXd base = lambda * psi;
  const int k_count = static_cast<int>(psi.size());

  std::vector<int> observed;
  for (int j = 0; j < p; ++j) {
    if (!is_missing(s(j))) observed.push_back(j);
  }
  if (observed.empty()) return 0.0;

  Eigen::MatrixXd noise(k_count, n_mc);
  for (int m = 0; m < n_mc; ++m) {
    for (int k = 0; k < k_count; ++k) noise(k, m) = rng.normal();
  }
  Eigen::MatrixXd means = lambda * noise;
  means.colwise() += base;
  Eigen::VectorXd log_p = Eigen::VectorXd::Zero(n_mc);
  for (int j : observed) {
    const Column& column = columns[j];
    const double v = s(j);
    const double sj = sd(j);
    for (int m = 0; m < n_mc; ++m) log_p(m) += log_cell_probability(column, v, means(j, m), sj);
  }
  const double top = log_p.maxCoeff();
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : log_p) acc += std::exp(v - top);
  return top + std::log(acc / static_cast<double>(n_mc));
}

double likelihood_s_given_c(const ModelState& snapshot, const std::vector<Column>& columns,
                            const Eigen::VectorXd& s, const Eigen::VectorXd& x, int cause,
                            int n_mc, Rng& rng) {
  return std::exp(log_likelihood_s_given_c(snapshot, columns, s, x, cause, n_mc, rng));
}

namespace {

Eigen::VectorXd snapshot_posterior(const ModelState& snapshot, const std::vector<Column>& columns,
                                   const Eigen::VectorXd& s, const Eigen::VectorXd& x, int n_mc,
                                   Rng& rng) {
  const int c_count = snapshot.C();
  Eigen::VectorXd log_w(c_count);
  for (int c = 0; c < c_count; ++c) {
    log_w(c) = snapshot.pi(c) > 0.0
                   ? std::log(snapshot.pi(c)) +
                         log_likelihood_s_given_c(snapshot, columns, s, x, c, n_mc, rng)
                   : kNegInf;
  }
  return softmax(log_w);
}

}  // namespace

Eigen::VectorXd cod_posterior(const PosteriorSamples& samples, const std::vector<Column>& columns,
                              const Eigen::VectorXd& s, const Eigen::VectorXd& x, int n_mc, Rng& rng) {
  if (samples.snapshots.empty()) throw std::invalid_argument("cod_posterior: no samples");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(samples.snapshots.front().C());
  for (const auto& snap : samples.snapshots) acc += snapshot_posterior(snap, columns, s, x, n_mc, rng);
  acc /= static_cast<double>(samples.snapshots.size());
  return acc / acc.sum();
}

int top_cause(const Eigen::VectorXd& probs) {
  int best = 0;
  for (int c = 1; c < probs.size(); ++c) {
    if (probs(c) > probs(best)) best = c;
  }
  return best;
}

Prediction predict_dataset(const PosteriorSamples& samples, const Dataset& data, int n_mc, Rng& rng) {
  if (samples.snapshots.empty()) throw std::invalid_argument("predict_dataset: no samples");
  const int n_snap = static_cast<int>(samples.snapshots.size());
  const int c_count = samples.snapshots.front().C();
  if (c_count != data.n_causes) throw std::invalid_argument("predict_dataset: cause count mismatch");
  if (samples.snapshots.front().B() != data.B()) {
    throw std::invalid_argument("predict_dataset: covariate dimension mismatch");
  }
  Prediction out;
  out.posterior.probs.setZero(data.n(), c_count);
  out.posterior.top.resize(data.n());
  out.sampled_labels.assign(n_snap, std::vector<int>(data.n()));
  for (int i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd s = data.s.row(i).transpose();
    const Eigen::VectorXd x = data.x.row(i).transpose();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(c_count);
    for (int t = 0; t < n_snap; ++t) {
      const Eigen::VectorXd probs =
          snapshot_posterior(samples.snapshots[t], data.columns, s, x, n_mc, rng);
      acc += probs;
      out.sampled_labels[t][i] = sample_categorical(probs, rng);
    }
    acc /= acc.sum();
    out.posterior.probs.row(i) = acc.transpose();
    out.posterior.top[i] = top_cause(acc);
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

CsmfEstimate estimate_csmf(const std::vector<std::vector<int>>& labels_per_snapshot, int n_causes) {
  if (labels_per_snapshot.empty()) throw std::invalid_argument("estimate_csmf: no snapshots");
  if (n_causes < 1) throw std::invalid_argument("estimate_csmf: cause count must be positive");
  const int n_snap = static_cast<int>(labels_per_snapshot.size());
  std::vector<std::vector<double>> fractions(n_causes, std::vector<double>(n_snap));
  for (int t = 0; t < n_snap; ++t) {
    const auto& labels = labels_per_snapshot[t];
    if (labels.empty()) throw std::invalid_argument("estimate_csmf: empty unknown set");
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_causes);
    for (int label : labels) {
      if (label < 0 || label >= n_causes) throw std::invalid_argument("estimate_csmf: label out of range");
      counts(label) += 1.0;
    }
    counts /= static_cast<double>(labels.size());
    for (int c = 0; c < n_causes; ++c) fractions[c][t] = counts(c);
  }
  CsmfEstimate out;
  out.mean.resize(n_causes);
  out.lower.resize(n_causes);
  out.upper.resize(n_causes);
  for (int c = 0; c < n_causes; ++c) {
    double sum = 0.0;
    for (double f : fractions[c]) sum += f;
    out.mean(c) = sum / n_snap;
  }
  out.mean /= out.mean.sum();
  for (int c = 0; c < n_causes; ++c) {
    out.lower(c) = std::min(quantile(fractions[c], 0.025), out.mean(c));
    out.upper(c) = std::max(quantile(fractions[c], 0.975), out.mean(c));
  }
  return out;
}

LatentSummary posterior_latent_summaries(const PosteriorSamples& samples, int cause,
                                         const Eigen::VectorXd& x) {
  if (samples.snapshots.empty()) throw std::invalid_argument("posterior_latent_summaries: no samples");
  const int n_snap = static_cast<int>(samples.snapshots.size());
  const int p = samples.snapshots.front().P();
  if (cause < 0 || cause >= samples.snapshots.front().C()) {
    throw std::invalid_argument("posterior_latent_summaries: cause index out of range");
  }
  std::vector<Moments> moments;
  moments.reserve(n_snap);
  for (const auto& snap : samples.snapshots) moments.push_back(marginal_moments(snap, cause, x));

  LatentSummary out;
  out.mean.resize(p);
  out.mean_lower.resize(p);
  out.mean_upper.resize(p);
  out.cov.resize(p, p);
  out.cov_lower.resize(p, p);
  out.cov_upper.resize(p, p);
  std::vector<double> buf(n_snap);
  for (int j = 0; j < p; ++j) {
    for (int t = 0; t < n_snap; ++t) buf[t] = moments[t].mean(j);
    out.mean(j) = Eigen::Map<Eigen::VectorXd>(buf.data(), n_snap).mean();
    out.mean_lower(j) = quantile(buf, 0.025);
    out.mean_upper(j) = quantile(buf, 0.975);
    for (int k = 0; k <= j; ++k) {
      for (int t = 0; t < n_snap; ++t) buf[t] = moments[t].cov(j, k);
      const double m = Eigen::Map<Eigen::VectorXd>(buf.data(), n_snap).mean();
      const double lo = quantile(buf, 0.025);
      const double hi = quantile(buf, 0.975);
      out.cov(j, k) = out.cov(k, j) = m;
      out.cov_lower(j, k) = out.cov_lower(k, j) = lo;
      out.cov_upper(j, k) = out.cov_upper(k, j) = hi;
    }
  }
  return out;
}

}  // namespace farva
