#include "farva/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace farva {

namespace {

std::vector<std::vector<int>> rows_by_cause(const ModelState& state) {
  std::vector<std::vector<int>> groups(state.C());
  for (int i = 0; i < static_cast<int>(state.labels.size()); ++i) {
    groups[state.labels[i]].push_back(i);
  }
  return groups;
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd chol = robust_cholesky(m);
  const auto lower = chol.triangularView<Eigen::Lower>();
  const Eigen::MatrixXd linv = lower.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  return linv.transpose() * linv;
}

// z_i - Lambda_i eta_i for every row, n x P.
Eigen::MatrixXd residuals(const ModelState& state, const Dataset& data) {
  Eigen::MatrixXd r(data.n(), data.P());
  for (int i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd x = data.x.row(i).transpose();
    const Eigen::MatrixXd lambda = compute_loadings(state, state.labels[i], x);
    r.row(i) = state.z.row(i) - (lambda * state.eta.row(i).transpose()).transpose();
  }
  return r;
}

// Gaussian prior N(mean, cov) plus the sample's scatter gives the conjugate
// posterior for a hierarchical mean / covariance pair.
void update_normal_iw(const std::vector<Eigen::VectorXd>& draws, const Eigen::VectorXd& prior_mean,
                      const Eigen::MatrixXd& prior_cov_inv, double df, const Eigen::MatrixXd& scale,
                      Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> mean, Eigen::MatrixXd& cov, Rng& rng) {
  const int count = static_cast<int>(draws.size());
  const Eigen::MatrixXd cov_inv = spd_inverse(cov);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(prior_mean.size());
  for (const auto& d : draws) sum += d;
  const Eigen::MatrixXd q = prior_cov_inv + count * cov_inv;
  const Eigen::VectorXd b = prior_cov_inv * prior_mean + cov_inv * sum;
  const Eigen::VectorXd mu = sample_mvn_canonical(b, q, rng);
  mean = mu.transpose();
  Eigen::MatrixXd s = scale;
  for (const auto& d : draws) s += (d - mu) * (d - mu).transpose();
  cov = sample_inverse_wishart(df + count, 0.5 * (s + s.transpose()), rng);
}

}  // namespace

void ChainConfig::validate() const {
  if (iterations < 1 || burn_in < 0 || thinning < 1) {
    throw std::invalid_argument("chain config: iterations and thinning must be positive");
  }
  if (burn_in >= iterations) throw std::invalid_argument("chain config: burn-in must be below iterations");
}

namespace gibbs {

void redraw_eta(ModelState& state, const Dataset& data, int row, Rng& rng) {
  const Eigen::VectorXd x = data.x.row(row).transpose();
  const int c = state.labels[row];
  const Eigen::MatrixXd lambda = compute_loadings(state, c, x);
  const Eigen::VectorXd inv_var = state.sigma2.cwiseInverse();
  const Eigen::MatrixXd scaled = inv_var.asDiagonal() * lambda;
  Eigen::MatrixXd q = lambda.transpose() * scaled;
  q.diagonal().array() += 1.0;
  const Eigen::VectorXd b = scaled.transpose() * state.z.row(row).transpose() + compute_psi(state, c, x);
  state.eta.row(row) = sample_mvn_canonical(b, q, rng).transpose();
}

void update_latent(ModelState& state, const Dataset& data, Rng& rng) {
  const int p = data.P();
  const Eigen::VectorXd sd = state.sigma2.cwiseSqrt();
  const Eigen::VectorXd inv_var = state.sigma2.cwiseInverse();
  for (int i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd x = data.x.row(i).transpose();
    const int c = state.labels[i];
    const Eigen::MatrixXd lambda = compute_loadings(state, c, x);
    const Eigen::VectorXd mean = lambda * state.eta.row(i).transpose();
    for (int j = 0; j < p; ++j) state.z(i, j) = data.constraint(i, j).sample(mean(j), sd(j), rng);

    const Eigen::MatrixXd scaled = inv_var.asDiagonal() * lambda;
    Eigen::MatrixXd q = lambda.transpose() * scaled;
    q.diagonal().array() += 1.0;
    const Eigen::VectorXd b = scaled.transpose() * state.z.row(i).transpose() + compute_psi(state, c, x);
    state.eta.row(i) = sample_mvn_canonical(b, q, rng).transpose();
  }
}

void update_theta(ModelState& state, const Dataset& data, Rng& rng) {
  const int p = state.P();
  const int l_count = state.L();
  const auto groups = rows_by_cause(state);
  for (int c = 0; c < state.C(); ++c) {
    const auto& rows = groups[c];
    const int m = static_cast<int>(rows.size());
    // w_i = xi_c(x_i) eta_i, so z_ij = theta_{c,j.} w_i + eps.
    Eigen::MatrixXd w(m, l_count);
    Eigen::MatrixXd zc(m, p);
    for (int r = 0; r < m; ++r) {
      const int i = rows[r];
      const Eigen::VectorXd x = data.x.row(i).transpose();
      w.row(r) = (compute_xi(state, c, x) * state.eta.row(i).transpose()).transpose();
      zc.row(r) = state.z.row(i);
    }
    const Eigen::MatrixXd gram = w.transpose() * w;
    const Eigen::MatrixXd cross = w.transpose() * zc;  // L x P
    for (int j = 0; j < p; ++j) {
      const double inv_var = 1.0 / state.sigma2(j);
      const Eigen::VectorXd prior_prec = state.phi.row(j).transpose().cwiseProduct(state.tau);
      Eigen::MatrixXd q = inv_var * gram;
      q.diagonal() += prior_prec;
      const Eigen::VectorXd b =
          prior_prec.cwiseProduct(state.delta.row(j).transpose()) + inv_var * cross.col(j);
      state.theta[c].row(j) = sample_mvn_canonical(b, q, rng).transpose();
    }
  }
}

void update_delta(ModelState& state, Rng& rng) {
  const double weight = state.C() + 1.0;
  for (int l = 0; l < state.L(); ++l) {
    for (int j = 0; j < state.P(); ++j) {
      double sum = 0.0;
      for (const auto& theta : state.theta) sum += theta(j, l);
      const double prec = weight * state.phi(j, l) * state.tau(l);
      state.delta(j, l) = sample_normal(sum / weight, 1.0 / std::sqrt(prec), rng);
    }
  }
}

void update_phi(ModelState& state, const Hyperparameters& hyper, Rng& rng) {
  const double shape = 0.5 * hyper.gamma + 0.5 * (state.C() + 1.0);
  for (int l = 0; l < state.L(); ++l) {
    for (int j = 0; j < state.P(); ++j) {
      const double d = state.delta(j, l);
      double ss = d * d;
      for (const auto& theta : state.theta) ss += (theta(j, l) - d) * (theta(j, l) - d);
      const double rate = 0.5 * hyper.gamma + 0.5 * state.tau(l) * ss;
      state.phi(j, l) = std::max(sample_gamma(shape, rate, rng), kPrecisionFloor);
    }
  }
}

void update_delta_mg(ModelState& state, const Hyperparameters& hyper, Rng& rng) {
  const int l_count = state.L();
  const int p = state.P();
  const double terms_per_column = p * (state.C() + 1.0);
  // Precision-weighted squared deviations per column.
  Eigen::VectorXd weighted(l_count);
  for (int l = 0; l < l_count; ++l) {
    double acc = 0.0;
    for (int j = 0; j < p; ++j) {
      const double d = state.delta(j, l);
      double ss = d * d;
      for (const auto& theta : state.theta) ss += (theta(j, l) - d) * (theta(j, l) - d);
      acc += state.phi(j, l) * ss;
    }
    weighted(l) = acc;
  }
  for (int h = 0; h < l_count; ++h) {
    double rate = 1.0;
    double tau_without = 1.0;
    for (int l = 0; l < l_count; ++l) {
      if (l != h) tau_without *= state.delta_mg(l);
      if (l >= h) rate += 0.5 * tau_without * weighted(l);
    }
    const double shape = (h == 0 ? hyper.d1 : hyper.d2) + 0.5 * terms_per_column * (l_count - h);
    state.delta_mg(h) = std::max(sample_gamma(shape, rate, rng), kPrecisionFloor);
  }
  state.refresh_tau();
}

void update_beta(ModelState& state, const Dataset& data, Rng& rng) {
  const int l_count = state.L();
  const int k_count = state.K();
  const auto groups = rows_by_cause(state);
  Eigen::MatrixXd resid = residuals(state, data);
  const Eigen::VectorXd inv_var = state.sigma2.cwiseInverse();

  std::vector<Eigen::MatrixXd> prior_prec(l_count * k_count);
  std::vector<Eigen::VectorXd> prior_lin(l_count * k_count);
  for (int r = 0; r < l_count * k_count; ++r) {
    prior_prec[r] = spd_inverse(state.sigma_beta[r]);
    prior_lin[r] = prior_prec[r] * state.mu_beta.row(r).transpose();
  }

  for (int c = 0; c < state.C(); ++c) {
    const auto& rows = groups[c];
    const int m = static_cast<int>(rows.size());
    for (int k = 0; k < k_count; ++k) {
      for (int l = 0; l < l_count; ++l) {
        const int r = ModelState::basis_row(l, k, l_count);
        const Eigen::VectorXd theta_l = state.theta[c].col(l);
        const Eigen::VectorXd weighted_theta = theta_l.cwiseProduct(inv_var);
        const double q_l = theta_l.dot(weighted_theta);
        const Eigen::VectorXd beta_old = state.beta[c].row(r).transpose();

        Eigen::MatrixXd q = prior_prec[r];
        Eigen::VectorXd b = prior_lin[r];
        for (int t = 0; t < m; ++t) {
          const int i = rows[t];
          const auto x = data.x.row(i).transpose();
          const double e = state.eta(i, k);
          // theta_l' Sigma^{-1} (residual with this term added back).
          const double g = weighted_theta.dot(resid.row(i).transpose()) + q_l * e * x.dot(beta_old);
          q.noalias() += (q_l * e * e) * (x * x.transpose());
          b.noalias() += (e * g) * x;
        }
        const Eigen::VectorXd beta_new = sample_mvn_canonical(b, q, rng);
        state.beta[c].row(r) = beta_new.transpose();
        const Eigen::VectorXd change = beta_new - beta_old;
        for (int t = 0; t < m; ++t) {
          const int i = rows[t];
          const double shift = state.eta(i, k) * data.x.row(i).dot(change);
          resid.row(i).noalias() -= shift * theta_l.transpose();
        }
      }
    }
  }
}

void update_beta_hyper(ModelState& state, const Hyperparameters& hyper, Rng& rng) {
  const Eigen::MatrixXd lambda0_inv = spd_inverse(hyper.Lambda0);
  std::vector<Eigen::VectorXd> draws(state.C());
  for (int r = 0; r < state.L() * state.K(); ++r) {
    for (int c = 0; c < state.C(); ++c) draws[c] = state.beta[c].row(r).transpose();
    update_normal_iw(draws, hyper.mu0, lambda0_inv, hyper.nu0, hyper.S0, state.mu_beta.row(r),
                     state.sigma_beta[r], rng);
  }
}

void update_alpha(ModelState& state, const Dataset& data, Rng& rng) {
  const auto groups = rows_by_cause(state);
  for (int k = 0; k < state.K(); ++k) {
    const Eigen::MatrixXd prior_prec = spd_inverse(state.sigma_alpha[k]);
    const Eigen::VectorXd prior_lin = prior_prec * state.mu_alpha.row(k).transpose();
    for (int c = 0; c < state.C(); ++c) {
      Eigen::MatrixXd q = prior_prec;
      Eigen::VectorXd b = prior_lin;
      for (int i : groups[c]) {
        const auto x = data.x.row(i).transpose();
        q.noalias() += x * x.transpose();
        b.noalias() += state.eta(i, k) * x;
      }
      state.alpha[c].row(k) = sample_mvn_canonical(b, q, rng).transpose();
    }
  }
}

void update_alpha_hyper(ModelState& state, const Hyperparameters& hyper, Rng& rng) {
  const Eigen::MatrixXd l0_inv = spd_inverse(hyper.L0);
  std::vector<Eigen::VectorXd> draws(state.C());
  for (int k = 0; k < state.K(); ++k) {
    for (int c = 0; c < state.C(); ++c) draws[c] = state.alpha[c].row(k).transpose();
    update_normal_iw(draws, hyper.A0, l0_inv, hyper.v0, hyper.D0, state.mu_alpha.row(k),
                     state.sigma_alpha[k], rng);
  }
}

void update_sigma2(ModelState& state, const Dataset& data, const Hyperparameters& hyper, Rng& rng) {
  bool any_free = false;
  for (const auto& col : data.columns) any_free = any_free || !col.fixed_variance();
  if (!any_free) return;
  const Eigen::MatrixXd resid = residuals(state, data);
  for (int j = 0; j < data.P(); ++j) {
    if (data.columns[j].fixed_variance()) {
      state.sigma2(j) = 1.0;
      continue;
    }
    const double shape = hyper.sigma_shape + 0.5 * data.n();
    const double scale = hyper.sigma_rate + 0.5 * resid.col(j).squaredNorm();
    state.sigma2(j) = std::max(sample_inverse_gamma(shape, scale, rng), kPrecisionFloor);
  }
}

void update_pi(ModelState& state, const Hyperparameters& hyper, Rng& rng) {
  Eigen::VectorXd conc = hyper.a;
  for (int label : state.labels) conc(label) += 1.0;
  state.pi = sample_dirichlet(conc, rng);
}

}  // namespace gibbs

Eigen::VectorXd label_probabilities(const Eigen::VectorXd& z, const std::vector<Moments>& moments,
                                    const Eigen::VectorXd& pi) {
  const int c_count = static_cast<int>(moments.size());
  if (pi.size() != c_count) throw std::invalid_argument("label_probabilities: pi length mismatch");
  Eigen::VectorXd log_w(c_count);
  for (int c = 0; c < c_count; ++c) {
    log_w(c) = pi(c) > 0.0 ? std::log(pi(c)) + mvn_logpdf(z, moments[c].mean, moments[c].cov)
                           : -std::numeric_limits<double>::infinity();
  }
  return softmax(log_w);
}

void update_unknown_cod(ModelState& state, const Dataset& data, const Hyperparameters& hyper,
                        Rng& rng) {
  (void)hyper;
  std::vector<Moments> moments(state.C());
  for (int i : data.unknown_rows()) {
    const Eigen::VectorXd x = data.x.row(i).transpose();
    for (int c = 0; c < state.C(); ++c) moments[c] = marginal_moments(state, c, x);
    const Eigen::VectorXd probs = label_probabilities(state.z.row(i).transpose(), moments, state.pi);
    state.labels[i] = sample_categorical(probs, rng);
    gibbs::redraw_eta(state, data, i, rng);
  }
}

void gibbs_sweep(ModelState& state, const Dataset& data, const Hyperparameters& hyper, Rng& rng) {
  gibbs::update_latent(state, data, rng);
  gibbs::update_theta(state, data, rng);
  gibbs::update_delta(state, rng);
  gibbs::update_phi(state, hyper, rng);
  gibbs::update_delta_mg(state, hyper, rng);
  gibbs::update_beta(state, data, rng);
  gibbs::update_beta_hyper(state, hyper, rng);
  gibbs::update_alpha(state, data, rng);
  gibbs::update_alpha_hyper(state, hyper, rng);
  gibbs::update_sigma2(state, data, hyper, rng);
  update_unknown_cod(state, data, hyper, rng);
  gibbs::update_pi(state, hyper, rng);
}

PosteriorSamples run_chain(const Dataset& data, const Hyperparameters& hyper,
                           const ChainConfig& config) {
  config.validate();
  Rng rng(config.seed);
  PosteriorSamples out;
  out.meta = {config.iterations, config.burn_in, config.thinning, config.seed};
  out.hyper = hyper;
  out.snapshots.reserve(config.retained());
  ModelState state = init_state(hyper, data, rng);
  for (int it = 0; it < config.iterations; ++it) {
    try {
      gibbs_sweep(state, data, hyper, rng);
    } catch (const numerical_error& e) {
      throw numerical_error("sweep " + std::to_string(it + 1) + ": " + e.what());
    }
    const int post = it + 1 - config.burn_in;
    if (post > 0 && post % config.thinning == 0) {
      out.snapshots.push_back(state);
      if (!config.keep_latent) {
        out.snapshots.back().z.resize(0, 0);
        out.snapshots.back().eta.resize(0, 0);
      }
    }
    if (config.progress && ((it + 1) % config.progress_every == 0 || it + 1 == config.iterations)) {
      *config.progress << "iteration " << (it + 1) << "/" << config.iterations
                       << "  mean sigma2 " << state.sigma2.mean() << "  pi [" << state.pi.transpose()
                       << "]  |Delta| " << state.delta.norm() << "\n";
    }
  }
  return out;
}

Eigen::VectorXd shrinkage_diagnostic(const PosteriorSamples& samples) {
  if (samples.snapshots.empty()) throw std::invalid_argument("shrinkage_diagnostic: no samples");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(samples.snapshots.front().L());
  for (const auto& s : samples.snapshots) acc += s.delta.colwise().norm().transpose();
  return acc / static_cast<double>(samples.snapshots.size());
}

Eigen::VectorXd factor_diagnostic(const PosteriorSamples& samples, const Eigen::VectorXd& x) {
  if (samples.snapshots.empty()) throw std::invalid_argument("factor_diagnostic: no samples");
  const auto& first = samples.snapshots.front();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(first.K());
  for (const auto& s : samples.snapshots) {
    for (int c = 0; c < s.C(); ++c) acc += compute_loadings(s, c, x).colwise().norm().transpose();
  }
  return acc / static_cast<double>(samples.snapshots.size() * first.C());
}

}  // namespace farva
