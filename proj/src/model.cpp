#include "farva/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace farva {

namespace {

void check_cause(const ModelState& state, int cause, const Eigen::VectorXd& x) {
  if (cause < 0 || cause >= state.C()) throw std::invalid_argument("cause index out of range");
  if (x.size() != state.B()) throw std::invalid_argument("covariate vector has the wrong length");
}

bool is_spd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if (!m.isApprox(m.transpose(), 1e-10)) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

}  // namespace

Hyperparameters Hyperparameters::defaults(int n_causes, int n_columns, int n_covariates) {
  if (n_causes < 1 || n_columns < 1 || n_covariates < 1) {
    throw std::invalid_argument("defaults: C, P and B must be positive");
  }
  Hyperparameters h;
  const int b = n_covariates;
  h.a = Eigen::VectorXd::Constant(n_causes, 1.0 / n_causes);
  h.K = std::min(15, n_columns);
  h.L = std::min(10, n_columns);
  h.mu0 = Eigen::VectorXd::Zero(b);
  h.Lambda0 = Eigen::MatrixXd::Identity(b, b);
  h.nu0 = b + 2.0;
  h.S0 = Eigen::MatrixXd::Identity(b, b);
  h.A0 = Eigen::VectorXd::Zero(b);
  h.L0 = Eigen::MatrixXd::Identity(b, b);
  h.v0 = b + 2.0;
  h.D0 = Eigen::MatrixXd::Identity(b, b);
  return h;
}

void Hyperparameters::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(what); };
  if (a.size() < 1 || !(a.array() > 0.0).all()) fail("hyperparameters: a must be positive");
  if (K < 1 || L < 1) fail("hyperparameters: K and L must be at least 1");
  if (!(gamma > 0.0) || !(d1 > 0.0)) fail("hyperparameters: gamma and d1 must be positive");
  if (!(d2 > 1.0)) fail("hyperparameters: d2 must exceed 1");
  const int b = B();
  if (b < 1) fail("hyperparameters: mu0 is empty");
  if (A0.size() != b || Lambda0.rows() != b || S0.rows() != b || L0.rows() != b || D0.rows() != b) {
    fail("hyperparameters: prior dimensions disagree with B");
  }
  if (!is_spd(Lambda0) || !is_spd(S0) || !is_spd(L0) || !is_spd(D0)) {
    fail("hyperparameters: prior scale matrices must be SPD");
  }
  if (!(nu0 > b - 1.0) || !(v0 > b - 1.0)) fail("hyperparameters: IW degrees of freedom too small");
  if (!(sigma_shape > 0.0) || !(sigma_rate > 0.0)) fail("hyperparameters: noise prior must be positive");
}

void ModelState::refresh_tau() {
  tau.resize(delta_mg.size());
  double prod = 1.0;
  for (Eigen::Index l = 0; l < delta_mg.size(); ++l) {
    prod *= delta_mg(l);
    tau(l) = prod;
  }
}

Eigen::MatrixXd compute_xi(const ModelState& state, int cause, const Eigen::VectorXd& x) {
  check_cause(state, cause, x);
  const Eigen::VectorXd flat = state.beta[cause] * x;
  return Eigen::Map<const Eigen::MatrixXd>(flat.data(), state.L(), state.K());
}

Eigen::VectorXd compute_psi(const ModelState& state, int cause, const Eigen::VectorXd& x) {
  check_cause(state, cause, x);
  return state.alpha[cause] * x;
}

Eigen::MatrixXd compute_loadings(const ModelState& state, int cause, const Eigen::VectorXd& x) {
  return state.theta[cause] * compute_xi(state, cause, x);
}

Moments marginal_moments(const ModelState& state, int cause, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd lambda = compute_loadings(state, cause, x);
  Moments m;
  m.mean = lambda * compute_psi(state, cause, x);
  m.cov = lambda * lambda.transpose();
  m.cov.diagonal() += state.sigma2;
  return m;
}

ModelState init_state(const Hyperparameters& hyper, const Dataset& data, Rng& rng) {
  hyper.validate();
  const int c_count = data.n_causes;
  const int p = data.P();
  const int b = data.B();
  const int n = data.n();
  const int k_count = hyper.K;
  const int l_count = hyper.L;
  if (hyper.C() != c_count) throw std::invalid_argument("init_state: a has the wrong length");
  if (hyper.B() != b) throw std::invalid_argument("init_state: prior dimension differs from B");

  ModelState s;
  s.delta_mg.resize(l_count);
  for (int l = 0; l < l_count; ++l) {
    s.delta_mg(l) = sample_gamma(l == 0 ? hyper.d1 : hyper.d2, 1.0, rng);
  }
  s.refresh_tau();
  s.phi.resize(p, l_count);
  s.delta.resize(p, l_count);
  for (int l = 0; l < l_count; ++l) {
    for (int j = 0; j < p; ++j) {
      s.phi(j, l) = sample_gamma(0.5 * hyper.gamma, 0.5 * hyper.gamma, rng);
      s.delta(j, l) = sample_normal(0.0, 1.0 / std::sqrt(s.phi(j, l) * s.tau(l)), rng);
    }
  }
  s.theta.assign(c_count, Eigen::MatrixXd(p, l_count));
  for (int c = 0; c < c_count; ++c) {
    for (int l = 0; l < l_count; ++l) {
      for (int j = 0; j < p; ++j) {
        s.theta[c](j, l) =
            sample_normal(s.delta(j, l), 1.0 / std::sqrt(s.phi(j, l) * s.tau(l)), rng);
      }
    }
  }

  const int lk = l_count * k_count;
  s.mu_beta.resize(lk, b);
  s.sigma_beta.resize(lk);
  for (int r = 0; r < lk; ++r) {
    s.mu_beta.row(r) = sample_mvn(hyper.mu0, hyper.Lambda0, rng).transpose();
    s.sigma_beta[r] = sample_inverse_wishart(hyper.nu0, hyper.S0, rng);
  }
  s.beta.assign(c_count, Eigen::MatrixXd(lk, b));
  for (int c = 0; c < c_count; ++c) {
    for (int r = 0; r < lk; ++r) {
      s.beta[c].row(r) = sample_mvn(s.mu_beta.row(r).transpose(), s.sigma_beta[r], rng).transpose();
    }
  }

  s.mu_alpha.resize(k_count, b);
  s.sigma_alpha.resize(k_count);
  for (int k = 0; k < k_count; ++k) {
    s.mu_alpha.row(k) = sample_mvn(hyper.A0, hyper.L0, rng).transpose();
    s.sigma_alpha[k] = sample_inverse_wishart(hyper.v0, hyper.D0, rng);
  }
  s.alpha.assign(c_count, Eigen::MatrixXd(k_count, b));
  for (int c = 0; c < c_count; ++c) {
    for (int k = 0; k < k_count; ++k) {
      s.alpha[c].row(k) =
          sample_mvn(s.mu_alpha.row(k).transpose(), s.sigma_alpha[k], rng).transpose();
    }
  }

  s.sigma2.resize(p);
  for (int j = 0; j < p; ++j) {
    s.sigma2(j) = data.columns[j].fixed_variance()
                      ? 1.0
                      : sample_inverse_gamma(hyper.sigma_shape, hyper.sigma_rate, rng);
  }

  s.pi = sample_dirichlet(hyper.a, rng);
  s.labels = data.y;
  for (int& label : s.labels) {
    if (label < 0) label = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(c_count));
  }

  s.eta.resize(n, k_count);
  s.z.resize(n, p);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd xi = data.x.row(i).transpose();
    const int c = s.labels[i];
    const Eigen::VectorXd psi = compute_psi(s, c, xi);
    for (int k = 0; k < k_count; ++k) s.eta(i, k) = psi(k) + rng.normal();
    const Eigen::VectorXd mean = compute_loadings(s, c, xi) * s.eta.row(i).transpose();
    for (int j = 0; j < p; ++j) {
      s.z(i, j) = data.constraint(i, j).sample(mean(j), std::sqrt(s.sigma2(j)), rng);
    }
  }
  return s;
}

std::string check_invariants(const ModelState& state, const Dataset& data) {
  std::ostringstream err;
  double prod = 1.0;
  for (int l = 0; l < state.L(); ++l) {
    prod *= state.delta_mg(l);
    if (state.tau(l) != prod) {
      err << "tau(" << l << ") is not the cumulative product of delta";
      return err.str();
    }
  }
  for (int j = 0; j < state.P(); ++j) {
    if (data.columns[j].fixed_variance() && state.sigma2(j) != 1.0) {
      err << "sigma2(" << j << ") must equal 1 for a binary column";
      return err.str();
    }
    if (!(state.sigma2(j) > 0.0)) {
      err << "sigma2(" << j << ") is not positive";
      return err.str();
    }
  }
  if ((state.pi.array() < 0.0).any() || std::abs(state.pi.sum() - 1.0) > 1e-9) {
    return "pi is not on the simplex";
  }
  for (int i = 0; i < data.n(); ++i) {
    if (data.y[i] >= 0 && state.labels[i] != data.y[i]) {
      err << "label of row " << i << " differs from its known cause";
      return err.str();
    }
    for (int j = 0; j < data.P(); ++j) {
      if (!data.constraint(i, j).contains(state.z(i, j))) {
        err << "z(" << i << "," << j << ") = " << state.z(i, j) << " violates its constraint";
        return err.str();
      }
    }
  }
  return {};
}

}  // namespace farva
