// Stationary generalized approximate message passing. With Xs = X/sqrt(n)
// and eta* the solved proximal scale, the recursion
//
//   beta^{k+1} = (eta*/kappa) Xs^T { y - g(prox_{eta* G}(xi^k + eta* y)) } + beta^k
//   xi^{k+1}   = Xs beta^{k+1} - eta* { y - g(prox_{eta* G}(xi^k + eta* y)) }
//
// has the surrogate estimator (times sqrt(n)) as its fixed point: there the
// prox collapses to Xs beta and the first line becomes the normal equations.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "hdglm/dataset.hpp"
#include "hdglm/errors.hpp"
#include "hdglm/prox.hpp"
#include "hdglm/se.hpp"

namespace hdglm {

struct GampState {
  Eigen::VectorXd beta_k;  // sqrt(n)-scaled iterate
  Eigen::VectorXd xi_k;
  double eta_bar = 0.0;
  double mu_bar = 0.0;
  double sigma2_bar = 0.0;
  int k = 0;

  // the estimator on the data scale
  Eigen::VectorXd beta_hat(Eigen::Index n) const {
    return beta_k / std::sqrt(double(n));
  }
};

struct GampOptions {
  int max_iter = 5000;
  double tol = 1e-8;
  // diagnostic: a time-varying eta schedule; entry k is eta_bar_k, the last
  // entry repeats. Empty selects the stationary recursion.
  std::vector<double> eta_schedule;
  // warm start on the sqrt(n) scale; xi0 defaults to Xs beta0
  std::optional<Eigen::VectorXd> beta0;
  std::optional<Eigen::VectorXd> xi0;
};

inline GampState gamp_fit(const Dataset& data, const LinkSpec& link, const SeParams& se,
                          const GampOptions& opts = {}) {
  require_monotone(link, "gamp_fit");
  if (!(se.eta > 0.0)) throw OutOfRange("gamp_fit: se.eta must be positive");
  const Eigen::Index n = data.n(), p = data.p();
  const double kappa = double(p) / double(n);
  if (!(kappa > 0.0 && kappa < 1.0))
    throw OutOfRange("gamp_fit: requires kappa = p/n in (0,1)");

  const double root_n = std::sqrt(double(n));
  Eigen::MatrixXd xs = data.X / root_n;

  GampState st;
  st.beta_k = opts.beta0.value_or(Eigen::VectorXd::Zero(p));
  if (st.beta_k.size() != p) throw DimensionMismatch("gamp_fit: beta0 size");
  if (opts.xi0) {
    st.xi_k = *opts.xi0;
    if (st.xi_k.size() != n) throw DimensionMismatch("gamp_fit: xi0 size");
  } else {
    st.xi_k.noalias() = xs * st.beta_k;
  }
  st.mu_bar = se.mu;
  st.sigma2_bar = se.sigma2;
  st.eta_bar = opts.eta_schedule.empty() ? se.eta : opts.eta_schedule.front();

  Eigen::VectorXd arg(n), pr(n), resid(n), beta_next(p);
  for (int k = 0; k < opts.max_iter; ++k) {
    double eta_k = st.eta_bar;
    double eta_next = opts.eta_schedule.empty()
                          ? se.eta
                          : opts.eta_schedule[std::min<std::size_t>(
                                k + 1, opts.eta_schedule.size() - 1)];
    arg = st.xi_k + eta_k * data.y;
    prox_batch(link, eta_k, arg.data(), pr.data(), static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) resid[i] = data.y[i] - link.g(pr[i]);
    beta_next.noalias() = (eta_next / kappa) * (xs.transpose() * resid);
    beta_next += (eta_next / eta_k) * st.beta_k;
    double rel = (beta_next - st.beta_k).norm() / std::max(1.0, st.beta_k.norm());
    st.xi_k.noalias() = xs * beta_next;
    st.xi_k -= eta_next * resid;
    st.beta_k.swap(beta_next);
    st.eta_bar = eta_next;
    st.k = k + 1;
    if (!st.beta_k.allFinite())
      throw NoConvergence("gamp_fit: iterate left the finite range");
    if (rel < opts.tol) return st;
  }
  throw NoConvergence("gamp_fit: no fixed point within max_iter");
}

}  // namespace hdglm
