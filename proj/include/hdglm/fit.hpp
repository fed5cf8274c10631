// Surrogate-loss estimation: sum_i G(x_i^T b) - y_i x_i^T b minimized by
// damped Newton with an Armijo backtracking line search. The objective is
// convex whenever g is monotone increasing.
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "hdglm/covariance.hpp"
#include "hdglm/dataset.hpp"
#include "hdglm/errors.hpp"
#include "hdglm/link.hpp"

namespace hdglm {

struct FitOptions {
  double grad_tol_per_n = 1e-8;
  int max_iter = 500;
  double divergence_norm = 1e6;  // non-existence trigger on ||b||
  int stall_limit = 10;
};

struct FitResult {
  Eigen::VectorXd beta_hat;
  bool converged = false;
  int iterations = 0;
  double final_gradient_norm = 0.0;
  bool diverged = false;
};

inline double surrogate_loss(const Eigen::VectorXd& b, const Dataset& data,
                             const LinkSpec& link) {
  require_monotone(link, "surrogate_loss");
  if (b.size() != data.p())
    throw DimensionMismatch("surrogate_loss: coefficient size != p");
  Eigen::VectorXd lin = data.X * b;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    loss += link.G(lin[i]) - data.y[i] * lin[i];
  return loss;
}

namespace detail {

inline double penalized_loss_at(const Eigen::VectorXd& lin, const Eigen::VectorXd& y,
                                const LinkSpec& link, double lambda, double bnorm2) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < lin.size(); ++i) loss += link.G(lin[i]) - y[i] * lin[i];
  return loss + lambda * bnorm2;
}

inline FitResult newton_fit(const Dataset& data, const LinkSpec& link, double lambda,
                            const FitOptions& opts) {
  require_monotone(link, "fit");
  const Eigen::Index n = data.n(), p = data.p();
  if (lambda == 0.0 && n <= p)
    throw DimensionMismatch("fit_surrogate requires n > p; use fit_ridge");

  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd lin = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd gvec(n), w(n), resid(n), grad(p), delta(n);
  Eigen::MatrixXd hess(p, p), xs(n, p);

  FitResult out;
  double loss = detail::penalized_loss_at(lin, data.y, link, lambda, 0.0);
  double prev_norm = 0.0;
  int stall_streak = 0;

  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      gvec[i] = link.g(lin[i]);
      w[i] = link.dg(lin[i]);
    }
    resid = gvec - data.y;
    grad.noalias() = data.X.transpose() * resid;
    if (lambda > 0.0) grad += 2.0 * lambda * b;
    double gnorm = grad.norm();
    double bnorm = b.norm();

    out.iterations = iter;
    out.final_gradient_norm = gnorm;
    out.beta_hat = b;

    if (bnorm > opts.divergence_norm) {
      out.diverged = true;
      return out;
    }
    if (gnorm / double(n) <= opts.grad_tol_per_n) {
      // Gradients of bounded links also vanish along separating directions
      // at infinity; a collapsed curvature profile distinguishes that from
      // a genuine interior minimum (any interior optimum keeps some
      // observations at non-negligible weight, separable endpoints drive
      // every weight to ~1e-7 by the time the gradient test fires).
      if (lambda == 0.0 && w.maxCoeff() < 1e-5) {
        out.diverged = true;
        return out;
      }
      out.converged = true;
      return out;
    }

    xs = w.cwiseSqrt().asDiagonal() * data.X;
    hess.setZero();
    hess.selfadjointView<Eigen::Lower>().rankUpdate(xs.transpose());
    if (lambda > 0.0) hess.diagonal().array() += 2.0 * lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(hess.selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success) {
      if (lambda == 0.0 && w.maxCoeff() < 1e-5) {
        out.diverged = true;
        return out;
      }
      throw SingularHessian("fit: Hessian factorization failed (rank-deficient design?)");
    }
    Eigen::VectorXd step = llt.solve(-grad);
    delta.noalias() = data.X * step;
    double slope = grad.dot(step);  // negative for a descent direction

    double t = 1.0;
    bool accepted = false;
    double new_loss = 0.0;
    for (int ls = 0; ls < 45; ++ls) {
      Eigen::VectorXd lin_try = lin + t * delta;
      Eigen::VectorXd b_try = b + t * step;
      new_loss = detail::penalized_loss_at(lin_try, data.y, link, lambda,
                                           b_try.squaredNorm());
      if (new_loss <= loss + 1e-4 * t * slope) {
        b = b_try;
        lin = lin_try;
        loss = new_loss;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      ++stall_streak;
      if (stall_streak >= opts.stall_limit) {
        out.diverged = b.norm() > prev_norm && b.norm() > 1.0;
        return out;
      }
    } else {
      stall_streak = 0;
    }
    prev_norm = bnorm;
  }
  return out;  // budget exhausted: converged stays false
}

}  // namespace detail

inline FitResult fit_surrogate(const Dataset& data, const LinkSpec& link,
                               const FitOptions& opts = {}) {
  return detail::newton_fit(data, link, 0.0, opts);
}

inline FitResult fit_ridge(const Dataset& data, const LinkSpec& link, double lambda,
                           const FitOptions& opts = {}) {
  if (!(lambda > 0.0)) throw OutOfRange("fit_ridge: lambda must be > 0");
  return detail::newton_fit(data, link, lambda, opts);
}

// Empirical counterparts of the state-evolution pair: with theta = L^T beta,
// mu_n = <theta_hat, theta> / ||theta||^2 and sigma_n^2 = ||theta_hat -
// mu_n theta||^2 / kappa. With kappa = p/n the 1/kappa factor carries the
// n/p scaling, so sigma_n^2 is directly comparable to the sqrt(n)-scaled
// state-evolution sigma^2.
inline std::pair<double, double> empirical_se(const Eigen::VectorXd& beta_hat,
                                              const Eigen::VectorXd& beta_true,
                                              const CovarianceModel& cov,
                                              Eigen::Index n) {
  if (beta_true.size() == 0) throw MissingTruth("empirical_se: beta_true required");
  if (beta_hat.size() != beta_true.size())
    throw DimensionMismatch("empirical_se: coefficient sizes differ");
  const double kappa = double(beta_hat.size()) / double(n);
  Eigen::VectorXd theta = cov.lt_product(beta_true);
  Eigen::VectorXd theta_hat = cov.lt_product(beta_hat);
  double mu_n = theta_hat.dot(theta) / theta.squaredNorm();
  double sigma_n2 = (theta_hat - mu_n * theta).squaredNorm() / kappa;
  return {mu_n, sigma_n2};
}

}  // namespace hdglm
