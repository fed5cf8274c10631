// State-evolution solver. The triple (mu, sigma2, eta) satisfies
//
//   kappa^2 sigma^2 = eta^2 E[(Ybar - g(D))^2]
//   2 gamma^2 lambda mu = E[Z (Ybar - g(D))]        (lambda = 0: plain system)
//   1 - kappa + 2 lambda eta = E[(1 + eta g'(D))^{-1}]
//
// with D = prox_{eta G}(mu Z + sqrt(kappa) sigma Q2 + eta Ybar), Z = gamma Q1,
// and Ybar = h(Z, U). Expectations are panel averages over common random
// numbers, so the solved fixed point zeroes the panel residuals exactly.
//
// Iteration (damped):
//   eta   <- kappa * eta / (1 - E1 + 2 lambda eta),   E1 = E[(1+eta g'(D))^{-1}]
//            which at stationarity rearranges to the third equation;
//   mu    <- mu + (E[Z(Ybar - g(D))] - 2 gamma^2 lambda mu) / J,
//            J = E[Z^2 g'(D) / (1 + eta g'(D))] + 2 gamma^2 lambda,
//            a Newton step on the second equation in mu (J is minus its
//            derivative, since dD/dmu = Z / (1 + eta g'(D)));
//   sigma2 <- (eta^2 / kappa^2) E[(Ybar - g(D))^2]  from the first equation.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "hdglm/errors.hpp"
#include "hdglm/prox.hpp"
#include "hdglm/response.hpp"
#include "hdglm/rng.hpp"

namespace hdglm {

struct SeParams {
  double mu = 0.0;
  double sigma2 = 0.0;
  double eta = 0.0;
};

struct SeProblem {
  double kappa = 0.2;
  double gamma2 = 1.0;
  GlmModel model;
  double lambda = 0.0;       // ridge level; 0 selects the plain system
  long mc_samples = 200000;  // panel size
  std::uint64_t seed = 1;
  double damping = 0.5;
  double tol = 1e-6;
  int max_iter = 1000;

  void validate() const {
    if (!(gamma2 > 0.0)) throw OutOfRange("se: gamma2 must be > 0");
    if (lambda == 0.0) {
      if (!(kappa > 0.0 && kappa < 1.0))
        throw OutOfRange("se: plain mode requires kappa in (0,1)");
    } else {
      if (!(kappa > 0.0)) throw OutOfRange("se: kappa must be > 0");
      if (lambda < 0.0) throw OutOfRange("se: lambda must be >= 0");
    }
    if (mc_samples < 16) throw OutOfRange("se: mc_samples too small");
    if (!(damping > 0.0 && damping <= 1.0))
      throw OutOfRange("se: damping must lie in (0,1]");
  }
};

// Common-random-number panel, fixed for the lifetime of one solve.
struct McPanel {
  Eigen::VectorXd q1, q2;  // standard normal pairs
  Eigen::VectorXd u;       // scalar noise where the law has one (else zero)
  Eigen::VectorXd ybar;    // h(gamma Q1, U)
  std::uint64_t checksum = 0;
};

namespace detail {

inline std::uint64_t panel_checksum(const McPanel& panel) {
  std::uint64_t h = 1469598103934665603ull;
  auto absorb = [&h](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, &v[i], sizeof(bits));
      h = (h ^ bits) * 1099511628211ull;
    }
  };
  absorb(panel.q1);
  absorb(panel.q2);
  absorb(panel.ybar);
  return h;
}

}  // namespace detail

namespace detail {

// Antithetic pairs plus exact standardization: q[2k+1] = -q[2k], then the
// whole vector is scaled to unit sample variance. Both transforms keep
// panel averages unbiased for E[F(Q,...)] and cut the seed-to-seed jitter
// of the solved parameters considerably.
inline void fill_reduced_normals(Eigen::VectorXd& q, Rng& rng) {
  const Eigen::Index m = q.size();
  for (Eigen::Index k = 0; k + 1 < m; k += 2) {
    double v = rng.normal();
    q[k] = v;
    q[k + 1] = -v;
  }
  if (m % 2 == 1) q[m - 1] = 0.0;
  double var = q.squaredNorm() / double(m);
  if (var > 0) q /= std::sqrt(var);
}

}  // namespace detail

inline McPanel make_panel(const SeProblem& prob) {
  const long m = prob.mc_samples;
  McPanel panel;
  panel.q1.resize(m);
  panel.q2.resize(m);
  panel.u.resize(m);
  panel.ybar.resize(m);
  Rng rng_q1(derive_stream(prob.seed, 0));
  Rng rng_q2(derive_stream(prob.seed, 1));
  Rng rng_u(derive_stream(prob.seed, 2));
  detail::fill_reduced_normals(panel.q1, rng_q1);
  detail::fill_reduced_normals(panel.q2, rng_q2);
  const double gamma = std::sqrt(prob.gamma2);
  const auto& link = prob.model.link;
  const auto& law = prob.model.law;
  for (long k = 0; k < m; ++k) {
    double z = gamma * panel.q1[k];
    double gz = link.g(z);
    switch (law.family) {
      case ResponseFamily::Bernoulli: {
        panel.u[k] = rng_u.uniform();
        panel.ybar[k] = panel.u[k] <= gz ? 1.0 : 0.0;
        break;
      }
      case ResponseFamily::Poisson: {
        if (!(gz > 0.0)) throw InvalidRate("se panel: poisson rate must be positive");
        panel.u[k] = 0.0;  // draws consumed from the stream directly
        panel.ybar[k] = double(rng_u.poisson(gz));
        break;
      }
      case ResponseFamily::GaussianAdditive: {
        panel.u[k] = std::sqrt(law.sigma_e2) * rng_u.normal();
        panel.ybar[k] = gz + panel.u[k];
        break;
      }
      case ResponseFamily::Exponential: {
        if (!(gz > 0.0)) throw InvalidRate("se panel: exponential mean must be positive");
        panel.u[k] = rng_u.uniform_pos();
        panel.ybar[k] = -gz * std::log(panel.u[k]);
        break;
      }
    }
  }
  panel.checksum = detail::panel_checksum(panel);
  return panel;
}

struct SeResiduals {
  double r1 = 0.0, r2 = 0.0, r3 = 0.0;     // equation residuals (LHS - RHS)
  double se1 = 0.0, se2 = 0.0, se3 = 0.0;  // Monte-Carlo standard errors
};

namespace detail {

struct PanelMoments {
  double e_inv = 0.0;      // E[(1+eta g'(D))^{-1}]
  double e_zr = 0.0;       // E[Z (Ybar - g(D))]
  double e_r2 = 0.0;       // E[(Ybar - g(D))^2]
  double e_newton = 0.0;   // E[Z^2 g'(D) / (1+eta g'(D))]
  double sd_inv = 0.0, sd_zr = 0.0, sd_r2 = 0.0;
};

}  // namespace detail

class SeSolver {
 public:
  SeSolver(const SeProblem& prob, const McPanel& panel) : prob_(prob), panel_(panel) {
    const Eigen::Index m = panel_.q1.size();
    z_ = std::sqrt(prob_.gamma2) * panel_.q1;
    arg_.resize(m);
    d_.resize(m);
    gd_.resize(m);
    gpd_.resize(m);
  }

  detail::PanelMoments moments(const SeParams& s) {
    const Eigen::Index m = panel_.q1.size();
    const double sigma = std::sqrt(s.sigma2);
    const double sk = std::sqrt(prob_.kappa) * sigma;
    const auto& link = prob_.model.link;
    for (Eigen::Index k = 0; k < m; ++k)
      arg_[k] = s.mu * z_[k] + sk * panel_.q2[k] + s.eta * panel_.ybar[k];
    prox_batch(link, s.eta, arg_.data(), d_.data(), static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < m; ++k) {
      gd_[k] = link.g(d_[k]);
      gpd_[k] = link.dg(d_[k]);
    }
    detail::PanelMoments mo;
    double s_inv = 0, s_inv2 = 0, s_zr = 0, s_zr2 = 0, s_r2 = 0, s_r22 = 0, s_nw = 0;
    for (Eigen::Index k = 0; k < m; ++k) {
      double inv = 1.0 / (1.0 + s.eta * gpd_[k]);
      double r = panel_.ybar[k] - gd_[k];
      double zr = z_[k] * r;
      s_inv += inv;
      s_inv2 += inv * inv;
      s_zr += zr;
      s_zr2 += zr * zr;
      s_r2 += r * r;
      s_r22 += r * r * r * r;
      s_nw += z_[k] * z_[k] * gpd_[k] * inv;
    }
    const double dm = double(m);
    mo.e_inv = s_inv / dm;
    mo.e_zr = s_zr / dm;
    mo.e_r2 = s_r2 / dm;
    mo.e_newton = s_nw / dm;
    mo.sd_inv = std::sqrt(std::max(0.0, s_inv2 / dm - mo.e_inv * mo.e_inv) / dm);
    mo.sd_zr = std::sqrt(std::max(0.0, s_zr2 / dm - mo.e_zr * mo.e_zr) / dm);
    mo.sd_r2 = std::sqrt(std::max(0.0, s_r22 / dm - mo.e_r2 * mo.e_r2) / dm);
    return mo;
  }

  SeParams solve() {
    const double kappa = prob_.kappa, gamma2 = prob_.gamma2, lambda = prob_.lambda;
    SeParams s{1.0, kappa * gamma2 + 1.0, 1.0};
    double delta = prob_.damping;
    double prev_deta = 0.0;
    for (int it = 0; it < prob_.max_iter; ++it) {
      auto mo = moments(s);
      double denom = 1.0 - mo.e_inv + 2.0 * lambda * s.eta;
      if (denom <= 1e-12)
        throw NoConvergence("se: eta update degenerate (kappa too large?)");
      double eta_prop = kappa * s.eta / denom;
      double jac = mo.e_newton + 2.0 * gamma2 * lambda;
      if (jac <= 1e-14) throw DegenerateSignal("se: mu is not identified");
      double mu_prop = s.mu + (mo.e_zr - 2.0 * gamma2 * lambda * s.mu) / jac;
      double sigma2_prop = (eta_prop * eta_prop / (kappa * kappa)) * mo.e_r2;
      if (sigma2_prop <= 0.0)
        throw NegativeVariance("se: nonpositive sigma2 proposal");

      double rel = std::max({std::abs(eta_prop - s.eta) / std::max(1.0, std::abs(s.eta)),
                             std::abs(mu_prop - s.mu) / std::max(1.0, std::abs(s.mu)),
                             std::abs(sigma2_prop - s.sigma2) / std::max(1.0, s.sigma2)});

      double deta = eta_prop - s.eta;
      if (deta * prev_deta < 0.0) delta = std::max(0.05, 0.5 * delta);
      prev_deta = deta;

      s.eta += delta * deta;
      s.mu += delta * (mu_prop - s.mu);
      s.sigma2 += delta * (sigma2_prop - s.sigma2);
      if (!(s.eta > 0.0) || !(s.sigma2 > 0.0))
        throw NegativeVariance("se: iterate left the positive orthant");
      if (rel < prob_.tol) return s;
    }
    throw NoConvergence("se: fixed-point iteration exhausted max_iter");
  }

  SeResiduals residuals(const SeParams& s) {
    auto mo = moments(s);
    const double kappa = prob_.kappa, gamma2 = prob_.gamma2, lambda = prob_.lambda;
    SeResiduals r;
    r.r1 = kappa * kappa * s.sigma2 - s.eta * s.eta * mo.e_r2;
    r.se1 = s.eta * s.eta * mo.sd_r2;
    r.r2 = 2.0 * gamma2 * lambda * s.mu - mo.e_zr;
    r.se2 = mo.sd_zr;
    r.r3 = (1.0 - kappa + 2.0 * lambda * s.eta) - mo.e_inv;
    r.se3 = mo.sd_inv;
    return r;
  }

 private:
  SeProblem prob_;
  const McPanel& panel_;
  Eigen::VectorXd z_, arg_, d_, gd_, gpd_;
};

inline SeParams solve_se(const SeProblem& prob) {
  prob.validate();
  McPanel panel = make_panel(prob);
  const std::uint64_t checksum_before = panel.checksum;
  SeSolver solver(prob, panel);
  SeParams s = solver.solve();
  if (detail::panel_checksum(panel) != checksum_before)
    throw Error("se: panel mutated during solve");
  return s;
}

inline SeResiduals residual_se_on_panel(const SeParams& params, const SeProblem& prob,
                                        const McPanel& panel) {
  SeSolver solver(prob, panel);
  return solver.residuals(params);
}

inline SeResiduals residual_se(const SeParams& params, const SeProblem& prob) {
  McPanel panel = make_panel(prob);
  return residual_se_on_panel(params, prob, panel);
}

// Logistic-regression reference system (the model-specific special case):
//
//   kappa^2 sigma^2 = E[2 g(Z) (eta g(D))^2]
//   0               = E[g(Z) Z g(D)]
//   1 - kappa       = E[2 g(Z) (1 + eta g'(D))^{-1}]
//
// with D = prox_{eta G}(-mu Z + sqrt(kappa) sigma Q2). The minus sign makes
// the system the exact fold of the general one under the Bernoulli response:
// prox_{eta G}(v + eta) = -prox_{eta G}(-v) for the logistic G, and the
// label average then lands every term on the weight 2 g(Z).
inline SeParams logistic_se_reference(double kappa, double gamma2, long mc_samples,
                                      std::uint64_t seed, double damping = 0.5,
                                      double tol = 1e-6, int max_iter = 1000) {
  if (!(kappa > 0.0 && kappa < 0.5))
    throw OutOfRange("logistic reference: kappa must lie in (0, 0.5)");
  if (gamma2 <= 1e-10)
    throw DegenerateSignal("logistic reference: vanishing signal leaves mu unidentified");
  if (mc_samples < 16) throw OutOfRange("logistic reference: mc_samples too small");

  const LinkSpec link = make_link(LinkFamily::Logistic);
  const long m = mc_samples;
  Eigen::VectorXd z(m), q2(m), w(m), arg(m), d(m);
  Rng rng_q1(derive_stream(seed, 0));
  Rng rng_q2(derive_stream(seed, 1));
  detail::fill_reduced_normals(z, rng_q1);
  detail::fill_reduced_normals(q2, rng_q2);
  const double gamma = std::sqrt(gamma2);
  for (long k = 0; k < m; ++k) {
    z[k] *= gamma;
    w[k] = link.g(z[k]);
  }

  SeParams s{1.0, kappa * gamma2 + 1.0, 1.0};
  double delta = damping;
  double prev_deta = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const double sk = std::sqrt(kappa) * std::sqrt(s.sigma2);
    for (long k = 0; k < m; ++k) arg[k] = -s.mu * z[k] + sk * q2[k];
    prox_batch(link, s.eta, arg.data(), d.data(), static_cast<std::size_t>(m));
    double s_inv = 0, s_zg = 0, s_g2 = 0, s_nw = 0;
    for (long k = 0; k < m; ++k) {
      double gd = link.g(d[k]);
      double gpd = link.dg(d[k]);
      double inv = 1.0 / (1.0 + s.eta * gpd);
      s_inv += 2.0 * w[k] * inv;
      s_zg += 2.0 * w[k] * z[k] * gd;
      s_g2 += 2.0 * w[k] * gd * gd;
      s_nw += 2.0 * w[k] * z[k] * z[k] * gpd * inv;
    }
    const double dm = double(m);
    double e_inv = s_inv / dm, e_zg = s_zg / dm, e_g2 = s_g2 / dm, e_nw = s_nw / dm;
    double denom = 1.0 - e_inv;
    if (denom <= 1e-12) throw NoConvergence("logistic reference: eta update degenerate");
    double eta_prop = kappa * s.eta / denom;
    if (e_nw <= 1e-14) throw DegenerateSignal("logistic reference: mu not identified");
    double mu_prop = s.mu + e_zg / e_nw;  // Newton on E[2 g(Z) Z g(D)] = 0
    double sigma2_prop = (eta_prop * eta_prop / (kappa * kappa)) * e_g2;

    double rel = std::max({std::abs(eta_prop - s.eta) / std::max(1.0, s.eta),
                           std::abs(mu_prop - s.mu) / std::max(1.0, std::abs(s.mu)),
                           std::abs(sigma2_prop - s.sigma2) / std::max(1.0, s.sigma2)});
    double deta = eta_prop - s.eta;
    if (deta * prev_deta < 0.0) delta = std::max(0.05, 0.5 * delta);
    prev_deta = deta;
    s.eta += delta * deta;
    s.mu += delta * (mu_prop - s.mu);
    s.sigma2 += delta * (sigma2_prop - s.sigma2);
    if (!(s.eta > 0.0) || !(s.sigma2 > 0.0))
      throw NegativeVariance("logistic reference: iterate left the positive orthant");
    if (rel < tol) return s;
  }
  throw NoConvergence("logistic reference: max_iter exhausted");
}

}  // namespace hdglm
