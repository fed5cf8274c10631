// Confidence intervals: the bias-corrected per-coordinate interval
//
//   [ beta_j/mu - z_{1-a/2} sigma/(sqrt(n) mu tau_j),
//     beta_j/mu + z_{1-a/2} sigma/(sqrt(n) mu tau_j) ]
//
// the classical Fisher-information interval, the linear-predictor interval,
// and the debiased ridge map.
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "hdglm/calibrate.hpp"
#include "hdglm/dataset.hpp"
#include "hdglm/errors.hpp"
#include "hdglm/se.hpp"

namespace hdglm {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * 0.3989422804014327;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865476); }

// Inverse standard-normal CDF: rational initial guess (Acklam) polished by
// two Newton steps against the erfc-based CDF.
inline double normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw OutOfRange("normal_quantile: q must lie in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  double x;
  if (q < plow) {
    double u = std::sqrt(-2.0 * std::log(q));
    x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  } else if (q <= phigh) {
    double u = q - 0.5, r = u * u;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double u = std::sqrt(-2.0 * std::log(1.0 - q));
    x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  for (int it = 0; it < 2; ++it) x -= (normal_cdf(x) - q) / normal_pdf(x);
  return x;
}

enum class CiMethod { Corrected, Classical, LinearPredictor, DebiasedRidge };

struct CiRow {
  Eigen::Index j = 0;       // coordinate (or observation) index
  double beta_hat_j = 0.0;  // raw estimate the row is built from
  double center = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double tau_hat = 0.0;  // 0 when not applicable to the method
};

struct CiReport {
  double alpha = 0.1;
  std::vector<CiRow> rows;
  SeParams se;
  std::optional<HyperEstimates> hyper;
  CiMethod method = CiMethod::Corrected;
};

inline const char* method_name(CiMethod m) {
  switch (m) {
    case CiMethod::Corrected: return "corrected";
    case CiMethod::Classical: return "classical";
    case CiMethod::LinearPredictor: return "linear-predictor";
    case CiMethod::DebiasedRidge: return "debiased-ridge";
  }
  return "?";
}

inline CiReport corrected_ci(const Eigen::VectorXd& beta_hat, const SeParams& se,
                             const Eigen::VectorXd& tau2_hat, double alpha,
                             Eigen::Index n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw OutOfRange("corrected_ci: alpha in (0,1)");
  if (!(se.mu > 0.0))
    throw NonPositiveMu("corrected_ci: mu <= 0 signals a failed SE solve");
  if (beta_hat.size() != tau2_hat.size())
    throw DimensionMismatch("corrected_ci: tau2 size mismatch");
  const double zq = normal_quantile(1.0 - alpha / 2.0);
  const double sigma = std::sqrt(se.sigma2);
  const double root_n = std::sqrt(double(n));
  CiReport rep;
  rep.alpha = alpha;
  rep.se = se;
  rep.method = CiMethod::Corrected;
  rep.rows.resize(beta_hat.size());
  for (Eigen::Index j = 0; j < beta_hat.size(); ++j) {
    double tau = std::sqrt(tau2_hat[j]);
    double center = beta_hat[j] / se.mu;
    double half = zq * sigma / (root_n * se.mu * tau);
    rep.rows[j] = {j, beta_hat[j], center, center - half, center + half, tau};
  }
  return rep;
}

inline CiReport classical_ci(const Dataset& data, const LinkSpec& link,
                             const Eigen::VectorXd& beta_hat, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw OutOfRange("classical_ci: alpha in (0,1)");
  const Eigen::Index n = data.n(), p = data.p();
  if (beta_hat.size() != p) throw DimensionMismatch("classical_ci: coefficient size");
  Eigen::VectorXd lin = data.X * beta_hat;
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = link.dg(lin[i]);
  Eigen::MatrixXd info(p, p);
  info.setZero();
  Eigen::MatrixXd xs = w.cwiseSqrt().asDiagonal() * data.X;
  info.selfadjointView<Eigen::Lower>().rankUpdate(xs.transpose());
  info /= double(n);
  Eigen::LLT<Eigen::MatrixXd> llt(info.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success)
    throw SingularInformation("classical_ci: empirical Fisher information is singular");
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
  const double zq = normal_quantile(1.0 - alpha / 2.0);
  CiReport rep;
  rep.alpha = alpha;
  rep.method = CiMethod::Classical;
  rep.rows.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double half = zq * std::sqrt(inv(j, j) / double(n));
    rep.rows[j] = {j, beta_hat[j], beta_hat[j], beta_hat[j] - half, beta_hat[j] + half, 0.0};
  }
  return rep;
}

// Per-observation interval for x_i^T beta from the linear-predictor pivot
// (x_i^T beta_hat + eta l'_i - mu_Z x_i^T beta)/sigma_Z with l'_i =
// g(x_i^T beta_hat) - y_i. The state-evolution variable D identifies
// mu_Z = mu and sigma_Z = sqrt(kappa) sigma.
inline CiReport linear_predictor_ci(const Dataset& data, const Eigen::VectorXd& beta_hat,
                                    const SeParams& se, const LinkSpec& link,
                                    double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw OutOfRange("linear_predictor_ci: alpha in (0,1)");
  if (!(se.mu > 0.0)) throw NonPositiveMu("linear_predictor_ci: mu <= 0");
  const Eigen::Index n = data.n();
  const double kappa = double(data.p()) / double(n);
  const double sigma_z = std::sqrt(kappa * se.sigma2);
  const double zq = normal_quantile(1.0 - alpha / 2.0);
  Eigen::VectorXd lin = data.X * beta_hat;
  CiReport rep;
  rep.alpha = alpha;
  rep.se = se;
  rep.method = CiMethod::LinearPredictor;
  rep.rows.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double score = link.g(lin[i]) - data.y[i];
    double raw = lin[i] + se.eta * score;
    double center = raw / se.mu;
    double half = sigma_z * zq / se.mu;
    rep.rows[i] = {i, lin[i], center, center - half, center + half, 0.0};
  }
  return rep;
}

// Ridge debiasing for J(t) = t^2: beta + eta J'(beta) = (1 + 2 eta) beta.
inline Eigen::VectorXd debias_ridge(const Eigen::VectorXd& beta_ridge, double eta,
                                    double lambda) {
  if (eta < 0.0) throw OutOfRange("debias_ridge: eta must be >= 0");
  if (!(lambda > 0.0)) throw OutOfRange("debias_ridge: lambda must be > 0");
  return (1.0 + 2.0 * eta) * beta_ridge;
}

struct PivotSample {
  Eigen::VectorXd values;
};

// sqrt(n) (beta_hat_j - mu beta_j) tau_j / sigma, one value per coordinate.
inline PivotSample pivot_stats(const Eigen::VectorXd& beta_hat,
                               const Eigen::VectorXd& beta_true, const SeParams& se,
                               const Eigen::VectorXd& tau2_hat, Eigen::Index n) {
  if (beta_true.size() == 0) throw MissingTruth("pivot_stats: beta_true required");
  if (beta_hat.size() != beta_true.size() || beta_hat.size() != tau2_hat.size())
    throw DimensionMismatch("pivot_stats: size mismatch");
  const double root_n = std::sqrt(double(n));
  const double sigma = std::sqrt(se.sigma2);
  PivotSample out;
  out.values.resize(beta_hat.size());
  for (Eigen::Index j = 0; j < beta_hat.size(); ++j)
    out.values[j] =
        root_n * (beta_hat[j] - se.mu * beta_true[j]) * std::sqrt(tau2_hat[j]) / sigma;
  return out;
}

}  // namespace hdglm
