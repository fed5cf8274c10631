// Hyper-parameter estimation from data: the signal strength gamma^2 by
// inverting the simulated mean curve sigma -> mean_k g(sigma z_k), the
// Gaussian noise variance sigma_e^2 by the split second-moment difference,
// and the conditional feature variances tau_j^2 via the Gram identity.
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>

#include "hdglm/dataset.hpp"
#include "hdglm/errors.hpp"
#include "hdglm/link.hpp"
#include "hdglm/parallel.hpp"
#include "hdglm/rng.hpp"

namespace hdglm {

struct HyperEstimates {
  double gamma2_hat = 0.0;
  std::optional<double> sigma_e2_hat;  // present only for gaussian responses
  Eigen::VectorXd tau2_hat;
  long mc_samples_used = 0;
  std::string split_spec;
};

// One fixed standard-normal panel shared across every scale sigma, so the
// simulated curve is a smooth deterministic function of sigma. The panel is
// standardized to exact mean zero and unit variance, which pins curve(0) at
// g(0) with zero slope and keeps the curve monotone at practical scales.
class MeanCurve {
 public:
  MeanCurve(const LinkSpec& link, long m, std::uint64_t seed) : link_(link), z_(m) {
    if (m < 2) throw OutOfRange("mean curve needs at least 2 panel points");
    Rng rng(derive_stream(seed, 0));
    for (long k = 0; k < m; ++k) z_[k] = rng.normal();
    double mean = z_.mean();
    z_.array() -= mean;
    double sd = std::sqrt(z_.squaredNorm() / double(m));
    if (sd > 0) z_ /= sd;
  }

  long size() const { return z_.size(); }

  // mean of g(varsigma z_k)
  double operator()(double varsigma) const {
    return reduce([&](double z) { return link_.g(varsigma * z); });
  }

  // mean of g(varsigma z_k)^2
  double second_moment(double varsigma) const {
    return reduce([&](double z) {
      double v = link_.g(varsigma * z);
      return v * v;
    });
  }

 private:
  template <typename Fn>
  double reduce(Fn&& fn) const {
    const Eigen::Index m = z_.size();
    const Eigen::Index chunk = 65536;
    const std::size_t nchunks = static_cast<std::size_t>((m + chunk - 1) / chunk);
    std::vector<double> partial(nchunks, 0.0);
    parallel_for(nchunks, [&](std::size_t c) {
      Eigen::Index begin = static_cast<Eigen::Index>(c) * chunk;
      Eigen::Index end = std::min(m, begin + chunk);
      double s = 0.0;
      for (Eigen::Index k = begin; k < end; ++k) s += fn(z_[k]);
      partial[c] = s;
    });
    double total = 0.0;
    for (double s : partial) total += s;  // fixed merge order
    return total / double(m);
  }

  LinkSpec link_;
  Eigen::VectorXd z_;
};

inline double simulated_mean_curve(const LinkSpec& link, double varsigma, long m,
                                   std::uint64_t seed) {
  if (varsigma < 0.0) throw OutOfRange("simulated_mean_curve: varsigma must be >= 0");
  return MeanCurve(link, m, seed)(varsigma);
}

namespace detail {

// Inverts the shared-panel curve at y_mean by bisection on [0, bracket_hi],
// doubling the upper end at most 40 times. Returns varsigma*.
inline double invert_mean_curve(const MeanCurve& curve, const LinkSpec& link,
                                double y_mean, double bracket_hi) {
  if (!link.even_part_strictly_monotone)
    throw OddLink("estimate_gamma2: the even part of '" + link.family_name() +
                  "' is not strictly monotone, the mean curve cannot be inverted");
  if (!std::isfinite(y_mean)) throw OutOfRange("estimate_gamma2: y_mean must be finite");
  if (!(bracket_hi > 0.0)) throw OutOfRange("estimate_gamma2: bracket_hi must be > 0");

  const double c0 = link.g(0.0);  // curve(0) exactly, by standardization
  double hi = bracket_hi;
  double chi = curve(hi);
  const bool increasing = chi > c0;
  auto above = [&](double value) { return increasing ? value > y_mean : value < y_mean; };

  if (above(c0) || y_mean == c0)
    throw NoBracket("estimate_gamma2: response mean sits on the wrong side of g(0)");
  int doublings = 0;
  while (!above(chi)) {
    if (++doublings > 40)
      throw NoBracket("estimate_gamma2: response mean outside the curve range");
    hi *= 2.0;
    chi = curve(hi);
  }
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double cm = curve(mid);
    if (std::abs(cm - y_mean) <= 1e-10 * std::max(1.0, std::abs(y_mean))) return mid;
    if (above(cm))
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 1e-13 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

inline double estimate_gamma2(double y_mean, const LinkSpec& link, long m,
                              std::uint64_t seed, double bracket_hi = 8.0) {
  MeanCurve curve(link, m, seed);
  double vs = detail::invert_mean_curve(curve, link, y_mean, bracket_hi);
  return vs * vs;
}

// Split estimator of the Gaussian noise variance: gamma is estimated on the
// second half of the sample, the second moment on the first half, and the
// difference is floored at zero.
inline double estimate_sigma_e2(const Dataset& data, const LinkSpec& link, long m,
                                std::uint64_t seed, double bracket_hi = 8.0) {
  const Eigen::Index n = data.n();
  if (n < 20) throw InsufficientData("estimate_sigma_e2: need at least 20 rows");
  const Eigen::Index half = n / 2;

  double mean_yc = 0.0;
  for (Eigen::Index i = half; i < n; ++i) mean_yc += data.y[i];
  mean_yc /= double(n - half);

  MeanCurve curve(link, m, seed);
  double gamma_hat = detail::invert_mean_curve(curve, link, mean_yc, bracket_hi);

  double mean_y2 = 0.0;
  for (Eigen::Index i = 0; i < half; ++i) mean_y2 += data.y[i] * data.y[i];
  mean_y2 /= double(half);

  return std::max(0.0, mean_y2 - curve.second_moment(gamma_hat));
}

// tau_j^2 = RSS_j / (n - p + 1) with RSS_j = 1 / [(X^T X)^{-1}]_{jj}; one
// factorization covers all coordinates.
inline Eigen::VectorXd estimate_tau2(const Dataset& data) {
  const Eigen::Index n = data.n(), p = data.p();
  if (n <= p) throw InsufficientData("estimate_tau2: requires n > p");
  Eigen::MatrixXd gram(p, p);
  gram.setZero();
  gram.selfadjointView<Eigen::Lower>().rankUpdate(data.X.transpose());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram.selfadjointView<Eigen::Lower>());
  // LDLT tolerates exact collinearity; a collapsed pivot ratio exposes it
  double dmax = ldlt.vectorD().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(dmax > 0.0) ||
      ldlt.vectorD().minCoeff() <= 1e-12 * dmax)
    throw RankDeficient("estimate_tau2: X does not have full column rank");
  Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::VectorXd tau2(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double d = inv(j, j);
    if (!(d > 0.0)) throw RankDeficient("estimate_tau2: nonpositive inverse diagonal");
    tau2[j] = 1.0 / (d * double(n - p + 1));
  }
  return tau2;
}

}  // namespace hdglm
