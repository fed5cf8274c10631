// Synthetic data generation for the simulation harness. The coefficient
// vector is rescaled exactly so beta^T Sigma beta = gamma2 holds per
// replication, not just in distribution.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "hdglm/covariance.hpp"
#include "hdglm/errors.hpp"
#include "hdglm/parallel.hpp"
#include "hdglm/response.hpp"
#include "hdglm/rng.hpp"

namespace hdglm {

struct Dataset {
  Eigen::MatrixXd X;  // n x p
  Eigen::VectorXd y;  // n
  std::optional<Eigen::VectorXd> beta_true;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

struct SyntheticConfig {
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  double gamma2 = 1.0;
  std::uint64_t seed = 1;

  static SyntheticConfig from_kappa(Eigen::Index n, double kappa, double gamma2,
                                    std::uint64_t seed) {
    SyntheticConfig c;
    c.n = n;
    c.p = static_cast<Eigen::Index>(std::llround(kappa * static_cast<double>(n)));
    c.gamma2 = gamma2;
    c.seed = seed;
    return c;
  }
};

// Stream layout: counter 0 draws beta, counters 1..n the feature rows,
// counters n+1..2n the responses. Rows are independent, so generation is
// parallelized without affecting the result.
inline Dataset sample_dataset(const SyntheticConfig& config, const GlmModel& model,
                              const CovarianceModel& cov) {
  if (config.n <= 0 || config.p <= 0)
    throw DimensionMismatch("sample_dataset: n and p must be positive");
  if (!(config.gamma2 > 0.0)) throw OutOfRange("sample_dataset: gamma2 must be > 0");

  const Eigen::Index n = config.n, p = config.p;

  Rng beta_rng(derive_stream(config.seed, 0));
  Eigen::VectorXd beta(p);
  for (Eigen::Index j = 0; j < p; ++j) beta[j] = beta_rng.normal();
  double q = cov.quad_form(beta);
  beta *= std::sqrt(config.gamma2 / q);

  Dataset ds;
  ds.X.resize(n, p);
  ds.y.resize(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    auto idx = static_cast<Eigen::Index>(i);
    Rng row_rng(derive_stream(config.seed, 1 + i));
    Eigen::VectorXd row(p);
    cov.sample_row(row, row_rng);
    ds.X.row(idx) = row;
    Rng y_rng(derive_stream(config.seed, 1 + static_cast<std::size_t>(n) + i));
    ds.y[idx] = h_sample(model.law, model.link, row.dot(beta), y_rng);
  });
  ds.beta_true = beta;
  return ds;
}

}  // namespace hdglm
