#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "hdglm/calibrate.hpp"
#include "hdglm/fit.hpp"
#include "hdglm/inference.hpp"

using namespace hdglm;

TEST_CASE("normal quantile reference values", "[inference]") {
  CHECK(normal_quantile(0.5) == Catch::Approx(0.0).margin(1e-12));
  CHECK(normal_quantile(0.975) == Catch::Approx(1.959963984540054).margin(1e-9));
  CHECK(normal_quantile(0.95) == Catch::Approx(1.6448536269514722).margin(1e-9));
  CHECK(normal_quantile(0.025) == Catch::Approx(-1.959963984540054).margin(1e-9));
  CHECK(normal_quantile(1e-9) == Catch::Approx(-5.997807015008182).margin(1e-7));
  CHECK_THROWS_AS(normal_quantile(0.0), OutOfRange);
  CHECK_THROWS_AS(normal_quantile(1.0), OutOfRange);
  // round trip against the cdf across the domain
  for (double q = 0.001; q < 0.9995; q += 0.001)
    CHECK(normal_cdf(normal_quantile(q)) == Catch::Approx(q).margin(1e-11));
}

TEST_CASE("corrected interval arithmetic", "[inference]") {
  Eigen::VectorXd beta(2);
  beta << 0.4, -0.2;
  Eigen::VectorXd tau2 = Eigen::VectorXd::Ones(2);
  SeParams se{1.0, 1.0, 0.5};
  auto rep = corrected_ci(beta, se, tau2, 0.1, 100);
  CHECK(rep.rows[0].center == Catch::Approx(0.4));
  double half = (rep.rows[0].hi - rep.rows[0].lo) / 2.0;
  CHECK(half == Catch::Approx(1.6448536269514722 / 10.0).margin(1e-9));

  SeParams se2{2.0, 1.0, 0.5};
  auto rep2 = corrected_ci(beta, se2, tau2, 0.1, 100);
  CHECK(rep2.rows[0].center == Catch::Approx(0.2));

  SeParams bad{-0.3, 1.0, 0.5};
  CHECK_THROWS_AS(corrected_ci(beta, bad, tau2, 0.1, 100), NonPositiveMu);
}

TEST_CASE("corrected width identity holds to 1e-12 and intervals nest", "[inference]") {
  Rng rng(15);
  Eigen::Index p = 50, n = 700;
  Eigen::VectorXd beta(p), tau2(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    beta[j] = rng.normal();
    tau2[j] = 0.5 + rng.uniform();
  }
  SeParams se{1.13, 2.4, 0.61};
  auto narrow = corrected_ci(beta, se, tau2, 0.10, n);
  auto wide = corrected_ci(beta, se, tau2, 0.05, n);
  const double zq = normal_quantile(0.95);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& row = narrow.rows[j];
    double width_stat = (row.hi - row.lo) * std::sqrt(double(n)) * se.mu * row.tau_hat /
                        (2.0 * std::sqrt(se.sigma2));
    CHECK(std::abs(width_stat - zq) <= 1e-12);
    CHECK(row.lo <= row.center);
    CHECK(row.center <= row.hi);
    // smaller alpha must contain the larger-alpha interval
    CHECK(wide.rows[j].lo <= row.lo);
    CHECK(wide.rows[j].hi >= row.hi);
  }
}

TEST_CASE("classical interval reduces to the textbook z-interval", "[inference]") {
  Dataset ds;
  Rng rng(3);
  ds.X.resize(40, 1);
  for (int i = 0; i < 40; ++i) ds.X(i, 0) = rng.normal();
  ds.y.resize(40);
  for (int i = 0; i < 40; ++i) ds.y[i] = 0.8 * ds.X(i, 0) + rng.normal();
  auto linear = make_link(LinkFamily::Linear);
  auto fit = fit_surrogate(ds, linear);
  auto rep = classical_ci(ds, linear, fit.beta_hat, 0.05);
  double half = 1.959963984540054 / std::sqrt(ds.X.col(0).squaredNorm());
  CHECK((rep.rows[0].hi - rep.rows[0].lo) / 2.0 == Catch::Approx(half).margin(1e-9));
  CHECK(rep.rows[0].center == Catch::Approx(fit.beta_hat[0]));
}

TEST_CASE("column rescaling maps estimates and intervals consistently", "[inference]") {
  GlmModel model{make_link(LinkFamily::ClippedExp, 50.0), {ResponseFamily::Poisson}};
  auto cfg = SyntheticConfig::from_kappa(400, 0.1, 1.0, 66);
  auto ds = sample_dataset(cfg, model, CovarianceModel::identity());
  const Eigen::Index j = 3;
  const double c = 2.5;

  auto fit1 = fit_surrogate(ds, model.link);
  auto tau1 = estimate_tau2(ds);
  SeParams se{1.05, 1.3, 0.4};
  auto rep1 = corrected_ci(fit1.beta_hat, se, tau1, 0.1, ds.n());

  Dataset scaled = ds;
  scaled.X.col(j) *= c;
  auto fit2 = fit_surrogate(scaled, model.link);
  auto tau2v = estimate_tau2(scaled);
  auto rep2 = corrected_ci(fit2.beta_hat, se, tau2v, 0.1, ds.n());

  CHECK(fit2.beta_hat[j] == Catch::Approx(fit1.beta_hat[j] / c).margin(1e-6));
  CHECK(std::sqrt(tau2v[j]) == Catch::Approx(std::sqrt(tau1[j]) * c).epsilon(1e-9));
  CHECK(rep2.rows[j].lo == Catch::Approx(rep1.rows[j].lo / c).margin(1e-6));
  CHECK(rep2.rows[j].hi == Catch::Approx(rep1.rows[j].hi / c).margin(1e-6));
}

TEST_CASE("linear predictor interval centers at the fit when eta vanishes", "[inference]") {
  Dataset ds;
  Rng rng(9);
  ds.X.resize(25, 2);
  for (int i = 0; i < 25; ++i) {
    ds.X(i, 0) = rng.normal();
    ds.X(i, 1) = rng.normal();
  }
  Eigen::VectorXd beta(2);
  beta << 0.5, -0.3;
  auto linear = make_link(LinkFamily::Linear);
  ds.y = ds.X * beta;  // noiseless
  SeParams se{1.0, 0.7, 1e-14};
  auto rep = linear_predictor_ci(ds, beta, se, linear, 0.1);
  for (int i = 0; i < 25; ++i) {
    CHECK(rep.rows[i].center == Catch::Approx(ds.X.row(i).dot(beta)).margin(1e-9));
    CHECK(rep.rows[i].lo <= rep.rows[i].center);
    CHECK(rep.rows[i].center <= rep.rows[i].hi);
  }
}

TEST_CASE("ridge debias map", "[inference]") {
  Eigen::VectorXd beta(3);
  beta << 0.2, -0.4, 0.0;
  CHECK((debias_ridge(beta, 0.0, 0.1) - beta).norm() == 0.0);
  CHECK(debias_ridge(Eigen::VectorXd::Zero(3), 0.7, 0.1).norm() == 0.0);
  CHECK((debias_ridge(beta, 0.25, 0.1) - 1.5 * beta).norm() <= 1e-15);
  CHECK_THROWS_AS(debias_ridge(beta, 0.5, 0.0), OutOfRange);
}

TEST_CASE("pivot statistics", "[inference]") {
  Rng rng(2);
  Eigen::Index p = 20;
  Eigen::VectorXd beta(p), tau2(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    beta[j] = rng.normal();
    tau2[j] = 1.0;
  }
  SeParams se{1.2, 2.0, 0.5};
  auto zero = pivot_stats(se.mu * beta, beta, se, tau2, 500);
  CHECK(zero.values.cwiseAbs().maxCoeff() <= 1e-12);

  Eigen::VectorXd beta_hat = beta * 1.5;
  auto base = pivot_stats(beta_hat, beta, se, tau2, 500);
  SeParams scaled = se;
  scaled.sigma2 = se.sigma2 * 4.0;  // sigma doubles, pivots halve
  auto half = pivot_stats(beta_hat, beta, scaled, tau2, 500);
  CHECK((half.values * 2.0 - base.values).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(pivot_stats(beta_hat, Eigen::VectorXd(), se, tau2, 500), MissingTruth);
}
