#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "hdglm/csv.hpp"
#include "hdglm/dataset.hpp"

using namespace hdglm;

TEST_CASE("ar1 cholesky reconstructs sigma", "[covariance]") {
  auto cov = CovarianceModel::ar1(0.5);
  Eigen::Index p = 17;
  Eigen::MatrixXd l = cov.chol_lower(p);
  Eigen::MatrixXd s = cov.sigma(p);
  CHECK((l * l.transpose() - s).cwiseAbs().maxCoeff() <= 1e-10);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      CHECK(s(i, j) == Catch::Approx(std::pow(0.5, std::abs(double(i - j)))));
}

TEST_CASE("explicit covariance factors and validates", "[covariance]") {
  Eigen::MatrixXd s(2, 2);
  s << 2.0, 0.3, 0.3, 1.0;
  auto cov = CovarianceModel::explicit_matrix(s);
  Eigen::MatrixXd l = cov.chol_lower(2);
  CHECK((l * l.transpose() - s).cwiseAbs().maxCoeff() <= 1e-12);

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
  CHECK_THROWS_AS(CovarianceModel::explicit_matrix(bad), OutOfRange);
}

TEST_CASE("ar1 fast paths agree with dense algebra", "[covariance]") {
  auto cov = CovarianceModel::ar1(-0.35);
  Eigen::Index p = 31;
  Rng rng(5);
  Eigen::VectorXd b(p);
  for (Eigen::Index j = 0; j < p; ++j) b[j] = rng.normal();
  Eigen::MatrixXd s = cov.sigma(p);
  Eigen::MatrixXd l = cov.chol_lower(p);
  CHECK(cov.quad_form(b) == Catch::Approx(b.dot(s * b)).epsilon(1e-12));
  Eigen::VectorXd lt = cov.lt_product(b);
  Eigen::VectorXd lt_ref = l.transpose() * b;
  CHECK((lt - lt_ref).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("beta is rescaled to hit gamma2 exactly", "[dataset]") {
  GlmModel model{make_link(LinkFamily::ClippedExp, 50.0), {ResponseFamily::Poisson}};
  SyntheticConfig cfg = SyntheticConfig::from_kappa(200, 0.25, 1.0, 42);
  auto ds = sample_dataset(cfg, model, CovarianceModel::identity());
  REQUIRE(ds.beta_true.has_value());
  CHECK(ds.beta_true->squaredNorm() == Catch::Approx(1.0).margin(1e-12));

  auto cov = CovarianceModel::ar1(0.5);
  auto ds2 = sample_dataset(cfg, model, cov);
  CHECK(cov.quad_form(*ds2.beta_true) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("sampling is bitwise reproducible", "[dataset]") {
  GlmModel model{make_link(LinkFamily::ClippedExp, 50.0), {ResponseFamily::Poisson}};
  SyntheticConfig cfg = SyntheticConfig::from_kappa(150, 0.3, 1.0, 9001);
  auto cov = CovarianceModel::ar1(0.5);
  auto a = sample_dataset(cfg, model, cov);
  auto b = sample_dataset(cfg, model, cov);
  CHECK(a.X == b.X);
  CHECK(a.y == b.y);
  CHECK(*a.beta_true == *b.beta_true);

  cfg.seed = 9002;
  auto c = sample_dataset(cfg, model, cov);
  CHECK(a.y != c.y);
}

TEST_CASE("sample mean of y matches an independent monte-carlo oracle", "[dataset][slow]") {
  GlmModel model{make_link(LinkFamily::ClippedExp, 50.0), {ResponseFamily::Poisson}};
  SyntheticConfig cfg = SyntheticConfig::from_kappa(4000, 0.3, 1.0, 77);
  auto ds = sample_dataset(cfg, model, CovarianceModel::ar1(0.5));

  // oracle: E g(Z) with Z ~ N(0,1) by independent MC
  Rng rng(123456);
  const long m = 400000;
  double s = 0.0, s2 = 0.0;
  for (long k = 0; k < m; ++k) {
    double v = model.link.g(rng.normal());
    s += v;
    s2 += v * v;
  }
  double oracle_mean = s / m;
  double oracle_var = s2 / m - oracle_mean * oracle_mean;
  // y-variance dominates the oracle error; Poisson gives Var(Y) = E Var + Var E
  double y_se = std::sqrt((oracle_mean + oracle_var) / cfg.n + oracle_var / m);
  CHECK(std::abs(ds.y.mean() - oracle_mean) <= 4.0 * y_se);
}

TEST_CASE("empirical covariance of rows converges to sigma", "[dataset][slow]") {
  GlmModel model{make_link(LinkFamily::Piecewise, 5.0, 0.1),
                 {ResponseFamily::GaussianAdditive, 0.04}};
  SyntheticConfig cfg;
  cfg.n = 100000;
  cfg.p = 10;
  cfg.gamma2 = 1.0;
  cfg.seed = 11;
  auto cov = CovarianceModel::ar1(0.5);
  auto ds = sample_dataset(cfg, model, cov);
  Eigen::MatrixXd emp = (ds.X.transpose() * ds.X) / double(cfg.n);
  CHECK((emp - cov.sigma(cfg.p)).cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("csv round trip", "[csv]") {
  GlmModel model{make_link(LinkFamily::ClippedExp, 50.0), {ResponseFamily::Poisson}};
  SyntheticConfig cfg = SyntheticConfig::from_kappa(40, 0.2, 1.0, 3);
  auto ds = sample_dataset(cfg, model, CovarianceModel::identity());

  auto dir = std::filesystem::temp_directory_path();
  auto csv = (dir / "hdglm_test_ds.csv").string();
  auto side = (dir / "hdglm_test_beta.csv").string();
  write_dataset_csv(csv, ds);
  write_vector(side, *ds.beta_true);

  auto back = read_dataset_csv(csv);
  REQUIRE(back.n() == ds.n());
  REQUIRE(back.p() == ds.p());
  CHECK((back.X - ds.X).cwiseAbs().maxCoeff() == 0.0);  // shortest round-trip is exact
  CHECK((back.y - ds.y).cwiseAbs().maxCoeff() == 0.0);
  auto beta = read_vector(side);
  CHECK((beta - *ds.beta_true).cwiseAbs().maxCoeff() == 0.0);
  std::remove(csv.c_str());
  std::remove(side.c_str());
}

TEST_CASE("malformed csv is rejected", "[csv]") {
  auto dir = std::filesystem::temp_directory_path();
  auto path = (dir / "hdglm_bad.csv").string();
  {
    std::ofstream out(path);
    out << "x1,x2,y\n1.0,2.0,3.0\n4.0,5.0\n";
  }
  CHECK_THROWS_AS(read_dataset_csv(path), ParseError);
  std::remove(path.c_str());
}
