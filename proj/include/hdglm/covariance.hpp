// Feature covariance models with their lower Cholesky factors. AR(1) gets
// O(p) closed-form paths for row sampling, quadratic forms and L^T products;
// explicit SPD matrices go through a cached dense factorization.
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "hdglm/errors.hpp"
#include "hdglm/rng.hpp"

namespace hdglm {

class CovarianceModel {
 public:
  enum class Tag { Identity, Ar1, Explicit };

  static CovarianceModel identity() { return CovarianceModel(Tag::Identity, 0.0, {}); }

  static CovarianceModel ar1(double rho) {
    if (!(rho > -1.0 && rho < 1.0))
      throw OutOfRange("ar1 correlation must lie in (-1,1)");
    return CovarianceModel(Tag::Ar1, rho, {});
  }

  static CovarianceModel explicit_matrix(const Eigen::MatrixXd& sigma) {
    if (sigma.rows() != sigma.cols())
      throw DimensionMismatch("covariance matrix must be square");
    if (!sigma.isApprox(sigma.transpose(), 1e-12))
      throw OutOfRange("covariance matrix must be symmetric");
    CovarianceModel m(Tag::Explicit, 0.0, sigma);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
      throw OutOfRange("covariance matrix must be positive definite");
    m.chol_ = llt.matrixL();
    return m;
  }

  Tag tag() const { return tag_; }
  double rho() const { return rho_; }

  Eigen::MatrixXd sigma(Eigen::Index p) const {
    switch (tag_) {
      case Tag::Identity:
        return Eigen::MatrixXd::Identity(p, p);
      case Tag::Ar1: {
        Eigen::MatrixXd s(p, p);
        for (Eigen::Index i = 0; i < p; ++i)
          for (Eigen::Index j = 0; j < p; ++j)
            s(i, j) = std::pow(rho_, std::abs(double(i - j)));
        return s;
      }
      case Tag::Explicit:
        check_dim(p);
        return sigma_;
    }
    return {};
  }

  // Lower-triangular L with Sigma = L L^T.
  Eigen::MatrixXd chol_lower(Eigen::Index p) const {
    switch (tag_) {
      case Tag::Identity:
        return Eigen::MatrixXd::Identity(p, p);
      case Tag::Ar1: {
        // L(i,0) = rho^i, L(i,j) = rho^(i-j) sqrt(1-rho^2) for 0 < j <= i
        Eigen::MatrixXd l = Eigen::MatrixXd::Zero(p, p);
        double s = std::sqrt(1.0 - rho_ * rho_);
        for (Eigen::Index i = 0; i < p; ++i) {
          l(i, 0) = std::pow(rho_, double(i));
          for (Eigen::Index j = 1; j <= i; ++j)
            l(i, j) = std::pow(rho_, double(i - j)) * s;
        }
        return l;
      }
      case Tag::Explicit:
        check_dim(p);
        return chol_;
    }
    return {};
  }

  // Fills x = L z with z a fresh standard normal vector from rng.
  void sample_row(Eigen::Ref<Eigen::VectorXd> x, Rng& rng) const {
    Eigen::Index p = x.size();
    switch (tag_) {
      case Tag::Identity:
        for (Eigen::Index j = 0; j < p; ++j) x[j] = rng.normal();
        return;
      case Tag::Ar1: {
        double s = std::sqrt(1.0 - rho_ * rho_);
        x[0] = rng.normal();
        for (Eigen::Index j = 1; j < p; ++j) x[j] = rho_ * x[j - 1] + s * rng.normal();
        return;
      }
      case Tag::Explicit: {
        check_dim(p);
        Eigen::VectorXd z(p);
        for (Eigen::Index j = 0; j < p; ++j) z[j] = rng.normal();
        x = chol_.triangularView<Eigen::Lower>() * z;
        return;
      }
    }
  }

  double quad_form(const Eigen::VectorXd& b) const {
    switch (tag_) {
      case Tag::Identity:
        return b.squaredNorm();
      case Tag::Ar1: {
        // (Sigma b)_i = a_i + c_i with forward scan a_i = sum_{j<=i} rho^(i-j) b_j
        // and backward scan c_i = sum_{j>i} rho^(j-i) b_j
        Eigen::Index p = b.size();
        Eigen::VectorXd a(p), c(p);
        a[0] = b[0];
        for (Eigen::Index i = 1; i < p; ++i) a[i] = rho_ * a[i - 1] + b[i];
        c[p - 1] = 0.0;
        for (Eigen::Index i = p - 2; i >= 0; --i) c[i] = rho_ * (b[i + 1] + c[i + 1]);
        double total = 0.0;
        for (Eigen::Index i = 0; i < p; ++i) total += b[i] * (a[i] + c[i]);
        return total;
      }
      case Tag::Explicit:
        check_dim(b.size());
        return b.dot(sigma_ * b);
    }
    return 0.0;
  }

  // theta = L^T b (used by the empirical state-evolution functionals).
  Eigen::VectorXd lt_product(const Eigen::VectorXd& b) const {
    Eigen::Index p = b.size();
    switch (tag_) {
      case Tag::Identity:
        return b;
      case Tag::Ar1: {
        // (L^T b)_0 = sum_i rho^i b_i ; (L^T b)_j = s * sum_{i>=j} rho^(i-j) b_i
        double s = std::sqrt(1.0 - rho_ * rho_);
        Eigen::VectorXd tail(p);
        tail[p - 1] = b[p - 1];
        for (Eigen::Index i = p - 2; i >= 0; --i) tail[i] = b[i] + rho_ * tail[i + 1];
        Eigen::VectorXd out(p);
        out[0] = tail[0];
        for (Eigen::Index j = 1; j < p; ++j) out[j] = s * tail[j];
        return out;
      }
      case Tag::Explicit:
        check_dim(p);
        return chol_.triangularView<Eigen::Lower>().transpose() * b;
    }
    return {};
  }

 private:
  CovarianceModel(Tag tag, double rho, Eigen::MatrixXd sigma)
      : tag_(tag), rho_(rho), sigma_(std::move(sigma)) {}

  void check_dim(Eigen::Index p) const {
    if (sigma_.rows() != p)
      throw DimensionMismatch("covariance dimension does not match p");
  }

  Tag tag_;
  double rho_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd chol_;
};

}  // namespace hdglm
