#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "patt/errors.hpp"

namespace patt {

inline constexpr double k_log_2pi = 1.8378770664093454836;

/* softplus(z) = log(1 + exp(z)), stable for large |z|. */
inline double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

struct cholesky_result {
  Eigen::MatrixXd L;              // lower triangular, L * L^T = Sigma (+ eps*I if regularized)
  double epsilon_used = 0.0;      // 0 when the plain factorization succeeded
  int regularization_steps = 0;   // number of regularized attempts consumed
};

/*
 * Lower Cholesky factor of a symmetric matrix, with escalating diagonal
 * regularization. The plain factorization is attempted first; on failure the
 * factorization retries on Sigma + eps*I with eps growing by a factor of 10,
 * up to 8 regularized attempts. eps <= 0 selects the default
 * 1e-10 * max(1, trace(Sigma)/d). Throws numerical_error if all attempts fail.
 */
inline cholesky_result cholesky_regularized(const Eigen::MatrixXd& sigma, double eps = 0.0) {
  const Eigen::Index d = sigma.rows();
  if (d == 0 || sigma.cols() != d) throw usage_error("cholesky: matrix must be square and non-empty");
  if (!sigma.allFinite()) throw numerical_error("cholesky: matrix has non-finite entries");
  if (eps <= 0.0) eps = 1e-10 * std::max(1.0, sigma.trace() / static_cast<double>(d));

  cholesky_result out;
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) {
    out.L = llt.matrixL();
    if (out.L.diagonal().minCoeff() > 0.0 && out.L.allFinite()) return out;
  }
  double e = eps;
  for (int attempt = 1; attempt <= 8; ++attempt, e *= 10.0) {
    Eigen::MatrixXd reg = sigma;
    reg.diagonal().array() += e;
    llt.compute(reg);
    if (llt.info() == Eigen::Success) {
      out.L = llt.matrixL();
      if (out.L.diagonal().minCoeff() > 0.0 && out.L.allFinite()) {
        out.epsilon_used = e;
        out.regularization_steps = attempt;
        return out;
      }
    }
  }
  throw numerical_error("cholesky: factorization failed after 8 regularized attempts");
}

/* ||L^{-1} r||^2 via forward substitution; L lower triangular. */
inline double quadform_from_chol(const Eigen::MatrixXd& L, const Eigen::VectorXd& r) {
  return L.triangularView<Eigen::Lower>().solve(r).squaredNorm();
}

/*
 * log N_d(x; c, sigma^2 * L L^T). Pass L = nullptr for the identity factor and
 * c = nullptr for the zero mean; those fast paths avoid the triangular solve.
 */
inline double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd* c,
                         const Eigen::MatrixXd* L, double sigma = 1.0) {
  const double d = static_cast<double>(x.size());
  double quad;
  double log_det = 0.0;  // log det of the unit-sigma factor L
  if (L == nullptr) {
    quad = (c == nullptr) ? x.squaredNorm() : (x - *c).squaredNorm();
  } else {
    Eigen::VectorXd r = (c == nullptr) ? x : Eigen::VectorXd(x - *c);
    quad = quadform_from_chol(*L, r);
    log_det = L->diagonal().array().log().sum();
  }
  return -0.5 * quad / (sigma * sigma) - log_det - d * std::log(sigma) - 0.5 * d * k_log_2pi;
}

}  // namespace patt
